// Typed client for the analysis service. The curves endpoint streams one
// JSON line per completed point before the final document; onProgress
// fires per line so charts can fill in incrementally.

import type {
  AnalyzeResponse,
  CurveProgress,
  CurvesDocument,
  NetworkParamsForm,
  Phase,
  StrategyInfo,
} from "./types.js";

export interface CurvesRequest {
  kinds: string[];
  thresholds?: number[] | Record<string, number[]>;
  params?: Partial<NetworkParamsForm>;
  phases?: Phase[];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function raiseFor(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") detail = body.error;
  } catch {
    // keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  async strategies(): Promise<StrategyInfo[]> {
    const response = await fetch(`${this.base}/api/strategies`);
    if (!response.ok) await raiseFor(response);
    return response.json();
  }

  async analyze(
    kind: string,
    threshold: number,
    params?: Partial<NetworkParamsForm>,
    signal?: AbortSignal,
  ): Promise<AnalyzeResponse> {
    const response = await fetch(`${this.base}/api/analyze`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ kind, threshold, params }),
      signal,
    });
    if (!response.ok) await raiseFor(response);
    return response.json();
  }

  // Reads the chunked line protocol; resolves with the terminating full
  // document. Lines may arrive split or batched across chunks.
  async curves(
    request: CurvesRequest,
    onProgress?: (p: CurveProgress) => void,
    signal?: AbortSignal,
  ): Promise<CurvesDocument> {
    const response = await fetch(`${this.base}/api/curves`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    if (!response.ok) await raiseFor(response);
    if (!response.body) {
      return response.json();
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    let document: CurvesDocument | null = null;
    const consume = (line: string) => {
      const trimmed = line.trim();
      if (!trimmed) return;
      const parsed = JSON.parse(trimmed);
      if (parsed.progress && onProgress) onProgress(parsed.progress as CurveProgress);
      if (parsed.curves) document = parsed as CurvesDocument;
    };
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let newline = buffer.indexOf("\n");
      while (newline >= 0) {
        consume(buffer.slice(0, newline));
        buffer = buffer.slice(newline + 1);
        newline = buffer.indexOf("\n");
      }
    }
    buffer += decoder.decode();
    consume(buffer);
    if (!document) throw new ApiError(502, "stream ended without a curves document");
    return document;
  }
}
