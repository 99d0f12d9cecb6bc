// Pure SVG builders for the two chart types. No DOM access: both return
// markup strings, which keeps them unit-testable and lets the app layer
// drop them into innerHTML. Data attributes on the point markers carry
// the hover payload.

import type { Curve, Phase } from "./types.js";

const KIND_COLORS: Record<string, string> = {
  LB: "#1f77b4",
  JB: "#ff7f0e",
  JLB: "#2ca02c",
  TB: "#d62728",
  MB: "#9467bd",
  HY: "#8c564b",
};

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 24, right: 20, bottom: 42, left: 54 };

interface Scale {
  (value: number): number;
}

function linearScale(domainMin: number, domainMax: number, rangeMin: number, rangeMax: number): Scale {
  const span = domainMax - domainMin || 1;
  return (value: number) => rangeMin + ((value - domainMin) / span) * (rangeMax - rangeMin);
}

function niceTicks(min: number, max: number, count = 6): number[] {
  const span = max - min || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const tick = step * factor;
  const start = Math.ceil(min / tick) * tick;
  const ticks: number[] = [];
  for (let v = start; v <= max + 1e-12; v += tick) ticks.push(Number(v.toPrecision(12)));
  return ticks;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function colorFor(kind: string): string {
  return KIND_COLORS[kind] ?? "#555555";
}

export interface CurveChartOptions {
  pinned?: { label: string; curves: Curve[] }[];
  stabilisationByPoint?: Record<string, number>; // "kind/threshold" -> month
}

// Scatter/line chart: cost per month on x, risk percentage on y, one
// series per (kind, phase); before-phase series are dashed with square
// markers. Pinned snapshots render dimmed underneath the live series.
export function curveChart(curves: Curve[], options: CurveChartOptions = {}): string {
  const pinned = options.pinned ?? [];
  const all = [...pinned.flatMap((p) => p.curves), ...curves];
  const points = all.flatMap((c) => c.points);
  if (points.length === 0) {
    return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img"><text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle" class="empty-state">Select strategies and commit parameters to draw curves</text></svg>`;
  }
  const xMax = Math.max(...points.map((p) => p.costPerMonth));
  const yMax = Math.max(...points.map((p) => p.riskPercent));
  const x = linearScale(0, xMax * 1.05, MARGIN.left, WIDTH - MARGIN.right);
  const y = linearScale(0, yMax * 1.1, HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(axes(x, y, xMax * 1.05, yMax * 1.1, "Cost of key update (per month)", "Risk of key compromise (%)"));

  const renderSeries = (curve: Curve, dim: boolean, pinLabel?: string) => {
    const color = colorFor(curve.kind);
    const dash = curve.phase === "before" ? ' stroke-dasharray="6 4"' : "";
    const opacity = dim ? ' opacity="0.35"' : "";
    const path = curve.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.costPerMonth).toFixed(2)},${y(p.riskPercent).toFixed(2)}`)
      .join(" ");
    const cls = dim ? "series pinned-series" : "series";
    const group: string[] = [];
    if (curve.points.length > 1) {
      group.push(`<path class="${cls}" d="${path}" fill="none" stroke="${color}"${dash}${opacity} stroke-width="1.6"/>`);
    }
    for (const p of curve.points) {
      const s = options.stabilisationByPoint?.[`${curve.kind}/${p.threshold}`];
      const title = `${curve.kind} threshold ${p.threshold} (${curve.phase}): cost ${p.costPerMonth.toFixed(3)}/month, risk ${p.riskPercent.toFixed(3)}%${s !== undefined ? `, stabilises month ${s}` : ""}${pinLabel ? ` [pin: ${pinLabel}]` : ""}`;
      const marker =
        curve.phase === "before"
          ? `<rect class="point" x="${(x(p.costPerMonth) - 3.5).toFixed(2)}" y="${(y(p.riskPercent) - 3.5).toFixed(2)}" width="7" height="7" fill="${color}"${opacity}`
          : `<circle class="point" cx="${x(p.costPerMonth).toFixed(2)}" cy="${y(p.riskPercent).toFixed(2)}" r="4" fill="${color}"${opacity}`;
      group.push(
        `${marker} data-kind="${esc(curve.kind)}" data-phase="${curve.phase}" data-threshold="${p.threshold}" data-cost="${p.costPerMonth}" data-risk="${p.riskPercent}"><title>${esc(title)}</title>${curve.phase === "before" ? "</rect>" : "</circle>"}`,
      );
    }
    return group.join("");
  };

  for (const pin of pinned) {
    for (const curve of pin.curves) parts.push(renderSeries(curve, true, pin.label));
  }
  for (const curve of curves) parts.push(renderSeries(curve, false));

  const legendEntries = curves.map(
    (c, i) =>
      `<g transform="translate(${MARGIN.left + 8}, ${MARGIN.top + 4 + i * 16})">` +
      `<line x1="0" y1="0" x2="18" y2="0" stroke="${colorFor(c.kind)}" stroke-width="2"${c.phase === "before" ? ' stroke-dasharray="6 4"' : ""}/>` +
      `<text x="24" y="4" class="legend">${esc(c.kind)} (${c.phase})</text></g>`,
  );
  parts.push(...legendEntries);
  return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">${parts.join("")}</svg>`;
}

export interface TimelineOptions {
  steadyRisk: number;
  stabilisationMonth: number;
  title?: string;
}

// Monthly risk line with the steady-state reference and the
// stabilisation month marker.
export function riskTimeline(monthlyRisk: number[], options: TimelineOptions): string {
  if (monthlyRisk.length === 0) {
    return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img"><text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle" class="empty-state">Select a curve point to see its risk timeline</text></svg>`;
  }
  const months = monthlyRisk.length;
  const yTop = Math.max(Math.max(...monthlyRisk), options.steadyRisk, 1e-9) * 1.15;
  const x = linearScale(1, months, MARGIN.left, WIDTH - MARGIN.right);
  const y = linearScale(0, yTop, HEIGHT - MARGIN.bottom, MARGIN.top);
  const parts: string[] = [];
  parts.push(axes(x, y, months, yTop, "Month (30 days)", "P(key compromised)", 1));
  const steadyY = y(options.steadyRisk).toFixed(2);
  parts.push(
    `<line class="steady-line" x1="${MARGIN.left}" y1="${steadyY}" x2="${WIDTH - MARGIN.right}" y2="${steadyY}" stroke="#888" stroke-dasharray="2 3"/>`,
  );
  const sx = x(options.stabilisationMonth).toFixed(2);
  parts.push(
    `<line class="stabilisation-line" x1="${sx}" y1="${MARGIN.top}" x2="${sx}" y2="${HEIGHT - MARGIN.bottom}" stroke="#d62728" stroke-dasharray="5 4"/>`,
  );
  const path = monthlyRisk
    .map((v, i) => `${i === 0 ? "M" : "L"}${x(i + 1).toFixed(2)},${y(v).toFixed(2)}`)
    .join(" ");
  parts.push(`<path class="risk-line" d="${path}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>`);
  if (options.title) {
    parts.push(`<text x="${MARGIN.left}" y="14" class="chart-title">${esc(options.title)}</text>`);
  }
  parts.push(
    `<text x="${WIDTH - MARGIN.right}" y="${Number(steadyY) - 5}" text-anchor="end" class="legend">steady ${options.steadyRisk.toFixed(4)}</text>`,
    `<text x="${Number(sx) + 4}" y="${MARGIN.top + 10}" class="legend">S = ${options.stabilisationMonth}</text>`,
  );
  return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">${parts.join("")}</svg>`;
}

function axes(
  x: Scale,
  y: Scale,
  xMax: number,
  yMax: number,
  xLabel: string,
  yLabel: string,
  xMin = 0,
): string {
  const parts: string[] = [];
  const x0 = x(xMin);
  const y0 = y(0);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x(xMax)}" y2="${y0}" stroke="#444"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y(yMax)}" stroke="#444"/>`);
  for (const t of niceTicks(xMin, xMax)) {
    parts.push(
      `<line x1="${x(t)}" y1="${y0}" x2="${x(t)}" y2="${y0 + 4}" stroke="#444"/>`,
      `<text x="${x(t)}" y="${y0 + 18}" text-anchor="middle" class="tick">${t}</text>`,
    );
  }
  for (const t of niceTicks(0, yMax)) {
    parts.push(
      `<line x1="${x0 - 4}" y1="${y(t)}" x2="${x0}" y2="${y(t)}" stroke="#444"/>`,
      `<text x="${x0 - 8}" y="${y(t) + 4}" text-anchor="end" class="tick">${+t.toPrecision(3)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x(xMax)) / 2}" y="${HEIGHT - 6}" text-anchor="middle" class="axis-label">${esc(xLabel)}</text>`,
    `<text transform="translate(14, ${(y0 + y(yMax)) / 2}) rotate(-90)" text-anchor="middle" class="axis-label">${esc(yLabel)}</text>`,
  );
  return parts.join("");
}

export function countPointMarkers(svg: string): number {
  return (svg.match(/class="point"/g) ?? []).length;
}
