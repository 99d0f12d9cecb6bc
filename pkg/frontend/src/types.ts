// Wire types of the analysis service.

export type Phase = "before" | "after";

export interface StrategyInfo {
  kind: string;
  thresholdUnit: string;
  defaultThresholds: number[];
}

export interface NetworkParamsForm {
  max: number;
  rJoin: number;
  rLeave: number;
  rMessage: number;
  pComp: number;
  k: number;
}

export interface CurvePoint {
  threshold: number;
  costPerMonth: number;
  riskPercent: number;
}

export interface Curve {
  kind: string;
  phase: Phase;
  points: CurvePoint[];
}

export interface CurvesDocument {
  curves: Curve[];
}

export interface CurveProgress {
  kind: string;
  phase: Phase;
  point: CurvePoint;
}

export interface AnalyzeResponse {
  kind: string;
  threshold: number;
  steadyRisk: number;
  maxRisk: number;
  stabilisationMonth: number;
  monthlyRisk: number[];
  costPreMonthly: number;
  costPostMonthly: number;
  stateCount: number;
  mergedEdgeCount: number;
  solveMilliseconds: number;
}
