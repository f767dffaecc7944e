// Payload shapes of the workbench service REST API.

export interface TokenQE {
  pBad: number;
  label: "OK" | "BAD";
}

export interface SegmentQE {
  hter: number;
  displayQuality: number;
  words: TokenQE[];
  gaps: TokenQE[];
}

export interface SegmentPayload {
  index: number;
  source: string;
  target: string;
  qe: SegmentQE;
  origin: "mt" | "edited";
  revision: number;
}

export interface SegmentsResponse {
  id: string;
  segments: SegmentPayload[];
}

export interface SuggestionCandidate {
  text: string;
  tokenCount: number;
  jointLogProb: number;
}

export interface SuggestResponse {
  revision: number;
  candidates: SuggestionCandidate[];
}

export interface EditResponse {
  revision: number;
  target: string;
  qe?: SegmentQE;
}

export interface HeatmapResponse {
  weights: number[];
  lowConfidence: boolean;
}

export interface InterchangeDocument {
  styleTable: Record<string, string>;
  segments: string[];
  meta: { sourceLang: string; targetLang: string; title: string };
}

export interface Span {
  start: number;
  end: number;
}
