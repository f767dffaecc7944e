// Pure view-model layer: markup tokenizing, segment views, span rules and
// the suggestion popup state machine. No DOM access, so component tests can
// drive everything directly.

import { colorOf, qualityPercent, type Color } from "./decorations.js";
import type { SegmentPayload, Span, SuggestionCandidate } from "./types.js";

export type MarkupToken =
  | { kind: "word"; text: string; wordIndex: number }
  | { kind: "open" | "close" | "unpaired"; style: number };

const TAG_RE = /<s (\d+)>|<\/s (\d+)>|<x (\d+)\/>/g;

export function tokenizeMarkup(markup: string): MarkupToken[] {
  const tokens: MarkupToken[] = [];
  let wordIndex = 0;
  let cursor = 0;
  const pushWords = (chunk: string) => {
    for (const word of chunk.split(/\s+/).filter(Boolean)) {
      tokens.push({ kind: "word", text: word, wordIndex: wordIndex++ });
    }
  };
  for (const match of markup.matchAll(TAG_RE)) {
    pushWords(markup.slice(cursor, match.index));
    if (match[1] !== undefined) tokens.push({ kind: "open", style: Number(match[1]) });
    else if (match[2] !== undefined) tokens.push({ kind: "close", style: Number(match[2]) });
    else tokens.push({ kind: "unpaired", style: Number(match[3]) });
    cursor = (match.index ?? 0) + match[0].length;
  }
  pushWords(markup.slice(cursor));
  return tokens;
}

export interface WordView {
  text: string;
  wordIndex: number;
  underline: Color;
}

export interface GapView {
  gapIndex: number;
  checkmark: Color;
}

export interface SegmentView {
  index: number;
  revision: number;
  origin: "mt" | "edited";
  qualityPercent: string;
  sourceTokens: MarkupToken[];
  targetTokens: MarkupToken[];
  words: WordView[];
  gaps: GapView[];
}

/** Render payloads into view state; a pure function of the service payload. */
export function buildSegmentViews(segments: SegmentPayload[]): SegmentView[] {
  return segments.map((segment) => {
    const targetTokens = tokenizeMarkup(segment.target);
    const words = targetTokens
      .filter((t): t is Extract<MarkupToken, { kind: "word" }> => t.kind === "word")
      .map((t) => ({
        text: t.text,
        wordIndex: t.wordIndex,
        underline: colorOf(segment.qe.words[t.wordIndex]?.pBad ?? 0),
      }));
    const gaps = segment.qe.gaps.map((gap, gapIndex) => ({
      gapIndex,
      checkmark: colorOf(gap.pBad),
    }));
    return {
      index: segment.index,
      revision: segment.revision,
      origin: segment.origin,
      qualityPercent: qualityPercent(segment.qe.displayQuality),
      sourceTokens: tokenizeMarkup(segment.source),
      targetTokens,
      words,
      gaps,
    };
  });
}

/** A selection is only suggestible when it covers whole words and does not
 * cross a formatting-tag chip. */
export function spanCrossesChip(tokens: MarkupToken[], span: Span): boolean {
  if (span.start >= span.end) return false;
  let seenSelected = false;
  let pendingTag = false;
  for (const token of tokens) {
    if (token.kind === "word") {
      if (token.wordIndex >= span.end) break;
      if (token.wordIndex >= span.start) {
        if (seenSelected && pendingTag) return true; // tag between selected words
        seenSelected = true;
      }
      pendingTag = false;
    } else {
      pendingTag = true;
    }
  }
  return false;
}

/** ALT+s between words: a zero-width gap-insertion span at the caret gap. */
export function gapHotkeySpan(
  event: { key: string; altKey: boolean },
  caretGap: number,
): Span | null {
  if (!event.altKey || event.key.toLowerCase() !== "s") return null;
  return { start: caretGap, end: caretGap };
}

export const MAX_POPUP_ENTRIES = 5;

export interface PopupState {
  open: boolean;
  segment: number;
  span: Span;
  revision: number;
  candidates: SuggestionCandidate[];
  highlighted: number;
  staleRevision: boolean;
}

export function closedPopup(): PopupState {
  return {
    open: false,
    segment: -1,
    span: { start: 0, end: 0 },
    revision: -1,
    candidates: [],
    highlighted: 0,
    staleRevision: false,
  };
}

export function openPopup(
  segment: number,
  span: Span,
  revision: number,
  candidates: SuggestionCandidate[],
): PopupState {
  return {
    open: true,
    segment,
    span,
    revision,
    candidates: candidates.slice(0, MAX_POPUP_ENTRIES),
    highlighted: 0,
    staleRevision: false,
  };
}

export function conflictPopup(state: PopupState): PopupState {
  // stale revision: keep the popup, show the refresh prompt
  return { ...state, candidates: [], staleRevision: true };
}

export function moveHighlight(state: PopupState, delta: number): PopupState {
  if (!state.open || state.candidates.length === 0) return state;
  const count = state.candidates.length;
  const highlighted = (state.highlighted + delta + count) % count;
  return { ...state, highlighted };
}

export function highlightedCandidate(state: PopupState): SuggestionCandidate | null {
  if (!state.open || state.candidates.length === 0) return null;
  return state.candidates[state.highlighted];
}

export type PopupKeyAction =
  | { action: "accept"; candidate: SuggestionCandidate }
  | { action: "dismiss" }
  | { action: "move"; state: PopupState }
  | { action: "none" };

export function popupKeydown(state: PopupState, key: string): PopupKeyAction {
  if (!state.open) return { action: "none" };
  if (key === "Escape") return { action: "dismiss" };
  if (key === "ArrowDown") return { action: "move", state: moveHighlight(state, 1) };
  if (key === "ArrowUp") return { action: "move", state: moveHighlight(state, -1) };
  if (key === "Enter") {
    const candidate = highlightedCandidate(state);
    return candidate ? { action: "accept", candidate } : { action: "none" };
  }
  return { action: "none" };
}
