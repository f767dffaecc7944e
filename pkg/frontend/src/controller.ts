// Orchestrates the editing session: selections fetch suggestions and a
// heatmap, popup accepts issue PATCHes with the revision the user saw, and
// conflicts surface as a refresh prompt. The UI never mutates state except
// through the documented endpoints.

import { ConflictError, WorkbenchClient } from "./api.js";
import type { HeatmapResponse, InterchangeDocument, Span } from "./types.js";
import {
  buildSegmentViews,
  closedPopup,
  conflictPopup,
  gapHotkeySpan,
  highlightedCandidate,
  openPopup,
  popupKeydown,
  spanCrossesChip,
  type PopupState,
  type SegmentView,
} from "./viewmodel.js";

export class WorkbenchController {
  docId = "";
  segments: SegmentView[] = [];
  popup: PopupState = closedPopup();
  heatmap: HeatmapResponse | null = null;
  editInFlight = false;

  constructor(private client: WorkbenchClient) {}

  async load(docId: string): Promise<SegmentView[]> {
    this.docId = docId;
    const payload = await this.client.getSegments(docId);
    this.segments = buildSegmentViews(payload.segments);
    return this.segments;
  }

  private async reloadSegment(index: number): Promise<void> {
    const payload = await this.client.getSegments(this.docId);
    this.segments = buildSegmentViews(payload.segments);
    void index;
  }

  /** Word-span selection: fetch suggestions and source heatmap together. */
  async selectSpan(segmentIndex: number, span: Span): Promise<PopupState> {
    const segment = this.segments[segmentIndex];
    if (!segment) throw new Error(`unknown segment ${segmentIndex}`);
    if (spanCrossesChip(segment.targetTokens, span)) {
      return this.popup; // selections across tag chips are not suggestible
    }
    try {
      const response = await this.client.suggest(
        this.docId,
        segmentIndex,
        span,
        segment.revision,
      );
      this.popup = openPopup(segmentIndex, span, segment.revision, response.candidates);
    } catch (error) {
      if (error instanceof ConflictError) {
        this.popup = conflictPopup(openPopup(segmentIndex, span, segment.revision, []));
        return this.popup;
      }
      throw error;
    }
    if (span.start < span.end) {
      this.heatmap = await this.client.heatmap(this.docId, segmentIndex, span);
    } else {
      this.heatmap = null;
    }
    return this.popup;
  }

  /** ALT+s between words requests gap-insertion suggestions (start == end). */
  async hotkey(
    segmentIndex: number,
    event: { key: string; altKey: boolean },
    caretGap: number,
  ): Promise<PopupState | null> {
    const span = gapHotkeySpan(event, caretGap);
    if (span === null) return null;
    return this.selectSpan(segmentIndex, span);
  }

  async handleKey(key: string): Promise<PopupState> {
    const action = popupKeydown(this.popup, key);
    switch (action.action) {
      case "dismiss":
        this.popup = closedPopup();
        break;
      case "move":
        this.popup = action.state;
        break;
      case "accept":
        await this.acceptCandidate(this.popup.candidates.indexOf(action.candidate));
        break;
      case "none":
        break;
    }
    return this.popup;
  }

  /** Clicking (or Enter on) a candidate applies it via PATCH. */
  async acceptCandidate(candidateIndex?: number): Promise<PopupState> {
    const index = candidateIndex ?? this.popup.highlighted;
    const candidate =
      index >= 0 && index < this.popup.candidates.length
        ? this.popup.candidates[index]
        : highlightedCandidate(this.popup);
    if (!this.popup.open || !candidate) return this.popup;
    this.editInFlight = true;
    try {
      await this.client.applyEdit(
        this.docId,
        this.popup.segment,
        this.popup.span,
        candidate.text,
        this.popup.revision,
        true,
      );
      await this.reloadSegment(this.popup.segment);
      this.popup = closedPopup();
      this.heatmap = null;
    } catch (error) {
      if (error instanceof ConflictError) {
        this.popup = conflictPopup(this.popup);
      } else {
        throw error;
      }
    } finally {
      this.editInFlight = false;
    }
    return this.popup;
  }

  dismissPopup(): PopupState {
    this.popup = closedPopup();
    this.heatmap = null;
    return this.popup;
  }

  /** Export button: disabled while an edit is in flight. */
  get exportEnabled(): boolean {
    return !this.editInFlight && this.docId !== "";
  }

  async exportDocument(): Promise<InterchangeDocument> {
    if (!this.exportEnabled) throw new Error("export unavailable during an edit");
    return this.client.exportDocument(this.docId);
  }
}
