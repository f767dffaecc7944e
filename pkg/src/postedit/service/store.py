"""Session documents, edits and event-log persistence.

Each uploaded document becomes a session: the parsed source, one mutable
target segment per source segment, and per-segment QE and alignment state.
Every mutation appends a JSON event to the document's log file, so sessions
survive restarts by replay; a snapshot is written on export. Edits use
optimistic concurrency: a client sends the segment revision it saw and
conflicts are rejected.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .. import qe as qe_module
from ..align import (
    AlignmentMatrix,
    SubwordAlignment,
    to_word_alignment,
    transfer_tags,
)
from ..docmodel import (
    Document,
    FormattingTag,
    TagKind,
    TaggedSegment,
    document_from_interchange,
    parse_tagged_text,
    serialize_tagged_text,
    subword_segment,
)
from ..errors import ProviderError
from ..qe import SentenceQE, WordQE
from ..suggest import Span
from .config import ProviderRegistry


class NotFoundError(KeyError):
    pass


class ConflictError(RuntimeError):
    pass


@dataclass
class SegmentState:
    target: TaggedSegment
    sentence_qe: SentenceQE
    word_qe: WordQE
    alignment: AlignmentMatrix
    origin: str = "mt"  # "mt" until a human edit lands, then "edited"
    revision: int = 0


@dataclass(frozen=True)
class EditOperation:
    segment: int
    span: Span
    replacement: tuple[str, ...]
    revision: int
    refresh_qe: bool = False


@dataclass
class SessionDocument:
    id: str
    source: Document
    segments: list[SegmentState]
    revision: int = 0  # bumps on every mutation of any segment
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def replace_word_span(
    segment: TaggedSegment, span: Span, replacement: tuple[str, ...]
) -> TaggedSegment:
    """Splice replacement words into the segment's word sequence.

    Tags are never touched: replaced words free their item slots, the new
    words enter at the first replaced word's slot, and gap insertions land
    after the preceding word's trailing close tags (outside tag regions).
    """
    span.validate(len(segment.words()))
    items = list(segment.items)
    word_positions = [i for i, item in enumerate(items) if isinstance(item, str)]
    if span.is_gap:
        if span.start == 0:
            insert_at = 0
        else:
            insert_at = word_positions[span.start - 1] + 1
            while insert_at < len(items) and (
                isinstance(items[insert_at], FormattingTag)
                and items[insert_at].kind is TagKind.CLOSE
            ):
                insert_at += 1
        items[insert_at:insert_at] = list(replacement)
    else:
        first_slot = word_positions[span.start]
        for pos in reversed(word_positions[span.start : span.end]):
            del items[pos]
        items[first_slot:first_slot] = list(replacement)
    new_segment = TaggedSegment(tuple(items), index=segment.index)
    if not new_segment.words():
        raise ValueError("edit would leave the segment without words")
    return new_segment


def _annotate_segment(
    source_segment: TaggedSegment,
    target_words: list[str],
    registry: ProviderRegistry,
) -> tuple[AlignmentMatrix, SentenceQE, WordQE]:
    """Provider round trip shared by create and edit: align, then QE."""
    source_words = source_segment.words()
    source_map = subword_segment(source_words, registry.segmenter)
    target_map = subword_segment(target_words, registry.segmenter)
    links = registry.aligner.align(source_map.flat(), target_map.flat())
    sub = SubwordAlignment(
        target_len=len(target_map.flat()),
        source_len=len(source_map.flat()),
        links=tuple(links),
    )
    matrix = to_word_alignment(sub, source_map, target_map)
    sentence_qe, word_qe = qe_module.predict(source_words, target_words, registry.qe)
    return matrix, sentence_qe, word_qe


class DocumentStore:
    """In-memory index over event-logged session documents."""

    def __init__(self, data_dir: Path | None = None):
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        self._documents: dict[str, SessionDocument] = {}
        self._registry_lock = threading.Lock()
        if self.data_dir:
            self._replay_logs()

    # -- persistence ------------------------------------------------------

    def _log_path(self, doc_id: str) -> Path | None:
        return self.data_dir / f"{doc_id}.log" if self.data_dir else None

    def _append_event(self, doc_id: str, event: dict) -> None:
        path = self._log_path(doc_id)
        if path is None:
            return
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")

    def _replay_logs(self) -> None:
        assert self.data_dir is not None
        for log_file in sorted(self.data_dir.glob("*.log")):
            doc: SessionDocument | None = None
            for line in log_file.read_text(encoding="utf-8").splitlines():
                event = json.loads(line)
                if event["event"] == "create":
                    doc = _document_from_event(event)
                elif event["event"] == "edit" and doc is not None:
                    _apply_edit_event(doc, event)
            if doc is not None:
                self._documents[doc.id] = doc

    # -- operations -------------------------------------------------------

    def create(self, interchange: dict, registry: ProviderRegistry) -> SessionDocument:
        source = document_from_interchange(interchange)
        doc_id = _document_id(interchange, len(self._documents))
        segments: list[SegmentState] = []
        for source_segment in source.segments:
            target_words = registry.mt.translate(source_segment.words())
            if not target_words:
                raise ProviderError("mt provider returned no words", provider="mt")
            matrix, sentence_qe, word_qe = _annotate_segment(
                source_segment, target_words, registry
            )
            target_segment = transfer_tags(source_segment, target_words, matrix)
            segments.append(
                SegmentState(
                    target=target_segment,
                    sentence_qe=sentence_qe,
                    word_qe=word_qe,
                    alignment=matrix,
                )
            )
        doc = SessionDocument(id=doc_id, source=source, segments=segments)
        with self._registry_lock:
            self._documents[doc_id] = doc
        self._append_event(doc_id, _create_event(doc, interchange))
        return doc

    def get(self, doc_id: str) -> SessionDocument:
        try:
            return self._documents[doc_id]
        except KeyError:
            raise NotFoundError(doc_id) from None

    def apply_edit(
        self, doc_id: str, op: EditOperation, registry: ProviderRegistry
    ) -> SegmentState:
        """Optimistic edit: validate under the document lock, run providers
        outside it, then commit only if the revision is still unchanged."""
        doc = self.get(doc_id)
        if not 0 <= op.segment < len(doc.segments):
            raise NotFoundError(f"segment {op.segment}")
        state = doc.segments[op.segment]
        with doc.lock:
            if state.revision != op.revision:
                raise ConflictError(
                    f"revision {op.revision} is stale (now {state.revision})"
                )
            new_target = replace_word_span(state.target, op.span, op.replacement)
        refreshed: tuple[AlignmentMatrix, SentenceQE, WordQE] | None = None
        source_segment = doc.source.segments[op.segment]
        if op.refresh_qe:
            refreshed = _annotate_segment(
                source_segment, new_target.words(), registry
            )
        with doc.lock:
            if state.revision != op.revision:
                raise ConflictError(
                    f"revision {op.revision} is stale (now {state.revision})"
                )
            state.target = new_target
            state.origin = "edited"
            state.revision += 1
            doc.revision += 1
            if refreshed is not None:
                state.alignment, state.sentence_qe, state.word_qe = refreshed
        self._append_event(
            doc_id,
            {
                "event": "edit",
                "segment": op.segment,
                "start": op.span.start,
                "end": op.span.end,
                "replacement": list(op.replacement),
                "revision": op.revision,
                "state": _segment_event_state(state) if refreshed else None,
                "target": serialize_tagged_text(state.target),
            },
        )
        return state

    def export(self, doc_id: str) -> dict:
        """Interchange JSON of the target document, segment-aligned to the
        source; also snapshots it next to the event log."""
        doc = self.get(doc_id)
        with doc.lock:
            payload = {
                "styleTable": {
                    str(k): doc.source.style_table[k]
                    for k in sorted(doc.source.style_table)
                },
                "segments": [
                    serialize_tagged_text(state.target) for state in doc.segments
                ],
                "meta": {
                    "sourceLang": doc.source.source_lang,
                    "targetLang": doc.source.target_lang,
                    "title": doc.source.title,
                },
            }
        if self.data_dir:
            snapshot = self.data_dir / f"{doc_id}.snapshot.json"
            snapshot.write_text(
                json.dumps(payload, ensure_ascii=False, sort_keys=True),
                encoding="utf-8",
            )
        return payload


def _document_id(interchange: dict, ordinal: int) -> str:
    digest = hashlib.sha256(
        json.dumps(interchange, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()
    return f"doc-{ordinal:04d}-{digest[:8]}"


def _segment_event_state(state: SegmentState) -> dict:
    return {
        "target": serialize_tagged_text(state.target),
        "hter": state.sentence_qe.predicted_hter,
        "wordProbs": list(state.word_qe.word_probs),
        "gapProbs": list(state.word_qe.gap_probs),
        "alignment": [list(row) for row in state.alignment.scores],
        "origin": state.origin,
        "revision": state.revision,
    }


def _create_event(doc: SessionDocument, interchange: dict) -> dict:
    return {
        "event": "create",
        "id": doc.id,
        "interchange": interchange,
        "segments": [_segment_event_state(s) for s in doc.segments],
    }


def _document_from_event(event: dict) -> SessionDocument:
    source = document_from_interchange(event["interchange"])
    segments = []
    for i, raw in enumerate(event["segments"]):
        segments.append(_segment_state_from_event(raw, source, i))
    return SessionDocument(id=event["id"], source=source, segments=segments)


def _segment_state_from_event(
    raw: dict, source: Document, index: int
) -> SegmentState:
    target = parse_tagged_text(raw["target"], source.style_table, index=index)
    return SegmentState(
        target=target,
        sentence_qe=SentenceQE(predicted_hter=float(raw["hter"])),
        word_qe=WordQE(
            word_probs=tuple(float(p) for p in raw["wordProbs"]),
            gap_probs=tuple(float(p) for p in raw["gapProbs"]),
        ),
        alignment=AlignmentMatrix(
            scores=tuple(tuple(float(v) for v in row) for row in raw["alignment"])
        ),
        origin=raw.get("origin", "mt"),
        revision=int(raw.get("revision", 0)),
    )


def _apply_edit_event(doc: SessionDocument, event: dict) -> None:
    state = doc.segments[event["segment"]]
    if event.get("state"):
        refreshed = _segment_state_from_event(
            event["state"], doc.source, event["segment"]
        )
        state.target = refreshed.target
        state.sentence_qe = refreshed.sentence_qe
        state.word_qe = refreshed.word_qe
        state.alignment = refreshed.alignment
    else:
        state.target = parse_tagged_text(
            event["target"], doc.source.style_table, index=event["segment"]
        )
    state.origin = "edited"
    state.revision = event["revision"] + 1
    doc.revision += 1
