"""Document model: segments of words interleaved with formatting tags.

A document is a list of tagged segments plus a style table. Tag markup uses
``<s id>``...``</s id>`` for paired style spans and ``<x id/>`` for unpaired
inline markers. Words are whitespace tokens; tags sit at word boundaries
(a tag glued into the middle of a word is rejected).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Protocol, Sequence, Union

from .errors import MarkupError, ProviderError, UnknownStyleError

#: Marker prefixed to the first sub-word piece of every word in model-token
#: space (sentencepiece convention). Detokenization turns it back into spaces.
WORD_START = "▁"


class TagKind(Enum):
    OPEN = "open"
    CLOSE = "close"
    UNPAIRED = "unpaired"


@dataclass(frozen=True)
class FormattingTag:
    kind: TagKind
    style: int

    def markup(self) -> str:
        if self.kind is TagKind.OPEN:
            return f"<s {self.style}>"
        if self.kind is TagKind.CLOSE:
            return f"</s {self.style}>"
        return f"<x {self.style}/>"


Item = Union[str, FormattingTag]


def _check_nesting(items: Iterable[Item]) -> None:
    stack: list[int] = []
    for item in items:
        if not isinstance(item, FormattingTag):
            continue
        if item.kind is TagKind.OPEN:
            stack.append(item.style)
        elif item.kind is TagKind.CLOSE:
            if not stack:
                raise MarkupError(f"close tag </s {item.style}> with no open tag")
            if stack[-1] != item.style:
                raise MarkupError(
                    f"crossing or unmatched pair: </s {item.style}> closes <s {stack[-1]}>"
                )
            stack.pop()
    if stack:
        raise MarkupError(f"unclosed paired tag <s {stack[-1]}>")


@dataclass(frozen=True)
class TaggedSegment:
    """One sentence: ordered words and formatting tags.

    Paired tags must nest properly. A segment with zero words is
    representable (some operations produce intermediates) but is rejected
    by the parser and by document validation.
    """

    items: tuple[Item, ...]
    index: int = 0

    def __post_init__(self) -> None:
        _check_nesting(self.items)

    def words(self) -> list[str]:
        return [it for it in self.items if isinstance(it, str)]

    def tags(self) -> list[FormattingTag]:
        return [it for it in self.items if isinstance(it, FormattingTag)]

    def style_ids(self) -> set[int]:
        return {t.style for t in self.tags()}


def strip_tags(segment: TaggedSegment) -> list[str]:
    """Words in order with all tags removed."""
    return segment.words()


_TAG_RE = re.compile(r"<s (\d+)>|</s (\d+)>|<x (\d+)/>")


def parse_tagged_text(
    text: str, style_table: Mapping[int, str], index: int = 0
) -> TaggedSegment:
    """Parse tag markup into a segment; inverse of :func:`serialize_tagged_text`.

    Raises :class:`MarkupError` for unmatched/crossing pairs, tags glued into
    the middle of a word, or a segment with no words;
    :class:`UnknownStyleError` for ids missing from the style table.
    """
    items: list[Item] = []
    pos = 0
    glued = False  # word material directly before the cursor
    tag_after_word = False  # >=1 tag emitted since that word material

    def _emit_text(chunk: str) -> None:
        nonlocal glued, tag_after_word
        if not chunk:
            return
        if tag_after_word and not chunk[0].isspace():
            raise MarkupError(f"tag inside word near {chunk[:20]!r}")
        items.extend(chunk.split())
        glued = not chunk[-1].isspace()
        tag_after_word = False

    for m in _TAG_RE.finditer(text):
        _emit_text(text[pos : m.start()])
        style = int(m.group(1) or m.group(2) or m.group(3))
        if style not in style_table:
            raise UnknownStyleError(f"style id {style} not in style table")
        kind = (
            TagKind.OPEN
            if m.group(1)
            else TagKind.CLOSE
            if m.group(2)
            else TagKind.UNPAIRED
        )
        items.append(FormattingTag(kind, style))
        if glued:
            tag_after_word = True
        pos = m.end()
    _emit_text(text[pos:])

    segment = TaggedSegment(tuple(items), index=index)
    if not segment.words():
        raise MarkupError("segment has no words")
    return segment


def serialize_tagged_text(segment: TaggedSegment) -> str:
    """Render a segment back to tag markup.

    Open tags glue to the following item and close tags to the preceding one,
    so ``[open(1), "x", close(1)]`` renders as ``<s 1>x</s 1>``.
    """
    parts: list[str] = []
    prev: Item | None = None
    for item in segment.items:
        if prev is not None:
            glue = (
                isinstance(prev, FormattingTag)
                and prev.kind is TagKind.OPEN
                or isinstance(item, FormattingTag)
                and item.kind is TagKind.CLOSE
            )
            if not glue:
                parts.append(" ")
        parts.append(item if isinstance(item, str) else item.markup())
        prev = item
    return "".join(parts)


@dataclass(frozen=True)
class Document:
    """Ordered segments plus the style table they reference."""

    segments: tuple[TaggedSegment, ...]
    style_table: Mapping[int, str]
    source_lang: str = ""
    target_lang: str = ""
    title: str = ""

    def __post_init__(self) -> None:
        for seg in self.segments:
            if not seg.words():
                raise MarkupError(f"segment {seg.index} has no words")
            missing = seg.style_ids() - set(self.style_table)
            if missing:
                raise UnknownStyleError(
                    f"segment {seg.index} references unknown style ids {sorted(missing)}"
                )


def document_from_interchange(data: Mapping) -> Document:
    """Build a Document from the JSON interchange shape.

    Expected fields: ``styleTable`` (id -> descriptor), ``segments`` (array of
    tag-markup strings) and ``meta`` {sourceLang, targetLang, title}.
    """
    if not isinstance(data, Mapping):
        raise ValueError("interchange document must be a JSON object")
    try:
        style_table = {int(k): str(v) for k, v in dict(data["styleTable"]).items()}
        raw_segments = list(data["segments"])
        meta = dict(data.get("meta", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed interchange document: {exc}") from exc
    if not raw_segments:
        raise ValueError("interchange document has an empty segments array")
    segments = tuple(
        parse_tagged_text(markup, style_table, index=i)
        for i, markup in enumerate(raw_segments)
    )
    return Document(
        segments=segments,
        style_table=style_table,
        source_lang=str(meta.get("sourceLang", "")),
        target_lang=str(meta.get("targetLang", "")),
        title=str(meta.get("title", "")),
    )


def document_to_interchange(doc: Document) -> dict:
    return {
        "styleTable": {str(k): doc.style_table[k] for k in sorted(doc.style_table)},
        "segments": [serialize_tagged_text(seg) for seg in doc.segments],
        "meta": {
            "sourceLang": doc.source_lang,
            "targetLang": doc.target_lang,
            "title": doc.title,
        },
    }


@dataclass(frozen=True)
class SubwordMap:
    """Per-word sub-word segmentation; concatenating a word's pieces must
    reproduce the word exactly."""

    words: tuple[str, ...]
    pieces: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if len(self.words) != len(self.pieces):
            raise ValueError("one piece list required per word")
        for word, parts in zip(self.words, self.pieces):
            if not parts or any(not p for p in parts):
                raise ValueError(f"empty sub-word piece for word {word!r}")
            if "".join(parts) != word:
                raise ValueError(
                    f"sub-word pieces {parts!r} do not concatenate to {word!r}"
                )

    def flat(self) -> list[str]:
        return [p for parts in self.pieces for p in parts]

    def piece_span(self, word_index: int) -> tuple[int, int]:
        """Half-open range of this word's pieces in the flat token list."""
        start = sum(len(self.pieces[i]) for i in range(word_index))
        return start, start + len(self.pieces[word_index])

    def word_of_piece(self, piece_index: int) -> int:
        remaining = piece_index
        for w, parts in enumerate(self.pieces):
            if remaining < len(parts):
                return w
            remaining -= len(parts)
        raise IndexError(piece_index)


class Segmenter(Protocol):
    """Sub-word segmentation provider."""

    def segment(self, words: Sequence[str]) -> list[list[str]]:
        """Return one piece list per word; pieces concatenate to the word."""
        ...


@dataclass(frozen=True)
class CharacterSegmenter:
    """Reference segmenter: fixed-size character grouping (max 3 chars/piece)."""

    max_piece_len: int = 3

    def segment(self, words: Sequence[str]) -> list[list[str]]:
        n = self.max_piece_len
        return [[w[i : i + n] for i in range(0, len(w), n)] for w in words]


def subword_segment(words: Sequence[str], segmenter: Segmenter) -> SubwordMap:
    """Run a segmenter and validate its output against the SubwordMap invariants."""
    if not words:
        raise ValueError("subword_segment requires a non-empty word list")
    try:
        pieces = segmenter.segment(words)
    except ProviderError:
        raise
    except Exception as exc:
        raise ProviderError(f"segmenter failed: {exc}", provider="segmenter") from exc
    try:
        return SubwordMap(tuple(words), tuple(tuple(p) for p in pieces))
    except ValueError as exc:
        raise ProviderError(
            f"segmenter returned invalid pieces: {exc}", provider="segmenter"
        ) from exc


def to_model_tokens(subwords: SubwordMap) -> list[str]:
    """Flat token sequence with the word-start marker on each word's first piece."""
    tokens: list[str] = []
    for parts in subwords.pieces:
        tokens.append(WORD_START + parts[0])
        tokens.extend(parts[1:])
    return tokens


def model_token_span(subwords: SubwordMap, word_start: int, word_end: int) -> tuple[int, int]:
    """Token range in :func:`to_model_tokens` output covering words [start, end)."""
    lengths = [len(p) for p in subwords.pieces]
    lo = sum(lengths[:word_start])
    hi = lo + sum(lengths[word_start:word_end])
    return lo, hi


def detokenize(tokens: Sequence[str]) -> str:
    """Join model tokens back into words via the word-start marker."""
    return "".join(tokens).replace(WORD_START, " ").strip()
