"""Word alignment and automatic formatting transfer.

Sub-word alignment scores are folded up to word level (a target word is
aligned with a source word if any of their sub-words are), argmax links feed
heatmap highlighting, and formatting tags move from the source segment to
the target: paired tags wrap the target words whose best-aligned source word
carries the style, unpaired tags land after the target word best aligned to
the source word preceding the tag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, Union

from .docmodel import FormattingTag, SubwordMap, TaggedSegment, TagKind
from .suggest import Span


@dataclass(frozen=True)
class SubwordAlignment:
    """Sparse (target sub-word, source sub-word, score) links."""

    target_len: int
    source_len: int
    links: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        for t, s, score in self.links:
            if not (0 <= t < self.target_len and 0 <= s < self.source_len):
                raise ValueError(f"alignment link ({t}, {s}) out of range")
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"alignment score out of range: {score}")


def subword_alignment_from_json(
    data: dict, target_len: int, source_len: int
) -> SubwordAlignment:
    """Ingest the wire/file format ``{"links": [{"t": .., "s": .., "score": ..}]}``."""
    try:
        links = tuple(
            (int(link["t"]), int(link["s"]), float(link["score"]))
            for link in data["links"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed alignment payload: {exc}") from exc
    return SubwordAlignment(target_len=target_len, source_len=source_len, links=links)


class Aligner(Protocol):
    """Alignment provider: sub-word links between flat piece lists."""

    def align(
        self, source_tokens: Sequence[str], target_tokens: Sequence[str]
    ) -> list[tuple[int, int, float]]:
        ...


@dataclass(frozen=True)
class AlignmentMatrix:
    """Dense target-word x source-word scores; a cell is the max over the
    contributing sub-word link scores."""

    scores: tuple[tuple[float, ...], ...]

    @property
    def n_target(self) -> int:
        return len(self.scores)

    @property
    def n_source(self) -> int:
        return len(self.scores[0]) if self.scores else 0

    def links(self) -> set[tuple[int, int]]:
        return {
            (t, s)
            for t, row in enumerate(self.scores)
            for s, score in enumerate(row)
            if score > 0.0
        }


def to_word_alignment(
    sub: SubwordAlignment, source_map: SubwordMap, target_map: SubwordMap
) -> AlignmentMatrix:
    """Fold sub-word links up to word level (any-sub-word rule, max score)."""
    if sub.source_len != len(source_map.flat()):
        raise ValueError("source sub-word count does not match alignment")
    if sub.target_len != len(target_map.flat()):
        raise ValueError("target sub-word count does not match alignment")
    source_word_of = [
        w for w, parts in enumerate(source_map.pieces) for _ in parts
    ]
    target_word_of = [
        w for w, parts in enumerate(target_map.pieces) for _ in parts
    ]
    scores = [
        [0.0] * len(source_map.words) for _ in range(len(target_map.words))
    ]
    for t, s, score in sub.links:
        tw, sw = target_word_of[t], source_word_of[s]
        if score > scores[tw][sw]:
            scores[tw][sw] = score
    return AlignmentMatrix(scores=tuple(tuple(row) for row in scores))


def best_source_for(target_word: int, matrix: AlignmentMatrix) -> int | None:
    """Argmax source word for a target word; None when the row is all zeros.
    Ties break toward the lowest source index."""
    row = matrix.scores[target_word]
    best = max(row)
    if best <= 0.0:
        return None
    return row.index(best)


@dataclass(frozen=True)
class HeatmapResult:
    weights: tuple[float, ...]
    low_confidence: bool


def heatmap(span: Span, matrix: AlignmentMatrix) -> HeatmapResult:
    """Per-source-word weights for a selected target span, summing to 1.

    An all-zero span falls back to uniform weights flagged low-confidence.
    """
    if span.start >= span.end:
        raise ValueError("heatmap requires a replacement span with words in it")
    if not (0 <= span.start and span.end <= matrix.n_target):
        raise ValueError("span out of range for the alignment matrix")
    sums = [0.0] * matrix.n_source
    for t in range(span.start, span.end):
        for s, score in enumerate(matrix.scores[t]):
            sums[s] += score
    total = sum(sums)
    if total <= 0.0:
        uniform = 1.0 / matrix.n_source
        return HeatmapResult(weights=(uniform,) * matrix.n_source, low_confidence=True)
    return HeatmapResult(
        weights=tuple(v / total for v in sums), low_confidence=False
    )


def _paired_instances(segment: TaggedSegment) -> tuple[list[int], list[tuple[int, ...]]]:
    """Per source word, the stack (outermost first) of enclosing paired-tag
    instances; instances are numbered by open order and mapped to styles."""
    styles: list[int] = []
    stacks: list[tuple[int, ...]] = []
    stack: list[int] = []
    for item in segment.items:
        if isinstance(item, str):
            stacks.append(tuple(stack))
        elif item.kind is TagKind.OPEN:
            styles.append(item.style)
            stack.append(len(styles) - 1)
        elif item.kind is TagKind.CLOSE:
            stack.pop()
    return styles, stacks


def transfer_paired_tags(
    source_segment: TaggedSegment,
    target_words: Sequence[str],
    matrix: AlignmentMatrix,
) -> TaggedSegment:
    """Wrap target words in the styles enclosing their best-aligned source word.

    Each source tag pair is tracked as an instance, so adjacent distinct pairs
    of the same style stay distinct and identity alignments reproduce the
    source tag positions. Runs that would cross are split minimally to keep
    nesting well-formed. Unaligned target words inherit nothing.
    """
    _check_matrix(source_segment, target_words, matrix)
    styles, source_stacks = _paired_instances(source_segment)
    desired: list[tuple[int, ...]] = []
    for t in range(len(target_words)):
        best = best_source_for(t, matrix)
        desired.append(source_stacks[best] if best is not None else ())

    items: list[Union[str, FormattingTag]] = []
    stack: list[int] = []
    for t, word in enumerate(target_words):
        want = desired[t]
        common = 0
        while (
            common < len(stack)
            and common < len(want)
            and stack[common] == want[common]
        ):
            common += 1
        while len(stack) > common:
            items.append(FormattingTag(TagKind.CLOSE, styles[stack.pop()]))
        for instance in want[common:]:
            items.append(FormattingTag(TagKind.OPEN, styles[instance]))
            stack.append(instance)
        items.append(word)
    while stack:
        items.append(FormattingTag(TagKind.CLOSE, styles[stack.pop()]))
    return TaggedSegment(tuple(items), index=source_segment.index)


def insert_unpaired_tags(
    source_segment: TaggedSegment,
    target: Union[Sequence[str], TaggedSegment],
    matrix: AlignmentMatrix,
) -> TaggedSegment:
    """Place each unpaired source tag after the target word best aligned to
    the source word right before the tag.

    A tag with no preceding word goes before the first target word. If the
    preceding source word is aligned to nothing, the scan falls back to the
    nearest aligned word to its left (then to the segment-start rule).
    Within the anchor gap the tag settles at the nesting depth it had in the
    source, so identity alignments reproduce source positions exactly.
    """
    if isinstance(target, TaggedSegment):
        base_items: list[Union[str, FormattingTag]] = list(target.items)
        target_words = target.words()
        index = target.index
    else:
        base_items = list(target)
        target_words = list(target)
        index = source_segment.index
    _check_matrix(source_segment, target_words, matrix)

    def _anchor_for(source_word: int | None) -> int:
        w = source_word
        while w is not None and w >= 0:
            column = [matrix.scores[t][w] for t in range(matrix.n_target)]
            best = max(column)
            if best > 0.0:
                return column.index(best)
            w -= 1
        return -1  # before the first target word

    # (anchor word, paired open/close items between that word and the tag, tag)
    entries: list[tuple[int, int, FormattingTag]] = []
    words_seen = 0
    paired_since_word = 0
    for item in source_segment.items:
        if isinstance(item, str):
            words_seen += 1
            paired_since_word = 0
        elif item.kind is TagKind.UNPAIRED:
            anchor = _anchor_for(words_seen - 1 if words_seen else None)
            entries.append((anchor, paired_since_word, item))
        else:
            paired_since_word += 1

    items = list(base_items)
    for anchor, skip_paired, tag in entries:
        pos = _gap_position(items, anchor)
        remaining = skip_paired
        while pos < len(items):
            it = items[pos]
            if not isinstance(it, FormattingTag):
                break
            if it.kind is TagKind.UNPAIRED:
                pos += 1  # earlier tags in this gap keep source order
            elif remaining > 0:
                remaining -= 1
                pos += 1
            else:
                break
        items.insert(pos, tag)
    return TaggedSegment(tuple(items), index=index)


def _gap_position(items: Sequence[Union[str, FormattingTag]], anchor_word: int) -> int:
    """Item position right after the anchor word (segment start for -1)."""
    if anchor_word < 0:
        return 0
    seen = 0
    for pos, item in enumerate(items):
        if isinstance(item, str):
            if seen == anchor_word:
                return pos + 1
            seen += 1
    return len(items)


def transfer_tags(
    source_segment: TaggedSegment,
    target_words: Sequence[str],
    matrix: AlignmentMatrix,
) -> TaggedSegment:
    """Paired-tag transfer followed by unpaired-tag insertion."""
    with_pairs = transfer_paired_tags(source_segment, target_words, matrix)
    return insert_unpaired_tags(source_segment, with_pairs, matrix)


def _check_matrix(
    source_segment: TaggedSegment,
    target_words: Sequence[str],
    matrix: AlignmentMatrix,
) -> None:
    if matrix.n_target != len(target_words):
        raise ValueError(
            f"matrix covers {matrix.n_target} target words, got {len(target_words)}"
        )
    if matrix.n_source != len(source_segment.words()):
        raise ValueError(
            f"matrix covers {matrix.n_source} source words, "
            f"segment has {len(source_segment.words())}"
        )
