"""Bidirectional-context span suggestion.

A selected word span (or gap) in the target sentence is replaced by 1..m
mask placeholders, producing m variants; each variant is filled left to
right by beam search against a mask-scorer provider, and the union of the
filled results is ranked by raw joint probability. Also generates masked
training examples for scorer fine-tuning (whole-word target-side masking).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Protocol, Sequence

from .docmodel import (
    CharacterSegmenter,
    Segmenter,
    SubwordMap,
    WORD_START,
    detokenize,
    model_token_span,
    subword_segment,
    to_model_tokens,
)
from .errors import ProviderError

MASK = "<mask>"
SEPARATOR = "</s>"
BOS = "<s>"

MASK_PERCENT_CHOICES = (15, 20, 25)


@dataclass(frozen=True)
class Span:
    """Half-open word range; ``start == end`` marks a gap insertion point."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    @property
    def is_gap(self) -> bool:
        return self.start == self.end

    def validate(self, word_count: int) -> None:
        if self.end > word_count:
            raise ValueError(
                f"span [{self.start}, {self.end}) exceeds {word_count} words"
            )


@dataclass(frozen=True)
class SuggestConfig:
    max_masks: int = 5  # number of masked variants generated per request
    beam_size: int = 5
    normalize_by_length: bool = False  # rank by mean log-prob per token instead

    def __post_init__(self) -> None:
        if self.max_masks < 1 or self.beam_size < 1:
            raise ValueError("max_masks and beam_size must be positive")


@dataclass(frozen=True)
class SuggestionCandidate:
    text: str
    token_count: int
    joint_log_prob: float

    def __post_init__(self) -> None:
        if self.joint_log_prob > 0.0:
            raise ValueError("joint log probability must be <= 0")


@dataclass(frozen=True)
class MaskedVariant:
    """Source tokens plus target tokens with ``None`` at mask positions."""

    source_tokens: tuple[str, ...]
    target_tokens: tuple[str | None, ...]
    mask_count: int

    def display(self) -> str:
        parts: list[str] = []
        for tok in self.target_tokens:
            if tok is None:
                parts.append(" " + MASK)
            elif tok.startswith(WORD_START):
                parts.append(" " + tok[len(WORD_START) :])
            else:
                parts.append(tok)
        return "".join(parts).strip()

    def combined(self) -> list[str]:
        """Full model input: source, separator, masked target."""
        return [
            *self.source_tokens,
            SEPARATOR,
            *(MASK if t is None else t for t in self.target_tokens),
        ]


class MaskScorer(Protocol):
    """Mask-prediction provider contract.

    Given the source tokens, the target tokens with ``None`` at unresolved
    masks and the index of the leftmost one, returns at least ``top_n``
    ``(token, probability)`` pairs sorted by descending probability, all
    probabilities in (0, 1]. Must be deterministic for identical input.
    """

    def score(
        self,
        source_tokens: Sequence[str],
        target_tokens: Sequence[str | None],
        mask_index: int,
        top_n: int,
    ) -> list[tuple[str, float]]:
        ...


def make_masked_variants(
    source: SubwordMap, target: SubwordMap, span: Span, max_masks: int
) -> list[MaskedVariant]:
    """Variant ``i`` (1-based) replaces the span's sub-word tokens with ``i``
    consecutive masks; everything else is untouched."""
    span.validate(len(target.words))
    source_tokens = tuple(to_model_tokens(source))
    target_tokens = to_model_tokens(target)
    lo, hi = model_token_span(target, span.start, span.end)
    variants = []
    for i in range(1, max_masks + 1):
        masked = (*target_tokens[:lo], *([None] * i), *target_tokens[hi:])
        variants.append(
            MaskedVariant(
                source_tokens=source_tokens, target_tokens=masked, mask_count=i
            )
        )
    return variants


@dataclass(frozen=True)
class BeamResult:
    tokens: tuple[str, ...]  # the full target sequence with masks filled
    filled: tuple[str, ...]  # just the tokens chosen for the masks
    log_prob: float


def _validated_candidates(
    scorer: MaskScorer,
    variant_source: Sequence[str],
    tokens: Sequence[str | None],
    mask_index: int,
    top_n: int,
) -> list[tuple[str, float]]:
    try:
        candidates = scorer.score(variant_source, tokens, mask_index, top_n)
    except ProviderError:
        raise
    except Exception as exc:
        raise ProviderError(f"mask scorer failed: {exc}", provider="scorer") from exc
    if not candidates:
        raise ProviderError("mask scorer returned no candidates", provider="scorer")
    previous = None
    for token, prob in candidates:
        if not 0.0 < prob <= 1.0:
            raise ProviderError(
                f"mask scorer probability out of range: {prob}", provider="scorer"
            )
        if previous is not None and prob > previous:
            raise ProviderError(
                "mask scorer candidates not sorted by descending probability",
                provider="scorer",
            )
        previous = prob
    return candidates


def fill_masks_beam(
    variant: MaskedVariant, scorer: MaskScorer, beam_size: int
) -> list[BeamResult]:
    """Left-to-right beam fill of every mask in the variant.

    Keeps the ``beam_size`` best partial fills by summed log probability;
    ties order by the chosen token sequence. Returns completed beams sorted
    by descending joint log probability.
    """
    if variant.mask_count < 1:
        raise ValueError("variant contains no masks")
    beams: list[tuple[list[str | None], tuple[str, ...], float]] = [
        (list(variant.target_tokens), (), 0.0)
    ]
    while True:
        mask_index = next(
            (i for i, t in enumerate(beams[0][0]) if t is None), None
        )
        if mask_index is None:
            break
        expanded: list[tuple[list[str | None], tuple[str, ...], float]] = []
        for tokens, chosen, log_prob in beams:
            candidates = _validated_candidates(
                scorer, variant.source_tokens, tokens, mask_index, beam_size
            )
            for token, prob in candidates[: max(beam_size, 1)]:
                filled = list(tokens)
                filled[mask_index] = token
                expanded.append(
                    (filled, chosen + (token,), log_prob + math.log(prob))
                )
        expanded.sort(key=lambda b: (-b[2], b[1]))
        beams = expanded[:beam_size]
    return [
        BeamResult(
            tokens=tuple(t for t in tokens if t is not None),
            filled=chosen,
            log_prob=log_prob,
        )
        for tokens, chosen, log_prob in beams
    ]


def suggest(
    source: SubwordMap,
    target: SubwordMap,
    span: Span,
    config: SuggestConfig,
    scorer: MaskScorer,
) -> list[SuggestionCandidate]:
    """Fill all masked variants, merge, rank, and truncate to the beam size.

    Duplicate texts keep the higher joint log probability. For replacement
    spans a candidate identical to the original text is dropped (an
    alternative must differ); gap insertions have no original to filter.
    Ranking uses the raw joint probability unless ``normalize_by_length``
    trades the known short-candidate bias for mean per-token log probability.
    """
    variants = make_masked_variants(source, target, span, config.max_masks)
    merged: dict[str, SuggestionCandidate] = {}
    for variant in variants:
        for result in fill_masks_beam(variant, scorer, config.beam_size):
            text = detokenize(result.filled)
            if not text:
                continue
            existing = merged.get(text)
            if existing is None or result.log_prob > existing.joint_log_prob:
                merged[text] = SuggestionCandidate(
                    text=text,
                    token_count=variant.mask_count,
                    joint_log_prob=result.log_prob,
                )
    if not span.is_gap:
        original = " ".join(target.words[span.start : span.end])
        merged.pop(original, None)

    def rank(candidate: SuggestionCandidate) -> float:
        if config.normalize_by_length:
            return candidate.joint_log_prob / candidate.token_count
        return candidate.joint_log_prob

    ordered = sorted(merged.values(), key=lambda c: (-rank(c), c.text))
    return ordered[: config.beam_size]


@dataclass(frozen=True)
class TlmMaskConfig:
    mask_percent: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mask_percent not in MASK_PERCENT_CHOICES:
            raise ValueError(
                f"mask percentage must be one of {MASK_PERCENT_CHOICES}"
            )


@dataclass(frozen=True)
class TlmExample:
    source_tokens: tuple[str, ...]
    masked_target_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    masked_word_indices: tuple[int, ...]


def generate_tlm_examples(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    segmenter: Segmenter,
    config: TlmMaskConfig,
) -> list[TlmExample]:
    """Whole-word target-side masking for scorer training data.

    Randomly picks target words until at least ``mask_percent`` percent of
    the target sub-word tokens are covered (the last pick may overshoot by at
    most one word); every sub-word of a picked word becomes a mask and the
    source side is never touched. Deterministic under a fixed seed.
    """
    if not pairs:
        raise ValueError("generate_tlm_examples requires a non-empty corpus")
    rng = random.Random(config.seed)
    examples = []
    for source_words, target_words in pairs:
        source_map = subword_segment(source_words, segmenter)
        target_map = subword_segment(target_words, segmenter)
        total = len(target_map.flat())
        order = list(range(len(target_words)))
        rng.shuffle(order)
        covered = 0
        chosen: list[int] = []
        for w in order:
            if covered * 100 >= config.mask_percent * total:
                break
            chosen.append(w)
            covered += len(target_map.pieces[w])
        chosen.sort()
        target_tokens = to_model_tokens(target_map)
        masked = list(target_tokens)
        for w in chosen:
            lo, hi = model_token_span(target_map, w, w + 1)
            masked[lo:hi] = [MASK] * (hi - lo)
        examples.append(
            TlmExample(
                source_tokens=tuple(to_model_tokens(source_map)),
                masked_target_tokens=tuple(masked),
                target_tokens=tuple(target_tokens),
                masked_word_indices=tuple(chosen),
            )
        )
    return examples


class NgramMaskScorer:
    """Reference scorer for desk-scale runs: an interpolated target trigram
    LM weighted by lexical association with the source tokens, estimated from
    a small parallel corpus. Uses left context only; fully deterministic."""

    LAMBDAS = (0.2, 0.3, 0.5)  # unigram, bigram, trigram
    ALPHA = 0.1
    LEX_FLOOR = 0.1

    def __init__(
        self,
        corpus: Sequence[tuple[Sequence[str], Sequence[str]]],
        segmenter: Segmenter | None = None,
    ):
        if not corpus:
            raise ValueError("NgramMaskScorer requires a non-empty corpus")
        segmenter = segmenter or CharacterSegmenter()
        self._unigram: dict[str, int] = {}
        self._bigram: dict[tuple[str, str], int] = {}
        self._trigram: dict[tuple[str, str, str], int] = {}
        self._ctx1: dict[str, int] = {}
        self._ctx2: dict[tuple[str, str], int] = {}
        self._cooc: dict[tuple[str, str], int] = {}
        self._source_count: dict[str, int] = {}
        self._positions = 0
        for source_words, target_words in corpus:
            source_tokens = to_model_tokens(subword_segment(source_words, segmenter))
            target_tokens = to_model_tokens(subword_segment(target_words, segmenter))
            padded = [BOS, BOS, *target_tokens]
            for i, token in enumerate(target_tokens):
                c2, c1 = padded[i], padded[i + 1]
                self._unigram[token] = self._unigram.get(token, 0) + 1
                self._bigram[(c1, token)] = self._bigram.get((c1, token), 0) + 1
                self._trigram[(c2, c1, token)] = (
                    self._trigram.get((c2, c1, token), 0) + 1
                )
                self._ctx1[c1] = self._ctx1.get(c1, 0) + 1
                self._ctx2[(c2, c1)] = self._ctx2.get((c2, c1), 0) + 1
                self._positions += 1
            for s in set(source_tokens):
                self._source_count[s] = self._source_count.get(s, 0) + 1
                for t in set(target_tokens):
                    self._cooc[(t, s)] = self._cooc.get((t, s), 0) + 1
        self._vocab = sorted(self._unigram)

    def _lm(self, c2: str, c1: str, token: str) -> float:
        v = len(self._vocab)
        a = self.ALPHA
        p1 = (self._unigram.get(token, 0) + a) / (self._positions + a * v)
        p2 = (self._bigram.get((c1, token), 0) + a) / (self._ctx1.get(c1, 0) + a * v)
        p3 = (self._trigram.get((c2, c1, token), 0) + a) / (
            self._ctx2.get((c2, c1), 0) + a * v
        )
        l1, l2, l3 = self.LAMBDAS
        return l1 * p1 + l2 * p2 + l3 * p3

    def _lex(self, token: str, source_tokens: Sequence[str]) -> float:
        best = 0.0
        for s in source_tokens:
            count = self._source_count.get(s, 0)
            if count:
                best = max(best, self._cooc.get((token, s), 0) / count)
        return self.LEX_FLOOR + (1.0 - self.LEX_FLOOR) * best

    def score(
        self,
        source_tokens: Sequence[str],
        target_tokens: Sequence[str | None],
        mask_index: int,
        top_n: int,
    ) -> list[tuple[str, float]]:
        context = [t for t in target_tokens[:mask_index] if t is not None]
        c2 = context[-2] if len(context) >= 2 else BOS
        c1 = context[-1] if context else BOS
        raw = [
            (token, self._lm(c2, c1, token) * self._lex(token, source_tokens))
            for token in self._vocab
        ]
        total = sum(weight for _, weight in raw)
        scored = sorted(
            ((token, weight / total) for token, weight in raw),
            key=lambda item: (-item[1], item[0]),
        )
        return scored[:top_n]


@dataclass(frozen=True)
class EchoScorer:
    """Scorer that deterministically prefers one fixed token sequence.

    Emits the next desired token with probability 1 when the variant's mask
    count equals the desired length (so the exact-length variant always wins)
    and with a discounted probability otherwise; filler tokens pad the
    candidate list. ``span_token_start`` anchors mask ordinals, so it must
    match the token offset used to build the variants.
    """

    tokens: tuple[str, ...]
    span_token_start: int
    filler_prob: float = 1e-6

    def score(
        self,
        source_tokens: Sequence[str],
        target_tokens: Sequence[str | None],
        mask_index: int,
        top_n: int,
    ) -> list[tuple[str, float]]:
        ordinal = mask_index - self.span_token_start
        remaining = sum(1 for t in target_tokens if t is None)
        exact = ordinal + remaining == len(self.tokens)
        if 0 <= ordinal < len(self.tokens):
            desired = self.tokens[ordinal]
            prob = 1.0 if exact else 1e-3
        else:
            desired = WORD_START + "unk"
            prob = 1e-3
        out = [(desired, prob)]
        fill = min(self.filler_prob, prob / 2)
        for i in range(max(top_n - 1, 0)):
            out.append((WORD_START + f"pad{i}", fill / (i + 1)))
        return out
