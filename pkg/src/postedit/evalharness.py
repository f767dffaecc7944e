"""Correction-protocol evaluation harness.

For each (source, MT, post-edit) triplet: locate BAD spans (gold labels or a
QE provider), fetch top-k suggestions per span, apply the candidate that
minimizes sentence TER against the post-edit (keeping the original when
nothing beats it), and report corpus TER/BLEU against the MT baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .docmodel import (
    CharacterSegmenter,
    Segmenter,
    model_token_span,
    subword_segment,
    to_model_tokens,
)
from .errors import ProviderError
from .metrics import bleu, corpus_ter, ter
from .qe import GoldAssignment, Label, QEProvider, WordQE, derive_gold_labels, gold_assignment, predict
from .suggest import EchoScorer, MaskScorer, Span, SuggestConfig, suggest

SELECTION_MODES = ("oracle", "predicted")
TOPK_CHOICES = (1, 3, 5)


@dataclass(frozen=True)
class Triplet:
    source: tuple[str, ...]
    mt: tuple[str, ...]
    post_edit: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (self.source and self.mt and self.post_edit):
            raise ValueError("triplet sentences must be non-empty")


@dataclass(frozen=True)
class HarnessConfig:
    selection: str = "oracle"
    top_k: int = 5
    suggest: SuggestConfig = field(default_factory=SuggestConfig)
    seed: int = 0
    include_gaps: bool = True

    def __post_init__(self) -> None:
        if self.selection not in SELECTION_MODES:
            raise ValueError(f"selection must be one of {SELECTION_MODES}")
        if self.top_k not in TOPK_CHOICES:
            raise ValueError(f"topk must be one of {TOPK_CHOICES}")


class OracleScorer:
    """Marker: resolve each span against the gold assignment, standing in for
    a scorer that always ranks the reference tokens first."""


def load_triplets(path: str | Path) -> list[Triplet]:
    """Read a UTF-8 TSV with one ``source<TAB>mt<TAB>post_edit`` per line."""
    triplets = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected 3 tab-separated fields")
        triplets.append(
            Triplet(
                source=tuple(fields[0].split()),
                mt=tuple(fields[1].split()),
                post_edit=tuple(fields[2].split()),
            )
        )
    if not triplets:
        raise ValueError(f"no triplets found in {path}")
    return triplets


def merge_label_spans(labels: WordQE, include_gaps: bool = True) -> list[Span]:
    """Contiguous BAD words become replacement spans and BAD gaps insertion
    spans, ordered left to right; a BAD gap strictly inside a BAD word run is
    absorbed by the surrounding replacement."""
    word_bad = [label is Label.BAD for label in labels.word_labels()]
    gap_bad = [label is Label.BAD for label in labels.gap_labels()]
    n = len(word_bad)
    spans: list[Span] = []
    for g in range(n + 1):
        inside_run = 0 < g < n and word_bad[g - 1] and word_bad[g]
        if include_gaps and gap_bad[g] and not inside_run:
            spans.append(Span(g, g))
        if g < n and word_bad[g] and (g == 0 or not word_bad[g - 1]):
            end = g
            while end < n and word_bad[end]:
                end += 1
            spans.append(Span(g, end))
    return spans


def _desired_span_words(
    assignment: GoldAssignment, span: Span
) -> list[str]:
    """What the post-edit holds where this span sits."""
    if span.is_gap:
        return list(assignment.gap_insertions[span.start])
    words: list[str] = []
    for i in range(span.start, span.end):
        if i > span.start:
            words.extend(assignment.gap_insertions[i])
        words.extend(assignment.word_replacements[i])
    return words


def _apply_span(
    sentence: list[str], span: Span, replacement: Sequence[str]
) -> list[str]:
    return [*sentence[: span.start], *replacement, *sentence[span.end :]]


def correct_sentence(
    triplet: Triplet,
    config: HarnessConfig,
    scorer: MaskScorer | OracleScorer,
    qe_provider: QEProvider | None = None,
    segmenter: Segmenter | None = None,
) -> list[str]:
    """One-shot correction pass over a sentence.

    Labels come from the gold TER script (oracle) or the QE provider
    (predicted) and are computed once; spans are then processed left to
    right, re-tokenizing after each applied edit. Candidate selection plays a
    perfect human choosing among the top-k shown suggestions by sentence TER,
    with keeping the original as the no-regression fallback.
    """
    segmenter = segmenter or CharacterSegmenter()
    if config.selection == "oracle":
        labels = derive_gold_labels(triplet.mt, triplet.post_edit)
    else:
        _, labels = predict(triplet.source, triplet.mt, qe_provider)
    spans = merge_label_spans(labels, include_gaps=config.include_gaps)
    assignment = (
        gold_assignment(triplet.mt, triplet.post_edit)
        if isinstance(scorer, OracleScorer)
        else None
    )
    source_map = subword_segment(triplet.source, segmenter)
    current = list(triplet.mt)
    offset = 0
    for span in spans:
        shifted = Span(span.start + offset, span.end + offset)
        target_map = subword_segment(current, segmenter)
        if assignment is not None:
            desired = _desired_span_words(assignment, span)
            desired_tokens: tuple[str, ...] = ()
            if desired:
                desired_tokens = tuple(
                    to_model_tokens(subword_segment(desired, segmenter))
                )
            span_scorer: MaskScorer = EchoScorer(
                tokens=desired_tokens,
                span_token_start=model_token_span(
                    target_map, shifted.start, shifted.end
                )[0],
            )
        else:
            span_scorer = scorer  # type: ignore[assignment]
        try:
            candidates = suggest(
                source_map, target_map, shifted, config.suggest, span_scorer
            )[: config.top_k]
        except ProviderError as exc:
            raise ProviderError(
                f"sentence {triplet.mt}: {exc}", provider=exc.provider
            ) from exc
        options: list[list[str]] = [list(current[shifted.start : shifted.end])]
        options.extend(c.text.split() for c in candidates)
        best_sentence = None
        best_score = None
        best_words = None
        for words in options:
            candidate_sentence = _apply_span(current, shifted, words)
            if not candidate_sentence:
                continue
            score = ter(candidate_sentence, list(triplet.post_edit)).score
            if best_score is None or score < best_score:
                best_score = score
                best_sentence = candidate_sentence
                best_words = words
        assert best_sentence is not None and best_words is not None
        offset += len(best_words) - (span.end - span.start)
        current = best_sentence
    return current


@dataclass(frozen=True)
class HarnessReport:
    baseline_ter: float
    baseline_bleu: float
    corrected_ter: float
    corrected_bleu: float
    top_k: int
    selection: str

    @property
    def delta_ter(self) -> float:
        return self.corrected_ter - self.baseline_ter

    @property
    def delta_bleu(self) -> float:
        return self.corrected_bleu - self.baseline_bleu


def run(
    dataset: Sequence[Triplet],
    config: HarnessConfig,
    scorer: MaskScorer | OracleScorer,
    qe_provider: QEProvider | None = None,
    segmenter: Segmenter | None = None,
) -> HarnessReport:
    """Correct every triplet and compare corpus TER/BLEU with the MT baseline."""
    if not dataset:
        raise ValueError("run requires a non-empty dataset")
    corrected = [
        correct_sentence(t, config, scorer, qe_provider, segmenter) for t in dataset
    ]
    references = [list(t.post_edit) for t in dataset]
    mt_outputs = [list(t.mt) for t in dataset]
    return HarnessReport(
        baseline_ter=corpus_ter(mt_outputs, references),
        baseline_bleu=bleu(mt_outputs, references),
        corrected_ter=corpus_ter(corrected, references),
        corrected_bleu=bleu(corrected, references),
        top_k=config.top_k,
        selection=config.selection,
    )


def format_table(report: HarnessReport) -> str:
    """Rows in the ``value (±delta)`` percentage format, e.g. ``25.36 (-6.01)``."""
    header = f"{'Model':<22}{'TER':<16}{'BLEU':<16}"
    baseline = (
        f"{'Baseline (MT)':<22}"
        f"{100 * report.baseline_ter:<16.2f}"
        f"{100 * report.baseline_bleu:<16.2f}"
    )
    corrected_label = f"Top-{report.top_k} ({report.selection} QE)"
    ter_cell = f"{100 * report.corrected_ter:.2f} ({100 * report.delta_ter:+.2f})"
    bleu_cell = f"{100 * report.corrected_bleu:.2f} ({100 * report.delta_bleu:+.2f})"
    corrected = f"{corrected_label:<22}{ter_cell:<16}{bleu_cell:<16}"
    return "\n".join([header, baseline, corrected])


def report_json(report: HarnessReport) -> dict:
    """Percentage-scale report: {baseline, corrected, deltas} x {ter, bleu}."""
    return {
        "baseline": {
            "ter": round(100 * report.baseline_ter, 2),
            "bleu": round(100 * report.baseline_bleu, 2),
        },
        "corrected": {
            "ter": round(100 * report.corrected_ter, 2),
            "bleu": round(100 * report.corrected_bleu, 2),
        },
        "deltas": {
            "ter": round(100 * report.delta_ter, 2),
            "bleu": round(100 * report.delta_bleu, 2),
        },
    }
