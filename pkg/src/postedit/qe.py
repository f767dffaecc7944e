"""Quality-estimation semantics.

Sentence quality is shown as ``1 - predicted HTER`` (clamped); word and gap
BAD probabilities map to underline/checkmark colors (yellow above 0.5, red
above 0.8). Gold labels are read off the TER edit script between the MT
output and its post-edit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence

from .errors import ProviderError
from .metrics import ter

BAD_THRESHOLD = 0.5
RED_THRESHOLD = 0.8


class Label(Enum):
    OK = "OK"
    BAD = "BAD"


class ConfidenceColor(Enum):
    NONE = "none"
    YELLOW = "yellow"
    RED = "red"


def display_quality(predicted_hter: float) -> float:
    """Sentence quality shown to the user: ``1 - hter`` clamped into [0, 1]."""
    if predicted_hter < 0:
        raise ValueError("predicted HTER must be non-negative")
    return 1.0 - min(predicted_hter, 1.0)


def color_of(p_bad: float) -> ConfidenceColor:
    """Underline/checkmark color for a BAD probability (strict thresholds)."""
    if not 0.0 <= p_bad <= 1.0:
        raise ValueError(f"p_bad out of range: {p_bad}")
    if p_bad > RED_THRESHOLD:
        return ConfidenceColor.RED
    if p_bad > BAD_THRESHOLD:
        return ConfidenceColor.YELLOW
    return ConfidenceColor.NONE


def label_of(p_bad: float) -> Label:
    return Label.BAD if p_bad > BAD_THRESHOLD else Label.OK


@dataclass(frozen=True)
class SentenceQE:
    predicted_hter: float

    def __post_init__(self) -> None:
        if self.predicted_hter < 0:
            raise ValueError("predicted HTER must be non-negative")

    @property
    def display_quality(self) -> float:
        return display_quality(self.predicted_hter)


@dataclass(frozen=True)
class WordQE:
    """Per-word and per-gap BAD probabilities; gaps always number words + 1."""

    word_probs: tuple[float, ...]
    gap_probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.gap_probs) != len(self.word_probs) + 1:
            raise ValueError("gap list must have exactly one more entry than words")
        for p in (*self.word_probs, *self.gap_probs):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of range: {p}")

    def word_labels(self) -> list[Label]:
        return [label_of(p) for p in self.word_probs]

    def gap_labels(self) -> list[Label]:
        return [label_of(p) for p in self.gap_probs]


@dataclass(frozen=True)
class GoldAssignment:
    """Reference words assigned to each MT word and gap by the TER script.

    ``word_replacements[i]`` is what MT word ``i`` becomes in the post-edit
    (itself when OK, a substitute word, or nothing when deleted/shifted away);
    ``gap_insertions[g]`` are the post-edit words missing at gap ``g``.
    Splicing replacements and insertions in order reconstructs the post-edit.
    """

    word_replacements: tuple[tuple[str, ...], ...]
    gap_insertions: tuple[tuple[str, ...], ...]

    def reconstruct(self, mt: Sequence[str]) -> list[str]:
        out: list[str] = []
        for i in range(len(mt)):
            out.extend(self.gap_insertions[i])
            out.extend(self.word_replacements[i])
        out.extend(self.gap_insertions[len(mt)])
        return out


def gold_assignment(mt: Sequence[str], post_edit: Sequence[str]) -> GoldAssignment:
    """Map the TER script onto original MT positions.

    Shifted blocks vanish at their origin; the reference words they produce
    are re-attributed as insertions at the gap where the block landed.
    """
    if not mt or not post_edit:
        raise ValueError("gold_assignment requires non-empty sentences")
    script = ter(mt, post_edit).script
    shifted = script.shifted_indices
    replacements: list[tuple[str, ...]] = [()] * len(mt)
    insertions: list[list[str]] = [[] for _ in range(len(mt) + 1)]
    pending: list[str] = []
    for op in script.ops:
        if op.kind == "insert":
            pending.append(op.ref_word or "")
        elif op.hyp_index in shifted:
            replacements[op.hyp_index] = ()
            if op.kind in ("match", "substitute"):
                pending.append(op.ref_word or "")
        else:
            assert op.hyp_index is not None
            insertions[op.hyp_index].extend(pending)
            pending = []
            if op.kind == "delete":
                replacements[op.hyp_index] = ()
            else:
                replacements[op.hyp_index] = (op.ref_word or "",)
    insertions[len(mt)].extend(pending)
    return GoldAssignment(
        word_replacements=tuple(replacements),
        gap_insertions=tuple(tuple(ins) for ins in insertions),
    )


def derive_gold_labels(mt: Sequence[str], post_edit: Sequence[str]) -> WordQE:
    """Gold word/gap labels: BAD words were substituted, deleted or shifted;
    BAD gaps need at least one inserted word."""
    assignment = gold_assignment(mt, post_edit)
    word_probs = tuple(
        0.0 if assignment.word_replacements[i] == (mt[i],) else 1.0
        for i in range(len(mt))
    )
    gap_probs = tuple(
        1.0 if ins else 0.0 for ins in assignment.gap_insertions
    )
    return WordQE(word_probs=word_probs, gap_probs=gap_probs)


class QEProvider(Protocol):
    """Quality-estimation provider contract.

    Returns ``(hter, word_p_bads, gap_p_bads)`` for a (source, mt) pair.
    """

    def predict(
        self, source: Sequence[str], mt: Sequence[str]
    ) -> tuple[float, Sequence[float], Sequence[float]]:
        ...


def predict(
    source: Sequence[str], mt: Sequence[str], provider: QEProvider | None = None
) -> tuple[SentenceQE, WordQE]:
    """Run a QE provider and validate its output against the type invariants."""
    if provider is None:
        from .providers import demo_qe_provider

        provider = demo_qe_provider()
    try:
        raw = provider.predict(source, mt)
    except ProviderError:
        raise
    except Exception as exc:
        raise ProviderError(f"QE provider failed: {exc}", provider="qe") from exc
    try:
        hter, word_probs, gap_probs = raw
        sentence = SentenceQE(predicted_hter=float(hter))
        words = WordQE(
            word_probs=tuple(float(p) for p in word_probs),
            gap_probs=tuple(float(p) for p in gap_probs),
        )
    except (TypeError, ValueError) as exc:
        raise ProviderError(
            f"QE provider returned invalid output: {exc}", provider="qe"
        ) from exc
    if len(words.word_probs) != len(mt):
        raise ProviderError(
            f"QE provider returned {len(words.word_probs)} word probabilities "
            f"for {len(mt)} words",
            provider="qe",
        )
    return sentence, words


@dataclass(frozen=True)
class LexiconQEProvider:
    """Heuristic predictor: a word is suspect when no source word is a known
    translation of it.

    ``lexicon[source_word][target_word]`` holds an association in [0, 1];
    p_bad is one minus the best association over the source sentence, the
    sentence HTER estimate is the mean word p_bad, and gaps get 0.0 (the
    lexicon carries no evidence about missing words).
    """

    lexicon: dict[str, dict[str, float]]

    def predict(
        self, source: Sequence[str], mt: Sequence[str]
    ) -> tuple[float, Sequence[float], Sequence[float]]:
        word_probs = []
        for target_word in mt:
            best = 0.0
            for source_word in source:
                best = max(best, self.lexicon.get(source_word, {}).get(target_word, 0.0))
            word_probs.append(1.0 - best)
        hter = sum(word_probs) / len(word_probs) if word_probs else 0.0
        return hter, word_probs, [0.0] * (len(mt) + 1)


@dataclass(frozen=True)
class OracleQEProvider:
    """Test provider which knows each MT sentence's post-edit and answers with
    the gold labels and true HTER."""

    post_edits: dict[tuple[str, ...], tuple[str, ...]]

    def predict(
        self, source: Sequence[str], mt: Sequence[str]
    ) -> tuple[float, Sequence[float], Sequence[float]]:
        key = tuple(mt)
        if key not in self.post_edits:
            raise ProviderError(f"no post-edit known for {key!r}", provider="oracle-qe")
        post_edit = self.post_edits[key]
        labels = derive_gold_labels(mt, post_edit)
        return ter(mt, post_edit).score, labels.word_probs, labels.gap_probs
