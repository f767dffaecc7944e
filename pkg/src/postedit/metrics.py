"""Translation edit rate (with block shifts) and corpus BLEU.

TER counts the minimal substitutions, insertions, deletions and block shifts
needed to turn a hypothesis into a reference, divided by the reference
length. Shifts follow the reference tool's greedy heuristic: a contiguous
hypothesis block may move only if it exactly matches some reference span and
contains at least one currently misaligned word; the shift with the largest
edit-distance reduction (leftmost on ties) is applied until none helps.

HTER is TER between an MT output and its human post-edit. Scores are
fractions; multiply by 100 for the percentages used in reports.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

# Blocks longer than this are never shifted (reference-tool convention).
MAX_SHIFT_LENGTH = 10

BLEU_ORDER = 4
BLEU_EPSILON = 1e-9


@dataclass(frozen=True)
class ShiftOp:
    """Move of hypothesis words [start, end) to ``destination`` (positions in
    the hypothesis as it stood before this shift, after earlier ones)."""

    start: int
    end: int
    destination: int
    words: tuple[str, ...]
    origin_indices: tuple[int, ...]  # indices into the original hypothesis


@dataclass(frozen=True)
class AlignOp:
    """One aligned step of the final word-level alignment.

    ``hyp_index`` refers to the original hypothesis (None for insertions);
    ``ref_word`` is the emitted reference word (None for deletions).
    """

    kind: str  # "match" | "substitute" | "insert" | "delete"
    hyp_index: int | None
    ref_index: int | None
    ref_word: str | None


@dataclass(frozen=True)
class EditScript:
    shifts: tuple[ShiftOp, ...]
    ops: tuple[AlignOp, ...]

    @cached_property
    def counts(self) -> dict[str, int]:
        c = {"match": 0, "substitute": 0, "insert": 0, "delete": 0}
        for op in self.ops:
            c[op.kind] += 1
        c["shift"] = len(self.shifts)
        return c

    @property
    def cost(self) -> int:
        c = self.counts
        return c["substitute"] + c["insert"] + c["delete"] + c["shift"]

    @cached_property
    def shifted_indices(self) -> frozenset[int]:
        return frozenset(i for s in self.shifts for i in s.origin_indices)

    def apply(self, hypothesis: Sequence[str]) -> list[str]:
        """Replay the script on ``hypothesis``; the result is the reference."""
        work = list(hypothesis)
        for s in self.shifts:
            block = work[s.start : s.end]
            del work[s.start : s.end]
            work[s.destination : s.destination] = block
        out: list[str] = []
        cursor = 0
        for op in self.ops:
            if op.kind == "insert":
                out.append(op.ref_word or "")
            elif op.kind == "delete":
                cursor += 1
            else:
                out.append(op.ref_word if op.ref_word is not None else work[cursor])
                cursor += 1
        return out


@dataclass(frozen=True)
class TerResult:
    score: float
    script: EditScript
    ref_length: int

    @property
    def num_edits(self) -> int:
        return self.script.cost


def _edit_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Word-level Levenshtein distance with unit costs."""
    if not hyp:
        return len(ref)
    prev = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, start=1):
        cur = [i] + [0] * len(ref)
        for j, r in enumerate(ref, start=1):
            cur[j] = min(
                prev[j - 1] + (0 if h == r else 1),
                prev[j] + 1,
                cur[j - 1] + 1,
            )
        prev = cur
    return prev[-1]


def _align(
    hyp: Sequence[tuple[str, int]], ref: Sequence[str]
) -> tuple[int, list[AlignOp]]:
    """Levenshtein alignment of (word, original-index) pairs against ``ref``.

    Backtrace ties prefer diagonal steps, then deletion, then insertion, so
    the produced script is deterministic.
    """
    n, m = len(hyp), len(ref)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        hw = hyp[i - 1][0]
        row = dist[i]
        prev_row = dist[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev_row[j - 1] + (0 if hw == ref[j - 1] else 1),
                prev_row[j] + 1,
                row[j - 1] + 1,
            )
    ops: list[AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            step = dist[i - 1][j - 1] + (0 if hyp[i - 1][0] == ref[j - 1] else 1)
            if step == dist[i][j]:
                kind = "match" if hyp[i - 1][0] == ref[j - 1] else "substitute"
                ops.append(AlignOp(kind, hyp[i - 1][1], j - 1, ref[j - 1]))
                i, j = i - 1, j - 1
                continue
        if i > 0 and dist[i - 1][j] + 1 == dist[i][j]:
            ops.append(AlignOp("delete", hyp[i - 1][1], None, None))
            i -= 1
            continue
        ops.append(AlignOp("insert", None, j - 1, ref[j - 1]))
        j -= 1
    ops.reverse()
    return dist[n][m], ops


def _misaligned_positions(
    hyp: Sequence[tuple[str, int]], ref: Sequence[str]
) -> set[int]:
    """Positions (in the current hypothesis) not covered by a match op."""
    _, ops = _align(hyp, ref)
    matched_originals = {op.hyp_index for op in ops if op.kind == "match"}
    return {
        pos for pos, (_, orig) in enumerate(hyp) if orig not in matched_originals
    }


def _ref_spans(ref: Sequence[str]) -> dict[tuple[str, ...], bool]:
    spans: dict[tuple[str, ...], bool] = {}
    for length in range(1, min(len(ref), MAX_SHIFT_LENGTH) + 1):
        for p in range(len(ref) - length + 1):
            spans[tuple(ref[p : p + length])] = True
    return spans


def _best_shift(
    hyp: list[tuple[str, int]], ref: Sequence[str], base_distance: int
) -> tuple[int, ShiftOp, list[tuple[str, int]]] | None:
    """The constrained shift with the largest distance reduction, or None."""
    spans = _ref_spans(ref)
    misaligned = _misaligned_positions(hyp, ref)
    best: tuple[int, int, int, int] | None = None  # (-reduction, start, end, dest)
    best_state: list[tuple[str, int]] | None = None
    n = len(hyp)
    for start in range(n):
        for end in range(start + 1, min(n, start + MAX_SHIFT_LENGTH) + 1):
            block = hyp[start:end]
            if tuple(w for w, _ in block) not in spans:
                continue
            if not any(pos in misaligned for pos in range(start, end)):
                continue
            remainder = hyp[:start] + hyp[end:]
            for dest in range(len(remainder) + 1):
                if dest == start:
                    continue
                candidate = remainder[:dest] + block + remainder[dest:]
                reduction = base_distance - _edit_distance(
                    [w for w, _ in candidate], ref
                )
                if reduction <= 0:
                    continue
                key = (-reduction, start, end, dest)
                if best is None or key < best:
                    best = key
                    best_state = candidate
    if best is None or best_state is None:
        return None
    reduction, start, end, dest = -best[0], best[1], best[2], best[3]
    op = ShiftOp(
        start=start,
        end=end,
        destination=dest,
        words=tuple(w for w, _ in hyp[start:end]),
        origin_indices=tuple(orig for _, orig in hyp[start:end]),
    )
    return reduction, op, best_state


def ter(hypothesis: Sequence[str], reference: Sequence[str]) -> TerResult:
    """Greedy-shift TER. ``reference`` must be non-empty; scores can exceed 1."""
    if not reference:
        raise ValueError("ter requires a non-empty reference")
    current: list[tuple[str, int]] = [(w, i) for i, w in enumerate(hypothesis)]
    shifts: list[ShiftOp] = []
    distance = _edit_distance([w for w, _ in current], reference)
    while distance > 0:
        found = _best_shift(current, reference, distance)
        if found is None:
            break
        reduction, op, current = found
        shifts.append(op)
        distance -= reduction
    _, ops = _align(current, reference)
    script = EditScript(shifts=tuple(shifts), ops=tuple(ops))
    return TerResult(
        score=script.cost / len(reference),
        script=script,
        ref_length=len(reference),
    )


def hter(mt: Sequence[str], post_edit: Sequence[str]) -> TerResult:
    """TER of MT output against its human post-edit: the sentence QE target."""
    return ter(mt, post_edit)


def corpus_ter(
    hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]]
) -> float:
    """Total edits over total reference words."""
    if len(hypotheses) != len(references):
        raise ValueError("corpus_ter requires equal-length lists")
    edits = 0
    ref_words = 0
    for hyp, ref in zip(hypotheses, references):
        result = ter(hyp, ref)
        edits += result.num_edits
        ref_words += result.ref_length
    if ref_words == 0:
        raise ValueError("corpus_ter requires non-empty references")
    return edits / ref_words


def _ngrams(words: Sequence[str], n: int) -> Counter:
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


def bleu(
    hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]]
) -> float:
    """Corpus BLEU up to 4-grams with brevity penalty.

    Zero clipped-match counts are smoothed by replacing the numerator with
    ``BLEU_EPSILON``; n-gram orders with no hypothesis n-grams at all are
    dropped from the geometric mean, so an exact corpus match scores 1.0.
    """
    if len(hypotheses) != len(references):
        raise ValueError("bleu requires equal-length lists")
    if not hypotheses:
        raise ValueError("bleu requires a non-empty corpus")
    for ref in references:
        if not ref:
            raise ValueError("bleu requires non-empty references")
    matches = [0] * BLEU_ORDER
    totals = [0] * BLEU_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, BLEU_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            matches[n - 1] += sum((hyp_counts & ref_counts).values())
    if hyp_len == 0 or totals[0] == 0:
        return 0.0
    log_sum = 0.0
    effective = 0
    for n in range(BLEU_ORDER):
        if totals[n] == 0:
            continue
        numerator = matches[n] if matches[n] > 0 else BLEU_EPSILON
        log_sum += math.log(numerator / totals[n])
        effective += 1
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity * math.exp(log_sum / effective)
