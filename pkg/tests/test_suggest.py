import math
import random

import pytest

from postedit.docmodel import (
    WORD_START,
    model_token_span,
    subword_segment,
    to_model_tokens,
)
from postedit.errors import ProviderError
from postedit.providers import demo_parallel_corpus
from postedit.suggest import (
    EchoScorer,
    MASK,
    MaskedVariant,
    NgramMaskScorer,
    Span,
    SuggestConfig,
    TlmMaskConfig,
    fill_masks_beam,
    generate_tlm_examples,
    make_masked_variants,
    suggest,
)

from oracles import exhaustive_fill


class TableScorer:
    """Fixed conditional table keyed by the tokens filled so far."""

    def __init__(self, table):
        self.table = table  # context tuple -> list of (token, prob)

    def score(self, source_tokens, target_tokens, mask_index, top_n):
        context = tuple(
            t for t in target_tokens[:mask_index] if t is not None and t.startswith("+")
        )
        return self.table[context][:top_n]


class RandomTableScorer:
    """Deterministic pseudo-random distributions over a toy vocabulary."""

    def __init__(self, vocab, seed):
        self.vocab = list(vocab)
        self.seed = seed

    def score(self, source_tokens, target_tokens, mask_index, top_n):
        context = tuple(t or "<m>" for t in target_tokens[:mask_index])
        rng = random.Random(repr((self.seed, context, mask_index)))
        weights = [rng.random() + 0.05 for _ in self.vocab]
        total = sum(weights)
        ranked = sorted(
            ((v, w / total) for v, w in zip(self.vocab, weights)),
            key=lambda p: (-p[1], p[0]),
        )
        return ranked[:top_n]


@pytest.fixture
def maps(segmenter):
    source = subword_segment("the cat".split(), segmenter)
    target = subword_segment("a b c".split(), segmenter)
    return source, target


def test_masked_variants_replace_span(maps):
    source, target = maps
    variants = make_masked_variants(source, target, Span(1, 2), 2)
    assert [v.display() for v in variants] == ["a <mask> c", "a <mask> <mask> c"]
    assert all(v.source_tokens == tuple(to_model_tokens(source)) for v in variants)


def test_masked_variants_gap_insertion(maps):
    source, target = maps
    variants = make_masked_variants(source, target, Span(1, 1), 1)
    assert [v.display() for v in variants] == ["a <mask> b c"]


def test_masked_variants_cardinality(maps):
    source, target = maps
    assert len(make_masked_variants(source, target, Span(0, 3), 3)) == 3
    for i, variant in enumerate(make_masked_variants(source, target, Span(0, 3), 3), 1):
        assert variant.mask_count == i
        assert sum(1 for t in variant.target_tokens if t is None) == i


def test_masked_variants_invalid_span(maps):
    source, target = maps
    with pytest.raises(ValueError):
        make_masked_variants(source, target, Span(2, 5), 1)


def test_variant_combined_inserts_separator(maps):
    source, target = maps
    variant = make_masked_variants(source, target, Span(0, 1), 1)[0]
    combined = variant.combined()
    assert "</s>" in combined
    assert MASK in combined


def test_beam_single_mask():
    scorer = TableScorer({(): [("+x", 0.9), ("+y", 0.1)]})
    variant = MaskedVariant(("s",), (None,), 1)
    results = fill_masks_beam(variant, scorer, 2)
    assert [(r.filled, r.log_prob) for r in results] == [
        (("+x",), math.log(0.9)),
        (("+y",), math.log(0.1)),
    ]


def test_beam_equals_exhaustive_toy():
    # |V|=3, two masks, beam wide enough to cover all 9 sequences
    vocab = [f"+t{i}" for i in range(3)]
    scorer = RandomTableScorer(vocab, seed=5)
    variant = MaskedVariant(("s",), (None, None), 2)
    beams = fill_masks_beam(variant, scorer, 9)
    exact = exhaustive_fill(variant, scorer)
    assert [(b.filled, b.log_prob) for b in beams] == exact


def test_beam_completeness_property():
    for vocab_size in (2, 3, 5):
        for masks in (1, 2, 3):
            vocab = [f"+v{i}" for i in range(vocab_size)]
            scorer = RandomTableScorer(vocab, seed=vocab_size * 7 + masks)
            variant = MaskedVariant(("s",), tuple([None] * masks), masks)
            k = vocab_size**masks
            beams = fill_masks_beam(variant, scorer, k)
            exact = exhaustive_fill(variant, scorer)
            assert [(b.filled, b.log_prob) for b in beams] == exact


def test_beam_greedy_differs_from_global():
    # greedy path: +a then +ax (0.6 * 0.5 = 0.30)
    # global best: +b then +bz (0.4 * 0.99 = 0.396)
    table = {
        (): [("+a", 0.6), ("+b", 0.4)],
        ("+a",): [("+ax", 0.5), ("+ay", 0.5)],
        ("+b",): [("+bz", 0.99), ("+bw", 0.01)],
    }
    scorer = TableScorer(table)
    variant = MaskedVariant(("s",), (None, None), 2)
    greedy = fill_masks_beam(variant, scorer, 1)
    assert greedy[0].filled == ("+a", "+ax")
    exact = exhaustive_fill(variant, scorer)
    assert exact[0][0] == ("+b", "+bz")
    wide = fill_masks_beam(variant, scorer, 4)
    assert wide[0].filled == ("+b", "+bz")


def test_beam_monotone_in_k():
    vocab = [f"+v{i}" for i in range(4)]
    scorer = RandomTableScorer(vocab, seed=3)
    variant = MaskedVariant(("s",), (None, None, None), 3)
    previous_best = None
    for k in range(1, 10):
        best = fill_masks_beam(variant, scorer, k)[0].log_prob
        if previous_best is not None:
            assert best >= previous_best
        previous_best = best


def test_beam_requires_mask():
    with pytest.raises(ValueError):
        fill_masks_beam(MaskedVariant(("s",), ("a",), 0), TableScorer({}), 1)


def test_beam_rejects_unsorted_scorer():
    class Unsorted:
        def score(self, source_tokens, target_tokens, mask_index, top_n):
            return [("a", 0.1), ("b", 0.9)]

    with pytest.raises(ProviderError):
        fill_masks_beam(MaskedVariant(("s",), (None,), 1), Unsorted(), 2)


def test_beam_rejects_bad_probability():
    class OutOfRange:
        def score(self, source_tokens, target_tokens, mask_index, top_n):
            return [("a", 1.5)]

    with pytest.raises(ProviderError):
        fill_masks_beam(MaskedVariant(("s",), (None,), 1), OutOfRange(), 1)


def test_suggest_oracle_reconstructs_reference(segmenter):
    source = subword_segment("the cat sits".split(), segmenter)
    target = subword_segment("die katz sitzt".split(), segmenter)
    span = Span(1, 2)
    desired = tuple(to_model_tokens(subword_segment(["katze"], segmenter)))
    scorer = EchoScorer(tokens=desired, span_token_start=model_token_span(target, 1, 2)[0])
    out = suggest(source, target, span, SuggestConfig(max_masks=3, beam_size=5), scorer)
    assert out[0].text == "katze"
    assert out[0].joint_log_prob == 0.0


def test_suggest_dedup_keeps_higher_probability(segmenter):
    # two variants produce the same text with probs 0.2 and 0.3
    class TwoRoutes:
        def score(self, source_tokens, target_tokens, mask_index, top_n):
            masks = sum(1 for t in target_tokens if t is None)
            filled_any = any(
                t == WORD_START + "du" for t in target_tokens if t is not None
            )
            if masks == 1 and not filled_any:  # single-mask variant
                return [(WORD_START + "dup", 0.2), (WORD_START + "zz", 0.1)]
            if not filled_any:  # first mask of the two-mask variant
                return [(WORD_START + "du", 0.3), (WORD_START + "qq", 0.1)]
            return [("p", 1.0), ("q", 0.5)]

    source = subword_segment(["s"], segmenter)
    target = subword_segment("a b".split(), segmenter)
    out = suggest(source, target, Span(0, 1), SuggestConfig(max_masks=2, beam_size=2), TwoRoutes())
    dup = [c for c in out if c.text == "dup"]
    assert len(dup) == 1
    assert dup[0].joint_log_prob == pytest.approx(math.log(0.3) + math.log(1.0))


def test_suggest_matches_bruteforce_union(segmenter):
    vocab = ["+u", "+v"]
    scorer = RandomTableScorer(vocab, seed=9)
    source = subword_segment(["s"], segmenter)
    target = subword_segment("a b c".split(), segmenter)
    span = Span(1, 2)
    config = SuggestConfig(max_masks=2, beam_size=5)
    got = suggest(source, target, span, config, scorer)
    # oracle: enumerate both variants exhaustively, merge, rank
    from postedit.docmodel import detokenize

    merged = {}
    for variant in make_masked_variants(source, target, span, 2):
        for chosen, log_prob in exhaustive_fill(variant, scorer):
            text = detokenize(chosen)
            if text and (text not in merged or log_prob > merged[text]):
                merged[text] = log_prob
    merged.pop("b", None)  # original span text is filtered
    expected = sorted(merged.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
    assert [(c.text, c.joint_log_prob) for c in got] == expected


def test_suggest_output_sorted_unique_bounded(segmenter):
    scorer = RandomTableScorer([f"+w{i}" for i in range(4)], seed=21)
    source = subword_segment("s t".split(), segmenter)
    target = subword_segment("a b c d".split(), segmenter)
    out = suggest(source, target, Span(1, 3), SuggestConfig(max_masks=3, beam_size=4), scorer)
    assert len(out) <= 4
    texts = [c.text for c in out]
    assert len(set(texts)) == len(texts)
    probs = [c.joint_log_prob for c in out]
    assert probs == sorted(probs, reverse=True)


def test_suggest_excludes_original_for_replacement(segmenter):
    source = subword_segment(["s"], segmenter)
    target = subword_segment("a b".split(), segmenter)
    desired = tuple(to_model_tokens(subword_segment(["b"], segmenter)))
    scorer = EchoScorer(tokens=desired, span_token_start=model_token_span(target, 1, 2)[0])
    out = suggest(source, target, Span(1, 2), SuggestConfig(max_masks=2, beam_size=5), scorer)
    assert all(c.text != "b" for c in out)


def test_suggest_keeps_candidates_for_gap(segmenter):
    source = subword_segment(["s"], segmenter)
    target = subword_segment("a b".split(), segmenter)
    desired = tuple(to_model_tokens(subword_segment(["neu"], segmenter)))
    scorer = EchoScorer(tokens=desired, span_token_start=model_token_span(target, 1, 1)[0])
    out = suggest(source, target, Span(1, 1), SuggestConfig(max_masks=2, beam_size=5), scorer)
    assert out[0].text == "neu"


def test_suggest_length_normalization_option(segmenter):
    class LongRoute:
        def score(self, source_tokens, target_tokens, mask_index, top_n):
            on_pair_route = any(t == WORD_START + "two" for t in target_tokens if t)
            masks = sum(1 for t in target_tokens if t is None)
            if not on_pair_route and masks == 1:  # the single-mask variant
                return [(WORD_START + "one", 0.4), (WORD_START + "no", 0.05)]
            return [(WORD_START + "two", 0.6), (WORD_START + "far", 0.05)]

    source = subword_segment(["s"], segmenter)
    target = subword_segment("a b".split(), segmenter)
    raw = suggest(source, target, Span(0, 1), SuggestConfig(max_masks=2, beam_size=3), LongRoute())
    assert raw[0].text == "one"  # 0.4 beats 0.36 on raw joint probability
    normalized = suggest(
        source,
        target,
        Span(0, 1),
        SuggestConfig(max_masks=2, beam_size=3, normalize_by_length=True),
        LongRoute(),
    )
    assert normalized[0].text == "two two"  # mean log-prob favors the pair


def test_tlm_mask_percent_validated():
    with pytest.raises(ValueError):
        TlmMaskConfig(mask_percent=10)


def test_tlm_quarter_of_four_single_token_words(segmenter):
    pairs = [("s1 s2".split(), "ab cd ef gh".split())]
    examples = generate_tlm_examples(pairs, segmenter, TlmMaskConfig(mask_percent=25, seed=1))
    masked = examples[0].masked_target_tokens.count(MASK)
    assert masked == 1
    assert len(examples[0].masked_word_indices) == 1


def test_tlm_masks_whole_words_only(segmenter):
    rng = random.Random(17)
    pairs = []
    for _ in range(1000):
        src = ["".join(rng.choices("abc", k=rng.randrange(1, 7))) for _ in range(rng.randrange(1, 5))]
        tgt = ["".join(rng.choices("xyz", k=rng.randrange(1, 9))) for _ in range(rng.randrange(1, 6))]
        pairs.append((src, tgt))
    examples = generate_tlm_examples(pairs, segmenter, TlmMaskConfig(mask_percent=20, seed=2))
    for example, (src, tgt) in zip(examples, pairs):
        assert example.source_tokens == tuple(
            to_model_tokens(subword_segment(src, segmenter))
        )  # source untouched
        target_map = subword_segment(tgt, segmenter)
        for w in range(len(tgt)):
            lo, hi = model_token_span(target_map, w, w + 1)
            piece_states = {t == MASK for t in example.masked_target_tokens[lo:hi]}
            assert len(piece_states) == 1  # fully masked or fully intact
        assert example.masked_word_indices  # at least one word masked


def test_tlm_coverage_bounds(segmenter):
    # 20 target sub-word tokens at p=15 -> at least 3 masked, overshoot at
    # most one word (max word length 9 chars -> 3 pieces)
    target = ["abcdefghi"] * 4 + ["abc"] * 8  # 4*3 + 8*1 = 20 pieces
    pairs = [(["s"], target)]
    for seed in range(20):
        examples = generate_tlm_examples(pairs, segmenter, TlmMaskConfig(mask_percent=15, seed=seed))
        masked = examples[0].masked_target_tokens.count(MASK)
        assert 3 <= masked <= 3 + 3 - 1


def test_tlm_deterministic_under_seed(segmenter):
    pairs = [("a b".split(), "uv wx yz".split())] * 5
    one = generate_tlm_examples(pairs, segmenter, TlmMaskConfig(mask_percent=25, seed=9))
    two = generate_tlm_examples(pairs, segmenter, TlmMaskConfig(mask_percent=25, seed=9))
    assert one == two


def test_ngram_scorer_contract(segmenter):
    scorer = NgramMaskScorer(demo_parallel_corpus(), segmenter=segmenter)
    source = to_model_tokens(subword_segment("the cat".split(), segmenter))
    target = [WORD_START + "die", None]
    first = scorer.score(source, target, 1, 10)
    second = scorer.score(source, target, 1, 10)
    assert first == second  # deterministic
    probs = [p for _, p in first]
    assert probs == sorted(probs, reverse=True)
    assert all(0.0 < p <= 1.0 for p in probs)
    assert len(first) == 10
