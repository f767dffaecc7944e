import random
from collections import Counter

import pytest

from postedit.align import (
    AlignmentMatrix,
    HeatmapResult,
    SubwordAlignment,
    best_source_for,
    heatmap,
    insert_unpaired_tags,
    subword_alignment_from_json,
    to_word_alignment,
    transfer_paired_tags,
    transfer_tags,
)
from postedit.docmodel import (
    TagKind,
    parse_tagged_text,
    serialize_tagged_text,
    subword_segment,
)
from postedit.suggest import Span

from oracles import (
    STYLE_TABLE,
    heatmap_bruteforce,
    identity_matrix,
    random_matrix,
    random_segment,
    word_alignment_bruteforce,
)


def matrix(rows):
    return AlignmentMatrix(scores=tuple(tuple(row) for row in rows))


def test_word_alignment_identity(segmenter):
    src = subword_segment(["a", "b", "c"], segmenter)
    tgt = subword_segment(["x", "y", "z"], segmenter)
    sub = SubwordAlignment(
        target_len=3, source_len=3, links=((0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0))
    )
    assert to_word_alignment(sub, src, tgt).scores == (
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
    )


def test_word_alignment_any_subword_rule(segmenter):
    # target word of two pieces, only the second aligned to source word 3
    src = subword_segment(["s0", "s1", "s2", "s3"], segmenter)
    tgt = subword_segment(["abcdef"], segmenter)  # two pieces
    sub = SubwordAlignment(target_len=2, source_len=4, links=((1, 3, 0.7),))
    result = to_word_alignment(sub, src, tgt)
    assert result.scores[0][3] == 0.7
    assert result.links() == {(0, 3)}


def test_word_alignment_dimension_mismatch(segmenter):
    src = subword_segment(["a"], segmenter)
    tgt = subword_segment(["b"], segmenter)
    sub = SubwordAlignment(target_len=2, source_len=1, links=())
    with pytest.raises(ValueError):
        to_word_alignment(sub, src, tgt)


def test_word_alignment_random_vs_bruteforce(segmenter):
    rng = random.Random(8)
    for _ in range(50):
        src_words = ["".join(rng.choices("abc", k=rng.randrange(1, 8))) for _ in range(8)]
        tgt_words = ["".join(rng.choices("xyz", k=rng.randrange(1, 8))) for _ in range(8)]
        src = subword_segment(src_words, segmenter)
        tgt = subword_segment(tgt_words, segmenter)
        n_src, n_tgt = len(src.flat()), len(tgt.flat())
        links = tuple(
            (rng.randrange(n_tgt), rng.randrange(n_src), round(rng.random(), 3))
            for _ in range(rng.randrange(0, 20))
        )
        sub = SubwordAlignment(target_len=n_tgt, source_len=n_src, links=links)
        got = to_word_alignment(sub, src, tgt)
        assert [list(r) for r in got.scores] == word_alignment_bruteforce(links, src, tgt)


def test_word_alignment_monotone_under_new_links(segmenter):
    src = subword_segment(["aa", "bb"], segmenter)
    tgt = subword_segment(["xx", "yy"], segmenter)
    base_links = ((0, 0, 0.5),)
    more_links = base_links + ((1, 1, 0.4),)
    base = to_word_alignment(SubwordAlignment(2, 2, base_links), src, tgt)
    more = to_word_alignment(SubwordAlignment(2, 2, more_links), src, tgt)
    assert base.links() <= more.links()


def test_alignment_json_ingestion():
    sub = subword_alignment_from_json(
        {"links": [{"t": 0, "s": 1, "score": 0.5}]}, target_len=1, source_len=2
    )
    assert sub.links == ((0, 1, 0.5),)
    with pytest.raises(ValueError):
        subword_alignment_from_json({"nope": []}, 1, 1)


def test_best_source_argmax():
    m = matrix([[0.1, 0.8, 0.3]])
    assert best_source_for(0, m) == 1


def test_best_source_all_zero():
    assert best_source_for(0, matrix([[0.0, 0.0]])) is None


def test_best_source_tie_breaks_low():
    assert best_source_for(0, matrix([[0.5, 0.5]])) == 0


def test_heatmap_single_word():
    m = matrix([[0.0, 1.0, 0.0]])
    assert heatmap(Span(0, 1), m) == HeatmapResult(weights=(0.0, 1.0, 0.0), low_confidence=False)


def test_heatmap_two_words_split():
    m = matrix([[0.5, 0.0], [0.0, 0.5]])
    assert heatmap(Span(0, 2), m).weights == (0.5, 0.5)


def test_heatmap_random_vs_oracle():
    rng = random.Random(12)
    for _ in range(50):
        rows = [[rng.random() for _ in range(4)] for _ in range(5)]
        m = matrix(rows)
        start = rng.randrange(0, 4)
        end = rng.randrange(start + 1, 6)
        got = heatmap(Span(start, end), m)
        expected = heatmap_bruteforce(start, end, rows)
        assert got.weights == pytest.approx(expected)
        assert sum(got.weights) == pytest.approx(1.0, abs=1e-9)


def test_heatmap_rejects_gap_span():
    with pytest.raises(ValueError):
        heatmap(Span(1, 1), matrix([[1.0], [1.0]]))


def test_heatmap_all_zero_low_confidence():
    got = heatmap(Span(0, 1), matrix([[0.0, 0.0]]))
    assert got.low_confidence
    assert got.weights == (0.5, 0.5)


def test_paired_transfer_identity():
    seg = parse_tagged_text("a <s 1>b</s 1> c", STYLE_TABLE)
    out = transfer_paired_tags(seg, ["A", "B", "C"], identity_matrix(3))
    assert serialize_tagged_text(out) == "A <s 1>B</s 1> C"


def test_paired_transfer_coalesces_runs():
    seg = parse_tagged_text("<s 1>a b</s 1>", STYLE_TABLE)
    # both target words map into the style: one tag pair spans both
    m = matrix([[1.0, 0.0], [0.0, 1.0]])
    out = transfer_paired_tags(seg, ["A", "B"], m)
    assert serialize_tagged_text(out) == "<s 1>A B</s 1>"


def test_paired_transfer_follows_alignment_not_position():
    # source word 2 is bold; it aligns to target word 0
    seg = parse_tagged_text("a b <s 1>c</s 1>", STYLE_TABLE)
    m = matrix([[0.0, 0.0, 0.9], [0.8, 0.0, 0.0], [0.0, 0.7, 0.0]])
    out = transfer_paired_tags(seg, ["C", "A", "B"], m)
    # per-word inheritance oracle: word 0 -> styles of source 2, others none
    assert serialize_tagged_text(out) == "<s 1>C</s 1> A B"


def test_paired_transfer_unaligned_words_get_no_style():
    seg = parse_tagged_text("<s 1>a</s 1>", STYLE_TABLE)
    out = transfer_paired_tags(seg, ["A", "B"], matrix([[0.0], [1.0]]))
    assert serialize_tagged_text(out) == "A <s 1>B</s 1>"


def test_unpaired_transfer_identity_position():
    seg = parse_tagged_text("a b c <x 2/>", STYLE_TABLE)
    out = insert_unpaired_tags(seg, ["A", "B", "C"], identity_matrix(3))
    assert serialize_tagged_text(out) == "A B C <x 2/>"


def test_unpaired_transfer_segment_start():
    seg = parse_tagged_text("<x 2/> a b", STYLE_TABLE)
    out = insert_unpaired_tags(seg, ["A", "B"], identity_matrix(2))
    assert serialize_tagged_text(out) == "<x 2/> A B"


def test_unpaired_transfer_follows_argmax():
    # the word before the tag (source word 1) aligns best to target word 2
    seg = parse_tagged_text("a b <x 2/> c", STYLE_TABLE)
    m = matrix([[0.9, 0.1, 0.0], [0.0, 0.2, 0.8], [0.1, 0.7, 0.0]])
    out = insert_unpaired_tags(seg, ["A", "B", "C"], m)
    assert serialize_tagged_text(out) == "A B C <x 2/>"


def test_unpaired_transfer_unaligned_falls_back_left():
    seg = parse_tagged_text("a b <x 2/>", STYLE_TABLE)
    m = matrix([[0.9, 0.0], [0.0, 0.0]])  # source word 1 aligned to nothing
    out = insert_unpaired_tags(seg, ["A", "B"], m)
    assert serialize_tagged_text(out) == "A <x 2/> B"


def test_transfer_identity_law_randomized():
    rng = random.Random(2024)
    for _ in range(300):
        seg = random_segment(rng)
        out = transfer_tags(seg, seg.words(), identity_matrix(len(seg.words())))
        assert out.items == seg.items


def test_transfer_conservation_randomized():
    rng = random.Random(31)
    for _ in range(300):
        seg = random_segment(rng)
        n_src = len(seg.words())
        n_tgt = rng.randrange(1, 9)
        target_words = [f"t{i}" for i in range(n_tgt)]
        out = transfer_tags(seg, target_words, random_matrix(rng, n_tgt, n_src))
        src_unpaired = Counter(
            t.style for t in seg.tags() if t.kind is TagKind.UNPAIRED
        )
        out_unpaired = Counter(
            t.style for t in out.tags() if t.kind is TagKind.UNPAIRED
        )
        assert src_unpaired == out_unpaired  # unpaired multiset conserved
        out_paired = {t.style for t in out.tags() if t.kind is not TagKind.UNPAIRED}
        src_paired = {t.style for t in seg.tags() if t.kind is not TagKind.UNPAIRED}
        assert out_paired <= src_paired
        assert out.words() == target_words
