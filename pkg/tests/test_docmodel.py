import random

import pytest

from postedit.docmodel import (
    FormattingTag,
    TaggedSegment,
    TagKind,
    detokenize,
    document_from_interchange,
    document_to_interchange,
    model_token_span,
    parse_tagged_text,
    serialize_tagged_text,
    strip_tags,
    subword_segment,
    to_model_tokens,
)
from postedit.errors import MarkupError, ProviderError, UnknownStyleError

from oracles import random_segment, STYLE_TABLE


def test_parse_paired(style_table):
    seg = parse_tagged_text("Hello <s 1>world</s 1>", style_table)
    assert seg.items == (
        "Hello",
        FormattingTag(TagKind.OPEN, 1),
        "world",
        FormattingTag(TagKind.CLOSE, 1),
    )


def test_parse_unpaired(style_table):
    seg = parse_tagged_text("A <x 2/> B", style_table)
    assert seg.items == ("A", FormattingTag(TagKind.UNPAIRED, 2), "B")


def test_parse_crossing_pairs_rejected(style_table):
    with pytest.raises(MarkupError):
        parse_tagged_text("<s 1>a <s 2>b</s 1> c</s 2>", style_table)


@pytest.mark.parametrize(
    "markup",
    [
        "<s 1>a",  # unclosed
        "a</s 1>",  # close without open
        "</s 1>a<s 1>",  # wrong order
        "wor<x 1/>ld",  # tag inside a word
        "<s 1>wor</s 1>ld",  # close tag splitting a word
    ],
)
def test_parse_malformed(markup):
    with pytest.raises(MarkupError):
        parse_tagged_text(markup, STYLE_TABLE)


def test_parse_unknown_style(style_table):
    with pytest.raises(UnknownStyleError):
        parse_tagged_text("a <x 9/>", style_table)


def test_parse_tag_only_segment_rejected(style_table):
    with pytest.raises(MarkupError):
        parse_tagged_text("<s 1></s 1>", style_table)


def test_serialize_word_only():
    assert serialize_tagged_text(TaggedSegment(("Hi",))) == "Hi"


def test_serialize_glues_pair_to_word():
    seg = TaggedSegment(
        (FormattingTag(TagKind.OPEN, 1), "x", FormattingTag(TagKind.CLOSE, 1))
    )
    assert serialize_tagged_text(seg) == "<s 1>x</s 1>"


def test_roundtrip_random_segments():
    rng = random.Random(99)
    for _ in range(100):
        seg = random_segment(rng)
        markup = serialize_tagged_text(seg)
        assert parse_tagged_text(markup, STYLE_TABLE).items == seg.items


def test_strip_tags():
    seg = TaggedSegment(
        (FormattingTag(TagKind.OPEN, 1), "a", FormattingTag(TagKind.CLOSE, 1), "b")
    )
    assert strip_tags(seg) == ["a", "b"]
    assert strip_tags(TaggedSegment(("a",))) == ["a"]
    only_tags = TaggedSegment((FormattingTag(TagKind.UNPAIRED, 1),))
    assert strip_tags(only_tags) == []


def test_word_count_unchanged_by_tags():
    rng = random.Random(5)
    for _ in range(50):
        seg = random_segment(rng)
        assert len(strip_tags(seg)) == sum(1 for i in seg.items if isinstance(i, str))


def test_subword_single_piece(segmenter):
    assert subword_segment(["cat"], segmenter).pieces == (("cat",),)


def test_subword_grouping(segmenter):
    subwords = subword_segment(["catfish"], segmenter)
    assert subwords.pieces == (("cat", "fis", "h"),)
    assert "".join(subwords.pieces[0]) == "catfish"


def test_subword_empty_words_rejected(segmenter):
    with pytest.raises(ValueError):
        subword_segment([], segmenter)


def test_subword_validates_provider_output():
    class BrokenSegmenter:
        def segment(self, words):
            return [["xx"] for _ in words]  # does not concatenate back

    with pytest.raises(ProviderError):
        subword_segment(["cat"], BrokenSegmenter())


def test_subword_concatenation_property(segmenter):
    rng = random.Random(3)
    for _ in range(200):
        words = ["".join(rng.choices("abcdefg", k=rng.randrange(1, 12))) for _ in range(rng.randrange(1, 6))]
        subwords = subword_segment(words, segmenter)
        for word, pieces in zip(subwords.words, subwords.pieces):
            assert "".join(pieces) == word
        flat = subwords.flat()
        for w in range(len(words)):
            lo, hi = subwords.piece_span(w)
            assert flat[lo:hi] == list(subwords.pieces[w])
            for p in range(lo, hi):
                assert subwords.word_of_piece(p) == w


def test_model_tokens_roundtrip(segmenter):
    subwords = subword_segment(["the", "catfish", "sits"], segmenter)
    tokens = to_model_tokens(subwords)
    assert detokenize(tokens) == "the catfish sits"
    lo, hi = model_token_span(subwords, 1, 2)
    assert detokenize(tokens[lo:hi]) == "catfish"


def test_interchange_roundtrip(style_table):
    data = {
        "styleTable": {"1": "bold", "2": "footnote"},
        "segments": ["Hello <s 1>world</s 1>", "A <x 2/> B"],
        "meta": {"sourceLang": "en", "targetLang": "de", "title": "demo"},
    }
    doc = document_from_interchange(data)
    assert document_to_interchange(doc) == data
    assert doc.segments[0].index == 0
    assert doc.segments[1].index == 1


def test_interchange_empty_segments():
    with pytest.raises(ValueError):
        document_from_interchange({"styleTable": {}, "segments": [], "meta": {}})


def test_interchange_unknown_style():
    with pytest.raises(UnknownStyleError):
        document_from_interchange(
            {"styleTable": {"1": "bold"}, "segments": ["a <x 5/>"], "meta": {}}
        )


def test_interchange_not_an_object():
    with pytest.raises(ValueError):
        document_from_interchange([1, 2])


def test_segment_nesting_validated_on_construction():
    with pytest.raises(MarkupError):
        TaggedSegment((FormattingTag(TagKind.CLOSE, 1), "a"))
