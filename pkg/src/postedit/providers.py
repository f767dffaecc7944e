"""Provider implementations: built-in stubs and HTTP clients.

Every neural dependency (MT, QE, mask scoring, alignment, segmentation) is
consumed through a provider contract. The stubs here are deterministic
stand-ins so the whole pipeline runs with no models: a dictionary MT, the
lexicon QE heuristic, the n-gram mask scorer, a diagonal aligner and the
character segmenter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import httpx

from .docmodel import CharacterSegmenter, Segmenter
from .errors import ProviderError
from .qe import LexiconQEProvider, QEProvider
from .suggest import MaskScorer, NgramMaskScorer

DEFAULT_TIMEOUT = 10.0


class MTProvider(Protocol):
    def translate(self, source_words: Sequence[str]) -> list[str]:
        ...


@dataclass(frozen=True)
class DictionaryMT:
    """Word-by-word fixture-dictionary translation; unknown words pass through."""

    dictionary: Mapping[str, str]

    def translate(self, source_words: Sequence[str]) -> list[str]:
        return [self.dictionary.get(w, w) for w in source_words]


@dataclass(frozen=True)
class DiagonalAligner:
    """Sub-word aligner stub: links each target piece to the proportionally
    positioned source piece with full confidence."""

    score: float = 1.0

    def align(
        self, source_tokens: Sequence[str], target_tokens: Sequence[str]
    ) -> list[tuple[int, int, float]]:
        n_src, n_tgt = len(source_tokens), len(target_tokens)
        if n_src == 0 or n_tgt == 0:
            return []
        links = []
        for t in range(n_tgt):
            s = round(t * (n_src - 1) / (n_tgt - 1)) if n_tgt > 1 else 0
            links.append((t, s, self.score))
        return links


def _post(client: httpx.Client, url: str, payload: dict, provider: str) -> dict:
    try:
        response = client.post(url, json=payload, timeout=DEFAULT_TIMEOUT)
        response.raise_for_status()
        return response.json()
    except httpx.HTTPError as exc:
        raise ProviderError(f"{provider} request failed: {exc}", provider=provider) from exc
    except ValueError as exc:
        raise ProviderError(f"{provider} returned invalid JSON: {exc}", provider=provider) from exc


class HttpQEProvider:
    """Client for the QE wire protocol: POST /qe {source, mt} ->
    {hter, words: [{pBad}], gaps: [{pBad}]}."""

    def __init__(self, url: str, client: httpx.Client | None = None):
        self.url = url
        self._client = client or httpx.Client()

    def predict(
        self, source: Sequence[str], mt: Sequence[str]
    ) -> tuple[float, Sequence[float], Sequence[float]]:
        data = _post(
            self._client,
            self.url,
            {"source": " ".join(source), "mt": " ".join(mt)},
            provider="qe",
        )
        try:
            return (
                float(data["hter"]),
                [float(w["pBad"]) for w in data["words"]],
                [float(g["pBad"]) for g in data["gaps"]],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"qe response malformed: {exc}", provider="qe") from exc


class HttpMaskScorer:
    """Client for the mask-scorer wire protocol: POST /score
    {sourceTokens, targetTokens (null = mask), maskIndex, topN} -> {candidates}."""

    def __init__(self, url: str, client: httpx.Client | None = None):
        self.url = url
        self._client = client or httpx.Client()

    def score(
        self,
        source_tokens: Sequence[str],
        target_tokens: Sequence[str | None],
        mask_index: int,
        top_n: int,
    ) -> list[tuple[str, float]]:
        data = _post(
            self._client,
            self.url,
            {
                "sourceTokens": list(source_tokens),
                "targetTokens": list(target_tokens),
                "maskIndex": mask_index,
                "topN": top_n,
            },
            provider="scorer",
        )
        try:
            return [(str(c["token"]), float(c["prob"])) for c in data["candidates"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(
                f"scorer response malformed: {exc}", provider="scorer"
            ) from exc


class HttpAligner:
    """Client for the alignment wire protocol: POST /align
    {sourceTokens, targetTokens} -> {links: [{t, s, score}]}."""

    def __init__(self, url: str, client: httpx.Client | None = None):
        self.url = url
        self._client = client or httpx.Client()

    def align(
        self, source_tokens: Sequence[str], target_tokens: Sequence[str]
    ) -> list[tuple[int, int, float]]:
        data = _post(
            self._client,
            self.url,
            {"sourceTokens": list(source_tokens), "targetTokens": list(target_tokens)},
            provider="aligner",
        )
        try:
            return [
                (int(link["t"]), int(link["s"]), float(link["score"]))
                for link in data["links"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(
                f"aligner response malformed: {exc}", provider="aligner"
            ) from exc


class HttpMT:
    """Client for the MT endpoint: POST {source} -> {translation}."""

    def __init__(self, url: str, client: httpx.Client | None = None):
        self.url = url
        self._client = client or httpx.Client()

    def translate(self, source_words: Sequence[str]) -> list[str]:
        data = _post(
            self._client, self.url, {"source": " ".join(source_words)}, provider="mt"
        )
        try:
            return str(data["translation"]).split()
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"mt response malformed: {exc}", provider="mt") from exc


class HttpSegmenter:
    """Client for the segmenter endpoint: POST {words} -> {pieces}."""

    def __init__(self, url: str, client: httpx.Client | None = None):
        self.url = url
        self._client = client or httpx.Client()

    def segment(self, words: Sequence[str]) -> list[list[str]]:
        data = _post(self._client, self.url, {"words": list(words)}, provider="segmenter")
        try:
            return [[str(p) for p in parts] for parts in data["pieces"]]
        except (KeyError, TypeError) as exc:
            raise ProviderError(
                f"segmenter response malformed: {exc}", provider="segmenter"
            ) from exc


def lexicon_from_pairs(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]]
) -> dict[str, dict[str, float]]:
    """Co-occurrence association lexicon: P(target word | sentence contains
    source word), used by the heuristic QE provider."""
    cooc: dict[str, dict[str, int]] = {}
    source_count: dict[str, int] = {}
    for source_words, target_words in pairs:
        for s in set(source_words):
            source_count[s] = source_count.get(s, 0) + 1
            bucket = cooc.setdefault(s, {})
            for t in set(target_words):
                bucket[t] = bucket.get(t, 0) + 1
    return {
        s: {t: count / source_count[s] for t, count in bucket.items()}
        for s, bucket in cooc.items()
    }


# Small fixture glossary so the service and its stubs run out of the box.
DEMO_DICTIONARY: dict[str, str] = {
    "hello": "hallo",
    "world": "welt",
    "the": "die",
    "cat": "katze",
    "dog": "hund",
    "house": "haus",
    "is": "ist",
    "small": "klein",
    "big": "gross",
    "good": "gut",
    "morning": "morgen",
    "friend": "freund",
    "water": "wasser",
    "book": "buch",
    "reads": "liest",
    "a": "ein",
    "sits": "sitzt",
    "on": "auf",
    "table": "tisch",
    "and": "und",
    "runs": "rennt",
    "fast": "schnell",
    "slow": "langsam",
    "man": "mann",
    "woman": "frau",
    "child": "kind",
    "eats": "isst",
    "bread": "brot",
    "drinks": "trinkt",
    "milk": "milch",
    "sees": "sieht",
    "old": "alt",
    "new": "neu",
    "car": "auto",
    "street": "strasse",
    "sun": "sonne",
    "moon": "mond",
    "day": "tag",
    "night": "nacht",
    "green": "gruen",
    "red": "rot",
}

_DEMO_SOURCES = (
    "the cat sits on the table",
    "the dog runs fast",
    "the woman reads a book",
    "the man drinks milk",
    "the child eats bread",
    "the sun is big",
    "the moon is small",
    "good morning friend",
    "the house is old",
    "the car is new",
    "the water is good",
    "the cat sees the dog",
    "the street is green",
    "the night is slow",
    "hello world",
    "the day is good",
)


def demo_parallel_corpus() -> list[tuple[list[str], list[str]]]:
    mt = DictionaryMT(DEMO_DICTIONARY)
    corpus = []
    for sentence in _DEMO_SOURCES:
        words = sentence.split()
        corpus.append((words, mt.translate(words)))
    return corpus


def demo_lexicon() -> dict[str, dict[str, float]]:
    return {s: {t: 1.0} for s, t in DEMO_DICTIONARY.items()}


def demo_qe_provider() -> QEProvider:
    return LexiconQEProvider(lexicon=demo_lexicon())


def demo_mask_scorer(segmenter: Segmenter | None = None) -> MaskScorer:
    return NgramMaskScorer(
        demo_parallel_corpus(), segmenter=segmenter or CharacterSegmenter()
    )
