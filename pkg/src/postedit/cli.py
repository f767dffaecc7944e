"""Command-line entry point for the evaluation harness."""

from __future__ import annotations

import argparse
import json
import sys

from .docmodel import CharacterSegmenter
from .evalharness import (
    HarnessConfig,
    OracleScorer,
    SELECTION_MODES,
    TOPK_CHOICES,
    format_table,
    load_triplets,
    report_json,
    run,
)
from .providers import lexicon_from_pairs
from .qe import LexiconQEProvider
from .suggest import NgramMaskScorer, SuggestConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evalharness",
        description=(
            "Correct MT sentences with QE-selected span suggestions and "
            "report TER/BLEU deltas against the MT baseline."
        ),
    )
    parser.add_argument("--data", required=True, help="triplets TSV: source\\tmt\\tpost_edit")
    parser.add_argument("--selection", choices=SELECTION_MODES, default="oracle")
    parser.add_argument("--topk", type=int, choices=TOPK_CHOICES, default=5)
    parser.add_argument("--m", type=int, default=5, help="maximum mask count")
    parser.add_argument("--beam", type=int, default=5, help="beam size")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("table", "json"), default="table")
    parser.add_argument("--gaps", choices=("on", "off"), default="on",
                        help="also correct BAD gaps (missing words)")
    parser.add_argument("--scorer", choices=("ngram", "oracle"), default="ngram",
                        help="ngram: scorer estimated from the dataset; "
                        "oracle: reference tokens ranked first")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    triplets = load_triplets(args.data)
    config = HarnessConfig(
        selection=args.selection,
        top_k=args.topk,
        suggest=SuggestConfig(max_masks=args.m, beam_size=args.beam),
        seed=args.seed,
        include_gaps=args.gaps == "on",
    )
    segmenter = CharacterSegmenter()
    pairs = [(t.source, t.post_edit) for t in triplets]
    scorer = (
        OracleScorer()
        if args.scorer == "oracle"
        else NgramMaskScorer(pairs, segmenter=segmenter)
    )
    qe_provider = None
    if args.selection == "predicted":
        qe_provider = LexiconQEProvider(lexicon=lexicon_from_pairs(pairs))
    report = run(triplets, config, scorer, qe_provider, segmenter)
    if args.format == "json":
        print(json.dumps(report_json(report), indent=2))
    else:
        print(format_table(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
