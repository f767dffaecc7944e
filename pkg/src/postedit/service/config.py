"""Service configuration and the provider registry.

A single JSON config file selects each provider slot (built-in stub or HTTP
endpoint); environment variables override file values. Every slot always
resolves to exactly one implementation, falling back to the built-in stubs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..align import Aligner
from ..docmodel import CharacterSegmenter, Segmenter
from ..providers import (
    DEMO_DICTIONARY,
    DiagonalAligner,
    DictionaryMT,
    HttpAligner,
    HttpMaskScorer,
    HttpMT,
    HttpQEProvider,
    HttpSegmenter,
    MTProvider,
    demo_mask_scorer,
    demo_qe_provider,
)
from ..qe import QEProvider
from ..suggest import MaskScorer, SuggestConfig

PROVIDER_SLOTS = ("mt", "qe", "scorer", "aligner", "segmenter")
ENV_PREFIX = "POSTEDIT"


@dataclass
class ServiceConfig:
    data_dir: Path = Path("postedit-data")
    seed: int = 0
    suggest: SuggestConfig = field(default_factory=SuggestConfig)
    provider_urls: dict[str, str] = field(default_factory=dict)  # slot -> URL

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ServiceConfig":
        """Read the JSON config file (if any) and apply environment overrides
        (``POSTEDIT_DATA_DIR``, ``POSTEDIT_SEED``, ``POSTEDIT_SUGGEST_M``,
        ``POSTEDIT_SUGGEST_K``, ``POSTEDIT_<SLOT>_URL``)."""
        raw: dict = {}
        env_path = os.environ.get(f"{ENV_PREFIX}_CONFIG")
        config_path = path or env_path
        if config_path:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        providers = {
            slot: str(url)
            for slot, url in dict(raw.get("providers", {})).items()
            if slot in PROVIDER_SLOTS and url
        }
        for slot in PROVIDER_SLOTS:
            env_url = os.environ.get(f"{ENV_PREFIX}_{slot.upper()}_URL")
            if env_url:
                providers[slot] = env_url
        data_dir = os.environ.get(
            f"{ENV_PREFIX}_DATA_DIR", raw.get("dataDir", "postedit-data")
        )
        seed = int(os.environ.get(f"{ENV_PREFIX}_SEED", raw.get("seed", 0)))
        suggest_raw = dict(raw.get("suggest", {}))
        max_masks = int(
            os.environ.get(f"{ENV_PREFIX}_SUGGEST_M", suggest_raw.get("m", 5))
        )
        beam_size = int(
            os.environ.get(f"{ENV_PREFIX}_SUGGEST_K", suggest_raw.get("k", 5))
        )
        return cls(
            data_dir=Path(data_dir),
            seed=seed,
            suggest=SuggestConfig(max_masks=max_masks, beam_size=beam_size),
            provider_urls=providers,
        )


@dataclass
class ProviderRegistry:
    """Resolved provider implementations, one per slot."""

    mt: MTProvider
    qe: QEProvider
    scorer: MaskScorer
    aligner: Aligner
    segmenter: Segmenter


def build_registry(config: ServiceConfig) -> ProviderRegistry:
    urls = config.provider_urls
    segmenter: Segmenter = (
        HttpSegmenter(urls["segmenter"]) if "segmenter" in urls else CharacterSegmenter()
    )
    return ProviderRegistry(
        mt=HttpMT(urls["mt"]) if "mt" in urls else DictionaryMT(DEMO_DICTIONARY),
        qe=HttpQEProvider(urls["qe"]) if "qe" in urls else demo_qe_provider(),
        scorer=(
            HttpMaskScorer(urls["scorer"])
            if "scorer" in urls
            else demo_mask_scorer(segmenter)
        ),
        aligner=HttpAligner(urls["aligner"]) if "aligner" in urls else DiagonalAligner(),
        segmenter=segmenter,
    )
