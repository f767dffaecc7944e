import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from postedit.docmodel import CharacterSegmenter


@pytest.fixture
def segmenter():
    return CharacterSegmenter()


@pytest.fixture
def style_table():
    return {1: "bold", 2: "footnote", 3: "italic"}
