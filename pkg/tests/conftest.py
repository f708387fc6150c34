"""Shared fixtures: the golden co-occurrence table and the reference cut tree.

All golden numbers asserted in the suite were hand-computed from these
fixtures (the arithmetic is repeated next to each assertion).
"""

import pytest

from mdlthesaurus.corpus import build_cooc
from mdlthesaurus.cluster import parse_tree
from mdlthesaurus.patterns import SlotSample

# 4 nouns x 3 verbs, 20 observations. The drinkable nouns co-occur with
# "drink", the edible ones with "eat", and "make" spreads over both, so the
# two-cluster noun partition is the clear structure.
GOLDEN_ENTRIES = [
    ("eat", "rice", 4),
    ("eat", "bread", 4),
    ("drink", "beer", 5),
    ("drink", "wine", 3),
    ("make", "bread", 2),
    ("make", "beer", 1),
    ("make", "wine", 1),
]

GOLDEN_TSV = "".join(f"{v}\t{n}\t{c}\n" for v, n, c in GOLDEN_ENTRIES)

# 32-noun thesaurus with three sibling classes under the root: a singleton
# leaf, a 26-noun class (#80), and a 5-noun class (#122).
BIG_CLASS = ("ground wake success network game rest art organization plane output "
             "television benefit letter holder support nation corporation review "
             "thousand manufacturer margin man meeting customer agent help")
SMALL_CLASS = "reorganization attitude relief competition constitution"
QUESTION_TREE_TEXT = f"(#0 (strength) (#80 ({BIG_CLASS})) (#122 ({SMALL_CLASS})))\n"


@pytest.fixture
def golden_data():
    return build_cooc(GOLDEN_ENTRIES)


@pytest.fixture
def golden_path(tmp_path):
    path = tmp_path / "golden.tsv"
    path.write_text(GOLDEN_TSV, encoding="utf-8")
    return path


@pytest.fixture
def question_tree():
    return parse_tree(QUESTION_TREE_TEXT)


@pytest.fixture
def question_samples():
    return [
        SlotSample("question", "about", "attitude", 1),
        SlotSample("question", "about", "corporation", 1),
        SlotSample("question", "about", "strength", 2),
    ]
