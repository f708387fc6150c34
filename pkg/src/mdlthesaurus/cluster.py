"""Simulated-annealing search over binary noun splits and thesaurus trees.

The search space of one split is the set of two-way noun assignments,
including the degenerate assignment with one empty side, which stands for
"do not split" and is costed as a single-cluster model. A thesaurus tree is
grown by splitting recursively until the search declines to split.

Trees serialize to parenthesized text, one tree per file::

    (#0 (rice bread) (beer wine))

Internal nodes carry a ``#``-prefixed label (preorder numbering for grown
trees); a leaf is a parenthesized list of nouns. Trees grown here are strictly
binary; parsed trees may have any number of children per internal node so that
hand-made thesauri can be ingested through the same format.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import CoocData, restrict
from .model import Criterion, criterion_value, fit, param_dl, singleton_partition

__all__ = [
    "AnnealConfig",
    "ThesaurusTree",
    "TreeNode",
    "Trial",
    "anneal_split",
    "build_tree",
    "derive_seed",
    "dump_tree",
    "exhaustive_split",
    "load_tree",
    "parse_tree",
    "serialize_tree",
    "split_criterion_value",
]

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(parent_seed: int, index: int) -> int:
    """Child seed for subtree ``index`` (0 or 1) under ``parent_seed``.

    Position-derived via splitmix64 so sibling subtrees get independent
    streams regardless of the order in which they are grown.
    """
    return _splitmix64(_splitmix64(parent_seed & _MASK64) ^ (index + 1))


@dataclass(frozen=True)
class AnnealConfig:
    """Annealing schedule and objective for one clustering run.

    The temperature starts at ``t_init`` and is multiplied by ``cool`` after
    every window of ``window_mult * len(nouns)`` trials in which the best
    seen value improved; the first stale window stops the search.
    """

    seed: int = 0
    t_init: float = 1.0
    cool: float = 0.9
    window_mult: int = 10
    criterion: Criterion = Criterion.MDL

    def __post_init__(self):
        if self.t_init <= 0:
            raise ValueError("t_init must be positive")
        if not 0 < self.cool < 1:
            raise ValueError("cool must lie strictly between 0 and 1")
        if self.window_mult < 1:
            raise ValueError("window_mult must be at least 1")


# ---------------------------------------------------------------------------
# Thesaurus trees


@dataclass(frozen=True)
class TreeNode:
    """One tree node: a leaf holds nouns, an internal node holds children."""

    label: str = ""
    nouns: tuple[str, ...] = ()
    children: tuple["TreeNode", ...] = ()

    def __post_init__(self):
        if self.children:
            if self.nouns:
                raise ValueError("internal nodes do not hold nouns directly")
            if not self.label.startswith("#") or len(self.label) < 2:
                raise ValueError(f"internal node label must start with '#', got {self.label!r}")
        else:
            if not self.nouns:
                raise ValueError("leaf nodes must hold at least one noun")
            if self.label:
                raise ValueError("leaf nodes are identified by their nouns, not a label")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def node_id(self) -> str:
        return self.label if self.children else ",".join(self.nouns)


class ThesaurusTree:
    """A noun hierarchy whose leaves partition its vocabulary."""

    def __init__(self, root: TreeNode):
        self.root = root
        self._leaves: list[TreeNode] = []
        self._by_id: dict[str, TreeNode] = {}
        self._members: dict[str, frozenset[str]] = {}
        nouns: list[str] = []

        def walk(node: TreeNode) -> frozenset[str]:
            if node.node_id in self._by_id:
                raise ValueError(f"duplicate node id {node.node_id!r}")
            self._by_id[node.node_id] = node
            if node.is_leaf:
                self._leaves.append(node)
                nouns.extend(node.nouns)
                members = frozenset(node.nouns)
            else:
                members = frozenset().union(*(walk(c) for c in node.children))
            self._members[node.node_id] = members
            return members

        walk(root)
        if len(nouns) != len(set(nouns)):
            raise ValueError("tree leaves are not disjoint")
        self._nouns = tuple(nouns)
        self._noun_set = frozenset(nouns)

    @property
    def nouns(self) -> tuple[str, ...]:
        """All nouns, in leaf order."""
        return self._nouns

    @property
    def leaves(self) -> tuple[TreeNode, ...]:
        return tuple(self._leaves)

    @property
    def leaf_count(self) -> int:
        return len(self._leaves)

    def leaf_partition(self) -> tuple[tuple[str, ...], ...]:
        return tuple(leaf.nouns for leaf in self._leaves)

    def __contains__(self, noun: str) -> bool:
        return noun in self._noun_set

    def node(self, node_id: str) -> TreeNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise ValueError(f"no node with id {node_id!r}") from None

    def members(self, node_id: str) -> frozenset[str]:
        """Nouns dominated by the node."""
        self.node(node_id)
        return self._members[node_id]

    def __eq__(self, other) -> bool:
        return isinstance(other, ThesaurusTree) and self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"ThesaurusTree({self.leaf_count} leaves, {len(self._nouns)} nouns)"


def serialize_tree(tree: ThesaurusTree) -> str:
    def render(node: TreeNode) -> str:
        if node.is_leaf:
            return "(" + " ".join(node.nouns) + ")"
        return "(" + node.label + " " + " ".join(render(c) for c in node.children) + ")"

    return render(tree.root) + "\n"


def parse_tree(text: str) -> ThesaurusTree:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    if not tokens:
        raise ValueError("empty tree text")
    pos = 0

    def parse_node() -> TreeNode:
        nonlocal pos
        if tokens[pos] != "(":
            raise ValueError(f"expected '(', got {tokens[pos]!r}")
        pos += 1
        if pos >= len(tokens):
            raise ValueError("unexpected end of tree text")
        if tokens[pos].startswith("#"):
            label = tokens[pos]
            pos += 1
            children = []
            while pos < len(tokens) and tokens[pos] != ")":
                children.append(parse_node())
            if pos >= len(tokens):
                raise ValueError("unbalanced parentheses")
            pos += 1
            if not children:
                raise ValueError(f"internal node {label} has no children")
            return TreeNode(label=label, children=tuple(children))
        nouns = []
        while pos < len(tokens) and tokens[pos] != ")":
            if tokens[pos] == "(":
                raise ValueError("leaf nodes may not contain subtrees")
            if tokens[pos].startswith("#"):
                raise ValueError(f"leaf word {tokens[pos]!r} may not start with '#'")
            nouns.append(tokens[pos])
            pos += 1
        if pos >= len(tokens):
            raise ValueError("unbalanced parentheses")
        pos += 1
        return TreeNode(nouns=tuple(nouns))

    root = parse_node()
    if pos != len(tokens):
        raise ValueError("trailing content after tree")
    return ThesaurusTree(root)


def dump_tree(tree: ThesaurusTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_tree(tree))


def load_tree(path) -> ThesaurusTree:
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh.read())


# ---------------------------------------------------------------------------
# Split evaluation

def split_criterion_value(side_a: Sequence[str], side_b: Sequence[str],
                          data: CoocData, criterion: Criterion) -> float:
    """Objective value of a two-way (or degenerate one-way) noun split."""
    parts = [tuple(side) for side in (side_a, side_b) if len(side)]
    model = fit(parts, singleton_partition(data.verbs), data)
    return criterion_value(model, data, criterion)


def _flogf(counts: np.ndarray) -> float:
    positive = counts[counts > 0]
    if positive.size == 0:
        return 0.0
    return float((positive * np.log2(positive)).sum())


class _SplitState:
    """Incremental objective for a two-sided assignment of nouns.

    Only the per-side verb-count vectors change when a noun moves, so the
    data cost is maintained from side aggregates:

        l_dat = |S| log2 |S| - sum_C sum_v f(C,v) log2 f(C,v)
                + sum_C f(C) log2 |C|

    All aggregates are integers, so the value is an exact function of the
    assignment and matches a from-scratch evaluation to float tolerance.
    """

    def __init__(self, rows: np.ndarray, side: list[int], criterion: Criterion):
        self.rows = rows
        self.side = side
        self.criterion = criterion
        self.total = int(rows.sum())
        self.k_v = rows.shape[1]
        self.counts = [np.zeros(self.k_v, dtype=np.int64), np.zeros(self.k_v, dtype=np.int64)]
        self.sizes = [0, 0]
        for i, s in enumerate(side):
            self.counts[s] += rows[i]
            self.sizes[s] += 1
        self._log2_total = math.log2(self.total)

    def value(self) -> float:
        return self._evaluate(self.counts[0], self.counts[1], self.sizes[0], self.sizes[1])

    def _evaluate(self, c0, c1, n0, n1) -> float:
        l_dat = self.total * self._log2_total
        for counts, size in ((c0, n0), (c1, n1)):
            if size == 0:
                continue
            l_dat -= _flogf(counts)
            subtotal = int(counts.sum())
            if subtotal:
                l_dat += subtotal * math.log2(size)
        if self.criterion is Criterion.MLE:
            return l_dat
        k_n = (n0 > 0) + (n1 > 0)
        return param_dl(k_n, self.k_v, self.total) + l_dat

    def propose(self, i: int) -> float:
        """Objective value after moving noun ``i`` to the other side."""
        s = self.side[i]
        row = self.rows[i]
        if s == 0:
            return self._evaluate(self.counts[0] - row, self.counts[1] + row,
                                  self.sizes[0] - 1, self.sizes[1] + 1)
        return self._evaluate(self.counts[0] + row, self.counts[1] - row,
                              self.sizes[0] + 1, self.sizes[1] - 1)

    def commit(self, i: int) -> None:
        s = self.side[i]
        t = 1 - s
        self.counts[s] -= self.rows[i]
        self.counts[t] += self.rows[i]
        self.sizes[s] -= 1
        self.sizes[t] += 1
        self.side[i] = t


@dataclass(frozen=True)
class Trial:
    """One annealing proposal, reported to the optional trial callback."""

    index: int
    temperature: float
    delta: float
    accepted: bool
    value: float
    best_value: float
    side_a: tuple[str, ...]
    side_b: tuple[str, ...]


def _sides(nouns: Sequence[str], side: Sequence[int]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    first = side[0]
    a = tuple(n for n, s in zip(nouns, side) if s == first)
    b = tuple(n for n, s in zip(nouns, side) if s != first)
    return a, b


def _row_matrix(data: CoocData, nouns: Sequence[str]) -> np.ndarray:
    ni = {n: i for i, n in enumerate(nouns)}
    vi = {v: j for j, v in enumerate(data.verbs)}
    rows = np.zeros((len(nouns), len(data.verbs)), dtype=np.int64)
    for (noun, verb), count in data.freq.items():
        rows[ni[noun], vi[verb]] = count
    return rows


def _check_restricted(nouns: Sequence[str], data: CoocData) -> None:
    if set(nouns) != set(data.nouns):
        raise ValueError("data must be restricted to exactly the nouns being split")
    if len(set(nouns)) != len(nouns):
        raise ValueError("duplicate nouns in split request")


def anneal_split(nouns: Sequence[str], data: CoocData, config: AnnealConfig,
                 on_trial: Callable[[Trial], None] | None = None,
                 ) -> tuple[tuple[str, ...], tuple[str, ...], float]:
    """Search for the best two-way split of ``nouns`` by simulated annealing.

    Starts from a uniformly random assignment, then repeatedly moves a
    random noun to the other side, keeping the move when the objective
    drops and otherwise with probability ``exp(-delta / T)``. An empty side
    means "do not split" and is costed as a one-cluster model, so declining
    to split competes on description length inside the same search.

    Returns the best assignment seen, as ``(side_a, side_b, value)`` with
    the side containing the first noun listed first and members in input
    order; ``side_b`` is empty when not splitting wins.
    """
    nouns = tuple(nouns)
    m = len(nouns)
    if m < 2:
        raise ValueError("need at least two nouns to split")
    _check_restricted(nouns, data)
    if data.total == 0:
        # No observations: no split can justify its parameters.
        return nouns, (), 0.0

    rng = random.Random(config.seed)
    side = [rng.getrandbits(1) for _ in range(m)]
    state = _SplitState(_row_matrix(data, nouns), side, config.criterion)

    current = state.value()
    best = current
    best_side = list(side)
    temperature = config.t_init
    window = config.window_mult * m
    trial_index = 0

    while True:
        best_at_window_start = best
        for _ in range(window):
            i = rng.randrange(m)
            candidate = state.propose(i)
            delta = candidate - current
            accepted = delta < 0 or rng.random() < math.exp(-delta / temperature)
            if accepted:
                state.commit(i)
                current = candidate
                if current < best:
                    best = current
                    best_side = list(side)
            if on_trial is not None:
                a, b = _sides(nouns, side)
                on_trial(Trial(trial_index, temperature, delta, accepted, current, best, a, b))
            trial_index += 1
        if best < best_at_window_start:
            temperature *= config.cool
        else:
            break

    side_a, side_b = _sides(nouns, best_side)
    return side_a, side_b, split_criterion_value(side_a, side_b, data, config.criterion)


def exhaustive_split(nouns: Sequence[str], data: CoocData, criterion: Criterion,
                     ) -> tuple[tuple[str, ...], tuple[str, ...], float]:
    """Exact minimizer over all 2**(n-1) binary splits, including no-split.

    Ties go to the lexicographically smallest canonical form (the side
    holding the first noun first, members sorted). Guarded to 20 nouns.
    """
    nouns = tuple(nouns)
    m = len(nouns)
    if m > 20:
        raise ValueError(f"exhaustive search over {m} nouns would evaluate 2**{m - 1} splits")
    if m < 1:
        raise ValueError("need at least one noun")
    _check_restricted(nouns, data)

    best: tuple[float, tuple, tuple[str, ...], tuple[str, ...]] | None = None
    for mask in range(1 << (m - 1)):
        side_a = tuple(n for i, n in enumerate(nouns) if i == 0 or not mask >> (i - 1) & 1)
        side_b = tuple(n for i, n in enumerate(nouns) if i != 0 and mask >> (i - 1) & 1)
        value = split_criterion_value(side_a, side_b, data, criterion)
        key = (value, (tuple(sorted(side_a)), tuple(sorted(side_b))))
        if best is None or key < best[:2]:
            best = (*key, side_a, side_b)
    return best[2], best[3], best[0]


# ---------------------------------------------------------------------------
# Tree construction

def _relabel_preorder(node: TreeNode, counter: list[int]) -> TreeNode:
    if node.is_leaf:
        return node
    label = f"#{counter[0]}"
    counter[0] += 1
    return TreeNode(label=label, children=tuple(_relabel_preorder(c, counter)
                                                for c in node.children))


def build_tree(data: CoocData, config: AnnealConfig, parallel: bool = False) -> ThesaurusTree:
    """Grow a binary thesaurus tree by recursive annealed splitting.

    Subtree seeds are position-derived from the parent seed, so the result
    is a pure function of ``(data, config)``; with ``parallel`` the two
    subtrees under the root are grown in separate threads and the result is
    identical to the sequential one.
    """
    if not data.nouns:
        raise ValueError("no nouns to cluster")

    def grow(nouns: tuple[str, ...], seed: int, threads: bool = False) -> TreeNode:
        if len(nouns) == 1:
            return TreeNode(nouns=nouns)
        sub = restrict(data, nouns) if len(nouns) < len(data.nouns) else data
        side_a, side_b, _ = anneal_split(nouns, sub, replace(config, seed=seed))
        if not side_a or not side_b:
            return TreeNode(nouns=nouns)
        seeds = (derive_seed(seed, 0), derive_seed(seed, 1))
        if threads:
            # Threads only at this level; each subtree grows sequentially inside.
            with ThreadPoolExecutor(max_workers=2) as pool:
                futures = [pool.submit(grow, side, s)
                           for side, s in zip((side_a, side_b), seeds)]
                children = tuple(f.result() for f in futures)
        else:
            children = (grow(side_a, seeds[0]), grow(side_b, seeds[1]))
        return TreeNode(label="#x", children=children)

    root = grow(tuple(data.nouns), config.seed, threads=parallel)
    return ThesaurusTree(_relabel_preorder(root, [0]))
