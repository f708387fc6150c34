"""Tree-cut case-frame patterns and PP-attachment disambiguation.

A pattern for one (head, prep) slot is a cut through a thesaurus tree: an
antichain of nodes whose leaf sets partition the tree's nouns, each carrying
the class probability of its slot fillers. The cut is chosen to minimize

    (|cut| - 1) / 2 * log2(total) + sum_C -f(C) * log2(P(C) / |C|)

where ``P(C) = f(C) / total`` and ``|C|`` counts the nouns under ``C``. A
coarse cut spends little on parameters but blurs the data; a fine cut fits
tightly but pays per class. Within a class, fillers share the mass
uniformly, so unseen nouns inherit probability from their class.

Disambiguation compares the per-word probability of ``noun2`` under the
(verb, prep) pattern and the (noun1, prep) pattern; backoff chains try
stages in order until one yields a verdict.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import Attachment, AttachmentTuple, CoocData, ParseError, _check_count, _check_word, _skip
from .cluster import ThesaurusTree, TreeNode

__all__ = [
    "AttachmentDecision",
    "DefaultStage",
    "EvalReport",
    "LexicalAssocStage",
    "SlotSample",
    "Stage",
    "StageStats",
    "ThesaurusStage",
    "TreeCutPattern",
    "attachment_verdict",
    "cut_cost",
    "cut_prob",
    "decide",
    "decide_all",
    "decide_chain",
    "dump_patterns",
    "evaluate",
    "group_samples",
    "learn_cut",
    "learn_patterns",
    "lexical_assoc",
    "load_patterns",
    "load_slot_samples",
]


class Stage(enum.Enum):
    """Which backoff stage produced a verdict."""

    AUTO_THESAURUS = "auto"
    EXTERNAL_THESAURUS = "external"
    LEXICAL_ASSOC = "la"
    DEFAULT = "default"
    NONE = "none"


@dataclass(frozen=True)
class SlotSample:
    """One observed slot filler for a (head, prep) pair."""

    head: str
    prep: str
    filler: str
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("slot sample count must be at least 1")


@dataclass(frozen=True)
class TreeCutPattern:
    """A learned cut with class probabilities for one (head, prep) slot."""

    head: str
    prep: str
    cut: tuple[str, ...]
    probs: Mapping[str, float]
    dl: float = float("nan")


@dataclass(frozen=True)
class AttachmentDecision:
    """Verdict with the stage that produced it and the probabilities compared."""

    verdict: Attachment
    stage: Stage
    p_verb: float
    p_noun1: float


def load_slot_samples(path) -> list[SlotSample]:
    """Read slot samples: ``head <TAB> prep <TAB> filler [<TAB> count]``."""
    samples: list[SlotSample] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if _skip(line):
                continue
            fields = line.split("\t")
            if len(fields) not in (3, 4):
                raise ParseError(path, line_no, f"expected 3 or 4 fields, got {len(fields)}")
            head = _check_word(fields[0], path, line_no, "head")
            prep = _check_word(fields[1], path, line_no, "prep")
            filler = _check_word(fields[2], path, line_no, "filler")
            count = _check_count(fields[3], path, line_no) if len(fields) == 4 else 1
            if count < 1:
                raise ParseError(path, line_no, "slot sample count must be at least 1")
            samples.append(SlotSample(head, prep, filler, count))
    return samples


def group_samples(samples: Iterable[SlotSample]) -> dict[tuple[str, str], list[SlotSample]]:
    """Group samples by (head, prep), preserving first-appearance order."""
    groups: dict[tuple[str, str], list[SlotSample]] = {}
    for sample in samples:
        groups.setdefault((sample.head, sample.prep), []).append(sample)
    return groups


# ---------------------------------------------------------------------------
# Cut learning

def _filler_counts(tree: ThesaurusTree, samples: Sequence[SlotSample]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for sample in samples:
        if sample.filler not in tree:
            raise ValueError(f"filler not in thesaurus: {sample.filler}")
        counts[sample.filler] = counts.get(sample.filler, 0) + sample.count
    return counts


def _node_counts(tree: ThesaurusTree, filler_counts: Mapping[str, int]) -> dict[str, int]:
    counts: dict[str, int] = {}

    def walk(node: TreeNode) -> int:
        if node.is_leaf:
            total = sum(filler_counts.get(n, 0) for n in node.nouns)
        else:
            total = sum(walk(c) for c in node.children)
        counts[node.node_id] = total
        return total

    walk(tree.root)
    return counts


def _class_cost(count: int, size: int, total: int) -> float:
    if count == 0:
        return 0.0
    return -count * math.log2(count / (total * size))


def cut_cost(tree: ThesaurusTree, cut: Sequence[str], filler_counts: Mapping[str, int]) -> float:
    """Description length of one cut for the given filler counts."""
    total = sum(filler_counts.values())
    node_counts = _node_counts(tree, filler_counts)
    param = (len(cut) - 1) / 2 * math.log2(total)
    return param + math.fsum(
        _class_cost(node_counts[node_id], len(tree.members(node_id)), total)
        for node_id in cut)


def check_cut(tree: ThesaurusTree, cut: Sequence[str]) -> None:
    """Raise unless the node ids form an antichain covering every leaf."""
    covered: set[str] = set()
    for node_id in cut:
        members = tree.members(node_id)
        if covered & members:
            raise ValueError(f"cut member {node_id!r} overlaps another member")
        covered |= members
    if covered != set(tree.nouns):
        raise ValueError("cut does not cover all leaves")


def learn_cut(tree: ThesaurusTree, samples: Sequence[SlotSample]) -> TreeCutPattern:
    """Select the minimum-description-length cut for one (head, prep) slot.

    Dynamic program over the tree: at each node, either cut here or
    concatenate the children's best cuts, whichever codes the data more
    cheaply; exact ties prefer cutting here (the coarser model).
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no slot samples")
    keys = {(s.head, s.prep) for s in samples}
    if len(keys) != 1:
        raise ValueError(f"samples mix several (head, prep) pairs: {sorted(keys)}")
    head, prep = samples[0].head, samples[0].prep

    filler_counts = _filler_counts(tree, samples)
    total = sum(filler_counts.values())
    node_counts = _node_counts(tree, filler_counts)
    per_class_param = 0.5 * math.log2(total)

    def best(node: TreeNode) -> tuple[float, list[str]]:
        here = per_class_param + _class_cost(node_counts[node.node_id],
                                             len(tree.members(node.node_id)), total)
        if node.is_leaf:
            return here, [node.node_id]
        sub_cost = 0.0
        sub_cut: list[str] = []
        for child in node.children:
            cost, cut = best(child)
            sub_cost += cost
            sub_cut.extend(cut)
        if here <= sub_cost:
            return here, [node.node_id]
        return sub_cost, sub_cut

    _, cut = best(tree.root)
    check_cut(tree, cut)
    probs = {node_id: node_counts[node_id] / total for node_id in cut}
    return TreeCutPattern(head, prep, tuple(cut), probs,
                          dl=cut_cost(tree, cut, filler_counts))


def learn_patterns(tree: ThesaurusTree, samples: Iterable[SlotSample],
                   ) -> dict[tuple[str, str], TreeCutPattern]:
    """Learn one pattern per (head, prep) pair present in the samples."""
    return {key: learn_cut(tree, group) for key, group in group_samples(samples).items()}


def cut_prob(pattern: TreeCutPattern, tree: ThesaurusTree, noun: str) -> float:
    """Per-word probability of ``noun``: its class probability spread uniformly."""
    for node_id in pattern.cut:
        members = tree.members(node_id)
        if noun in members:
            return pattern.probs[node_id] / len(members)
    raise ValueError(f"unknown noun: {noun}")


# ---------------------------------------------------------------------------
# Disambiguation

def attachment_verdict(p_verb: float, p_noun1: float) -> Attachment:
    """Strictly larger probability wins; any tie, including 0-0, is undecided."""
    if p_verb > p_noun1:
        return Attachment.VERB
    if p_noun1 > p_verb:
        return Attachment.NOUN1
    return Attachment.NO_DECISION


def _decision(p_verb: float, p_noun1: float, stage: Stage) -> AttachmentDecision:
    verdict = attachment_verdict(p_verb, p_noun1)
    if verdict is Attachment.NO_DECISION:
        return AttachmentDecision(verdict, Stage.NONE, p_verb, p_noun1)
    return AttachmentDecision(verdict, stage, p_verb, p_noun1)


def decide(verb: str, noun1: str, prep: str, noun2: str,
           vpattern: TreeCutPattern | None, npattern: TreeCutPattern | None,
           tree: ThesaurusTree, stage: Stage = Stage.AUTO_THESAURUS) -> AttachmentDecision:
    """Compare the probability of ``noun2`` under the verb and noun1 patterns.

    A missing pattern, or a filler outside the tree, contributes probability
    zero, so sparse training degrades to no decision rather than failing.
    """
    p_verb = 0.0
    p_noun1 = 0.0
    if noun2 in tree:
        if vpattern is not None:
            p_verb = cut_prob(vpattern, tree, noun2)
        if npattern is not None:
            p_noun1 = cut_prob(npattern, tree, noun2)
    return _decision(p_verb, p_noun1, stage)


def lexical_assoc(verb: str, noun1: str, prep: str, assoc_data: CoocData) -> AttachmentDecision:
    """Fallback on add-half smoothed word-preposition affinity ratios.

    ``assoc_data`` holds (word, prep) counts in the usual table layout with
    prepositions in the context role; unseen words score the neutral 0.5.
    """
    def score(word: str) -> float:
        return (assoc_data.count(word, prep) + 0.5) / (assoc_data.noun_total(word) + 1)

    return _decision(score(verb), score(noun1), Stage.LEXICAL_ASSOC)


class ThesaurusStage:
    """Backoff stage deciding via tree-cut patterns over one thesaurus."""

    def __init__(self, tree: ThesaurusTree, patterns: Mapping[tuple[str, str], TreeCutPattern],
                 stage: Stage = Stage.AUTO_THESAURUS):
        self.tree = tree
        self.patterns = patterns
        self.stage = stage

    def __call__(self, tup: AttachmentTuple) -> AttachmentDecision:
        vpattern = self.patterns.get((tup.verb, tup.prep))
        npattern = self.patterns.get((tup.noun1, tup.prep))
        return decide(tup.verb, tup.noun1, tup.prep, tup.noun2,
                      vpattern, npattern, self.tree, stage=self.stage)


class LexicalAssocStage:
    stage = Stage.LEXICAL_ASSOC

    def __init__(self, assoc_data: CoocData):
        self.assoc_data = assoc_data

    def __call__(self, tup: AttachmentTuple) -> AttachmentDecision:
        return lexical_assoc(tup.verb, tup.noun1, tup.prep, self.assoc_data)


class DefaultStage:
    """Always attaches to noun1, expressed as a degenerate comparison."""

    stage = Stage.DEFAULT

    def __call__(self, tup: AttachmentTuple) -> AttachmentDecision:
        return AttachmentDecision(Attachment.NOUN1, Stage.DEFAULT, 0.0, 1.0)


StageCallable = Callable[[AttachmentTuple], AttachmentDecision]

_UNDECIDED = AttachmentDecision(Attachment.NO_DECISION, Stage.NONE, 0.0, 0.0)


def decide_chain(tup: AttachmentTuple, stages: Sequence[StageCallable]) -> AttachmentDecision:
    """First stage with a verdict wins; an empty run of stages decides nothing."""
    if not stages:
        raise ValueError("backoff chain must contain at least one stage")
    for stage in stages:
        decision = stage(tup)
        if decision.verdict is not Attachment.NO_DECISION:
            return decision
    return _UNDECIDED


def decide_all(tuples: Sequence[AttachmentTuple], stages: Sequence[StageCallable],
               ) -> list[AttachmentDecision]:
    return [decide_chain(tup, stages) for tup in tuples]


@dataclass(frozen=True)
class StageStats:
    decided: int
    correct: int

    @property
    def accuracy(self) -> float | None:
        return None if self.decided == 0 else 100.0 * self.correct / self.decided


@dataclass(frozen=True)
class EvalReport:
    """Coverage and accuracy of a backoff chain, with a per-stage breakdown."""

    total: int
    decided: int
    correct: int
    per_stage: Mapping[Stage, StageStats]

    @property
    def coverage(self) -> float:
        return 100.0 * self.decided / self.total

    @property
    def accuracy(self) -> float | None:
        """Percent correct among decided tuples; absent when nothing was decided."""
        return None if self.decided == 0 else 100.0 * self.correct / self.decided


def evaluate(tuples: Sequence[AttachmentTuple], stages: Sequence[StageCallable]) -> EvalReport:
    """Score a chain against gold labels."""
    if not tuples:
        raise ValueError("no tuples to evaluate")
    decisions = decide_all(tuples, stages)
    by_stage: dict[Stage, list[int]] = {}
    for stage in stages:
        tag = getattr(stage, "stage", None)
        if isinstance(tag, Stage):
            by_stage.setdefault(tag, [0, 0])
    decided = 0
    correct = 0
    for tup, decision in zip(tuples, decisions):
        if decision.verdict is Attachment.NO_DECISION:
            continue
        decided += 1
        hit = decision.verdict is tup.gold
        correct += hit
        entry = by_stage.setdefault(decision.stage, [0, 0])
        entry[0] += 1
        entry[1] += hit
    return EvalReport(len(tuples), decided, correct,
                      {stage: StageStats(*entry) for stage, entry in by_stage.items()})


# ---------------------------------------------------------------------------
# Pattern files

def dump_patterns(patterns: Mapping[tuple[str, str], TreeCutPattern], path) -> None:
    """Write ``head <TAB> prep <TAB> node-id <TAB> prob`` lines, one per class."""
    with open(path, "w", encoding="utf-8") as fh:
        for (head, prep), pattern in patterns.items():
            for node_id in pattern.cut:
                fh.write(f"{head}\t{prep}\t{node_id}\t{pattern.probs[node_id]:.6g}\n")


def load_patterns(path, tree: ThesaurusTree) -> dict[tuple[str, str], TreeCutPattern]:
    """Read a pattern dump back against the tree it was learned on."""
    cuts: dict[tuple[str, str], list[str]] = {}
    probs: dict[tuple[str, str], dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if _skip(line):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError(path, line_no, f"expected 4 fields, got {len(fields)}")
            head, prep, node_id = (f.strip() for f in fields[:3])
            try:
                prob = float(fields[3])
            except ValueError:
                raise ParseError(path, line_no, f"bad probability {fields[3]!r}") from None
            if prob < 0:
                raise ParseError(path, line_no, "probability is negative")
            tree.node(node_id)
            key = (head, prep)
            if node_id in probs.get(key, {}):
                raise ParseError(path, line_no, f"duplicate class {node_id!r} for {key}")
            cuts.setdefault(key, []).append(node_id)
            probs.setdefault(key, {})[node_id] = prob
    patterns = {}
    for key, cut in cuts.items():
        check_cut(tree, cut)
        mass = sum(probs[key].values())
        if abs(mass - 1.0) > 1e-3:
            raise ValueError(f"{path}: pattern for {key} has probability mass {mass}")
        patterns[key] = TreeCutPattern(key[0], key[1], tuple(cut), probs[key])
    return patterns
