import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlthesaurus.corpus import Attachment, AttachmentTuple, ParseError, build_cooc
from mdlthesaurus.cluster import ThesaurusTree, TreeNode, parse_tree
from mdlthesaurus.patterns import (
    AttachmentDecision,
    DefaultStage,
    LexicalAssocStage,
    SlotSample,
    Stage,
    ThesaurusStage,
    TreeCutPattern,
    attachment_verdict,
    cut_cost,
    cut_prob,
    decide,
    decide_all,
    decide_chain,
    dump_patterns,
    evaluate,
    learn_cut,
    learn_patterns,
    lexical_assoc,
    load_patterns,
    load_slot_samples,
)


def enumerate_cuts(tree: ThesaurusTree):
    """Oracle: every antichain of nodes whose leaf sets partition the nouns."""
    def cuts(node: TreeNode):
        own = [(node.node_id,)]
        if node.is_leaf:
            return own
        child_cuts = [cuts(c) for c in node.children]
        return own + [tuple(itertools.chain.from_iterable(combo))
                      for combo in itertools.product(*child_cuts)]
    return cuts(tree.root)


# ---------------------------------------------------------------------------
# learn_cut

def test_learn_cut_reference_values(question_tree, question_samples):
    pattern = learn_cut(question_tree, question_samples)
    assert pattern.cut == ("strength", "#80", "#122")
    assert pattern.probs == {"strength": 0.5, "#80": 0.25, "#122": 0.25}
    assert sum(pattern.probs.values()) == pytest.approx(1.0, abs=1e-9)


def test_learn_cut_matches_enumeration(question_tree, question_samples):
    pattern = learn_cut(question_tree, question_samples)
    counts = {"attitude": 1, "corporation": 1, "strength": 2}
    costs = [cut_cost(question_tree, cut, counts) for cut in enumerate_cuts(question_tree)]
    assert pattern.dl == min(costs)


def test_learn_cut_all_mass_on_one_deep_leaf():
    tree = parse_tree("(#0 (a) (#1 (b) (#2 (c) (d))))")
    pattern = learn_cut(tree, [SlotSample("head", "of", "d", 5)])
    holder = next(cid for cid in pattern.cut if "d" in tree.members(cid))
    assert pattern.probs[holder] == pytest.approx(1.0)


def test_learn_cut_single_leaf_tree():
    tree = parse_tree("(a b c)")
    pattern = learn_cut(tree, [SlotSample("head", "of", "b", 2)])
    assert pattern.cut == ("a,b,c",)
    assert pattern.probs["a,b,c"] == pytest.approx(1.0)


def test_learn_cut_tie_prefers_coarser():
    # #1 and its single child leaf have identical members, so cutting at
    # either codes the data identically; the coarser #1 must be chosen.
    tree = parse_tree("(#0 (a) (#1 (b c)))")
    pattern = learn_cut(tree, [SlotSample("q", "about", "a", 3),
                               SlotSample("q", "about", "b", 1)])
    assert pattern.cut == ("a", "#1")


def test_learn_cut_unknown_filler(question_tree):
    with pytest.raises(ValueError, match="sake"):
        learn_cut(question_tree, [SlotSample("q", "about", "sake", 1)])


def test_learn_cut_rejects_mixed_slots(question_tree):
    with pytest.raises(ValueError, match="mix"):
        learn_cut(question_tree, [SlotSample("a", "of", "strength", 1),
                                  SlotSample("b", "of", "strength", 1)])


def test_learn_cut_rejects_empty(question_tree):
    with pytest.raises(ValueError):
        learn_cut(question_tree, [])


def _random_tree(rng, max_leaves=12):
    nouns = [f"w{i}" for i in range(int(rng.integers(2, max_leaves + 1)))]
    counter = [0]

    def grow(words):
        if len(words) == 1 or rng.random() < 0.25:
            return TreeNode(nouns=tuple(words))
        n_children = int(rng.integers(2, min(3, len(words)) + 1))
        bounds = sorted(rng.choice(np.arange(1, len(words)), size=n_children - 1,
                                   replace=False)) if len(words) > n_children else \
            list(range(1, n_children))
        pieces = np.split(np.array(words, dtype=object), bounds)
        label = f"#{counter[0]}"
        counter[0] += 1
        return TreeNode(label=label, children=tuple(grow(list(p)) for p in pieces))

    root = grow(nouns)
    if root.is_leaf:  # force at least one internal node
        root = TreeNode(label="#root", children=(root,))
    return ThesaurusTree(root)


def test_learn_cut_optimal_on_random_trees():
    rng = np.random.default_rng(17)
    for _ in range(25):
        tree = _random_tree(rng)
        in_play = [n for n in tree.nouns if rng.random() < 0.6] or [tree.nouns[0]]
        samples = [SlotSample("h", "p", noun, int(rng.integers(1, 5))) for noun in in_play]
        pattern = learn_cut(tree, samples)
        counts = {s.filler: s.count for s in samples}
        best = min(cut_cost(tree, cut, counts) for cut in enumerate_cuts(tree))
        assert pattern.dl == best
        # antichain covering all leaves, mass normalized
        members = [tree.members(cid) for cid in pattern.cut]
        assert not any(a & b for a, b in itertools.combinations(members, 2))
        assert frozenset().union(*members) == set(tree.nouns)
        assert sum(pattern.probs.values()) == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# cut_prob

def test_cut_prob_reference_values(question_tree, question_samples):
    pattern = learn_cut(question_tree, question_samples)
    assert cut_prob(pattern, question_tree, "strength") == pytest.approx(0.5)
    assert cut_prob(pattern, question_tree, "corporation") == pytest.approx(0.25 / 26)
    assert cut_prob(pattern, question_tree, "attitude") == pytest.approx(0.25 / 5)


def test_cut_prob_zero_mass_class(question_tree):
    pattern = TreeCutPattern("q", "about", ("strength", "#80", "#122"),
                             {"strength": 1.0, "#80": 0.0, "#122": 0.0})
    assert cut_prob(pattern, question_tree, "corporation") == 0.0


def test_cut_prob_sums_to_one_over_nouns(question_tree, question_samples):
    pattern = learn_cut(question_tree, question_samples)
    mass = sum(cut_prob(pattern, question_tree, noun) for noun in question_tree.nouns)
    assert mass == pytest.approx(1.0, abs=1e-9)


def test_cut_prob_unknown_noun(question_tree, question_samples):
    pattern = learn_cut(question_tree, question_samples)
    with pytest.raises(ValueError, match="sake"):
        cut_prob(pattern, question_tree, "sake")


# ---------------------------------------------------------------------------
# decision rule

@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_verdict_is_no_decision_exactly_on_ties(p_verb, p_noun1):
    verdict = attachment_verdict(p_verb, p_noun1)
    if p_verb == p_noun1:
        assert verdict is Attachment.NO_DECISION
    elif p_verb > p_noun1:
        assert verdict is Attachment.VERB
    else:
        assert verdict is Attachment.NOUN1


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_verdict_antisymmetric(p_verb, p_noun1):
    forward = attachment_verdict(p_verb, p_noun1)
    backward = attachment_verdict(p_noun1, p_verb)
    swap = {Attachment.VERB: Attachment.NOUN1, Attachment.NOUN1: Attachment.VERB,
            Attachment.NO_DECISION: Attachment.NO_DECISION}
    assert backward is swap[forward]


def test_decide_uses_per_word_probabilities(question_tree, question_samples):
    vpattern = learn_cut(question_tree, question_samples)
    npattern = TreeCutPattern("topic", "about", ("strength", "#80", "#122"),
                              {"strength": 0.0, "#80": 1.0, "#122": 0.0})
    decision = decide("question", "topic", "about", "strength",
                      vpattern, npattern, question_tree)
    assert decision.verdict is Attachment.VERB
    assert decision.p_verb == pytest.approx(0.5)
    assert decision.p_noun1 == 0.0
    flipped = decide("question", "topic", "about", "corporation",
                     vpattern, npattern, question_tree)
    assert flipped.verdict is Attachment.NOUN1  # 1/26 > 0.25/26


def test_decide_swapping_patterns_swaps_verdicts(question_tree, question_samples):
    vpattern = learn_cut(question_tree, question_samples)
    npattern = TreeCutPattern("topic", "about", ("strength", "#80", "#122"),
                              {"strength": 0.0, "#80": 1.0, "#122": 0.0})
    for noun2 in ("strength", "corporation", "attitude"):
        forward = decide("q", "t", "about", noun2, vpattern, npattern, question_tree)
        backward = decide("q", "t", "about", noun2, npattern, vpattern, question_tree)
        swap = {Attachment.VERB: Attachment.NOUN1, Attachment.NOUN1: Attachment.VERB,
                Attachment.NO_DECISION: Attachment.NO_DECISION}
        assert backward.verdict is swap[forward.verdict]


def test_decide_degrades_to_no_decision(question_tree, question_samples):
    pattern = learn_cut(question_tree, question_samples)
    both_missing = decide("a", "b", "about", "strength", None, None, question_tree)
    assert both_missing.verdict is Attachment.NO_DECISION
    assert both_missing.stage is Stage.NONE
    assert (both_missing.p_verb, both_missing.p_noun1) == (0.0, 0.0)
    outside = decide("a", "b", "about", "sake", pattern, pattern, question_tree)
    assert outside.verdict is Attachment.NO_DECISION
    tie = decide("a", "b", "about", "strength", pattern, pattern, question_tree)
    assert tie.verdict is Attachment.NO_DECISION


# ---------------------------------------------------------------------------
# lexical association

def _assoc(entries):
    return build_cooc(entries)


def test_lexical_assoc_prefers_stronger_ratio():
    assoc = _assoc([("with", "eat", 10), ("of", "eat", 10),
                    ("with", "salad", 1), ("of", "salad", 19)])
    decision = lexical_assoc("eat", "salad", "with", assoc)
    assert decision.verdict is Attachment.VERB
    assert decision.p_verb == pytest.approx(10.5 / 21)
    assert decision.p_noun1 == pytest.approx(1.5 / 21)
    assert decision.stage is Stage.LEXICAL_ASSOC


def test_lexical_assoc_unseen_words_tie():
    assoc = _assoc([("with", "other", 5)])
    decision = lexical_assoc("novelverb", "novelnoun", "with", assoc)
    assert decision.verdict is Attachment.NO_DECISION
    assert decision.p_verb == decision.p_noun1 == pytest.approx(0.5)


def test_lexical_assoc_equal_counts_tie():
    assoc = _assoc([("with", "eat", 4), ("with", "salad", 4)])
    assert lexical_assoc("eat", "salad", "with", assoc).verdict is Attachment.NO_DECISION


# ---------------------------------------------------------------------------
# chains and evaluation

def _tuple(verb="eat", noun1="salad", prep="with", noun2="fork", gold=Attachment.NOUN1):
    return AttachmentTuple(verb, noun1, prep, noun2, gold)


class _FixedStage:
    def __init__(self, decision, stage=Stage.AUTO_THESAURUS):
        self.stage = stage
        self._decision = decision

    def __call__(self, tup):
        return self._decision


def test_chain_returns_first_decisive_stage():
    undecided = _FixedStage(AttachmentDecision(Attachment.NO_DECISION, Stage.NONE, 0, 0),
                            stage=Stage.AUTO_THESAURUS)
    decides = _FixedStage(AttachmentDecision(Attachment.VERB, Stage.EXTERNAL_THESAURUS, .3, .1),
                          stage=Stage.EXTERNAL_THESAURUS)
    decision = decide_chain(_tuple(), [undecided, decides, DefaultStage()])
    assert decision.verdict is Attachment.VERB
    assert decision.stage is Stage.EXTERNAL_THESAURUS


def test_chain_default_answers_noun1():
    undecided = _FixedStage(AttachmentDecision(Attachment.NO_DECISION, Stage.NONE, 0, 0))
    decision = decide_chain(_tuple(), [undecided, DefaultStage()])
    assert decision.verdict is Attachment.NOUN1
    assert decision.stage is Stage.DEFAULT
    assert decision.p_noun1 > decision.p_verb


def test_chain_without_default_can_stay_undecided():
    undecided = _FixedStage(AttachmentDecision(Attachment.NO_DECISION, Stage.NONE, 0, 0))
    decision = decide_chain(_tuple(), [undecided])
    assert decision.verdict is Attachment.NO_DECISION
    assert decision.stage is Stage.NONE


def test_chain_requires_stages():
    with pytest.raises(ValueError):
        decide_chain(_tuple(), [])


def test_evaluate_default_only_all_noun1():
    tuples = [_tuple(noun2=f"x{i}") for i in range(10)]
    report = evaluate(tuples, [DefaultStage()])
    assert report.coverage == 100.0
    assert report.accuracy == 100.0


def test_evaluate_default_only_mixed_gold():
    # 351 of 500 gold labels are NOUN1: the always-noun1 baseline scores 70.2%.
    tuples = [_tuple(noun2=f"n{i}", gold=Attachment.NOUN1) for i in range(351)]
    tuples += [_tuple(noun2=f"v{i}", gold=Attachment.VERB) for i in range(149)]
    report = evaluate(tuples, [DefaultStage()])
    assert report.coverage == 100.0
    assert report.accuracy == pytest.approx(70.2)


def test_evaluate_no_decisions_reports_absent_accuracy():
    undecided = _FixedStage(AttachmentDecision(Attachment.NO_DECISION, Stage.NONE, 0, 0))
    report = evaluate([_tuple()], [undecided])
    assert report.coverage == 0.0
    assert report.accuracy is None


def test_evaluate_stage_breakdown_consistent(question_tree, question_samples):
    patterns = learn_patterns(question_tree, question_samples)
    auto = ThesaurusStage(question_tree, patterns, Stage.AUTO_THESAURUS)
    tuples = [
        AttachmentTuple("question", "minister", "about", "strength", Attachment.VERB),
        AttachmentTuple("question", "minister", "about", "sake", Attachment.NOUN1),
        AttachmentTuple("other", "minister", "about", "attitude", Attachment.NOUN1),
    ]
    report = evaluate(tuples, [auto, DefaultStage()])
    assert report.total == 3
    assert sum(s.decided for s in report.per_stage.values()) == report.decided
    assert report.per_stage[Stage.DEFAULT].decided >= 1


def test_appending_stages_never_reduces_coverage(question_tree, question_samples):
    rng = np.random.default_rng(23)
    patterns = learn_patterns(question_tree, question_samples)
    assoc = _assoc([("about", "question", 5), ("about", "minister", 2)])
    pool = [ThesaurusStage(question_tree, patterns, Stage.AUTO_THESAURUS),
            ThesaurusStage(question_tree, patterns, Stage.EXTERNAL_THESAURUS),
            LexicalAssocStage(assoc), DefaultStage()]
    nouns = list(question_tree.nouns) + ["sake", "miso"]
    tuples = [AttachmentTuple(str(rng.choice(["question", "other"])), "minister", "about",
                              str(rng.choice(nouns)),
                              Attachment.VERB if rng.random() < 0.5 else Attachment.NOUN1)
              for _ in range(40)]
    for _ in range(20):
        chain = [pool[i] for i in rng.permutation(4)[:int(rng.integers(1, 4))]]
        extra = pool[int(rng.integers(0, 4))]
        before = evaluate(tuples, chain).coverage
        after = evaluate(tuples, chain + [extra]).coverage
        assert after >= before


# ---------------------------------------------------------------------------
# sample and pattern files

def test_load_slot_samples(tmp_path):
    path = tmp_path / "slots.tsv"
    path.write_text("question\tabout\tattitude\t1\n# comment\nquestion\tabout\tstrength\n")
    samples = load_slot_samples(path)
    assert samples == [SlotSample("question", "about", "attitude", 1),
                       SlotSample("question", "about", "strength", 1)]


@pytest.mark.parametrize("line", ["question\tabout", "question\tabout\tx\t0",
                                  "question\tabout\tx\t-2", "question\tabout\tx\tzz"])
def test_load_slot_samples_rejects_bad_lines(tmp_path, line):
    path = tmp_path / "slots.tsv"
    path.write_text(line + "\n")
    with pytest.raises(ParseError):
        load_slot_samples(path)


def test_pattern_dump_round_trip(tmp_path, question_tree, question_samples):
    learned = learn_patterns(question_tree, question_samples)
    path = tmp_path / "patterns.tsv"
    dump_patterns(learned, path)
    text = path.read_text()
    assert "question\tabout\tstrength\t0.5\n" in text
    back = load_patterns(path, question_tree)
    assert set(back) == set(learned)
    for key, pattern in learned.items():
        assert back[key].cut == pattern.cut
        for node_id, prob in pattern.probs.items():
            assert back[key].probs[node_id] == pytest.approx(prob, abs=1e-6)


def test_load_patterns_rejects_invalid_cut(tmp_path, question_tree):
    path = tmp_path / "bad.tsv"
    path.write_text("q\tabout\tstrength\t1.0\n")  # does not cover #80 / #122
    with pytest.raises(ValueError, match="cover"):
        load_patterns(path, question_tree)


def test_load_patterns_rejects_bad_mass(tmp_path, question_tree):
    path = tmp_path / "bad.tsv"
    path.write_text("q\tabout\tstrength\t0.5\nq\tabout\t#80\t0.1\nq\tabout\t#122\t0.1\n")
    with pytest.raises(ValueError, match="mass"):
        load_patterns(path, question_tree)
