import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlthesaurus.cluster import AnnealConfig
from mdlthesaurus.corpus import ParseError
from mdlthesaurus.model import Criterion
from mdlthesaurus.synthetic import (
    TrueModel,
    aggregate_records,
    default_true_model,
    dump_true_model,
    kl_divergence,
    load_true_model,
    run_convergence_experiment,
    sample,
)

TINY = TrueModel(
    noun_clusters=(("a", "b"), ("c", "d")),
    verb_clusters=(("u",), ("w",)),
    cluster_probs=((0.4, 0.1), (0.1, 0.4)),
)


def test_default_model_shape():
    model = default_true_model()
    assert len(model.noun_clusters) == 4
    assert all(len(c) == 3 for c in model.noun_clusters)
    assert len(model.verb_clusters) == 3
    assert all(len(c) == 2 for c in model.verb_clusters)
    assert abs(sum(p for row in model.cluster_probs for p in row) - 1.0) <= 1e-12
    assert np.isclose(model.cells().sum(), 1.0)


def test_model_invariants():
    with pytest.raises(ValueError):
        TrueModel((("a",), ()), (("u",),), ((1.0,), (0.0,)))
    with pytest.raises(ValueError):
        TrueModel((("a",), ("a",)), (("u",),), ((0.5,), (0.5,)))
    with pytest.raises(ValueError):
        TrueModel((("a",),), (("u",),), ((0.9,),))  # mass far from 1
    with pytest.raises(ValueError):
        TrueModel((("a",),), (("u",), ("w",)), ((1.0,),))  # shape mismatch


def test_sampling_is_deterministic():
    first = sample(TINY, 500, seed=42)
    second = sample(TINY, 500, seed=42)
    assert first == second
    assert first != sample(TINY, 500, seed=43)


def test_sampling_retains_zero_rows():
    data = sample(TINY, 1, seed=0)
    assert data.total == 1
    assert data.nouns == ("a", "b", "c", "d")
    assert data.verbs == ("u", "w")
    assert len(data.freq) == 1


def test_sample_size_must_be_positive():
    with pytest.raises(ValueError):
        sample(TINY, 0)


def test_degenerate_model_puts_all_mass_on_one_cell():
    point = TrueModel((("only",),), (("verb",),), ((1.0,),))
    data = sample(point, 250, seed=3)
    assert data.freq == {("only", "verb"): 250}


def test_sampled_frequencies_match_cell_probabilities():
    model = default_true_model()
    cells = model.cells()
    n = 100_000
    counts = sample(model, n, seed=0).to_matrix()
    sd = np.sqrt(n * cells * (1 - cells))
    assert np.all(np.abs(counts - n * cells) <= 3 * sd)


# ---------------------------------------------------------------------------
# KL divergence

def test_kl_zero_for_identical():
    p = np.array([[0.25, 0.25], [0.5, 0.0]])
    assert kl_divergence(p, p) == 0.0


def test_kl_two_point_value():
    # 0.5*log2(0.5/0.25) + 0.5*log2(0.5/0.75) = 0.20752
    p = np.array([0.5, 0.5])
    q = np.array([0.25, 0.75])
    assert kl_divergence(p, q) == pytest.approx(0.20752, abs=1e-4)


def test_kl_clamp_keeps_value_finite_and_monotone():
    p = np.array([0.5, 0.5])
    q = np.array([1.0, 0.0])
    loose = kl_divergence(p, q, eps=1e-6)
    tight = kl_divergence(p, q, eps=1e-12)
    assert np.isfinite(loose) and np.isfinite(tight)
    assert tight > loose  # smaller clamp, larger divergence


def test_kl_domain_mismatch():
    with pytest.raises(ValueError, match="domains"):
        kl_divergence(np.array([1.0]), np.array([0.5, 0.5]))


def test_kl_requires_normalized_reference():
    with pytest.raises(ValueError, match="sums to"):
        kl_divergence(np.array([0.5, 0.3]), np.array([0.5, 0.5]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8),
       st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
def test_kl_non_negative(raw_p, raw_q):
    size = min(len(raw_p), len(raw_q))
    p = np.array(raw_p[:size])
    q = np.array(raw_q[:size])
    p /= p.sum()
    q /= q.sum()
    assert kl_divergence(p, q) >= -1e-12
    assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# experiment

def test_experiment_record_grid_and_order():
    records = run_convergence_experiment(TINY, sizes=[30, 60], trials=2)
    assert len(records) == 2 * 2 * 2
    key = [(r.sample_size, r.trial, r.criterion.value) for r in records]
    assert key == sorted(key, key=lambda k: (k[0], k[1], {"mdl": 0, "mle": 1}[k[2]]))
    assert all(r.kl >= 0 and r.num_clusters >= 1 for r in records)


def test_experiment_is_deterministic():
    first = run_convergence_experiment(TINY, sizes=[40], trials=2)
    second = run_convergence_experiment(TINY, sizes=[40], trials=2)
    assert first == second


def test_experiment_validates_arguments():
    with pytest.raises(ValueError):
        run_convergence_experiment(TINY, sizes=[50, 50], trials=2)
    with pytest.raises(ValueError):
        run_convergence_experiment(TINY, sizes=[50], trials=0)
    with pytest.raises(ValueError):
        run_convergence_experiment(TINY, sizes=[50], trials=1, configs=[])


def test_experiment_same_sample_for_both_criteria():
    config_a = AnnealConfig(criterion=Criterion.MDL)
    config_b = AnnealConfig(criterion=Criterion.MDL)  # same criterion twice
    records = run_convergence_experiment(TINY, sizes=[80], trials=1,
                                         configs=[config_a, config_b])
    assert records[0].num_clusters == records[1].num_clusters
    assert records[0].kl == records[1].kl


def test_aggregate_means():
    records = run_convergence_experiment(TINY, sizes=[30, 60], trials=3)
    aggs = aggregate_records(records)
    assert len(aggs) == 4
    for agg in aggs:
        matching = [r for r in records
                    if r.sample_size == agg.sample_size and r.criterion == agg.criterion]
        assert agg.mean_kl == pytest.approx(sum(r.kl for r in matching) / 3)
        assert agg.mean_clusters == pytest.approx(
            sum(r.num_clusters for r in matching) / 3)


# ---------------------------------------------------------------------------
# config files

def test_true_model_file_round_trip(tmp_path):
    path = tmp_path / "model.tsv"
    dump_true_model(TINY, path)
    assert load_true_model(path) == TINY


def test_default_model_loads_normalized():
    model = default_true_model(seed=9)
    assert model.seed == 9
    assert abs(sum(p for row in model.cluster_probs for p in row) - 1.0) <= 1e-12


@pytest.mark.parametrize("text,error", [
    ("x\ty\n", "before any section"),
    ("[nouns]\na\tb\n[verbs]\nu\n[probs]\nnot-a-number\n", "numeric"),
    ("[nouns]\na\tb\n[verbs]\nu\n", "missing"),
    ("[nouns]\na\n[verbs]\nu\nw\n[probs]\n1.0\n", "shape"),
])
def test_true_model_loader_errors(tmp_path, text, error):
    path = tmp_path / "bad.tsv"
    path.write_text(text)
    with pytest.raises((ParseError, ValueError), match=error):
        load_true_model(path)
