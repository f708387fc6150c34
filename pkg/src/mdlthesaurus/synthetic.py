"""Ground-truth models, sampling, and the clustering-convergence experiment.

A true model is a hand-specified cluster-level joint distribution. Samples
drawn from it are clustered under both criteria, and the learned flat model
(the tree's leaf partition refit to the sample) is scored by cluster count
and by KL divergence from the truth. Estimated models routinely contain
zero cells, so the divergence clamps the estimated side at a small epsilon;
the clamp keeps curves finite and is reported with the results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Sequence

import numpy as np

from .cluster import AnnealConfig, build_tree, derive_seed
from .corpus import CoocData, ParseError
from .model import Criterion, cell_probs, fit, singleton_partition

__all__ = [
    "AggregateRecord",
    "ConvergenceRecord",
    "TrueModel",
    "aggregate_records",
    "default_true_model",
    "dump_true_model",
    "kl_divergence",
    "load_true_model",
    "run_convergence_experiment",
    "sample",
]

DEFAULT_SIZES = (50, 100, 200, 400, 800, 1600, 3200)
DEFAULT_TRIALS = 10
DEFAULT_KL_EPS = 1e-12


@dataclass(frozen=True)
class TrueModel:
    """A hand-specified cluster-level joint distribution to sample from."""

    noun_clusters: tuple[tuple[str, ...], ...]
    verb_clusters: tuple[tuple[str, ...], ...]
    cluster_probs: tuple[tuple[float, ...], ...]
    seed: int = 0

    def __post_init__(self):
        for clusters, kind in ((self.noun_clusters, "noun"), (self.verb_clusters, "verb")):
            if not clusters or any(not c for c in clusters):
                raise ValueError(f"{kind} clusters must be non-empty")
            flat = [w for c in clusters for w in c]
            if len(flat) != len(set(flat)):
                raise ValueError(f"duplicate word across {kind} clusters")
        if len(self.cluster_probs) != len(self.noun_clusters) or any(
                len(row) != len(self.verb_clusters) for row in self.cluster_probs):
            raise ValueError("probability matrix shape does not match the clusters")
        if any(p < 0 for row in self.cluster_probs for p in row):
            raise ValueError("cluster probabilities must be non-negative")
        mass = sum(p for row in self.cluster_probs for p in row)
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"cluster probabilities sum to {mass}, expected 1")
        if abs(mass - 1.0) > 1e-12:
            normalized = tuple(tuple(p / mass for p in row) for row in self.cluster_probs)
            object.__setattr__(self, "cluster_probs", normalized)

    @property
    def nouns(self) -> tuple[str, ...]:
        return tuple(n for c in self.noun_clusters for n in c)

    @property
    def verbs(self) -> tuple[str, ...]:
        return tuple(v for c in self.verb_clusters for v in c)

    def cells(self) -> np.ndarray:
        """Per-pair probabilities, shape (len(nouns), len(verbs))."""
        out = np.empty((len(self.nouns), len(self.verbs)), dtype=float)
        row = 0
        for i, nc in enumerate(self.noun_clusters):
            col = 0
            for j, vc in enumerate(self.verb_clusters):
                out[row:row + len(nc), col:col + len(vc)] = (
                    self.cluster_probs[i][j] / (len(nc) * len(vc)))
                col += len(vc)
            row += len(nc)
        return out


def sample(model: TrueModel, n: int, seed: int | None = None) -> CoocData:
    """Draw ``n`` i.i.d. pairs from the model as an aggregated count table.

    A draw picks a cluster pair by its probability and then a uniform member
    on each side; the counts over all cells of such draws are multinomial on
    the per-pair probabilities, which is how they are generated. The full
    vocabulary is retained even for all-zero rows.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = np.random.default_rng(model.seed if seed is None else seed)
    cells = model.cells()
    counts = rng.multinomial(n, cells.ravel()).reshape(cells.shape)
    nouns = model.nouns
    verbs = model.verbs
    freq = {(nouns[i], verbs[j]): int(counts[i, j])
            for i in range(len(nouns)) for j in range(len(verbs)) if counts[i, j]}
    return CoocData(nouns, verbs, freq, n)


def kl_divergence(p: np.ndarray, q: np.ndarray, eps: float = DEFAULT_KL_EPS) -> float:
    """KL divergence in bits of ``q`` from ``p``, clamping ``q`` below at eps.

    Zero only when the distributions agree on the support of ``p``; the clamp
    keeps the value finite where ``q`` has empty cells.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"distribution domains differ: {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(float(p.sum()) - 1.0) > 1e-6:
        raise ValueError(f"reference distribution sums to {p.sum()}, expected 1")
    mask = p > 0
    ratio = p[mask] / np.maximum(q[mask], eps)
    return float((p[mask] * np.log2(ratio)).sum())


@dataclass(frozen=True)
class ConvergenceRecord:
    """Outcome of clustering one sample under one criterion."""

    sample_size: int
    trial: int
    criterion: Criterion
    num_clusters: int
    kl: float

    def __post_init__(self):
        if self.num_clusters < 1:
            raise ValueError("cluster count must be at least 1")
        if self.kl < 0:
            raise ValueError("KL divergence cannot be negative")


@dataclass(frozen=True)
class AggregateRecord:
    sample_size: int
    criterion: Criterion
    mean_clusters: float
    mean_kl: float


def run_convergence_experiment(model: TrueModel, sizes: Sequence[int] = DEFAULT_SIZES,
                               trials: int = DEFAULT_TRIALS,
                               configs: Sequence[AnnealConfig] | None = None,
                               kl_eps: float = DEFAULT_KL_EPS) -> list[ConvergenceRecord]:
    """Sample, cluster, and score for every size x trial x config.

    One sample is drawn per (size, trial) and clustered once per config, so
    criteria are compared on identical data. All seeds are derived from the
    model seed (sampling) and each config seed (clustering), making the
    record list a pure function of the arguments, ordered by
    (size, trial, config).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly ascending")
    if configs is None:
        configs = (AnnealConfig(criterion=Criterion.MDL), AnnealConfig(criterion=Criterion.MLE))
    if not configs:
        raise ValueError("need at least one annealing config")

    truth = model.cells()
    verb_singletons = singleton_partition(model.verbs)
    records = []
    for si, size in enumerate(sizes):
        for trial in range(trials):
            data = sample(model, size, seed=derive_seed(derive_seed(model.seed, si), trial))
            for config in configs:
                run_seed = derive_seed(derive_seed(config.seed, si), trial)
                tree = build_tree(data, replace(config, seed=run_seed))
                estimated = fit(tree.leaf_partition(), verb_singletons, data)
                kl = kl_divergence(truth, cell_probs(estimated, model.nouns, model.verbs),
                                   eps=kl_eps)
                records.append(ConvergenceRecord(size, trial, config.criterion,
                                                 tree.leaf_count, kl))
    return records


def aggregate_records(records: Sequence[ConvergenceRecord]) -> list[AggregateRecord]:
    """Mean cluster count and KL per (size, criterion), in first-seen order."""
    groups: dict[tuple[int, Criterion], list[ConvergenceRecord]] = {}
    for record in records:
        groups.setdefault((record.sample_size, record.criterion), []).append(record)
    return [AggregateRecord(size, criterion,
                            sum(r.num_clusters for r in group) / len(group),
                            sum(r.kl for r in group) / len(group))
            for (size, criterion), group in groups.items()]


# ---------------------------------------------------------------------------
# True-model config files

_SECTIONS = ("[nouns]", "[verbs]", "[probs]")


def load_true_model(path, seed: int = 0) -> TrueModel:
    """Read a true-model TSV with [nouns], [verbs], and [probs] sections.

    The first two sections hold one tab-separated cluster per line; [probs]
    holds one row per noun cluster with one column per verb cluster.
    """
    noun_clusters: list[tuple[str, ...]] = []
    verb_clusters: list[tuple[str, ...]] = []
    prob_rows: list[tuple[float, ...]] = []
    section = None
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if stripped in _SECTIONS:
                section = stripped
                continue
            if section is None:
                raise ParseError(path, line_no, f"content before any section header: {stripped!r}")
            fields = [f.strip() for f in line.split("\t")]
            if any(not f for f in fields):
                raise ParseError(path, line_no, "empty field")
            if section == "[probs]":
                try:
                    prob_rows.append(tuple(float(f) for f in fields))
                except ValueError:
                    raise ParseError(path, line_no, "probability row must be numeric") from None
            elif section == "[nouns]":
                noun_clusters.append(tuple(fields))
            else:
                verb_clusters.append(tuple(fields))
    if not noun_clusters or not verb_clusters or not prob_rows:
        raise ValueError(f"{path}: missing [nouns], [verbs], or [probs] section")
    try:
        return TrueModel(tuple(noun_clusters), tuple(verb_clusters), tuple(prob_rows), seed=seed)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def dump_true_model(model: TrueModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("[nouns]\n")
        for cluster in model.noun_clusters:
            fh.write("\t".join(cluster) + "\n")
        fh.write("[verbs]\n")
        for cluster in model.verb_clusters:
            fh.write("\t".join(cluster) + "\n")
        fh.write("[probs]\n")
        for row in model.cluster_probs:
            fh.write("\t".join(repr(p) for p in row) + "\n")


def default_true_model(seed: int = 0) -> TrueModel:
    """The shipped 12-noun, 6-verb model with 4 noun and 3 verb clusters."""
    source = resources.files("mdlthesaurus").joinpath("data/default_true_model.tsv")
    with resources.as_file(source) as path:
        return load_true_model(path, seed=seed)
