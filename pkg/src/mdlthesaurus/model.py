"""Partition models over verb-noun co-occurrence data and their code lengths.

A model is a noun partition crossed with a verb partition. The joint cluster
probabilities are relative frequencies, and every word pair inside a cluster
shares the cluster's probability mass uniformly, which smooths unseen pairs
as a side effect of clustering. Code lengths are measured in bits (all
logarithms are base 2):

* model cost of one binary split decision over n nouns: ``n - 1``
* parameter cost: ``(k_n * k_v - 1) / 2 * log2(sample_size)``
* data cost: negative log-likelihood of the observed counts

Model selection compares ``l_par + l_dat`` (the model-cost term is the same
for every candidate of a given split decision); the maximum-likelihood
criterion compares ``l_dat`` alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import CoocData

__all__ = [
    "Criterion",
    "DescriptionLength",
    "PartitionModel",
    "cell_probs",
    "criterion_value",
    "data_dl",
    "fit",
    "model_dl",
    "param_dl",
    "singleton_partition",
    "total_dl",
    "word_prob",
]


class Criterion(enum.Enum):
    """Objective minimized when comparing candidate partitions."""

    MDL = "mdl"
    MLE = "mle"


def singleton_partition(words: Iterable[str]) -> tuple[tuple[str, ...], ...]:
    return tuple((w,) for w in words)


def _check_partition(partition: Sequence[Sequence[str]], universe: Sequence[str],
                     kind: str) -> tuple[tuple[str, ...], ...]:
    clusters = tuple(tuple(c) for c in partition)
    if not clusters or any(not c for c in clusters):
        raise ValueError(f"{kind} partition must consist of non-empty clusters")
    flat = [w for c in clusters for w in c]
    if len(flat) != len(set(flat)):
        raise ValueError(f"{kind} partition has overlapping clusters")
    if set(flat) != set(universe):
        raise ValueError(f"{kind} partition does not cover the vocabulary exactly")
    return clusters


@dataclass(frozen=True)
class PartitionModel:
    """A fitted noun-partition x verb-partition probability model."""

    noun_partition: tuple[tuple[str, ...], ...]
    verb_partition: tuple[tuple[str, ...], ...]
    cluster_prob: Mapping[tuple[int, int], float]

    def __post_init__(self):
        mass = sum(self.cluster_prob.values())
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"cluster probabilities sum to {mass}, expected 1")
        if any(p < 0 for p in self.cluster_prob.values()):
            raise ValueError("cluster probabilities must be non-negative")
        object.__setattr__(self, "_noun_cluster",
                           {n: i for i, c in enumerate(self.noun_partition) for n in c})
        object.__setattr__(self, "_verb_cluster",
                           {v: j for j, c in enumerate(self.verb_partition) for v in c})

    @property
    def k_n(self) -> int:
        return len(self.noun_partition)

    @property
    def k_v(self) -> int:
        return len(self.verb_partition)

    def noun_cluster(self, noun: str) -> int:
        try:
            return self._noun_cluster[noun]
        except KeyError:
            raise ValueError(f"unknown noun: {noun}") from None

    def verb_cluster(self, verb: str) -> int:
        try:
            return self._verb_cluster[verb]
        except KeyError:
            raise ValueError(f"unknown verb: {verb}") from None


def fit(noun_partition: Sequence[Sequence[str]], verb_partition: Sequence[Sequence[str]],
        data: CoocData) -> PartitionModel:
    """Estimate cluster probabilities as relative frequencies on ``data``."""
    nouns = _check_partition(noun_partition, data.nouns, "noun")
    verbs = _check_partition(verb_partition, data.verbs, "verb")
    if data.total <= 0:
        raise ValueError("cannot fit a model on data with no observations")
    noun_of = {n: i for i, c in enumerate(nouns) for n in c}
    verb_of = {v: j for j, c in enumerate(verbs) for v in c}
    counts: dict[tuple[int, int], int] = {}
    for (noun, verb), count in data.freq.items():
        key = (noun_of[noun], verb_of[verb])
        counts[key] = counts.get(key, 0) + count
    prob = {(i, j): counts.get((i, j), 0) / data.total
            for i in range(len(nouns)) for j in range(len(verbs))}
    return PartitionModel(nouns, verbs, prob)


def word_prob(model: PartitionModel, noun: str, verb: str) -> float:
    """Estimated probability of one (noun, verb) pair under the model."""
    i = model.noun_cluster(noun)
    j = model.verb_cluster(verb)
    cell = len(model.noun_partition[i]) * len(model.verb_partition[j])
    return model.cluster_prob[(i, j)] / cell


def cell_probs(model: PartitionModel, nouns: Sequence[str], verbs: Sequence[str]) -> np.ndarray:
    """Per-pair probabilities as an array aligned with the given orders."""
    out = np.empty((len(nouns), len(verbs)), dtype=float)
    for a, noun in enumerate(nouns):
        i = model.noun_cluster(noun)
        size_n = len(model.noun_partition[i])
        for b, verb in enumerate(verbs):
            j = model.verb_cluster(verb)
            out[a, b] = model.cluster_prob[(i, j)] / (size_n * len(model.verb_partition[j]))
    return out


def model_dl(num_nouns: int) -> float:
    """Bits to identify one of the 2**(n-1) binary partitions of n nouns."""
    if num_nouns < 1:
        raise ValueError("need at least one noun")
    return float(num_nouns - 1)


def param_dl(k_n: int, k_v: int, sample_size: int) -> float:
    """Parameter cost: half a log2(sample_size) per free parameter."""
    if k_n < 1 or k_v < 1:
        raise ValueError("partition sizes must be at least 1")
    if sample_size < 1:
        raise ValueError("parameter description length undefined for empty samples")
    return (k_n * k_v - 1) / 2 * math.log2(sample_size)


def _check_same_vocab(model: PartitionModel, data: CoocData) -> None:
    if set(model._noun_cluster) != set(data.nouns) or set(model._verb_cluster) != set(data.verbs):
        raise ValueError("model and data vocabularies differ")


def data_dl(model: PartitionModel, data: CoocData) -> float:
    """Negative log2-likelihood of the counts; zero-count pairs contribute 0."""
    _check_same_vocab(model, data)
    bits = 0.0
    for (noun, verb), count in data.freq.items():
        prob = word_prob(model, noun, verb)
        if prob <= 0.0:
            raise ValueError(f"observed pair ({noun}, {verb}) has probability 0 under the model")
        bits -= count * math.log2(prob)
    return bits


@dataclass(frozen=True)
class DescriptionLength:
    """Code-length breakdown in bits."""

    l_mod: float
    l_par: float
    l_dat: float

    def __post_init__(self):
        if self.l_mod < 0 or self.l_par < 0 or self.l_dat < 0:
            raise ValueError("description length components must be non-negative")

    @property
    def l_prime(self) -> float:
        """Comparison key for model selection: parameter cost plus data cost."""
        return self.l_par + self.l_dat

    @property
    def l_total(self) -> float:
        return self.l_mod + self.l_prime


def total_dl(model: PartitionModel, data: CoocData) -> DescriptionLength:
    return DescriptionLength(
        l_mod=model_dl(len(data.nouns)),
        l_par=param_dl(model.k_n, model.k_v, data.total),
        l_dat=data_dl(model, data),
    )


def criterion_value(model: PartitionModel, data: CoocData, criterion: Criterion) -> float:
    """Objective value of a fitted model on ``data`` under the chosen criterion."""
    if criterion is Criterion.MLE:
        return data_dl(model, data)
    return total_dl(model, data).l_prime
