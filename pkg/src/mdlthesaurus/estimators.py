"""Scikit-learn style wrappers around the clustering and disambiguation core."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError

from .cluster import AnnealConfig, build_tree
from .model import Criterion
from .patterns import (
    DefaultStage,
    LexicalAssocStage,
    Stage,
    ThesaurusStage,
    decide_all,
    evaluate,
    learn_patterns,
)
from .validation import as_attachment_tuples, as_cooc_data, as_slot_samples, as_tree

__all__ = ["AttachmentDisambiguator", "ThesaurusClusterer"]


class ThesaurusClusterer(ClusterMixin, BaseEstimator):
    """Hierarchical divisive word clustering over co-occurrence counts.

    Fitting grows a binary thesaurus tree by simulated annealing, splitting
    while the chosen criterion keeps improving. The flat clustering exposed
    through ``labels_`` is the tree's leaf partition.

    Parameters
    ----------
    criterion : {"mdl", "mle"}, default="mdl"
        Split objective: description length (parameter cost plus data cost)
        or data cost alone.
    seed : int, default=0
        Root seed; all randomness in the run derives from it.
    t_init : float, default=1.0
        Initial annealing temperature.
    cool : float, default=0.9
        Temperature multiplier applied after each improving trial window.
    window_mult : int, default=10
        Trials per window, as a multiple of the number of nouns being split.

    Attributes
    ----------
    tree_ : ThesaurusTree
        The learned hierarchy.
    leaves_ : tuple of tuple of str
        Leaf noun clusters.
    labels_ : ndarray of shape (n_nouns,)
        Leaf index per noun, aligned with ``nouns_``.
    nouns_ : tuple of str
        Nouns in input order.
    """

    def __init__(self, criterion="mdl", seed=0, t_init=1.0, cool=0.9, window_mult=10):
        self.criterion = criterion
        self.seed = seed
        self.t_init = t_init
        self.cool = cool
        self.window_mult = window_mult

    def _config(self) -> AnnealConfig:
        return AnnealConfig(seed=self.seed, t_init=self.t_init, cool=self.cool,
                            window_mult=self.window_mult,
                            criterion=Criterion(self.criterion))

    def fit(self, X, y=None):
        """Grow the tree from co-occurrence data (CoocData, path, or records)."""
        data = as_cooc_data(X)
        config = self._config()
        self.tree_ = build_tree(data, config)
        self.nouns_ = data.nouns
        self.leaves_ = self.tree_.leaf_partition()
        index = {noun: i for i, leaf in enumerate(self.leaves_) for noun in leaf}
        self.labels_ = np.array([index[noun] for noun in data.nouns], dtype=np.int64)
        return self


class AttachmentDisambiguator(BaseEstimator):
    """PP-attachment disambiguation through a backoff chain of deciders.

    Parameters
    ----------
    tree : ThesaurusTree or path, optional
        Automatically built thesaurus for the ``"auto"`` stage.
    external_tree : ThesaurusTree or path, optional
        Hand-made thesaurus for the ``"external"`` stage; same format and
        machinery as ``tree``.
    assoc : CoocData or path, optional
        (word, prep) counts for the ``"la"`` lexical-association stage.
    stages : sequence of str, default=("auto", "default")
        Backoff order; members of {"auto", "external", "la", "default"}.

    Fitting learns tree-cut patterns from slot samples for every thesaurus
    stage in the chain (both thesauri learn from the same samples).
    """

    def __init__(self, tree=None, external_tree=None, assoc=None,
                 stages=("auto", "default")):
        self.tree = tree
        self.external_tree = external_tree
        self.assoc = assoc
        self.stages = stages

    def fit(self, X, y=None):
        """Learn patterns from slot samples (SlotSamples, path, or records)."""
        samples = as_slot_samples(X)
        chain = []
        for name in self.stages:
            try:
                stage = Stage(name)
            except ValueError:
                raise ValueError(f"unknown stage name: {name!r}") from None
            if stage is Stage.AUTO_THESAURUS:
                if self.tree is None:
                    raise ValueError("stage 'auto' requires the tree parameter")
                tree = as_tree(self.tree)
                self.patterns_ = learn_patterns(tree, samples)
                chain.append(ThesaurusStage(tree, self.patterns_, Stage.AUTO_THESAURUS))
            elif stage is Stage.EXTERNAL_THESAURUS:
                if self.external_tree is None:
                    raise ValueError("stage 'external' requires the external_tree parameter")
                tree = as_tree(self.external_tree)
                self.external_patterns_ = learn_patterns(tree, samples)
                chain.append(ThesaurusStage(tree, self.external_patterns_,
                                            Stage.EXTERNAL_THESAURUS))
            elif stage is Stage.LEXICAL_ASSOC:
                if self.assoc is None:
                    raise ValueError("stage 'la' requires the assoc parameter")
                chain.append(LexicalAssocStage(as_cooc_data(self.assoc)))
            elif stage is Stage.DEFAULT:
                chain.append(DefaultStage())
            else:
                raise ValueError(f"stage {name!r} cannot appear in a chain")
        if not chain:
            raise ValueError("stages must not be empty")
        self.chain_ = tuple(chain)
        return self

    def _check_fitted(self):
        if not hasattr(self, "chain_"):
            raise NotFittedError("this AttachmentDisambiguator is not fitted; call fit first")

    def decide(self, X):
        """Full decisions (verdict, stage, probabilities) for each tuple."""
        self._check_fitted()
        return decide_all(as_attachment_tuples(X), self.chain_)

    def predict(self, X):
        """Verdict tokens per tuple: ``"V"``, ``"N"``, or ``"NONE"``."""
        return np.array([d.verdict.value for d in self.decide(X)])

    def evaluate(self, X):
        """Coverage/accuracy report against the tuples' gold labels."""
        self._check_fitted()
        return evaluate(as_attachment_tuples(X), self.chain_)
