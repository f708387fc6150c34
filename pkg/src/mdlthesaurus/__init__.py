"""Hierarchical word clustering by description-length minimization.

Builds binary thesaurus trees from verb-noun co-occurrence data with a
simulated-annealing search, learns tree-cut case-frame patterns over any
thesaurus (built or hand-made), and disambiguates PP attachment through
backoff chains. Submodules hold the full functional API; this package level
re-exports the main types, the scikit-learn style estimators, and the most
common entry points.
"""

__version__ = "0.1.0"

from .cluster import (
    AnnealConfig,
    ThesaurusTree,
    TreeNode,
    anneal_split,
    build_tree,
    dump_tree,
    exhaustive_split,
    load_tree,
    parse_tree,
    serialize_tree,
)
from .corpus import (
    Attachment,
    AttachmentTuple,
    CoocData,
    ParseError,
    build_cooc,
    dump_cooc,
    load_cooc,
    load_tuples,
    restrict,
)
from .estimators import AttachmentDisambiguator, ThesaurusClusterer
from .model import Criterion, DescriptionLength, PartitionModel
from .patterns import (
    AttachmentDecision,
    EvalReport,
    SlotSample,
    Stage,
    TreeCutPattern,
    cut_prob,
    decide,
    decide_chain,
    evaluate,
    learn_cut,
    learn_patterns,
    lexical_assoc,
    load_slot_samples,
)
from .synthetic import (
    TrueModel,
    default_true_model,
    kl_divergence,
    run_convergence_experiment,
)

__all__ = [
    "AnnealConfig",
    "Attachment",
    "AttachmentDecision",
    "AttachmentDisambiguator",
    "AttachmentTuple",
    "CoocData",
    "Criterion",
    "DescriptionLength",
    "EvalReport",
    "ParseError",
    "PartitionModel",
    "SlotSample",
    "Stage",
    "ThesaurusClusterer",
    "ThesaurusTree",
    "TreeCutPattern",
    "TreeNode",
    "TrueModel",
    "__version__",
    "anneal_split",
    "build_cooc",
    "build_tree",
    "cut_prob",
    "decide",
    "decide_chain",
    "default_true_model",
    "dump_cooc",
    "dump_tree",
    "evaluate",
    "exhaustive_split",
    "kl_divergence",
    "learn_cut",
    "learn_patterns",
    "lexical_assoc",
    "load_cooc",
    "load_slot_samples",
    "load_tree",
    "load_tuples",
    "parse_tree",
    "restrict",
    "run_convergence_experiment",
    "serialize_tree",
]
