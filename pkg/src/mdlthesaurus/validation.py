"""Input coercion helpers so estimators accept paths, records, or built objects."""

from __future__ import annotations

import os
from typing import Iterable

from .cluster import ThesaurusTree, load_tree
from .corpus import Attachment, AttachmentTuple, CoocData, build_cooc, load_cooc, load_tuples
from .patterns import SlotSample, load_slot_samples

__all__ = ["as_attachment_tuples", "as_cooc_data", "as_slot_samples", "as_tree"]

_GOLD = {"V": Attachment.VERB, "N": Attachment.NOUN1,
         Attachment.VERB: Attachment.VERB, Attachment.NOUN1: Attachment.NOUN1}


def _is_path(obj) -> bool:
    return isinstance(obj, (str, os.PathLike))


def as_cooc_data(X) -> CoocData:
    """Accept a CoocData, a TSV path, or (verb, noun[, count]) records."""
    if isinstance(X, CoocData):
        return X
    if _is_path(X):
        return load_cooc(X)
    try:
        entries = [(r[0], r[1], int(r[2]) if len(r) > 2 else 1) for r in X]
    except (TypeError, IndexError):
        raise TypeError(
            "expected CoocData, a file path, or (verb, noun[, count]) records") from None
    return build_cooc(entries)


def as_tree(obj) -> ThesaurusTree:
    """Accept a ThesaurusTree or a path to a serialized tree."""
    if isinstance(obj, ThesaurusTree):
        return obj
    if _is_path(obj):
        return load_tree(obj)
    raise TypeError("expected ThesaurusTree or a file path")


def as_slot_samples(obj) -> list[SlotSample]:
    """Accept SlotSamples, a TSV path, or (head, prep, filler[, count]) records."""
    if _is_path(obj):
        return load_slot_samples(obj)
    samples = []
    for record in obj:
        if isinstance(record, SlotSample):
            samples.append(record)
        else:
            head, prep, filler = record[:3]
            count = int(record[3]) if len(record) > 3 else 1
            samples.append(SlotSample(head, prep, filler, count))
    return samples


def as_attachment_tuples(obj) -> list[AttachmentTuple]:
    """Accept AttachmentTuples, a TSV path, or (verb, noun1, prep, noun2, gold) records."""
    if _is_path(obj):
        return load_tuples(obj)
    tuples = []
    for record in obj:
        if isinstance(record, AttachmentTuple):
            tuples.append(record)
        else:
            verb, noun1, prep, noun2, gold = record
            tuples.append(AttachmentTuple(verb, noun1, prep, noun2, _GOLD[gold]))
    return tuples
