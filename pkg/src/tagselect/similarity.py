"""Tag-to-tag similarity from co-occurrence counts.

The distance between two tags is a normalized log ratio of their joint and
marginal occurrence counts in a reference collection; similarity is its
exponential decay, which lands in [0, 1] with 1 meaning the tags always
occur together and 0 meaning they never do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import Vocabulary
from .errors import TagSelectError


def _pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, eq=False)
class CooccurrenceStats:
    """Occurrence counts over a reference collection.

    ``single[t]`` counts images carrying tag t, ``pair[(a, b)]`` (keys stored
    with a <= b) counts images carrying both, and ``total`` is the collection
    size.  A missing pair key means the tags never co-occur; a missing
    diagonal key defaults to the single count.
    """

    single: Mapping[str, int]
    pair: Mapping[tuple[str, str], int]
    total: int

    def __post_init__(self):
        if not isinstance(self.total, int) or self.total < 1:
            raise TagSelectError(f"collection size must be a positive integer, got {self.total!r}")
        single = dict(self.single)
        for t, c in single.items():
            if not isinstance(c, int) or c < 0:
                raise TagSelectError(f"occurrence count for {t!r} must be a non-negative integer")
            if c > self.total:
                raise TagSelectError(f"occurrence count for {t!r} exceeds collection size")
        pair: dict[tuple[str, str], int] = {}
        for key, c in self.pair.items():
            a, b = key
            norm = _pair_key(a, b)
            if norm in pair:
                raise TagSelectError(f"duplicate pair count for {norm!r}")
            if not isinstance(c, int) or c < 0:
                raise TagSelectError(f"pair count for {norm!r} must be a non-negative integer")
            for t in norm:
                if t not in single:
                    raise TagSelectError(f"pair count references unknown tag {t!r}")
            if a == b:
                if c != single[a]:
                    raise TagSelectError(
                        f"diagonal pair count for {a!r} disagrees with its single count"
                    )
            elif c > min(single[a], single[b]):
                raise TagSelectError(
                    f"pair count for {norm!r} exceeds one of its single counts"
                )
            pair[norm] = c
        object.__setattr__(self, "single", single)
        object.__setattr__(self, "pair", pair)

    def single_count(self, tag: str) -> int:
        return self.single.get(tag, 0)

    def pair_count(self, a: str, b: str) -> int:
        if a == b:
            return self.pair.get((a, a), self.single_count(a))
        return self.pair.get(_pair_key(a, b), 0)

    def has_tag(self, tag: str) -> bool:
        return self.single.get(tag, 0) > 0


def ngd(stats: CooccurrenceStats, a: str, b: str) -> float:
    """Normalized co-occurrence distance between two tags.

    Returns +inf when the tags never co-occur, 0 when one always implies
    the other.  Both tags must occur at least once and the collection must
    hold at least two images, otherwise the logs are meaningless.
    """
    fa = stats.single_count(a)
    fb = stats.single_count(b)
    if fa <= 0:
        raise TagSelectError(f"tag {a!r} has no occurrences; distance undefined")
    if fb <= 0:
        raise TagSelectError(f"tag {b!r} has no occurrences; distance undefined")
    if stats.total < 2:
        raise TagSelectError("collection must hold at least two images")
    fab = stats.pair_count(a, b)
    if fab == 0:
        return math.inf
    log_fa = math.log(fa)
    log_fb = math.log(fb)
    num = max(log_fa, log_fb) - math.log(fab)
    # Counts inconsistent with a hard subset relation can push the numerator
    # slightly negative; distance is clamped at 0.
    if num <= 0.0:
        return 0.0
    den = math.log(stats.total) - min(log_fa, log_fb)
    if den <= 0.0:
        return math.inf
    return num / den


def fcs(stats: CooccurrenceStats, a: str, b: str) -> float:
    """Similarity in [0, 1]: exponential decay of the co-occurrence distance."""
    return math.exp(-ngd(stats, a, b))


def pair_similarity(stats: CooccurrenceStats, a: str, b: str) -> float:
    """fcs with the degenerate cases folded in: a tag absent from the
    collection has similarity 0 to everything (and 1 to itself)."""
    if a == b:
        return 1.0
    if not stats.has_tag(a) or not stats.has_tag(b):
        return 0.0
    return fcs(stats, a, b)


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric tag similarity over a fixed tag order.

    ``missing`` lists tags that had no occurrences in the statistics; their
    off-diagonal similarities are 0.
    """

    tags: tuple[str, ...]
    values: np.ndarray
    missing: tuple[str, ...]

    def __post_init__(self):
        tags = tuple(self.tags)
        object.__setattr__(self, "tags", tags)
        object.__setattr__(self, "missing", tuple(self.missing))
        arr = np.array(self.values, dtype=np.float64)
        n = len(tags)
        if arr.shape != (n, n):
            raise TagSelectError(f"similarity matrix shape {arr.shape} is not {n}x{n}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(tags)})

    def index(self, tag: str) -> int:
        try:
            return self._index[tag]
        except KeyError:
            raise TagSelectError(f"tag {tag!r} not in similarity matrix") from None

    def value(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])


def similarity_matrix(stats: CooccurrenceStats, vocab: Vocabulary) -> SimilarityMatrix:
    """Dense pairwise similarity for all vocabulary tags.

    The diagonal is exactly 1.  Tags without occurrence counts are reported
    in ``missing`` and get 0 against every other tag.
    """
    tags = vocab.tags
    n = len(tags)
    values = np.zeros((n, n), dtype=np.float64)
    np.fill_diagonal(values, 1.0)
    present = [i for i, t in enumerate(tags) if stats.has_tag(t)]
    missing = tuple(t for t in tags if not stats.has_tag(t))
    for pos, i in enumerate(present):
        for j in present[pos + 1:]:
            # One computation per unordered pair keeps the matrix exactly
            # symmetric at the bit level.
            v = fcs(stats, tags[i], tags[j])
            values[i, j] = v
            values[j, i] = v
    return SimilarityMatrix(tags, values, missing)
