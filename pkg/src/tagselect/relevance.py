"""Weak-supervision relevance scoring used to assemble positive training
sets: search-result triplet scoring, click-count matching, and the
semantic-field score built on tag similarity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import TagSelectError
from .similarity import CooccurrenceStats, pair_similarity

ENGINES = ("google", "yahoo", "bing")
DEFAULT_ENGINE_WEIGHTS: dict[str, float] = {"google": 1.0, "yahoo": 0.5, "bing": 0.5}


def _normalize(text: str) -> str:
    """Matching normalization: case-fold and trim surrounding whitespace."""
    return text.casefold().strip()


@dataclass(frozen=True)
class SearchHit:
    """One search result: the query that surfaced the image, the rank it
    appeared at, and which engine returned it."""

    query: str
    rank: int
    engine: str

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise TagSelectError(f"rank must be a positive integer, got {self.rank!r}")
        engine = self.engine.casefold()
        if engine not in ENGINES:
            raise TagSelectError(f"unknown search engine {self.engine!r}")
        object.__setattr__(self, "engine", engine)


@dataclass(frozen=True)
class SearchRecord:
    image: str
    hits: tuple[SearchHit, ...]

    def __post_init__(self):
        object.__setattr__(self, "hits", tuple(self.hits))


@dataclass(frozen=True)
class ClickRecord:
    image: str
    query: str
    clicks: int

    def __post_init__(self):
        if not isinstance(self.clicks, int) or self.clicks < 0:
            raise TagSelectError(f"clicks must be a non-negative integer, got {self.clicks!r}")


@dataclass(frozen=True)
class TaggedImage:
    image: str
    user_tags: tuple[str, ...]

    def __post_init__(self):
        tags = tuple(self.user_tags)
        if not tags:
            raise TagSelectError("a tagged image must carry at least one user tag")
        if len(set(tags)) != len(tags):
            raise TagSelectError("user tags must be unique")
        object.__setattr__(self, "user_tags", tags)


def search_relevance(
    record: SearchRecord,
    tag: str,
    engine_weights: Mapping[str, float] | None = None,
) -> float:
    """Sum over the record's hits of w(engine) / sqrt(rank) for hits whose
    query matches the tag.  Matching is case-folded, whitespace-trimmed
    equality.  Engine weights default to 1 for google and 0.5 for the rest."""
    if engine_weights is None:
        engine_weights = DEFAULT_ENGINE_WEIGHTS
    else:
        missing = [e for e in ENGINES if e not in engine_weights]
        if missing:
            raise TagSelectError(f"engine weights missing for {missing}")
    target = _normalize(tag)
    total = 0.0
    for hit in record.hits:
        if _normalize(hit.query) == target:
            total += engine_weights[hit.engine] / math.sqrt(hit.rank)
    return total


def click_relevance(record: ClickRecord, tag: str) -> float:
    """The record's click count when its query matches the tag, else 0."""
    if _normalize(record.query) == _normalize(tag):
        return float(record.clicks)
    return 0.0


def semantic_field(image: TaggedImage, tag: str, stats: CooccurrenceStats) -> float:
    """Mean similarity between the tag and the image's other user tags.

    The tag must be one the user actually assigned.  An image whose only
    tag is the one being scored gets 0.  Tags absent from the statistics
    contribute similarity 0 rather than erroring, since user tag sets
    routinely contain out-of-collection words.
    """
    if tag not in image.user_tags:
        raise TagSelectError(f"tag {tag!r} was not assigned to image {image.image!r}")
    others = [u for u in image.user_tags if u != tag]
    if not others:
        return 0.0
    return sum(pair_similarity(stats, tag, u) for u in others) / len(others)


@dataclass(frozen=True)
class TopPositives:
    """Images picked as positive examples; ``short`` flags that fewer than
    the requested number were available."""

    images: tuple[str, ...]
    short: bool


def top_positives(scored: Iterable[tuple[str, float]], n: int = 1000) -> TopPositives:
    """The n highest-relevance images, ties broken by ascending image id."""
    if not isinstance(n, int) or n < 1:
        raise TagSelectError(f"n must be a positive integer, got {n!r}")
    items = list(scored)
    items.sort(key=lambda pair: (-pair[1], pair[0]))
    picked = tuple(image for image, _ in items[:n])
    return TopPositives(picked, short=len(items) < n)
