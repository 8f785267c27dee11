"""Shared data model: vocabulary partition, score tables, labels, selections.

Conventions used throughout the package:

* tag and image identifiers are non-empty strings without tabs or newlines;
* score matrices are float64 with one row per image and one column per tag,
  column order given by the vocabulary;
* every tie between tags is broken by ascending lexicographic order on the
  tag string, so all outputs are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import TagSelectError

SEEN = "seen"
NOVEL = "novel"

# Provenance labels for selected tags.
FROM_SEEN_THRESHOLDING = "from_seen_thresholding"
FROM_NOVEL_TOPK = "from_novel_topk"
FROM_FALLBACK = "from_fallback"
PROVENANCES = frozenset({FROM_SEEN_THRESHOLDING, FROM_NOVEL_TOPK, FROM_FALLBACK})


def _check_identifier(value: str, kind: str) -> None:
    if not isinstance(value, str) or not value:
        raise TagSelectError(f"{kind} must be a non-empty string, got {value!r}")
    if "\t" in value or "\n" in value or "\r" in value:
        raise TagSelectError(f"{kind} {value!r} contains tab or newline characters")


@dataclass(frozen=True)
class Vocabulary:
    """Ordered tag list partitioned into disjoint seen and novel subsets.

    ``tags`` fixes the column order of every score matrix; ``partition``
    maps each tag to ``"seen"`` or ``"novel"``.
    """

    tags: tuple[str, ...]
    partition: Mapping[str, str]

    def __post_init__(self):
        tags = tuple(self.tags)
        object.__setattr__(self, "tags", tags)
        if not tags:
            raise TagSelectError("vocabulary must contain at least one tag")
        for t in tags:
            _check_identifier(t, "tag")
        if len(set(tags)) != len(tags):
            raise TagSelectError("vocabulary contains duplicate tags")
        part = dict(self.partition)
        if set(part) != set(tags):
            raise TagSelectError("partition must label exactly the vocabulary tags")
        for t, side in part.items():
            if side not in (SEEN, NOVEL):
                raise TagSelectError(f"tag {t!r} has invalid partition label {side!r}")
        object.__setattr__(self, "partition", part)
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(tags)})
        object.__setattr__(self, "seen_tags", tuple(t for t in tags if part[t] == SEEN))
        object.__setattr__(self, "novel_tags", tuple(t for t in tags if part[t] == NOVEL))

    @classmethod
    def from_partition(cls, seen: Iterable[str], novel: Iterable[str]) -> "Vocabulary":
        seen = tuple(seen)
        novel = tuple(novel)
        tags = seen + novel
        part = {t: SEEN for t in seen}
        part.update({t: NOVEL for t in novel})
        if len(part) != len(tags):
            raise TagSelectError("seen and novel tag lists overlap or repeat")
        return cls(tags, part)

    def index(self, tag: str) -> int:
        try:
            return self._index[tag]
        except KeyError:
            raise TagSelectError(f"unknown tag {tag!r}") from None

    def __contains__(self, tag: str) -> bool:
        return tag in self._index

    def __len__(self) -> int:
        return len(self.tags)

    def is_seen(self, tag: str) -> bool:
        self.index(tag)
        return self.partition[tag] == SEEN


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Dense image-by-tag score matrix.

    The matrix is float64 and read-only after construction.  Structural
    problems (duplicate ids, shape mismatch) raise immediately; semantic
    problems such as non-finite entries are reported by validate_inputs so
    that damaged files can still be inspected.
    """

    images: tuple[str, ...]
    tags: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        images = tuple(self.images)
        tags = tuple(self.tags)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "tags", tags)
        for x in images:
            _check_identifier(x, "image id")
        for t in tags:
            _check_identifier(t, "tag")
        if len(set(images)) != len(images):
            raise TagSelectError("score table contains duplicate image ids")
        if len(set(tags)) != len(tags):
            raise TagSelectError("score table contains duplicate tags")
        arr = np.array(self.scores, dtype=np.float64)
        if arr.shape != (len(images), len(tags)):
            raise TagSelectError(
                f"score matrix shape {arr.shape} does not match "
                f"{len(images)} images x {len(tags)} tags"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)
        object.__setattr__(self, "_img_index", {x: i for i, x in enumerate(images)})
        object.__setattr__(self, "_tag_index", {t: j for j, t in enumerate(tags)})
        object.__setattr__(self, "_tags_arr", np.array(tags, dtype=object))

    @property
    def n_images(self) -> int:
        return len(self.images)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    def image_index(self, image: str) -> int:
        try:
            return self._img_index[image]
        except KeyError:
            raise TagSelectError(f"unknown image {image!r}") from None

    def tag_index(self, tag: str) -> int:
        try:
            return self._tag_index[tag]
        except KeyError:
            raise TagSelectError(f"unknown tag {tag!r}") from None

    def row(self, image: str) -> np.ndarray:
        return self.scores[self.image_index(image)]

    def score(self, image: str, tag: str) -> float:
        return float(self.scores[self.image_index(image), self.tag_index(tag)])

    def restrict(self, tags: Sequence[str]) -> "ScoreTable":
        """Column subset in the given order; image order is preserved."""
        cols = [self.tag_index(t) for t in tags]
        return ScoreTable(self.images, tuple(tags), self.scores[:, cols])


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Relevance labels over a coverage universe of tags.

    ``labels`` is int8 with 1 = relevant, 0 = irrelevant and -1 = undefined
    (the image was never judged for that tag).  ``coverage`` lists the tags
    over which labels may be defined, in a fixed order.
    """

    images: tuple[str, ...]
    coverage: tuple[str, ...]
    labels: np.ndarray

    def __post_init__(self):
        images = tuple(self.images)
        coverage = tuple(self.coverage)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "coverage", coverage)
        for x in images:
            _check_identifier(x, "image id")
        for t in coverage:
            _check_identifier(t, "tag")
        if len(set(images)) != len(images):
            raise TagSelectError("ground truth contains duplicate image ids")
        if len(set(coverage)) != len(coverage):
            raise TagSelectError("ground truth coverage contains duplicate tags")
        arr = np.array(self.labels, dtype=np.int8)
        if arr.shape != (len(images), len(coverage)):
            raise TagSelectError(
                f"label matrix shape {arr.shape} does not match "
                f"{len(images)} images x {len(coverage)} tags"
            )
        bad = ~np.isin(arr, (-1, 0, 1))
        if bad.any():
            raise TagSelectError("labels must be 1, 0 or -1 (undefined)")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)
        object.__setattr__(self, "_img_index", {x: i for i, x in enumerate(images)})
        object.__setattr__(self, "_tag_index", {t: j for j, t in enumerate(coverage)})

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[str, str, int]],
        coverage: Sequence[str] | None = None,
    ) -> "GroundTruth":
        """Build from (image, tag, relevant) triples.

        Image order and, when not given, coverage order follow first
        appearance.  Duplicate (image, tag) pairs are rejected.
        """
        pairs = list(pairs)
        images: list[str] = []
        img_index: dict[str, int] = {}
        tags: list[str] = []
        tag_index: dict[str, int] = {}
        if coverage is not None:
            tags = list(coverage)
            tag_index = {t: j for j, t in enumerate(tags)}
        cells: dict[tuple[int, int], int] = {}
        for image, tag, rel in pairs:
            if image not in img_index:
                img_index[image] = len(images)
                images.append(image)
            if tag not in tag_index:
                if coverage is not None:
                    raise TagSelectError(f"label tag {tag!r} outside declared coverage")
                tag_index[tag] = len(tags)
                tags.append(tag)
            key = (img_index[image], tag_index[tag])
            if key in cells:
                raise TagSelectError(f"duplicate label for ({image!r}, {tag!r})")
            cells[key] = 1 if rel else 0
        labels = np.full((len(images), len(tags)), -1, dtype=np.int8)
        for (i, j), v in cells.items():
            labels[i, j] = v
        return cls(tuple(images), tuple(tags), labels)

    def has_image(self, image: str) -> bool:
        return image in self._img_index

    def covers(self, tag: str) -> bool:
        return tag in self._tag_index

    def image_index(self, image: str) -> int:
        try:
            return self._img_index[image]
        except KeyError:
            raise TagSelectError(f"image {image!r} not present in ground truth") from None

    def label(self, image: str, tag: str) -> bool | None:
        """True/False when judged, None when the label is undefined."""
        i = self.image_index(image)
        j = self._tag_index.get(tag)
        if j is None:
            return None
        v = self.labels[i, j]
        return None if v < 0 else bool(v)

    def relevant_set(self, image: str) -> frozenset[str]:
        i = self.image_index(image)
        row = self.labels[i]
        return frozenset(self.coverage[j] for j in np.flatnonzero(row == 1))

    def defined_tags(self, image: str) -> frozenset[str]:
        i = self.image_index(image)
        row = self.labels[i]
        return frozenset(self.coverage[j] for j in np.flatnonzero(row >= 0))

    def has_full_coverage(self, image: str, tags: Iterable[str]) -> bool:
        """True when every listed tag carries a defined label for the image."""
        i = self.image_index(image)
        for t in tags:
            j = self._tag_index.get(t)
            if j is None or self.labels[i, j] < 0:
                return False
        return True

    def column(self, tag: str) -> np.ndarray:
        """Label column aligned with self.images (int8, -1 undefined)."""
        try:
            j = self._tag_index[tag]
        except KeyError:
            raise TagSelectError(f"tag {tag!r} not in ground truth coverage") from None
        return self.labels[:, j]

    def iter_pairs(self) -> Iterator[tuple[str, str, int]]:
        """Defined labels as (image, tag, 0/1), image-major in stored order."""
        for i, image in enumerate(self.images):
            row = self.labels[i]
            for j in np.flatnonzero(row >= 0):
                yield image, self.coverage[j], int(row[j])


@dataclass(frozen=True)
class SelectedTag:
    """A tag chosen for an image, with the reported score and where it
    came from (seen thresholding, novel extrapolation, or top-k fallback)."""

    tag: str
    score: float
    provenance: str

    def __post_init__(self):
        _check_identifier(self.tag, "tag")
        if self.provenance not in PROVENANCES:
            raise TagSelectError(f"invalid provenance {self.provenance!r}")
        object.__setattr__(self, "score", float(self.score))


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Per-image ordered tag selections."""

    images: tuple[str, ...]
    rows: Mapping[str, tuple[SelectedTag, ...]]

    def __post_init__(self):
        images = tuple(self.images)
        object.__setattr__(self, "images", images)
        if len(set(images)) != len(images):
            raise TagSelectError("selection result contains duplicate image ids")
        rows = dict(self.rows)
        if set(rows) != set(images):
            raise TagSelectError("selection rows must cover exactly the listed images")
        for image, row in rows.items():
            row = tuple(row)
            rows[image] = row
            tags = [st.tag for st in row]
            if len(set(tags)) != len(tags):
                raise TagSelectError(f"image {image!r} has duplicate selected tags")
        object.__setattr__(self, "rows", rows)

    def row(self, image: str) -> tuple[SelectedTag, ...]:
        try:
            return self.rows[image]
        except KeyError:
            raise TagSelectError(f"image {image!r} not present in selections") from None

    def tags(self, image: str) -> tuple[str, ...]:
        return tuple(st.tag for st in self.row(image))

    def tag_set(self, image: str) -> frozenset[str]:
        return frozenset(st.tag for st in self.row(image))


def validate_inputs(
    vocab: Vocabulary,
    table: ScoreTable,
    truth: GroundTruth | None = None,
) -> list[str]:
    """Cross-check a score table (and optional ground truth) against a
    vocabulary.  Returns a list of human-readable violations; empty means
    consistent.  Unlike the constructors this never raises: it is meant for
    inspecting suspect inputs.
    """
    violations: list[str] = []
    vocab_set = set(vocab.tags)
    table_set = set(table.tags)
    for t in table.tags:
        if t not in vocab_set:
            violations.append(f"score table tag {t!r} not in vocabulary")
    for t in vocab.tags:
        if t not in table_set:
            violations.append(f"vocabulary tag {t!r} missing from score table")
    if table_set == vocab_set and table.tags != vocab.tags:
        violations.append("score table column order differs from vocabulary order")
    bad = ~np.isfinite(table.scores)
    for i, j in zip(*np.nonzero(bad)):
        violations.append(
            f"non-finite score for image {table.images[i]!r}, tag {table.tags[j]!r}"
        )
    if truth is not None:
        for t in truth.coverage:
            if t not in vocab_set:
                violations.append(f"ground truth labels tag {t!r} absent from vocabulary")
        img_set = set(table.images)
        for x in truth.images:
            if x not in img_set:
                violations.append(f"ground truth image {x!r} missing from score table")
    return violations


def rank_tags(table: ScoreTable, image: str) -> list[str]:
    """All tags of the table ranked by descending score; ties broken by
    ascending tag string so the ranking is a deterministic total order."""
    row = table.row(image)
    order = np.lexsort((table._tags_arr, -row))
    return [table.tags[i] for i in order]
