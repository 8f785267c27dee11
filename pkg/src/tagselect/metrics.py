"""Image-level evaluation: per-image F of the selected tag set, average
precision of the tag ranking, and their corpus means."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import GroundTruth, SelectionResult
from .errors import TagSelectError


@dataclass(frozen=True)
class ImageEval:
    precision: float
    recall: float
    f: float
    ap: float


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Per-image metrics plus corpus means.

    ``mf`` and ``map`` average F and AP over the included images only;
    ``excluded`` lists images dropped for missing ground truth, incomplete
    coverage, or an empty relevant set.
    """

    per_image: Mapping[str, ImageEval]
    mf: float
    map: float
    excluded: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_image", dict(self.per_image))
        object.__setattr__(self, "excluded", tuple(self.excluded))

    @property
    def n_included(self) -> int:
        return len(self.per_image)

    @property
    def n_excluded(self) -> int:
        return len(self.excluded)

    def to_dict(self, per_image: bool = False) -> dict:
        d = {
            "mf": self.mf,
            "map": self.map,
            "n_included": self.n_included,
            "n_excluded": self.n_excluded,
            "excluded": list(self.excluded),
        }
        if per_image:
            d["per_image"] = {
                x: {"precision": e.precision, "recall": e.recall, "f": e.f, "ap": e.ap}
                for x, e in self.per_image.items()
            }
        return d


def f_image(relevant: Iterable[str], predicted: Iterable[str]) -> tuple[float, float, float]:
    """Precision, recall and F1 of a predicted tag set against the relevant
    set.  An empty prediction scores 0; the relevant set must be non-empty
    (such images are excluded upstream)."""
    r = frozenset(relevant)
    p = frozenset(predicted)
    if not r:
        raise TagSelectError("relevant set is empty; image must be excluded upstream")
    hit = len(r & p)
    precision = hit / len(p) if p else 0.0
    recall = hit / len(r)
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)


def ap_image(relevant: Iterable[str], ranked: Sequence[str]) -> float:
    """Average precision of a tag ranking: mean over the relevant ranks of
    the precision at that rank, normalized by the relevant-set size."""
    r = frozenset(relevant)
    if not r:
        raise TagSelectError("relevant set is empty; image must be excluded upstream")
    seen = set()
    hits = 0
    acc = 0.0
    for i, t in enumerate(ranked, start=1):
        if t in seen:
            raise TagSelectError(f"ranking contains duplicate tag {t!r}")
        seen.add(t)
        if t in r:
            hits += 1
            acc += hits / i
    return acc / len(r)


def evaluate(
    truth: GroundTruth,
    selections: SelectionResult,
    rankings: Mapping[str, Sequence[str]],
    require_full_coverage: bool = True,
) -> EvaluationReport:
    """Score per-image selections and rankings against ground truth.

    Each image's ranking defines the tag universe it is judged over.  With
    ``require_full_coverage`` (the default) an image is excluded unless every
    universe tag carries a defined label; this mirrors dropping test images
    without full ground truth.  With it off, undefined tags are masked out of
    both the ranking and the prediction set instead.  Images with an empty
    relevant set are always excluded.  Corpus means run over included images.
    """
    per_image: dict[str, ImageEval] = {}
    excluded: list[str] = []
    for x in selections.images:
        try:
            universe = list(rankings[x])
        except KeyError:
            raise TagSelectError(f"no ranking given for image {x!r}") from None
        if not truth.has_image(x):
            excluded.append(x)
            continue
        predicted = selections.tag_set(x)
        if require_full_coverage:
            if not truth.has_full_coverage(x, universe):
                excluded.append(x)
                continue
            judged = universe
        else:
            judged = [t for t in universe if truth.label(x, t) is not None]
            predicted = frozenset(t for t in predicted if truth.label(x, t) is not None)
        relevant = frozenset(t for t in judged if truth.label(x, t))
        if not relevant:
            excluded.append(x)
            continue
        precision, recall, f = f_image(relevant, predicted)
        ap = ap_image(relevant, judged)
        per_image[x] = ImageEval(precision, recall, f, ap)
    if not per_image:
        raise TagSelectError("no evaluable image: every image lacks usable ground truth")
    mf = sum(e.f for e in per_image.values()) / len(per_image)
    mean_ap = sum(e.ap for e in per_image.values()) / len(per_image)
    return EvaluationReport(per_image, mf, mean_ap, tuple(excluded))
