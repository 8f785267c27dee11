"""The named tag-selection strategies compared against each other: fixed
top-k, batch-statistic thresholds, reconstructed thresholds, hybrids of
learned and reconstructed thresholds, and the adaptive method.

Provenance flags follow the selection mechanism: thresholded picks carry
from_seen_thresholding (also on novel columns in the full-vocabulary
baselines), extrapolated novel picks from_novel_topk, and top-k prefixes
from_fallback.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import (
    FROM_SEEN_THRESHOLDING,
    GroundTruth,
    ScoreTable,
    SelectedTag,
    SelectionResult,
    Vocabulary,
    rank_tags,
)
from .errors import TagSelectError
from .metrics import evaluate
from .selection import AdaptiveConfig, refine_novel_scores, select_adaptive, select_topk
from .similarity import SimilarityMatrix
from .thresholds import ThresholdModel, predict_threshold, tag_stats

STRATEGY_NAMES = (
    "top_k",
    "mu_sigma",
    "lsq",
    "hybrid_tau_musigma",
    "hybrid_tau_lsq",
    "adaptive",
)

_SHARED_MAP_ATOL = 1e-12


@dataclass(frozen=True)
class StrategySpec:
    """One comparison row: a strategy name plus its parameters."""

    name: str
    k: int = 5
    w: float = 0.5
    refine: bool = False

    def __post_init__(self):
        if self.name not in STRATEGY_NAMES:
            raise TagSelectError(
                f"unknown strategy {self.name!r}; valid names: {', '.join(STRATEGY_NAMES)}"
            )

    def describe(self) -> str:
        if self.name == "top_k":
            return f"top_{self.k}"
        if self.name == "adaptive":
            suffix = f"_refined_w{self.w:g}" if self.refine else ""
            return f"adaptive{suffix}"
        return self.name


def table1_strategies(k: int = 5, w: float = 0.5, refine: bool = False) -> tuple[StrategySpec, ...]:
    """All six strategies in their customary comparison order."""
    return tuple(StrategySpec(name, k=k, w=w, refine=refine) for name in STRATEGY_NAMES)


def _map_images(fn: Callable[[str], tuple], images: Sequence[str], jobs: int) -> list:
    if jobs <= 1:
        return [fn(x) for x in images]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, images))


def _threshold_rows(
    table: ScoreTable, thresholds: np.ndarray
) -> dict[str, tuple[SelectedTag, ...]]:
    """Vectorized strict-threshold selection over all table columns."""
    mask = table.scores > thresholds[None, :]
    rows: dict[str, tuple[SelectedTag, ...]] = {}
    tags = table.tags
    for i, image in enumerate(table.images):
        idx = np.flatnonzero(mask[i])
        row = table.scores[i]
        ordered = sorted(idx, key=lambda j: (-row[j], tags[j]))
        rows[image] = tuple(
            SelectedTag(tags[j], float(row[j]), FROM_SEEN_THRESHOLDING) for j in ordered
        )
    return rows


def _require_model(spec: StrategySpec, model: ThresholdModel | None) -> ThresholdModel:
    if model is None:
        raise TagSelectError(f"strategy {spec.name!r} requires a threshold model")
    return model


def run_strategy(
    spec: StrategySpec,
    table: ScoreTable,
    vocab: Vocabulary,
    model: ThresholdModel | None = None,
    sim: SimilarityMatrix | None = None,
    cfg: AdaptiveConfig | None = None,
    jobs: int = 1,
) -> SelectionResult:
    """Run one strategy over every image of a vocabulary-aligned table.

    The statistic-based thresholds (mu_sigma, lsq, and the hybrids' novel
    side) are computed on the batch being annotated, as they need no labels;
    learned thresholds and lsq coefficients come from the model, trained
    elsewhere.  ``cfg`` overrides the adaptive knobs derived from ``spec``.
    """
    if table.tags != vocab.tags:
        raise TagSelectError("score table columns must match the vocabulary order")
    if cfg is None:
        cfg = AdaptiveConfig(fallback_k=spec.k, refine=spec.refine, w=spec.w)

    if spec.name == "top_k":
        results = _map_images(lambda x: select_topk(table, x, spec.k), table.images, jobs)
        return SelectionResult(table.images, dict(zip(table.images, results)))

    if spec.name == "adaptive":
        model = _require_model(spec, model)
        if cfg.refine and sim is None:
            raise TagSelectError("adaptive refinement requires a similarity matrix")
        results = _map_images(
            lambda x: select_adaptive(table, x, vocab, model, sim, cfg),
            table.images,
            jobs,
        )
        return SelectionResult(table.images, dict(zip(table.images, results)))

    batch_stats = tag_stats(table)
    if spec.name in ("mu_sigma", "lsq"):
        if spec.name == "lsq":
            batch_model = replace(_require_model(spec, model), stats=batch_stats)
        else:
            batch_model = ThresholdModel(tau={}, stats=batch_stats)
        mode = spec.name
        thr = np.array(
            [predict_threshold(batch_model, t, mode) for t in table.tags],
            dtype=np.float64,
        )
        return SelectionResult(table.images, _threshold_rows(table, thr))

    # Hybrid rows: learned thresholds where available, batch-statistic
    # predictions for novel (and untrainable seen) tags.
    model = _require_model(spec, model)
    batch_model = replace(model, stats=batch_stats)
    mode = "mu_sigma" if spec.name == "hybrid_tau_musigma" else "lsq"
    thr = np.array(
        [
            model.tau[t] if t in model.tau else predict_threshold(batch_model, t, mode)
            for t in table.tags
        ],
        dtype=np.float64,
    )
    return SelectionResult(table.images, _threshold_rows(table, thr))


@dataclass(frozen=True)
class StrategyRow:
    spec: StrategySpec
    mf: float
    map: float
    mean_selected: float
    n_excluded: int

    def to_dict(self) -> dict:
        return {
            "strategy": self.spec.name,
            "label": self.spec.describe(),
            "k": self.spec.k,
            "w": self.spec.w,
            "refine": self.spec.refine,
            "mf": self.mf,
            "map": self.map,
            "mean_selected": self.mean_selected,
            "n_excluded": self.n_excluded,
        }


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    rows: tuple[StrategyRow, ...]

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    def format_table(self) -> str:
        header = f"{'strategy':<24}{'mf':>10}{'map':>10}{'mean_tags':>12}{'excluded':>10}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.spec.describe():<24}{r.mf:>10.4f}{r.map:>10.4f}"
                f"{r.mean_selected:>12.2f}{r.n_excluded:>10}"
            )
        return "\n".join(lines)


def _refined_rankings(
    table: ScoreTable,
    vocab: Vocabulary,
    model: ThresholdModel,
    sim: SimilarityMatrix,
    w: float,
) -> dict[str, list[str]]:
    """Full-vocabulary rankings where novel scores are refined per image.

    Images whose seen selection is empty keep their raw ranking, matching
    the fallback path of the adaptive strategy.
    """
    pool = [t for t in vocab.seen_tags if t in model.tau]
    tau = np.array([model.tau[t] for t in pool], dtype=np.float64)
    pool_idx = np.array([table.tag_index(t) for t in pool], dtype=np.intp)
    rankings: dict[str, list[str]] = {}
    for x in table.images:
        row = table.row(x)
        a_mask = row[pool_idx] > tau
        if not a_mask.any():
            rankings[x] = rank_tags(table, x)
            continue
        a_tags = [pool[j] for j in np.flatnonzero(a_mask)]
        refined = refine_novel_scores(table, x, vocab, a_tags, model, sim, w)
        merged = {t: float(row[table.tag_index(t)]) for t in vocab.seen_tags}
        merged.update(refined)
        rankings[x] = sorted(vocab.tags, key=lambda t: (-merged[t], t))
    return rankings


def compare(
    strategies: Sequence[StrategySpec],
    table: ScoreTable,
    truth: GroundTruth,
    vocab: Vocabulary,
    model: ThresholdModel | None = None,
    sim: SimilarityMatrix | None = None,
    jobs: int = 1,
    refined_rankings: bool = False,
) -> ComparisonReport:
    """Evaluate several strategies on one table with shared rankings.

    All strategies are judged on identical raw rankings, so their MAP values
    must coincide (selection cannot alter ranking quality); this is asserted
    to a 1e-12 tolerance.  With ``refined_rankings``, adaptive strategies
    that refine scores are instead judged on per-image refined rankings and
    are exempt from the shared-MAP assertion.
    """
    if not strategies:
        raise TagSelectError("compare needs at least one strategy")
    raw_rankings = {x: rank_tags(table, x) for x in table.images}
    rows = []
    shared_maps = []
    for spec in strategies:
        selections = run_strategy(spec, table, vocab, model, sim, jobs=jobs)
        uses_refined = refined_rankings and spec.name == "adaptive" and spec.refine
        if uses_refined:
            if model is None or sim is None:
                raise TagSelectError("refined rankings require a model and similarity matrix")
            rankings = _refined_rankings(table, vocab, model, sim, spec.w)
        else:
            rankings = raw_rankings
        report = evaluate(truth, selections, rankings)
        mean_selected = (
            sum(len(selections.row(x)) for x in selections.images) / len(selections.images)
        )
        rows.append(
            StrategyRow(spec, report.mf, report.map, mean_selected, report.n_excluded)
        )
        if not uses_refined:
            shared_maps.append(report.map)
    if shared_maps:
        spread = max(shared_maps) - min(shared_maps)
        if spread > _SHARED_MAP_ATOL:
            raise TagSelectError(
                f"strategies disagree on MAP by {spread!r} despite shared rankings"
            )
    return ComparisonReport(tuple(rows))
