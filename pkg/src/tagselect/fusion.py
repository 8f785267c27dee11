"""Linear late fusion of several score tables, with weights learned by
coordinate ascent against a selection-quality objective on labeled data."""

from __future__ import annotations

from dataclasses import dataclass
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
from .selection import select_by_threshold
from .thresholds import learn_all_thresholds

_WEIGHT_ATOL = 1e-9
_SWEEP_TOL = 1e-9

SelectionStrategy = Callable[[ScoreTable], SelectionResult]


@dataclass(frozen=True)
class FusionModel:
    """Learned simplex weights over the fused tables.

    ``history`` holds the objective after initialization and after each
    sweep; it is non-decreasing because only strict improvements are kept.
    """

    weights: tuple[float, ...]
    objective_name: str
    history: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        object.__setattr__(self, "history", tuple(float(v) for v in self.history))

    @property
    def objective(self) -> float:
        return self.history[-1]

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "objective": self.objective_name,
            "history": list(self.history),
        }


def _check_weights(weights: Sequence[float], m: int) -> np.ndarray:
    w = np.array([float(v) for v in weights], dtype=np.float64)
    if w.shape != (m,):
        raise TagSelectError(f"expected {m} weights, got {w.shape[0]}")
    if not np.isfinite(w).all() or (w < 0).any():
        raise TagSelectError("weights must be finite and non-negative")
    if abs(float(w.sum()) - 1.0) > _WEIGHT_ATOL:
        raise TagSelectError(f"weights must sum to 1, got {float(w.sum())!r}")
    return w


def fuse(tables: Sequence[ScoreTable], weights: Sequence[float]) -> ScoreTable:
    """Elementwise weighted sum of score tables sharing images and tags."""
    if not tables:
        raise TagSelectError("fusion needs at least one table")
    first = tables[0]
    for other in tables[1:]:
        if other.images != first.images or other.tags != first.tags:
            raise TagSelectError("fused tables must share images and tag order")
    w = _check_weights(weights, len(tables))
    acc = w[0] * tables[0].scores
    for wi, table in zip(w[1:], tables[1:]):
        acc = acc + wi * table.scores
    return ScoreTable(first.images, first.tags, acc)


def threshold_selection_strategy(
    truth: GroundTruth, vocab: Vocabulary
) -> SelectionStrategy:
    """The default fusion objective's selector: learn per-tag thresholds on
    the fused table and keep the seen tags that clear them."""

    def strategy(table: ScoreTable) -> SelectionResult:
        model = learn_all_thresholds(table, truth, vocab, fit_coeffs=False)
        trainable = list(model.tau)
        rows = {}
        for x in table.images:
            row = table.row(x)
            chosen = select_by_threshold(table, x, model.tau, trainable)
            ordered = sorted(chosen, key=lambda t: (-row[table.tag_index(t)], t))
            rows[x] = tuple(
                SelectedTag(t, float(row[table.tag_index(t)]), FROM_SEEN_THRESHOLDING)
                for t in ordered
            )
        return SelectionResult(table.images, rows)

    return strategy


def _objective(
    tables: Sequence[ScoreTable],
    weights: np.ndarray,
    truth: GroundTruth,
    strategy: SelectionStrategy,
    coverage: list[str],
    objective: str,
) -> float:
    fused = fuse(tables, weights)
    selections = strategy(fused)
    judged = fused.restrict(coverage)
    rankings = {x: rank_tags(judged, x) for x in selections.images}
    # Training labels are typically incomplete, so the objective masks each
    # image down to its defined labels instead of demanding full coverage.
    report = evaluate(truth, selections, rankings, require_full_coverage=False)
    return report.mf if objective == "mf" else report.map


def learn_weights(
    tables: Sequence[ScoreTable],
    truth: GroundTruth,
    vocab: Vocabulary,
    selection_strategy: SelectionStrategy | None = None,
    objective: str = "mf",
    grid_step: float = 0.05,
    max_sweeps: int = 20,
) -> FusionModel:
    """Coordinate ascent over simplex weights, starting from uniform.

    Each sweep visits the coordinates in index order; for each it tries the
    grid {0, grid_step, ..., 1}, renormalizing the remaining mass over the
    other coordinates proportionally (equal split when that mass is zero),
    and keeps the best strict improvement.  Ascent stops when a sweep gains
    less than 1e-9 or after ``max_sweeps``.  The result never scores below
    uniform averaging, and the history is non-decreasing by construction.
    """
    m = len(tables)
    if m < 2:
        raise TagSelectError("weight learning needs at least two tables")
    if objective not in ("mf", "map"):
        raise TagSelectError(f"objective must be 'mf' or 'map', got {objective!r}")
    if not 0.0 < grid_step <= 1.0:
        raise TagSelectError(f"grid_step must lie in (0, 1], got {grid_step!r}")
    if max_sweeps < 1:
        raise TagSelectError("max_sweeps must be at least 1")
    if selection_strategy is None:
        selection_strategy = threshold_selection_strategy(truth, vocab)
    coverage = [t for t in tables[0].tags if truth.covers(t)]
    if not coverage:
        raise TagSelectError("ground truth covers no table tag; objective undefined")

    grid = [k * grid_step for k in range(int(1.0 / grid_step) + 1)]
    if grid[-1] < 1.0 - 1e-12:
        grid.append(1.0)
    grid[-1] = 1.0

    cache: dict[tuple[float, ...], float] = {}

    def score(w: np.ndarray) -> float:
        key = tuple(w.tolist())
        if key not in cache:
            cache[key] = _objective(tables, w, truth, selection_strategy, coverage, objective)
        return cache[key]

    w = np.full(m, 1.0 / m)
    best = score(w)
    history = [best]
    for _ in range(max_sweeps):
        sweep_start = best
        for i in range(m):
            coord_best = best
            coord_w = w
            for v in grid:
                if abs(v - w[i]) < 1e-15:
                    continue
                cand = _replace_coordinate(w, i, v)
                s = score(cand)
                if s > coord_best:
                    coord_best = s
                    coord_w = cand
            if coord_best > best:
                best = coord_best
                w = coord_w
        history.append(best)
        if best - sweep_start < _SWEEP_TOL:
            break
    return FusionModel(tuple(w.tolist()), objective, tuple(history))


def _replace_coordinate(w: np.ndarray, i: int, v: float) -> np.ndarray:
    out = np.empty_like(w)
    others = np.delete(w, i)
    mass = float(others.sum())
    remaining = 1.0 - v
    if mass > 0.0:
        scaled = others * (remaining / mass)
    else:
        scaled = np.full(w.shape[0] - 1, remaining / (w.shape[0] - 1))
    out[:i] = scaled[:i]
    out[i] = v
    out[i + 1:] = scaled[i:]
    return out
