"""Scaling-exponent estimators: box dimension, asymptotic dimension, volume growth.

The limsup / liminf of ``log value / log scale`` are realized by least-squares
slopes over sliding windows of consecutive (dyadic) samples: the largest
window slope stands for the limsup, the smallest for the liminf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .covering import Ball, packing_number, resolve_region
from .errors import ArityError, BudgetError, DomainError
from .spaces import ball_points, ball_volume, log_ball_volume


@dataclass(frozen=True)
class DimensionConfig:
    """Every tunable default of the estimators, overridable per call."""

    window: int = 3
    # asymptotic dimension: fixed inner radii, dyadic outer radii
    r_grid: tuple = (2.0, 4.0, 8.0)
    R_min: float = 4.0
    R_max: float = 64.0
    R_values: tuple | None = None
    # box dimension: geometric inner radii inside one ball (box_R None = whole space);
    # None defers to the space's own grid, else 2^-9 .. 2^-3 with ratio 2
    r_min: float | None = None
    r_max: float | None = None
    box_R: float | None = None
    # ratio of consecutive box radii; self-similar sets sample best on their own ratio
    scale_ratio: float | None = None
    # half-integer offset on integer-metric spaces keeps radii off the distance lattice
    offset: float | None = None
    # regress log nu_r(B(x,R)) on log(R + r) rather than log R
    shift_by_r: bool = True
    convergence_tol: float = 0.1
    # None = upper half of the samples (at least window + 1); or (start, stop)
    regime: tuple | str | None = None


DEFAULT_CONFIG = DimensionConfig()


@dataclass(frozen=True)
class ScaleSeries:
    scales: np.ndarray
    values: np.ndarray
    log_values: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.scales, dtype=float)
        object.__setattr__(self, "scales", s)
        if self.log_values is None:
            v = np.asarray(self.values, dtype=float)
            if np.any(v <= 0):
                raise DomainError("scale-series values must be positive")
            object.__setattr__(self, "values", v)
            object.__setattr__(self, "log_values", np.log(v))
        else:
            lv = np.asarray(self.log_values, dtype=float)
            object.__setattr__(self, "log_values", lv)
            object.__setattr__(self, "values", np.exp(np.minimum(lv, 700.0)))
        if len(s) != len(self.log_values):
            raise ArityError("scales and values differ in length")
        if np.any(s <= 0) or np.any(np.diff(s) <= 0):
            raise DomainError("scales must be positive and strictly increasing")

    def __len__(self):
        return len(self.scales)

    @property
    def log_scales(self):
        return np.log(self.scales)

    def rows(self):
        return [(float(s), float(v), float(ls), float(lv))
                for s, v, ls, lv in zip(self.scales, self.values, self.log_scales, self.log_values)]


@dataclass
class DimensionEstimate:
    limsup_slope: float
    liminf_slope: float
    window: int
    regime: tuple
    per_window_slopes: list
    r_grid: tuple = ()
    per_r: dict = field(default_factory=dict)
    converged: bool = True
    series: ScaleSeries | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "limsup_slope": self.limsup_slope,
            "liminf_slope": self.liminf_slope,
            "window": self.window,
            "regime": list(self.regime),
            "per_window_slopes": [[a, s] for a, s in self.per_window_slopes],
            "r_grid": list(self.r_grid),
            "per_r": {repr(k): v for k, v in self.per_r.items()},
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        }


def _regime_bounds(n, window, regime):
    if regime is None or regime == "upper-half":
        k = max(window + 1, math.ceil(n / 2))
        return max(0, n - k), n
    if regime == "all":
        return 0, n
    start, stop = regime
    start = 0 if start is None else start
    stop = n if stop is None else stop
    if start < 0:
        start += n
    if stop < 0:
        stop += n
    return start, stop


def _ls_slope(x, y):
    x = x - x.mean()
    return float((x * (y - y.mean())).sum() / (x * x).sum())


def slope_limsup(series: ScaleSeries, window: int = 3, regime=None) -> DimensionEstimate:
    """Windowed least-squares slopes of ``log value`` against ``log scale``.

    Parameters
    ----------
    series : ScaleSeries
        Samples ordered by increasing scale.
    window : int
        Number of consecutive samples per regression (>= 2).
    regime : tuple or str, optional
        ``(start, stop)`` sample slice, ``"all"``, or ``None`` for the upper
        half of the samples (never fewer than ``window + 1``).

    Returns
    -------
    DimensionEstimate
        ``limsup_slope`` is the largest window slope, ``liminf_slope`` the smallest.
    """
    if window < 2:
        raise ArityError(f"window must be >= 2, got {window}")
    n = len(series)
    start, stop = _regime_bounds(n, window, regime)
    if stop - start < window + 1:
        raise ArityError(
            f"need at least {window + 1} samples in the regime, got {max(stop - start, 0)}"
        )
    x = series.log_scales[start:stop]
    y = series.log_values[start:stop]
    scales = series.scales[start:stop]
    slopes = [(float(scales[i]), _ls_slope(x[i:i + window], y[i:i + window]))
              for i in range(len(x) - window + 1)]
    vals = [s for _, s in slopes]
    return DimensionEstimate(max(vals), min(vals), window, (start, stop), slopes, series=series)


def dyadic(lo: float, hi: float, ratio: float = 2.0) -> np.ndarray:
    """``lo * ratio^k`` for k = 0, 1, ... up to ``hi``."""
    if not 0 < lo <= hi:
        raise DomainError(f"need 0 < lo <= hi, got {lo}, {hi}")
    if not ratio > 1:
        raise DomainError(f"scale ratio must exceed 1, got {ratio}")
    k = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9))
    return lo * ratio ** np.arange(k + 1)


def _offset(space, config):
    if config.offset is not None:
        return config.offset
    return 0.5 if getattr(space, "edge_length", None) else 0.0


BOX_GRID = {"r_min": 2.0 ** -9, "r_max": 2.0 ** -3, "scale_ratio": 2.0}


def box_grid(space, config: DimensionConfig) -> dict:
    """Radii grid for the box dimension: explicit config, else the space's
    ``box_grid`` attribute, else :data:`BOX_GRID`."""
    grid = {**BOX_GRID, **getattr(space, "box_grid", {})}
    for k in grid:
        if getattr(config, k) is not None:
            grid[k] = getattr(config, k)
    return grid


def box_dimension(space, config: DimensionConfig = DEFAULT_CONFIG, **overrides) -> DimensionEstimate:
    """Growth exponent of the packing numbers as ``r -> 0`` inside a fixed ball."""
    config = replace(config, **overrides)
    space._require_enumerable("box_dimension")
    region = None if config.box_R is None else Ball(None, config.box_R)
    idx = resolve_region(space, region)
    g = box_grid(space, config)
    radii = dyadic(g["r_min"], g["r_max"], g["scale_ratio"])[::-1]
    counts = [packing_number(space, idx, r) for r in radii]
    series = ScaleSeries(1.0 / radii, counts)
    est = slope_limsup(series, config.window, config.regime)
    est.diagnostics = {"radii": radii.tolist(), "counts": counts, "region_size": len(idx),
                       "grid": g}
    return est


def asymptotic_dimension(space, config: DimensionConfig = DEFAULT_CONFIG,
                         base: int | None = None, **overrides) -> DimensionEstimate:
    """Growth exponent of ``nu_r(B(x, R))`` as ``R -> infinity`` for each fixed ``r``.

    The reported slopes are those at the largest ``r``; ``per_r`` keeps the
    others, and ``converged`` says whether they agree within
    ``config.convergence_tol``.
    """
    config = replace(config, **overrides)
    space._require_enumerable("asymptotic_dimension")
    base = space.base if base is None else base
    off = _offset(space, config)
    radii = (np.asarray(config.R_values, float) if config.R_values is not None
             else dyadic(config.R_min, config.R_max) + off)
    if not space._ball_exact(base, float(radii[-1])):
        raise BudgetError(f"R_max={radii[-1]} exceeds the radius budget {space.radius_budget} "
                          f"of {space.name!r}")
    balls = [ball_points(space, base, float(R)) for R in radii]
    per_r, best = {}, None
    for r in sorted(config.r_grid):
        counts = [packing_number(space, b, r) for b in balls]
        abscissa = radii + r if config.shift_by_r else radii
        est = slope_limsup(ScaleSeries(abscissa, counts), config.window, config.regime)
        est.diagnostics = {"r": r, "radii": radii.tolist(), "counts": counts}
        per_r[float(r)] = [est.limsup_slope, est.liminf_slope]
        best = est
    tops = [v[0] for v in per_r.values()]
    best.r_grid = tuple(float(r) for r in sorted(config.r_grid))
    best.per_r = per_r
    best.converged = bool(max(tops) - min(tops) <= config.convergence_tol)
    return best


def asymptotic_dimension_volume(space, config: DimensionConfig = DEFAULT_CONFIG,
                                base: int | None = None, **overrides) -> DimensionEstimate:
    """Growth exponent of ``log V(B(x, R)) / log R`` (volume form)."""
    config = replace(config, **overrides)
    if config.R_values is not None:
        radii = np.asarray(config.R_values, dtype=float)
    else:
        radii = dyadic(config.R_min, config.R_max) + _offset(space, config)
    logs = [log_ball_volume(space, base, float(R)) for R in radii]
    series = ScaleSeries(radii, None, log_values=logs)
    est = slope_limsup(series, config.window, config.regime)
    est.diagnostics = {"radii": radii.tolist(), "log_volumes": logs}
    return est


def _sample_centers(space, reach, count):
    d = space.distances_from(space.base)
    ok = np.flatnonzero(d + reach <= space.radius_budget + 1e-9) if math.isfinite(
        space.radius_budget) else np.arange(space.size)
    if len(ok) == 0:
        return np.asarray([space.base])
    pick = np.unique(np.linspace(0, len(ok) - 1, min(count, len(ok))).round().astype(int))
    return ok[pick]


def uniform_bounded_check(space, r_grid, centers=None, count: int = 16):
    """Empirical ``(r, inf_x V(x,r), sup_x V(x,r))`` over deterministic centres.

    Returns
    -------
    rows : list of tuple
        ``(r, beta1, beta2)`` per radius.
    passed : bool
        True when every ``beta1`` is positive.
    """
    space._require_enumerable("uniform_bounded_check")
    r_grid = [float(r) for r in r_grid]
    if centers is None:
        centers = _sample_centers(space, max(r_grid), count)
    rows = []
    for r in r_grid:
        vols = [float(space.weights[space.within(int(c), r)].sum()) for c in centers]
        rows.append((r, min(vols), max(vols)))
    return rows, all(b1 > 0 for _, b1, _ in rows)


def doubling_constant(space, samples) -> float:
    """``sup V(x, 2r) / V(x, r)`` over the sampled ``(x, r)``.

    ``samples`` holds ``(center, r)`` pairs on enumerable spaces and plain
    radii on analytic ends.
    """
    ratios = []
    for s in samples:
        if space.is_enumerable:
            c, r = s
            c = space.base if c is None else int(c)
            ratios.append(ball_volume(space, c, 2 * r) / ball_volume(space, c, r))
        else:
            ratios.append(space.volume(2 * s) / space.volume(s))
    return max(ratios)
