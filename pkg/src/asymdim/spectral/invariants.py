"""Spectral invariants at p = 0: heat trace, counting function, b₀, Novikov-Shubin numbers.

Finite-size regimes are expressed through the spectrum's effective side
``L`` (the torus side, or ``2π/√gap`` in general): the counting form uses
``t ∈ [40/L², 1]`` and the heat form ``t ∈ [4, L²/40]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse.linalg import eigsh

from ..dimension import DimensionConfig, ScaleSeries, asymptotic_dimension, slope_limsup
from ..errors import ArityError, ConfigurationError, DomainError
from ..spaces import GraphSpace, ball_volume, build_space
from ..specs import SpaceSpec, make_spec
from .laplacian import WeightedSpectrum, graph_laplacian, spectrum, torus_spectrum


@dataclass(frozen=True)
class SpectralConfig:
    """Regime and fit defaults for the spectral estimators."""

    window: int = 3
    counting_lo: float = 40.0      # t_min = counting_lo / L^2
    counting_hi: float = 1.0
    heat_lo: float = 4.0
    heat_hi: float = 40.0          # t_max = L^2 / heat_hi
    per_octave: int = 1            # grid points per factor 2 in t
    t_regime_counting: tuple | None = None
    t_regime_heat: tuple | None = None
    fit_tol: float = 0.05


DEFAULT_SPECTRAL = SpectralConfig()


def heat_trace(spec: WeightedSpectrum, t) -> np.ndarray | float:
    """``θ(t) = Σ_j w_j exp(-t λ_j)``."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt <= 0):
        raise DomainError("heat trace needs t > 0")
    out = np.exp(-np.outer(tt, spec.lam)) @ spec.w
    return out if np.ndim(t) else float(out[0])


def heat_trace0(spec: WeightedSpectrum, t, b0: float = 0.0):
    """``θ⁰(t) = θ(t) - b₀``."""
    return heat_trace(spec, t) - b0


def counting(spec: WeightedSpectrum, t):
    """``(N(t), N⁰(t))``: weight of eigenvalues ``< t``, without and with the kernel removed."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt <= 0):
        raise DomainError("counting function needs t > 0")
    cum = np.concatenate([[0.0], np.cumsum(spec.w)])
    n = cum[np.searchsorted(spec.lam, tt, side="left")]
    z = spec.zero_weight
    n0 = np.maximum(n - z, 0.0)
    if np.ndim(t):
        return n, n0
    return float(n[0]), float(n0[0])


def counting_interpolated(spec: WeightedSpectrum, t, b0: float = 0.0):
    """Continuous counting function ``N(t) - b₀`` for slope fits.

    ``N`` is interpolated linearly through the midpoints of its jumps (the
    kernel included), which removes the staircase of degenerate eigenvalues:
    on a cycle of side L the midpoint at the k-th distinct eigenvalue is
    exactly ``2k/L``, the infinite-lattice count there.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    lam, inv = np.unique(np.round(spec.lam, 12), return_inverse=True)
    jumps = np.bincount(inv, weights=spec.w)
    cum = np.cumsum(jumps)
    out = np.interp(tt, lam, cum - jumps / 2) - b0
    return out if np.ndim(t) else float(out[0])


def laplace_transform_check(spec: WeightedSpectrum, t_grid) -> float:
    """Max relative gap between ``θ(t)`` and ``Σ exp(-t λ) ΔN(λ)`` over the jumps of N."""
    lam, inv = np.unique(spec.lam, return_inverse=True)
    jumps = np.bincount(inv, weights=spec.w)
    worst = 0.0
    for t in np.atleast_1d(t_grid):
        direct = heat_trace(spec, float(t))
        stieltjes = math.fsum(np.exp(-t * lam) * jumps)
        worst = max(worst, abs(direct - stieltjes) / abs(direct))
    return worst


@dataclass
class BettiEstimate:
    b0: float
    zero_weights: list
    volumes: list
    warnings: list = field(default_factory=list)


def betti0(spectra) -> BettiEstimate:
    """Extrapolate the kernel weight across an exhaustion by a fit against ``1/volume``."""
    spectra = list(spectra)
    if len(spectra) < 3:
        raise ArityError(f"betti0 needs at least 3 exhaustion entries, got {len(spectra)}")
    z = np.array([s.zero_weight for s in spectra])
    vol = np.array([s.volume for s in spectra])
    notes = []
    order = np.argsort(vol)
    if np.any(np.diff(z[order]) > 1e-15):
        notes.append("zero-mode weight is not non-increasing along the exhaustion")
    x = 1.0 / vol
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    return BettiEstimate(float(coef[0]), z.tolist(), vol.tolist(), notes)


def dyadic_t(lo: float, hi: float, per_octave: int = 1) -> np.ndarray:
    if not 0 < lo <= hi:
        raise ConfigurationError(f"empty t regime [{lo}, {hi}]")
    k = int(math.floor(per_octave * math.log2(hi / lo) + 1e-9))
    return lo * 2.0 ** (np.arange(k + 1) / per_octave)


def counting_regime(spec: WeightedSpectrum, config: SpectralConfig = DEFAULT_SPECTRAL):
    if config.t_regime_counting is not None:
        return tuple(config.t_regime_counting)
    L = spec.scale
    return config.counting_lo / L ** 2, config.counting_hi


def heat_regime(spec: WeightedSpectrum, config: SpectralConfig = DEFAULT_SPECTRAL):
    if config.t_regime_heat is not None:
        return tuple(config.t_regime_heat)
    L = spec.scale
    return config.heat_lo, L ** 2 / config.heat_hi


def _grid(lo, hi, config, what, bound):
    if not lo < hi:
        raise ConfigurationError(
            f"{what} regime [{lo:.4g}, {hi:.4g}] is empty; the exhaustion is below the "
            f"saturation bound ({bound}); use a larger approximant"
        )
    grid = dyadic_t(lo, hi, config.per_octave)
    if len(grid) < config.window + 1:
        raise ConfigurationError(
            f"{what} regime [{lo:.4g}, {hi:.4g}] holds {len(grid)} grid points, "
            f"need {config.window + 1}; saturation bound: {bound}"
        )
    return grid


@dataclass
class NSEstimate:
    alpha0: float | None
    alpha0_prime: float | None
    alpha0_lower: float | None
    b0: float
    diagnostics: dict = field(default_factory=dict)

    def ordering_ok(self, tol: float = 0.05) -> bool:
        if self.alpha0 is None or self.alpha0_prime is None:
            return True
        return self.alpha0_lower <= self.alpha0_prime + tol and \
            self.alpha0_prime <= self.alpha0 + tol

    def to_dict(self):
        return {"alpha0": self.alpha0, "alpha0_prime": self.alpha0_prime,
                "alpha0_lower": self.alpha0_lower, "b0": self.b0,
                "diagnostics": self.diagnostics}


def counting_series(spec, b0=0.0, config=DEFAULT_SPECTRAL):
    lo, hi = counting_regime(spec, config)
    t = _grid(lo, hi, config, "counting", f"t >> gap, t_min = {config.counting_lo}/L^2")
    n0 = counting_interpolated(spec, t, b0)
    if np.any(n0 <= 0):
        raise ConfigurationError("N⁰ vanishes inside the counting regime; raise t_min above the gap")
    return ScaleSeries(t, n0)


def heat_series(spec, b0=0.0, config=DEFAULT_SPECTRAL):
    lo, hi = heat_regime(spec, config)
    t = _grid(lo, hi, config, "heat", f"t << L^2/(4π^2), t_max = L^2/{config.heat_hi}")
    th0 = heat_trace0(spec, t, b0)
    if np.any(th0 <= 0):
        raise ConfigurationError("θ⁰ is not positive inside the heat regime")
    # abscissa 1/t must increase: reverse the samples
    return ScaleSeries(1.0 / t[::-1], th0[::-1])


def ns_numbers(spectra, config: SpectralConfig = DEFAULT_SPECTRAL, **overrides) -> NSEstimate:
    """Novikov-Shubin estimates from the largest entry of an exhaustion.

    ``alpha0`` is twice the largest window slope of ``log N⁰`` against
    ``log t`` and ``alpha0_lower`` twice the smallest; ``alpha0_prime`` is
    twice the largest window slope of ``log θ⁰`` against ``log 1/t``.
    Stochastic spectra carry no reliable counting function, so ``alpha0``
    is then reported as ``None``.
    """
    config = replace(config, **overrides)
    if isinstance(spectra, WeightedSpectrum):
        spectra = [spectra]
    spectra = sorted(spectra, key=lambda s: s.volume)
    b = betti0(spectra) if len(spectra) >= 3 else None
    b0 = b.b0 if b is not None else 0.0
    top = spectra[-1]
    diag = {"source": top.source, "method": top.method, "scale": top.scale,
            "b0_entries": b.zero_weights if b else None,
            "assumption": "torsion dimension of the finite approximants vanishes"}
    b0c = max(b0, 0.0)
    alpha_p = None
    try:
        heat = slope_limsup(heat_series(top, b0c, config), config.window, "all")
        alpha_p = 2 * heat.limsup_slope
        diag["heat_regime"] = heat_regime(top, config)
        diag["heat_window_slopes"] = [[a, 2 * s] for a, s in heat.per_window_slopes]
    except ConfigurationError as exc:
        if top.method == "lanczos":
            raise
        diag["heat_regime_error"] = str(exc)
    alpha, lower = None, None
    if top.method != "lanczos":
        cnt = slope_limsup(counting_series(top, b0c, config), config.window, "all")
        alpha, lower = 2 * cnt.limsup_slope, 2 * cnt.liminf_slope
        diag["counting_regime"] = counting_regime(top, config)
        diag["counting_window_slopes"] = [[a, 2 * s] for a, s in cnt.per_window_slopes]
    # stability across the exhaustion: the same estimate on the smaller entries
    stab = []
    for s in spectra[:-1]:
        try:
            if top.method != "lanczos":
                c = slope_limsup(counting_series(s, b0c, config), config.window, "all")
                stab.append(2 * c.limsup_slope)
        except (ConfigurationError, ArityError):
            stab.append(None)
    diag["cross_entry_alpha0"] = stab
    if b is not None and b.warnings:
        diag["warnings"] = b.warnings
    return NSEstimate(alpha, alpha_p, lower, b0, diag)


@dataclass
class DilatationResult:
    ok: bool
    lam: float | None
    violations: list
    grid: list


def _as_sampler(N):
    if callable(N):
        return N
    t, v = (np.asarray(a, dtype=float) for a in N)
    table = {round(math.log2(x), 9): y for x, y in zip(t, v)}

    def sample(x):
        key = round(math.log2(x), 9)
        if key not in table:
            raise KeyError(x)
        return table[key]
    sample.grid = t
    return sample


def dilatation_equivalence(N1, N2, t_grid=None, factors=(1, 2, 4, 8, 16, 32, 64)) -> DilatationResult:
    """Smallest ``λ`` with ``½N1(t/λ) <= N2(t) <= 2 N1(λt)`` on all shared grid points.

    ``N1`` and ``N2`` are callables or ``(t, values)`` samples on dyadic grids;
    with samples, a grid point counts only where ``t/λ`` and ``λt`` are sampled too.
    """
    f1, f2 = _as_sampler(N1), _as_sampler(N2)
    if t_grid is None:
        g1 = getattr(f1, "grid", None)
        g2 = getattr(f2, "grid", None)
        if g1 is None and g2 is None:
            raise ArityError("no sample grid given")
        if g1 is None or g2 is None:
            grid = np.asarray(g1 if g2 is None else g2)
        else:
            k1 = {round(math.log2(x), 9) for x in g1}
            grid = np.asarray([x for x in g2 if round(math.log2(x), 9) in k1])
    else:
        grid = np.asarray(t_grid, dtype=float)
    if len(grid) == 0:
        raise ArityError("the two counting grids do not overlap")
    last = []
    for lam in factors:
        used, bad = [], []
        for t in grid:
            try:
                lo, mid, hi = f1(t / lam), f2(t), f1(lam * t)
            except KeyError:
                continue
            used.append(float(t))
            if not (0.5 * lo <= mid <= 2 * hi):
                bad.append(float(t))
        if not used:
            continue
        if not bad:
            return DilatationResult(True, float(lam), [], used)
        last = bad
    return DilatationResult(False, None, last, [float(t) for t in grid])


def diagonal_heat_kernel(space, t_grid, center: int | None = None, method: str = "auto"):
    """``H(t, x, x)`` with respect to the vertex measure.

    Unit-weight tori use the closed form (every vertex sees ``θ``); other
    graphs use a dense eigendecomposition.
    """
    g = space.graph() if not isinstance(space, GraphSpace) else space
    op = graph_laplacian(g)
    x = g.base if center is None else int(center)
    t_grid = np.asarray(t_grid, dtype=float)
    if op.torus and method in ("auto", "analytic-torus"):
        d, side = op.torus
        return heat_trace(torus_spectrum(d, side), t_grid) / op.vertex_weights[x] * \
            (op.volume / op.n)
    if op.n > 4096:
        from ..errors import BudgetError
        raise BudgetError(f"dense heat kernel budget is 4096 vertices, got {op.n}")
    lam, phi = np.linalg.eigh(op.matrix.toarray())
    lam = np.clip(lam, 0, None)
    return (np.exp(-np.outer(t_grid, lam)) @ (phi[x] ** 2)) / op.vertex_weights[x]


@dataclass
class HeatVolumeReport:
    t: list
    ratio: list
    band: float
    dinf_slope: float
    regime: tuple


def heat_volume_bound_check(space, t_grid=None, center: int | None = None,
                            config: SpectralConfig = DEFAULT_SPECTRAL,
                            side: int | None = None) -> HeatVolumeReport:
    """Ratio ``H(t,x,x)·V(x,√t)`` over the heat regime, with its max/min band and
    the slope estimate ``-2 d log H / d log t``."""
    x = space.base if center is None else int(center)
    if t_grid is None:
        L = side or (space.torus[1] if getattr(space, "torus", None) else None)
        if L is None:
            raise ConfigurationError("heat/volume check needs a t grid or a torus side")
        t_grid = _grid(config.heat_lo, L ** 2 / config.heat_hi, config, "heat",
                       f"t_max = L^2/{config.heat_hi}")
    t_grid = np.asarray(t_grid, dtype=float)
    H = diagonal_heat_kernel(space, t_grid, x)
    V = np.array([ball_volume(space, x, math.sqrt(t)) for t in t_grid])
    ratio = H * V
    band = float(ratio.max() / ratio.min())
    # log H ~ -(d/2) log t; the mean slope over the regime is the least biased
    x_ = np.log(t_grid)
    slope = np.polyfit(x_, np.log(H), 1)[0]
    return HeatVolumeReport(t_grid.tolist(), ratio.tolist(), band, float(-2 * slope),
                            (float(t_grid[0]), float(t_grid[-1])))


def dirichlet_lambda1(graph, subset) -> float:
    """Smallest eigenvalue of the Laplacian restricted to ``subset`` (complement deleted)."""
    g = graph.graph() if not isinstance(graph, GraphSpace) else graph
    idx = np.unique(np.asarray(subset, dtype=np.intp))
    if len(idx) == 0:
        raise DomainError("Dirichlet problem needs a non-empty subset")
    if len(idx) >= g.size:
        raise DomainError("subset is the whole graph: no boundary for the Dirichlet condition")
    L = graph_laplacian(g).matrix[idx][:, idx]
    if len(idx) <= 2048:
        return float(np.linalg.eigvalsh(L.toarray())[0])
    val = eigsh(L.tocsc(), k=1, sigma=0, which="LM", return_eigenvectors=False)
    return float(val[0])


def isoperimetric_constant(space, r: float, center: int | None = None, beta: float = 2.0,
                           subset=None) -> float:
    """``α = λ₁(U) r² (vol U / V(x, r))^β`` for ``U`` the ball ``B(x, r)`` unless given."""
    x = space.base if center is None else int(center)
    U = space.within(x, r) if subset is None else np.asarray(subset)
    lam1 = dirichlet_lambda1(space, U)
    volU = float(space.weights[U].sum())
    return lam1 * r * r * (volU / ball_volume(space, x, r)) ** beta


@dataclass(frozen=True)
class ExhaustionPlan:
    """Increasing approximants of one model: torus sides (``kind='torus'``)."""

    d: int
    sides: tuple

    def __post_init__(self):
        s = tuple(int(x) for x in self.sides)
        if len(s) < 3 or any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigurationError(f"exhaustion needs >= 3 strictly increasing sizes, got {s}")
        object.__setattr__(self, "sides", s)

    def specs(self):
        return [make_spec("cycle_torus", d=self.d, side=s) for s in self.sides]

    @classmethod
    def default(cls, d: int, side: int):
        """The given side and its two dyadic predecessors."""
        return cls(d, (side // 4, side // 2, side))


def exhaustion_spectra(plan: ExhaustionPlan, method: str = "auto", seed: int = 0, cache=None):
    """Spectra of every approximant; ``cache(spec, index, compute)`` may intercept."""
    out = []
    for i, spec in enumerate(plan.specs()):
        def compute(spec=spec):
            return spectrum(graph_laplacian(build_space(spec)), method, seed=seed)
        out.append(cache(spec, i, compute) if cache else compute())
    return out


@dataclass
class A0Report:
    dinf: float
    alpha0: float
    difference: float
    dinf_estimate: dict
    ns: dict

    def to_dict(self):
        return {"dinf": self.dinf, "alpha0": self.alpha0, "difference": self.difference,
                "dinf_estimate": self.dinf_estimate, "ns": self.ns}


def verify_a0_eq_dinf(spec: SpaceSpec, dim_config: DimensionConfig | None = None,
                      spectral_config: SpectralConfig = DEFAULT_SPECTRAL, spectra=None,
                      method: str = "auto", seed: int = 0) -> A0Report:
    """Compare ``d∞`` of the periodic model with ``α₀`` of its torus exhaustion.

    The model of a ``cycle_torus{d, side}`` is the lattice ``Z^d`` it covers;
    balls of radius below ``side/2`` in the torus are lattice balls.
    """
    if spec.kind != "cycle_torus":
        raise ConfigurationError("verify_a0_eq_dinf runs on cycle_torus specifications")
    d, side = spec.params["d"], spec.params["side"]
    model = build_space(make_spec("lattice", d=d, metric=spec.params["metric"], budget=64))
    dim = asymptotic_dimension(model, dim_config or DimensionConfig())
    if spectra is None:
        spectra = exhaustion_spectra(ExhaustionPlan.default(d, side), method, seed)
    ns = ns_numbers(spectra, spectral_config)
    alpha = ns.alpha0 if ns.alpha0 is not None else ns.alpha0_prime
    if alpha is None:
        raise ConfigurationError("neither Novikov-Shubin form has a usable regime")
    return A0Report(dim.limsup_slope, alpha, abs(alpha - dim.limsup_slope), dim.to_dict(),
                    ns.to_dict())
