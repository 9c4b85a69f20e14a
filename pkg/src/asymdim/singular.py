"""Rearrangement calculus and Dixmier-type singular traces at t -> 0.

A :class:`StepFunction` is a right-continuous non-increasing function on
``(0, ∞)``: constant on ``[b_i, b_{i+1})`` with value ``v_i``, optionally
preceded by a power head ``c·t^{-p}`` on ``(0, b_0)`` and followed by a power
tail on ``[b_m, ∞)``.  It houses both the distribution function ``λ`` and
the rearrangement ``μ`` of a positive operator.

Integrals are evaluated in log space (arguments are ``log t``), so dyadic
scales down to ``t = 2^-4096`` are handled without underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dimension import ScaleSeries, slope_limsup
from .errors import ArityError, DomainError, SpecError

LN2 = math.log(2.0)
K_MAX = 4096


@dataclass(frozen=True)
class PowerTail:
    """``f(t) = coef · t^(-exponent)``."""

    coef: float
    exponent: float

    def __post_init__(self):
        if not self.coef > 0:
            raise DomainError(f"power coefficient must be > 0, got {self.coef}")
        if self.exponent < 0:
            raise DomainError(f"power exponent must be >= 0 (non-increasing), got {self.exponent}")

    def __call__(self, t):
        return self.coef * np.power(t, -self.exponent)

    def log_value(self, log_t):
        return math.log(self.coef) - self.exponent * log_t

    def tag(self) -> str:
        return f"{self.coef!r}:{self.exponent!r}"

    @classmethod
    def parse(cls, text: str):
        if text == "none":
            return None
        c, _, p = text.partition(":")
        return cls(float(c), float(p))


def _log1mexp(x):
    """``log(1 - e^x)`` for ``x <= 0``."""
    if x == -math.inf:
        return 0.0
    if x > -LN2:
        return math.log(-math.expm1(x))
    return math.log1p(-math.exp(x))


def _logsumexp(terms):
    terms = [x for x in terms if x != -math.inf]
    if not terms:
        return -math.inf
    m = max(terms)
    if m == math.inf:
        return math.inf
    return m + math.log(math.fsum(math.exp(x - m) for x in terms))


def _log_power_integral(c, p, A, B):
    """``log ∫_a^b c s^-p ds`` with ``A = log a`` (may be -inf), ``B = log b``."""
    if B <= A:
        return -math.inf
    q = 1.0 - p
    if q == 0:
        if A == -math.inf:
            return math.inf
        return math.log(c) + math.log(B - A)
    if q > 0:
        return math.log(c) + q * B + _log1mexp(q * (A - B)) - math.log(q)
    if A == -math.inf:
        return math.inf
    return math.log(c) + q * A + _log1mexp(q * (B - A)) - math.log(-q)


def _log_const_integral(v, A, B):
    if B <= A or v <= 0:
        return -math.inf
    return math.log(v) + B + _log1mexp(A - B)


class StepFunction:
    """Right-continuous non-increasing function with optional power head and tail.

    Parameters
    ----------
    breaks : array_like
        Strictly increasing breakpoints ``b_0 < ... < b_m``; ``b_0 = 0`` unless
        a head is given.
    values : array_like
        ``v_i`` on ``[b_i, b_{i+1})``; ``v_m`` holds on ``[b_m, ∞)`` or equals
        ``tail(b_m)`` when a tail is given.
    head, tail : PowerTail, optional
    """

    def __init__(self, breaks, values, head: PowerTail | None = None,
                 tail: PowerTail | None = None, check: bool = True):
        b = np.asarray(breaks, dtype=float)
        v = np.asarray(values, dtype=float)
        if b.ndim != 1 or b.shape != v.shape or len(b) == 0:
            raise DomainError("breaks and values must be equal-length non-empty vectors")
        self.breaks, self.values, self.head, self.tail = b, v, head, tail
        self._cum = None
        if check:
            self._check()

    def _check(self):
        b, v = self.breaks, self.values
        if np.any(np.diff(b) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        if self.head is None and b[0] != 0:
            raise DomainError("first breakpoint must be 0 when there is no power head")
        if b[0] < 0 or (self.head is not None and b[0] <= 0):
            raise DomainError("breakpoints must be positive after a power head")
        if np.any(v < 0) or np.any(np.diff(v) > 1e-12 * np.maximum(1.0, np.abs(v[:-1]))):
            raise DomainError("values must be non-negative and non-increasing")
        if self.head is not None and self.head(b[0]) < v[0] * (1 - 1e-9):
            raise DomainError("power head ends below the first step value")
        if self.tail is not None and not math.isclose(self.tail(b[-1]), v[-1], rel_tol=1e-9):
            raise DomainError("power tail must start at the last step value")

    # -- constructors -------------------------------------------------------
    @classmethod
    def power(cls, coef: float, exponent: float, anchor: float = 1.0) -> "StepFunction":
        """Pure power ``coef · t^-exponent`` on all of ``(0, ∞)``."""
        p = PowerTail(coef, exponent)
        return cls([anchor], [float(p(anchor))], head=p, tail=p)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls([0.0], [0.0])

    @classmethod
    def from_tag(cls, tag: str) -> "StepFunction":
        """``pow:e`` is ``t^e`` (e <= 0); ``pow:e:c`` is ``c·t^e``; ``const:c`` is constant."""
        kind, _, rest = tag.partition(":")
        try:
            if kind == "pow":
                parts = rest.split(":")
                e = float(parts[0])
                c = float(parts[1]) if len(parts) > 1 else 1.0
                return cls.power(c, -e)
            if kind == "const":
                return cls([0.0], [float(rest)])
        except (ValueError, DomainError) as exc:
            raise SpecError(f"bad function tag {tag!r}: {exc}", "function") from exc
        raise SpecError(f"unknown function tag {tag!r}; use pow:<e>[:<c>] or const:<c>",
                        "function")

    # -- evaluation ---------------------------------------------------------
    def __call__(self, t):
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(tt < 0):
            raise DomainError("step functions live on t >= 0")
        i = np.searchsorted(self.breaks, tt, side="right") - 1
        out = self.values[np.clip(i, 0, None)].astype(float)
        if self.head is not None:
            m = i < 0
            if np.any(m):
                with np.errstate(divide="ignore"):
                    out[m] = self.head(tt[m])
        if self.tail is not None:
            m = tt >= self.breaks[-1]
            out[m] = self.tail(tt[m])
        return out if np.ndim(t) else float(out[0])

    def log_eval(self, log_t: float) -> float:
        """``log f(e^log_t)``, valid far below the double range of ``t``."""
        b0, bm = self.breaks[0], self.breaks[-1]
        if self.head is not None and log_t < math.log(b0):
            return self.head.log_value(log_t)
        if self.tail is not None and log_t >= math.log(bm):
            return self.tail.log_value(log_t)
        v = float(self(math.exp(log_t))) if log_t > -745 else float(self.values[0])
        return math.log(v) if v > 0 else -math.inf

    def log_integral(self, A: float, B: float) -> float:
        """``log ∫_a^b f`` with ``A = log a`` (``-inf`` for 0) and ``B = log b``."""
        if B <= A:
            return -math.inf
        terms = []
        b = self.breaks
        lb0 = math.log(b[0]) if b[0] > 0 else -math.inf
        lbm = math.log(b[-1]) if b[-1] > 0 else -math.inf
        if self.head is not None:
            hi = min(B, lb0)
            if hi > A:
                terms.append(_log_power_integral(self.head.coef, self.head.exponent, A, hi))
        # steps live on [b_0, b_m), or on [b_0, ∞) without a tail
        end = lbm if self.tail is not None else math.inf
        lo, hi = max(A, lb0), min(B, end)
        if hi > lo:
            terms.append(self._log_step_integral(lo, hi))
        if self.tail is not None:
            lo = max(A, lbm)
            if B > lo:
                terms.append(_log_power_integral(self.tail.coef, self.tail.exponent, lo, B))
        return _logsumexp(terms)

    def _log_step_integral(self, lo: float, hi: float) -> float:
        b, v = self.breaks, self.values
        x_lo = math.exp(lo) if lo > -math.inf else 0.0
        x_hi = math.exp(hi)
        i = max(int(np.searchsorted(b, x_lo, side="right")) - 1, 0)
        j = max(int(np.searchsorted(b, x_hi, side="left")) - 1, 0)
        if i == j:
            # one step: stay in log space so tiny t does not underflow
            return _log_const_integral(float(v[i]), lo, hi)
        if self._cum is None:
            self._cum = np.concatenate([[0.0], np.cumsum(v[:-1] * np.diff(b))])
        area = (self._cum[j] + v[j] * (x_hi - b[j])) - (self._cum[i] + v[i] * (x_lo - b[i]))
        return math.log(area) if area > 0 else -math.inf

    def integral(self, a: float, b: float) -> float:
        A = -math.inf if a == 0 else math.log(a)
        return math.exp(self.log_integral(A, math.log(b)))

    def integrable_at_zero(self) -> bool:
        return self.head is None or self.head.exponent < 1

    # -- serialization ------------------------------------------------------
    def to_csv(self) -> str:
        head = self.head.tag() if self.head else "none"
        tail = self.tail.tag() if self.tail else "none"
        rows = [f"#stepfunction head={head} tail={tail}"]
        rows += [f"{float(b)!r},{float(v)!r}" for b, v in zip(self.breaks, self.values)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        # report files put their metadata block above the header
        while lines and lines[0].startswith("#") and not lines[0].startswith("#stepfunction"):
            lines.pop(0)
        if not lines or not lines[0].startswith("#stepfunction"):
            raise SpecError("missing '#stepfunction' header", "function")
        tags = dict(item.split("=", 1) for item in lines[0].split()[1:])
        rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]]).reshape(-1, 2)
        return cls(rows[:, 0], rows[:, 1], PowerTail.parse(tags.get("head", "none")),
                   PowerTail.parse(tags.get("tail", "none")))

    def save(self, path):
        Path(path).write_text(self.to_csv())

    def __repr__(self):
        return (f"StepFunction(breaks={self.breaks.tolist()}, values={self.values.tolist()}, "
                f"head={self.head}, tail={self.tail})")


def _merged(breaks, values):
    """Drop empty intervals and merge equal neighbours (keeps right-continuity)."""
    out_b, out_v = [], []
    for b, v in zip(breaks, values):
        if out_b and b <= out_b[-1]:
            out_v[-1] = v
            continue
        if out_v and v == out_v[-1]:
            continue
        out_b.append(b)
        out_v.append(v)
    return out_b, out_v


def distribution_from_spectrum(spec) -> StepFunction:
    """``λ(s) = Σ{w_j : value_j > s}`` from a weighted spectrum of operator values."""
    vals = np.asarray(spec.lam, dtype=float)
    w = np.asarray(spec.w, dtype=float)
    if np.any(vals < 0):
        raise DomainError("distribution function needs non-negative values")
    pos = vals > 0
    if not pos.any():
        return StepFunction.zero()
    u, inv = np.unique(vals[pos], return_inverse=True)
    mass = np.bincount(inv, weights=w[pos])
    # λ on [u_k, u_{k+1}) is the mass strictly above u_k
    above = np.concatenate([[mass.sum()], mass.sum() - np.cumsum(mass)])
    above[-1] = 0.0
    breaks = np.concatenate([[0.0], u])
    b, v = _merged(breaks.tolist(), np.maximum(above, 0).tolist())
    return StepFunction(b, v)


def rearrangement(lam: StepFunction) -> StepFunction:
    """Generalized inverse ``μ(t) = inf{s >= 0 : λ(s) <= t}``.

    Steps map to steps (breaks and values swap roles), a power tail of λ
    becomes a power head of μ and vice versa; on step functions the map is
    an involution.
    """
    s = lam.breaks.tolist()
    L = lam.values.tolist()
    n = len(s) - 1
    if lam.tail is None and L[-1] > 0:
        raise DomainError("λ does not vanish at infinity, so μ is infinite near 0")
    head = tail = None
    if lam.tail is not None:
        a = lam.tail.exponent
        if a <= 0:
            raise DomainError("power tail of λ must decay")
        head = PowerTail(lam.tail.coef ** (1 / a), 1 / a)
    breaks = [L[k] for k in range(n, -1, -1)]
    values = [s[k] for k in range(n, -1, -1)]
    if lam.head is not None:
        a = lam.head.exponent
        if a <= 0:
            raise DomainError("power head of λ must blow up")
        breaks.append(float(lam.head(s[0])))
        values.append(s[0])
        tail = PowerTail(lam.head.coef ** (1 / a), 1 / a)
    b, v = _merged(breaks, values)
    if head is None and b[0] != 0:
        b, v = [0.0] + b, [v[0]] + v
    return StepFunction(b, v, head=head, tail=tail)


def power_transform(mu: StepFunction, p: float) -> StepFunction:
    """Pointwise ``μ^p`` (the rearrangement of ``A^p``)."""
    if not p > 0:
        raise DomainError(f"power must be > 0, got {p}")
    if p == 1:
        return mu
    h = PowerTail(mu.head.coef ** p, mu.head.exponent * p) if mu.head else None
    t = PowerTail(mu.tail.coef ** p, mu.tail.exponent * p) if mu.tail else None
    return StepFunction(mu.breaks, mu.values ** p, head=h, tail=t)


def scaled(mu: StepFunction, c: float) -> StepFunction:
    """``c·μ`` (the rearrangement of ``cA``)."""
    if not c > 0:
        raise DomainError(f"scale must be > 0, got {c}")
    h = PowerTail(mu.head.coef * c, mu.head.exponent) if mu.head else None
    t = PowerTail(mu.tail.coef * c, mu.tail.exponent) if mu.tail else None
    return StepFunction(mu.breaks, mu.values * c, head=h, tail=t)


def mu_from_spectrum(spec, power: float = -0.5) -> StepFunction:
    """Rearrangement of ``L^power`` on the orthocomplement of the kernel."""
    keep = ~spec.zero_mask
    vals = spec.lam[keep] ** power
    return rearrangement(distribution_from_spectrum(
        type("S", (), {"lam": vals, "w": spec.w[keep]})()))


def _default_k(f: StepFunction, k_range):
    if k_range is not None:
        return k_range
    if f.head is not None:
        return (int(max(1, math.ceil(-math.log2(f.breaks[0])))) + 1, 64)
    return (1, 64)


def spectral_dimension(mu: StepFunction, regime=None, window: int = 3,
                       zero_threshold: float = 1e-3) -> float:
    """``(liminf log μ(t) / log(1/t))^-1`` from window slopes on ``t = 2^-k``.

    Parameters
    ----------
    regime : tuple of float, optional
        ``(t_lo, t_hi)``; the dyadic ``t`` inside it are used.  The default
        is ``k ∈ [1, 64]``, or below the first breakpoint when ``μ`` has a
        power head.
    zero_threshold : float
        Slopes at or below this count as zero exponent (dimension ``+inf``).
    """
    if regime is None:
        k_lo, k_hi = _default_k(mu, None)
    else:
        t_lo, t_hi = regime
        if not 0 < t_lo <= t_hi:
            raise ArityError(f"empty regime {regime}")
        k_lo, k_hi = math.ceil(-math.log2(t_hi) - 1e-9), math.floor(-math.log2(t_lo) + 1e-9)
    ks = np.arange(k_lo, k_hi + 1)
    logs = np.array([mu.log_eval(-k * LN2) for k in ks])
    if len(ks) < window + 1:
        raise ArityError(f"need at least {window + 1} scales, got {len(ks)}")
    if not np.all(np.isfinite(logs)):
        raise ArityError("μ vanishes inside the regime")
    est = slope_limsup(ScaleSeries(2.0 ** ks, None, log_values=logs), window, "all")
    slope = est.liminf_slope
    return math.inf if slope <= zero_threshold else 1.0 / slope


@dataclass
class DualityReport:
    lhs: float
    rhs: float
    agree: bool
    status: str = "ok"


def duality_check(lam: StepFunction, j_range=(8, 64), tol: float = 0.02) -> DualityReport:
    """Compare ``liminf log μ(t)/log(1/t)`` (via the rearrangement) with
    ``(limsup log λ(s)/log(1/s))^-1`` as ``s -> ∞``.

    The limits are read off the upper half of the log-range
    ``s ∈ [2^j_lo, 2^j_hi]`` and of its image under ``λ`` in ``t``.  On a
    step the ratio is monotone, so each side is evaluated at the dyadic
    points plus the breakpoints inside its range, where the extremes sit.
    """
    j_lo, j_hi = j_range
    if not 0 < j_lo < j_hi:
        raise ArityError(f"need 0 < j_lo < j_hi, got {j_range}")
    log_s_hi = j_hi * LN2
    log_s_mid = 0.5 * (j_lo + j_hi) * LN2
    if not math.isfinite(lam.log_eval(log_s_hi)):
        # λ vanishes at large s: μ is bounded, both exponents degenerate to zero
        return DualityReport(0.0, 0.0, True, "degenerate-zero")
    mu = rearrangement(lam)

    def points(breaks, lo, hi):
        # log-abscissae: dyadic points, the range ends, and breakpoints inside
        logs = np.log(breaks[breaks > 0])
        inner = logs[(logs > lo) & (logs < hi)]
        grid = np.arange(math.ceil(lo / LN2), math.floor(hi / LN2) + 1) * LN2
        return np.unique(np.concatenate([[lo, hi], grid, inner]))

    log_s = points(lam.breaks, log_s_mid, log_s_hi)
    r = np.array([lam.log_eval(x) for x in log_s]) / -log_s
    sup = float(r.max())
    rhs = math.inf if sup <= 0 else 1.0 / sup
    log_t_lo, log_t_hi = lam.log_eval(log_s_hi), lam.log_eval(log_s_mid)
    log_t = points(mu.breaks, log_t_lo, log_t_hi)
    log_t = log_t[log_t < 0]
    lhs = float(min(mu.log_eval(x) / -x for x in log_t))
    if rhs == math.inf:
        return DualityReport(lhs, rhs, abs(lhs) <= tol, "degenerate-zero")
    return DualityReport(lhs, rhs, abs(lhs - rhs) <= tol)


@dataclass
class EccentricityReport:
    branch: str
    ratio_estimates: list
    limit_estimate: float
    is_eccentric: bool
    k_range: tuple = ()
    window_means: list = field(default_factory=list)

    def to_dict(self, full: bool = False):
        r = self.ratio_estimates
        return {"branch": self.branch, "limit_estimate": self.limit_estimate,
                "is_eccentric": self.is_eccentric, "k_range": list(self.k_range),
                "ratio_head": r[:8], "ratio_tail": r[-8:],
                **({"ratio_estimates": r} if full else {})}


def ratio_sequence(mu: StepFunction, k_lo: int = 2, k_hi: int = K_MAX):
    """Eccentricity ratios at ``t = 2^-k``, each in ``(0, 1]``.

    Integrable branch: ``∫_0^t μ / ∫_0^{2t} μ``.  Non-integrable branch: the
    reciprocal ``∫_{2t}^1 μ / ∫_t^1 μ`` of the defining ratio, so that both
    branches test "close to 1 from below".
    """
    ks = np.arange(k_lo, k_hi + 1)
    if mu.integrable_at_zero():
        num = [mu.log_integral(-math.inf, -k * LN2) for k in ks]
        den = [mu.log_integral(-math.inf, -(k - 1) * LN2) for k in ks]
        branch = "integrable"
    else:
        num = [mu.log_integral(-(k - 1) * LN2, 0.0) for k in ks]
        den = [mu.log_integral(-k * LN2, 0.0) for k in ks]
        branch = "non-integrable"
    num, den = np.array(num), np.array(den)
    if np.any(den == -math.inf):
        raise DomainError("μ vanishes identically near 0")
    return ks, np.exp(num - den), branch


def eccentricity(mu: StepFunction, tol: float = 0.05, k_range=(2, K_MAX),
                 window: int = 16) -> EccentricityReport:
    """0-eccentricity test: the largest mean of ``window`` consecutive ratios
    over the upper half of ``k_range`` must reach ``1 - tol``."""
    ks, r, branch = ratio_sequence(mu, *k_range)
    tail = r[len(r) // 2:]
    w = min(window, len(tail))
    means = np.convolve(tail, np.ones(w) / w, mode="valid")
    limit = float(means.max())
    return EccentricityReport(branch, r.tolist(), limit, bool(limit >= 1 - tol),
                              (int(ks[0]), int(ks[-1])), means[-4:].tolist())


@dataclass(frozen=True)
class LimitProcedure:
    """Stand-in for a generalized limit on ratio sequences indexed by ``t = 2^-k``.

    ``log-cesaro`` averages over the last ``decades`` decades of ``t``
    (uniform weight in ``log t``); ``last-window`` averages the last ``window``
    entries.
    """

    kind: str = "log-cesaro"
    decades: float = 3.0
    window: int = 4

    def __post_init__(self):
        if self.kind not in ("log-cesaro", "last-window"):
            raise SpecError(f"unknown limit procedure {self.kind!r}", "limit")

    def span(self) -> int:
        if self.kind == "log-cesaro":
            return max(1, int(round(self.decades * math.log2(10))))
        return self.window

    def apply(self, seq) -> float:
        seq = np.asarray(seq, dtype=float)
        if len(seq) == 0:
            raise ArityError("empty ratio sequence")
        return float(np.mean(seq[-min(self.span(), len(seq)):]))

    def spread(self, seq) -> float:
        seq = np.asarray(seq, dtype=float)
        tail = seq[-min(self.span(), len(seq)):]
        return float(tail.max() - tail.min())


@dataclass
class DixmierResult:
    value: float
    branch: str
    spread: float
    eccentric: bool
    warnings: list = field(default_factory=list)


def dixmier_trace(mu_A: StepFunction, mu_T: StepFunction,
                  lim: LimitProcedure = LimitProcedure(), k_range=(2, K_MAX),
                  tol: float = 0.05) -> DixmierResult:
    """``Lim(∫_0^t μ_A / ∫_0^t μ_T)`` (integrable ``μ_T``) or ``Lim(∫_t^1 μ_A / ∫_t^1 μ_T)``."""
    ks = np.arange(k_range[0], k_range[1] + 1)
    if mu_T.integrable_at_zero():
        branch = "integrable"
        den = np.array([mu_T.log_integral(-math.inf, -k * LN2) for k in ks])
        num = np.array([mu_A.log_integral(-math.inf, -k * LN2) for k in ks])
    else:
        branch = "non-integrable"
        den = np.array([mu_T.log_integral(-k * LN2, 0.0) for k in ks])
        num = np.array([mu_A.log_integral(-k * LN2, 0.0) for k in ks])
    if np.any(den == -math.inf):
        raise DomainError("reference μ_T vanishes: no trace to normalize by")
    ratios = np.exp(num - den)
    ecc = eccentricity(mu_T, tol, k_range)
    notes = [] if ecc.is_eccentric else ["reference μ_T is not 0-eccentric"]
    return DixmierResult(lim.apply(ratios), branch, lim.spread(ratios), ecc.is_eccentric, notes)


def with_power_head(mu: StepFunction, t_lo: float, t_hi: float):
    """Replace ``μ`` below ``t_lo`` by the power law fitted on ``[t_lo, t_hi]``.

    The fit regresses ``log v_i`` on the log of the midpoint of each step
    lying inside the window, which is the staircase analogue of
    interpolating through jump midpoints; sampling a coarse staircase at
    dyadic ``t`` is biased near the smallest steps.  The head is anchored at
    ``μ(t_lo)`` so the result stays non-increasing and right-continuous.

    Returns
    -------
    StepFunction, float
        The extended function and the fitted exponent ``p`` in ``t^-p``.
    """
    if not 0 < t_lo < t_hi:
        raise DomainError(f"need 0 < t_lo < t_hi, got {t_lo}, {t_hi}")
    b, v = mu.breaks, mu.values
    right = np.r_[b[1:], np.inf]
    m = (b >= t_lo) & (right <= t_hi) & (v > 0)
    if m.sum() < 2:
        raise ArityError(f"need at least 2 steps inside [{t_lo}, {t_hi}], got {int(m.sum())}")
    mid = 0.5 * (b[m] + right[m])
    p = -float(np.polyfit(np.log(mid), np.log(v[m]), 1)[0])
    if p <= 0:
        raise DomainError("μ does not grow towards 0 on the fit range")
    v0 = float(mu(t_lo))
    keep = b > t_lo
    breaks = np.concatenate([[t_lo], b[keep]])
    values = np.concatenate([[v0], v[keep]])
    head = PowerTail(v0 * t_lo ** p, p)
    return StepFunction(breaks, values, head=head, tail=mu.tail), p


def spectral_mu(spec, config=None, power: float = -0.5):
    """``μ`` of ``L^power`` off the kernel, extended below the resolved range by a power head.

    The fit window is the image under ``N⁰`` of the counting regime
    ``[counting_lo/L², counting_hi]``, since ``λ(s) = N⁰(s^(1/power))``.

    Returns
    -------
    StepFunction, float, tuple
        The extended ``μ``, the fitted exponent and the ``t`` window.
    """
    from .spectral.invariants import DEFAULT_SPECTRAL, counting, counting_regime

    config = config or DEFAULT_SPECTRAL
    mu = mu_from_spectrum(spec, power)
    lo, hi = counting_regime(spec, config)
    t_lo, t_hi = float(counting(spec, lo)[1]), float(counting(spec, hi)[1])
    if not 0 < t_lo < t_hi:
        raise ArityError(f"counting regime [{lo}, {hi}] resolves no steps of μ")
    headed, p = with_power_head(mu, t_lo, t_hi)
    return headed, p, (t_lo, t_hi)
