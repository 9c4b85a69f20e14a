"""Metric-measure spaces and the example catalogue.

Two families live here.  Enumerable spaces hold a finite point set (a ball
of a declared radius budget around a base point for infinite models such as
``Z^d``) with a distance oracle and a positive point measure.  Analytic ends
expose only a volume profile ``V(R)``.

All balls are open: ``B(x, R) = {y : d(x, y) < R}``.
"""

from __future__ import annotations

import itertools
import math
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree
from scipy.special import gammaln

from .errors import BudgetError, DomainError, SpecError, UnsupportedOperation
from .specs import SpaceSpec

_P = {"l1": 1, "l2": 2, "linf": np.inf}


class MetricMeasureSpace:
    """Common interface.  Subclasses set ``kind`` to ``"enumerable"`` or ``"analytic"``."""

    kind = "enumerable"
    name = "space"
    radius_budget = math.inf

    @property
    def is_enumerable(self) -> bool:
        return self.kind == "enumerable"

    def _require_enumerable(self, what):
        if not self.is_enumerable:
            raise UnsupportedOperation(f"{what} is not available on analytic space {self.name!r}")


class EnumerableSpace(MetricMeasureSpace):
    """Finite point set with a distance oracle and positive point weights."""

    base: int = 0
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    def distances_from(self, i: int) -> np.ndarray:
        raise NotImplementedError

    def within(self, i: int, radius: float) -> np.ndarray:
        """Sorted indices at distance strictly below ``radius`` from point ``i``."""
        raise NotImplementedError

    def distance(self, i: int, j: int) -> float:
        return float(self.distances_from(i)[j])

    def distances_between(self, i: int, idx) -> np.ndarray:
        return self.distances_from(i)[np.asarray(idx, dtype=np.intp)]

    def check_ball(self, center: int, radius: float):
        if not 0 <= center < self.size:
            raise DomainError(f"point index {center} outside 0..{self.size - 1}")
        if not self._ball_exact(center, radius):
            raise BudgetError(
                f"ball of radius {radius} around {center} exceeds the radius budget "
                f"{self.radius_budget} of {self.name!r}"
            )

    def _ball_exact(self, center, radius):
        if math.isinf(self.radius_budget):
            return True
        # integer-metric clouds store the closed budget ball, so an open ball may reach one step further
        slack = getattr(self, "edge_length", None) or 0.0
        offset = 0.0 if center == self.base else self.distance(self.base, center)
        return offset + radius <= self.radius_budget + slack + 1e-9

    def graph(self) -> "GraphSpace":
        raise UnsupportedOperation(f"{self.name!r} is not graph-backed; discretize it first")


class PointCloudSpace(EnumerableSpace):
    """Points in R^k with a sup-combination of per-block Minkowski norms.

    ``blocks`` is a sequence of ``(metric, start, stop)`` over coordinate
    columns; the distance is the maximum of the block norms (the sup product
    metric).  ``boxsize`` makes every coordinate periodic (tori).
    ``edge_length`` marks lattice-like clouds whose nearest-neighbour graph
    realizes the metric.
    """

    def __init__(self, coords, blocks=None, weights=None, base=0, boxsize=None,
                 radius_budget=math.inf, name="points", edge_length=None, torus=None):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        self.coords = coords
        k = coords.shape[1]
        self.blocks = tuple(blocks) if blocks is not None else (("l2", 0, k),)
        for metric, a, b in self.blocks:
            if metric not in _P or not 0 <= a < b <= k:
                raise SpecError(f"bad metric block {(metric, a, b)}", "metric")
        self.weights = np.ones(len(coords)) if weights is None else np.asarray(weights, float)
        if self.weights.shape != (len(coords),) or np.any(self.weights <= 0):
            raise SpecError("point weights must be positive, one per point", "weights")
        self.base = int(base)
        self.boxsize = boxsize
        self.radius_budget = radius_budget
        self.name = name
        self.edge_length = edge_length
        self.torus = torus

    @cached_property
    def _tree(self):
        return cKDTree(self.coords, boxsize=self.boxsize)

    @property
    def _query_p(self):
        # mixed blocks are bounded below by the l-inf norm, so an l-inf query is a superset
        if len(self.blocks) == 1:
            return _P[self.blocks[0][0]]
        return np.inf

    def _norm(self, diff):
        if self.boxsize is not None:
            diff = np.abs(diff)
            diff = np.minimum(diff, self.boxsize - diff)
        out = None
        for metric, a, b in self.blocks:
            seg = np.abs(diff[:, a:b])
            if metric == "l1":
                d = seg.sum(axis=1)
            elif metric == "l2":
                d = np.sqrt((seg * seg).sum(axis=1))
            else:
                d = seg.max(axis=1)
            out = d if out is None else np.maximum(out, d)
        return out

    def distances_from(self, i):
        return self._norm(self.coords - self.coords[i])

    def distances_between(self, i, idx):
        return self._norm(self.coords[np.asarray(idx)] - self.coords[i])

    def within(self, i, radius):
        if radius <= 0:
            return np.empty(0, dtype=np.intp)
        cand = self._tree.query_ball_point(self.coords[i], radius * (1 + 1e-12) + 1e-12,
                                           p=self._query_p)
        cand = np.asarray(cand, dtype=np.intp)
        cand = cand[self.distances_between(i, cand) < radius]
        cand.sort()
        return cand

    def index_of(self, point) -> int:
        """Index of the point with exactly these coordinates."""
        d, j = self._tree.query(np.asarray(point, float))
        if d > 1e-9:
            raise DomainError(f"no point at {point!r} in {self.name!r}")
        return int(j)

    def graph(self):
        if self.edge_length is None:
            return super().graph()
        pairs = self._tree.query_pairs(self.edge_length * (1 + 1e-9), p=self._query_p,
                                       output_type="ndarray")
        if len(pairs):
            d = self._norm(self.coords[pairs[:, 0]] - self.coords[pairs[:, 1]])
            pairs = pairs[d <= self.edge_length * (1 + 1e-9)]
        w = np.full(len(pairs), float(self.edge_length))
        return GraphSpace(self.size, pairs[:, 0], pairs[:, 1], w, vertex_weights=self.weights,
                          base=self.base, coords=self.coords, name=self.name,
                          radius_budget=self.radius_budget, torus=self.torus,
                          edge_length=self.edge_length)


class GraphSpace(EnumerableSpace):
    """Weighted graph with the shortest-path metric; edge weights act as lengths."""

    def __init__(self, n, u, v, w=None, vertex_weights=None, base=0, coords=None,
                 name="graph", radius_budget=math.inf, torus=None, edge_length=None):
        u = np.asarray(u, dtype=np.intp)
        v = np.asarray(v, dtype=np.intp)
        w = np.ones(len(u)) if w is None else np.asarray(w, dtype=float)
        if np.any(w <= 0):
            raise DomainError("edge weights must be positive")
        if len(u) and (u.min() < 0 or max(u.max(), v.max()) >= n):
            raise SpecError("edge endpoint out of range", "edges")
        keep = u != v
        self.u, self.v, self.w = u[keep], v[keep], w[keep]
        self.n = int(n)
        a = sparse.coo_matrix((self.w, (self.u, self.v)), shape=(n, n)).tocsr()
        # an edge listed in both directions is one edge
        self.adjacency = a.maximum(a.T).tocsr()
        self.weights = (np.ones(n) if vertex_weights is None
                        else np.asarray(vertex_weights, dtype=float))
        if self.weights.shape != (n,) or np.any(self.weights <= 0):
            raise SpecError("vertex weights must be positive, one per vertex", "vertex_weights")
        self.base = int(base)
        self.coords = coords
        self.name = name
        self.radius_budget = radius_budget
        self.torus = torus
        self.edge_length = edge_length

    def with_edge_weights(self, w, name=None) -> "GraphSpace":
        """Same vertices and edges (in ``self.u, self.v`` order) with new weights."""
        return GraphSpace(self.n, self.u, self.v, w, vertex_weights=self.weights, base=self.base,
                          coords=self.coords, name=name or f"{self.name}[reweighted]",
                          radius_budget=self.radius_budget, torus=self.torus)

    def distances_from(self, i):
        return csgraph.dijkstra(self.adjacency, directed=False, indices=int(i))

    def within(self, i, radius):
        if radius <= 0:
            return np.empty(0, dtype=np.intp)
        d = csgraph.dijkstra(self.adjacency, directed=False, indices=int(i), limit=radius)
        return np.flatnonzero(d < radius)

    def graph(self):
        return self


def perturb_edge_weights(graph: GraphSpace, low: float = 1.0, high: float = 2.0,
                         seed: int = 0) -> GraphSpace:
    """Independent uniform edge weights in ``[low, high]`` from a seeded stream."""
    if not 0 < low <= high:
        raise DomainError(f"need 0 < low <= high, got {low}, {high}")
    rng = np.random.default_rng(seed)
    w = rng.uniform(low, high, size=len(graph.u))
    return graph.with_edge_weights(w, name=f"{graph.name}[w~U({low},{high}),seed={seed}]")


class UnionSpace(EnumerableSpace):
    """Disjoint components glued through their base points by a bridge.

    For ``p`` in component ``a`` and ``q`` in component ``b != a`` the distance
    is ``d_a(p, base_a) + bridge + d_b(base_b, q)``.
    """

    def __init__(self, components: Sequence[EnumerableSpace], bridge: float, name="union"):
        self.components = tuple(components)
        self.bridge = float(bridge)
        sizes = [c.size for c in self.components]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.weights = np.concatenate([c.weights for c in self.components])
        self.base = int(self.components[0].base)
        self.name = name
        budgets = [self.components[0].radius_budget]
        budgets += [c.radius_budget + self.bridge for c in self.components[1:]]
        self.radius_budget = min(budgets)
        # integer metrics glued by an integer bridge stay integer
        edges = {getattr(c, "edge_length", None) for c in self.components}
        edge = edges.pop() if len(edges) == 1 else None
        if edge and float(self.bridge / edge).is_integer():
            self.edge_length = edge

    def _locate(self, i):
        a = int(np.searchsorted(self.offsets, i, side="right") - 1)
        return a, int(i - self.offsets[a])

    def distances_from(self, i):
        a, p = self._locate(i)
        comp = self.components[a]
        to_base = comp.distance(p, comp.base)
        parts = []
        for b, other in enumerate(self.components):
            if b == a:
                parts.append(comp.distances_from(p))
            else:
                parts.append(to_base + self.bridge + other.distances_from(other.base))
        return np.concatenate(parts)

    def within(self, i, radius):
        a, p = self._locate(i)
        comp = self.components[a]
        to_base = comp.distance(p, comp.base)
        out = []
        for b, other in enumerate(self.components):
            if b == a:
                out.append(comp.within(p, radius) + self.offsets[b])
            elif to_base + self.bridge < radius:
                out.append(other.within(other.base, radius - to_base - self.bridge)
                           + self.offsets[b])
        out = np.concatenate(out).astype(np.intp)
        out.sort()
        return out


class SubSpace(EnumerableSpace):
    """Induced metric on a subset of a parent space (indices re-numbered)."""

    def __init__(self, parent: EnumerableSpace, indices, base=0, name=None):
        self.parent = parent
        self.indices = np.asarray(sorted(set(int(i) for i in indices)), dtype=np.intp)
        self.weights = parent.weights[self.indices]
        self.base = int(base)
        self.name = name or f"sub({parent.name})"
        self.radius_budget = parent.radius_budget
        self.edge_length = getattr(parent, "edge_length", None)
        self._pos = np.full(parent.size, -1, dtype=np.intp)
        self._pos[self.indices] = np.arange(len(self.indices))

    def distances_from(self, i):
        return self.parent.distances_from(self.indices[i])[self.indices]

    def within(self, i, radius):
        pos = self._pos[self.parent.within(self.indices[i], radius)]
        return pos[pos >= 0]


# ---------------------------------------------------------------------------
# analytic ends
# ---------------------------------------------------------------------------


def sphere_measure(dim: int) -> float:
    """Round measure of the unit sphere S^dim (S^0 counts two points)."""
    return 2 * math.pi ** ((dim + 1) / 2) / math.gamma((dim + 1) / 2)


class EndProfile:
    """Warped half-cylinder ``(1, inf) x A`` with ``ds^2 = dx^2 + f(x)^2 dw^2``.

    ``volume`` optionally supplies a closed form of ``int_1^R f^(N-1)`` (without
    the cross-section factor); otherwise adaptive quadrature is used, split at
    ``breakpoints``.
    """

    def __init__(self, N: int, f: Callable[[float], float], omega: float,
                 volume: Callable[[float], float] | None = None, breakpoints=(),
                 log_volume: Callable[[float], float] | None = None):
        if N < 1:
            raise DomainError("local dimension N must be >= 1")
        if not f(1.0) > 0:
            raise DomainError("warp function must satisfy f(1) > 0")
        self.N, self.f, self.omega = N, f, float(omega)
        self._volume = volume
        self._log_volume = log_volume
        self.breakpoints = tuple(breakpoints)

    def integral(self, R: float) -> float:
        if self._volume is not None:
            return self._volume(R)
        cuts = [1.0] + [b for b in self.breakpoints if 1.0 < b < R] + [R]
        pieces = [integrate.quad(lambda x: self.f(x) ** (self.N - 1), a, b, limit=200)[0]
                  for a, b in zip(cuts, cuts[1:])]
        return math.fsum(pieces)

    def volume(self, R: float) -> float:
        return self.omega * self.integral(R)

    def log_volume(self, R: float) -> float:
        if self._log_volume is not None:
            return math.log(self.omega) + self._log_volume(R)
        return math.log(self.volume(R))


class AnalyticEnd(MetricMeasureSpace):
    kind = "analytic"

    def __init__(self, profile: EndProfile, name: str):
        self.profile = profile
        self.name = name

    def _check(self, R):
        if not R > 0:
            raise DomainError(f"radius must be > 0, got {R}")
        if not R > 1:
            raise DomainError(f"radius must exceed the end's boundary coordinate 1, got {R}")

    def volume(self, R: float) -> float:
        self._check(R)
        return self.profile.volume(R)

    def log_volume(self, R: float) -> float:
        self._check(R)
        return self.profile.log_volume(R)


# -- oscillating warp ------------------------------------------------------

def _osc_tables():
    a = [0.0]
    for n in range(1, 10):
        a.append(a[-1] + 2.0 ** (2 ** n))
    b = [0.0]
    c = [0.0]
    for n in range(1, 5):
        b.append(b[-1] + math.sqrt(2.0 ** (2 ** (2 * n + 1)) + 1))
        c.append(c[-1] + (2.0 ** (2 ** (2 * n)) - 1))
    return tuple(a), tuple(b), tuple(c)


OSC_A, OSC_B, OSC_C = _osc_tables()
OSC_HORIZON = OSC_A[9]


def _osc_piece(x):
    """(branch, n, left endpoint, offset constant) for x in [1, a9)."""
    if x <= OSC_A[1]:
        return 0, 0, 1.0, 0.0
    k = int(np.searchsorted(OSC_A, x, side="left"))  # a_{k-1} < x <= a_k
    if k % 2 == 0:  # [a_{2n-1}, a_{2n}]
        n = k // 2
        return 1, n, OSC_A[k - 1], 2 + OSC_B[n - 1] + OSC_C[n - 1]
    n = (k - 1) // 2  # [a_{2n}, a_{2n+1}]
    return 2, n, OSC_A[k - 1], 2 + OSC_B[n - 1] + OSC_C[n]


def oscillating_f(x: float) -> float:
    """Warp function of the oscillating end (piecewise sqrt / linear).

    Raises
    ------
    DomainError
        For ``x < 1`` or ``x >= a_9`` (about 1.34e154), the overflow horizon.
    """
    if x < 1:
        raise DomainError(f"oscillating_f needs x >= 1, got {x}")
    if not x < OSC_HORIZON:
        raise DomainError(f"x={x} beyond the oscillating-end horizon a_9 = {OSC_HORIZON:.6g}")
    branch, _, left, const = _osc_piece(x)
    if branch == 0:
        return math.sqrt(x)
    if branch == 1:
        return const + (x - left)
    return const + math.sqrt(x - left + 1)


def _osc_piece_integral(branch, left, const, lo, hi):
    # integral over [lo, hi] inside one branch
    if branch == 0:
        return (2 / 3) * (hi ** 1.5 - lo ** 1.5)
    if branch == 1:
        return const * (hi - lo) + ((hi - left) ** 2 - (lo - left) ** 2) / 2
    return const * (hi - lo) + (2 / 3) * ((hi - left + 1) ** 1.5 - (lo - left + 1) ** 1.5)


def oscillating_integral(R: float) -> float:
    """``int_1^R f(x) dx`` for the oscillating warp, by piecewise antiderivatives."""
    if not 1 <= R < OSC_HORIZON:
        raise DomainError(f"R={R} outside [1, a_9)")
    edges = [1.0] + [a for a in OSC_A[1:] if a < R] + [R]
    parts = []
    for lo, hi in zip(edges, edges[1:]):
        branch, _, left, const = _osc_piece(hi)
        parts.append(_osc_piece_integral(branch, left, const, lo, hi))
    parts.sort(reverse=True)
    return math.fsum(parts)


def _standard_profile(N, D, omega):
    expo = (D - 1) / (N - 1) if N > 1 else 0.0

    def f(x):
        return x ** expo

    def vol(R):
        return (R ** D - 1) / D

    def log_vol(R):
        return D * math.log(R) + math.log1p(-R ** -D) - math.log(D)

    return EndProfile(N, f, omega, volume=vol, log_volume=log_vol)


def _davies_profile(omega):
    def f(x):
        return 2 * x * math.log(x) + x

    def vol(R):
        return R * R * math.log(R)

    def log_vol(R):
        return 2 * math.log(R) + math.log(math.log(R))

    return EndProfile(2, f, omega, volume=vol, log_volume=log_vol)


def _oscillating_profile(omega):
    return EndProfile(2, oscillating_f, omega, volume=oscillating_integral,
                      breakpoints=OSC_A[1:])


# ---------------------------------------------------------------------------
# comparison volumes
# ---------------------------------------------------------------------------


def comparison_sine(curvature: float, r: float) -> float:
    """``S_k(r)``: sinh, linear or sine profile for curvature ``k`` <0, =0, >0."""
    if curvature < 0:
        s = math.sqrt(-curvature)
        return math.sinh(r * s) / s
    if curvature == 0:
        return r
    s = math.sqrt(curvature)
    return math.sin(r * s) / s


def model_ball_volume(curvature: float, n: int, r: float) -> float:
    """Volume of an r-ball in the simply connected n-dimensional model space.

    The constant ``n pi^(n/2) / Gamma(n/2 + 1)`` (area of the unit sphere) makes
    the flat case the Euclidean ball volume.
    """
    if n < 1 or int(n) != n:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    if not r > 0:
        raise DomainError(f"radius must be > 0, got {r}")
    if curvature > 0 and r >= math.pi / math.sqrt(curvature):
        raise DomainError(f"radius {r} reaches the conjugate radius pi/sqrt({curvature})")
    const = n * math.exp(n / 2 * math.log(math.pi) - gammaln(n / 2 + 1))
    if curvature == 0:
        return const * r ** n / n
    if n == 1:
        return const * r
    val, _ = integrate.quad(lambda t: comparison_sine(curvature, t) ** (n - 1), 0.0, r,
                            epsabs=0, epsrel=1e-13, limit=200)
    return const * val


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------


def _lattice_points(d, radius, metric):
    k = int(math.floor(radius))
    axis = np.arange(-k, k + 1, dtype=float)
    pts = np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)
    if metric == "l1":
        pts = pts[np.abs(pts).sum(axis=1) <= radius]
    return pts


def _lexsorted(pts):
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def lattice(d: int, metric: str = "graph", budget: float = 64) -> PointCloudSpace:
    m = "l1" if metric == "graph" else "linf"
    pts = _lexsorted(_lattice_points(d, budget, m))
    space = PointCloudSpace(pts, ((m, 0, d),), radius_budget=float(math.floor(budget)),
                            name=f"lattice(d={d},{metric})", edge_length=1.0)
    space.base = space.index_of(np.zeros(d))
    return space


def cycle_torus(d: int, side: int, metric: str = "graph") -> PointCloudSpace:
    m = "l1" if metric == "graph" else "linf"
    axis = np.arange(side, dtype=float)
    pts = np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)
    # radius below side/2 never wraps; balls are then lattice balls
    return PointCloudSpace(pts, ((m, 0, d),), boxsize=float(side),
                           radius_budget=(side - 1) // 2,
                           name=f"torus(d={d},side={side})", edge_length=1.0,
                           torus=(d, side))


def grid_cube(d: int, step: float) -> PointCloudSpace:
    n = int(round(1 / step))
    axis = np.arange(n + 1) * (1.0 / n)
    pts = np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)
    return PointCloudSpace(pts, (("l2", 0, d),), weights=np.full(len(pts), step ** d),
                           name=f"grid_cube(d={d},step={step})")


def region_alpha(alpha: float, resolution: float = 0.25, budget: float = 256.0) -> PointCloudSpace:
    """Grid sample of ``{x >= 0, |y| <= x^alpha}`` inside the disc of radius ``budget``."""
    h = resolution
    xs = np.arange(0, budget + h / 2, h)
    cols = []
    for x in xs:
        k = math.floor(x ** alpha / h + 1e-9)
        ys = np.arange(-k, k + 1) * h
        cols.append(np.column_stack([np.full(len(ys), x), ys]))
    pts = np.vstack(cols)
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= budget]
    pts = _lexsorted(pts)
    space = PointCloudSpace(pts, (("l2", 0, 2),), weights=np.full(len(pts), h * h),
                            radius_budget=budget, name=f"region_alpha(alpha={alpha})")
    space.base = space.index_of((0.0, 0.0))
    return space


def cantor(depth: int) -> PointCloudSpace:
    """Left endpoints of the depth-``depth`` middle-thirds intervals."""
    digits = np.array(list(itertools.product((0, 2), repeat=depth)), dtype=float)
    pts = np.sort(digits @ (3.0 ** -np.arange(1, depth + 1)))
    space = PointCloudSpace(pts[:, None], (("l2", 0, 1),),
                            weights=np.full(len(pts), 2.0 ** -depth), name=f"cantor({depth})")
    # triadic radii r = 3^-m / 2 stay off the set's distance lattice
    space.box_grid = {"scale_ratio": 3.0, "r_min": 0.5 * 3.0 ** -depth,
                      "r_max": 0.5 * 3.0 ** -1 * (1 + 1e-9)}
    return space


def disk_chain(count: int, resolution: float = 1 / 32) -> PointCloudSpace:
    """Grid samples of the open discs of radius 1/4 around ``(n, 0)``, ``|n| <= count``."""
    h = resolution
    k = int(math.ceil(0.25 / h))
    off = np.array([(i * h, j * h) for i in range(-k, k + 1) for j in range(-k, k + 1)
                    if math.hypot(i * h, j * h) < 0.25])
    pts = np.vstack([off + (n, 0.0) for n in range(-count, count + 1)])
    pts = _lexsorted(pts)
    space = PointCloudSpace(pts, (("l2", 0, 2),), weights=np.full(len(pts), h * h),
                            radius_budget=count + 0.25, name=f"disk_chain({count})")
    space.base = space.index_of((0.0, 0.0))
    return space


def product_space(factors: Sequence[PointCloudSpace]) -> PointCloudSpace:
    """Cartesian product with the sup metric of the factor metrics."""
    for fac in factors:
        if not isinstance(fac, PointCloudSpace) or fac.boxsize is not None:
            raise SpecError("product factors must be non-periodic point clouds", "specs")
    grids = np.meshgrid(*[np.arange(f.size) for f in factors], indexing="ij")
    idx = [g.ravel() for g in grids]
    coords = np.hstack([f.coords[i] for f, i in zip(factors, idx)])
    weights = np.prod([f.weights[i] for f, i in zip(factors, idx)], axis=0)
    blocks, col = [], 0
    for f in factors:
        for metric, a, b in f.blocks:
            blocks.append((metric, col + a, col + b))
        col += f.coords.shape[1]
    edge = factors[0].edge_length
    if any(f.edge_length != edge for f in factors):
        edge = None
    base = int(np.ravel_multi_index([f.base for f in factors], [f.size for f in factors]))
    return PointCloudSpace(coords, blocks, weights=weights, base=base,
                           radius_budget=min(f.radius_budget for f in factors),
                           name="x".join(f.name for f in factors), edge_length=edge)


def build_space(spec: SpaceSpec) -> MetricMeasureSpace:
    """Construct the space described by ``spec``."""
    p = spec.params
    k = spec.kind
    if k == "lattice":
        return lattice(p["d"], p["metric"], p["budget"])
    if k == "cycle_torus":
        return cycle_torus(p["d"], p["side"], p["metric"])
    if k == "grid_cube":
        return grid_cube(p["d"], p["step"])
    if k == "region_alpha":
        return region_alpha(p["alpha"], p["resolution"], p["budget"])
    if k == "cantor":
        return cantor(p["depth"])
    if k == "disk_chain":
        return disk_chain(p["count"], p["resolution"])
    if k == "points":
        coords = np.asarray(p["coords"], dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        metric = p["metric"]
        return PointCloudSpace(coords, ((metric, 0, coords.shape[1]),), weights=p["weights"],
                               base=p["base"], name="points")
    if k == "graph":
        edges = p["edges"]
        u = [int(e[0]) for e in edges]
        v = [int(e[1]) for e in edges]
        w = [float(e[2]) if len(e) == 3 else 1.0 for e in edges]
        n = p["n"] if p["n"] is not None else (max(u + v) + 1 if edges else 1)
        return GraphSpace(n, u, v, w, vertex_weights=p["vertex_weights"], base=p["base"])
    if k == "union":
        comps = [build_space(c) for c in spec.children]
        return UnionSpace(comps, p["bridge"])
    if k == "product":
        return product_space([build_space(c) for c in spec.children])
    if k == "standard_end":
        N, D = p["N"], p["D"]
        omega = p["omega"] if p["omega"] is not None else sphere_measure(N - 1)
        return AnalyticEnd(_standard_profile(N, D, omega), f"standard_end(N={N},D={D})")
    if k == "davies_remark_end":
        omega = p["omega"] if p["omega"] is not None else 2 * math.pi
        return AnalyticEnd(_davies_profile(omega), "davies_remark_end")
    if k == "oscillating_end":
        return AnalyticEnd(_oscillating_profile(p["omega"]), "oscillating_end")
    raise SpecError(f"unknown kind {k!r}", "kind")


def ball_points(space: MetricMeasureSpace, center: int, R: float) -> np.ndarray:
    """Indices ``p`` with ``d(center, p) < R``, ascending."""
    space._require_enumerable("ball_points")
    space.check_ball(center, R)
    return space.within(center, R)


def ball_volume(space: MetricMeasureSpace, center: int | None, R: float) -> float:
    """Measure of the open ball ``B(center, R)``; ``center`` is ignored for ends."""
    if not R > 0:
        raise DomainError(f"radius must be > 0, got {R}")
    if not space.is_enumerable:
        return space.volume(R)
    center = space.base if center is None else center
    pts = ball_points(space, center, R)
    return float(math.fsum(space.weights[pts]))


def log_ball_volume(space: MetricMeasureSpace, center: int | None, R: float) -> float:
    if not space.is_enumerable:
        if not R > 0:
            raise DomainError(f"radius must be > 0, got {R}")
        return space.log_volume(R)
    return math.log(ball_volume(space, center, R))
