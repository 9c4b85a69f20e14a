"""Rough-isometry and bi-Lipschitz witnesses, and discretization of spaces.

A map ``f: X -> Y`` between enumerable spaces is an integer array with
``f[i]`` the index in ``Y`` of the image of point ``i`` of ``X``.  Witness
constants are fitted on sampled pairs, so a success is relative to the
sample, which the witness records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .covering import greedy_separated
from .errors import DomainError, SpecError
from .spaces import EnumerableSpace, GraphSpace, PointCloudSpace

A_CAP = 16.0
B_CAP = 32.0
EPS_CAP = 32.0


@dataclass
class RoughIsometryWitness:
    a: float
    b: float
    eps: float
    ok: bool
    violations: list = field(default_factory=list)
    pairs_sampled: int = 0
    targets_sampled: int = 0
    seed: int = 0

    def to_dict(self):
        return {"a": self.a, "b": self.b, "eps": self.eps, "ok": self.ok,
                "violations": [list(v) for v in self.violations],
                "pairs_sampled": self.pairs_sampled, "targets_sampled": self.targets_sampled,
                "seed": self.seed}


@dataclass
class BilipschitzWitness:
    c1: float
    c2: float
    ok: bool
    extremal_pairs: tuple = ()
    pairs_sampled: int = 0
    seed: int = 0


def _as_map(X, Y, f) -> np.ndarray:
    if callable(f):
        f = [f(i) for i in range(X.size)]
    f = np.asarray(f, dtype=np.intp)
    if f.shape != (X.size,):
        raise DomainError(f"map must have one image per point of X ({X.size}), got {f.shape}")
    if f.min() < 0 or f.max() >= Y.size:
        raise DomainError("map sends a point outside Y")
    return f


def sample_pairs(n: int, budget: int, seed: int) -> np.ndarray:
    """All pairs ``i < j`` when there are at most ``budget``; otherwise ``budget``
    seeded random pairs with ``i != j``."""
    if n * (n - 1) // 2 <= budget:
        i, j = np.triu_indices(n, k=1)
        return np.column_stack([i, j])
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=budget)
    j = (i + rng.integers(1, n, size=budget)) % n
    return np.column_stack([np.minimum(i, j), np.maximum(i, j)])


def _pair_distances(space, pairs):
    out = np.empty(len(pairs))
    order = np.argsort(pairs[:, 0], kind="stable")
    p = pairs[order]
    starts = np.flatnonzero(np.r_[True, p[1:, 0] != p[:-1, 0]])
    stops = np.r_[starts[1:], len(p)]
    for s, e in zip(starts, stops):
        out[order[s:e]] = space.distances_between(int(p[s, 0]), p[s:e, 1])
    return out


def _sample_points(n, budget, seed):
    if n <= budget:
        return np.arange(n)
    return np.sort(np.random.default_rng(seed).choice(n, size=budget, replace=False))


def image_gap(Y: EnumerableSpace, image: np.ndarray, targets: np.ndarray):
    """Largest distance from a target point of ``Y`` to the image, and the target attaining it."""
    image = np.unique(image)
    worst, where = 0.0, None
    for y in targets.tolist():
        d = float(Y.distances_between(y, image).min())
        if d > worst:
            worst, where = d, y
    return worst, where


def verify_rough_isometry(X: EnumerableSpace, Y: EnumerableSpace, f, budget: int = 4000,
                          seed: int = 0, large_quantile: float = 0.5,
                          caps=(A_CAP, B_CAP, EPS_CAP)) -> RoughIsometryWitness:
    """Fit ``(a, b, eps)`` with ``δ_X/a - b <= δ_Y(f, f) <= a δ_X + b`` and an eps-net image.

    ``a`` is the extreme distortion ratio over pairs whose ``X``-distance is at
    least the ``large_quantile`` of sampled distances; ``b`` is then the
    largest additive residual over all sampled pairs.  ``eps`` is the largest
    distance from a sampled ``Y``-point to the image.
    """
    fmap = _as_map(X, Y, f)
    pairs = sample_pairs(X.size, budget, seed)
    targets = _sample_points(Y.size, budget, seed + 1)
    a_cap, b_cap, eps_cap = caps
    violations = []
    if len(pairs):
        dx = _pair_distances(X, pairs)
        dy = _pair_distances(Y, np.column_stack([fmap[pairs[:, 0]], fmap[pairs[:, 1]]]))
        pos = dx > 0
        cut = np.quantile(dx[pos], large_quantile) if pos.any() else 0.0
        big = pos & (dx >= cut)
        with np.errstate(divide="ignore"):
            ratio = np.maximum(dy[big] / dx[big], dx[big] / np.where(dy[big] > 0, dy[big], 0))
        a = max(1.0, float(ratio.max())) if big.any() else 1.0
        resid = np.maximum(dy - a * dx, dx / a - dy)
        b = max(0.0, float(resid.max()))
        if a > a_cap:
            k = np.flatnonzero(big)[int(np.argmax(ratio))]
            violations.append(("a", int(pairs[k, 0]), int(pairs[k, 1])))
        if b > b_cap:
            k = int(np.argmax(resid))
            violations.append(("b", int(pairs[k, 0]), int(pairs[k, 1])))
    else:
        a, b = 1.0, 0.0
    eps, where = image_gap(Y, fmap, targets)
    if eps > eps_cap:
        violations.append(("eps", where, -1))
    return RoughIsometryWitness(a, b, eps, not violations, violations, len(pairs),
                                len(targets), seed)


def verify_bilipschitz(X: EnumerableSpace, Y: EnumerableSpace, f, budget: int = 4000,
                       seed: int = 0, cap: float = A_CAP) -> BilipschitzWitness:
    """Extreme ratios ``δ_Y(f x, f y) / δ_X(x, y)`` over sampled pairs."""
    fmap = _as_map(X, Y, f)
    pairs = sample_pairs(X.size, budget, seed)
    if len(pairs) == 0:
        return BilipschitzWitness(1.0, 1.0, True, (), 0, seed)
    dx = _pair_distances(X, pairs)
    dy = _pair_distances(Y, np.column_stack([fmap[pairs[:, 0]], fmap[pairs[:, 1]]]))
    keep = dx > 0
    ratio = dy[keep] / dx[keep]
    lo, hi = int(np.argmin(ratio)), int(np.argmax(ratio))
    sub = pairs[keep]
    c1, c2 = float(ratio[lo]), float(ratio[hi])
    ok = c1 >= 1.0 / cap and c2 <= cap
    return BilipschitzWitness(c1, c2, ok, (tuple(map(int, sub[lo])), tuple(map(int, sub[hi]))),
                              len(pairs), seed)


def discretize(space: EnumerableSpace, eps: float, R: float) -> GraphSpace:
    """Graph on a greedy eps-separated net, with edges between net points closer than ``2R``.

    The graph carries the combinatorial path metric (unit edge lengths) and
    each net point is weighted by the measure of its Voronoi cell (nearest
    net point, lowest index on ties), so total measure is preserved.
    """
    space._require_enumerable("discretize")
    if not 0 < eps <= R:
        raise DomainError(f"need 0 < eps <= R, got eps={eps}, R={R}")
    n = space.size
    if n == 0:
        return GraphSpace(0, [], [])
    net = greedy_separated(space, np.arange(n), eps)
    pos = np.full(n, -1, dtype=np.intp)
    pos[net] = np.arange(len(net))
    # Voronoi assignment: every point lies strictly within eps of some net point
    best_d = np.full(n, np.inf)
    owner = np.full(n, -1, dtype=np.intp)
    us, vs = [], []
    for k, c in enumerate(net.tolist()):
        near = space.within(c, eps)
        d = space.distances_between(c, near)
        better = d < best_d[near]
        best_d[near[better]] = d[better]
        owner[near[better]] = k
        nbr = pos[space.within(c, 2 * R)]
        nbr = nbr[nbr > k]
        us.append(np.full(len(nbr), k))
        vs.append(nbr)
    weights = np.bincount(owner, weights=space.weights, minlength=len(net))
    u = np.concatenate(us) if us else np.empty(0, np.intp)
    v = np.concatenate(vs) if vs else np.empty(0, np.intp)
    coords = space.coords[net] if isinstance(space, PointCloudSpace) else None
    # each edge spans less than 2R, so a combinatorial ball of radius rho sits
    # inside the original ball of radius 2R*rho
    budget = math.floor(space.radius_budget / (2 * R)) if math.isfinite(space.radius_budget) \
        else math.inf
    g = GraphSpace(len(net), u, v, None, vertex_weights=weights, base=int(owner[space.base]),
                   coords=coords, name=f"net({space.name},eps={eps},R={R})",
                   radius_budget=budget, edge_length=1.0)
    g.net = net
    g.owner = owner
    return g


def point_map(X: PointCloudSpace, Y: PointCloudSpace, kind: str = "inclusion",
              factor: float = 1.0) -> np.ndarray:
    """Built-in maps by coordinates: ``inclusion`` pads with zeros, ``scaling`` multiplies."""
    if kind not in ("inclusion", "scaling"):
        raise SpecError(f"unknown built-in map {kind!r}; use 'inclusion' or 'scaling'", "map")
    coords = X.coords * (factor if kind == "scaling" else 1.0)
    k = Y.coords.shape[1]
    if coords.shape[1] > k:
        raise DomainError("target has fewer coordinates than the source")
    coords = np.hstack([coords, np.zeros((len(coords), k - coords.shape[1]))])
    return np.asarray([Y.index_of(c) for c in coords], dtype=np.intp)


def load_map(path: str | Path, n_source: int) -> np.ndarray:
    """Read a map table: one ``source target`` index pair per line; ``#`` starts a comment."""
    f = np.full(n_source, -1, dtype=np.intp)
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SpecError(f"line {lineno}: expected 'source target', got {line!r}", "map")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise SpecError(f"line {lineno}: {exc}", "map") from exc
        if not 0 <= i < n_source:
            raise SpecError(f"line {lineno}: source index {i} out of range", "map")
        f[i] = j
    missing = np.flatnonzero(f < 0)
    if len(missing):
        raise SpecError(f"no image for source point {int(missing[0])}", "map")
    return f
