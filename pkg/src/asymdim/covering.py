"""Packing and covering numbers of finite regions.

``packing_number`` is the greedy maximal packing: any maximal family of
disjoint open r-balls centred in the region already brackets the covering
numbers, ``n_r >= nu_r >= n_2r``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError
from .spaces import EnumerableSpace, ball_points

EXACT_BUDGET = 24


@dataclass(frozen=True)
class Ball:
    """Open ball region; ``center=None`` means the space's base point."""

    center: int | None
    radius: float


def resolve_region(space: EnumerableSpace, region) -> np.ndarray:
    """Region as sorted point indices.

    ``region`` may be ``None`` (the whole space), a :class:`Ball`, or an
    explicit index sequence.
    """
    space._require_enumerable("region")
    if region is None:
        return np.arange(space.size)
    if isinstance(region, Ball):
        center = space.base if region.center is None else region.center
        return ball_points(space, int(center), float(region.radius))
    return np.unique(np.asarray(region, dtype=np.intp))


def _members(space, idx):
    mask = np.zeros(space.size, dtype=bool)
    mask[idx] = True
    return mask


def greedy_separated(space: EnumerableSpace, idx: np.ndarray, separation: float) -> np.ndarray:
    """Scan ``idx`` in ascending order; keep a point iff it is at distance
    ``>= separation`` from every point kept so far."""
    blocked = np.zeros(space.size, dtype=bool)
    keep = []
    for i in idx.tolist():
        if blocked[i]:
            continue
        keep.append(i)
        blocked[space.within(i, separation)] = True
    return np.asarray(keep, dtype=np.intp)


def packing_centers(space, region, r: float) -> np.ndarray:
    """Centres of the greedy maximal packing by disjoint open r-balls."""
    idx = resolve_region(space, region)
    return greedy_separated(space, idx, 2.0 * r)


def packing_number(space, region, r: float) -> int:
    """Size of the greedy maximal packing of ``region`` by open r-balls.

    Two open r-balls centred at region points are disjoint iff the centres are
    at distance ``>= 2r`` (region points are the only points of the space).

    Examples
    --------
    >>> from asymdim.specs import make_spec
    >>> from asymdim.spaces import build_space
    >>> line = build_space(make_spec("points", coords=[0, 1, 2, 3, 4]))
    >>> packing_number(line, None, 0.6)
    3
    """
    return int(len(packing_centers(space, region, r)))


def _coverage(space, idx, r):
    member = _members(space, idx)
    pos = np.full(space.size, -1, dtype=np.intp)
    pos[idx] = np.arange(len(idx))
    cover = []
    for i in idx.tolist():
        hits = space.within(i, r)
        cover.append(pos[hits[member[hits]]])
    return cover


def covering_upper(space, region, r: float) -> int:
    """Greedy set-cover count: an upper bound on the least number of open r-balls.

    Candidate centres are region points; ties in coverage go to the lowest index.
    """
    idx = resolve_region(space, region)
    if len(idx) == 0:
        return 0
    cover = _coverage(space, idx, r)
    uncovered = np.ones(len(idx), dtype=bool)
    left = len(idx)
    heap = [(-len(c), k) for k, c in enumerate(cover)]
    heapq.heapify(heap)
    count = 0
    while left:
        neg, k = heapq.heappop(heap)
        gain = int(uncovered[cover[k]].sum())
        if gain != -neg:
            # stale priority: re-insert with the current gain (lazy greedy)
            if gain:
                heapq.heappush(heap, (-gain, k))
            continue
        uncovered[cover[k]] = False
        left -= gain
        count += 1
    return count


def covering_exact(space, region, r: float) -> int:
    """Least number of open r-balls centred at region points covering the region.

    Exhaustive branch-and-bound; limited to ``EXACT_BUDGET`` points.
    """
    idx = resolve_region(space, region)
    n = len(idx)
    if n == 0:
        return 0
    if n > EXACT_BUDGET:
        raise BudgetError(
            f"covering_exact is limited to {EXACT_BUDGET} points (got {n}); "
            "use packing_number for larger regions"
        )
    masks = []
    for c in _coverage(space, idx, r):
        m = 0
        for j in c.tolist():
            m |= 1 << j
        masks.append(m)
    full = (1 << n) - 1
    # for each point, the candidate balls containing it, largest first
    holders = [sorted((k for k in range(n) if masks[k] >> j & 1),
                      key=lambda k: -bin(masks[k]).count("1")) for j in range(n)]
    best = [n]

    def search(covered, used):
        if covered == full:
            best[0] = min(best[0], used)
            return
        if used + 1 >= best[0]:
            return
        rest = ~covered & full
        j = (rest & -rest).bit_length() - 1
        for k in holders[j]:
            search(covered | masks[k], used + 1)

    search(0, 0)
    return best[0]


@dataclass(frozen=True)
class CoveringCount:
    r: float
    region_size: int
    nu: int
    n_upper: int
    n_exact: int | None = None


def covering_counts(space, region, r: float, exact: bool = False) -> CoveringCount:
    idx = resolve_region(space, region)
    return CoveringCount(
        r=r,
        region_size=len(idx),
        nu=packing_number(space, idx, r),
        n_upper=covering_upper(space, idx, r),
        n_exact=covering_exact(space, idx, r) if exact else None,
    )
