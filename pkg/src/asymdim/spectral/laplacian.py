"""Graph Laplacians and volume-normalized spectra.

A :class:`WeightedSpectrum` pairs eigenvalues ``λ_j`` with weights
``w_j = Σ_v m(v) φ_j(v)² / Σ_v m(v)``, so that ``Σ_j w_j f(λ_j)`` is the
measure-normalized trace of ``f(L)``.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal

from ..errors import BudgetError, DomainError, SpecError, UnsupportedOperation
from ..spaces import GraphSpace, MetricMeasureSpace

DENSE_BUDGET = 4096
ZERO_TOL = 1e-10
CACHE_MAGIC = "spectrum-v1"


@dataclass(frozen=True)
class LaplacianOperator:
    """``L = D - W`` on functions, with the vertex measure used for traces."""

    matrix: sparse.csr_matrix
    vertex_weights: np.ndarray
    source: str = "graph"
    torus: tuple | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def volume(self) -> float:
        return float(math.fsum(self.vertex_weights))


@dataclass(frozen=True)
class WeightedSpectrum:
    lam: np.ndarray
    w: np.ndarray
    normalization: float = 1.0
    source: str = "spectrum"
    volume: float = 1.0
    method: str = "given"
    side: int | None = None

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if lam.shape != w.shape or lam.ndim != 1:
            raise DomainError("eigenvalues and weights must be equal-length vectors")
        if np.any(w <= 0):
            raise DomainError("spectral weights must be positive")
        if np.any(lam < 0):
            raise DomainError("eigenvalues must be non-negative")
        order = np.argsort(lam, kind="stable")
        object.__setattr__(self, "lam", lam[order])
        object.__setattr__(self, "w", w[order])

    def __len__(self):
        return len(self.lam)

    @classmethod
    def from_pairs(cls, pairs, **kw) -> "WeightedSpectrum":
        pairs = list(pairs)
        lam = [p[0] for p in pairs]
        w = [p[1] for p in pairs]
        kw.setdefault("normalization", math.fsum(w))
        return cls(np.asarray(lam, float), np.asarray(w, float), **kw)

    @property
    def lam_max(self) -> float:
        return float(self.lam[-1]) if len(self.lam) else 0.0

    @property
    def zero_mask(self) -> np.ndarray:
        """Kernel modes: ``λ <= ZERO_TOL * λ_max``."""
        return self.lam <= ZERO_TOL * self.lam_max

    @property
    def zero_weight(self) -> float:
        return float(math.fsum(self.w[self.zero_mask]))

    @property
    def gap(self) -> float:
        """Smallest non-kernel eigenvalue."""
        nz = self.lam[~self.zero_mask]
        if len(nz) == 0:
            raise DomainError("spectrum has no non-zero eigenvalue")
        return float(nz[0])

    @property
    def scale(self) -> float:
        """Effective linear size ``2π/√gap``; equals the side on a cycle torus."""
        if self.side is not None:
            return float(self.side)
        return 2 * math.pi / math.sqrt(self.gap)


def graph_laplacian(graph) -> LaplacianOperator:
    """Combinatorial Laplacian of a graph-backed space (or a space with a lattice graph)."""
    if isinstance(graph, MetricMeasureSpace) and not isinstance(graph, GraphSpace):
        graph._require_enumerable("graph_laplacian")
        graph = graph.graph()
    if np.any(graph.w <= 0):
        raise DomainError("edge weights must be positive")
    a = graph.adjacency
    deg = np.asarray(a.sum(axis=1)).ravel()
    lap = (sparse.diags(deg) - a).tocsr()
    torus = None
    if getattr(graph, "torus", None) and np.all(graph.w == 1.0):
        torus = tuple(graph.torus)
    return LaplacianOperator(lap, np.asarray(graph.weights, float), graph.name, torus)


def _dense(op: LaplacianOperator) -> WeightedSpectrum:
    if op.n > DENSE_BUDGET:
        raise BudgetError(f"dense eigensolver budget is {DENSE_BUDGET} vertices, got {op.n}; "
                          "use method='lanczos'")
    lam, phi = np.linalg.eigh(op.matrix.toarray())
    m = op.vertex_weights
    w = (m @ (phi * phi)) / m.sum()
    lam = np.clip(lam, 0.0, None)
    keep = w > 0
    return WeightedSpectrum(lam[keep], w[keep], 1.0, op.source, op.volume, "dense",
                            op.torus[1] if op.torus else None)


def cycle_eigenvalues(side: int) -> np.ndarray:
    k = np.arange(side)
    return 2.0 - 2.0 * np.cos(2 * np.pi * k / side)


def torus_spectrum(d: int, side: int, source: str | None = None) -> WeightedSpectrum:
    """Closed-form spectrum of the d-fold product of side-``side`` cycles."""
    c = cycle_eigenvalues(side)
    lam = np.zeros(1)
    for _ in range(d):
        lam = (lam[:, None] + c[None, :]).ravel()
    n = side ** d
    return WeightedSpectrum(lam, np.full(n, 1.0 / n), 1.0,
                            source or f"torus(d={d},side={side})", float(n), "analytic-torus", side)


def _lanczos(matrix, v0, steps):
    n = len(v0)
    steps = min(steps, n)
    Q = np.zeros((steps, n))
    alpha = np.zeros(steps)
    beta = np.zeros(steps)
    q = v0 / np.linalg.norm(v0)
    k = 0
    for k in range(steps):
        Q[k] = q
        z = matrix @ q
        alpha[k] = q @ z
        z -= Q[:k + 1].T @ (Q[:k + 1] @ z)
        z -= Q[:k + 1].T @ (Q[:k + 1] @ z)
        b = np.linalg.norm(z)
        if k + 1 == steps or b < 1e-12:
            break
        beta[k] = b
        q = z / b
    m = k + 1
    theta, s = eigh_tridiagonal(alpha[:m], beta[:m - 1])
    return np.clip(theta, 0.0, None), s[0] ** 2


def _slq(op: LaplacianOperator, probes: int, steps: int, seed: int) -> WeightedSpectrum:
    """Stochastic Lanczos quadrature; one independent seeded stream per probe."""
    if probes < 1 or steps < 1:
        raise DomainError("lanczos needs probes >= 1 and steps >= 1")
    m = op.vertex_weights
    scale = np.sqrt(m / m.mean())
    lams, ws = [], []
    for child in np.random.SeedSequence(seed).spawn(probes):
        rng = np.random.default_rng(child)
        z = rng.choice((-1.0, 1.0), size=op.n) * scale
        theta, tau2 = _lanczos(op.matrix, z, steps)
        # ||z||^2 = n, so each probe's weights sum to one
        lams.append(theta)
        ws.append(tau2 / probes)
    lam = np.concatenate(lams)
    w = np.concatenate(ws)
    keep = w > 0
    return WeightedSpectrum(lam[keep], w[keep], 1.0, op.source, op.volume, "lanczos",
                            op.torus[1] if op.torus else None)


def spectrum(op: LaplacianOperator, method: str = "auto", probes: int = 32, steps: int = 80,
             seed: int = 0) -> WeightedSpectrum:
    """Volume-normalized spectrum by ``dense``, ``analytic-torus`` or ``lanczos``.

    ``auto`` picks the closed form on unit-weight tori, else dense within the
    budget; it never falls back to the stochastic method silently.
    """
    if method == "auto":
        method = "analytic-torus" if op.torus else "dense"
    if method == "dense":
        return _dense(op)
    if method == "analytic-torus":
        if not op.torus:
            raise UnsupportedOperation("analytic-torus needs a unit-weight cycle_torus")
        d, side = op.torus
        if not np.allclose(op.vertex_weights, op.vertex_weights[0]):
            raise UnsupportedOperation("analytic-torus needs uniform vertex weights")
        return torus_spectrum(d, side, op.source)
    if method == "lanczos":
        return _slq(op, probes, steps, seed)
    raise SpecError(f"unknown method {method!r}; use dense, analytic-torus or lanczos", "method")


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------


def encode_source(spec_hash: str, index: int, method: str, volume: float,
                  side: int | None) -> str:
    return f"{spec_hash}:{index}:{method}:{volume!r}:{side if side is not None else '-'}"


def write_spectrum(spec: WeightedSpectrum, path: str | Path, source_id: str | None = None):
    """Write the text cache atomically (temp file in the same directory, then rename).

    Layout: ``spectrum-v1 <count> <normalization> <source-id>`` followed by one
    ``λ w`` line per entry, floats in shortest round-trip decimal form.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sid = source_id or encode_source("none", 0, spec.method, spec.volume, spec.side)
    if any(c.isspace() for c in sid):
        raise SpecError("source id must not contain whitespace", "source")
    lines = [f"{CACHE_MAGIC} {len(spec)} {spec.normalization!r} {sid}"]
    lines += [f"{float(a)!r} {float(b)!r}" for a, b in zip(spec.lam, spec.w)]
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_spectrum(path: str | Path) -> WeightedSpectrum:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise SpecError(f"{path}: empty spectrum cache", "cache")
    head = lines[0].split()
    if len(head) != 4 or head[0] != CACHE_MAGIC:
        raise SpecError(f"{path}: bad header {lines[0]!r}", "cache")
    count, norm, sid = int(head[1]), float(head[2]), head[3]
    body = np.loadtxt(lines[1:], ndmin=2) if count else np.zeros((0, 2))
    if body.shape != (count, 2):
        raise SpecError(f"{path}: expected {count} entries, found {len(body)}", "cache")
    parts = sid.split(":")
    method, volume, side = "cached", 1.0, None
    if len(parts) == 5:
        method, volume = parts[2], float(parts[3])
        side = None if parts[4] == "-" else int(parts[4])
    return WeightedSpectrum(body[:, 0], body[:, 1], norm, sid, volume, method, side)
