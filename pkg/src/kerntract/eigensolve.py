"""Dense symmetric eigensolver and Nyström discretisation of kernel operators.

The eigensolver is a cyclic Jacobi method.  Rotations are scheduled in
round-robin order so that every round touches ``n // 2`` disjoint index
pairs, which lets a whole round be applied with a handful of vectorised
numpy operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
    NumericalDomainError,
)

# Eigenvalues in (-CLIP_TOL, 0) are rounding noise and get clipped to zero.
CLIP_TOL = 1e-10
# Positive Nyström eigenvalues below NOISE_REL * lambda_1 are rounding noise
# of the dense solve, not resolved operator eigenvalues.
NOISE_REL = 1e-14
MAX_SWEEPS = 100
OFF_TOL = 1e-14

_ONE_MINUS = float(np.nextafter(1.0, 0.0))


class SymMatrix(np.ndarray):
    """Square ndarray checked for symmetry at construction."""

    def __new__(cls, data, sym_tol: float = 1e-12):
        a = np.array(data, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidArgumentError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericalDomainError("matrix has non-finite entries")
        scale = np.maximum(1.0, np.abs(a))
        if np.any(np.abs(a - a.T) > sym_tol * scale):
            raise InvalidArgumentError("matrix is not symmetric")
        return a.view(cls)


@dataclass(frozen=True, eq=False)
class MercerSpectrum:
    """Non-increasing eigenvalues of a kernel integral operator.

    ``eigenvectors`` (when present) holds the node values of the discrete
    eigenvectors column-wise, in the order of ``eigenvalues``.
    ``tail_ratio`` is the estimated geometric ratio of the eigenvalues that
    were truncated away and ``trace`` the operator trace.
    """

    eigenvalues: np.ndarray
    tail_ratio: float = 0.0
    trace: float = float("nan")
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size == 0:
            raise InvalidArgumentError("spectrum needs at least one eigenvalue")
        if np.any(np.diff(ev) > 0):
            raise InvalidArgumentError("eigenvalues must be non-increasing")
        if np.any(ev < -CLIP_TOL):
            raise NotPositiveDefiniteError(f"eigenvalue {ev.min():.3e} below -{CLIP_TOL}")
        if not 0.0 <= self.tail_ratio < 1.0:
            raise InvalidArgumentError(f"tail_ratio {self.tail_ratio} outside [0, 1)")
        ev = np.where(ev < 0, 0.0, ev)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        if np.isnan(self.trace):
            object.__setattr__(self, "trace", float(ev.sum()))

    def __len__(self):
        return self.eigenvalues.size

    def __getitem__(self, j):
        return self.eigenvalues[j]

    @property
    def tail_estimate(self) -> float:
        """Geometric estimate of the sum of all truncated eigenvalues."""
        rho = self.tail_ratio
        return float(self.eigenvalues[-1] * rho / (1.0 - rho))

    @property
    def next_bound(self) -> float:
        """Estimate of the first eigenvalue beyond the truncation."""
        return float(self.eigenvalues[-1] * self.tail_ratio)

    @classmethod
    def rank_one(cls, count: int = 1) -> "MercerSpectrum":
        """Spectrum (1, 0, 0, ...) of the constant kernel."""
        ev = np.zeros(count)
        ev[0] = 1.0
        return cls(ev, tail_ratio=0.0, trace=1.0)


def _round_robin(m: int):
    """Yield (p, q) index arrays covering all pairs of range(m) once, m even."""
    order = np.arange(m)
    half = m // 2
    for _ in range(m - 1):
        p = order[:half]
        q = order[::-1][:half]
        yield np.minimum(p, q), np.maximum(p, q)
        order = np.concatenate(([order[0]], np.roll(order[1:], 1)))


def _jacobi(a: np.ndarray, want_vectors: bool):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n) if want_vectors else None
    if n == 1:
        return a.diagonal().copy(), v
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return np.zeros(n), v

    m = n + (n % 2)
    rounds = []
    for p, q in _round_robin(m):
        keep = q < n
        rounds.append((p[keep], q[keep]))

    def off_norm():
        return np.linalg.norm(a - np.diag(a.diagonal()))

    for _ in range(MAX_SWEEPS):
        if off_norm() <= OFF_TOL * fro:
            return a.diagonal().copy(), v
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = a[p, p], a[q, q]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            cp, cq = a[:, p], a[:, q]
            a[:, p] = cp * c - cq * s
            a[:, q] = cp * s + cq * c
            rp, rq = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            a[p, q] = 0.0
            a[q, p] = 0.0
            if v is not None:
                vp, vq = v[:, p], v[:, q]
                v[:, p] = vp * c - vq * s
                v[:, q] = vp * s + vq * c
    raise ConvergenceError(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")


def sym_eig(m, want_vectors: bool = True):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted
    descending (stable for ties) and eigenvectors as matching columns, or
    ``None`` for the vectors when ``want_vectors`` is false.
    """
    a = np.asarray(SymMatrix(m), dtype=float)
    a = 0.5 * (a + a.T)
    w, v = _jacobi(a, want_vectors)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    if v is not None:
        v = v[:, order]
    return w, v


def spectrum_from_matrix(m, trace: Optional[float] = None, count: Optional[int] = None,
                         noise_rel: float = NOISE_REL, want_vectors: bool = True) -> MercerSpectrum:
    """MercerSpectrum of a positive semi-definite matrix."""
    w, v = sym_eig(m, want_vectors)
    if w[-1] < -CLIP_TOL:
        raise NotPositiveDefiniteError(f"eigenvalue {w[-1]:.3e} below -{CLIP_TOL}")
    w = np.where(w < 0, 0.0, w)
    if w[0] > 0:
        w = np.where(w < noise_rel * w[0], 0.0, w)
    if count is None:
        count = w.size
    if trace is None:
        trace = float(np.trace(np.asarray(m)))
    return MercerSpectrum(
        eigenvalues=w[:count],
        tail_ratio=_tail_ratio(w[:count]),
        trace=trace,
        eigenvectors=None if v is None else v[:, :count],
    )


def _tail_ratio(w: np.ndarray) -> float:
    if w.size < 2 or w[-2] <= 0:
        return 0.0
    return float(min(max(w[-1] / w[-2], 0.0), _ONE_MINUS))


def nystrom_matrix(k: Callable, rule) -> np.ndarray:
    """Symmetrically weighted kernel matrix sqrt(w_i w_j) k(x_i, x_j)."""
    x = rule.nodes
    kx = np.asarray(k(x[:, None], x[None, :]), dtype=float)
    if kx.shape != (x.size, x.size):
        kx = np.broadcast_to(kx, (x.size, x.size)).copy()
    if not np.all(np.isfinite(kx)):
        raise NumericalDomainError("kernel evaluation is not finite at a quadrature node")
    sw = np.sqrt(rule.weights)
    b = sw[:, None] * kx * sw[None, :]
    return 0.5 * (b + b.T)


def nystrom_spectrum(k: Callable, rule, count: int) -> MercerSpectrum:
    """Top ``count`` eigenvalues of the Nyström discretisation of ``k``.

    ``k(x, t)`` must broadcast over numpy arrays.  The returned eigenvectors
    are those of the weighted matrix; divide rows by ``sqrt(w_i)`` to get
    L2-normalised eigenfunction values at the nodes.
    """
    if not 1 <= count <= rule.order:
        raise InvalidArgumentError(f"count must lie in [1, {rule.order}], got {count}")
    b = nystrom_matrix(k, rule)
    diag = np.asarray(k(rule.nodes, rule.nodes), dtype=float) * np.ones(rule.order)
    trace = float(np.dot(rule.weights, diag))
    return spectrum_from_matrix(b, trace=trace, count=count)
