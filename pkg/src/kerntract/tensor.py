"""Best-first enumeration of products of univariate eigenvalues.

Multivariate eigenvalues of a product kernel are all products
``prod_l s_l[j_l]`` over multi-indices ``j``.  The stream below yields them
in non-increasing order with a max-heap seeded at ``(1, ..., 1)``.  A
multi-index spawns a child in coordinate ``l`` only when every coordinate
after ``l`` is still at its first entry, so each multi-index has exactly one
parent and is generated once.
"""

from __future__ import annotations

import heapq
import math
import warnings
from typing import Iterator, Sequence

import numpy as np

from .eigensolve import MercerSpectrum
from .errors import InvalidArgumentError, ResourceLimitError, TailDivergenceError, TruncationError

FLOOR = 1e-300
DEFAULT_CAP = 10_000_000
TAIL_REL_TOL = 1e-10


class TruncationWarning(UserWarning):
    """Results reach below the level the truncated factor spectra certify."""


class UnreliableTailWarning(UserWarning):
    pass


def _as_arrays(spectra) -> list[np.ndarray]:
    out = []
    for s in spectra:
        ev = np.asarray(s.eigenvalues if isinstance(s, MercerSpectrum) else s, dtype=float)
        if ev.ndim != 1 or ev.size == 0:
            raise InvalidArgumentError("each spectrum needs at least one eigenvalue")
        if np.any(np.diff(ev) > 0):
            raise InvalidArgumentError("each spectrum must be non-increasing")
        out.append(ev)
    if not out:
        raise InvalidArgumentError("need at least one factor spectrum")
    return out


def certified_level(spectra: Sequence[MercerSpectrum]) -> float:
    """Products above this level cannot involve a truncated eigenvalue."""
    heads = [float(s.eigenvalues[0]) for s in spectra]
    level = 0.0
    for ell, s in enumerate(spectra):
        others = math.prod(heads[:ell] + heads[ell + 1:])
        level = max(level, s.next_bound * others)
    return level


class TensorEigenStream:
    """Lazily sorted stream of ``(value, multi_index)`` pairs.

    Multi-indices are 1-based tuples.  Not safe for concurrent advancement.
    """

    def __init__(self, spectra, floor: float = FLOOR):
        self.factor_spectra = list(spectra)
        self._ev = _as_arrays(self.factor_spectra)
        self.floor = floor
        self.d = len(self._ev)
        # Factors with a single usable entry never branch; keep them fixed.
        self._vals = [ev.tolist() for ev in self._ev]
        self._active = [ell for ell, ev in enumerate(self._ev) if ev.size > 1 and ev[1] > 0]
        self.emitted_count = 0
        self.frontier: list = []
        start = (0,) * self.d
        v0 = self._value(start)
        if v0 > floor:
            self.frontier.append((-v0, start))

    def _value(self, idx) -> float:
        return math.prod(vals[j] for vals, j in zip(self._vals, idx))

    def __iter__(self) -> Iterator[tuple[float, tuple]]:
        return self

    def __next__(self) -> tuple[float, tuple]:
        if not self.frontier:
            raise StopIteration
        neg, idx = heapq.heappop(self.frontier)
        self._push_children(idx)
        self.emitted_count += 1
        return -neg, tuple(j + 1 for j in idx)

    def peek(self) -> float:
        """Largest value not yet emitted, or 0 when exhausted."""
        return -self.frontier[0][0] if self.frontier else 0.0

    def _push_children(self, idx):
        # last active coordinate that has left its first entry
        last = -1
        for pos, ell in enumerate(self._active):
            if idx[ell]:
                last = pos
        for ell in self._active[max(last, 0):]:
            j = idx[ell] + 1
            if j >= len(self._vals[ell]):
                continue
            if self._vals[ell][j] <= 0.0:
                continue
            child = idx[:ell] + (j,) + idx[ell + 1:]
            v = self._value(child)
            if v > self.floor:
                heapq.heappush(self.frontier, (-v, child))


def top_k(spectra, k: int, floor: float = FLOOR) -> list[tuple[float, tuple]]:
    """The ``k`` largest products with their 1-based multi-indices."""
    if k < 1:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    stream = TensorEigenStream(spectra, floor)
    out = []
    for item in stream:
        out.append(item)
        if len(out) == k:
            break
    if len(out) < k:
        raise TruncationError(f"only {len(out)} products lie above the floor {floor:g}", out)
    _warn_if_uncertified(spectra, out[-1][0])
    return out


def count_above(spectra, threshold: float, cap: int = DEFAULT_CAP, floor: float = FLOOR) -> int:
    """Number of multi-indices whose product is strictly above ``threshold``."""
    if not threshold > 0:
        raise InvalidArgumentError(f"threshold must be positive, got {threshold}")
    stream = TensorEigenStream(spectra, floor)
    n = 0
    while stream.frontier and stream.peek() > threshold:
        if n >= cap:
            raise ResourceLimitError(f"more than {cap} products exceed {threshold:g}", n)
        next(stream)
        n += 1
    _warn_if_uncertified(spectra, threshold)
    return n


def nth_value(spectra, n: int, cap: int = DEFAULT_CAP) -> float:
    """The n-th (1-based) largest product; zero past the end of the stream."""
    if n < 1:
        raise InvalidArgumentError("n is 1-based")
    if n > cap:
        raise ResourceLimitError(f"index {n} exceeds the enumeration cap {cap}", 0)
    stream = TensorEigenStream(spectra)
    value = 0.0
    for i, (v, _) in enumerate(stream, start=1):
        if i == n:
            value = v
            break
    if value > 0:
        _warn_if_uncertified(spectra, value)
    return value


def _warn_if_uncertified(spectra, value: float):
    if not all(isinstance(s, MercerSpectrum) for s in spectra):
        return
    level = certified_level(spectra)
    if level > 0 and value <= level:
        warnings.warn(
            f"value {value:.3e} is at or below the truncation-certified level {level:.3e}",
            TruncationWarning, stacklevel=3)


def factor_tau_sum(spectrum: MercerSpectrum, tau: float) -> tuple[float, float]:
    """(truncated sum of lambda_j^tau + geometric tail estimate, relative tail)."""
    if not tau > 0:
        raise InvalidArgumentError(f"tau must be positive, got {tau}")
    ev = spectrum.eigenvalues
    rho = spectrum.tail_ratio
    if rho > 0 and tau * math.log(rho) >= 0:
        raise TailDivergenceError(f"tail ratio {rho} gives a divergent tail at tau={tau}")
    head = float(np.sum(ev[ev > 0] ** tau))
    tail = 0.0
    if rho > 0 and ev[-1] > 0:
        r = rho ** tau
        tail = float(ev[-1] ** tau * r / (1.0 - r))
    total = head + tail
    return total, (tail / total if total > 0 else 0.0)


def sum_tau(spectra: Sequence[MercerSpectrum], tau: float) -> float:
    """sum_j nu_j^tau of the product kernel through the product identity.

    Emits :class:`UnreliableTailWarning` if any factor's estimated tail is
    more than 1e-10 of its sum.
    """
    if not tau > 0:
        raise InvalidArgumentError(f"tau must be positive, got {tau}")
    total = 1.0
    worst = 0.0
    for s in spectra:
        value, rel = factor_tau_sum(s, tau)
        total *= value
        worst = max(worst, rel)
    if worst > TAIL_REL_TOL:
        warnings.warn(f"tail estimate is {worst:.2e} of a factor sum", UnreliableTailWarning, stacklevel=2)
    return total
