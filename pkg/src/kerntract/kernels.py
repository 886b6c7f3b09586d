"""Univariate kernels, scaled and product kernels, parameter sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .eigensolve import MercerSpectrum, nystrom_spectrum
from .errors import InvalidArgumentError, KernelError
from .quadrature import DEFAULT_ORDER, QuadRule, gauss_hermite

INF = math.inf


@dataclass(frozen=True)
class Kernel1D:
    """Symmetric positive definite kernel k(x, t, gamma) on the real line.

    ``evaluator`` must broadcast over numpy arrays in ``x`` and ``t``.
    """

    name: str
    evaluator: Callable = field(compare=False)

    def __call__(self, x, t, gamma):
        return self.evaluator(x, t, gamma)

    @property
    def is_gaussian(self) -> bool:
        return self.name == "gaussian"

    @classmethod
    def custom(cls, name: str, evaluator: Callable, gammas: Sequence[float] = (0.1, 0.5, 1.0, 2.0),
               rule: QuadRule | None = None, tol: float = 1e-10) -> "Kernel1D":
        """Register a user kernel after checking symmetry and unit trace."""
        if name in ("gaussian", "constant"):
            raise KernelError(f"kernel name {name!r} is reserved")
        rule = rule or gauss_hermite(DEFAULT_ORDER)
        x = rule.nodes
        for g in gammas:
            kx = np.asarray(evaluator(x[:, None], x[None, :], g), dtype=float)
            if not np.all(np.isfinite(kx)):
                raise KernelError(f"{name}: non-finite values at gamma={g}")
            if np.abs(kx - kx.T).max() > 1e-13 * max(1.0, np.abs(kx).max()):
                raise KernelError(f"{name}: kernel is not symmetric at gamma={g}")
            tr = float(np.dot(rule.weights, np.diag(kx)))
            if abs(tr - 1.0) > tol:
                raise KernelError(f"{name}: unit trace fails at gamma={g} (trace {tr:.12g})")
        return cls(name, evaluator)


def _gaussian(x, t, gamma):
    return np.exp(-(gamma * gamma) * (np.subtract(x, t) ** 2))


def _constant(x, t, gamma):
    return np.ones(np.broadcast(x, t).shape)


GAUSSIAN = Kernel1D("gaussian", _gaussian)
CONSTANT = Kernel1D("constant", _constant)


@dataclass(frozen=True)
class ScaledKernel1D:
    """1 - alpha^2 + alpha^2 k(x, t, gamma)."""

    base: Kernel1D
    alpha: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgumentError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.gamma > 0:
            raise InvalidArgumentError(f"gamma must be positive, got {self.gamma}")

    def __call__(self, x, t):
        a2 = self.alpha * self.alpha
        if a2 == 0.0:
            return np.ones(np.broadcast(x, t).shape)
        if a2 == 1.0:
            return self.base(x, t, self.gamma)
        return (1.0 - a2) + a2 * self.base(x, t, self.gamma)


@dataclass(frozen=True)
class ProductKernel:
    factors: tuple

    @property
    def d(self) -> int:
        return len(self.factors)

    def __call__(self, x, t):
        """Evaluate on points with the coordinate index on the last axis."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        if x.shape[-1] != self.d or t.shape[-1] != self.d:
            raise InvalidArgumentError(f"points must have last dimension {self.d}")
        out = 1.0
        for ell, f in enumerate(self.factors):
            out = out * f(x[..., ell], t[..., ell])
        return out


# -- parameter sequences ----------------------------------------------------

_TAIL_PARAMS = {
    "constant": {"alpha", "gamma"},
    "polynomial": {"c", "s", "alpha"},
    "geometric": {"c", "q", "alpha"},
    "zero": set(),
}


@dataclass(frozen=True)
class TailFamily:
    """Parametric rule for (alpha_l, gamma_l) beyond the explicit prefix.

    ``polynomial`` means alpha_l*gamma_l = c*l^(-s), ``geometric`` means
    alpha_l*gamma_l = c*q^l.  Both take an optional fixed ``alpha``; without
    it the product is split by :func:`split_product`.
    """

    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in _TAIL_PARAMS:
            raise InvalidArgumentError(f"unknown tail family {self.family!r}")
        p = dict(self.params)
        extra = set(p) - _TAIL_PARAMS[self.family]
        if extra:
            raise InvalidArgumentError(f"tail.params: unexpected keys {sorted(extra)} for {self.family}")
        object.__setattr__(self, "params", tuple(sorted((k, float(v)) for k, v in p.items())))
        if self.family == "constant":
            for key in ("alpha", "gamma"):
                if key not in p:
                    raise InvalidArgumentError(f"tail.params.{key} is required for constant")
            if not 0 <= p["alpha"] <= 1:
                raise InvalidArgumentError("tail.params.alpha must lie in [0, 1]")
            if not p["gamma"] > 0:
                raise InvalidArgumentError("tail.params.gamma must be positive")
        elif self.family in ("polynomial", "geometric"):
            second = "s" if self.family == "polynomial" else "q"
            for key in ("c", second):
                if key not in p:
                    raise InvalidArgumentError(f"tail.params.{key} is required for {self.family}")
            if not p["c"] > 0:
                raise InvalidArgumentError("tail.params.c must be positive")
            if self.family == "polynomial" and not p["s"] > 0:
                raise InvalidArgumentError("tail.params.s must be positive")
            if self.family == "geometric" and not 0 < p["q"] < 1:
                raise InvalidArgumentError("tail.params.q must lie in (0, 1)")
            if "alpha" in p and not 0 < p["alpha"] <= 1:
                raise InvalidArgumentError("tail.params.alpha must lie in (0, 1]")

    @property
    def p(self) -> dict:
        return dict(self.params)

    def pair(self, ell: int) -> tuple[float, float]:
        p = self.p
        if self.family == "constant":
            return p["alpha"], p["gamma"]
        if self.family == "zero":
            raise InvalidArgumentError(
                f"dimension {ell} lies in a 'zero' tail; represent dead dimensions "
                "explicitly in the prefix as [0, 1] instead")
        if self.family == "polynomial":
            value = p["c"] * float(ell) ** (-p["s"])
        else:
            value = p["c"] * p["q"] ** ell
        if "alpha" in p:
            return p["alpha"], value / p["alpha"]
        return split_product(value)


def split_product(value: float) -> tuple[float, float]:
    """Default split of a product alpha*gamma into (alpha, gamma)."""
    if not value > 0:
        raise InvalidArgumentError("alpha*gamma must be positive to split")
    if value <= 1.0:
        return value, 1.0
    return 1.0, value


@dataclass(frozen=True)
class ParamSeq:
    prefix: tuple = ()
    tail: TailFamily = TailFamily("zero")

    def __post_init__(self):
        pairs = []
        for i, pair in enumerate(self.prefix):
            if len(pair) != 2:
                raise InvalidArgumentError(f"prefix[{i}] must be an [alpha, gamma] pair")
            a, g = float(pair[0]), float(pair[1])
            if not 0 <= a <= 1:
                raise InvalidArgumentError(f"prefix[{i}]: alpha must lie in [0, 1], got {a}")
            if not g > 0:
                raise InvalidArgumentError(f"prefix[{i}]: gamma must be positive, got {g}")
            pairs.append((a, g))
        object.__setattr__(self, "prefix", tuple(pairs))

    @classmethod
    def constant(cls, alpha: float, gamma: float, prefix=()) -> "ParamSeq":
        return cls(prefix, TailFamily("constant", (("alpha", alpha), ("gamma", gamma))))

    @classmethod
    def polynomial(cls, c: float, s: float, alpha: float | None = None, prefix=()) -> "ParamSeq":
        params = {"c": c, "s": s}
        if alpha is not None:
            params["alpha"] = alpha
        return cls(prefix, TailFamily("polynomial", tuple(params.items())))

    @classmethod
    def geometric(cls, c: float, q: float, alpha: float | None = None, prefix=()) -> "ParamSeq":
        params = {"c": c, "q": q}
        if alpha is not None:
            params["alpha"] = alpha
        return cls(prefix, TailFamily("geometric", tuple(params.items())))

    def pair(self, ell: int) -> tuple[float, float]:
        """(alpha_l, gamma_l) for the 1-based dimension index ``ell``."""
        if ell < 1:
            raise InvalidArgumentError("dimension indices start at 1")
        if ell <= len(self.prefix):
            return self.prefix[ell - 1]
        return self.tail.pair(ell)

    def pairs(self, d: int) -> list[tuple[float, float]]:
        return [self.pair(ell) for ell in range(1, d + 1)]

    def sup_gamma(self) -> float:
        """Supremum of gamma_l over all l (tails are non-increasing in l)."""
        gammas = [g for _, g in self.prefix]
        if self.tail.family != "zero":
            gammas.append(self.tail.pair(len(self.prefix) + 1)[1])
        return max(gammas) if gammas else 1.0

    def to_dict(self) -> dict:
        return {
            "prefix": [[a, g] for a, g in self.prefix],
            "tail": {"family": self.tail.family, "params": self.tail.p},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParamSeq":
        if not isinstance(data, dict):
            raise InvalidArgumentError("param_seq must be an object")
        unknown = set(data) - {"prefix", "tail"}
        if unknown:
            raise InvalidArgumentError(f"param_seq: unexpected keys {sorted(unknown)}")
        prefix = data.get("prefix", [])
        tail = data.get("tail", {"family": "zero"})
        if not isinstance(tail, dict) or "family" not in tail:
            raise InvalidArgumentError("param_seq.tail must be an object with a 'family' key")
        params = tail.get("params", {})
        if not isinstance(params, dict):
            raise InvalidArgumentError("param_seq.tail.params must be an object")
        return cls(tuple(tuple(p) for p in prefix), TailFamily(tail["family"], tuple(params.items())))


def materialize(seq: ParamSeq, d: int, base: Kernel1D = GAUSSIAN) -> ProductKernel:
    if d < 1:
        raise InvalidArgumentError(f"d must be at least 1, got {d}")
    return ProductKernel(tuple(ScaledKernel1D(base, a, g) for a, g in seq.pairs(d)))


def decay_rate(seq: ParamSeq) -> float:
    """sup{beta > 0 : sum_l (alpha_l gamma_l)^(1/beta) < inf} of the tail family."""
    tail = seq.tail
    if tail.family == "constant":
        p = tail.p
        return INF if p["alpha"] * p["gamma"] == 0 else 0.0
    if tail.family == "polynomial":
        return tail.p["s"]
    return INF


# -- spectra ----------------------------------------------------------------

def gaussian_omega(gamma: float) -> float:
    """Geometric ratio of the Gaussian kernel spectrum under exp(-x^2)/sqrt(pi)."""
    g2 = gamma * gamma
    # g2 / (1/2 + g2 + sqrt(1/4 + g2)) written without cancellation at small gamma
    return g2 / (0.5 + g2 + math.sqrt(0.25 + g2))


def gaussian_closed_spectrum(gamma: float, count: int) -> MercerSpectrum:
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be positive, got {gamma}")
    if count < 1:
        raise InvalidArgumentError("count must be positive")
    w = gaussian_omega(gamma)
    ev = (1.0 - w) * w ** np.arange(count, dtype=float)
    return MercerSpectrum(ev, tail_ratio=w, trace=float(-math.expm1(count * math.log(w)) if w > 0 else 1.0))


@lru_cache(maxsize=4096)
def _cached_nystrom(base: Kernel1D, alpha: float, gamma: float, order: int, count: int):
    return nystrom_spectrum(ScaledKernel1D(base, alpha, gamma), gauss_hermite(order), count)


def scaled_spectrum(base: Kernel1D, alpha: float, gamma: float, rule: QuadRule | None = None,
                    count: int = 64) -> MercerSpectrum:
    """Nyström spectrum of 1 - alpha^2 + alpha^2 k(., ., gamma)."""
    ScaledKernel1D(base, alpha, gamma)  # validates arguments
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    if not 1 <= count <= rule.order:
        raise InvalidArgumentError(f"count must lie in [1, {rule.order}], got {count}")
    # gauss_hermite memoises its rules, so the order identifies a shared rule
    if rule is gauss_hermite(rule.order):
        return _cached_nystrom(base, float(alpha), float(gamma), rule.order, count)
    return nystrom_spectrum(ScaledKernel1D(base, alpha, gamma), rule, count)


def factor_spectrum(base: Kernel1D, alpha: float, gamma: float, rule: QuadRule | None = None,
                    count: int = 64, method: str = "auto") -> MercerSpectrum:
    """Spectrum of one scaled factor, analytic where an exact form exists.

    With ``method="auto"`` the constant case (alpha = 0) and the unscaled
    Gaussian (alpha = 1) use their closed forms; everything else goes
    through Nyström.
    """
    if method not in ("auto", "nystrom"):
        raise InvalidArgumentError(f"unknown spectrum method {method!r}")
    if method == "auto":
        if alpha == 0:
            return MercerSpectrum.rank_one(count)
        if alpha == 1 and base.is_gaussian:
            return gaussian_closed_spectrum(gamma, count)
    return scaled_spectrum(base, alpha, gamma, rule, count)


def factor_spectra(seq: ParamSeq, d: int, base: Kernel1D = GAUSSIAN, rule: QuadRule | None = None,
                   count: int = 64, method: str = "auto") -> list[MercerSpectrum]:
    """Univariate spectra of the first ``d`` factors of ``seq``."""
    if d < 1:
        raise InvalidArgumentError(f"d must be at least 1, got {d}")
    return [factor_spectrum(base, a, g, rule, count, method) for a, g in seq.pairs(d)]
