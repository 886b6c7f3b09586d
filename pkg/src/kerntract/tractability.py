"""Tractability exponents, error and complexity bounds, rate fits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .eigensolve import MercerSpectrum, nystrom_matrix, spectrum_from_matrix
from .errors import (
    InsufficientDataError,
    InvalidArgumentError,
    TailDivergenceError,
)
from .kernels import (
    GAUSSIAN,
    INF,
    Kernel1D,
    ParamSeq,
    ScaledKernel1D,
    decay_rate,
    factor_spectra,
    gaussian_closed_spectrum,
    scaled_spectrum,
)
from .quadrature import DEFAULT_ORDER, QuadRule, double_integral, gauss_hermite
from .tensor import TensorEigenStream, count_above, nth_value

EXACT = "exact"
UPPER = "upper-bound"
UNKNOWN = "unknown"

ABSOLUTE = "absolute"
NORMALIZED = "normalized"


@dataclass(frozen=True)
class CriterionSpec:
    """Error criterion and information class.

    (absolute, all), (absolute, std), (normalized, all) and
    (normalized, std) are the four settings with separate exponent results.
    """

    error_criterion: str = ABSOLUTE
    info_class: str = "all"

    def __post_init__(self):
        aliases = {"abs": ABSOLUTE, "norm": NORMALIZED, "relative": NORMALIZED}
        crit = aliases.get(self.error_criterion, self.error_criterion)
        if crit not in (ABSOLUTE, NORMALIZED):
            raise InvalidArgumentError(f"unknown error criterion {self.error_criterion!r}")
        if self.info_class not in ("all", "std"):
            raise InvalidArgumentError(f"unknown information class {self.info_class!r}")
        object.__setattr__(self, "error_criterion", crit)

    @property
    def theorem(self) -> int:
        return {(ABSOLUTE, "all"): 1, (ABSOLUTE, "std"): 2,
                (NORMALIZED, "all"): 3, (NORMALIZED, "std"): 4}[(self.error_criterion, self.info_class)]

    def to_dict(self) -> dict:
        return {"error_criterion": self.error_criterion, "info_class": self.info_class}


ALL_CRITERIA = tuple(CriterionSpec(e, c) for e in (ABSOLUTE, NORMALIZED) for c in ("all", "std"))


def _inv(r: float) -> float:
    return 0.0 if r == INF else 1.0 / r


def exponent(criterion: CriterionSpec, r: float) -> tuple[Optional[float], str]:
    """Exponent of strong polynomial tractability and how much is known about it.

    Returns ``(value, qualifier)`` with qualifier ``"exact"``,
    ``"upper-bound"`` or ``"unknown"``; the value is ``None`` when unknown.
    """
    if not (r >= 0):
        raise InvalidArgumentError(f"decay rate must lie in [0, inf], got {r}")
    if criterion.error_criterion == ABSOLUTE:
        p_all = 2.0 if r <= 0.5 else _inv(r)
        if criterion.info_class == "all":
            return p_all, EXACT
        if r <= 0.5:
            return 4.0, UPPER
        return p_all + 0.5 * p_all * p_all, UPPER
    if criterion.info_class == "all":
        return (_inv(r), EXACT) if r >= 0.5 else (None, UNKNOWN)
    if r > 0.5:
        p_all = _inv(r)
        return p_all + 0.5 * p_all * p_all, UPPER
    return None, UNKNOWN


# -- errors and complexity through the spectral characterisation ----------

def worst_case_error_all(spectra: Sequence[MercerSpectrum], n: int) -> float:
    """n-th minimal worst-case L2 error with arbitrary linear functionals."""
    if n < 0:
        raise InvalidArgumentError(f"n must be non-negative, got {n}")
    return math.sqrt(nth_value(spectra, n + 1))


def info_complexity(criterion: CriterionSpec, eps: float, spectra: Sequence[MercerSpectrum]) -> int:
    """Smallest n whose minimal error meets the criterion (class all only)."""
    if criterion.info_class != "all":
        raise InvalidArgumentError("exact complexity is only available for the class 'all'; use std_bounds")
    if not 0 < eps < 1:
        raise InvalidArgumentError(f"eps must lie in (0, 1), got {eps}")
    threshold = eps * eps
    if criterion.error_criterion == NORMALIZED:
        threshold *= nth_value(spectra, 1)
    return count_above(spectra, threshold)


def std_bounds(eps: float, n: int) -> tuple[float, int]:
    """Closed-form error bound at ``n`` samples and sample bound at ``eps``
    for function values under the absolute criterion."""
    if not 0 < eps < 1:
        raise InvalidArgumentError(f"eps must lie in (0, 1), got {eps}")
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    err = math.sqrt(2.0) / n ** 0.25 * math.sqrt(1.0 + 1.0 / (2.0 * math.sqrt(n)))
    n_bound = math.ceil((1.0 + math.sqrt(1.0 + eps * eps)) ** 2 / eps ** 4)
    return err, n_bound


def std_sample_bound(eps: float) -> int:
    return std_bounds(eps, 1)[1]


# -- conditions on the univariate kernel -----------------------------------

@dataclass(frozen=True)
class Conditions:
    C1: float
    C2: float
    C3: float
    violated: bool

    def __iter__(self):
        return iter((self.C1, self.C2, self.C3))


def default_gamma_grid(sup_gamma: float = 2.0, points: int = 16) -> np.ndarray:
    """16 log-spaced shapes in [1e-3, min(2, sup_gamma))."""
    hi = min(2.0, sup_gamma)
    if not hi > 1e-3:
        raise InvalidArgumentError(f"sup gamma {sup_gamma} leaves no room above 1e-3")
    return np.geomspace(1e-3, hi, points + 1)[:-1]


def base_spectrum(base: Kernel1D, gamma: float, rule: QuadRule | None = None,
                  count: int = 64) -> MercerSpectrum:
    """Spectrum of the unscaled base kernel, in closed form where known."""
    if base.is_gaussian:
        return gaussian_closed_spectrum(gamma, count)
    if base.name == "constant":
        return MercerSpectrum.rank_one(count)
    return scaled_spectrum(base, 1.0, gamma, rule, count)


def tail_power_sum(spectrum: MercerSpectrum, tau: float, start: int = 2) -> float:
    """sum_{j >= start} lambda_j^tau including the geometric tail estimate."""
    ev = spectrum.eigenvalues
    head = ev[start - 1:]
    total = float(np.sum(head[head > 0] ** tau))
    rho = spectrum.tail_ratio
    if rho > 0 and ev[-1] > 0:
        r = rho ** tau
        if r >= 1:
            raise TailDivergenceError(f"tail ratio {rho} diverges at tau={tau}")
        total += float(ev[-1] ** tau * r / (1.0 - r))
    return total


def gtc2_sum(spectrum: MercerSpectrum, gamma: float, r: float) -> float:
    """sum_{j >= 2} (lambda_j / gamma^2)^(1/(2r))."""
    if r == INF:
        raise TailDivergenceError("exponent 1/(2r) is zero at r = inf, every term equals 1")
    if not r > 0:
        raise InvalidArgumentError(f"decay rate must be positive, got {r}")
    tau = 1.0 / (2.0 * r)
    return tail_power_sum(spectrum, tau) / gamma ** (2.0 * tau)


def check_conditions(base: Kernel1D, r: float, gamma_grid: Sequence[float] | None = None,
                     rule: QuadRule | None = None, count: int = 64) -> Conditions:
    """Empirical constants C1, C2, C3 over a grid of shape parameters."""
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise InvalidArgumentError("gamma grid must be non-empty and positive")
    c1 = max((1.0 - double_integral(rule, base, g)) / (g * g) for g in grid)
    sums = [gtc2_sum(base_spectrum(base, g, rule, count), g, r) for g in grid]
    c2, c3 = min(sums), max(sums)
    ok = all(0 < c < INF for c in (c1, c2, c3))
    return Conditions(float(c1), float(c2), float(c3), not ok)


def c1_estimate(base: Kernel1D, gamma_grid: Sequence[float] | None = None,
                rule: QuadRule | None = None) -> float:
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    grid = default_gamma_grid() if gamma_grid is None else gamma_grid
    return float(max((1.0 - double_integral(rule, base, g)) / (g * g) for g in grid))


def initial_norm_bound(seq: ParamSeq, d: int, C1: float) -> float:
    """Lower bound prod_l (1 - C1 (alpha_l gamma_l)^2)^(1/2) on the initial error."""
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    out = 1.0
    for ell, (a, g) in enumerate(seq.pairs(d), start=1):
        x = C1 * (a * g) ** 2
        if x >= 1.0:
            raise InvalidArgumentError(f"C1*(alpha*gamma)^2 = {x:.4g} >= 1 at l={ell}; bound is vacuous")
        out *= math.sqrt(1.0 - x)
    return out


# -- eigenvalue decay bound used for function values -----------------------

@dataclass(frozen=True)
class DecayCheck:
    passed: bool
    first_violation: Optional[int]
    p: float
    B: float


def a3p_constant(seq: ParamSeq, d: int, C3: float, r: float, spectra: Sequence[MercerSpectrum]) -> float:
    """B = max(C4, C5) from the eigenvalue decay argument with p = 2r."""
    tau = 1.0 / (2.0 * r)
    p = 1.0 / tau
    c4 = max(a * a * g * g * (3.0 * C3) ** p for a, g in seq.pairs(d))
    stream = TensorEigenStream(spectra)
    c5 = 0.0
    for n, (v, _) in enumerate(stream, start=1):
        c5 = max(c5, v * n ** p)
        if n == 2:
            break
    return max(c4, c5)


def a3p_check(spectra: Sequence[MercerSpectrum], p: float, B: float, n_max: int) -> DecayCheck:
    """Check nu_n <= B n^-p for n = 1..n_max."""
    if not p > 1:
        raise InvalidArgumentError(f"p must exceed 1, got {p}")
    stream = TensorEigenStream(spectra)
    n = 0
    for n, (v, _) in enumerate(stream, start=1):
        if n > n_max:
            break
        if v > B * n ** (-p):
            return DecayCheck(False, n, p, B)
    return DecayCheck(True, None, p, B)


# -- the optimal algorithm realised on the quadrature grid -----------------

@dataclass(frozen=True)
class TruncationDemo:
    measured_error: float
    bound: float

    @property
    def passed(self) -> bool:
        # absolute slack covers a zero bound met by rounding-level residuals
        return self.measured_error <= self.bound * (1.0 + 1e-6) + 1e-12


def truncation_error_demo(base: Kernel1D, alpha: float, gamma: float, t0: float, n: int,
                          rule: QuadRule | None = None) -> TruncationDemo:
    """L2 error of projecting K(., t0) onto the top-n eigenfunctions.

    The bound is sqrt(nu_{n+1}); ``K(., t0)`` has unit norm in the RKHS.
    """
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    if not 0 <= n < rule.order:
        raise InvalidArgumentError(f"n must lie in [0, {rule.order - 1}], got {n}")
    k = ScaledKernel1D(base, alpha, gamma)
    spec = spectrum_from_matrix(nystrom_matrix(k, rule))
    v = spec.eigenvectors
    sw = np.sqrt(rule.weights)
    f = sw * np.asarray(k(rule.nodes, t0), dtype=float)
    coef = v[:, :n].T @ f
    resid = f - v[:, :n] @ coef
    measured = float(np.linalg.norm(resid))
    bound = math.sqrt(spec.eigenvalues[n])
    return TruncationDemo(measured, bound)


# -- empirical rates ------------------------------------------------------

@dataclass
class RateFit:
    fitted_rate: float = math.nan
    fitted_p: float = math.nan
    rate_rms: float = math.nan
    p_rms: float = math.nan
    non_polynomial: bool = False
    n_values: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    eps_values: list = field(default_factory=list)
    complexities: list = field(default_factory=list)


MIN_POINTS = 5
MIN_DECADES = 1.5
DISCARD = 0.2


def _check_grid(grid, name):
    g = np.unique(np.asarray(grid, dtype=float))
    if g.size < MIN_POINTS:
        raise InsufficientDataError(f"{name} needs at least {MIN_POINTS} distinct points")
    if np.log10(g.max() / g.min()) < MIN_DECADES - 1e-12:
        raise InsufficientDataError(f"{name} must span at least {MIN_DECADES} decades")
    return g


def _lsq(x, y):
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    rms = float(np.sqrt(np.mean((a @ coef - y) ** 2)))
    return float(coef[0]), rms


def leading_values(spectra: Sequence[MercerSpectrum], m: int) -> np.ndarray:
    """First ``m`` multivariate eigenvalues, zero-padded if the stream ends."""
    out = np.zeros(m)
    for i, (v, _) in enumerate(TensorEigenStream(spectra)):
        if i >= m:
            break
        out[i] = v
    return out


def counts_above(spectra: Sequence[MercerSpectrum], thresholds: Sequence[float]) -> list[int]:
    """count_above for many thresholds with a single enumeration."""
    lo = min(thresholds)
    stream = TensorEigenStream(spectra)
    vals = []
    while stream.frontier and stream.peek() > lo:
        vals.append(next(stream)[0])
    arr = -np.asarray(vals)
    return [int(np.searchsorted(arr, -t, side="left")) for t in thresholds]


def fit_rates(seq: ParamSeq, d: int, n_grid: Sequence[int] | None = None,
              eps_grid: Sequence[float] | None = None, base: Kernel1D = GAUSSIAN,
              rule: QuadRule | None = None, count: int = 64,
              criterion: CriterionSpec = CriterionSpec(),
              spectra: Sequence[MercerSpectrum] | None = None) -> RateFit:
    """Log-log least-squares slopes of e(n) against n and n(eps) against 1/eps.

    The smallest 20% of n (largest 20% of eps) are dropped as
    pre-asymptotic.  ``non_polynomial`` is set when log e(n) is fitted
    better by a line in n than by a line in log n.
    """
    if n_grid is None and eps_grid is None:
        raise InsufficientDataError("need an n grid or an eps grid")
    if spectra is None:
        spectra = factor_spectra(seq, d, base, rule, count)
    fit = RateFit()

    if n_grid is not None:
        ns = _check_grid(n_grid, "n grid").astype(int)
        ns = ns[int(DISCARD * ns.size):]
        vals = leading_values(spectra, int(ns.max()) + 1)
        errs = np.sqrt(vals[ns])
        keep = errs > 0
        if np.unique(errs[keep]).size < 2:
            raise InsufficientDataError("fewer than two distinct non-zero errors on the n grid")
        x, y = ns[keep].astype(float), np.log(errs[keep])
        fit.fitted_rate, fit.rate_rms = _lsq(np.log(x), y)
        _, exp_rms = _lsq(x, y)
        fit.non_polynomial = exp_rms < fit.rate_rms
        fit.n_values, fit.errors = ns.tolist(), errs.tolist()

    if eps_grid is not None:
        eps = _check_grid(eps_grid, "eps grid")
        if eps.max() >= 1 or eps.min() <= 0:
            raise InvalidArgumentError("eps values must lie in (0, 1)")
        eps = np.sort(eps)[: eps.size - int(DISCARD * eps.size)]
        scale = 1.0
        if criterion.error_criterion == NORMALIZED:
            scale = leading_values(spectra, 1)[0]
        counts = np.asarray(counts_above(spectra, (eps * eps * scale).tolist()))
        keep = counts > 0
        if np.unique(counts[keep]).size < 2:
            raise InsufficientDataError("fewer than two distinct non-zero complexities on the eps grid")
        fit.fitted_p, fit.p_rms = _lsq(np.log(1.0 / eps[keep]), np.log(counts[keep]))
        fit.eps_values, fit.complexities = eps.tolist(), counts.tolist()
    return fit


# -- report -----------------------------------------------------------------

@dataclass
class TractReport:
    d: int
    r_tilde: float
    criterion: dict
    p_exponent: Optional[float]
    p_qualifier: str
    exponents: dict
    C1: Optional[float] = None
    C2: Optional[float] = None
    C3: Optional[float] = None
    conditions_violated: Optional[bool] = None
    initial_norm: float = math.nan
    initial_norm_bound: Optional[float] = None
    fitted_rate: Optional[float] = None
    fitted_p: Optional[float] = None
    rate_rms: Optional[float] = None
    p_rms: Optional[float] = None
    non_polynomial: Optional[bool] = None
    fitted_q: Optional[float] = None
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def is_isotropic(seq: ParamSeq) -> bool:
    if seq.tail.family != "constant":
        return False
    tail_pair = seq.tail.pair(len(seq.prefix) + 1)
    return all(p == tail_pair for p in seq.prefix)


def build_report(seq: ParamSeq, d: int, criterion: CriterionSpec = CriterionSpec(),
                 n_grid=None, eps_grid=None, base: Kernel1D = GAUSSIAN,
                 rule: QuadRule | None = None, count: int = 64,
                 spectra: Sequence[MercerSpectrum] | None = None) -> TractReport:
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    r = decay_rate(seq)
    p, qual = exponent(criterion, r)
    exps = {f"{c.error_criterion}-{c.info_class}": dict(zip(("value", "qualifier"), exponent(c, r)))
            for c in ALL_CRITERIA}
    if spectra is None:
        spectra = factor_spectra(seq, d, base, rule, count)
    rep = TractReport(d=d, r_tilde=r, criterion=criterion.to_dict(), p_exponent=p,
                      p_qualifier=qual, exponents=exps)
    rep.initial_norm = math.sqrt(nth_value(spectra, 1))

    grid = default_gamma_grid(seq.sup_gamma())
    if 0 < r < INF:
        cond = check_conditions(base, r, grid, rule, count)
        rep.C1, rep.C2, rep.C3, rep.conditions_violated = cond.C1, cond.C2, cond.C3, cond.violated
    else:
        rep.C1 = c1_estimate(base, grid, rule)
        rep.notes.append("C2 and C3 are not defined for r_tilde in {0, inf}")

    if rep.C1 is not None and rep.C1 > 0:
        try:
            rep.initial_norm_bound = initial_norm_bound(seq, d, rep.C1)
        except InvalidArgumentError as exc:
            rep.notes.append(f"initial norm bound unavailable: {exc}")
    if rep.initial_norm_bound is not None:
        rep.checks.append(_check("initial_norm_lower_bound", rep.initial_norm_bound,
                                 rep.initial_norm, rep.initial_norm >= rep.initial_norm_bound * (1 - 1e-12)))
    if 0.5 < r < INF and rep.C3 is not None:
        B = a3p_constant(seq, d, rep.C3, r, spectra)
        res = a3p_check(spectra, 2.0 * r, B, 200)
        rep.checks.append({"name": "eigenvalue_decay_a3p", "passed": res.passed, "p": res.p, "B": res.B,
                           "first_violation": res.first_violation})

    if n_grid is not None or eps_grid is not None:
        fit = fit_rates(seq, d, n_grid, eps_grid, base, rule, count, criterion, spectra)
        if n_grid is not None:
            rep.fitted_rate, rep.rate_rms, rep.non_polynomial = fit.fitted_rate, fit.rate_rms, fit.non_polynomial
        if eps_grid is not None:
            rep.fitted_p, rep.p_rms = fit.fitted_p, fit.p_rms
            if p is not None:
                rep.checks.append(_check("fitted_p_within_exponent", rep.fitted_p, p + 0.3,
                                         rep.fitted_p <= p + 0.3))

    if criterion.theorem in (1, 2) and is_isotropic(seq):
        rep.notes.append("isotropic kernel: strong polynomial tractability is equivalent to "
                         "polynomial tractability")
        if criterion.theorem == 2:
            rep.notes.append("isotropic kernel: the exponent of strong tractability is at least 2")
    if criterion.theorem == 3:
        rep.notes.append("normalized criterion with arbitrary linear functionals; the theorem "
                         "statement names function values but its section and proof treat "
                         "linear functionals")
    if criterion.error_criterion == NORMALIZED and r == 0 and is_isotropic(seq):
        rep.notes.append("isotropic kernel under the normalized criterion: not polynomially tractable")
    return rep


def _check(name, lhs, rhs, passed):
    return {"name": name, "lhs": lhs, "rhs": rhs, "passed": bool(passed)}
