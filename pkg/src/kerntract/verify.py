"""Numerical checks of the eigenvalue inequalities behind the exponent results.

Every check is stored as ``lhs <= rhs`` together with its tolerance, so a
ledger of checks can be filtered, serialised and summarised uniformly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .eigensolve import MercerSpectrum
from .errors import InvalidArgumentError
from .kernels import GAUSSIAN, Kernel1D, scaled_spectrum
from .quadrature import DEFAULT_ORDER, QuadRule, gauss_hermite
from .tensor import factor_tau_sum
from .tractability import base_spectrum, c1_estimate, check_conditions, default_gamma_grid

PASS, MARGINAL, FAIL = "pass", "marginal", "fail"
TOL = 1e-9
DEFAULT_ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_GAMMAS = (0.1, 0.5, 1.0, 2.0)


@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    context: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def status(self) -> str:
        if self.lhs <= self.rhs + self.tolerance:
            return PASS
        if self.lhs <= self.rhs + 10 * self.tolerance:
            return MARGINAL
        return FAIL

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(slack=self.slack, status=self.status)
        return out


def _ev(spec, n: int, what: str) -> np.ndarray:
    ev = np.asarray(spec.eigenvalues if isinstance(spec, MercerSpectrum) else spec, dtype=float)
    if ev.size < n:
        raise InvalidArgumentError(f"{what} has {ev.size} eigenvalues, checks need {n}")
    return ev


def lemma1_upper(spec_a, spec_b, a: float, b: float, spec_c, index_range: int = 8,
                 context: Optional[dict] = None) -> list[BoundCheck]:
    """Upper bounds on the spectrum of a*K_A + b*K_B.

    ``lm1b(i,j)``: lambda_C[i+j+1] <= a lambda_A[i+1] + b lambda_B[j+1] for
    i, j >= 1, and the Weyl form ``weyl(k,l)``: lambda_C[k+l-1] <= a
    lambda_A[k] + b lambda_B[l] for k, l >= 1.
    """
    if a < 0 or b < 0:
        raise InvalidArgumentError("a and b must be non-negative")
    R = index_range
    A = _ev(spec_a, R + 1, "spectrum A")
    B = _ev(spec_b, R + 1, "spectrum B")
    C = _ev(spec_c, 2 * R + 1, "spectrum C")
    tol = TOL * (a + b) if a + b > 0 else TOL
    ctx = dict(context or {})
    out = []
    for i in range(1, R + 1):
        for j in range(1, R + 1):
            out.append(BoundCheck(f"lm1b(i={i},j={j})", C[i + j], a * A[i] + b * B[j], tol, ctx))
    for k in range(1, R + 1):
        for l in range(1, R + 1):
            out.append(BoundCheck(f"weyl(k={k},l={l})", C[k + l - 2], a * A[k - 1] + b * B[l - 1], tol, ctx))
    return out


def lemma1_lower(spec_a, spec_b, a: float, b: float, spec_c, index_range: int = 8,
                 context: Optional[dict] = None) -> list[BoundCheck]:
    """``lm1c(i)``: lambda_C[i] >= max(a lambda_A[i], b lambda_B[i])."""
    if a < 0 or b < 0:
        raise InvalidArgumentError("a and b must be non-negative")
    R = index_range
    A = _ev(spec_a, R, "spectrum A")
    B = _ev(spec_b, R, "spectrum B")
    C = _ev(spec_c, R, "spectrum C")
    tol = TOL * (a + b) if a + b > 0 else TOL
    ctx = dict(context or {})
    return [BoundCheck(f"lm1c(i={i})", max(a * A[i - 1], b * B[i - 1]), C[i - 1], tol, ctx)
            for i in range(1, R + 1)]


def reference_spectrum(base: Kernel1D, gamma: float, rule: QuadRule, count: int,
                       reference: str = "nystrom") -> MercerSpectrum:
    """Base-kernel spectrum on the same discretisation as the scaled kernel,
    or in closed form (``reference="closed"``)."""
    if reference == "nystrom":
        return scaled_spectrum(base, 1.0, gamma, rule, count)
    if reference == "closed":
        return base_spectrum(base, gamma, rule, count)
    raise InvalidArgumentError(f"unknown reference {reference!r}")


def sandwich_check(base: Kernel1D, alpha: float, gamma: float, C1: float,
                   rule: QuadRule | None = None, j_max: int = 16,
                   spec_c: MercerSpectrum | None = None, reference: str = "closed") -> list[BoundCheck]:
    """First-eigenvalue lower bound, second-eigenvalue upper bound and the
    bound nu_j <= alpha^2 lambda_{j-1} for 3 <= j <= j_max."""
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    if spec_c is None:
        spec_c = scaled_spectrum(base, alpha, gamma, rule, min(rule.order, max(j_max, 2)))
    nu = _ev(spec_c, min(j_max, len(spec_c)), "scaled spectrum")
    lam = reference_spectrum(base, gamma, rule, j_max, reference).eigenvalues
    ag2 = (alpha * gamma) ** 2
    ctx = {"alpha": alpha, "gamma": gamma}
    out = [
        BoundCheck("ev1l", 1.0 - C1 * ag2, nu[0], TOL, ctx),
        BoundCheck("ev2u", nu[1] if nu.size > 1 else 0.0, C1 * ag2, TOL, ctx),
    ]
    for j in range(3, min(j_max, nu.size) + 1):
        out.append(BoundCheck(f"nll(j={j})", nu[j - 1], alpha * alpha * lam[j - 2], TOL, ctx))
    return out


def sum_bound_checks(base: Kernel1D, alpha: float, gamma: float, r: float, gamma_grid: Sequence[float],
                     rule: QuadRule | None = None, tau_lower: float | None = None,
                     spec_c: MercerSpectrum | None = None) -> list[BoundCheck]:
    """Upper and lower bounds on sum_j nu_j^tau for one scaled factor.

    ``evu`` uses tau = 1/(2r) and C_U = C1^tau + C3.  ``evl`` uses
    ``tau_lower`` < 1/(2r) (default 0.9/(2r)) and C_L = C2/2, and is only
    emitted when alpha*gamma lies below the threshold where it applies.
    """
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    if spec_c is None:
        spec_c = scaled_spectrum(base, alpha, gamma, rule, rule.order)
    tau = 1.0 / (2.0 * r)
    c1, _, c3 = check_conditions(base, r, gamma_grid, rule)
    ag = alpha * gamma
    ctx = {"alpha": alpha, "gamma": gamma, "tau": tau}
    total, _ = factor_tau_sum(spec_c, tau)
    out = [BoundCheck("evu", total, 1.0 + (c1 ** tau + c3) * ag ** (2 * tau), TOL, ctx)]

    tl = 0.9 * tau if tau_lower is None else tau_lower
    if not 0 < tl < tau:
        raise InvalidArgumentError("tau_lower must lie in (0, 1/(2r))")
    c1l, c2l, _ = check_conditions(base, 1.0 / (2.0 * tl), gamma_grid, rule)
    threshold = (c2l / (2.0 * c1l)) ** (1.0 / (2.0 * (1.0 - tl)))
    if ag < threshold:
        total_l, _ = factor_tau_sum(spec_c, tl)
        out.append(BoundCheck("evl", 1.0 + 0.5 * c2l * ag ** (2 * tl), total_l, TOL,
                              {"alpha": alpha, "gamma": gamma, "tau": tl}))
    return out


@dataclass
class Ledger:
    checks: list = field(default_factory=list)
    C1: float = math.nan

    def extend(self, items):
        self.checks.extend(items)

    def counts(self) -> dict:
        out = {PASS: 0, MARGINAL: 0, FAIL: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def all_passed(self) -> bool:
        return all(c.status == PASS for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if c.status == FAIL]

    @property
    def marginals(self) -> list:
        return [c for c in self.checks if c.status == MARGINAL]

    def to_json(self) -> str:
        body = {"C1": self.C1, "summary": self.counts(), "checks": [c.to_dict() for c in self.checks]}
        return json.dumps(body, indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [f"{'check':<22} {'alpha':>6} {'gamma':>6} {'lhs':>24} {'rhs':>24} status"]
        for c in self.checks:
            a = c.context.get("alpha", float("nan"))
            g = c.context.get("gamma", float("nan"))
            rows.append(f"{c.name:<22} {a:>6.3g} {g:>6.3g} {c.lhs:>24.17g} {c.rhs:>24.17g} {c.status}")
        n = self.counts()
        rows.append(f"{n[PASS]} pass, {n[MARGINAL]} marginal, {n[FAIL]} fail")
        return "\n".join(rows)


def verify_grid(base: Kernel1D = GAUSSIAN, alphas: Sequence[float] = DEFAULT_ALPHAS,
                gammas: Sequence[float] = DEFAULT_GAMMAS, rule: QuadRule | None = None,
                index_range: int = 8, C1: float | None = None, reference: str = "nystrom",
                spectrum_hook: Callable[[MercerSpectrum, float, float], MercerSpectrum] | None = None,
                ) -> Ledger:
    """Interlacing (lm1b, Weyl, lm1c) and eigenvalue sandwich checks over an (alpha, gamma) grid.

    ``K_A`` is the constant kernel (spectrum used analytically), ``K_B`` the
    base kernel and ``K_C = (1 - alpha^2) K_A + alpha^2 K_B`` is solved by
    Nyström.  By default ``K_B`` is solved on the same rule as ``K_C`` so the
    comparison is between consistent discretisations; ``reference="closed"``
    uses the closed-form spectrum instead.  ``spectrum_hook`` may replace the
    Nyström spectrum of ``K_C`` (fault injection in tests).
    """
    rule = rule or gauss_hermite(DEFAULT_ORDER)
    need = 2 * index_range + 1
    if need > rule.order:
        raise InvalidArgumentError(f"index range {index_range} needs quadrature order >= {need}")
    if C1 is None:
        C1 = c1_estimate(base, default_gamma_grid(), rule)
    ledger = Ledger(C1=C1)
    spec_a = MercerSpectrum.rank_one(need)
    for g in gammas:
        spec_b = reference_spectrum(base, g, rule, need, reference)
        for a in alphas:
            spec_c = scaled_spectrum(base, a, g, rule, need)
            if spectrum_hook is not None:
                spec_c = spectrum_hook(spec_c, a, g)
            ctx = {"alpha": a, "gamma": g}
            wa, wb = 1.0 - a * a, a * a
            ledger.extend(lemma1_upper(spec_a, spec_b, wa, wb, spec_c, index_range, ctx))
            ledger.extend(lemma1_lower(spec_a, spec_b, wa, wb, spec_c, index_range, ctx))
            ledger.extend(sandwich_check(base, a, g, C1, rule, need, spec_c, reference))
    return ledger
