import json
import math

import numpy as np
import pytest

from kerntract.eigensolve import MercerSpectrum
from kerntract.errors import InvalidArgumentError
from kerntract.kernels import GAUSSIAN, gaussian_closed_spectrum, scaled_spectrum
from kerntract.quadrature import gauss_hermite
from kerntract.tractability import default_gamma_grid
from kerntract.verify import (
    FAIL, MARGINAL, PASS, BoundCheck, Ledger, lemma1_lower, lemma1_upper, reference_spectrum,
    sandwich_check, sum_bound_checks, verify_grid,
)

C1_AT_ONE = 1 - 1 / math.sqrt(3)


def by_name(checks):
    return {c.name: c for c in checks}


class TestBoundCheck:
    @pytest.mark.parametrize("lhs, rhs, status", [
        (1.0, 1.0, PASS), (1.0 + 1e-9, 1.0, PASS), (1.0 + 5e-9, 1.0, MARGINAL), (1.0 + 2e-8, 1.0, FAIL),
        (0.0, 1.0, PASS),
    ])
    def test_status(self, lhs, rhs, status):
        c = BoundCheck("x", lhs, rhs, 1e-9)
        assert c.status == status
        assert c.passed == (status == PASS)
        assert c.slack == rhs - lhs

    def test_to_dict(self):
        d = BoundCheck("x", 1.0, 2.0, 1e-9, {"alpha": 0.5}).to_dict()
        assert d == {"name": "x", "lhs": 1.0, "rhs": 2.0, "tolerance": 1e-9, "context": {"alpha": 0.5},
                     "slack": 1.0, "status": PASS}


class TestLemma1:
    def test_example_upper(self, rule80):
        a, b = 0.75, 0.25
        spec_c = scaled_spectrum(GAUSSIAN, 0.5, 1.0, rule80, 17)
        spec_b = gaussian_closed_spectrum(1.0, 17)
        checks = by_name(lemma1_upper(MercerSpectrum.rank_one(17), spec_b, a, b, spec_c))
        c = checks["lm1b(i=1,j=1)"]
        assert c.rhs == pytest.approx(0.25 * 0.236068, abs=1e-6)
        assert c.lhs == pytest.approx(spec_c.eigenvalues[2])
        assert all(x.passed for x in checks.values())
        assert len(checks) == 2 * 64

    def test_example_lower(self, rule80):
        spec_c = scaled_spectrum(GAUSSIAN, 0.5, 1.0, rule80, 8)
        checks = by_name(lemma1_lower(MercerSpectrum.rank_one(8), gaussian_closed_spectrum(1.0, 8), 0.75, 0.25,
                                      spec_c))
        assert checks["lm1c(i=1)"].lhs == pytest.approx(0.75)
        assert checks["lm1c(i=2)"].lhs == pytest.approx(0.25 * 0.236068, abs=1e-6)
        assert all(c.passed for c in checks.values())

    def test_a_only(self):
        a = np.array([0.5, 0.3, 0.1, 0.05, 0.03, 0.01, 0.005, 0.002, 0.001, 0.0005, 0.0001, 5e-5, 1e-5,
                      5e-6, 1e-6, 5e-7, 1e-7])
        b = np.linspace(0.2, 0.0, 17)
        checks = lemma1_upper(a, b, 1.0, 0.0, a) + lemma1_lower(a, b, 1.0, 0.0, a)
        assert all(c.passed for c in checks)
        for c in lemma1_lower(a, b, 1.0, 0.0, a):
            assert c.lhs == c.rhs

    def test_equal_halves(self):
        a = gaussian_closed_spectrum(0.7, 17).eigenvalues
        assert all(c.passed for c in lemma1_upper(a, a, 0.5, 0.5, a))

    def test_detects_violation(self):
        a = MercerSpectrum.rank_one(17).eigenvalues
        b = gaussian_closed_spectrum(1.0, 17).eigenvalues
        c = b.copy()
        c[2] += 1e-3
        # with a = 0 the Weyl form reduces to c[l] <= b[l]
        bad = [x for x in lemma1_upper(a, b, 0.0, 1.0, c) if not x.passed]
        assert [x.name for x in bad] == ["weyl(k=1,l=3)"]

    def test_mismatched_truncation(self):
        short = gaussian_closed_spectrum(1.0, 5)
        with pytest.raises(InvalidArgumentError):
            lemma1_upper(short, short, 0.5, 0.5, short)
        with pytest.raises(InvalidArgumentError):
            lemma1_lower(short, short, 0.5, 0.5, short, index_range=8)
        with pytest.raises(InvalidArgumentError):
            lemma1_upper(short, short, -0.5, 0.5, short, index_range=1)


class TestSandwich:
    def test_example_alpha_one(self, rule80):
        checks = by_name(sandwich_check(GAUSSIAN, 1.0, 1.0, C1_AT_ONE, rule80))
        ev1 = checks["ev1l"]
        assert ev1.lhs == pytest.approx(1 / math.sqrt(3), abs=1e-9)
        assert ev1.rhs == pytest.approx(0.618034, abs=1e-6)
        assert all(c.passed for c in checks.values())

    def test_alpha_zero(self, rule80):
        checks = by_name(sandwich_check(GAUSSIAN, 0.0, 1.0, C1_AT_ONE, rule80))
        assert checks["ev2u"].lhs == 0.0 and checks["ev2u"].rhs == 0.0 and checks["ev2u"].passed

    def test_j3_example(self, rule80):
        c = by_name(sandwich_check(GAUSSIAN, 0.7, 0.5, 1.0, rule80, reference="closed"))["nll(j=3)"]
        assert c.rhs == pytest.approx(0.49 * gaussian_closed_spectrum(0.5, 2).eigenvalues[1], rel=1e-14)
        assert c.passed

    def test_ev1l_slack_scales_with_alpha_gamma(self, rule80):
        ratios = []
        for a in (0.25, 0.5, 0.75, 1.0):
            for g in (0.1, 0.5, 1.0):
                c = by_name(sandwich_check(GAUSSIAN, a, g, 1.0, rule80))["ev1l"]
                ratios.append(c.slack / (a * g) ** 2)
        assert max(ratios) <= 1.0 and min(ratios) >= -1e-6

    def test_reference_choice(self, rule80):
        with pytest.raises(InvalidArgumentError):
            reference_spectrum(GAUSSIAN, 1.0, rule80, 5, "exact")


class TestSumBounds:
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
    @pytest.mark.parametrize("gamma", [0.1, 0.5, 1.0])
    def test_upper_and_lower(self, rule80, alpha, gamma):
        grid = sorted(set(default_gamma_grid().tolist()) | {gamma})
        checks = sum_bound_checks(GAUSSIAN, alpha, gamma, 1.0, grid, rule80)
        assert checks[0].name == "evu"
        assert all(c.passed for c in checks)

    def test_lower_emitted_for_small_alpha_gamma(self, rule80):
        names = [c.name for c in sum_bound_checks(GAUSSIAN, 0.25, 0.1, 1.0, default_gamma_grid(), rule80)]
        assert names == ["evu", "evl"]

    def test_tau_lower_range(self, rule80):
        with pytest.raises(InvalidArgumentError):
            sum_bound_checks(GAUSSIAN, 0.5, 0.5, 1.0, default_gamma_grid(), rule80, tau_lower=0.6)


class TestGrid:
    def test_default_grid_all_pass(self):
        ledger = verify_grid()
        assert ledger.all_passed, [c for c in ledger.checks if not c.passed][:5]
        assert 0 < ledger.C1 <= 1

    def test_closed_reference_small_gammas(self):
        assert verify_grid(gammas=(0.1, 0.5, 1.0), reference="closed").all_passed

    def test_fault_injection(self):
        def corrupt(spec, alpha, gamma):
            if alpha == 0.5 and gamma == 1.0:
                ev = spec.eigenvalues.copy()
                ev[1:] = 0.2  # far above 0.25 * lambda_2 = 0.059
                return MercerSpectrum(ev)
            return spec

        ledger = verify_grid(alphas=(0.5,), gammas=(1.0,), spectrum_hook=corrupt)
        names = {c.name for c in ledger.failures}
        assert "lm1b(i=1,j=1)" in names and not ledger.all_passed

    def test_index_range_needs_order(self):
        with pytest.raises(InvalidArgumentError):
            verify_grid(rule=gauss_hermite(10), index_range=8)

    def test_ledger_outputs(self):
        ledger = verify_grid(alphas=(0.5,), gammas=(1.0,), index_range=2)
        body = json.loads(ledger.to_json())
        assert body["summary"] == ledger.counts()
        assert len(body["checks"]) == len(ledger.checks)
        table = ledger.table().splitlines()
        assert table[0].startswith("check") and table[-1].endswith("0 fail")
        assert len(table) == len(ledger.checks) + 2


class TestLedger:
    def test_counts(self):
        led = Ledger([BoundCheck("a", 0, 1, 1e-9), BoundCheck("b", 1 + 5e-9, 1, 1e-9),
                      BoundCheck("c", 2, 1, 1e-9)])
        assert led.counts() == {PASS: 1, MARGINAL: 1, FAIL: 1}
        assert [c.name for c in led.marginals] == ["b"]
        assert [c.name for c in led.failures] == ["c"]
