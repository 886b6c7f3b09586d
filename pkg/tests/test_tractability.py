import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerntract.eigensolve import MercerSpectrum
from kerntract.errors import InsufficientDataError, InvalidArgumentError, TailDivergenceError
from kerntract.kernels import CONSTANT, GAUSSIAN, ParamSeq, factor_spectra, gaussian_closed_spectrum, gaussian_omega
from kerntract.quadrature import gauss_hermite
from kerntract.tractability import (
    ABSOLUTE, ALL_CRITERIA, EXACT, NORMALIZED, UNKNOWN, UPPER, CriterionSpec, a3p_check, a3p_constant,
    build_report, check_conditions, default_gamma_grid, exponent, fit_rates, gtc2_sum, info_complexity,
    initial_norm_bound, is_isotropic, std_bounds, truncation_error_demo, worst_case_error_all,
)

ABS_ALL, ABS_STD = CriterionSpec("abs", "all"), CriterionSpec("abs", "std")
NORM_ALL, NORM_STD = CriterionSpec("norm", "all"), CriterionSpec("norm", "std")
GOLDEN = (math.sqrt(5) - 1) / 2
rates = st.one_of(st.just(0.0), st.just(math.inf), st.floats(0.0, 1e6))


class TestCriterionSpec:
    def test_aliases_and_theorems(self):
        assert CriterionSpec("relative", "std") == NORM_STD
        assert [c.theorem for c in ALL_CRITERIA] == [1, 2, 3, 4]
        assert ABS_ALL.to_dict() == {"error_criterion": ABSOLUTE, "info_class": "all"}

    @pytest.mark.parametrize("crit, cls", [("worst", "all"), ("abs", "fourier")])
    def test_rejects_unknown(self, crit, cls):
        with pytest.raises(InvalidArgumentError):
            CriterionSpec(crit, cls)


class TestExponent:
    @pytest.mark.parametrize("crit, r, expected", [
        (ABS_ALL, 1.0, (1.0, EXACT)),
        (ABS_STD, 1.0, (1.5, UPPER)),
        (ABS_ALL, 0.0, (2.0, EXACT)),
        (ABS_ALL, math.inf, (0.0, EXACT)),
        (ABS_STD, 0.25, (4.0, UPPER)),
        (ABS_STD, 0.5, (4.0, UPPER)),
        (NORM_ALL, 0.3, (None, UNKNOWN)),
        (NORM_ALL, 0.5, (2.0, EXACT)),
        (NORM_ALL, 2.0, (0.5, EXACT)),
        (NORM_STD, 0.5, (None, UNKNOWN)),
        (NORM_STD, 2.0, (0.625, UPPER)),
        (NORM_STD, math.inf, (0.0, UPPER)),
    ])
    def test_table(self, crit, r, expected):
        assert exponent(crit, r) == expected

    @given(rates)
    def test_abs_all_at_most_two(self, r):
        p, _ = exponent(ABS_ALL, r)
        assert p <= 2.0
        assert (p == 2.0) == (r <= 0.5)

    @given(rates)
    def test_std_not_better_than_all(self, r):
        assert exponent(ABS_STD, r)[0] >= exponent(ABS_ALL, r)[0]

    @given(st.floats(0.5, 1e6, exclude_min=True))
    def test_std_identity_exact(self, r):
        p_all = exponent(ABS_ALL, r)[0]
        assert exponent(ABS_STD, r)[0] - (p_all + 0.5 * p_all ** 2) == 0.0
        assert exponent(NORM_STD, r)[0] - (p_all + 0.5 * p_all ** 2) == 0.0

    @pytest.mark.parametrize("r", [-1.0, math.nan])
    def test_domain(self, r):
        with pytest.raises(InvalidArgumentError):
            exponent(ABS_ALL, r)


class TestErrorsAndComplexity:
    spectra = [gaussian_closed_spectrum(1.0, 64)]

    def test_closed_form_values(self):
        assert worst_case_error_all(self.spectra, 0) == pytest.approx(math.sqrt(GOLDEN), rel=1e-14)
        assert worst_case_error_all(self.spectra, 1) == pytest.approx(math.sqrt(GOLDEN * (1 - GOLDEN)), rel=1e-14)
        assert worst_case_error_all(self.spectra, 0) == pytest.approx(0.786151, abs=1e-6)
        assert worst_case_error_all(self.spectra, 1) == pytest.approx(0.485868, abs=1e-6)

    def test_monotone_in_n(self):
        spectra = factor_spectra(ParamSeq.polynomial(0.5, 2.0), 4, count=16)
        errs = [worst_case_error_all(spectra, n) for n in range(60)]
        assert np.all(np.diff(errs) <= 0)
        with pytest.raises(InvalidArgumentError):
            worst_case_error_all(spectra, -1)

    def test_complexity_examples(self):
        assert info_complexity(ABS_ALL, 0.5, self.spectra) == 1
        assert info_complexity(ABS_ALL, 0.9, self.spectra) == 0
        assert info_complexity(NORM_ALL, 0.9, self.spectra) == 1

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    @settings(deadline=None)
    def test_monotone_in_eps_and_normalized_dominates(self, e1, e2):
        spectra = factor_spectra(ParamSeq.polynomial(1.0, 1.5), 3, count=32)
        lo, hi = sorted((e1, e2))
        assert info_complexity(ABS_ALL, lo, spectra) >= info_complexity(ABS_ALL, hi, spectra)
        assert info_complexity(NORM_ALL, lo, spectra) >= info_complexity(ABS_ALL, lo, spectra)

    def test_normalized_isotropic_grows_with_d(self):
        seq = ParamSeq.constant(1.0, 1.0)
        for eps in (0.2, 0.4, 0.6):
            n1 = info_complexity(NORM_ALL, eps, factor_spectra(seq, 1, count=20))
            n2 = info_complexity(NORM_ALL, eps, factor_spectra(seq, 2, count=20))
            nu = [v for v in (a * b for a, b in itertools.product(
                gaussian_closed_spectrum(1.0, 20).eigenvalues, repeat=2))]
            brute = sum(v > eps * eps * max(nu) for v in nu)
            assert n2 == brute and n2 >= n1

    def test_std_class_refused(self):
        with pytest.raises(InvalidArgumentError):
            info_complexity(ABS_STD, 0.5, self.spectra)
        for eps in (0.0, 1.0):
            with pytest.raises(InvalidArgumentError):
                info_complexity(ABS_ALL, eps, self.spectra)


class TestStdBounds:
    def test_examples(self):
        err, nb = std_bounds(0.5, 4)
        assert abs(err - math.sqrt(1.25)) < 1e-12
        assert nb == 72
        big, _ = std_bounds(0.5, 10 ** 8)
        assert big == pytest.approx(math.sqrt(2) * 1e-2, rel=0.01)

    @given(st.floats(1e-3, 0.999), st.integers(1, 10 ** 9))
    def test_formula(self, eps, n):
        err, nb = std_bounds(eps, n)
        assert err == math.sqrt(2) / n ** 0.25 * math.sqrt(1 + 1 / (2 * math.sqrt(n)))
        assert nb >= (1 + math.sqrt(1 + eps * eps)) ** 2 / eps ** 4

    @pytest.mark.parametrize("eps, n", [(0.0, 1), (1.0, 1), (0.5, 0)])
    def test_domain(self, eps, n):
        with pytest.raises(InvalidArgumentError):
            std_bounds(eps, n)


class TestConditions:
    def test_c1_at_gamma_one(self):
        c = check_conditions(GAUSSIAN, 1.0, [1.0])
        assert c.C1 == pytest.approx(1 - 1 / math.sqrt(3), abs=1e-12)
        assert not c.violated

    def test_default_grid(self):
        grid = default_gamma_grid()
        assert grid.size == 16 and grid[0] == pytest.approx(1e-3) and grid[-1] < 2.0
        assert default_gamma_grid(0.5)[-1] < 0.5
        with pytest.raises(InvalidArgumentError):
            default_gamma_grid(1e-4)

    def test_c1_below_one_and_constants_ordered(self):
        c1, c2, c3 = check_conditions(GAUSSIAN, 1.0)
        assert 0 < c1 <= 1 and 0 < c2 <= c3 < math.inf

    def test_small_gamma_first_term(self):
        s = gaussian_closed_spectrum(1e-3, 64)
        assert (s.eigenvalues[1] / 1e-6) ** 0.5 == pytest.approx(1.0, rel=1e-3)
        assert gtc2_sum(s, 1e-3, 1.0) == pytest.approx(1.0, rel=1e-2)

    def test_constant_base_violates(self):
        assert check_conditions(CONSTANT, 1.0, [0.5, 1.0]).violated

    def test_errors(self):
        with pytest.raises(TailDivergenceError):
            check_conditions(GAUSSIAN, math.inf, [1.0])
        with pytest.raises(InvalidArgumentError):
            check_conditions(GAUSSIAN, 1.0, [])


class TestInitialNorm:
    def test_gamma_one(self):
        b = initial_norm_bound(ParamSeq.constant(1.0, 1.0), 1, 1 - 1 / math.sqrt(3))
        assert b == pytest.approx(math.sqrt(1 / math.sqrt(3)), rel=1e-12)
        assert b <= math.sqrt(GOLDEN)

    def test_constant_kernel(self):
        assert initial_norm_bound(ParamSeq.constant(0.0, 1.0), 7, 1.0) == 1.0

    def test_geometric_limit(self):
        seq = ParamSeq.geometric(1.0, 0.5)
        vals = [initial_norm_bound(seq, d, 1.0) for d in (5, 20, 80)]
        assert vals[0] >= vals[1] >= vals[2] > 0.5
        assert vals[2] == pytest.approx(vals[1], rel=1e-9)

    def test_vacuous(self):
        with pytest.raises(InvalidArgumentError):
            initial_norm_bound(ParamSeq.constant(1.0, 2.0), 1, 1.0)
        with pytest.raises(InvalidArgumentError):
            initial_norm_bound(ParamSeq.constant(1.0, 0.5), 0, 1.0)


class TestDecay:
    def test_geometric_beats_n_squared(self):
        spectra = [gaussian_closed_spectrum(1.0, 64)]
        assert a3p_check(spectra, 2.0, 1.0, 60).passed

    def test_reports_first_violation(self):
        res = a3p_check([gaussian_closed_spectrum(1.0, 64)], 2.0, 0.5, 60)
        assert not res.passed and res.first_violation == 1

    def test_small_b(self):
        nu1 = gaussian_closed_spectrum(1.0, 1).eigenvalues[0]
        assert a3p_check([gaussian_closed_spectrum(1.0, 8)], 3.0, 0.9 * nu1, 1).first_violation == 1

    def test_p_must_exceed_one(self):
        with pytest.raises(InvalidArgumentError):
            a3p_check([gaussian_closed_spectrum(1.0, 4)], 1.0, 1.0, 3)

    def test_constant_covers_polynomial_tail(self):
        seq = ParamSeq.polynomial(0.5, 2.0)
        spectra = factor_spectra(seq, 5, count=32)
        c3 = check_conditions(GAUSSIAN, 2.0).C3
        B = a3p_constant(seq, 5, c3, 2.0, spectra)
        assert a3p_check(spectra, 4.0, B, 200).passed


class TestTruncationDemo:
    def test_empty_algorithm(self):
        res = truncation_error_demo(GAUSSIAN, 1.0, 1.0, 0.3, 0)
        assert res.measured_error <= 1.0 and res.passed
        assert res.bound == pytest.approx(math.sqrt(GOLDEN), rel=1e-12)

    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_constant_kernel_is_captured(self, n):
        res = truncation_error_demo(GAUSSIAN, 0.0, 1.0, 0.7, n)
        assert res.measured_error < 1e-12 and res.passed

    def test_gamma_one(self):
        res = truncation_error_demo(GAUSSIAN, 1.0, 1.0, 0.3, 5)
        w = gaussian_omega(1.0)
        assert res.bound == pytest.approx(math.sqrt((1 - w) * w ** 5), rel=1e-10)
        assert res.passed

    @given(st.floats(0.0, 1.0), st.floats(0.1, 2.0), st.floats(-2.0, 2.0), st.integers(0, 30))
    @settings(max_examples=40, deadline=None)
    def test_bound_holds(self, alpha, gamma, t0, n):
        assert truncation_error_demo(GAUSSIAN, alpha, gamma, t0, n).passed

    def test_n_range(self):
        with pytest.raises(InvalidArgumentError):
            truncation_error_demo(GAUSSIAN, 1.0, 1.0, 0.0, 80)


class TestRates:
    def test_polynomial_p(self):
        fit = fit_rates(ParamSeq.polynomial(0.5, 2.0), 1, eps_grid=np.geomspace(1e-4, 0.1, 10))
        assert fit.fitted_p <= 0.5 + 0.3 and fit.p_rms >= 0

    def test_isotropic_non_polynomial(self):
        fit = fit_rates(ParamSeq.constant(1.0, 1.0), 1, n_grid=list(range(2, 101, 7)))
        assert fit.non_polynomial
        # e(n) = sqrt((1-w) w^n) exactly
        w = gaussian_omega(1.0)
        expected = [math.sqrt((1 - w) * w ** n) for n in fit.n_values]
        inside = np.asarray(fit.n_values) < 64  # 64 retained eigenvalues
        np.testing.assert_allclose(np.asarray(fit.errors)[inside], np.asarray(expected)[inside], rtol=1e-12)
        assert np.all(np.asarray(fit.errors)[~inside] == 0.0)

    def test_geometric_tail_p_near_zero(self):
        fit = fit_rates(ParamSeq.geometric(0.5, 0.5), 1, eps_grid=np.geomspace(1e-4, 0.1, 10))
        assert fit.fitted_p <= 0.3

    @pytest.mark.parametrize("kw", [
        {"n_grid": [1, 2, 3, 4, 5]},
        {"n_grid": [1, 10, 100]},
        {"eps_grid": [0.1, 0.2, 0.3, 0.4, 0.5]},
        {},
    ])
    def test_degenerate_grids(self, kw):
        with pytest.raises(InsufficientDataError):
            fit_rates(ParamSeq.polynomial(0.5, 2.0), 2, **kw)

    def test_flat_errors(self):
        with pytest.raises(InsufficientDataError):
            fit_rates(ParamSeq.constant(0.0, 1.0), 1, n_grid=[1, 3, 10, 30, 100])


class TestReport:
    def test_polynomial_report(self):
        rep = build_report(ParamSeq.polynomial(0.5, 2.0), 5, ABS_ALL, eps_grid=np.geomspace(1e-4, 0.1, 8))
        assert rep.r_tilde == 2.0 and rep.p_exponent == 0.5 and rep.p_qualifier == EXACT
        names = {c["name"]: c["passed"] for c in rep.checks}
        assert names == {"initial_norm_lower_bound": True, "eigenvalue_decay_a3p": True,
                         "fitted_p_within_exponent": True}
        d = rep.to_dict()
        assert d["exponents"]["absolute-std"] == {"value": 0.625, "qualifier": UPPER}

    def test_isotropic_notes(self):
        seq = ParamSeq.constant(1.0, 1.0)
        assert is_isotropic(seq) and not is_isotropic(ParamSeq.polynomial(1.0, 2.0))
        rep = build_report(seq, 1, ABS_ALL)
        assert rep.p_exponent == 2.0
        assert any("equivalent to polynomial tractability" in n for n in rep.notes)
        assert rep.to_dict()["C2"] is None

    def test_normalized_notes(self):
        rep = build_report(ParamSeq.constant(1.0, 1.0), 1, NORM_ALL)
        assert rep.p_qualifier == UNKNOWN and rep.p_exponent is None
        assert any("linear functionals" in n for n in rep.notes)
        assert any("not polynomially tractable" in n for n in rep.notes)

    def test_infinite_rate_serialises(self):
        rep = build_report(ParamSeq.geometric(0.5, 0.5), 2, ABS_ALL)
        assert rep.to_dict()["r_tilde"] == "inf"
