"""Spectral toolkit for tractability of L2 approximation with Gaussian-type kernels."""

from .eigensolve import MercerSpectrum, nystrom_spectrum, spectrum_from_matrix, sym_eig
from .errors import (
    ConvergenceError, InsufficientDataError, InvalidArgumentError, KerntractError, KernelError,
    NotPositiveDefiniteError, NumericalDomainError, ResourceLimitError, TailDivergenceError, TruncationError,
)
from .kernels import (
    CONSTANT, GAUSSIAN, Kernel1D, ParamSeq, ProductKernel, ScaledKernel1D, TailFamily, decay_rate,
    factor_spectra, factor_spectrum, gaussian_closed_spectrum, gaussian_omega, materialize, scaled_spectrum,
)
from .quadrature import QuadRule, double_integral, gauss_hermite, integrate_1d
from .tensor import TensorEigenStream, count_above, nth_value, sum_tau, top_k
from .tractability import (
    ALL_CRITERIA, CriterionSpec, TractReport, build_report, check_conditions, exponent, fit_rates,
    info_complexity, initial_norm_bound, std_bounds, truncation_error_demo, worst_case_error_all,
)
from .verify import BoundCheck, Ledger, lemma1_lower, lemma1_upper, sandwich_check, verify_grid

__version__ = "0.1.0"
