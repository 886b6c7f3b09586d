"""Tractability exponents and what the fitted rates look like in practice.

The exponent of strong polynomial tractability depends only on the decay
rate r of alpha_l * gamma_l.  For alpha_l = 1 and gamma_l = l^-2 (r = 2) the
d-uniform bound is e(n) <~ n^-2.  For a fixed, modest d the actual decay is
faster than that, since every finite product of geometric spectra decays
super-polynomially.  The slope approaches -2 only as d grows.
"""

import numpy as np

from kerntract import ALL_CRITERIA, ParamSeq, exponent, fit_rates

print("decay rate r   abs-all   abs-std   norm-all  norm-std")
for r in (0.0, 0.25, 0.5, 0.6, 1.0, 2.0, np.inf):
    cells = []
    for crit in ALL_CRITERIA:
        value, qual = exponent(crit, r)
        cells.append("   ?    " if value is None else f"{value:6.3f}{'<' if qual == 'upper-bound' else ' '} ")
    print(f"{r:12}   " + "  ".join(cells))

seq = ParamSeq.polynomial(1.0, 2.0, alpha=1.0)
n_grid = np.unique(np.geomspace(64, 4096, 13).round().astype(int))
print("\nfitted log-log slope of e(n), n in [64, 4096], theory <~ -2")
for d in (2, 5, 10, 20, 40):
    fit = fit_rates(seq, d, n_grid=n_grid)
    print(f"  d = {d:2d}: slope {fit.fitted_rate:7.3f}")

fit = fit_rates(seq, 5, eps_grid=np.geomspace(1e-4, 1e-1, 10))
print(f"\nfitted p from the eps sweep at d = 5: {fit.fitted_p:.3f} (exponent 0.5)")
