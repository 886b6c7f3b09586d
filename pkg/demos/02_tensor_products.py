"""Multivariate eigenvalues of product kernels and information complexity.

The eigenvalues of a d-fold product kernel are all products of univariate
eigenvalues.  We list the largest ones lazily and count how many exceed
eps^2, which is the minimal number of linear functionals needed for error
eps.  A sequence whose shape parameters shrink keeps that count bounded in
d.  For an isotropic sequence the initial error itself decays like
0.786^d, so the absolute count eventually drops to zero while the
normalized count (error relative to the initial error) keeps growing.
"""

from kerntract import CriterionSpec, ParamSeq, factor_spectra, info_complexity, top_k

seq = ParamSeq.polynomial(0.5, 2.0)
print("top products for d = 3 (polynomial tail, c = 0.5, s = 2)")
for value, idx in top_k(factor_spectra(seq, 3), 8):
    print(f"  {value:.6e}  {idx}")

abs_all, norm_all = CriterionSpec("abs", "all"), CriterionSpec("norm", "all")
print("\nn(eps, d) with arbitrary linear functionals, eps = 0.1")
print("   d   shrinking   isotropic abs   isotropic normalized")
iso = ParamSeq.constant(1.0, 1.0)
for d in (1, 2, 4, 8, 16):
    n_shrink = info_complexity(abs_all, 0.1, factor_spectra(seq, d))
    iso_spectra = factor_spectra(iso, d, count=16)
    n_abs = info_complexity(abs_all, 0.1, iso_spectra)
    n_norm = info_complexity(norm_all, 0.1, iso_spectra)
    print(f"{d:4d}   {n_shrink:9d}   {n_abs:13d}   {n_norm:20d}")
