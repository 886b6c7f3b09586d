"""Gaussian kernel spectrum: closed form against the Nyström discretisation.

Under the density exp(-x^2)/sqrt(pi) the kernel exp(-gamma^2 (x-t)^2) has
eigenvalues (1 - w) w^(j-1).  Here we compare them with the eigenvalues of
the weighted kernel matrix on Gauss-Hermite nodes, and watch the agreement
improve with the number of nodes at the largest shape parameter.
"""

import numpy as np

from kerntract import GAUSSIAN, gauss_hermite, gaussian_closed_spectrum, gaussian_omega, scaled_spectrum

print("shape   omega        max|nystrom - closed| (top 10, 80 nodes)")
for gamma in (0.1, 0.5, 1.0, 2.0):
    ny = scaled_spectrum(GAUSSIAN, 1.0, gamma, gauss_hermite(80), 10).eigenvalues
    closed = gaussian_closed_spectrum(gamma, 10).eigenvalues
    print(f"{gamma:5.2f}   {gaussian_omega(gamma):.6f}   {np.abs(ny - closed).max():.2e}")

# gamma = 2 is the hardest case: the kernel is narrow relative to the density
print("\nnodes   max error at gamma = 2")
for order in (60, 80, 100, 120, 160):
    ny = scaled_spectrum(GAUSSIAN, 1.0, 2.0, gauss_hermite(order), 10).eigenvalues
    print(f"{order:5d}   {np.abs(ny - gaussian_closed_spectrum(2.0, 10).eigenvalues).max():.2e}")

# mixing with the constant kernel lifts the first eigenvalue and damps the rest
print("\nalpha   nu_1        nu_2        nu_3     (gamma = 1)")
for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
    nu = scaled_spectrum(GAUSSIAN, alpha, 1.0, gauss_hermite(80), 3).eigenvalues
    print(f"{alpha:5.2f}   {nu[0]:.8f}  {nu[1]:.8f}  {nu[2]:.8f}")
