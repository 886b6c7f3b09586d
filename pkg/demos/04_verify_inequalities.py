"""Machine-checking the eigenvalue inequalities on a grid.

For K = (1 - alpha^2) * 1 + alpha^2 * K_gamma the spectrum is squeezed between
the spectra of the two parts.  We evaluate every inequality on a grid of
(alpha, gamma) and summarise the ledger.  The tightest checks are the
Weyl-form equalities at alpha = 1.
"""

from collections import Counter

from kerntract import verify_grid

ledger = verify_grid()
print(f"C1 estimate: {ledger.C1:.7f}")
print("counts:", ledger.counts())

by_family = Counter(c.name.split("(")[0] for c in ledger.checks)
print("checks per family:", dict(sorted(by_family.items())))

tight = sorted(ledger.checks, key=lambda c: c.slack)[:5]
print("\nfive smallest slacks")
for c in tight:
    print(f"  {c.name:18s} alpha={c.context['alpha']:<5} gamma={c.context['gamma']:<4} slack={c.slack:.2e}")
