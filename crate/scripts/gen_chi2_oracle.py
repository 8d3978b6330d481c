"""Regenerate the chi-squared survival oracle table with mpmath (50 digits).

Usage: python3 scripts/gen_chi2_oracle.py > crates/core/tests/fixtures/chi2_survival_oracle.csv
"""
import mpmath

mpmath.mp.dps = 50

DOFS = [1, 2, 10, 127, 1000]
# x-points as multiples of k, plus a few absolute points near the origin.
MULTIPLES = ["0.001", "0.05", "0.2", "0.5", "0.8", "0.95", "1", "1.1", "1.5", "2", "3", "3.5"]


def survival(x, k):
    return mpmath.gammainc(mpmath.mpf(k) / 2, mpmath.mpf(x) / 2, mpmath.inf, regularized=True)


print("k,x,survival")
for k in DOFS:
    for mult in MULTIPLES:
        x = mpmath.mpf(mult) * k
        print(f"{k},{mpmath.nstr(x, 17)},{mpmath.nstr(survival(x, k), 20)}")
