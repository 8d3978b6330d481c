"""Threshold <-> p-value reference values, evaluated with mpmath (40 digits).

Usage: python3 scripts/gen_pvalue_oracle.py > crates/core/tests/fixtures/pvalue_oracle.csv
"""
import mpmath as mp

mp.mp.dps = 40


def chi2_upper(s, m):
    k = mp.mpf(m - 1)
    return mp.gammainc(k / 2, k * s / 2, mp.inf, regularized=True)


def gaussian_two_sided(s, m, denom):
    z = abs(s - 1) / mp.sqrt(mp.mpf(2) / denom)
    return mp.erfc(z / mp.sqrt(2))


print("method,s,m,p")
for m in (128, 64, 16):
    for s in ("0.5", "1.2", "1.5", "2", "4"):
        s_ = mp.mpf(s)
        print(f"chi2,{s},{m},{mp.nstr(chi2_upper(s_, m), 20)}")
        print(f"gaussian-m,{s},{m},{mp.nstr(gaussian_two_sided(s_, m, m), 20)}")
        print(f"gaussian-m1,{s},{m},{mp.nstr(gaussian_two_sided(s_, m, m - 1), 20)}")
median = mp.findroot(lambda s: chi2_upper(s, 128) - mp.mpf("0.5"), 0.99)
print(f"chi2-median,{mp.nstr(median, 20)},128,0.5")
