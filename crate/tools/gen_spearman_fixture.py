"""Freeze reference Spearman correlations and p-values computed by scipy.

Usage: python3 tools/gen_spearman_fixture.py > crates/core/tests/fixtures/spearman_reference.tsv
"""
import numpy as np
from scipy import stats

rng = np.random.default_rng(20240501)
print("xs\tys\trho\tp")
rows = 0
while rows < 80:
    n = int(rng.integers(3, 60))
    levels = int(rng.integers(2, 12))
    xs = rng.integers(0, levels, n) * 0.25
    ys = np.where(rng.random(n) < 0.5, xs, rng.integers(0, levels, n) * 0.25)
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        continue
    res = stats.spearmanr(xs, ys)
    fmt = lambda v: ",".join(repr(float(x)) for x in v)
    print(f"{fmt(xs)}\t{fmt(ys)}\t{float(res.statistic)!r}\t{float(res.pvalue)!r}")
    rows += 1
