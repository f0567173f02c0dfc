"""Count detected and harmful Z-error patterns, then compare the leading term with sampling.

Run: python3 demos/02_suppression_scan.py
"""

from magicfactory.analysis import analytic_rates, enumerate_errors, monte_carlo_validate
from magicfactory.circuits import build_ccz_factory, build_fifteen_to_one

ccz = build_ccz_factory()
report = enumerate_errors(ccz, 3, method="frame")
print(report.to_table())

# Sampling at a fairly high eps so harmful events actually show up.
eps = 0.02
mc = monte_carlo_validate(ccz, eps, 50_000, seed=3)
exact = analytic_rates(report, eps)
print(f"\neps={eps}: harmful accept {mc['harmful_accept_rate']:.2e} +/- {mc['harmful_accept_stderr']:.1e}"
      f"  (counts predict {exact['harmful_accept_rate']:.2e})")
print(f"        rejection      {mc['rejection_rate']:.4f} +/- {mc['rejection_stderr']:.4f}"
      f"  (counts predict {exact['rejection_rate']:.4f})")

t15 = enumerate_errors(build_fifteen_to_one(), 3, method="frame", branches=1)
print("\n15-to-1")
print(t15.to_table())
lines = sorted(tuple(sorted(map(int, p))) for p in t15.harmful_patterns[3])
print("first few harmful triples:", lines[:5])
