"""Analytic lower bounds on kappa(P) next to the solved value.

Run: python3 demos/03_lower_bounds.py
"""
import numpy as np

from steincond import InputPair, bound_report
from steincond.core import build_jordan, sample_companion, sample_normal_diag, sample_stream

cases = {
    "diagonal (normal) A": sample_normal_diag(12, sample_stream(0, 5))[0],
    "companion A": sample_companion(12, "random", sample_stream(0, 5))[0],
    "Jordan block, lambda=0.8": InputPair(build_jordan(0.8, 12), np.ones((12, 1))),
}

for name, pair in cases.items():
    report = bound_report(None, pair=pair, solve=True)
    print(f"\n{name}: ln kappa(P) = {report.log_kappa:.2f}")
    for key in sorted(report.applicable, key=lambda k: -report.entries[k]):
        print(f"  {key:<20s} {report.entries[key]:9.3f}")
    best, value = report.best()
    print(f"  tightest: {best}, gap {report.log_kappa - value:.2f}; violations: {report.violations()}")
