"""Solving P - A P A^* = B B^* three ways and reading off kappa(P).

Run: python3 demos/01_stein_solvers.py
"""
import numpy as np

from steincond import InputPair, solve_stein, solve_stein_direct, stein_residual
from steincond.core import build_jordan, sample_generic, sample_stream
from steincond.stein import doubling_iterates

# a scalar sanity check: p = 1 / (1 - a^2)
scalar = InputPair([[0.5]], [[1.0]])
print("scalar P =", solve_stein_direct(scalar)[0, 0].real, "(expect 4/3)")

# a random stable pair, as in the Gaussian ensemble
pair, rejected = sample_generic(8, 1, sample_stream(seed=1, index=0))
print(f"\nn=8 draw after {rejected} unstable rejections, spectral radius {pair.spectral_radius():.3f}")

direct = solve_stein(pair, "direct")
doubling = solve_stein(pair, "doubling")
rel = np.linalg.norm(direct.p - doubling.p) / np.linalg.norm(direct.p)
print(f"direct vs doubling: rel diff {rel:.1e}")
print(f"ln kappa(P) = {doubling.log_kappa:.3f} after {doubling.iterations} doubling steps")
print(f"residual {stein_residual(pair, doubling.p):.1e}")

# how fast doubling converges: each step squares A, so the tail shrinks like rho^(2^k)
for k, (f, ak, inc) in enumerate(doubling_iterates(pair, max_iter=8), start=1):
    print(f"  step {k}: ||A_k F|| / ||F|| = {np.linalg.norm(inc) / np.linalg.norm(f):.2e}")

# Jordan blocks are where double precision gets stressed; kappa(L) exceeds 1/eps
b = sample_stream(0, 0).standard_normal((24, 1))
jordan = solve_stein(InputPair(build_jordan(0.8, 24), b))
print(f"\nJordan(0.8), n=24: ln kappa(P) = {jordan.log_kappa:.1f} "
      f"(kappa(L) ~ 1e{jordan.log_kappa / 2 / np.log(10):.0f})")
