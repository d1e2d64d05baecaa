"""Input-normal form: transform a pair so that its Grammian is the identity.

Run: python3 demos/02_input_normal.py
"""
import numpy as np

from steincond.core import sample_generic, sample_stream
from steincond.normal_form import (
    bilinear_transform,
    in_complete,
    in_residual,
    to_input_normal,
    verify_power_identity,
)
from steincond.stein import solve_stein_sqrt_doubling

pair, _ = sample_generic(10, 1, sample_stream(3, 0))
tr = to_input_normal(pair)
print(f"ln kappa(T) = {tr.log_kappa_t:.2f}, IN residual = {in_residual(tr.pair):.1e}")

# the powers of an input-normal A keep a unit singular value while k d < n
dev = verify_power_identity(tr.pair)
print(f"max |sigma_1(A~^k) - 1| for k < n: {dev:.1e}")
print("sigma_1(A~^k):", np.round([np.linalg.norm(np.linalg.matrix_power(tr.a_tilde, k), 2)
                                   for k in range(1, 13)], 6))

# B is determined (up to a unitary) by A alone once the pair is input normal
b_hat = in_complete(tr.a_tilde)
print("in_complete reproduces B B^*:",
      np.allclose(b_hat @ b_hat.conj().T, tr.b_tilde @ tr.b_tilde.conj().T, atol=1e-8))

# Moebius maps of the disk leave the Grammian unchanged
p0 = solve_stein_sqrt_doubling(pair).p
for w in (0.3, -0.5j, 0.6 + 0.2j):
    p1 = solve_stein_sqrt_doubling(bilinear_transform(pair, w)).p
    print(f"w = {w}: rel change in P {np.linalg.norm(p1 - p0) / np.linalg.norm(p0):.1e}")
