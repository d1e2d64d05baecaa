"""State covariance under AR(1) and MA(1) forcing.

kappa(W) never exceeds kappa(P) S_max / S_min, where S is the spectral density
of the forcing. For input-normal pairs kappa(P) = 1, so the density ratio alone
bounds the conditioning.

Run: python3 demos/05_colored_noise.py
"""
import math

import numpy as np

from steincond.colored import ar1, colored_condition_bound, ma1, state_covariance_colored
from steincond.core import sample_generic, sample_stream
from steincond.normal_form import to_input_normal

pair, _ = sample_generic(8, 1, sample_stream(2, 0))
for noise in (ar1(0.5), ar1(-0.8), ma1(0.7)):
    lhs, rhs = colored_condition_bound(pair, noise)
    print(f"{noise.kind}({noise.param:+.1f}): ln kappa(W) = {lhs:.3f} <= {rhs:.3f}"
          f"  (ln S_max/S_min = {noise.log_ratio:.3f})")

tr = to_input_normal(pair)
for a in (0.2, 0.5, 0.9):
    noise = ar1(a)
    ev = np.linalg.eigvalsh(state_covariance_colored(tr.pair, noise))
    print(f"IN pair, AR(1) a={a}: kappa(W) = {ev[-1] / ev[0]:.2f} <= {math.exp(noise.log_ratio):.2f}")
