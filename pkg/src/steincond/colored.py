"""State covariance under autocorrelated scalar forcing.

For ``z_{t+1} = A z_t + B x_t`` driven by a stationary scalar sequence with
autocovariance ``phi_k = E[x_t conj(x_{t-k})]``, the state covariance is
``W = lim M_t Phi_t M_t^*`` with ``M_t = (B, AB, ..., A^{t-1} B)`` and
``Phi_t`` the Toeplitz matrix of ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .core import ConvergenceError, InputPair, as_matrix
from .stein import cond_from_factor, solve_stein_sqrt_doubling

__all__ = [
    "NoiseModel",
    "white",
    "ar1",
    "ma1",
    "custom",
    "toeplitz_covariance",
    "state_covariance_colored",
    "colored_condition_bound",
    "sandwich_lemma_check",
]


@dataclass(frozen=True, eq=False)
class NoiseModel:
    kind: str
    param: float
    autocov: Callable[[np.ndarray], np.ndarray]
    s_min: float
    s_max: float

    def __post_init__(self):
        if not 0 < self.s_min <= self.s_max:
            raise ValueError("need 0 < s_min <= s_max")

    def phi(self, lags) -> np.ndarray:
        return np.asarray(self.autocov(np.asarray(lags)), dtype=complex)

    @property
    def log_ratio(self) -> float:
        return math.log(self.s_max / self.s_min)

    def to_json(self) -> dict:
        return {"kind": self.kind, "param": self.param, "s_min": self.s_min, "s_max": self.s_max}

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseModel":
        kind = obj.get("kind")
        if kind == "white":
            return white(obj.get("s_min", 1.0))
        if kind == "ar1":
            return ar1(float(obj["param"]))
        if kind == "ma1":
            return ma1(float(obj["param"]))
        raise ValueError(f"cannot rebuild noise model of kind {kind!r} from JSON")


def white(phi0: float = 1.0) -> NoiseModel:
    return NoiseModel(
        "white", 0.0,
        lambda k: np.where(k == 0, phi0, 0.0),
        s_min=phi0, s_max=phi0,
    )


def ar1(a: float) -> NoiseModel:
    """``x_t = a x_{t-1} + e_t`` with unit-variance innovations.

    ``phi_k = a^k / (1 - a^2)``; the spectral density ``1/|1 - a e^{iw}|^2``
    ranges over ``[1/(1+|a|)^2, 1/(1-|a|)^2]``.
    """
    if not abs(a) < 1:
        raise ValueError("AR(1) coefficient must satisfy |a| < 1")
    return NoiseModel(
        "ar1", float(a),
        lambda k: a ** np.abs(k) / (1.0 - a * a),
        s_min=1.0 / (1.0 + abs(a)) ** 2,
        s_max=1.0 / (1.0 - abs(a)) ** 2,
    )


def ma1(a: float) -> NoiseModel:
    """``x_t = e_t + a e_{t-1}``; density ``|1 + a e^{iw}|^2``."""
    if not abs(a) < 1:
        raise ValueError("MA(1) coefficient must satisfy |a| < 1")
    return NoiseModel(
        "ma1", float(a),
        lambda k: np.where(k == 0, 1.0 + a * a, np.where(np.abs(k) == 1, a, 0.0)),
        s_min=(1.0 - abs(a)) ** 2,
        s_max=(1.0 + abs(a)) ** 2,
    )


def custom(autocov: Callable[[np.ndarray], np.ndarray], s_min: float, s_max: float) -> NoiseModel:
    """Arbitrary autocovariance; the density extremes must be supplied."""
    return NoiseModel("custom", float("nan"), autocov, s_min=s_min, s_max=s_max)


def toeplitz_covariance(noise: NoiseModel, t: int) -> np.ndarray:
    """``Phi_t`` with ``(Phi_t)_{jk} = phi_{k-j}`` and ``phi_{-m} = conj(phi_m)``."""
    phi = noise.phi(np.arange(t))
    return sla.toeplitz(np.conj(phi), phi)


def _truncated_covariance(pair: InputPair, phi: np.ndarray, t: int) -> np.ndarray:
    blocks = np.empty((pair.n, t), dtype=complex)
    v = pair.b[:, 0]
    for j in range(t):
        blocks[:, j] = v
        v = pair.a @ v
    # Phi_t M^* through an FFT Toeplitz product; Phi_t is never formed
    pm = sla.matmul_toeplitz((np.conj(phi), phi), blocks.conj().T)
    w = blocks @ pm
    return 0.5 * (w + w.conj().T)


def state_covariance_colored(pair: InputPair, noise: NoiseModel, tol: float = 1e-12,
                             start: int = 64, max_horizon: int = 2**18) -> np.ndarray:
    """State covariance ``W`` for single-input forcing.

    The horizon doubles from ``start`` until the Frobenius change in ``W``
    drops below ``tol * ||W||_F``.
    """
    if pair.d != 1:
        raise ValueError("colored forcing is implemented for d = 1 only")
    t = start
    prev = _truncated_covariance(pair, noise.phi(np.arange(t)), t)
    while t < max_horizon:
        t *= 2
        cur = _truncated_covariance(pair, noise.phi(np.arange(t)), t)
        if np.linalg.norm(cur - prev) <= tol * np.linalg.norm(cur):
            return cur
        prev = cur
    raise ConvergenceError(f"state covariance did not settle within horizon {max_horizon}")


def colored_condition_bound(pair: InputPair, noise: NoiseModel,
                            tol: float = 1e-12) -> tuple[float, float]:
    """``(ln kappa(W), ln kappa(P) + ln(S_max / S_min))``; the first never exceeds the second.

    ``W`` is formed in input-normal coordinates, where ``W~ = T W T^*`` has
    condition at most ``S_max / S_min``, and ``ln kappa(W)`` is read off the
    triangular factor ``L chol(W~)``. This keeps the comparison meaningful
    when ``kappa(P)`` is far beyond what a dense factorization of ``W`` resolves.
    """
    sol = solve_stein_sqrt_doubling(pair)
    l = sol.factor_l
    a_in = sla.solve_triangular(l, pair.a @ l, lower=True, check_finite=False)
    b_in = sla.solve_triangular(l, pair.b, lower=True, check_finite=False)
    w_in = state_covariance_colored(InputPair(a_in, b_in), noise, tol)
    try:
        c = np.linalg.cholesky(w_in)
    except np.linalg.LinAlgError:
        raise ConvergenceError("state covariance is not numerically positive definite") from None
    lhs = cond_from_factor(l @ c)
    return lhs, sol.log_kappa + noise.log_ratio


def sandwich_lemma_check(phi, m) -> tuple[float, float]:
    """``(kappa(M Phi M^*), kappa(Phi) kappa(M)^2)`` for Hermitian PD ``Phi`` and full-row-rank ``M``."""
    phi = as_matrix(phi)
    m = as_matrix(m, cols=phi.shape[0])
    r = m.shape[0]
    if r > phi.shape[0]:
        raise ValueError("M must have at most as many rows as columns")
    ev = np.linalg.eigvalsh(0.5 * (phi + phi.conj().T))
    if ev[0] <= 0:
        raise ValueError("Phi must be positive definite")
    sm = np.linalg.svd(m, compute_uv=False)
    if sm[r - 1] <= sm[0] * r * np.finfo(float).eps:
        raise ValueError("M is rank deficient")
    g = m @ phi @ m.conj().T
    eg = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
    lhs = float(eg[-1] / eg[0])
    rhs = float(ev[-1] / ev[0] * (sm[0] / sm[r - 1]) ** 2)
    return lhs, rhs
