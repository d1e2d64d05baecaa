"""Input-normal transformations and unit-disk preserving maps of input pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import ControllabilityError, InputPair, as_matrix, matrix_to_json
from .stein import SteinSolution, solve_stein_sqrt_doubling

__all__ = [
    "InTransform",
    "to_input_normal",
    "in_residual",
    "in_complete",
    "bilinear_transform",
    "cayley",
    "verify_power_identity",
]


@dataclass(frozen=True, eq=False)
class InTransform:
    """``T = L^{-1}`` together with the transformed pair ``(T A T^{-1}, T B)``."""

    t: np.ndarray
    a_tilde: np.ndarray
    b_tilde: np.ndarray
    log_kappa_t: float

    @property
    def pair(self) -> InputPair:
        return InputPair(self.a_tilde, self.b_tilde)

    def to_json(self) -> dict:
        return {
            "t": matrix_to_json(self.t),
            "a": matrix_to_json(self.a_tilde),
            "b": matrix_to_json(self.b_tilde),
            "log_kappa_t": self.log_kappa_t,
        }


def to_input_normal(pair: InputPair, solution: SteinSolution | None = None) -> InTransform:
    """Similarity to an input-normal pair via the Cholesky factor of the Grammian.

    ``solution`` may be passed to reuse an existing factor.
    """
    if solution is None:
        solution = solve_stein_sqrt_doubling(pair)
    l = solution.factor_l
    if not np.all(np.diag(l).real > 0):
        raise ControllabilityError("Cholesky factor is singular")
    n = pair.n
    a_tilde = sla.solve_triangular(l, pair.a @ l, lower=True, check_finite=False)
    b_tilde = sla.solve_triangular(l, pair.b, lower=True, check_finite=False)
    t = sla.solve_triangular(l, np.eye(n, dtype=complex), lower=True, check_finite=False)
    return InTransform(t, a_tilde, b_tilde, 0.5 * solution.log_kappa)


def in_residual(pair: InputPair) -> float:
    """Frobenius norm of ``A A^* + B B^* - I``."""
    a, b = pair.a, pair.b
    return float(np.linalg.norm(a @ a.conj().T + b @ b.conj().T - np.eye(pair.n)))


def in_complete(a, tol: float = 1e-6) -> np.ndarray:
    """Input matrix ``B`` with ``B B^* = I - A A^*`` for a matrix with ``sigma_1(A) = 1``.

    Columns are ``sqrt(1 - s_j) v_j`` over the eigenpairs of ``A A^*`` with
    ``s_j < 1 - tol``, in ascending order of ``s_j``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("A must be square")
    s1 = np.linalg.norm(a, 2)
    if abs(s1 - 1.0) > tol:
        raise ValueError(f"largest singular value is {s1:.12g}, not 1 within {tol}")
    gram = a @ a.conj().T
    w, v = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    keep = w < 1.0 - tol
    if not np.any(keep):
        raise ValueError("A is unitary; no input matrix completes it")
    # eigh returns ascending eigenvalues, which is the column order we want
    return v[:, keep] * np.sqrt(1.0 - w[keep])


def bilinear_transform(pair: InputPair, w: complex) -> InputPair:
    """Apply ``z -> (z - w) / (1 - conj(w) z)``; the Grammian is unchanged."""
    w = complex(w)
    if not abs(w) < 1.0:
        raise ValueError(f"need |w| < 1, got {abs(w)}")
    n = pair.n
    m = np.eye(n) - np.conj(w) * pair.a
    try:
        lu = sla.lu_factor(m, check_finite=False)
    except np.linalg.LinAlgError:
        raise ValueError("I - conj(w) A is singular") from None
    if np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise ValueError("I - conj(w) A is singular")
    a_hat = sla.lu_solve(lu, pair.a - w * np.eye(n))
    b_hat = math.sqrt(1.0 - abs(w) ** 2) * sla.lu_solve(lu, pair.b)
    return InputPair(a_hat, b_hat)


def cayley(pair: InputPair) -> InputPair:
    """Continuous-time pair ``((A+I)^{-1}(A-I), sqrt(2)(I+A)^{-1}B)``.

    The returned pair satisfies ``Ah P + P Ah^* = -Bh Bh^*`` with the same
    ``P`` as the discrete pair; it is stable in the left half-plane sense.
    """
    n = pair.n
    m = pair.a + np.eye(n)
    try:
        lu = sla.lu_factor(m, check_finite=False)
    except np.linalg.LinAlgError:
        raise ValueError("-1 is an eigenvalue of A") from None
    if np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise ValueError("-1 is an eigenvalue of A")
    a_hat = sla.lu_solve(lu, pair.a - np.eye(n))
    b_hat = math.sqrt(2.0) * sla.lu_solve(lu, pair.b)
    return InputPair(a_hat, b_hat)


def verify_power_identity(in_pair: InputPair, tol: float = 1e-8) -> float:
    """Largest ``|sigma_1(A^k) - 1|`` over ``k >= 1`` with ``k d < n``.

    ``in_pair`` must be input normal to within ``tol``; for such pairs every
    deviation is zero in exact arithmetic.
    """
    res = in_residual(in_pair)
    if res > tol:
        raise ValueError(f"pair is not input normal (residual {res:.3g})")
    n, d = in_pair.n, in_pair.d
    if np.linalg.matrix_rank(in_pair.b) < d:
        raise ValueError("input matrix is rank deficient")
    dev = 0.0
    ak = np.eye(n, dtype=complex)
    k = 1
    while k * d < n:
        ak = ak @ in_pair.a
        dev = max(dev, abs(np.linalg.norm(ak, 2) - 1.0))
        k += 1
    return dev
