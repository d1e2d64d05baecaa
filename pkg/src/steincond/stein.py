"""Solvers for the Stein equation ``P - A P A^* = B B^*``.

Two routes are provided: a dense Kronecker solve, kept as an oracle for small
``n``, and a square-root doubling iteration that carries a factor of ``P``
and never forms it. Condition numbers are always taken from the triangular
factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.linalg as sla

from .core import (
    ControllabilityError,
    ConvergenceError,
    InputPair,
    StabilityError,
    as_matrix,
    matrix_from_json,
    matrix_to_json,
)

__all__ = [
    "SteinSolution",
    "DIRECT_MAX_N",
    "solve_stein_direct",
    "doubling_iterates",
    "solve_stein_sqrt_doubling",
    "solve_stein",
    "stein_residual",
    "cond_from_factor",
    "triangular_factor",
]

DIRECT_MAX_N = 32


@dataclass(frozen=True, eq=False)
class SteinSolution:
    factor_l: np.ndarray
    log_kappa: float
    residual_rel: float
    iterations: int

    @property
    def p(self) -> np.ndarray:
        return self.factor_l @ self.factor_l.conj().T

    @property
    def n(self) -> int:
        return self.factor_l.shape[0]

    def to_json(self) -> dict:
        return {
            "l": matrix_to_json(self.factor_l),
            "log_kappa": self.log_kappa,
            "residual_rel": self.residual_rel,
            "iterations": self.iterations,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SteinSolution":
        return cls(
            matrix_from_json(obj["l"]),
            float(obj["log_kappa"]),
            float(obj["residual_rel"]),
            int(obj["iterations"]),
        )


def _require_stable(pair: InputPair) -> None:
    rho = pair.spectral_radius()
    if not rho < 1.0:
        raise StabilityError(f"spectral radius {rho:.6g} is not below 1")


def solve_stein_direct(pair: InputPair) -> np.ndarray:
    """Kronecker-product solve of ``(I - A kron conj(A)) vec(P) = vec(BB^*)``.

    ``vec`` is row-major. Costs O(n^6); limited to ``n <= 32``.
    """
    n = pair.n
    if n > DIRECT_MAX_N:
        raise ValueError(f"direct solve is limited to n <= {DIRECT_MAX_N}, got {n}")
    a = pair.a
    rhs = (pair.b @ pair.b.conj().T).ravel()
    system = np.eye(n * n, dtype=complex) - np.kron(a, a.conj())
    try:
        lu = sla.lu_factor(system, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise StabilityError(f"Stein operator is singular: {exc}") from None
    if np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise StabilityError("Stein operator is singular; A has reciprocal eigenvalue pairs")
    p = sla.lu_solve(lu, rhs, check_finite=False).reshape(n, n)
    return 0.5 * (p + p.conj().T)


def triangular_factor(f: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with real non-negative diagonal and ``LL^* = FF^*``.

    ``f`` must have at least as many columns as rows.
    """
    n, m = f.shape
    if m < n:
        raise ControllabilityError(f"factor has rank at most {m} < n = {n}")
    r = sla.qr(f.conj().T, mode="r", check_finite=False)[0][:n]
    diag = np.diag(r)
    phase = np.where(np.abs(diag) > 0, diag / np.where(diag == 0, 1, np.abs(diag)), 1.0)
    r = r * np.conj(phase)[:, None]
    return np.tril(r.conj().T)


def doubling_iterates(pair: InputPair, max_iter: int = 60) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield ``(F_k, A^(2^k), increment)`` for the square-root doubling recursion.

    ``F_{k+1} F_{k+1}^*`` equals the partial Grammian
    ``sum_{j < 2^(k+1)} A^j B B^* A^{*j}``. Once the factor has more than
    ``n`` columns it is compressed to ``n x n`` lower-triangular form by QR.
    """
    n = pair.n
    f = pair.b.copy()
    ak = pair.a.copy()
    for _ in range(max_iter):
        inc = ak @ f
        f = np.hstack([f, inc])
        if f.shape[1] > n:
            f = triangular_factor(f)
        yield f, ak, inc
        ak = ak @ ak


def solve_stein_sqrt_doubling(pair: InputPair, tol: float = 1e-16,
                              max_iter: int = 60) -> SteinSolution:
    """Square-root doubling solve returning the Cholesky factor of ``P``.

    Iterates ``A_{k+1} = A_k^2`` and ``L_{k+1} = qr-compress(L_k, A_k L_k)``
    until the Frobenius norm of the newest block ``A_k L_k`` is below
    ``tol`` times that of the accumulated factor.
    """
    _require_stable(pair)
    f = None
    for k, (f, _, inc) in enumerate(doubling_iterates(pair, max_iter), start=1):
        fnorm = np.linalg.norm(f)
        if not np.isfinite(fnorm):
            raise ConvergenceError("factor overflowed; spectral radius too close to 1")
        if np.linalg.norm(inc) <= tol * fnorm:
            break
    else:
        raise ConvergenceError(
            f"doubling did not converge in {max_iter} steps; spectral radius near 1"
        )
    l = triangular_factor(f)
    diag = np.diag(l).real
    if not np.all(diag > 0.0):
        raise ControllabilityError("Grammian factor is singular; pair is not controllable")
    p = l @ l.conj().T
    return SteinSolution(
        factor_l=l,
        log_kappa=cond_from_factor(l),
        residual_rel=stein_residual(pair, p),
        iterations=k,
    )


def solve_stein(pair: InputPair, method: str = "doubling") -> SteinSolution:
    """Dispatch to ``"doubling"`` or ``"direct"``; both return a factored solution."""
    if method == "doubling":
        return solve_stein_sqrt_doubling(pair)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    _require_stable(pair)
    p = solve_stein_direct(pair)
    try:
        l = np.linalg.cholesky(p)
    except np.linalg.LinAlgError:
        raise ControllabilityError("direct solution is not positive definite") from None
    return SteinSolution(l, cond_from_factor(l), stein_residual(pair, p), 0)


def stein_residual(pair: InputPair, p) -> float:
    """``||P - A P A^* - B B^*||_F / ||B B^*||_F``."""
    p = as_matrix(p, rows=pair.n, cols=pair.n)
    bb = pair.b @ pair.b.conj().T
    r = p - pair.a @ p @ pair.a.conj().T - bb
    return float(np.linalg.norm(r) / np.linalg.norm(bb))


def cond_from_factor(l) -> float:
    """Natural log of ``kappa(L L^*)`` for a lower-triangular ``L``.

    The smallest singular value is taken as ``1 / ||L^{-1}||_2`` with the
    inverse formed by triangular substitution. For the graded factors the
    doubling solver produces this stays accurate far beyond ``kappa(L) ~ 1/eps``,
    where a dense SVD of ``L`` saturates.
    """
    l = as_matrix(l)
    n = l.shape[0]
    if l.shape[1] != n:
        raise ValueError("factor must be square")
    if np.any(np.diag(l) == 0):
        return math.inf
    s1 = np.linalg.norm(l, 2)
    with np.errstate(over="ignore", invalid="ignore"):
        linv = sla.solve_triangular(l, np.eye(n, dtype=complex), lower=True, check_finite=False)
        if not np.all(np.isfinite(linv)):
            return math.inf
        sinv = np.linalg.norm(linv, 2)
    # kappa >= 1; rounding can push a perfectly conditioned factor just below
    return max(0.0, float(2.0 * (math.log(s1) + math.log(sinv))))
