"""Input pairs, spectra, canonical forms and the random ensembles.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Real ensembles
are stored as complex too, so diagonal pairs with complex eigenvalues need no
special casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = [
    "SteinError",
    "StabilityError",
    "ControllabilityError",
    "ConvergenceError",
    "RejectionLimitError",
    "as_matrix",
    "matrix_to_json",
    "matrix_from_json",
    "InputPair",
    "Spectrum",
    "CompanionSpec",
    "EnsembleSpec",
    "SampleRecord",
    "ENSEMBLE_KINDS",
    "sample_stream",
    "stable_eigenvalues",
    "sample_generic",
    "sample_normal_diag",
    "build_companion",
    "charpoly_from_spectrum",
    "sample_companion",
    "build_jordan",
    "sample_jordan",
    "controllability_check",
    "draw_pair",
]

MAX_REJECTIONS = 10_000


class SteinError(ArithmeticError):
    """Base class for numerical failures; ``code`` is a machine-readable tag."""

    code = "numerical"


class StabilityError(SteinError):
    code = "unstable"


class ControllabilityError(SteinError):
    code = "uncontrollable"


class ConvergenceError(SteinError):
    code = "no-convergence"


class RejectionLimitError(SteinError):
    code = "rejection-limit"


# ---------------------------------------------------------------------------
# matrices and the JSON interchange format


def as_matrix(x, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 2-D complex array, checking the shape if given."""
    m = np.asarray(x, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty matrix, got shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise ValueError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ValueError(f"expected {cols} columns, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from None
    if rows < 1 or cols < 1 or len(entries) != rows * cols:
        raise ValueError(
            f"matrix declares {rows}x{cols} but carries {len(entries)} entries"
        )
    flat = np.array([complex(float(re), float(im)) for re, im in entries])
    return as_matrix(flat.reshape(rows, cols))


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True, eq=False)
class InputPair:
    """State advance matrix ``a`` (n x n) with input matrix ``b`` (n x d)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"advance matrix must be square, got {a.shape}")
        b = as_matrix(self.b, rows=a.shape[0])
        if b.shape[1] > a.shape[0]:
            raise ValueError("input dimension d must not exceed n")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.b.shape[1]

    def spectrum(self) -> "Spectrum":
        return Spectrum.of(self.a)

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.a))))

    def is_stable(self) -> bool:
        return self.spectral_radius() < 1.0

    def to_json(self) -> dict:
        return {"a": matrix_to_json(self.a), "b": matrix_to_json(self.b)}

    @classmethod
    def from_json(cls, obj: dict) -> "InputPair":
        try:
            return cls(matrix_from_json(obj["a"]), matrix_from_json(obj["b"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed input pair object: {exc}") from None


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted by non-increasing modulus."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex).ravel()
        if ev.size == 0:
            raise ValueError("empty spectrum")
        if not np.all(np.isfinite(ev)):
            raise ValueError("spectrum has non-finite values")
        # stable sort keeps conjugate pairs adjacent
        order = np.argsort(-np.abs(ev), kind="stable")
        object.__setattr__(self, "eigenvalues", ev[order])

    @classmethod
    def of(cls, a) -> "Spectrum":
        return cls(np.linalg.eigvals(as_matrix(a)))

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    def is_stable(self) -> bool:
        return bool(self.moduli[0] < 1.0)

    def to_json(self) -> dict:
        return {"eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues]}

    @classmethod
    def from_json(cls, obj: dict) -> "Spectrum":
        try:
            return cls(np.array([complex(float(r), float(i)) for r, i in obj["eigenvalues"]]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed spectrum object: {exc}") from None


@dataclass(frozen=True, eq=False)
class CompanionSpec:
    """Coefficients of a Frobenius-form matrix.

    The first row is ``(-conj(c), -conj(c0))`` and the block below it is
    ``I - gamma * e_p e_p^*`` followed by a zero column. ``p`` is 1-based and
    only used when ``gamma == 1``.
    """

    c0: complex
    c: np.ndarray
    gamma: int = 0
    p: int | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex).ravel()
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "c0", complex(self.c0))
        if self.gamma not in (0, 1):
            raise ValueError("gamma must be 0 or 1")
        if self.gamma == 1:
            if self.p is None or not 1 < self.p <= self.n - 1:
                raise ValueError(f"need 1 < p <= n-1 = {self.n - 1}, got p={self.p}")

    @property
    def n(self) -> int:
        return self.c.size + 1


ENSEMBLE_KINDS = (
    "generic",
    "normal-diag",
    "companion-random-b",
    "companion-ar",
    "ar-observability",
    "jordan",
)


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    d: int = 1
    count: int = 2500
    seed: int = 0
    jordan_lambda: float | None = None

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.n < 1 or not 1 <= self.d <= self.n:
            raise ValueError(f"need n >= 1 and 1 <= d <= n, got n={self.n}, d={self.d}")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.kind != "generic" and self.d != 1:
            raise ValueError(f"{self.kind} ensembles are single-input (d=1)")
        if self.kind.startswith("companion") or self.kind == "ar-observability":
            if self.n <= 2:
                raise ValueError("companion ensembles need n > 2")
        if self.kind == "jordan":
            lam = self.jordan_lambda
            if lam is None or not 0.0 < lam < 1.0:
                raise ValueError("jordan ensembles need jordan_lambda in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass
class SampleRecord:
    index: int
    log_kappa: float
    bound_log: float | None = None
    rejections: int = 0
    aux: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "log_kappa": self.log_kappa,
            "bound_log": self.bound_log,
            "rejections": self.rejections,
            "aux": dict(self.aux),
            "error": self.error,
        }


# ---------------------------------------------------------------------------
# sampling


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for sample ``index`` of a run."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def stable_eigenvalues(n: int, rng: np.random.Generator,
                       max_rejections: int = MAX_REJECTIONS) -> tuple[np.ndarray, np.ndarray, int]:
    """Draw ``sqrt(n+2) * A ~ N(0, 1)`` until ``A`` is stable.

    Returns the accepted matrix, its eigenvalues and the number of rejected draws.
    """
    scale = 1.0 / math.sqrt(n + 2)
    for rejections in range(max_rejections + 1):
        a = rng.standard_normal((n, n)) * scale
        ev = np.linalg.eigvals(a)
        if np.max(np.abs(ev)) < 1.0:
            return a, ev, rejections
    raise RejectionLimitError(f"no stable {n}x{n} draw in {max_rejections} attempts")


def sample_generic(n: int, d: int, rng: np.random.Generator,
                   max_rejections: int = MAX_REJECTIONS) -> tuple[InputPair, int]:
    """Gaussian input pair conditioned on stability; returns ``(pair, rejections)``."""
    if n < 1 or not 1 <= d <= n:
        raise ValueError(f"need n >= 1 and 1 <= d <= n, got n={n}, d={d}")
    a, _, rejections = stable_eigenvalues(n, rng, max_rejections)
    b = rng.standard_normal((n, d))
    return InputPair(a, b), rejections


def _distinct(ev: np.ndarray) -> bool:
    gaps = np.abs(ev[:, None] - ev[None, :]) + np.eye(ev.size)
    return bool(np.min(gaps) > 16 * np.finfo(float).eps)


def sample_normal_diag(n: int, rng: np.random.Generator,
                       max_rejections: int = MAX_REJECTIONS) -> tuple[InputPair, int]:
    """Diagonal pair whose eigenvalues come from a stable Gaussian draw."""
    if n < 1:
        raise ValueError("n must be positive")
    total = 0
    while True:
        _, ev, rejections = stable_eigenvalues(n, rng, max_rejections - total)
        total += rejections
        b = rng.standard_normal((n, 1))
        # single input: controllable iff eigenvalues distinct and no zero entry of b
        if _distinct(ev) and np.min(np.abs(b)) > np.finfo(float).tiny:
            return InputPair(np.diag(ev), b), total
        total += 1
        if total > max_rejections:
            raise RejectionLimitError("controllability rejections exhausted")


def build_companion(spec: CompanionSpec) -> np.ndarray:
    n = spec.n
    a = np.zeros((n, n), dtype=complex)
    a[0, : n - 1] = -np.conj(spec.c)
    a[0, n - 1] = -np.conj(spec.c0)
    if n > 1:
        block = np.eye(n - 1, dtype=complex)
        if spec.gamma == 1:
            block[spec.p - 1, spec.p - 1] = 0.0
        a[1:, : n - 1] = block
    return a


def charpoly_from_spectrum(spec: Spectrum | np.ndarray) -> CompanionSpec:
    """Companion coefficients (gamma = 0) whose matrix has the given eigenvalues.

    ``prod(z - lam_i) = z^n + a_1 z^(n-1) + ... + a_n``; the first row of the
    companion matrix is ``-a``, so ``c_i = conj(a_i)`` and ``c0 = conj(a_n)``.
    """
    ev = spec.eigenvalues if isinstance(spec, Spectrum) else np.asarray(spec, dtype=complex)
    coeffs = np.poly(ev)
    a = np.asarray(coeffs[1:], dtype=complex)
    return CompanionSpec(c0=np.conj(a[-1]), c=np.conj(a[:-1]))


def _conjugate_closed(ev: np.ndarray, tol: float = 1e-10) -> bool:
    scale = max(1.0, float(np.max(np.abs(ev))))
    a = np.sort_complex(ev)
    b = np.sort_complex(np.conj(ev))
    return bool(np.max(np.abs(a - b)) <= tol * scale)


def sample_companion(n: int, b_mode: str, rng: np.random.Generator,
                     max_rejections: int = MAX_REJECTIONS) -> tuple[InputPair, int]:
    """Companion-form pair with Gaussian-induced poles.

    ``b_mode`` is ``"random"`` (Gaussian ``b``), ``"e1"`` (autoregressive
    model) or ``"ar-observability"``, which returns ``(A_c^*, A_c[0, :]^T)``.
    """
    if n <= 2:
        raise ValueError("companion pairs need n > 2")
    if b_mode not in ("random", "e1", "ar-observability"):
        raise ValueError(f"unknown b_mode {b_mode!r}")
    _, ev, rejections = stable_eigenvalues(n, rng, max_rejections)
    spec = charpoly_from_spectrum(ev)
    if _conjugate_closed(ev):
        spec = CompanionSpec(spec.c0.real, spec.c.real)
    ac = build_companion(spec)
    if b_mode == "random":
        return InputPair(ac, rng.standard_normal((n, 1))), rejections
    if b_mode == "e1":
        return InputPair(ac, np.eye(n, 1)), rejections
    return InputPair(ac.conj().T, ac[0, :].reshape(n, 1).copy()), rejections


def build_jordan(lambda0: complex, n: int) -> np.ndarray:
    """Single Jordan block ``lambda0 * I + Z`` with ``Z`` the lower shift."""
    if not 0.0 < abs(lambda0) < 1.0:
        raise ValueError(f"need 0 < |lambda0| < 1, got {lambda0}")
    if n < 1:
        raise ValueError("n must be positive")
    return lambda0 * np.eye(n, dtype=complex) + np.eye(n, k=-1, dtype=complex)


def sample_jordan(lambda0: complex, n: int, rng: np.random.Generator) -> tuple[InputPair, int]:
    return InputPair(build_jordan(lambda0, n), rng.standard_normal((n, 1))), 0


def controllability_check(pair: InputPair, tol: float = 1e-12) -> bool:
    """Rank test on the block ``(B, AB, ..., A^(n-1) B)``.

    True iff its smallest singular value exceeds ``tol`` times its largest.
    This is a raw Krylov test: it is meant for handcrafted inputs and is
    far too strict for strongly non-normal pairs.
    """
    blocks = [pair.b]
    for _ in range(pair.n - 1):
        blocks.append(pair.a @ blocks[-1])
    s = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    if s[0] == 0.0:
        return False
    return bool(s[pair.n - 1] > tol * s[0])


def draw_pair(spec: EnsembleSpec, index: int) -> tuple[InputPair, int]:
    """Sample ``index`` of the ensemble ``spec``; pure in ``(spec, index)``."""
    rng = sample_stream(spec.seed, index)
    if spec.kind == "generic":
        return sample_generic(spec.n, spec.d, rng)
    if spec.kind == "normal-diag":
        return sample_normal_diag(spec.n, rng)
    if spec.kind == "companion-random-b":
        return sample_companion(spec.n, "random", rng)
    if spec.kind == "companion-ar":
        return sample_companion(spec.n, "e1", rng)
    if spec.kind == "ar-observability":
        return sample_companion(spec.n, "ar-observability", rng)
    return sample_jordan(spec.jordan_lambda, spec.n, rng)
