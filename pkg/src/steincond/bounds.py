"""Analytic lower bounds on the Grammian condition number, and low-rank ADI.

Every bound is returned as a natural logarithm. Unless stated otherwise the
value bounds ``ln kappa(P)``; ``trans_bound`` and ``kreiss_lower`` bound
``ln kappa(T)`` for the input-normalizing transform, which is half of that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .core import CompanionSpec, InputPair, Spectrum, as_matrix, build_companion
from .normal_form import cayley
from .stein import solve_stein_sqrt_doubling

__all__ = [
    "BOUND_NAMES",
    "LOG_FLOOR",
    "BoundReport",
    "CompanionSpectralData",
    "AdiState",
    "trans_bound",
    "normal_bound",
    "power_bound",
    "companion_singular_values",
    "companion_bound",
    "companion_positive_bound",
    "jordan_bound",
    "jordan_z0",
    "kreiss_grid",
    "kreiss_lower",
    "bilinear_map",
    "frac_normal_bound",
    "optimize_frac_bound",
    "disk_image_radius",
    "disk_bound",
    "adi_iterate",
    "penzl_shifts",
    "penzl_bound",
    "adi_decay_check",
    "is_normal",
    "companion_spec_of",
    "jordan_eigenvalue_of",
    "bound_report",
]

BOUND_NAMES = (
    "trans",
    "normal",
    "normal-d1",
    "power",
    "companion-mu",
    "companion-positive",
    "jordan",
    "jordan-weak",
    "kreiss",
    "frac-normal",
    "disk",
    "penzl",
)

# log of the smallest normal double; stands in for ln 0
LOG_FLOOR = math.log(np.finfo(float).tiny)


@dataclass
class BoundReport:
    entries: dict[str, float] = field(default_factory=dict)
    applicable: set[str] = field(default_factory=set)
    log_kappa: float | None = None

    def add(self, name: str, value: float) -> None:
        if name not in BOUND_NAMES:
            raise KeyError(name)
        self.entries[name] = float(value)
        self.applicable.add(name)

    def best(self) -> tuple[str, float]:
        name = max(self.applicable, key=lambda k: self.entries[k])
        return name, self.entries[name]

    def violations(self, slack: float = 1e-6) -> list[str]:
        """Names of applicable bounds exceeding the attached ``log_kappa``."""
        if self.log_kappa is None:
            return []
        return [
            k for k in sorted(self.applicable)
            if self.log_kappa < self.entries[k] - slack * max(1.0, abs(self.entries[k]))
        ]

    def to_json(self) -> dict:
        out: dict = {k: self.entries[k] for k in BOUND_NAMES if k in self.entries}
        out["applicable"] = [k for k in BOUND_NAMES if k in self.applicable]
        if self.log_kappa is not None:
            out["log_kappa"] = self.log_kappa
            name, value = self.best()
            out["gap"] = self.log_kappa - value
        return out


# ---------------------------------------------------------------------------
# transformation and normal-matrix bounds


def _log_prod_moduli(values: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(np.abs(values))))


def trans_bound(a, d: int, sigma_n_in: float | None = None) -> float:
    """ln of the lower bound on ``kappa(T)`` for a map to an input-normal pair.

    ``max{s1, 1/s1, s_n / prod|lam|^(1/d), [s_n(A') / s_n]}``; the last term
    is used only when the smallest singular value of the realized
    input-normal matrix is supplied.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] == 0.0:
        raise ValueError("A is singular")
    ls1, lsn = math.log(s[0]), math.log(s[-1])
    ldet = _log_prod_moduli(np.linalg.eigvals(a))
    terms = [ls1, -ls1, lsn - ldet / d]
    if sigma_n_in is not None:
        terms.append(math.log(sigma_n_in) - lsn)
    return max(terms)


def normal_bound(spec: Spectrum, d: int = 1, sigma_n_in: float | None = None) -> float:
    """ln lower bound on ``kappa(P)`` when ``A`` is normal.

    For ``d = 1`` this is ``-2 sum_{i<n} ln|lam_i|`` (the smallest-modulus
    eigenvalue is left out). For ``d > 1`` it is the largest of
    ``|lam_n|^2 / prod|lam|^(2/d)``, ``1/|lam_1|^2`` and, when supplied,
    ``s_n(A')^2 / |lam_n|^2``.
    """
    if not isinstance(spec, Spectrum):
        spec = Spectrum(spec)
    mod = spec.moduli
    n = mod.size
    with np.errstate(divide="ignore"):
        logs = np.log(mod)
    if d == 1:
        return float(-2.0 * np.sum(logs[:-1]))
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    if mod[-1] == 0.0:
        raise ValueError("general-d form needs a nonsingular spectrum")
    terms = [2.0 * logs[-1] - 2.0 * np.sum(logs) / d, -2.0 * logs[0]]
    if sigma_n_in is not None:
        terms.append(2.0 * (math.log(sigma_n_in) - logs[-1]))
    return float(max(terms))


def power_bound(sigma1: float, n: int, d: int = 1) -> float:
    """``-2 k ln sigma_1`` with ``k`` the largest integer such that ``k d < n``.

    Non-positive (vacuous) when ``sigma_1 >= 1``.
    """
    if sigma1 <= 0.0:
        raise ValueError("sigma_1 must be positive")
    k = (n - 1) // d
    return -2.0 * k * math.log(sigma1)


# ---------------------------------------------------------------------------
# companion matrices


@dataclass(frozen=True)
class CompanionSpectralData:
    gamma_big: float
    omega: float
    mu_plus: float
    mu_minus: float
    pi_c_norm2: float
    singular_values: np.ndarray

    @property
    def bracket(self) -> tuple[float, float, float, float]:
        """Continued-fraction chain ``(1+|Pi c|^2, lower, upper, Gamma)`` around ``mu_plus``."""
        g, w = self.gamma_big, self.omega
        lower = g - w / (g - w)
        upper = g - w / (g - w / g) if g > 0 else g
        return 1.0 + self.pi_c_norm2, lower, upper, g


def companion_singular_values(spec: CompanionSpec) -> CompanionSpectralData:
    """Closed-form singular values of a Frobenius-form matrix.

    ``mu_+`` and ``mu_-`` solve ``mu^2 - Gamma mu + omega = 0`` and their
    square roots are singular values; the rest are ones (``n - 2 - gamma``
    of them) and a zero when ``gamma = 1``.
    """
    n = spec.n
    if n <= 2:
        raise ValueError("closed form needs n > 2")
    c_norm2 = float(np.sum(np.abs(spec.c) ** 2))
    c0_2 = abs(spec.c0) ** 2
    cp_2 = abs(spec.c[spec.p - 1]) ** 2 if spec.gamma == 1 else 0.0
    gamma_big = 1.0 + c0_2 + c_norm2
    omega = c0_2 + spec.gamma * cp_2
    disc = max(gamma_big * gamma_big - 4.0 * omega, 0.0)
    mu_plus = 0.5 * (gamma_big + math.sqrt(disc))
    mu_minus = omega / mu_plus
    sv = [math.sqrt(mu_plus), math.sqrt(mu_minus)] + [1.0] * (n - 2 - spec.gamma)
    if spec.gamma == 1:
        sv.append(0.0)
    return CompanionSpectralData(
        gamma_big=gamma_big,
        omega=omega,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        pi_c_norm2=c_norm2 - spec.gamma * cp_2,
        singular_values=np.sort(np.array(sv))[::-1],
    )


def companion_bound(spec: CompanionSpec, sigma_n_in: float | None = None) -> float:
    """``ln mu_+``, or ``ln max{mu_+, s_n(A')^2 / mu_-}`` when ``s_n(A')`` is given."""
    data = companion_singular_values(spec)
    value = math.log(data.mu_plus)
    if sigma_n_in is not None and data.mu_minus > 0:
        value = max(value, 2.0 * math.log(sigma_n_in) - math.log(data.mu_minus))
    return value


def companion_positive_bound(spec: Spectrum) -> float:
    """``ln(prod(1 + lam)^2 / (n + 1) - prod(lam)^2)`` for real eigenvalues in (0, 1)."""
    if not isinstance(spec, Spectrum):
        spec = Spectrum(spec)
    ev = spec.eigenvalues
    if np.any(np.abs(ev.imag) > 1e-12 * np.maximum(1.0, np.abs(ev))) or np.any(ev.real <= 0):
        raise ValueError("eigenvalues must be real and positive")
    lam = ev.real
    n = lam.size
    log_a = 2.0 * float(np.sum(np.log1p(lam))) - math.log(n + 1)
    log_b = 2.0 * float(np.sum(np.log(lam)))
    # ln(e^a - e^b) with a > b
    return log_a + math.log1p(-math.exp(log_b - log_a))


# ---------------------------------------------------------------------------
# Jordan blocks and the resolvent bound


def jordan_bound(lambda0: complex, n: int) -> tuple[float, float]:
    """``(strong, weak)`` log-bounds on ``kappa(P)`` for a single Jordan block, d = 1."""
    r = abs(lambda0)
    if not 0.0 < r < 1.0:
        raise ValueError(f"need 0 < |lambda0| < 1, got {r}")
    if n < 1:
        raise ValueError("n must be positive")
    strong = 2.0 * (-math.log(n) + (n - 1) * (math.log1p(-1.0 / n) - math.log1p(-r)))
    weak = 2.0 * (-1.0 - math.log(n) - (n - 1) * math.log1p(-r))
    return strong, weak


def jordan_z0(lambda0: complex, n: int) -> complex:
    """Maximizing resolvent point: ``|z0| = (n - |lambda0|)/(n - 1)``, phase of ``lambda0``."""
    r = abs(lambda0)
    phase = lambda0 / r if r > 0 else 1.0
    return (n - r) / (n - 1) * phase


def kreiss_grid(a, phases: int = 64, radii: int = 16) -> np.ndarray:
    """Default resolvent grid: ``phases`` angles times log-spaced radii in (1, 2]."""
    a = as_matrix(a)
    r = np.logspace(-6, 0, radii, base=2.0) + 1.0
    r = np.minimum(r, 2.0)
    theta = 2.0 * np.pi * np.arange(phases) / phases
    grid = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    lam = jordan_eigenvalue_of(a)
    if lam is not None and a.shape[0] > 1 and lam != 0:
        grid = np.append(grid, jordan_z0(lam, a.shape[0]))
    return grid


def kreiss_lower(a, grid=None) -> float:
    """ln of ``max_z (|z| - 1) / sigma_n(z I - A)`` over ``|z| > 1``.

    This bounds ``sup_k ||A^k||_2`` from below and hence ``ln kappa(T)``.
    Returns ``inf`` if a grid point hits the spectrum.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if grid is None:
        grid = kreiss_grid(a)
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    if grid.size == 0:
        raise ValueError("empty grid")
    if np.any(np.abs(grid) <= 1.0):
        raise ValueError("grid points must satisfy |z| > 1")
    best = -math.inf
    eye = np.eye(n)
    for z in grid:
        smin = np.linalg.svd(z * eye - a, compute_uv=False)[-1]
        if smin == 0.0:
            return math.inf
        best = max(best, math.log(abs(z) - 1.0) - math.log(smin))
    return best


# ---------------------------------------------------------------------------
# bilinear maps


def bilinear_map(z, w: complex):
    """``(z - w) / (1 - conj(w) z)``."""
    return (z - w) / (1.0 - np.conj(w) * z)


def frac_normal_bound(spec: Spectrum, w: complex = 0.0, d: int = 1) -> float:
    """ln of ``min_k |f(lam_k, w)|^2 / prod_i |f(lam_i, w)|^(2/d)`` for normal ``A``."""
    if not isinstance(spec, Spectrum):
        spec = Spectrum(spec)
    if not abs(w) < 1.0:
        raise ValueError("need |w| < 1")
    f = np.abs(bilinear_map(spec.eigenvalues, w))
    if np.any(f == 0.0):
        raise ValueError("w coincides with an eigenvalue")
    logs = np.log(f)
    return float(2.0 * np.min(logs) - 2.0 * np.sum(logs) / d)


def optimize_frac_bound(spec: Spectrum, d: int = 1, grid: int = 33) -> tuple[float, complex]:
    """Maximize ``frac_normal_bound`` over ``w``: coarse grid on the disk, then Nelder-Mead."""
    if not isinstance(spec, Spectrum):
        spec = Spectrum(spec)

    def value(w: complex) -> float:
        if not abs(w) < 1.0:
            return -math.inf
        try:
            return frac_normal_bound(spec, w, d)
        except ValueError:
            return -math.inf

    xs = np.linspace(-0.98, 0.98, grid)
    best_w, best = 0.0 + 0.0j, value(0.0)
    for x in xs:
        for y in xs:
            w = complex(x, y)
            v = value(w)
            if v > best:
                best, best_w = v, w
    res = minimize(
        lambda p: -value(complex(p[0], p[1])),
        x0=[best_w.real, best_w.imag],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400},
    )
    if np.isfinite(res.fun) and -res.fun > best:
        best, best_w = float(-res.fun), complex(res.x[0], res.x[1])
    return best, best_w


def disk_image_radius(x: complex, rho: float) -> float:
    """Largest ``|f(z, x)|`` over ``|z - x| <= rho``: ``rho / (1 - |x|^2 - |x| rho)``."""
    ax = abs(x)
    if not ax + rho < 1.0 or rho <= 0:
        raise ValueError("need 0 < rho and |x| + rho < 1")
    return rho / (1.0 - ax * ax - ax * rho)


def disk_bound(x: complex, rho: float, k: int) -> float:
    """``-2 k ln r`` with ``r`` the image radius of the disk ``|z - x| < rho``.

    Valid for normal ``A`` with all eigenvalues in the disk and ``k d < n``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    return -2.0 * k * math.log(disk_image_radius(x, rho))


# ---------------------------------------------------------------------------
# low-rank ADI


@dataclass(frozen=True, eq=False)
class AdiState:
    shifts: tuple[complex, ...]
    factor: np.ndarray

    @property
    def k(self) -> int:
        return len(self.shifts)

    @property
    def p(self) -> np.ndarray:
        return self.factor @ self.factor.conj().T


def adi_iterate(pair: InputPair, shifts, state: AdiState | None = None) -> AdiState:
    """Factored ADI sweep for ``Ah P + P Ah^* = -Bh Bh^*``.

    ``pair`` is a continuous-time pair (for instance from :func:`cayley`);
    shifts need negative real part. Each step maps the factor ``Z`` to
    ``[f(Ah, tau) Z, sqrt(-2 Re tau) (Ah + conj(tau) I)^{-1} Bh]``, so after
    ``k`` steps ``Z`` has ``k d`` columns.
    """
    a, b = pair.a, pair.b
    n, d = pair.n, pair.d
    eye = np.eye(n)
    if state is None:
        state = AdiState((), np.zeros((n, 0), dtype=complex))
    z = state.factor
    taus = list(state.shifts)
    for tau in shifts:
        tau = complex(tau)
        if not tau.real < 0:
            raise ValueError(f"shift {tau} must have negative real part")
        m = a + np.conj(tau) * eye
        try:
            lu = sla.lu_factor(m, check_finite=False)
        except np.linalg.LinAlgError:
            raise ValueError(f"shift {tau} makes the resolvent singular") from None
        if np.min(np.abs(np.diag(lu[0]))) == 0.0:
            raise ValueError(f"shift {tau} makes the resolvent singular")
        new = math.sqrt(-2.0 * tau.real) * sla.lu_solve(lu, b)
        if z.shape[1]:
            z = sla.lu_solve(lu, (a - tau * eye) @ z)
        z = np.hstack([z, new]) if z.shape[1] else new.astype(complex)
        taus.append(tau)
    return AdiState(tuple(taus), z)


def penzl_shifts(a_hat, k: int) -> np.ndarray:
    """Geometric shifts on the spectral interval of a symmetric stable ``Ah``."""
    a_hat = as_matrix(a_hat)
    ev = np.linalg.eigvalsh(0.5 * (a_hat + a_hat.conj().T))
    if np.max(ev) >= 0:
        raise ValueError("Ah must be negative definite")
    lo, hi = float(np.min(-ev)), float(np.max(-ev))
    kappa_hat = hi / lo
    j = np.arange(k)
    return -lo * kappa_hat ** ((2 * j + 1) / (2.0 * k))


def penzl_bound(kappa_hat: float, k: int) -> float:
    """ln upper bound on ``lambda_{kd+1}(P) / lambda_1(P)`` for symmetric stable ``Ah``.

    Returns ``LOG_FLOOR`` when ``kappa_hat == 1`` (the ratio bound is zero).
    """
    if kappa_hat < 1.0:
        raise ValueError("kappa_hat must be at least 1")
    if k < 1:
        raise ValueError("k must be at least 1")
    total = 0.0
    for j in range(k):
        q = kappa_hat ** ((2 * j + 1) / (2.0 * k))
        if q == 1.0:
            return LOG_FLOOR
        total += math.log((q - 1.0) / (q + 1.0))
    return max(2.0 * total, LOG_FLOOR)


def adi_decay_check(pair: InputPair, k: int, shifts=None) -> tuple[float, float]:
    """``(lambda_{kd+1}(P)/lambda_1(P), ||P - P_k||_2 / ||P||_2)`` for a discrete pair.

    ``P`` comes from the doubling solver and ``P_k`` from ``k`` ADI steps on
    the Cayley-transformed pair; the first value never exceeds the second.
    """
    n, d = pair.n, pair.d
    if not k * d < n:
        raise ValueError(f"need k d < n, got k={k}, d={d}, n={n}")
    cont = cayley(pair)
    if shifts is None:
        shifts = penzl_shifts(cont.a, k)
    shifts = list(shifts)
    if len(shifts) != k:
        raise ValueError(f"expected {k} shifts, got {len(shifts)}")
    p = solve_stein_sqrt_doubling(pair).p
    p = 0.5 * (p + p.conj().T)
    lam = np.linalg.eigvalsh(p)[::-1]
    lhs = float(lam[k * d] / lam[0])
    pk = adi_iterate(cont, shifts).p
    rhs = float(np.linalg.norm(p - pk, 2) / np.linalg.norm(p, 2))
    return lhs, rhs


# ---------------------------------------------------------------------------
# structure detection and the combined report


def is_normal(a, tol: float = 1e-12) -> bool:
    a = as_matrix(a)
    ah = a.conj().T
    scale = max(np.linalg.norm(a) ** 2, np.finfo(float).tiny)
    return bool(np.linalg.norm(a @ ah - ah @ a) <= tol * scale)


def companion_spec_of(a) -> CompanionSpec | None:
    """Coefficients if ``a`` is exactly in Frobenius form with ``gamma = 0``."""
    a = as_matrix(a)
    n = a.shape[0]
    if n < 2:
        return None
    below = a[1:, :]
    target = np.hstack([np.eye(n - 1), np.zeros((n - 1, 1))])
    if not np.array_equal(below, target):
        return None
    return CompanionSpec(c0=-np.conj(a[0, n - 1]), c=-np.conj(a[0, : n - 1]))


def jordan_eigenvalue_of(a) -> complex | None:
    """``lambda0`` if ``a`` is exactly ``lambda0 I + Z`` (lower shift), else ``None``."""
    a = as_matrix(a)
    n = a.shape[0]
    lam = a[0, 0]
    if np.array_equal(a, lam * np.eye(n) + np.eye(n, k=-1)):
        return complex(lam)
    return None


def bound_report(a, d: int = 1, *, pair: InputPair | None = None, solve: bool = False,
                 optimize_w: bool = True) -> BoundReport:
    """Evaluate every bound that applies to the advance matrix ``a``.

    None of the bounds depend on ``B`` beyond its column count ``d``. With
    ``solve=True`` the Grammian of ``pair`` is computed and attached so that
    :meth:`BoundReport.violations` can be checked.
    """
    if pair is not None:
        a, d = pair.a, pair.d
    a = as_matrix(a)
    n = a.shape[0]
    report = BoundReport()
    spec = Spectrum.of(a)
    s = np.linalg.svd(a, compute_uv=False)
    normal = is_normal(a)

    if d < n:
        if s[-1] > 0:
            report.add("trans", 2.0 * trans_bound(a, d))
        report.add("power", power_bound(s[0], n, d))
        report.add("kreiss", 2.0 * kreiss_lower(a))
    if normal:
        if d == 1:
            report.add("normal-d1", normal_bound(spec, 1))
        if d < n and spec.moduli[-1] > 0:
            report.add("normal", normal_bound(spec, d))
        if d < n:
            if optimize_w:
                report.add("frac-normal", optimize_frac_bound(spec, d)[0])
            elif spec.moduli[-1] > 0:
                report.add("frac-normal", frac_normal_bound(spec, 0.0, d))
            center = complex(np.mean(spec.eigenvalues))
            rho = float(np.max(np.abs(spec.eigenvalues - center))) * (1 + 1e-12) + 1e-300
            if abs(center) + rho < 1.0:
                report.add("disk", disk_bound(center, rho, (n - 1) // d))
        if d < n and np.allclose(a, a.conj().T, rtol=0, atol=1e-14) and np.allclose(a.imag, 0):
            ev = np.linalg.eigvalsh(a.real)
            cont_ev = np.abs((ev - 1.0) / (ev + 1.0))
            kappa_hat = float(np.max(cont_ev) / np.min(cont_ev))
            best = max(-penzl_bound(kappa_hat, k) for k in range(1, (n - 1) // d + 1))
            report.add("penzl", best)

    comp = companion_spec_of(a)
    if comp is None:
        comp = companion_spec_of(a.conj().T)
    if comp is not None and n > 2:
        report.add("companion-mu", companion_bound(comp))
        ev = spec.eigenvalues
        if np.all(np.abs(ev.imag) <= 1e-12) and np.all(ev.real > 0):
            report.add("companion-positive", companion_positive_bound(spec))

    lam = jordan_eigenvalue_of(a)
    if lam is not None and d == 1 and 0 < abs(lam) < 1:
        strong, weak = jordan_bound(lam, n)
        report.add("jordan", strong)
        report.add("jordan-weak", weak)

    if solve:
        if pair is None:
            raise ValueError("solve=True needs the full input pair")
        report.log_kappa = solve_stein_sqrt_doubling(pair).log_kappa
    return report
