"""Acceptance suite: each criterion is evaluated at its stated tolerance.

Run under pytest (one test per criterion, with a pass/fail summary line per
criterion at the end of the session) or directly as a script.
"""

from __future__ import annotations

import functools
import math
import time
from typing import Callable

import numpy as np
import pytest

from steincond.bounds import (
    adi_decay_check,
    companion_singular_values,
    jordan_bound,
    penzl_bound,
)
from steincond.colored import ar1, colored_condition_bound, ma1, state_covariance_colored
from steincond.core import (
    CompanionSpec,
    EnsembleSpec,
    InputPair,
    build_companion,
    sample_generic,
    sample_stream,
)
from steincond.lab import ACCURACY_CEILING, build_table, emit_table, run_ensemble, quantiles
from steincond.normal_form import (
    bilinear_transform,
    cayley,
    in_residual,
    to_input_normal,
    verify_power_identity,
)
from steincond.stein import solve_stein_direct, solve_stein_sqrt_doubling

RESULTS: list[tuple[str, bool, str]] = []
CRITERIA: dict[str, tuple[str, Callable[[], tuple[bool, str]]]] = {}

ACCEPT_SEED = 20240601


def criterion(key: str, title: str):
    def wrap(fn):
        CRITERIA[key] = (title, fn)
        return fn
    return wrap


def _record(key: str) -> tuple[bool, str]:
    title, fn = CRITERIA[key]
    t0 = time.perf_counter()
    ok, detail = fn()
    detail = f"{detail} [{time.perf_counter() - t0:.1f}s]"
    RESULTS.append((f"{key} {title}", ok, detail))
    return ok, detail


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _pair(seed: int, index: int, n: int, d: int) -> InputPair:
    return sample_generic(n, d, sample_stream(seed, index))[0]


@functools.lru_cache(maxsize=None)
def _table(table_id: str):
    return build_table(table_id, seed=0)


@functools.lru_cache(maxsize=None)
def _generic_records(n: int):
    return run_ensemble(EnsembleSpec("generic", n, count=2500, seed=0))


def _medians_within(table_id: str, targets, tol: float) -> tuple[bool, list[str], list[float]]:
    rows = _table(table_id).rows
    meds = [r.median for r in rows]
    notes = [f"n={r.n}: {m:.2f} vs {t}" for r, m, t in zip(rows, meds, targets)]
    ok = all(abs(m - t) <= tol for m, t in zip(meds, targets))
    return ok, notes, meds


# ---------------------------------------------------------------------------


@criterion("C01", "doubling vs Kronecker oracle, 200 pairs, rel err <= 1e-8, < 10 s")
def c01():
    rng = np.random.default_rng(ACCEPT_SEED)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(200):
        n = int(rng.integers(1, 9))
        d = min(int(rng.integers(1, 3)), n)
        pair = _pair(ACCEPT_SEED + 1, i, n, d)
        worst = max(worst, _rel(solve_stein_sqrt_doubling(pair).p, solve_stein_direct(pair)))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-8 and elapsed < 10.0, f"max rel err {worst:.2e}, {elapsed:.2f} s"


@criterion("C02", "residual <= 1e-10 when kappa(L) <= 1e7 and |lam1| <= 0.95, 500 cases")
def c02():
    rng = np.random.default_rng(ACCEPT_SEED + 2)
    checked, skipped, worst = 0, 0, 0.0
    index = 0
    while checked < 500:
        n = int(rng.integers(1, 33))
        d = min(int(rng.integers(1, 4)), n)
        pair = _pair(ACCEPT_SEED + 2, index, n, d)
        index += 1
        rho = pair.spectral_radius()
        if rho > 0.95:
            # pull the spectrum inside the stated radius instead of discarding the draw
            pair = InputPair(pair.a * (rng.uniform(0.5, 0.95) / rho), pair.b)
        sol = solve_stein_sqrt_doubling(pair)
        if sol.log_kappa > 2 * math.log(1e7):
            skipped += 1
            continue
        worst = max(worst, sol.residual_rel)
        checked += 1
    return worst <= 1e-10, f"{checked} cases ({skipped} above kappa(L) cap), max residual {worst:.2e}"


@criterion("C03", "input-normal residual <= 1e-8 n, 200 pairs with ln kappa <= 27")
def c03():
    rng = np.random.default_rng(ACCEPT_SEED + 3)
    checked, index, worst = 0, 0, 0.0
    while checked < 200:
        n = int(rng.integers(2, 25))
        d = min(int(rng.integers(1, 4)), n)
        pair = _pair(ACCEPT_SEED + 3, index, n, d)
        index += 1
        sol = solve_stein_sqrt_doubling(pair)
        if sol.log_kappa > 27:
            continue
        worst = max(worst, in_residual(to_input_normal(pair, sol).pair) / (1e-8 * n))
        checked += 1
    return worst <= 1.0, f"max residual / (1e-8 n) = {worst:.2e} over {checked} pairs"


@criterion("C04", "Table 1 medians +-1.0 of {11.3, 20.3, 28.7}, IQ +-1.0 of {3.8, 4.3, 4.4}")
def c04():
    ok, notes, _ = _medians_within("1", (11.3, 20.3, 28.7), 1.0)
    rows = _table("1").rows
    iq_ok = all(abs(r.iq_distance - t) <= 1.0 for r, t in zip(rows, (3.8, 4.3, 4.4)))
    notes += [f"IQ n={r.n}: {r.iq_distance:.2f}" for r in rows]
    return ok and iq_ok, "; ".join(notes)


@criterion("C04b", "kappa(P)^(1/n) within 0.3 of 3.3 and kappa(L)^(1/n) within 0.3 of 1.8 at n=24")
def c04b():
    recs = _generic_records(24)
    med_p = quantiles(recs).median
    med_l = float(np.median([r.aux["log_kappa_l"] for r in recs if r.ok]))
    kp, kl = math.exp(med_p / 24), math.exp(med_l / 24)
    # the table reuses the same draws; cross-check so both criteria see one ensemble
    same = abs(med_p - _table("1").rows[-1].median) < 1e-12
    return abs(kp - 3.3) <= 0.3 and abs(kl - 1.8) <= 0.3 and same, \
        f"kappa(P)^(1/n) = {kp:.3f}, kappa(L)^(1/n) = {kl:.3f}"


@criterion("C05", "Table 2 medians +-1.0 of {12.4, 21.3, 29.8}")
def c05():
    ok, notes, _ = _medians_within("2", (12.4, 21.3, 29.8), 1.0)
    return ok, "; ".join(notes)


@criterion("C06", "Table 3 medians +-1.0 of {4.83, 5.86, 6.27}, zero bound violations")
def c06():
    ok, notes, _ = _medians_within("3", (4.83, 5.86, 6.27), 1.0)
    table = _table("3")
    viol = table.meta["bound_violations"]
    lows = [r.values[0] for r in table.rows]
    return ok and viol == 0 and min(lows) >= -1e-6, "; ".join(notes) + f"; violations {viol}"


@criterion("C07", "Tables 4a/4b/4c medians +-1.5, 4c cells above ceiling flagged")
def c07():
    notes, ok = [], True
    for tid, targets in (("4a", (8.68, 14.6, 19.3)), ("4b", (3.59, 5.08, 5.99)),
                         ("4c", (35.1, 79.6, 104.0))):
        _, _, meds = _medians_within(tid, targets, 1.5)
        rows = _table(tid).rows
        for r, m, t in zip(rows, meds, targets):
            if m > ACCURACY_CEILING:
                # beyond the ceiling only the flag is asserted
                flagged = 0.5 in r.flagged
                ok &= flagged
                notes.append(f"{tid} n={r.n}: {m:.1f} vs {t} (flagged={flagged})")
            else:
                ok &= abs(m - t) <= 1.5
                notes.append(f"{tid} n={r.n}: {m:.2f} vs {t}")
        ok &= all((p in r.flagged) == (v > ACCURACY_CEILING)
                  for r in rows for p, v in zip(r.probes, r.values))
    return ok, "; ".join(notes)


TABLE5_REFERENCE = {
    (0.3, 8): (-1.17, 11.6), (0.3, 16): (3.16, 23.7), (0.3, 24): (8.05, 36.3),
    (0.5, 8): (3.55, 14.0), (0.5, 16): (13.2, 31.2), (0.5, 24): (23.5, 47.6),
    (0.8, 8): (16.4, 23.9), (0.8, 16): (40.7, 51.8), (0.8, 24): (65.7, 80.7),
}


@criterion("C08", "Table 5 bound +-0.1, min >= bound, median +-2.0 (all nine cells)")
def c08():
    table = _table("5")
    ok, notes = True, []
    for r in table.rows:
        bound_ref, med_ref = TABLE5_REFERENCE[(r.lam, r.n)]
        weak = jordan_bound(r.lam, r.n)[1]
        cell = (abs(r.bound - bound_ref) <= 0.1 and abs(r.bound - weak) < 1e-12
                and r.min >= r.bound and abs(r.median - med_ref) <= 2.0)
        ok &= cell
        notes.append(f"({r.lam},{r.n}) bd {r.bound:.2f} min {r.min:.1f} med {r.median:.1f}/{med_ref}")
    ok &= table.meta["bound_violations"] == 0
    return ok, "; ".join(notes)


@criterion("C09", "companion closed-form singular values vs SVD <= 1e-10, 100 specs incl gamma=1")
def c09():
    rng = np.random.default_rng(ACCEPT_SEED + 9)
    worst, ones = 0.0, 0
    for i in range(100):
        n = int(rng.integers(3, 25))
        gamma = i % 2
        c = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
        c0 = complex(rng.standard_normal(), rng.standard_normal())
        spec = CompanionSpec(c0, c, gamma=gamma, p=int(rng.integers(2, n)) if gamma else None)
        closed = companion_singular_values(spec).singular_values
        full = np.linalg.svd(build_companion(spec), compute_uv=False)
        worst = max(worst, float(np.max(np.abs(closed - full)) / max(1.0, full[0])))
        ones += gamma
    return worst <= 1e-10, f"max scaled deviation {worst:.2e}, {ones} specs with gamma=1"


@criterion("C10", "bilinear invariance of P, rel err <= 1e-8, 50 pairs x 6 w")
def c10():
    rng = np.random.default_rng(ACCEPT_SEED + 10)
    ws = (0.0, 0.3, -0.6, 0.5j, -0.4 - 0.4j, 0.7 + 0.1j)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(2, 11))
        d = min(int(rng.integers(1, 3)), n)
        pair = _pair(ACCEPT_SEED + 10, i, n, d)
        p0 = solve_stein_sqrt_doubling(pair).p
        for w in ws:
            worst = max(worst, _rel(solve_stein_sqrt_doubling(bilinear_transform(pair, w)).p, p0))
    return worst <= 1e-8, f"max rel err {worst:.2e}"


@criterion("C11", "power identity |sigma1(A~^k) - 1| <= 1e-6, 50 IN pairs, n <= 16")
def c11():
    rng = np.random.default_rng(ACCEPT_SEED + 11)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(2, 17))
        tr = to_input_normal(_pair(ACCEPT_SEED + 11, i, n, 1))
        worst = max(worst, verify_power_identity(tr.pair))
    return worst <= 1e-6, f"max deviation {worst:.2e}"


def symmetric_stable_pair(seed: int, n: int = 8) -> InputPair:
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = q @ np.diag(rng.uniform(-0.95, 0.95, n)) @ q.T
    return InputPair(0.5 * (a + a.T), rng.standard_normal((n, 1)))


@criterion("C12", "eigenvalue decay <= Penzl bound and <= ADI error, 50 pairs, k = 1..3")
def c12():
    violations, worst = 0, 0.0
    for i in range(50):
        pair = symmetric_stable_pair(ACCEPT_SEED + i)
        ev = np.linalg.eigvalsh(cayley(pair).a.real)
        kappa_hat = ev.min() / ev.max()
        for k in (1, 2, 3):
            lhs, rhs = adi_decay_check(pair, k)
            bound = math.exp(penzl_bound(kappa_hat, k))
            violations += (lhs > bound) + (lhs > rhs)
            worst = max(worst, lhs / bound)
    return violations == 0, f"{violations} violations, max ratio to bound {worst:.3f}"


@criterion("C13", "ln kappa(W) <= ln kappa(P) + ln(Smax/Smin) + 1e-6, 100 combos; IN pairs <= ratio")
def c13():
    rng = np.random.default_rng(ACCEPT_SEED + 13)
    violations, slack_min = 0, math.inf
    for i in range(100):
        n = int(rng.integers(1, 17))
        coef = float(rng.uniform(-0.9, 0.9))
        noise = ar1(coef) if i % 2 == 0 else ma1(coef)
        pair = _pair(ACCEPT_SEED + 13, i, n, 1)
        lhs, rhs = colored_condition_bound(pair, noise)
        violations += lhs > rhs + 1e-6
        slack_min = min(slack_min, rhs - lhs)
        if i % 4 == 0:
            tr = to_input_normal(pair)
            w = state_covariance_colored(tr.pair, noise)
            ev = np.linalg.eigvalsh(w)
            violations += math.log(ev[-1] / ev[0]) > noise.log_ratio + 1e-6
    return violations == 0, f"{violations} violations, smallest slack {slack_min:.2e}"


@criterion("C14", "tables byte-identical across runs and 1, 4, 8 workers")
def c14():
    ok, notes = True, []
    for tid, samples in (("1", 120), ("5", 60), ("4c", 120)):
        docs = {w: emit_table(tid, seed=7, samples=samples, workers=w, fmt="csv") for w in (1, 4, 8)}
        again = emit_table(tid, seed=7, samples=samples, workers=1, fmt="csv")
        same = len(set(docs.values())) == 1 and again == docs[1]
        ok &= same
        notes.append(f"table {tid}: {'identical' if same else 'DIFFERENT'}")
    return ok, "; ".join(notes)


# ---------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("key", list(CRITERIA))
def test_acceptance(key):
    ok, detail = _record(key)
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for key in CRITERIA:
        ok, detail = _record(key)
        name, _, _ = RESULTS[-1]
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", flush=True)
        failures += not ok
    raise SystemExit(1 if failures else 0)
