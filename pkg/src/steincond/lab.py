"""Monte Carlo ensembles of input pairs and the quantile tables built from them."""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bounds import companion_bound, companion_spec_of, jordan_bound, normal_bound
from .core import EnsembleSpec, SampleRecord, SteinError, draw_pair
from .stein import solve_stein_sqrt_doubling

__all__ = [
    "PROBES",
    "ACCURACY_CEILING",
    "TABLE_IDS",
    "QuantileSummary",
    "Table",
    "run_sample",
    "run_ensemble",
    "quantiles",
    "build_table",
    "render_table",
    "emit_table",
    "parse_table_csv",
]

PROBES = (0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99)
# kappa(P) = kappa(L)^2 and kappa(L) ~ 1/eps is where plain double-precision
# factor arithmetic stops being trustworthy
ACCURACY_CEILING = 69.0

TABLE_IDS = ("1", "2", "3", "4a", "4b", "4c", "5")
_TABLE_KIND = {
    "1": "generic",
    "2": "normal-diag",
    "3": "normal-diag",
    "4a": "companion-random-b",
    "4b": "companion-ar",
    "4c": "ar-observability",
    "5": "jordan",
}
_TABLE_TITLE = {
    "1": "Quantiles of ln kappa(P), Gaussian stable pairs, d = 1",
    "2": "Quantiles of ln kappa(P), diagonal A with Gaussian-induced spectrum",
    "3": "Quantiles of ln kappa(P) - ln kappa_bd, normal bound per sample",
    "4a": "Quantiles of ln kappa(P), companion A, Gaussian B",
    "4b": "Quantiles of ln kappa(P), companion A, B = e1",
    "4c": "Quantiles of ln kappa(P), observability Grammian of the AR model",
    "5": "Quantiles of ln kappa(P), single Jordan block, Gaussian B",
}
DIMENSIONS = (8, 16, 24)
JORDAN_LAMBDAS = (0.3, 0.5, 0.8)


def _bound_for(spec: EnsembleSpec, pair) -> float | None:
    if spec.kind == "normal-diag":
        return normal_bound(pair.spectrum(), 1)
    if spec.kind in ("companion-random-b", "companion-ar"):
        return companion_bound(companion_spec_of(pair.a))
    if spec.kind == "ar-observability":
        return companion_bound(companion_spec_of(pair.a.conj().T))
    if spec.kind == "jordan":
        return jordan_bound(spec.jordan_lambda, spec.n)[1]
    return None


def run_sample(spec: EnsembleSpec, index: int) -> SampleRecord:
    """Draw, solve and bound one sample; failures are recorded, not raised."""
    pair, rejections = draw_pair(spec, index)
    bound = _bound_for(spec, pair)
    try:
        sol = solve_stein_sqrt_doubling(pair)
    except SteinError as exc:
        return SampleRecord(index, math.nan, bound, rejections, {}, error=exc.code)
    aux = {
        "log_kappa_l": 0.5 * sol.log_kappa,
        "residual_rel": sol.residual_rel,
        "iterations": float(sol.iterations),
    }
    if spec.kind == "generic":
        # the normal-matrix bound is not valid here; kept for comparison only
        aux["normal_bound"] = normal_bound(pair.spectrum(), spec.d)
    return SampleRecord(index, sol.log_kappa, bound, rejections, aux)


def _run_chunk(args: tuple[EnsembleSpec, int, int]) -> list[SampleRecord]:
    spec, lo, hi = args
    return [run_sample(spec, i) for i in range(lo, hi)]


def run_ensemble(spec: EnsembleSpec, workers: int = 1, chunk: int = 50) -> list[SampleRecord]:
    """All ``spec.count`` samples in index order.

    Each sample depends only on ``(spec, index)``, so the result is the same
    for any ``workers``.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    bounds = [(spec, lo, min(lo + chunk, spec.count)) for lo in range(0, spec.count, chunk)]
    if workers == 1 or len(bounds) == 1:
        out: list[SampleRecord] = []
        for b in bounds:
            out.extend(_run_chunk(b))
        return out
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return [r for part in pool.map(_run_chunk, bounds) for r in part]


# ---------------------------------------------------------------------------
# summaries


@dataclass
class QuantileSummary:
    n: int
    probes: tuple[float, ...]
    values: tuple[float, ...]
    count: int
    excluded: int = 0
    lam: float | None = None
    bound: float | None = None
    min: float | None = None
    flagged: tuple[float, ...] = ()

    @property
    def iq_distance(self) -> float:
        return self.value(0.75) - self.value(0.25)

    @property
    def median(self) -> float:
        return self.value(0.5)

    def value(self, probe: float) -> float:
        for p, v in zip(self.probes, self.values):
            if abs(p - probe) < 1e-12:
                return v
        raise KeyError(probe)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "probes": list(self.probes),
            "values": list(self.values),
            "iq_distance": self.iq_distance,
            "count": self.count,
            "excluded": self.excluded,
        }
        if self.lam is not None:
            out.update(**{"lambda": self.lam, "bound": self.bound, "min": self.min})
        if self.flagged:
            out["flagged"] = list(self.flagged)
        return out


def _values(records: Iterable) -> tuple[np.ndarray, int]:
    vals, excluded = [], 0
    for r in records:
        if isinstance(r, SampleRecord):
            if not r.ok or not math.isfinite(r.log_kappa):
                excluded += 1
                continue
            vals.append(r.log_kappa)
        else:
            vals.append(float(r))
    return np.asarray(vals, dtype=float), excluded


def quantiles(records: Iterable, probes: Sequence[float] = PROBES, n: int = 0) -> QuantileSummary:
    """Order-statistic quantiles with linear interpolation.

    With ``N`` values, probe ``q`` sits at 1-based position ``1 + (N-1) q``.
    Accepts :class:`SampleRecord` objects (failed ones are counted as
    excluded) or plain numbers.
    """
    vals, excluded = _values(records)
    if vals.size == 0:
        raise ValueError("no values to summarize")
    if vals.size < 2:
        raise ValueError("need at least two values")
    q = np.quantile(vals, probes, method="linear")
    return QuantileSummary(n, tuple(float(p) for p in probes), tuple(float(v) for v in q),
                           int(vals.size), excluded)


@dataclass
class Table:
    table_id: str
    rows: list[QuantileSummary]
    seed: int
    samples: int
    meta: dict = field(default_factory=dict)

    @property
    def title(self) -> str:
        return _TABLE_TITLE[self.table_id]


def _flags(summary: QuantileSummary) -> tuple[float, ...]:
    return tuple(p for p, v in zip(summary.probes, summary.values) if v > ACCURACY_CEILING)


def _table_specs(table_id: str, seed: int, samples: int) -> list[EnsembleSpec]:
    kind = _TABLE_KIND[table_id]
    if table_id == "5":
        return [EnsembleSpec(kind, n, 1, samples, seed, jordan_lambda=lam)
                for lam in JORDAN_LAMBDAS for n in DIMENSIONS]
    return [EnsembleSpec(kind, n, 1, samples, seed) for n in DIMENSIONS]


def build_table(table_id: str, seed: int = 0, samples: int | None = None,
                workers: int = 1) -> Table:
    """Run the ensembles behind one table and summarize each row.

    Default sample counts are 2500 for tables 1 to 4c and 1200 for table 5.
    """
    table_id = str(table_id).lower()
    if table_id not in TABLE_IDS:
        raise ValueError(f"unknown table {table_id!r}; choose from {', '.join(TABLE_IDS)}")
    if samples is None:
        samples = 1200 if table_id == "5" else 2500
    rows = []
    violations = 0
    for spec in _table_specs(table_id, seed, samples):
        records = run_ensemble(spec, workers)
        good = [r for r in records if r.ok]
        if table_id == "3":
            vals = [r.log_kappa - r.bound_log for r in good]
            summary = quantiles(vals, n=spec.n)
            summary.excluded = len(records) - len(good)
        else:
            summary = quantiles(records, n=spec.n)
            summary.flagged = _flags(summary)
        if table_id == "5":
            summary.lam = spec.jordan_lambda
            summary.bound = jordan_bound(spec.jordan_lambda, spec.n)[1]
            summary.min = float(min(r.log_kappa for r in good))
        violations += sum(
            1 for r in good
            if r.bound_log is not None
            and r.log_kappa < r.bound_log - 1e-6 * max(1.0, abs(r.bound_log))
        )
        rows.append(summary)
    return Table(table_id, rows, seed, samples, {"bound_violations": violations})


# ---------------------------------------------------------------------------
# rendering


def _header(table_id: str) -> list[str]:
    cols = ["n"] + (["lambda"] if table_id == "5" else [])
    cols += [f"q{round(p * 100):02d}" for p in PROBES]
    cols += (["bound", "min"] if table_id == "5" else []) + ["count", "excluded"]
    return cols


def _footer(table: Table) -> list[str]:
    lines = [
        f"table={table.table_id}",
        f"seed={table.seed}",
        f"samples={table.samples}",
        f"excluded={sum(r.excluded for r in table.rows)}",
        f"bound_violations={table.meta.get('bound_violations', 0)}",
        f"accuracy_ceiling=ln kappa > {ACCURACY_CEILING:g}",
    ]
    for r in table.rows:
        if r.flagged:
            tag = f"n={r.n}" + (f",lambda={r.lam:g}" if r.lam is not None else "")
            probes = " ".join(f"q{round(p * 100):02d}" for p in r.flagged)
            lines.append(f"flagged {tag}: {probes}")
    return lines


def render_table(table: Table, fmt: str = "csv") -> str:
    if fmt == "json":
        doc = {
            "table": table.table_id,
            "title": table.title,
            "seed": table.seed,
            "samples": table.samples,
            "accuracy_ceiling": ACCURACY_CEILING,
            "rows": [r.to_json() for r in table.rows],
            "meta": table.meta,
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_header(table.table_id))
        for r in table.rows:
            row = [r.n] + ([repr(r.lam)] if table.table_id == "5" else [])
            row += [repr(v) for v in r.values]
            if table.table_id == "5":
                row += [repr(r.bound), repr(r.min)]
            w.writerow(row + [r.count, r.excluded])
        for line in _footer(table):
            buf.write(f"# {line}\n")
        return buf.getvalue()
    if fmt == "md":
        head = _header(table.table_id)
        out = [f"**Table {table.table_id}.** {table.title}", "",
               "| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for r in table.rows:
            cells = [str(r.n)] + ([f"{r.lam:g}"] if table.table_id == "5" else [])
            for p, v in zip(r.probes, r.values):
                cells.append(f"{v:.3g}" + ("†" if p in r.flagged else ""))
            if table.table_id == "5":
                cells += [f"{r.bound:.3g}", f"{r.min:.3g}"]
            cells += [str(r.count), str(r.excluded)]
            out.append("| " + " | ".join(cells) + " |")
        out.append("")
        out.append("† beyond the double-precision accuracy ceiling.")
        out += [f"- {line}" for line in _footer(table)]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_table(table_id: str, seed: int = 0, samples: int | None = None,
               workers: int = 1, fmt: str = "csv") -> str:
    return render_table(build_table(table_id, seed, samples, workers), fmt)


def parse_table_csv(text: str) -> list[QuantileSummary]:
    """Inverse of the CSV rendering (footer comments are ignored)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    footer = [ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")]
    # table 3 holds differences of logs, which are never flagged
    flag_rows = "table=3" not in footer
    reader = csv.DictReader(lines)
    rows = []
    for rec in reader:
        probes = tuple(PROBES)
        values = tuple(float(rec[f"q{round(p * 100):02d}"]) for p in PROBES)
        s = QuantileSummary(int(rec["n"]), probes, values, int(rec["count"]), int(rec["excluded"]))
        if "lambda" in rec:
            s.lam = float(rec["lambda"])
            s.bound = float(rec["bound"])
            s.min = float(rec["min"])
        if flag_rows:
            s.flagged = _flags(s)
        rows.append(s)
    return rows
