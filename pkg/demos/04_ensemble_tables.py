"""Monte Carlo tables of ln kappa(P) for the Gaussian ensembles.

The default sample count is small so the demo runs in seconds; pass a
number on the command line (2500 reproduces the full tables).

Run: python3 demos/04_ensemble_tables.py [samples]
"""
import sys

from steincond.lab import build_table, render_table

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 200

for table_id in ("1", "3", "4c", "5"):
    table = build_table(table_id, seed=0, samples=samples if table_id != "5" else samples // 2)
    print(render_table(table, "md"))
