"""
Tree size against the leaf bound
================================

"""
import csv
import io

from lotbnb.cli import run_sweep

# the same table the ``lotbnb sweep`` command writes
text = run_sweep(range(2, 11), ["most-fractional", "random-split"], ["best-bound"], [1])
for row in csv.DictReader(io.StringIO(text)):
    print(row["n"], row["rule"], row["leaves"], ">=", row["bound"], row["bound_satisfied"])
