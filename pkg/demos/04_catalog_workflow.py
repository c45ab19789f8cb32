"""Catalog files, distance matrices and nearest neighbours, plus the same through the CLI."""

import subprocess
import sys
import tempfile
from pathlib import Path

from orbitspace.catalog import RunConfig, distance_matrix, load_catalog, nearest, random_catalog, save_catalog

tmp = Path(tempfile.mkdtemp())
path = tmp / "catalog.csv"
save_catalog(random_catalog(8, seed=42), path)
print(path.read_text().splitlines()[:3])

records = load_catalog(path)
config = RunConfig(metric="rho", p="inf")
m = distance_matrix(records, config)
print("matrix row 0:", [f"{x:.4f}" for x in m[0]])
print("nearest to obj0000:", nearest(records, "obj0000", 3, config))

# the command-line tool produces the same numbers
cmd = [sys.executable, "-m", "orbitspace.cli", "nearest", "--id", "obj0000", "-k", "3",
       "--p", "inf", "--catalog", str(path), "--format", "csv"]
print(subprocess.run(cmd, capture_output=True, text=True, check=True).stdout)
