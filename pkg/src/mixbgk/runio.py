"""CSV/JSON emission: field snapshots, run manifests, summaries.

CSV schema: a comment header line
    # field=<name> species=<s> t=<time> units=<...>
followed by a column header ("x,value" or "x,v,value" or the scaling-study
layout) and data rows printed with 17 significant digits, so files are
bit-exact across repeated identical runs.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_field_csv(path, field: str, species, t: float, units: str,
                    x: np.ndarray, values: np.ndarray) -> None:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# field={field} species={species} t={_fmt(t)} units={units}\n")
        fh.write("x,value\n")
        for xi, vi in zip(x, values):
            fh.write(f"{_fmt(xi)},{_fmt(vi)}\n")


def write_phase_csv(path, field: str, species, t: float, units: str,
                    x: np.ndarray, v: np.ndarray, values: np.ndarray) -> None:
    """values has shape (len(x), len(v))."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# field={field} species={species} t={_fmt(t)} units={units}\n")
        fh.write("x,v,value\n")
        for i, xi in enumerate(x):
            for j, vj in enumerate(v):
                fh.write(f"{_fmt(xi)},{_fmt(vj)},{_fmt(values[i, j])}\n")


def read_csv(path):
    """Parse either CSV layout back into (meta dict, column dict)."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing comment header")
        meta = {}
        for tok in header[1:].split():
            if "=" in tok:
                key, val = tok.split("=", 1)
                meta[key] = val
        names = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {name: np.array([float(r[i]) for r in rows])
            for i, name in enumerate(names)}
    return meta, cols


def write_table_csv(path, header_comment: str, cols: dict) -> None:
    """Generic named-column table with the same formatting conventions."""
    names = list(cols)
    n = len(cols[names[0]])
    with open(Path(path), "w") as fh:
        fh.write(header_comment.rstrip("\n") + "\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(cols[name][i]) for name in names) + "\n")


def write_scaling_csv(path, eps_values, times, distances, species_count) -> None:
    """columns: eps, t, distance_species_1..L (relative L1 per species)."""
    with open(Path(path), "w") as fh:
        fh.write("# field=l1-relative-distance units=dimensionless\n")
        fh.write("eps,t," + ",".join(f"distance_species_{s + 1}"
                                     for s in range(species_count)) + "\n")
        for eps in eps_values:
            table = distances[eps]
            for ti, row in zip(times, table):
                fh.write(_fmt(eps) + "," + _fmt(ti) + ","
                         + ",".join(_fmt(v) for v in row) + "\n")


def write_json(path, payload: dict) -> None:
    with open(Path(path), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonify)
        fh.write("\n")


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)}")


class Manifest:
    """Run manifest: config echo, solver notes, conservation ledger, timing."""

    def __init__(self, scenario_name: str, config_echo: dict, solver: dict):
        self._t0 = time.perf_counter()
        self.payload = {
            "scenario": scenario_name,
            "config-echo": config_echo,
            "solver": solver,
            "conservation-ledger": [],
            "wall-time": None,
        }

    def record_totals(self, label: str, t: float, totals: dict) -> None:
        self.payload["conservation-ledger"].append(
            {"label": label, "t": t, **totals})

    def write(self, path) -> None:
        self.payload["wall-time"] = time.perf_counter() - self._t0
        write_json(path, self.payload)
