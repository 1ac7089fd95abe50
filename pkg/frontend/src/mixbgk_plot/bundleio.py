"""Readers for the simulation output bundle (CSV fields, JSON summaries).

This package talks to the solver only through its published file formats:
a comment header line `# key=value ...`, a column-name line, then rows of
17-significant-digit decimals.  Profile files are named
`<label>__<field>_s<species>_t<time>.csv`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class BundleError(ValueError):
    pass


def read_csv(path):
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise BundleError(f"{path}: missing comment header")
        meta = {}
        for tok in header[1:].split():
            if "=" in tok:
                key, val = tok.split("=", 1)
                meta[key] = val
        names = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        raise BundleError(f"{path}: no data rows")
    cols = {}
    for i, name in enumerate(names):
        try:
            cols[name] = np.array([float(r[i]) for r in rows])
        except (ValueError, IndexError) as exc:
            raise BundleError(f"{path}: bad column {name!r}") from exc
    return meta, cols


_PROFILE_RE = re.compile(r"^(?P<label>.+?)__(?P<field>.+?)_s(?P<species>\w+)"
                         r"_t(?P<t>[-0-9.e+]+)\.csv$")


@dataclass
class ProfileSeries:
    label: str
    field: str
    species: str
    t: float
    x: np.ndarray
    value: np.ndarray

    @property
    def is_reference(self) -> bool:
        return self.label.startswith(("nsglobal", "nsmulti", "euler",
                                      "maccormack"))


def load_profiles(in_dir) -> list[ProfileSeries]:
    out = []
    for path in sorted(Path(in_dir).glob("*.csv")):
        match = _PROFILE_RE.match(path.name)
        if not match:
            continue
        meta, cols = read_csv(path)
        if "x" not in cols or "value" not in cols:
            raise BundleError(f"{path}: expected x,value columns")
        out.append(ProfileSeries(
            label=match["label"], field=match["field"],
            species=match["species"], t=float(match["t"]),
            x=cols["x"], value=cols["value"]))
    return out


def load_scaling(in_dir) -> dict:
    """pair name -> {eps -> (t array, mean-distance array)}."""
    tables = {}
    for path in sorted(Path(in_dir).glob("scaling__*.csv")):
        _, cols = read_csv(path)
        for need in ("eps", "t"):
            if need not in cols:
                raise BundleError(f"{path}: missing column {need!r}")
        dist_cols = [c for c in cols if c.startswith("distance_")]
        if not dist_cols:
            raise BundleError(f"{path}: no distance columns")
        mean = np.mean([cols[c] for c in dist_cols], axis=0)
        if not np.all(np.isfinite(mean)):
            raise BundleError(f"{path}: non-finite distances")
        pair = path.stem.replace("scaling__", "")
        by_eps = {}
        for eps in np.unique(cols["eps"]):
            mask = cols["eps"] == eps
            by_eps[float(eps)] = (cols["t"][mask], mean[mask])
        tables[pair] = by_eps
    if not tables:
        raise BundleError(f"no scaling__*.csv files in {in_dir}")
    return tables


def load_summary(in_dir) -> dict:
    p = Path(in_dir) / "summary.json"
    if not p.exists():
        return {}
    return json.loads(p.read_text())
