"""Shipped scenario definitions, loaded from the packaged TOML files.

All physical constants (masses, collision constants, grids, CFL schedules,
domains) live in the scenario files, not in code; builders here only turn
them into grids, parameters and initial fields.  A custom scenario is any
TOML file with the same sections passed by path.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .grids import SpatialGrid, VelocityGrid, make_grids
from .kinetic import SolverConfig, TimeController
from .state import BBGSP, MODELS, KineticState, MixtureParams, \
    init_maxwellian_state

SHIPPED = (
    "discrepancy-4gas",
    "ns-global-4gas",
    "ns-multi-4gas",
    "he-ar-shock",
    "ne-ar-stationary-shock",
)

MACH_CONVENTIONAL = "conventional"   # u_inf = Ma c_inf (steady shock)
MACH_LITERAL = "literal"             # u_inf = Ma^2 c_inf


class ScenarioError(ValueError):
    pass


@dataclass
class RHStates:
    """Upstream/downstream plateau states of the stationary-shock setup."""

    n_left: np.ndarray
    u_left: float
    T_left: float
    n_right: np.ndarray
    u_right: float
    T_right: float
    mach_sq: float
    c_inf: float


def rankine_hugoniot(n_inf: np.ndarray, T_inf: float, mach_sq: float,
                     m: np.ndarray, K: float = 1.0,
                     reading: str = MACH_CONVENTIONAL) -> RHStates:
    """Jump states of a gamma = 5/3 plane shock from the downstream state.

    The downstream (right) state is (n_s_inf, u_inf, T_inf) with u_inf set
    from the mixture sound speed c_inf = sqrt(5 n K T/(3 rho)); the left
    state applies the printed density/velocity/temperature factors in
    mach_sq.  Under the conventional reading u_inf = Ma c_inf the two states
    balance mass, momentum and energy fluxes exactly.
    """
    if not mach_sq > 0.2:
        raise ScenarioError("mach_sq must exceed 1/5 for a positive jump temperature")
    n_inf = np.asarray(n_inf, dtype=float)
    rho_inf = float((m * n_inf).sum())
    c_inf = math.sqrt(5.0 * n_inf.sum() * K * T_inf / (3.0 * rho_inf))
    if reading == MACH_CONVENTIONAL:
        u_inf = math.sqrt(mach_sq) * c_inf
    elif reading == MACH_LITERAL:
        u_inf = mach_sq * c_inf
    else:
        raise ScenarioError(f"unknown mach reading {reading!r}")
    fn = 4.0 * mach_sq / (mach_sq + 3.0)
    fu = (mach_sq + 3.0) / (4.0 * mach_sq)
    fT = (5.0 * mach_sq - 1.0) * (mach_sq + 3.0) / (16.0 * mach_sq)
    return RHStates(
        n_left=fn * n_inf, u_left=fu * u_inf, T_left=fT * T_inf,
        n_right=n_inf.copy(), u_right=u_inf, T_right=T_inf,
        mach_sq=mach_sq, c_inf=c_inf,
    )


def tanh_blend(x: np.ndarray, slope: float, left: float, right: float):
    return left + 0.5 * (right - left) * (np.tanh(slope * x) + 1.0)


@dataclass
class Scenario:
    name: str
    kind: str
    units: str
    params: MixtureParams
    sx: SpatialGrid
    vg: VelocityGrid
    controller: TimeController
    solver: SolverConfig
    models: list
    eps_values: list
    kappa_rule: str                  # "equal-eps" or "fixed"
    kappa_fixed: float
    snapshot_times: list
    raw: dict = field(repr=False, default_factory=dict)

    # optional pieces per kind
    amplitude: np.ndarray | None = None
    sigma: np.ndarray | None = None
    rho_left: np.ndarray | None = None
    rho_right: np.ndarray | None = None
    jump_at: float = 0.0
    T_init: float = 0.0
    rh: RHStates | None = None
    tanh_slope: float = 0.0
    reference_n_x: int = 0
    viscosities: np.ndarray | None = None

    def kappa_for(self, eps: float) -> float:
        return eps if self.kappa_rule == "equal-eps" else self.kappa_fixed

    def initial_fields(self) -> list[tuple]:
        """Per-species (n, u, T) arrays over x."""
        x = self.sx.centers
        m = self.params.m
        if self.kind == "four-gas-bumps":
            n0 = 1.0 / m
            T0 = 4.0 / n0.sum()
            fields = []
            for s in range(self.params.L):
                sp = s + 1
                sig = self.sigma[s]
                u0 = self.amplitude[s] / sig * (
                    np.exp(-(sig * x - 1.0 + sp / 3.0) ** 2)
                    + np.exp(-(sig * x + 3.0 - sp / 10.0) ** 2))
                fields.append((np.full_like(x, n0[s]), u0, np.full_like(x, T0)))
            return fields
        if self.kind == "density-jump":
            fields = []
            for s in range(self.params.L):
                n = np.where(x < self.jump_at,
                             self.rho_left[s] / m[s], self.rho_right[s] / m[s])
                fields.append((n, np.zeros_like(x), np.full_like(x, self.T_init)))
            return fields
        if self.kind == "rh-tanh":
            rh = self.rh
            fields = []
            for s in range(self.params.L):
                n = tanh_blend(x, self.tanh_slope, rh.n_left[s], rh.n_right[s])
                u = tanh_blend(x, self.tanh_slope, rh.u_left, rh.u_right)
                T = tanh_blend(x, self.tanh_slope, rh.T_left, rh.T_right)
                fields.append((n, u, T))
            return fields
        raise ScenarioError(f"unknown scenario kind {self.kind!r}")

    def initial_state(self, eps: float, model: str = BBGSP) -> KineticState:
        params = self.params.with_scales(eps=eps, kappa=self.kappa_for(eps),
                                         model=model)
        return init_maxwellian_state(self.initial_fields(), params,
                                     self.sx, self.vg)

    def boundary_plateau_states(self):
        """(left, right) single-cell (n_s, u, T) tuples for pinned ghosts."""
        if self.kind == "rh-tanh":
            rh = self.rh
            left = [(np.array([rh.n_left[s]]), rh.u_left, rh.T_left)
                    for s in range(self.params.L)]
            right = [(np.array([rh.n_right[s]]), rh.u_right, rh.T_right)
                     for s in range(self.params.L)]
            return left, right
        raise ScenarioError("pinned boundaries only defined for rh-tanh scenarios")


def _load_toml(name_or_path: str) -> dict:
    p = Path(name_or_path)
    if p.suffix == ".toml" and p.exists():
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    if name_or_path in SHIPPED:
        ref = resources.files("mixbgk").joinpath(
            f"scenario_files/{name_or_path}.toml")
        with ref.open("rb") as fh:
            return tomllib.load(fh)
    raise ScenarioError(
        f"unknown scenario {name_or_path!r}; shipped: {', '.join(SHIPPED)}")


def load_scenario(name_or_path: str) -> Scenario:
    cfg = _load_toml(name_or_path)
    try:
        sc = cfg["scenario"]
        mix = cfg["mixture"]
        grid = cfg["grid"]
        time_cfg = cfg["time"]
        models_cfg = cfg["models"]
    except KeyError as exc:
        raise ScenarioError(f"scenario file missing section {exc}") from exc

    m = np.asarray(mix["masses"], dtype=float)
    lam = np.asarray(mix["lambda_rows"], dtype=float)
    params = MixtureParams(m=m, lam=lam, K=float(mix["gas_constant"]),
                           units=sc.get("units", "abstract"))
    sx, vg = make_grids(grid["x_min"], grid["x_max"], int(grid["n_x"]),
                        grid["v_min"], grid["v_max"], int(grid["n_v"]),
                        bc=grid.get("bc", "periodic"))
    schedule = tuple(tuple(seg) for seg in time_cfg["cfl_schedule"])
    controller = TimeController(schedule, float(time_cfg["t_end"]))
    solver = cfg.get("solver", {})
    config = SolverConfig(stepper=solver.get("stepper", "dirk2"),
                          reconstruction=solver.get("reconstruction", "pp3"))
    models = list(models_cfg.get("run", [BBGSP]))
    for mod in models:
        if mod not in MODELS:
            raise ScenarioError(f"unknown model {mod!r}")
    eps_values = [float(e) for e in models_cfg["eps"]]
    if any(e <= 0 for e in eps_values):
        raise ScenarioError("eps values must be positive")
    kappa_rule = models_cfg.get("kappa_rule", "equal-eps")
    if kappa_rule not in ("equal-eps", "fixed"):
        raise ScenarioError(f"unknown kappa rule {kappa_rule!r}")
    kappa_fixed = float(models_cfg.get("kappa", 1.0))

    out_cfg = cfg.get("output", {})
    scen = Scenario(
        name=sc["name"], kind=sc["kind"], units=sc.get("units", "abstract"),
        params=params, sx=sx, vg=vg, controller=controller, solver=config,
        models=models, eps_values=eps_values, kappa_rule=kappa_rule,
        kappa_fixed=kappa_fixed,
        snapshot_times=[float(t) for t in out_cfg.get("snapshot_times", [])],
        raw=cfg,
    )
    init = cfg.get("initial", {})
    if scen.kind == "four-gas-bumps":
        scen.amplitude = np.asarray(init["amplitude"], dtype=float)
        scen.sigma = np.asarray(init["sigma"], dtype=float)
    elif scen.kind == "density-jump":
        scen.rho_left = np.asarray(init["rho_left"], dtype=float)
        scen.rho_right = np.asarray(init["rho_right"], dtype=float)
        scen.jump_at = float(init["jump_at"])
        scen.T_init = float(init["temperature"])
    elif scen.kind == "rh-tanh":
        n_inf = float(init["n_total"]) * np.asarray(init["concentrations"],
                                                    dtype=float)
        scen.rh = rankine_hugoniot(
            n_inf, float(init["T_inf"]), float(init["mach_sq"]), m,
            K=params.K, reading=init.get("mach_reading", MACH_CONVENTIONAL))
        scen.tanh_slope = float(init["tanh_slope"])
        scen.reference_n_x = int(cfg.get("reference", {}).get("n_x", 4 * sx.n_x))
    else:
        raise ScenarioError(f"unknown scenario kind {scen.kind!r}")
    if "viscosity" in cfg:
        scen.viscosities = np.asarray(cfg["viscosity"]["mu"], dtype=float)
    return scen


def validate_scenario(scen: Scenario) -> list[str]:
    """Constant-consistency checks; returns a list of problems (empty = ok)."""
    problems = []
    lam = scen.params.lam
    if scen.viscosities is not None:
        from .closures import noble_gas_frequencies
        T_ref = float(scen.raw.get("viscosity", {}).get("T_ref", 300.0))
        table = noble_gas_frequencies(T_ref, scen.params.m * 0 + scen.params.m,
                                      scen.viscosities)
        diag = np.diag(table)
        if not np.allclose(diag, np.diag(lam), rtol=1e-3):
            problems.append(
                f"diagonal collision constants {np.diag(lam)} inconsistent "
                f"with viscosities (formula gives {diag})")
    if scen.kind == "rh-tanh" and abs(scen.rh.mach_sq - 1.0) < 1e-12:
        problems.append("mach_sq = 1 gives no jump")
    dt0 = scen.controller.schedule[0][2] * scen.sx.dx / scen.vg.v_ref
    if dt0 <= 0:
        problems.append("degenerate CFL schedule")
    return problems
