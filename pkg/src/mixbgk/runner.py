"""Scenario execution: model/eps matrices, reference solves, artifact bundle.

One call to run_scenario produces, in the output directory:
  manifest.json   config echo, solver info, conservation ledger, wall time
  summary.json    distances, fitted slopes, plateau errors (task-dependent)
  *.csv           field snapshots (one file per species and field) and the
                  scaling-study table

Matrix entries (one per eps value) are independent jobs; with threads > 1
they run in separate processes.  Single-threaded runs are bitwise
reproducible.
"""

from __future__ import annotations

import dataclasses
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .discrepancy import fit_loglog_slope, l1_relative_distance
from .grids import SpatialGrid, VelocityGrid
from .kinetic import PinnedBoundary, TimeController, advance
from .moments import compute_moments, conservation_totals
from .ns_global import NSGlobalState, maccormack_solve, spectral_solve
from .ns_multi import NSMultiState, maccormack_multi_solve, \
    spectral_multi_solve
from .runio import Manifest, write_field_csv, write_json, write_scaling_csv
from .scenarios import Scenario, load_scenario
from .state import AAP, BBGSP, GS, KineticState, init_maxwellian_state


class RunError(RuntimeError):
    pass


def apply_overrides(scen: Scenario, overrides: dict) -> Scenario:
    """Grid/eps/model/t_end overrides for reduced-scale reruns."""
    if not overrides:
        return scen
    scen = dataclasses.replace(scen)
    if overrides.get("n_x") or overrides.get("n_v"):
        sx = scen.sx
        vg = scen.vg
        scen.sx = SpatialGrid(sx.x_min, sx.x_max,
                              int(overrides.get("n_x") or sx.n_x), sx.bc)
        scen.vg = VelocityGrid(vg.v_min, vg.v_max,
                               int(overrides.get("n_v") or vg.n_v))
    if overrides.get("eps"):
        scen.eps_values = [float(e) for e in overrides["eps"]]
    if overrides.get("kappa") is not None:
        scen.kappa_rule = "fixed"
        scen.kappa_fixed = float(overrides["kappa"])
    if overrides.get("models"):
        scen.models = list(overrides["models"])
    if overrides.get("t_end"):
        t_end = float(overrides["t_end"])
        sched = [(t0, min(t1, t_end), c)
                 for t0, t1, c in scen.controller.schedule if t0 < t_end]
        sched[-1] = (sched[-1][0], t_end, sched[-1][2])
        scen.controller = TimeController(tuple(sched), t_end)
        scen.snapshot_times = [t for t in scen.snapshot_times if t <= t_end]
        if t_end not in scen.snapshot_times:
            scen.snapshot_times.append(t_end)
    return scen


def _load(job_src, overrides) -> Scenario:
    return apply_overrides(load_scenario(job_src), overrides)


def kinetic_run(scen: Scenario, model: str, eps: float,
                snapshot_times=None) -> tuple[KineticState, dict, list]:
    """One kinetic solve; returns (final state, snapshots, ledger rows)."""
    params = scen.params.with_scales(eps=eps, kappa=scen.kappa_for(eps),
                                     model=model)
    state = scen.initial_state(eps, model)
    pinned = None
    if scen.sx.bc == "inflow-outflow":
        left, right = scen.boundary_plateau_states()
        left_state = init_maxwellian_state(left, params, _one_cell(scen.sx),
                                           scen.vg)
        right_state = init_maxwellian_state(right, params, _one_cell(scen.sx),
                                            scen.vg)
        pinned = PinnedBoundary.from_states(left_state, right_state)
    times = scen.snapshot_times if snapshot_times is None else snapshot_times
    ledger = [{"label": f"{model} eps={eps:g}", "t": 0.0,
               **conservation_totals(state, params)}]
    final, snaps = advance(state, params, scen.controller, scen.solver,
                           pinned=pinned, snapshot_times=times)
    ledger.append({"label": f"{model} eps={eps:g}",
                   "t": scen.controller.t_end,
                   **conservation_totals(final, params)})
    return final, snaps, ledger


def _one_cell(sx: SpatialGrid) -> SpatialGrid:
    return SpatialGrid(sx.x_min, sx.x_min + sx.dx, 4, sx.bc)


def moment_profiles(state: KineticState, scen: Scenario, eps: float,
                    model: str) -> dict:
    params = scen.params.with_scales(eps=eps, kappa=scen.kappa_for(eps),
                                     model=model)
    mom = compute_moments(state, params)
    out = {"x": scen.sx.centers, "u_global": mom.u, "T_global": mom.T}
    for s, sp in enumerate(mom.species):
        out[f"n_{s + 1}"] = sp.n
        out[f"rho_{s + 1}"] = params.m[s] * sp.n
        out[f"u_{s + 1}"] = sp.u
        out[f"T_{s + 1}"] = sp.T
    return out


def _write_profiles(out_dir: Path, label: str, t: float, units: str,
                    profiles: dict) -> None:
    x = profiles["x"]
    for key, val in profiles.items():
        if key == "x":
            continue
        parts = key.rsplit("_", 1)
        field, species = parts[0], parts[1]
        write_field_csv(out_dir / f"{label}__{field}_s{species}_t{t:g}.csv",
                        field, species, t, units, x, val)


# ---------------------------------------------------------------------------
# per-task drivers

def _discrepancy_job(args):
    job_src, overrides, eps = args
    scen = _load(job_src, overrides)
    times = scen.snapshot_times
    snaps = {}
    ledger = []
    for model in scen.models:
        _, model_snaps, rows = kinetic_run(scen, model, eps)
        snaps[model] = model_snaps
        ledger.extend(rows)
    dist = {}
    for other in (BBGSP, GS):
        if AAP in snaps and other in snaps:
            dist[f"aap-vs-{other}"] = np.array(
                [l1_relative_distance(snaps[AAP][t], snaps[other][t])
                 for t in times])
    profiles = {model: moment_profiles(snaps[model][times[-1]], scen, eps,
                                       model) for model in scen.models}
    return eps, dist, profiles, ledger


def run_discrepancy(scen: Scenario, out_dir: Path, job_src, overrides,
                    threads: int) -> dict:
    times = scen.snapshot_times
    jobs = [(job_src, overrides, eps) for eps in scen.eps_values]
    results = _pmap(_discrepancy_job, jobs, threads)
    all_dist = {}
    ledger = []
    for eps, dist, profiles, rows in results:
        ledger.extend(rows)
        for pair, table in dist.items():
            all_dist.setdefault(pair, {})[eps] = table
        for model, prof in profiles.items():
            _write_profiles(out_dir, f"{model}_eps{eps:.0e}", times[-1],
                            scen.units, prof)
    summary = {"eps": scen.eps_values, "pairs": {}}
    windows = scen.raw.get("output", {}).get("slope_windows",
                                             [[1e-1, 1e-3], [1e-4, 1e-6]])
    for pair, table in all_dist.items():
        write_scaling_csv(out_dir / f"scaling__{pair.replace(' ', '')}.csv",
                          scen.eps_values, times, table, scen.params.L)
        finals = {eps: float(table[eps][-1].mean()) for eps in scen.eps_values}
        entry = {"final_distance": finals, "slopes": {}}
        for lo, hi in windows:
            win = [e for e in scen.eps_values
                   if min(lo, hi) <= e <= max(lo, hi)]
            if len(win) >= 2:
                entry["slopes"][f"[{min(lo, hi):g},{max(lo, hi):g}]"] = \
                    fit_loglog_slope(win, [finals[e] for e in win])
        summary["pairs"][pair] = entry
    return {"summary": summary, "ledger": ledger}


def _ns_global_job(args):
    job_src, overrides, eps = args
    scen = _load(job_src, overrides)
    t_end = scen.controller.t_end
    final, _, ledger = kinetic_run(scen, BBGSP, eps, snapshot_times=[])
    prof_kin = moment_profiles(final, scen, eps, BBGSP)
    ns0 = _ns_global_initial(scen)
    ns, _ = spectral_solve(ns0, eps, scen.params.m, scen.params.lam,
                           scen.params.K, scen.sx, t_end)
    diffs = _global_field_diffs(prof_kin, ns, scen.params.m)
    coeffs = transport_coefficient_table(ns, scen)
    return eps, prof_kin, ns, diffs, coeffs, ledger


def transport_coefficient_table(ns: NSGlobalState, scen: Scenario) -> dict:
    """Viscosity, conductivity and the Fick matrix over x, plus the
    symmetry defect of the Fick matrix (diagnostic only)."""
    from .ns_global import FICK_AAP, fick_matrix, transport_coeffs

    m, lam, K = scen.params.m, scen.params.lam, scen.params.K
    mu, cond = transport_coeffs(ns.n, ns.T, m, K, lam)
    cols = {"x": scen.sx.centers, "mu": mu, "lambda": cond}
    L_fick = fick_matrix(FICK_AAP, ns.n, m, lam, K)
    Lmat = np.moveaxis(L_fick, (-2, -1), (0, 1))
    for s in range(scen.params.L):
        for k in range(scen.params.L):
            cols[f"L_{s + 1}{k + 1}"] = Lmat[s, k]
    asym = np.abs(Lmat - np.swapaxes(Lmat, 0, 1)).max(axis=(0, 1))
    scale = np.abs(Lmat).max(axis=(0, 1))
    cols["fick_symmetry_defect"] = asym / np.where(scale > 0, scale, 1.0)
    return cols


def _ns_global_initial(scen: Scenario) -> NSGlobalState:
    fields = scen.initial_fields()
    n = np.stack([np.broadcast_to(f[0], (scen.sx.n_x,)) for f in fields])
    u_sp = np.stack([np.broadcast_to(f[1], (scen.sx.n_x,)) for f in fields])
    T_sp = np.stack([np.broadcast_to(f[2], (scen.sx.n_x,)) for f in fields])
    m = scen.params.m
    rho = m[:, None] * n
    u = (rho * u_sp).sum(axis=0) / rho.sum(axis=0)
    e = (3.0 * n * scen.params.K * T_sp
         + rho * (u_sp - u) ** 2).sum(axis=0)
    T = e / (3.0 * scen.params.K * n.sum(axis=0))
    return NSGlobalState(n, u, T)


def _ns_multi_initial(scen: Scenario) -> NSMultiState:
    fields = scen.initial_fields()
    n = np.stack([np.broadcast_to(f[0], (scen.sx.n_x,)) for f in fields])
    u = np.stack([np.broadcast_to(f[1], (scen.sx.n_x,)) for f in fields])
    T = np.stack([np.broadcast_to(f[2], (scen.sx.n_x,)) for f in fields])
    return NSMultiState(n, u, T)


def _rel_l1(a, b) -> float:
    ref = np.abs(a).sum()
    return float(np.abs(a - b).sum() / ref) if ref > 0 else 0.0


def _global_field_diffs(prof_kin: dict, ns: NSGlobalState, m) -> dict:
    diffs = {"u": _rel_l1_centered(prof_kin["u_global"], ns.u),
             "T": _rel_l1(prof_kin["T_global"], ns.T)}
    for s in range(len(m)):
        diffs[f"rho_{s + 1}"] = _rel_l1(prof_kin[f"rho_{s + 1}"],
                                        m[s] * ns.n[s])
    return diffs


def _rel_l1_centered(a, b) -> float:
    # velocity fields can pass through zero; normalize by the larger of the
    # reference L1 mass and its span so the ratio stays meaningful
    ref = max(np.abs(a).sum(), (a.max() - a.min()) * a.size * 0.5, 1e-300)
    return float(np.abs(a - b).sum() / ref)


def run_ns_global(scen: Scenario, out_dir: Path, job_src, overrides,
                  threads: int) -> dict:
    t_end = scen.controller.t_end
    jobs = [(job_src, overrides, eps) for eps in scen.eps_values]
    results = _pmap(_ns_global_job, jobs, threads)
    summary = {"eps": scen.eps_values, "l1_diff": {},
               "fick_symmetry_defect": {}}
    ledger = []
    for eps, prof_kin, ns, diffs, coeffs, rows in results:
        ledger.extend(rows)
        _write_profiles(out_dir, f"bbgsp_eps{eps:.0e}", t_end, scen.units,
                        prof_kin)
        prof_ns = {"x": scen.sx.centers, "u_global": ns.u, "T_global": ns.T}
        for s in range(scen.params.L):
            prof_ns[f"n_{s + 1}"] = ns.n[s]
            prof_ns[f"rho_{s + 1}"] = scen.params.m[s] * ns.n[s]
        _write_profiles(out_dir, f"nsglobal_eps{eps:.0e}", t_end, scen.units,
                        prof_ns)
        from .runio import write_table_csv
        write_table_csv(out_dir / f"coefficients_eps{eps:.0e}.csv",
                        f"# field=transport-coefficients t={t_end:g} "
                        f"units={scen.units}", coeffs)
        summary["l1_diff"][f"{eps:g}"] = diffs
        summary["fick_symmetry_defect"][f"{eps:g}"] = \
            float(np.max(coeffs["fick_symmetry_defect"]))
    return {"summary": summary, "ledger": ledger}


def _ns_multi_job(args):
    job_src, overrides, eps = args
    scen = _load(job_src, overrides)
    t_end = scen.controller.t_end
    kappa = scen.kappa_for(eps)
    final, _, ledger = kinetic_run(scen, BBGSP, eps, snapshot_times=[])
    prof_kin = moment_profiles(final, scen, eps, BBGSP)
    ns0 = _ns_multi_initial(scen)
    ns, _ = spectral_multi_solve(ns0, eps, kappa, scen.params.m,
                                 scen.params.lam, scen.params.K, scen.sx,
                                 t_end)
    diffs = {}
    for s in range(scen.params.L):
        diffs[f"u_{s + 1}"] = _rel_l1_centered(prof_kin[f"u_{s + 1}"], ns.u[s])
        diffs[f"T_{s + 1}"] = _rel_l1(prof_kin[f"T_{s + 1}"], ns.T[s])
        diffs[f"n_{s + 1}"] = _rel_l1(prof_kin[f"n_{s + 1}"], ns.n[s])
    return eps, prof_kin, ns, diffs, ledger


def run_ns_multi(scen: Scenario, out_dir: Path, job_src, overrides,
                 threads: int) -> dict:
    t_end = scen.controller.t_end
    jobs = [(job_src, overrides, eps) for eps in scen.eps_values]
    results = _pmap(_ns_multi_job, jobs, threads)
    summary = {"eps": scen.eps_values, "kappa_rule": scen.kappa_rule,
               "l1_diff": {}}
    ledger = []
    for eps, prof_kin, ns, diffs, rows in results:
        ledger.extend(rows)
        _write_profiles(out_dir, f"bbgsp_eps{eps:.0e}", t_end, scen.units,
                        prof_kin)
        prof_ns = {"x": scen.sx.centers}
        for s in range(scen.params.L):
            prof_ns[f"n_{s + 1}"] = ns.n[s]
            prof_ns[f"u_{s + 1}"] = ns.u[s]
            prof_ns[f"T_{s + 1}"] = ns.T[s]
        _write_profiles(out_dir, f"nsmulti_eps{eps:.0e}", t_end, scen.units,
                        prof_ns)
        summary["l1_diff"][f"{eps:g}"] = diffs
    return {"summary": summary, "ledger": ledger}


def _euler_job(args):
    job_src, overrides, eps = args
    scen = _load(job_src, overrides)
    t_end = scen.controller.t_end
    m, lam, K = scen.params.m, scen.params.lam, scen.params.K
    final, _, ledger = kinetic_run(scen, BBGSP, eps, snapshot_times=[])
    prof_kin = moment_profiles(final, scen, eps, BBGSP)
    # multi-field Euler companion (eps_ns = 0, same kappa)
    multi0 = _ns_multi_initial(scen)
    multi, _ = maccormack_multi_solve(multi0, 0.0, scen.kappa_for(eps), m,
                                      lam, K, scen.sx, t_end, cfl=0.45)
    dev_u = float(np.abs(prof_kin["u_1"] - prof_kin["u_global"]).max())
    dev_T = float(np.abs(prof_kin["T_1"] - prof_kin["T_global"]).max())
    diffs = {}
    for s in range(scen.params.L):
        diffs[f"n_{s + 1}"] = _rel_l1(prof_kin[f"n_{s + 1}"], multi.n[s])
        diffs[f"u_{s + 1}"] = _rel_l1_centered(prof_kin[f"u_{s + 1}"],
                                               multi.u[s])
        diffs[f"T_{s + 1}"] = _rel_l1(prof_kin[f"T_{s + 1}"], multi.T[s])
    return eps, prof_kin, multi, dev_u, dev_T, diffs, ledger


def run_euler_compare(scen: Scenario, out_dir: Path, job_src, overrides,
                      threads: int) -> dict:
    t_end = scen.controller.t_end
    m, lam, K = scen.params.m, scen.params.lam, scen.params.K
    jobs = [(job_src, overrides, eps) for eps in scen.eps_values]
    results = _pmap(_euler_job, jobs, threads)
    # shared-field Euler companion does not depend on eps: run once
    glob0 = _ns_global_initial(scen)
    glob, _ = maccormack_solve(glob0, 0.0, m, lam, K, scen.sx, t_end, cfl=0.45)
    prof_glob = {"x": scen.sx.centers, "u_global": glob.u, "T_global": glob.T}
    for s in range(scen.params.L):
        prof_glob[f"n_{s + 1}"] = glob.n[s]
    _write_profiles(out_dir, "eulerglobal", t_end, scen.units, prof_glob)
    summary = {"eps": scen.eps_values, "light_species_deviation": {},
               "l1_vs_euler_multi": {}}
    ledger = []
    for eps, prof_kin, multi, dev_u, dev_T, diffs, rows in results:
        ledger.extend(rows)
        _write_profiles(out_dir, f"bbgsp_eps{eps:.0e}", t_end, scen.units,
                        prof_kin)
        prof_multi = {"x": scen.sx.centers}
        for s in range(scen.params.L):
            prof_multi[f"n_{s + 1}"] = multi.n[s]
            prof_multi[f"u_{s + 1}"] = multi.u[s]
            prof_multi[f"T_{s + 1}"] = multi.T[s]
        _write_profiles(out_dir, f"eulermulti_kappa{eps:.0e}", t_end,
                        scen.units, prof_multi)
        summary["light_species_deviation"][f"{eps:g}"] = {"u": dev_u,
                                                          "T": dev_T}
        summary["l1_vs_euler_multi"][f"{eps:g}"] = diffs
    return {"summary": summary, "ledger": ledger}


def _stationary_kinetic_job(args):
    job_src, overrides, eps = args
    scen = _load(job_src, overrides)
    final, _, ledger = kinetic_run(scen, BBGSP, eps, snapshot_times=[])
    return moment_profiles(final, scen, eps, BBGSP), ledger


def _stationary_reference_job(args):
    job_src, overrides, eps = args
    scen = _load(job_src, overrides)
    n_x = scen.reference_n_x
    ref_sx = SpatialGrid(scen.sx.x_min, scen.sx.x_max, n_x, scen.sx.bc)
    ref_scen = dataclasses.replace(scen, sx=ref_sx)
    ns0 = _ns_global_initial(ref_scen)
    rh = scen.rh
    left = NSGlobalState(np.repeat(rh.n_left[:, None], n_x, axis=1),
                         np.full(n_x, rh.u_left), np.full(n_x, rh.T_left))
    right = NSGlobalState(np.repeat(rh.n_right[:, None], n_x, axis=1),
                          np.full(n_x, rh.u_right), np.full(n_x, rh.T_right))
    ns, _ = maccormack_solve(ns0, eps, scen.params.m, scen.params.lam,
                             scen.params.K, ref_sx, scen.controller.t_end,
                             cfl=0.45, boundary_states=(left, right))
    return ref_sx.centers, ns


def run_stationary_shock(scen: Scenario, out_dir: Path, job_src, overrides,
                         threads: int) -> dict:
    eps = scen.eps_values[0]
    t_end = scen.controller.t_end
    rh = scen.rh
    jobs = [(_stationary_kinetic_job, (job_src, overrides, eps)),
            (_stationary_reference_job, (job_src, overrides, eps))]
    if threads > 1:
        with _pool(2) as ex:
            futs = [ex.submit(fn, arg) for fn, arg in jobs]
            (prof_kin, ledger), (x_ref, ns) = [f.result() for f in futs]
    else:
        prof_kin, ledger = _stationary_kinetic_job(jobs[0][1])
        x_ref, ns = _stationary_reference_job(jobs[1][1])

    _write_profiles(out_dir, f"bbgsp_eps{eps:.0e}", t_end, scen.units,
                    prof_kin)
    prof_ref = {"x": x_ref, "u_global": ns.u, "T_global": ns.T}
    for s in range(scen.params.L):
        prof_ref[f"n_{s + 1}"] = ns.n[s]
    _write_profiles(out_dir, "maccormack_ref", t_end, scen.units, prof_ref)

    # normalized fields n_s/n_s_inf, u/u_inf, T/T_inf (downstream reference)
    x = scen.sx.centers
    norm_kin = {"x": x, "u_norm_global": prof_kin["u_global"] / rh.u_right,
                "T_norm_global": prof_kin["T_global"] / rh.T_right}
    for s in range(scen.params.L):
        norm_kin[f"n_norm_{s + 1}"] = prof_kin[f"n_{s + 1}"] / rh.n_right[s]
    _write_profiles(out_dir, "bbgsp_normalized", t_end, "dimensionless",
                    norm_kin)

    # plateau match: edge eighth of the domain on each side
    edge = max(4, scen.sx.n_x // 8)
    plateau = {}
    for s in range(scen.params.L):
        nk = prof_kin[f"n_{s + 1}"]
        plateau[f"n_{s + 1}_left"] = _plateau_err(nk[:edge], rh.n_left[s])
        plateau[f"n_{s + 1}_right"] = _plateau_err(nk[-edge:], rh.n_right[s])
    plateau["u_left"] = _plateau_err(prof_kin["u_global"][:edge], rh.u_left)
    plateau["u_right"] = _plateau_err(prof_kin["u_global"][-edge:], rh.u_right)
    plateau["T_left"] = _plateau_err(prof_kin["T_global"][:edge], rh.T_left)
    plateau["T_right"] = _plateau_err(prof_kin["T_global"][-edge:], rh.T_right)

    # normalized kinetic vs reference on the kinetic grid
    ratio = scen.reference_n_x // scen.sx.n_x
    if ratio * scen.sx.n_x == scen.reference_n_x and ratio > 1:
        coarsen = lambda f: f.reshape(-1, ratio).mean(axis=1)
    else:
        coarsen = lambda f: np.interp(x, x_ref, f)
    l1 = {"u": _rel_l1(prof_kin["u_global"] / rh.u_right,
                       coarsen(ns.u) / rh.u_right),
          "T": _rel_l1(prof_kin["T_global"] / rh.T_right,
                       coarsen(ns.T) / rh.T_right)}
    for s in range(scen.params.L):
        l1[f"n_{s + 1}"] = _rel_l1(prof_kin[f"n_{s + 1}"] / rh.n_right[s],
                                   coarsen(ns.n[s]) / rh.n_right[s])
    summary = {"eps": eps, "rh_states": {
        "left": {"n": rh.n_left, "u": rh.u_left, "T": rh.T_left},
        "right": {"n": rh.n_right, "u": rh.u_right, "T": rh.T_right},
        "c_inf": rh.c_inf, "mach_sq": rh.mach_sq},
        "plateau_rel_error": plateau, "l1_vs_reference": l1}
    return {"summary": summary, "ledger": ledger}


def _plateau_err(values: np.ndarray, target: float) -> float:
    return float(np.abs(values - target).max() / abs(target))


_TASKS = {
    "model-discrepancy": run_discrepancy,
    "ns-global-compare": run_ns_global,
    "ns-multi-compare": run_ns_multi,
    "euler-compare": run_euler_compare,
    "stationary-shock": run_stationary_shock,
}


def _pool(workers: int) -> ProcessPoolExecutor:
    # spawn: fork is unsafe once the numba threading runtime is live
    return ProcessPoolExecutor(max_workers=workers,
                               mp_context=multiprocessing.get_context("spawn"))


def _pmap(fn, jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with _pool(min(threads, len(jobs))) as ex:
        return list(ex.map(fn, jobs))


def run_scenario(src: str, out_dir, overrides: dict | None = None,
                 threads: int = 1) -> dict:
    """Execute a scenario by name or config path; returns the summary."""
    overrides = overrides or {}
    scen = _load(src, overrides)
    task = scen.raw["scenario"].get("task")
    if task not in _TASKS:
        raise RunError(f"scenario {scen.name!r} has unknown task {task!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(scen.name, scen.raw, {
        "stepper": scen.solver.stepper,
        "reconstruction": scen.solver.reconstruction,
        "version": __version__, "threads": threads,
        "overrides": overrides,
    })
    result = _TASKS[task](scen, out_dir, src, overrides, threads)
    for row in result.get("ledger", []):
        manifest.record_totals(row.pop("label"), row.pop("t"), row)
    manifest.write(out_dir / "manifest.json")
    write_json(out_dir / "summary.json", result["summary"])
    return result["summary"]
