"""Acceptance suite: one test per shipped criterion, at the stated
tolerances, printing one PASS/FAIL line per criterion.

Heavy scenario executions (criteria 2, 6, 7, 9) run through the public
runner exactly as the CLI would drive them.  Criterion 2's large-eps window
is asserted as stated and is expected to fail: with the published collision
constants a gas at eps = 1e-1 undergoes well under one collision by the
final time, so the distance between the two shared-exchange-rate models is
non-monotone in eps there (see the repository notes); the other two
criterion-2 assertions hold.
"""

import time

import numpy as np
import pytest

from conftest import FOUR_LAMBDA, FOUR_MASSES, random_admissible
from mixbgk.discrepancy import (fit_loglog_slope, prop_error_terms,
                                shared_attractor_error_terms)
from mixbgk.grids import SpatialGrid, make_grids
from mixbgk.kinetic import SolverConfig, relax_implicit, step_dirk2, transport
from mixbgk.moments import compute_moments, conservation_totals
from mixbgk.ns_global import NSGlobalState, maccormack_solve, \
    spectral_derivative
from mixbgk.runner import kinetic_run, run_scenario
from mixbgk.scenarios import load_scenario
from mixbgk.state import BBGSP, MixtureParams, init_maxwellian_state
from riemann_oracle import profile as riemann_profile


def _report(criterion: str, checks: list):
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{name}={'ok' if good else 'FAIL'} ({info})"
                       for name, good, info in checks)
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} -- {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------
# 1. closed-form/definition equivalence of the leading error terms

def test_criterion_1_error_term_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(314159)
    checks = []
    for L in (2, 3, 4):
        params, n, u, T = random_admissible(rng, L, 10_000)
        et = prop_error_terms(n, u, T, params)
        scale_T = np.abs(et.e_T_def).max()
        d_T = np.abs(et.e_T - et.e_T_def).max()
        scale_u = scale_T / max(1.0, np.abs(T).max()) + np.abs(u).max()
        d_u = np.abs(et.e_u_def).max()
        eb = shared_attractor_error_terms(n, u, T, params)
        db_u = np.abs(eb.e_u - eb.e_u_def).max()
        db_T = np.abs(eb.e_T - eb.e_T_def).max()
        sb_u = np.abs(eb.e_u_def).max()
        sb_T = np.abs(eb.e_T_def).max()
        checks.append((f"L={L} E_T", d_T <= 1e-12 * scale_T,
                       f"{d_T:.2e} vs 1e-12*{scale_T:.2e}"))
        checks.append((f"L={L} E_u=0", d_u <= 1e-12 * scale_u,
                       f"{d_u:.2e}"))
        checks.append((f"L={L} Ebar_u", db_u <= 1e-12 * sb_u,
                       f"{db_u:.2e} vs 1e-12*{sb_u:.2e}"))
        checks.append((f"L={L} Ebar_T", db_T <= 1e-12 * sb_T,
                       f"{db_T:.2e} vs 1e-12*{sb_T:.2e}"))
    elapsed = time.time() - t0
    checks.append(("runtime<10s", elapsed < 10.0, f"{elapsed:.1f}s"))
    _report("1 appendix-identities", checks)


# ---------------------------------------------------------------------------
# 2. discrepancy scaling windows (reduced resolution)

def test_criterion_2_discrepancy_scaling(tmp_path):
    summary = run_scenario("discrepancy-4gas", tmp_path / "c2",
                           {"n_x": 100, "n_v": 40}, threads=2)
    ab = summary["pairs"]["aap-vs-bbgsp"]["final_distance"]
    ag = summary["pairs"]["aap-vs-gs"]["final_distance"]
    lo = [1e-4, 1e-5, 1e-6]
    hi = [1e-1, 1e-2, 1e-3]
    full = sorted(ab)
    s_lo = fit_loglog_slope(lo, [ab[e] for e in lo])
    s_hi = fit_loglog_slope(hi, [ab[e] for e in hi])
    s_gs = fit_loglog_slope(full, [ag[e] for e in full])
    checks = [
        ("aap-bbgsp slope[1e-4..1e-6] in [1.7,2.3]", 1.7 <= s_lo <= 2.3,
         f"{s_lo:.3f}"),
        ("aap-bbgsp slope[1e-1..1e-3] in [0.7,1.3]", 0.7 <= s_hi <= 1.3,
         f"{s_hi:.3f}; unattainable: distance saturates once collisions "
         f"are rare (see notes)"),
        ("aap-gs slope[full] in [0.7,1.3]", 0.7 <= s_gs <= 1.3, f"{s_gs:.3f}"),
    ]
    _report("2 discrepancy-scaling", checks)


# ---------------------------------------------------------------------------
# 3. conservation suite

def test_criterion_3_conservation_suite():
    scen = load_scenario("discrepancy-4gas")
    checks = []
    for model in ("aap", "gs", "bbgsp"):
        params = scen.params.with_scales(eps=1e-3, kappa=1e-3, model=model)
        state0 = scen.initial_state(1e-3, model)
        tot0 = conservation_totals(state0, params)
        final, _, _ = kinetic_run(scen, model, 1e-3, snapshot_times=[])
        tot1 = conservation_totals(final, params)
        mass = max(abs(a - b) / a for a, b in zip(tot0["mass"], tot1["mass"]))
        w, v = scen.vg.weights, scen.vg.nodes
        p_scale = sum(params.m[s]
                      * np.abs((state0.pairs[s].g1 * v) @ w).sum() * scen.sx.dx
                      for s in range(4))
        mom = abs(tot1["momentum"] - tot0["momentum"]) / p_scale
        ene = abs(tot1["energy"] - tot0["energy"]) / abs(tot0["energy"])
        checks.append((f"{model} mass", mass < 1e-12, f"{mass:.1e}"))
        checks.append((f"{model} momentum", mom < 1e-8, f"{mom:.1e}"))
        checks.append((f"{model} energy", ene < 1e-8, f"{ene:.1e}"))

    # homogeneous gs relaxation over 1e3 steps
    sx, vg = make_grids(-1.0, 1.0, 4, -15.0, 15.0, 60)
    params = scen.params.with_scales(eps=1.0, model="gs")
    n0 = 1.0 / params.m
    state = init_maxwellian_state(
        [(n0[s], [-2.0, -0.5, 0.5, 2.0][s], 25.0) for s in range(4)],
        params, sx, vg)
    t0 = conservation_totals(state, params)
    p_scale = sum(params.m[s] * n0[s] * 2.0 for s in range(4)) * sx.length
    for _ in range(1000):
        state = relax_implicit(state, 0.01, params)
    t1 = conservation_totals(state, params)
    dmom = abs(t1["momentum"] - t0["momentum"]) / p_scale
    dene = abs(t1["energy"] - t0["energy"]) / abs(t0["energy"])
    checks.append(("gs-homogeneous momentum", dmom < 1e-10, f"{dmom:.1e}"))
    checks.append(("gs-homogeneous energy", dene < 1e-10, f"{dene:.1e}"))
    _report("3 conservation-suite", checks)


# ---------------------------------------------------------------------------
# 4. positivity of the auxiliary temperatures

def test_criterion_4_positivity_suite():
    from mixbgk.closures import aap_aux, bbgsp_aux, gs_aux
    rng = np.random.default_rng(271828)
    checks = []
    for L in (2, 3, 4):
        params, n, u, T = random_admissible(rng, L, 10_000)
        _, Ts = aap_aux(n, u, T, params)
        _, Tb = gs_aux(n, u, T, params)
        _, Tp, *_ = bbgsp_aux(n, u, T, params)
        checks.append((f"L={L} T*_s>0", bool(np.all(Ts > 0)),
                       f"min {Ts.min():.3e}"))
        checks.append((f"L={L} T_bar>0", bool(np.all(Tb > 0)),
                       f"min {Tb.min():.3e}"))
        checks.append((f"L={L} T_sk>0", bool(np.all(Tp > 0)),
                       f"min {Tp.min():.3e}"))
    _report("4 positivity-suite", checks)


# ---------------------------------------------------------------------------
# 5. asymptotic-preserving limit checks

def test_criterion_5_ap_limits():
    checks = []
    sx, vg = make_grids(-1.0, 1.0, 4, -15.0, 15.0, 60)
    base = MixtureParams(m=FOUR_MASSES.copy(), lam=FOUR_LAMBDA.copy())
    n0 = 1.0 / base.m
    for model in ("aap", "gs", "bbgsp"):
        params = base.with_scales(eps=1e-8, kappa=1e-8, model=model)
        state = init_maxwellian_state(
            [(n0[s], [-0.5, -0.2, 0.2, 0.5][s], 30.0) for s in range(4)],
            params, sx, vg)
        out = relax_implicit(state, 1.0, params)
        mom = compute_moments(out, params)
        du = max(np.abs(sp.u - mom.u).max() for sp in mom.species)
        dT = max(np.abs(sp.T - mom.T).max() for sp in mom.species)
        checks.append((f"{model} one-step du", du < 1e-6, f"{du:.1e}"))
        checks.append((f"{model} one-step dT", dT < 1e-6, f"{dT:.1e}"))

    # equilibrium stationarity under full transport + relaxation steps
    sx2, vg2 = make_grids(-1.0, 1.0, 16, -15.0, 15.0, 60)
    T0 = 4.0 / n0.sum()
    params = base.with_scales(eps=1e-6, model=BBGSP)
    state = init_maxwellian_state([(n0[s], 0.4, T0) for s in range(4)],
                                  params, sx2, vg2)
    cfg = SolverConfig()
    out = state
    for _ in range(5):
        out = step_dirk2(out, 0.002, params, cfg)
    drift = max(np.abs(out.pairs[s].g1 - state.pairs[s].g1).max()
                / state.pairs[s].g1.max() for s in range(4))
    checks.append(("equilibrium stationary", drift < 1e-12, f"{drift:.1e}"))
    _report("5 ap-limits", checks)


# ---------------------------------------------------------------------------
# 6. kinetic vs NS agreement at reduced scale

def test_criterion_6_kinetic_vs_ns(tmp_path):
    checks = []
    s1 = run_scenario("ns-global-4gas", tmp_path / "c6g",
                      {"n_x": 250, "eps": [1e-4]}, threads=1)
    diffs = s1["l1_diff"]["0.0001"]
    worst = max(diffs.values())
    checks.append(("global fields < 2%", worst < 0.02,
                   f"max {worst:.2%} over {sorted(diffs)}"))
    s2 = run_scenario("ns-multi-4gas", tmp_path / "c6m",
                      {"n_x": 250, "eps": [1e-4]}, threads=1)
    diffs2 = {k: v for k, v in s2["l1_diff"]["0.0001"].items()
              if k.startswith(("u_", "T_"))}
    worst2 = max(diffs2.values())
    checks.append(("per-species u,T < 2%", worst2 < 0.02,
                   f"max {worst2:.2%}"))
    _report("6 kinetic-vs-ns", checks)


# ---------------------------------------------------------------------------
# 7. stationary shock (full resolution, long time)

@pytest.mark.slow
def test_criterion_7_stationary_shock(tmp_path):
    summary = run_scenario("ne-ar-stationary-shock", tmp_path / "c7", {},
                           threads=2)
    plateau = summary["plateau_rel_error"]
    worst_p = max(plateau.values())
    l1 = summary["l1_vs_reference"]
    worst_l1 = max(l1.values())
    checks = [
        ("plateaus match jump states to 1e-3", worst_p < 1e-3,
         f"max {worst_p:.2e}"),
        ("normalized profiles within 3% of reference", worst_l1 < 0.03,
         f"max {worst_l1:.2%}"),
    ]
    _report("7 stationary-shock", checks)


# ---------------------------------------------------------------------------
# 8. numerical-methods checks

def test_criterion_8_numerics():
    checks = []
    # spectral derivative exact on resolvable modes
    n = 64
    x = -1.0 + 2.0 * np.arange(n) / n
    err = np.abs(spectral_derivative(np.sin(np.pi * x), 1, 2.0)
                 - np.pi * np.cos(np.pi * x)).max()
    checks.append(("spectral exact", err < 1e-12, f"{err:.1e}"))

    # rk4 observed order 4 on a linear system
    a = -1.4
    errs = []
    for steps in (8, 16):
        y = 1.0
        dt = 1.0 / steps
        for _ in range(steps):
            k1 = a * y
            k2 = a * (y + 0.5 * dt * k1)
            k3 = a * (y + 0.5 * dt * k2)
            k4 = a * (y + dt * k3)
            y += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        errs.append(abs(y - np.exp(a)))
    rate = np.log2(errs[0] / errs[1])
    checks.append(("rk4 order 4", rate > 3.6, f"rate {rate:.2f}"))

    # dirk2 observed order >= 2 (lockstep refinement, exact main transport)
    from test_kinetic import _lockstep_run, _restrict
    params = MixtureParams(m=np.array([1.0]), lam=np.array([[1.5]]), eps=1.0)
    ref = _lockstep_run("dirk2", 256, params, 0.25)
    errs = [np.abs(_lockstep_run("dirk2", nn, params, 0.25)
                   - _restrict(ref, 256 // nn)).max() for nn in (32, 64, 128)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    checks.append(("dirk2 order >= 2", rates.min() > 1.65,
                   f"rates {np.round(rates, 2)}"))

    # transport exact-period return
    sx, vg = make_grids(-1.0, 1.0, 64, -8.0, 8.0, 16)
    params1 = MixtureParams(m=np.array([1.0]), lam=np.array([[1.0]]))
    state = init_maxwellian_state(
        [(1.2 + 0.5 * np.sin(np.pi * sx.centers), 0.0, 1.0)], params1, sx, vg)
    g0 = state.pairs[0].g1.copy()
    for _ in range(4 * sx.n_x):
        state = transport(state, sx.dx / 4.0, "pp3")
    rel = np.abs(state.pairs[0].g1 - g0).max() / g0.max()
    checks.append(("transport period return", rel < 1e-2, f"{rel:.1e}"))

    # maccormack vs exact riemann structure (weak shock, eps = 0)
    sxm = SpatialGrid(-0.5, 0.5, 400, bc="free-flow")
    xm = sxm.centers
    nr, Tr = 0.5, 0.8
    st = NSGlobalState(np.where(xm < 0, 1.0, nr)[None, :],
                       np.zeros_like(xm), np.where(xm < 0, 1.0, Tr))
    out, _ = maccormack_solve(st, 0.0, np.array([1.0]), np.array([[1.0]]),
                              1.0, sxm, 0.15, cfl=0.4)
    rho_e, _, _ = riemann_profile(xm, 0.15, (1.0, 0.0, 1.0),
                                  (nr, 0.0, nr * Tr), 5.0 / 3.0)
    l1 = np.abs(out.n[0] - rho_e).sum() / rho_e.sum()
    checks.append(("maccormack riemann", l1 < 0.02, f"L1 {l1:.2%}"))
    _report("8 numerical-methods", checks)


# ---------------------------------------------------------------------------
# 9. light-species separation and the multi-field Euler limit

@pytest.mark.slow
def test_criterion_9_he_ar(tmp_path):
    summary = run_scenario("he-ar-shock", tmp_path / "c9", {}, threads=3)
    dev = summary["light_species_deviation"]
    ratio_u = dev["0.001"]["u"] / dev["1e-05"]["u"]
    ratio_T = dev["0.001"]["T"] / dev["1e-05"]["T"]
    l1 = summary["l1_vs_euler_multi"]["1e-05"]
    worst = max(l1.values())
    checks = [
        ("He u deviation ratio > 5", ratio_u > 5.0, f"{ratio_u:.1f}x"),
        ("He T deviation ratio > 5", ratio_T > 5.0, f"{ratio_T:.1f}x"),
        ("eps=1e-5 vs multi Euler < 3%", worst < 0.03, f"max {worst:.2%}"),
    ]
    _report("9 he-ar-separation", checks)
