"""Semi-Lagrangian time integration of the mixture relaxation systems.

A step is transport along characteristics (conservative shift remap per
velocity node) composed with stiff implicit relaxation.  The implicit solve
never iterates: the attractor moments of all three models are affine first
in the velocities and then, once velocities are known, in the temperatures,
so the post-relaxation moments come from two L x L linear systems per cell.
The distribution update is then a closed-form blend with the attractor
evaluated at those moments, which is what makes the scheme asymptotic
preserving: as eps -> 0 the update lands on the local equilibrium of the
conserved moments with no time-step restriction.

Steppers: be1 (backward Euler relaxation after full transport) and dirk2
(two-stage stiffly accurate L-stable diagonally-implicit scheme along
characteristics, gamma = 1 - 1/sqrt(2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closures import build_attractor, compute_closure
from .grids import INFLOW_OUTFLOW, PERIODIC, SpatialGrid, VelocityGrid
from .moments import compute_moments
from .reconstruct import PP3, required_ghost, shift_ghosted, shift_periodic
from .state import AAP, BBGSP, GS, ChuPair, KineticState, MixtureParams

BE1 = "be1"
DIRK2 = "dirk2"
_DIRK_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    stepper: str = DIRK2
    reconstruction: str = PP3


@dataclass(frozen=True)
class TimeController:
    """CFL schedule: list of (t_start, t_end, cfl) covering [0, t_end]."""

    schedule: tuple
    t_end: float

    @staticmethod
    def constant(cfl: float, t_end: float) -> "TimeController":
        return TimeController(((0.0, t_end, cfl),), t_end)

    def dt_nominal(self, cfl: float, sx: SpatialGrid, vg: VelocityGrid) -> float:
        return cfl * sx.dx / vg.v_ref

    def build_steps(self, sx: SpatialGrid, vg: VelocityGrid,
                    breaks=()) -> list[tuple[float, float]]:
        """(t, dt) pairs; segment ends and requested break times are hit
        exactly by stretching nstep counts, never individual steps."""
        cuts = sorted({0.0, self.t_end, *(b for b in breaks if 0.0 < b < self.t_end),
                       *(t for seg in self.schedule for t in seg[:2]
                         if 0.0 <= t <= self.t_end)})
        steps = []
        for t0, t1 in zip(cuts[:-1], cuts[1:]):
            cfl = None
            for s0, s1, c in self.schedule:
                if s0 <= t0 and t1 <= s1 + 1e-15 * max(1.0, abs(s1)):
                    cfl = c
                    break
            if cfl is None:
                raise SolverError(f"CFL schedule does not cover [{t0}, {t1}]")
            dt_nom = self.dt_nominal(cfl, sx, vg)
            n = max(1, math.ceil((t1 - t0) / dt_nom * (1.0 - 1e-12)))
            dt = (t1 - t0) / n
            steps.extend((t0 + i * dt, dt) for i in range(n))
        return steps


@dataclass
class PinnedBoundary:
    """Frozen inflow/outflow ghost columns per species: (g1, g2) rows."""

    left_g1: list[np.ndarray]
    left_g2: list[np.ndarray]
    right_g1: list[np.ndarray]
    right_g2: list[np.ndarray]

    @staticmethod
    def from_states(left: KineticState, right: KineticState) -> "PinnedBoundary":
        return PinnedBoundary(
            [p.g1[0].copy() for p in left.pairs],
            [p.g2[0].copy() for p in left.pairs],
            [p.g1[-1].copy() for p in right.pairs],
            [p.g2[-1].copy() for p in right.pairs],
        )


def _advect_field(f_xv: np.ndarray, dt: float, sx: SpatialGrid, vg: VelocityGrid,
                  method: str, left_col=None, right_col=None) -> np.ndarray:
    """Shift an (x, v) field along x by v*dt per velocity node."""
    arr = np.ascontiguousarray(f_xv.T)  # (v, x)
    c = vg.nodes * (dt / sx.dx)
    if sx.bc == PERIODIC:
        out = shift_periodic(arr, c, method)
        return np.ascontiguousarray(out.T)
    ghost = required_ghost(c)
    n_x = sx.n_x
    ext = np.empty((arr.shape[0], n_x + 2 * ghost))
    ext[:, ghost:ghost + n_x] = arr
    if sx.bc == INFLOW_OUTFLOW:
        if left_col is None or right_col is None:
            raise SolverError("inflow-outflow transport needs pinned columns")
        ext[:, :ghost] = np.asarray(left_col)[:, None]
        ext[:, ghost + n_x:] = np.asarray(right_col)[:, None]
    else:  # free-flow: zeroth-order extrapolation
        ext[:, :ghost] = arr[:, :1]
        ext[:, ghost + n_x:] = arr[:, -1:]
    out = shift_ghosted(ext, c, n_x, ghost, method)
    return np.ascontiguousarray(out.T)


def transport(state: KineticState, dt: float, method: str = PP3,
              pinned: PinnedBoundary | None = None) -> KineticState:
    """Free-streaming step: g(x) <- R[g](x - v dt) for both pair members."""
    pairs = []
    for s, pair in enumerate(state.pairs):
        lg1 = pinned.left_g1[s] if pinned else None
        rg1 = pinned.right_g1[s] if pinned else None
        lg2 = pinned.left_g2[s] if pinned else None
        rg2 = pinned.right_g2[s] if pinned else None
        pairs.append(ChuPair(
            _advect_field(pair.g1, dt, state.sx, state.vg, method, lg1, rg1),
            _advect_field(pair.g2, dt, state.sx, state.vg, method, lg2, rg2),
        ))
    return KineticState(pairs, state.sx, state.vg)


def pair_inverse_scales(params: MixtureParams) -> np.ndarray:
    """Per-pair stiffness prefactors w_sk: 1/eps intra, 1/kappa inter.

    Only the bi-species model carries the split scaling; the single-attractor
    models relax at nu_s/eps uniformly.
    """
    L = params.L
    if params.model == BBGSP:
        w = np.full((L, L), 1.0 / params.kappa)
        np.fill_diagonal(w, 1.0 / params.eps)
        return w
    return np.full((L, L), 1.0 / params.eps)


def moment_solve(n: np.ndarray, u: np.ndarray, T: np.ndarray, h: float,
                 params: MixtureParams):
    """Implicitly updated (u', T') of the relaxation step of size h.

    n, u, T have shape (L, M).  Densities are unchanged by relaxation and so
    is every quantity the models conserve (built into the linear systems:
    the exchange coefficients are pairwise symmetric).
    """
    from .closures import collision_frequencies, exchange_coefficients, \
        pair_mass_coefficients

    L, M = n.shape
    m, K = params.m, params.K
    w_pair = pair_inverse_scales(params)
    nu_s, nu_pair = collision_frequencies(n, params.lam)
    eye = np.eye(L)

    if params.model == BBGSP:
        c_pair = nu_pair * w_pair[:, :, None]          # (L, L, M)
        C = c_pair.sum(axis=1)                         # (L, M)
        a, b, gamma = pair_mass_coefficients(m)
        psi = c_pair * a[:, :, None]
        psi += eye[:, :, None] * (C - psi.sum(axis=1))[:, None, :]
        theta_T = c_pair * b[:, :, None]
        theta_T += eye[:, :, None] * (C - theta_T.sum(axis=1))[:, None, :]
    else:
        C = nu_s / params.eps                          # (L, M)
        if params.model == AAP:
            xi, gam = exchange_coefficients(n, m, params.lam, K)
            phi = eye[:, :, None] + xi / (m[:, None, None] * n[:, None, :]
                                          * nu_s[:, None, :])
            psi = C[:, None, :] * phi
        else:  # gs
            wgt = nu_s * m[:, None] * n                # (L, M)
            phi = (wgt / wgt.sum(axis=0))[None, :, :] * np.ones((L, 1, 1))
            psi = C[:, None, :] * phi

    mat_u = eye[:, :, None] * (1.0 + h * C)[:, None, :] - h * psi
    u_new = np.linalg.solve(np.moveaxis(mat_u, 2, 0),
                            np.moveaxis(u, 1, 0)[..., None])[..., 0].T

    rho = m[:, None] * n
    E_old = 1.5 * n * K * T + 0.5 * rho * u * u

    if params.model == BBGSP:
        du = u_new[:, None, :] - u_new[None, :, :]
        u_pair_new = u_new[:, None, :] - a[:, :, None] * du
        q = (c_pair * (1.5 * n[:, None, :] * gamma[:, :, None] * du * du
                       + 0.5 * rho[:, None, :] * u_pair_new ** 2)).sum(axis=1)
        theta = theta_T
    elif params.model == AAP:
        u_star = np.einsum("skm,km->sm", phi, u_new)
        msk2 = m[:, None] * m[None, :] / (m[:, None] + m[None, :]) ** 2
        nn = n[:, None, :] * n[None, :, :]
        cross = (params.lam * msk2)[:, :, None] * nn \
            * (m[:, None, None] * u_new[:, None, :]
               + m[None, :, None] * u_new[None, :, :]) \
            * (u_new[None, :, :] - u_new[:, None, :])
        beta = (-m[:, None] / (3.0 * K) * (u_star ** 2 - u_new ** 2)
                + 2.0 / (3.0 * n * K * nu_s) * cross.sum(axis=1))
        P = eye[:, :, None] + 2.0 * gam / (3.0 * n[:, None, :] * K
                                           * nu_s[:, None, :])
        theta = C[:, None, :] * P
        q = C * (1.5 * n * K * beta + 0.5 * rho * u_star ** 2)
    else:  # gs
        u_bar = (wgt * u_new).sum(axis=0) / wgt.sum(axis=0)
        nun = nu_s * n
        p_k = nun / nun.sum(axis=0)
        t0 = (nun * m[:, None] * (u_new ** 2 - u_bar[None, :] ** 2)).sum(axis=0) \
            / (3.0 * K * nun.sum(axis=0))
        theta = C[:, None, :] * p_k[None, :, :]
        q = C * (1.5 * n * K * t0[None, :] + 0.5 * rho * u_bar[None, :] ** 2)

    pref = 1.5 * n * K
    mat_T = pref[:, None, :] * (eye[:, :, None] * (1.0 + h * C)[:, None, :]
                                - h * theta)
    rhs = E_old + h * q - (1.0 + h * C) * 0.5 * rho * u_new ** 2
    T_new = np.linalg.solve(np.moveaxis(mat_T, 2, 0),
                            np.moveaxis(rhs, 1, 0)[..., None])[..., 0].T
    if np.any(T_new <= 0.0):
        raise SolverError("implicit moment solve produced non-positive temperature")
    return u_new, T_new


def relax_implicit(state: KineticState, h: float,
                   params: MixtureParams) -> KineticState:
    """Backward-Euler relaxation of size h at every cell (no transport)."""
    mom = compute_moments(state, params)
    n = np.stack([sp.n for sp in mom.species])
    u = np.stack([sp.u for sp in mom.species])
    T = np.stack([sp.T for sp in mom.species])
    u_new, T_new = moment_solve(n, u, T, h, params)
    aux = compute_closure(n, u_new, T_new, params)
    w_pair = pair_inverse_scales(params)
    pairs = []
    for s in range(params.L):
        G1, G2, c_tot = build_attractor(aux, s, n, params, state.vg,
                                        inv_scale=w_pair[s])
        denom = (1.0 + h * np.asarray(c_tot))[..., None]
        pairs.append(ChuPair(
            (state.pairs[s].g1 + h * G1) / denom,
            (state.pairs[s].g2 + h * G2) / denom,
        ))
    return KineticState(pairs, state.sx, state.vg)


def step_be1(state: KineticState, dt: float, params: MixtureParams,
             config: SolverConfig, pinned=None) -> KineticState:
    moved = transport(state, dt, config.reconstruction, pinned)
    return relax_implicit(moved, dt, params)


def step_dirk2(state: KineticState, dt: float, params: MixtureParams,
               config: SolverConfig, pinned=None) -> KineticState:
    g = _DIRK_GAMMA
    # stage 1 at t + g*dt, solved on the grid
    moved1 = transport(state, g * dt, config.reconstruction, pinned)
    stage1 = relax_implicit(moved1, g * dt, params)
    # stage derivative, then carried along the remaining characteristic
    k1 = KineticState(
        [ChuPair((a.g1 - b.g1) / (g * dt), (a.g2 - b.g2) / (g * dt))
         for a, b in zip(stage1.pairs, moved1.pairs)],
        state.sx, state.vg)
    k1_pin = None
    if pinned is not None:
        zeros = [np.zeros_like(c) for c in pinned.left_g1]
        k1_pin = PinnedBoundary(zeros, [np.zeros_like(c) for c in pinned.left_g2],
                                [np.zeros_like(c) for c in pinned.right_g1],
                                [np.zeros_like(c) for c in pinned.right_g2])
    k1_moved = transport(k1, (1.0 - g) * dt, config.reconstruction, k1_pin)
    moved_full = transport(state, dt, config.reconstruction, pinned)
    pairs = [ChuPair(mf.g1 + (1.0 - g) * dt * km.g1,
                     mf.g2 + (1.0 - g) * dt * km.g2)
             for mf, km in zip(moved_full.pairs, k1_moved.pairs)]
    staged = KineticState(pairs, state.sx, state.vg)
    return relax_implicit(staged, g * dt, params)


_STEPPERS = {BE1: step_be1, DIRK2: step_dirk2}


def advance(state: KineticState, params: MixtureParams,
            controller: TimeController, config: SolverConfig,
            pinned: PinnedBoundary | None = None,
            snapshot_times=(), on_step=None):
    """March to controller.t_end; returns (final_state, snapshots).

    snapshots maps each requested time to a deep-copied state.  Aborts with
    cell diagnostics on the first non-finite value.
    """
    step_fn = _STEPPERS[config.stepper]
    snaps = {}
    want = sorted(snapshot_times)
    steps = controller.build_steps(state.sx, state.vg, breaks=want)

    def grab(t):
        while want and abs(want[0] - t) <= 1e-12 * max(1.0, abs(t)):
            snaps[want.pop(0)] = state.copy()

    grab(0.0)
    for t, dt in steps:
        state = step_fn(state, dt, params, config, pinned)
        total = sum(float(p.g1.sum()) for p in state.pairs)
        if not math.isfinite(total):
            bad = [s for s, p in enumerate(state.pairs)
                   if not np.isfinite(p.g1).all()]
            raise SolverError(
                f"non-finite distribution at t={t + dt:.6g} (species {bad})")
        if on_step is not None:
            on_step(t + dt, state)
        grab(t + dt)
    return state, snaps
