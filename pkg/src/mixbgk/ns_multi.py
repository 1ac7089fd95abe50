"""Navier-Stokes limit with per-species velocities and temperatures.

Every species carries its own (n_s, u_s, T_s); species couple only through
momentum/energy exchange sources scaled by 1/kappa, with pairwise
antisymmetric closed forms, so the summed equations stay conservative.
First-order fluxes are per-species: Newtonian stress plus a velocity-
difference dyadic part, and a heat flux with two drift-driven terms.

Spectral RK4 path for smooth periodic runs (explicit sources, dt limited by
the exchange rate); MacCormack path for shock problems, with the sources
integrated by a per-cell backward-Euler sub-step when kappa is stiff (the
update is linear: first in velocities, then in temperatures).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import FREE_FLOW, INFLOW_OUTFLOW, PERIODIC, SpatialGrid
from .ns_global import NSError, spectral_derivative


@dataclass
class NSMultiState:
    n: np.ndarray          # (L, n_x)
    u: np.ndarray          # (L, n_x)
    T: np.ndarray          # (L, n_x)

    def copy(self) -> "NSMultiState":
        return NSMultiState(self.n.copy(), self.u.copy(), self.T.copy())


def exchange_terms(n, u, T, m: np.ndarray, lam: np.ndarray, K: float):
    """Pairwise momentum/energy exchange (R_sk, S_sk), both (L, L, ...).

    R_sk = lam_sk m_sk n_s n_k (u_k - u_s),  m_sk = m_s m_k/(m_s+m_k)
    S_sk = lam_sk m_sk/(m_s+m_k) n_s n_k [(m_s u_s + m_k u_k)(u_k - u_s)
                                          + 3K (T_k - T_s)]
    Antisymmetry in (s, k) is exact by construction of the prefactors.
    """
    tail = (None,) * (np.asarray(n).ndim - 1)
    ms = m[(slice(None), None) + tail]
    mk = m[(None, slice(None)) + tail]
    msk = ms * mk / (ms + mk)
    lam_x = lam[(...,) + tail]
    nn = n[:, None, ...] * n[None, :, ...]
    du = u[None, :, ...] - u[:, None, ...]
    R = lam_x * msk * nn * du
    S = lam_x * msk / (ms + mk) * nn * (
        (ms * u[:, None, ...] + mk * u[None, :, ...]) * du
        + 3.0 * K * (T[None, :, ...] - T[:, None, ...]))
    return R, S


def species_fluxes(n, u, T, m: np.ndarray, lam: np.ndarray, K: float,
                   grad_u: np.ndarray, grad_T: np.ndarray):
    """First-order stress and heat flux per species (1D reductions).

    P1_s: -(4/3)(n_s K T_s / nu_ss) du_s/dx plus the xx-component of the
    drift dyadic, (2/3) sum_k nu_sk a_sk^2 m_s n_s (u_s-u_k)^2 / nu_ss.
    q1_s: Fourier part -(5/2)(n_s K^2 T_s/(m_s nu_ss)) dT_s/dx (the
    single-gas conductivity, consistent with the shared-field limit and
    the L = 1 reduction) plus the two drift terms (temperature-difference
    and cubic velocity-difference).
    """
    tail = (None,) * (np.asarray(n).ndim - 1)
    ms = m[(slice(None), None) + tail]
    mk = m[(None, slice(None)) + tail]
    a = mk / (ms + mk)
    lam_x = lam[(...,) + tail]
    nu_pair = lam_x * n[None, :, ...]
    nu_self = np.einsum("ss...->s...", nu_pair)
    off = (1.0 - np.eye(m.size))[(...,) + tail]

    du = u[:, None, ...] - u[None, :, ...]
    m_sp = m[(slice(None),) + tail]
    dyad = (2.0 / 3.0) * (off * nu_pair * a ** 2 * du ** 2).sum(axis=1) \
        * m_sp * n / nu_self
    P1 = -(4.0 / 3.0) * (n * K * T / nu_self) * grad_u + dyad

    q_fourier = -2.5 * (n * K * K * T / (m_sp * nu_self)) * grad_T
    q_dT = 5.0 * (m_sp * n / nu_self) * (
        off * nu_pair * a ** 2 / (ms + mk)
        * K * (T[None, :, ...] - T[:, None, ...]) * (-du)).sum(axis=1)
    q_du3 = (1.0 / 3.0) * (m_sp * n / nu_self) * (
        off * nu_pair * a ** 2 * (5.0 * mk / (ms + mk) - a) * (-du) ** 3
    ).sum(axis=1)
    return P1, q_fourier + q_dT + q_du3


def ns_multi_rhs(state: NSMultiState, eps: float, kappa: float, m: np.ndarray,
                 lam: np.ndarray, K: float, length: float,
                 include_sources: bool = True):
    """Time derivatives of (n_s, u_s, T_s), spectral gradients."""
    n, u, T = state.n, state.u, state.T
    d = lambda f: spectral_derivative(f, 1, length)
    rho = m[:, None] * n
    grad_u = d(u)
    grad_T = d(T)
    P1, q1 = species_fluxes(n, u, T, m, lam, K, grad_u, grad_T)
    div_P1 = d(P1)

    if include_sources:
        R, S = exchange_terms(n, u, T, m, lam, K)
        R_s = R.sum(axis=1) / kappa
        S_s = S.sum(axis=1) / kappa
    else:
        R_s = S_s = 0.0

    dn = -d(n * u)
    dudt = -u * grad_u - d(n * K * T) / rho - eps * div_P1 / rho + R_s / rho
    dTdt = (2.0 * u / (3.0 * n * K) * (eps * div_P1 - R_s)
            - grad_T * u - (2.0 / 3.0) * T * grad_u
            - 2.0 / (3.0 * n * K) * eps * d(P1 * u)
            - 2.0 / (3.0 * n * K) * eps * d(q1)
            + 2.0 / (3.0 * n * K) * S_s)
    return dn, dudt, dTdt


def source_rate_bound(n, u, T, m: np.ndarray, lam: np.ndarray, K: float,
                      kappa: float) -> float:
    """Crude sup of the exchange relaxation rates (for explicit dt limits)."""
    tail = (None,) * (np.asarray(n).ndim - 1)
    ms = m[(slice(None), None) + tail]
    mk = m[(None, slice(None)) + tail]
    msk = ms * mk / (ms + mk)
    lam_x = lam[(...,) + tail]
    rate_u = (lam_x * msk * n[None, :, ...] / ms).sum(axis=1)
    rate_T = (lam_x * msk / (ms + mk) * n[None, :, ...] * 3.0).sum(axis=1)
    return float(max(rate_u.max(), rate_T.max())) / kappa


def rk4_multi(state: NSMultiState, dt: float, rhs) -> NSMultiState:
    k1 = rhs(state)
    s2 = NSMultiState(state.n + 0.5 * dt * k1[0], state.u + 0.5 * dt * k1[1],
                      state.T + 0.5 * dt * k1[2])
    k2 = rhs(s2)
    s3 = NSMultiState(state.n + 0.5 * dt * k2[0], state.u + 0.5 * dt * k2[1],
                      state.T + 0.5 * dt * k2[2])
    k3 = rhs(s3)
    s4 = NSMultiState(state.n + dt * k3[0], state.u + dt * k3[1],
                      state.T + dt * k3[2])
    k4 = rhs(s4)
    c = dt / 6.0
    out = NSMultiState(
        state.n + c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state.u + c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        state.T + c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )
    if not (np.isfinite(out.u).all() and np.isfinite(out.T).all()):
        raise NSError("non-finite field after multi-species RK4 stage")
    return out


def multi_stable_dt(state: NSMultiState, eps: float, kappa: float,
                    m: np.ndarray, lam: np.ndarray, K: float, dx: float,
                    adv_cfl: float = 0.5, diff_cfl: float = 0.4,
                    source_cfl: float = 0.5, explicit_sources: bool = True):
    n, u, T = state.n, state.u, state.T
    c = np.sqrt(5.0 * K * T / (3.0 * m[:, None]))
    dt = adv_cfl * dx / float(np.max(np.abs(u) + c))
    nu_self = np.array([lam[s, s] * n[s] for s in range(m.size)])
    # momentum diffusivity (4/3) K T/(m nu_ss); thermal (5/3) K T/(m nu_ss)
    diff = eps * float(np.max(
        (5.0 / 3.0) * K * T / (m[:, None] * nu_self)))
    if diff > 0.0:
        dt = min(dt, diff_cfl * dx * dx / diff)
    if explicit_sources:
        rate = source_rate_bound(n, u, T, m, lam, K, kappa)
        if rate > 0.0:
            dt = min(dt, source_cfl / rate)
    return dt


def spectral_multi_solve(state: NSMultiState, eps: float, kappa: float,
                         m: np.ndarray, lam: np.ndarray, K: float,
                         sx: SpatialGrid, t_end: float, snapshot_times=(),
                         adv_cfl: float = 0.5):
    if sx.bc != PERIODIC:
        raise NSError("spectral path requires a periodic domain")
    rhs = lambda s: ns_multi_rhs(s, eps, kappa, m, lam, K, sx.length)
    snaps = {}
    want = sorted(snapshot_times)
    t = 0.0
    if want and want[0] == 0.0:
        snaps[want.pop(0)] = state.copy()
    while t < t_end - 1e-14 * max(1.0, t_end):
        dt = multi_stable_dt(state, eps, kappa, m, lam, K, sx.dx,
                             adv_cfl=adv_cfl)
        target = want[0] if want else t_end
        dt = min(dt, target - t, t_end - t)
        state = rk4_multi(state, dt, rhs)
        t += dt
        if want and abs(t - want[0]) <= 1e-12 * max(1.0, t):
            snaps[want.pop(0)] = state.copy()
    return state, snaps


# ---------------------------------------------------------------------------
# shock path: MacCormack flux step + implicit exchange sub-step

def implicit_exchange(n, u, T, dt_over_kappa: float, m: np.ndarray,
                      lam: np.ndarray, K: float):
    """Backward-Euler update of (u_s, T_s) under the exchange sources alone.

    rho_s u_s' = rho_s u_s + dt/kappa sum_k R_sk(u'), then the energy update
    with S_sk(u', T') linear in T'.  Total momentum and energy are conserved
    by the pairwise symmetry of the assembled coefficients.
    """
    Lsp = m.size
    tail_shape = n.shape[1:]
    ms = m[:, None]
    mk = m[None, :]
    msk = ms * mk / (ms + mk)
    eye = np.eye(Lsp)

    nn = n[:, None, ...] * n[None, :, ...]
    cmat = dt_over_kappa * lam[(...,) + (None,) * (n.ndim - 1)] * \
        msk[(...,) + (None,) * (n.ndim - 1)] * nn      # (L, L, ...)
    rho = m[(slice(None),) + (None,) * (n.ndim - 1)] * n
    # velocities: (rho_s + sum_k c_sk) u_s' - sum_k c_sk u_k' = rho_s u_s
    diag = rho + cmat.sum(axis=1)
    A = eye[(...,) + (None,) * (n.ndim - 1)] * diag[:, None, ...] - cmat
    rhs = rho * u
    u_new = np.linalg.solve(np.moveaxis(A, (0, 1), (-2, -1)),
                            np.moveaxis(rhs, 0, -1)[..., None])[..., 0]
    u_new = np.moveaxis(u_new, -1, 0)

    # energies: E_s' = E_s + dt/kappa sum_k S_sk(u', T')
    du = u_new[None, :, ...] - u_new[:, None, ...]
    ms_x = ms[(...,) + (None,) * (n.ndim - 1)]
    mk_x = mk[(...,) + (None,) * (n.ndim - 1)]
    pref = cmat / (ms_x + mk_x)        # dt/kappa lam msk/(ms+mk) n_s n_k
    kin = pref * (ms_x * u_new[:, None, ...] + mk_x * u_new[None, :, ...]) * du
    # (3K) T-coupling: + pref * 3K (T_k' - T_s')
    tcoef = 3.0 * K * pref
    diag_T = 1.5 * n * K + tcoef.sum(axis=1)
    A_T = eye[(...,) + (None,) * (n.ndim - 1)] * diag_T[:, None, ...] - tcoef
    E_old = 1.5 * n * K * T + 0.5 * rho * u * u
    rhs_T = E_old - 0.5 * rho * u_new ** 2 + kin.sum(axis=1)
    T_new = np.linalg.solve(np.moveaxis(A_T, (0, 1), (-2, -1)),
                            np.moveaxis(rhs_T, 0, -1)[..., None])[..., 0]
    T_new = np.moveaxis(T_new, -1, 0)
    if np.any(T_new <= 0.0):
        raise NSError("implicit exchange produced non-positive temperature")
    return u_new, T_new


def _cons(state: NSMultiState, m: np.ndarray, K: float) -> np.ndarray:
    rho = m[:, None] * state.n
    E = 0.5 * rho * state.u ** 2 + 1.5 * state.n * K * state.T
    return np.stack([state.n, rho * state.u, E], axis=1)  # (L, 3, n_x)


def _prim(U: np.ndarray, m: np.ndarray, K: float) -> NSMultiState:
    n = U[:, 0]
    rho = m[:, None] * n
    u = U[:, 1] / rho
    T = (U[:, 2] - 0.5 * rho * u * u) / (1.5 * n * K)
    return NSMultiState(n.copy(), u, T)


def _flux_multi(U: np.ndarray, eps: float, m: np.ndarray, lam: np.ndarray,
                K: float, dx: float) -> np.ndarray:
    st = _prim(U, m, K)
    n, u, T = st.n, st.u, st.T
    p = n * K * T
    F = np.empty_like(U)
    F[:, 0] = n * u
    F[:, 1] = n * m[:, None] * u * u + p
    F[:, 2] = (U[:, 2] + p) * u
    if eps != 0.0:
        grad = lambda f: np.gradient(f, dx, axis=-1, edge_order=1)
        P1, q1 = species_fluxes(n, u, T, m, lam, K, grad(u), grad(T))
        F[:, 1] += eps * P1
        F[:, 2] += eps * (P1 * u + q1)
    return F


def maccormack_multi_solve(state: NSMultiState, eps: float, kappa: float,
                           m: np.ndarray, lam: np.ndarray, K: float,
                           sx: SpatialGrid, t_end: float, cfl: float = 0.5,
                           boundary_states=None, snapshot_times=(),
                           implicit_source_threshold: float = 0.2):
    """Shock-path integrator: MacCormack flux step, then exchange sources.

    Sources go explicit inside the MacCormack stages only when dt times the
    exchange rate stays below implicit_source_threshold; otherwise they are
    applied as a separate backward-Euler sub-step per cell (split form).
    """
    if sx.bc == PERIODIC:
        raise NSError("use the spectral path for periodic problems")
    U = _cons(state, m, K)
    UL = UR = None
    if boundary_states is not None:
        UL = _cons(boundary_states[0], m, K)[:, :, 0]
        UR = _cons(boundary_states[1], m, K)[:, :, -1]
    g = 2
    snaps = {}
    want = sorted(snapshot_times)
    t = 0.0
    if want and want[0] == 0.0:
        snaps[want.pop(0)] = _prim(U, m, K)

    def extend(A):
        if sx.bc == FREE_FLOW:
            left = np.repeat(A[:, :, :1], g, axis=2)
            right = np.repeat(A[:, :, -1:], g, axis=2)
        else:
            left = np.repeat(UL[:, :, None], g, axis=2)
            right = np.repeat(UR[:, :, None], g, axis=2)
        return np.concatenate([left, A, right], axis=2)

    while t < t_end - 1e-14 * max(1.0, t_end):
        st = _prim(U, m, K)
        dt = multi_stable_dt(st, eps, kappa, m, lam, K, sx.dx, adv_cfl=cfl,
                             explicit_sources=False)
        rate = source_rate_bound(st.n, st.u, st.T, m, lam, K, kappa)
        target = want[0] if want else t_end
        dt = min(dt, target - t, t_end - t)

        Ue = extend(U)
        F = _flux_multi(Ue, eps, m, lam, K, sx.dx)
        Us = Ue.copy()
        Us[:, :, :-1] = Ue[:, :, :-1] - (dt / sx.dx) * (F[:, :, 1:] - F[:, :, :-1])
        if sx.bc == INFLOW_OUTFLOW:
            Us[:, :, :g] = UL[:, :, None]
            Us[:, :, -g:] = UR[:, :, None]
        else:
            Us[:, :, :g] = Us[:, :, g:g + 1]
            Us[:, :, -g:] = Us[:, :, -g - 1:-g]
        Fs = _flux_multi(Us, eps, m, lam, K, sx.dx)
        Un = 0.5 * (Ue[:, :, 1:-1] + Us[:, :, 1:-1]
                    - (dt / sx.dx) * (Fs[:, :, 1:-1] - Fs[:, :, :-2]))
        U = Un[:, :, g - 1:g - 1 + sx.n_x]

        # exchange sources, implicit in the stiff regime
        st = _prim(U, m, K)
        if rate * dt <= implicit_source_threshold:
            R, S = exchange_terms(st.n, st.u, st.T, m, lam, K)
            U[:, 1] += (dt / kappa) * R.sum(axis=1)
            U[:, 2] += (dt / kappa) * S.sum(axis=1)
        else:
            u_new, T_new = implicit_exchange(st.n, st.u, st.T, dt / kappa,
                                             m, lam, K)
            rho = m[:, None] * st.n
            U[:, 1] = rho * u_new
            U[:, 2] = 0.5 * rho * u_new ** 2 + 1.5 * st.n * K * T_new
        if not np.isfinite(U).all():
            raise NSError(f"non-finite field at t={t + dt:.6g}")
        t += dt
        if want and abs(t - want[0]) <= 1e-12 * max(1.0, t):
            snaps[want.pop(0)] = _prim(U, m, K)
    return _prim(U, m, K), snaps
