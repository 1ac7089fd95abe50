"""Navier-Stokes limit with one shared velocity and temperature.

State fields: species number densities n_s(x), mixture velocity u(x) and
temperature T(x).  First-order corrections: Fick diffusion velocities
through the matrix L = Mtilde^{-1} Omega (two variants of the mobility
matrix M, one for the aap/bbgsp pair and one for gs), Newtonian stress with
mixture viscosity mu, and Fourier heat flux with conductivity lam plus the
enthalpy carried by diffusion.

Two discretizations: a Fourier collocation path for smooth periodic
problems (time-stepped with classical RK4) and a predictor/corrector
MacCormack path in conservative variables for shock problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import FREE_FLOW, INFLOW_OUTFLOW, PERIODIC, SpatialGrid

FICK_AAP = "aap-bbgsp"
FICK_GS = "gs"


class NSError(RuntimeError):
    pass


@dataclass
class NSGlobalState:
    n: np.ndarray          # (L, n_x)
    u: np.ndarray          # (n_x,)
    T: np.ndarray          # (n_x,)

    def copy(self) -> "NSGlobalState":
        return NSGlobalState(self.n.copy(), self.u.copy(), self.T.copy())


def transport_coeffs(n: np.ndarray, T, m: np.ndarray, K: float,
                     lam: np.ndarray):
    """Mixture viscosity and thermal conductivity.

    Both use the leading-order frequencies nu_sk = lam_sk n_k; the species
    sums run over the per-species total frequency.
    """
    nu_tot = np.einsum("sk,k...->s...", lam, n)
    mu = (n * K * T / nu_tot).sum(axis=0)
    cond = 2.5 * K * K * T * (n / (m[(slice(None),) + (None,) * (n.ndim - 1)]
                                   * nu_tot)).sum(axis=0)
    return mu, cond


def fick_matrix(variant: str, n: np.ndarray, m: np.ndarray, lam: np.ndarray,
                K: float) -> np.ndarray:
    """Diffusion-coupling matrix L (.., L, L) for each spatial point.

    Solves Mtilde X = Omega with Mtilde the uniformly shifted mobility
    matrix (shift -kappa/2, kappa = min over off-diagonal entries), and
    Omega_sk = rho_s delta_sk - rho_s rho_k / rho.  Raises if the shifted
    matrix is singular.
    """
    Lsp = m.size
    if Lsp == 1:
        return np.zeros(n.shape[1:] + (1, 1)) if n.ndim > 1 else np.zeros((1, 1))
    rho = m[(slice(None),) + (None,) * (n.ndim - 1)] * n
    rho_tot = rho.sum(axis=0)
    if variant == FICK_AAP:
        msum = (m[:, None] + m[None, :])[(...,) + (None,) * (n.ndim - 1)]
        lam_x = lam[(...,) + (None,) * (n.ndim - 1)]
        M = lam_x * rho[:, None] / msum
        # diagonal removes the rho_r-weighted row sum (column-index density)
        M = M - np.eye(Lsp)[(...,) + (None,) * (n.ndim - 1)] \
            * (lam_x * rho[None, :] / msum).sum(axis=1)[:, None]
    elif variant == FICK_GS:
        nu = np.einsum("sk,k...->s...", lam, n)
        denom = (rho * nu).sum(axis=0)
        M = nu[:, None] * nu[None, :] * rho[:, None] / denom \
            - np.eye(Lsp)[(...,) + (None,) * (n.ndim - 1)] * nu[:, None]
    else:
        raise NSError(f"unknown Fick variant {variant!r}")
    off = ~np.eye(Lsp, dtype=bool)
    kappa_shift = np.min(M[off], axis=0) if n.ndim == 1 else \
        np.min(M.reshape(Lsp * Lsp, -1)[off.ravel()], axis=0)
    Mt = M - 0.5 * kappa_shift
    omega = np.eye(Lsp)[(...,) + (None,) * (n.ndim - 1)] * rho[:, None] \
        - rho[:, None] * rho[None, :] / rho_tot
    # batch the solve over trailing axes
    Mtb = np.moveaxis(Mt, (0, 1), (-2, -1))
    Ob = np.moveaxis(omega, (0, 1), (-2, -1))
    try:
        Lb = np.linalg.solve(Mtb, Ob)
    except np.linalg.LinAlgError as exc:
        raise NSError("shifted mobility matrix is singular") from exc
    return Lb


def diffusion_velocities(L_fick: np.ndarray, n: np.ndarray, m: np.ndarray,
                         grad_pk: np.ndarray) -> np.ndarray:
    """u1_s = sum_k L_sk/(rho_s rho_k) * grad(n_k K T); grads supplied."""
    rho = m[(slice(None),) + (None,) * (n.ndim - 1)] * n
    Lmat = np.moveaxis(L_fick, (-2, -1), (0, 1))
    return (Lmat / (rho[:, None] * rho[None, :]) * grad_pk[None, :]).sum(axis=1)


def spectral_derivative(f: np.ndarray, order: int, length: float) -> np.ndarray:
    """Fourier-collocation d^order/dx^order along the last axis.

    Wavenumbers scale to the periodic domain length; the unpaired Nyquist
    mode is zeroed for odd orders.
    """
    n = f.shape[-1]
    fh = np.fft.rfft(f, axis=-1)
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult = mult.copy()
        mult[-1] = 0.0
    return np.fft.irfft(fh * mult, n=n, axis=-1)


def ns_rhs(state: NSGlobalState, eps: float, m: np.ndarray, lam: np.ndarray,
           K: float, length: float, fick_variant: str = FICK_AAP):
    """Time derivatives of (n_s, u, T), advective form, spectral gradients."""
    n, u, T = state.n, state.u, state.T
    d = lambda f: spectral_derivative(f, 1, length)
    rho_s = m[:, None] * n
    rho = rho_s.sum(axis=0)
    n_tot = n.sum(axis=0)
    p = n_tot * K * T

    grad_pk = d(n * K * T)
    L_fick = fick_matrix(fick_variant, n, m, lam, K)
    u1 = diffusion_velocities(L_fick, n, m, grad_pk)
    mu, cond = transport_coeffs(n, T, m, K, lam)

    du = d(u)
    P1 = -(4.0 / 3.0) * mu * du
    q1 = 2.5 * K * T * (n * u1).sum(axis=0) - cond * d(T)

    div_rho_diff = d((eps * rho_s * u1).sum(axis=0))
    div_n_diff = d((eps * n * u1).sum(axis=0))
    div_P1 = d(P1)

    dn = -d(n * u[None, :]) - eps * d(n * u1)
    dudt = (u / rho) * div_rho_diff - u * du - d(p) / rho - eps * div_P1 / rho
    dTdt = (-(u * u) / (3.0 * n_tot * K) * div_rho_diff
            + 2.0 * u / (3.0 * n_tot * K) * eps * div_P1
            + (T / n_tot) * div_n_diff
            - d(T) * u - (2.0 / 3.0) * T * du
            - 2.0 / (3.0 * n_tot * K) * eps * d(P1 * u)
            - 2.0 / (3.0 * n_tot * K) * eps * d(q1))
    return dn, dudt, dTdt


def rk4_advance(state: NSGlobalState, dt: float, rhs) -> NSGlobalState:
    """Classical four-stage explicit step; rhs(state) -> (dn, du, dT)."""
    k1 = rhs(state)
    s2 = NSGlobalState(state.n + 0.5 * dt * k1[0], state.u + 0.5 * dt * k1[1],
                       state.T + 0.5 * dt * k1[2])
    k2 = rhs(s2)
    s3 = NSGlobalState(state.n + 0.5 * dt * k2[0], state.u + 0.5 * dt * k2[1],
                       state.T + 0.5 * dt * k2[2])
    k3 = rhs(s3)
    s4 = NSGlobalState(state.n + dt * k3[0], state.u + dt * k3[1],
                       state.T + dt * k3[2])
    k4 = rhs(s4)
    c = dt / 6.0
    out = NSGlobalState(
        state.n + c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state.u + c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        state.T + c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )
    if not (np.isfinite(out.u).all() and np.isfinite(out.T).all()):
        raise NSError("non-finite field after RK4 stage")
    return out


def stable_dt(state: NSGlobalState, eps: float, m: np.ndarray, lam: np.ndarray,
              K: float, dx: float, adv_cfl: float = 0.5,
              diff_cfl: float = 0.4) -> float:
    """Advective plus diffusive explicit limits (diffusion scaled by eps)."""
    n, u, T = state.n, state.u, state.T
    rho = (m[:, None] * n).sum(axis=0)
    n_tot = n.sum(axis=0)
    c = np.sqrt(5.0 * n_tot * K * T / (3.0 * rho))
    dt = adv_cfl * dx / float(np.max(np.abs(u) + c))
    mu, cond = transport_coeffs(n, T, m, K, lam)
    diff = eps * float(np.max(np.maximum(mu / rho, cond / (n_tot * K))))
    if m.size > 1 and eps != 0.0:
        L_fick = fick_matrix(FICK_AAP, n, m, lam, K)
        rho_s = m[:, None] * n
        d_fick = np.abs(np.moveaxis(L_fick, (-2, -1), (0, 1))) * K * T \
            * n[:, None] / (rho_s[:, None] * rho_s[None, :])
        diff = max(diff, eps * float(d_fick.max()))
    if diff > 0.0:
        dt = min(dt, diff_cfl * dx * dx / diff)
    return dt


def spectral_solve(state: NSGlobalState, eps: float, m: np.ndarray,
                   lam: np.ndarray, K: float, sx: SpatialGrid, t_end: float,
                   fick_variant: str = FICK_AAP, snapshot_times=(),
                   adv_cfl: float = 0.5):
    """March the periodic problem to t_end with RK4; snapshots on request."""
    if sx.bc != PERIODIC:
        raise NSError("spectral path requires a periodic domain")
    rhs = lambda s: ns_rhs(s, eps, m, lam, K, sx.length, fick_variant)
    snaps = {}
    want = sorted(snapshot_times)
    t = 0.0
    if want and want[0] == 0.0:
        snaps[want.pop(0)] = state.copy()
    while t < t_end - 1e-14 * max(1.0, t_end):
        dt = stable_dt(state, eps, m, lam, K, sx.dx, adv_cfl=adv_cfl)
        target = want[0] if want else t_end
        dt = min(dt, target - t, t_end - t)
        state = rk4_advance(state, dt, rhs)
        t += dt
        if want and abs(t - want[0]) <= 1e-12 * max(1.0, t):
            snaps[want.pop(0)] = state.copy()
    return state, snaps


# ---------------------------------------------------------------------------
# MacCormack path (conservative variables, non-periodic shock problems)

def _primitive(U: np.ndarray, m: np.ndarray, K: float):
    Lsp = m.size
    n = U[:Lsp]
    rho = (m[:, None] * n).sum(axis=0)
    mom = U[Lsp]
    E = U[Lsp + 1]
    u = mom / rho
    n_tot = n.sum(axis=0)
    T = (E - 0.5 * rho * u * u) / (1.5 * n_tot * K)
    return n, rho, n_tot, u, T


def conservative_vars(state: NSGlobalState, m: np.ndarray, K: float) -> np.ndarray:
    rho = (m[:, None] * state.n).sum(axis=0)
    E = 0.5 * rho * state.u ** 2 + 1.5 * state.n.sum(axis=0) * K * state.T
    return np.concatenate([state.n, (rho * state.u)[None], E[None]], axis=0)


def primitive_state(U: np.ndarray, m: np.ndarray, K: float) -> NSGlobalState:
    n, _, _, u, T = _primitive(U, m, K)
    return NSGlobalState(n.copy(), u.copy(), T.copy())


def _flux(U: np.ndarray, eps: float, m: np.ndarray, lam: np.ndarray, K: float,
          dx: float, fick_variant: str) -> np.ndarray:
    """Total flux including the eps-scaled gradient terms (central diffs)."""
    n, rho, n_tot, u, T = _primitive(U, m, K)
    p = n_tot * K * T

    grad = lambda f: np.gradient(f, dx, axis=-1, edge_order=1)
    F = np.empty_like(U)
    if eps != 0.0:
        grad_pk = grad(n * K * T)
        L_fick = fick_matrix(fick_variant, n, m, lam, K)
        u1 = diffusion_velocities(L_fick, n, m, grad_pk)
        mu, cond = transport_coeffs(n, T, m, K, lam)
        P1 = -(4.0 / 3.0) * mu * grad(u)
        q1 = 2.5 * K * T * (n * u1).sum(axis=0) - cond * grad(T)
        F[:m.size] = n * (u[None] + eps * u1)
        F[m.size] = rho * u * u + p + eps * P1
        F[m.size + 1] = (U[m.size + 1] + p) * u + eps * (P1 * u + q1)
    else:
        F[:m.size] = n * u[None]
        F[m.size] = rho * u * u + p
        F[m.size + 1] = (U[m.size + 1] + p) * u
    return F


def _extend(U: np.ndarray, bc: str, ghost: int, U_left=None, U_right=None):
    if bc == FREE_FLOW:
        left = np.repeat(U[:, :1], ghost, axis=1)
        right = np.repeat(U[:, -1:], ghost, axis=1)
    elif bc == INFLOW_OUTFLOW:
        left = np.repeat(np.asarray(U_left)[:, None], ghost, axis=1)
        right = np.repeat(np.asarray(U_right)[:, None], ghost, axis=1)
    else:
        raise NSError("MacCormack path is for non-periodic problems")
    return np.concatenate([left, U, right], axis=1)


def maccormack_advance(U: np.ndarray, dt: float, eps: float, m: np.ndarray,
                       lam: np.ndarray, K: float, sx: SpatialGrid,
                       fick_variant: str = FICK_AAP,
                       U_left=None, U_right=None) -> np.ndarray:
    """One predictor/corrector step on conservative variables.

    Forward flux differences in the predictor, backward in the corrector;
    gradient terms inside the flux use central differences on the ghost-
    extended array.
    """
    g = 2
    dx = sx.dx
    Ue = _extend(U, sx.bc, g, U_left, U_right)
    F = _flux(Ue, eps, m, lam, K, dx, fick_variant)
    Us = Ue.copy()
    Us[:, :-1] = Ue[:, :-1] - (dt / dx) * (F[:, 1:] - F[:, :-1])
    # re-impose boundary data on the predictor ghosts
    if sx.bc == INFLOW_OUTFLOW:
        Us[:, :g] = np.asarray(U_left)[:, None]
        Us[:, -g:] = np.asarray(U_right)[:, None]
    else:
        Us[:, :g] = Us[:, g:g + 1]
        Us[:, -g:] = Us[:, -g - 1:-g]
    Fs = _flux(Us, eps, m, lam, K, dx, fick_variant)
    Un = 0.5 * (Ue[:, 1:-1] + Us[:, 1:-1]
                - (dt / dx) * (Fs[:, 1:-1] - Fs[:, :-2]))
    out = Un[:, g - 1:g - 1 + sx.n_x]
    if not np.isfinite(out).all():
        raise NSError("non-finite field after MacCormack step")
    return out


def maccormack_solve(state: NSGlobalState, eps: float, m: np.ndarray,
                     lam: np.ndarray, K: float, sx: SpatialGrid, t_end: float,
                     fick_variant: str = FICK_AAP, cfl: float = 0.5,
                     diff_cfl: float = 0.4, boundary_states=None,
                     snapshot_times=()):
    """March the shock problem to t_end; boundary_states pins (left, right)."""
    U = conservative_vars(state, m, K)
    U_left = U_right = None
    if boundary_states is not None:
        U_left = conservative_vars(boundary_states[0], m, K)[:, 0]
        U_right = conservative_vars(boundary_states[1], m, K)[:, -1]
    snaps = {}
    want = sorted(snapshot_times)
    t = 0.0
    if want and want[0] == 0.0:
        snaps[want.pop(0)] = primitive_state(U, m, K)
    while t < t_end - 1e-14 * max(1.0, t_end):
        st = primitive_state(U, m, K)
        dt = stable_dt(st, eps, m, lam, K, sx.dx, adv_cfl=cfl, diff_cfl=diff_cfl)
        target = want[0] if want else t_end
        dt = min(dt, target - t, t_end - t)
        U = maccormack_advance(U, dt, eps, m, lam, K, sx, fick_variant,
                               U_left, U_right)
        t += dt
        if want and abs(t - want[0]) <= 1e-12 * max(1.0, t):
            snaps[want.pop(0)] = primitive_state(U, m, K)
    return primitive_state(U, m, K), snaps
