"""Auxiliary Maxwellian parameters and attractors for the three mixture models.

Three closures share one calling convention.  Moment arrays have shape
(L, ...) with species leading; the trailing axes can be x-cells or any batch.

aap:    one attractor per species at fictitious (u*_s, T*_s) built from the
        Maxwell-molecule exchange coefficients.
gs:     one attractor per species at shared (u_bar, T_bar) fixed by total
        momentum/energy conservation.
bbgsp:  a sum of pair attractors at (u_sk, T_sk); the solver consumes it as
        a single frequency-weighted aggregate so all three models present
        the same (G_hat, nu_total) interface.

Collision frequencies are nu_sk = lam_sk * n_k throughout (the two frequency
moments are taken equal), which also fixes a_sk = m_k/(m_s+m_k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .grids import VelocityGrid
from .state import AAP, BBGSP, GS, ChuPair, MixtureParams, gaussian_1d


class ClosureError(ValueError):
    pass


def collision_frequencies(n: np.ndarray, lam: np.ndarray):
    """Per-pair nu_sk = lam_sk n_k and per-species nu_s = sum_k nu_sk.

    nu_s is accumulated in increasing k order so the identity
    nu_s == sum_k nu_sk holds bitwise.
    """
    n = np.asarray(n, dtype=float)
    nu_pair = lam[(...,) + (None,) * (n.ndim - 1)] * n[None, ...]
    nu_s = nu_pair[:, 0].copy()
    for k in range(1, n.shape[0]):
        nu_s += nu_pair[:, k]
    return nu_s, nu_pair


def pair_mass_coefficients(m: np.ndarray):
    """Mass-only pair constants a_sk, b_sk, gamma_sk (shape (L, L))."""
    ms = m[:, None]
    mk = m[None, :]
    a = mk / (ms + mk)
    b = 2.0 * a * ms / (ms + mk)
    gamma = (ms * a / 3.0) * (2.0 * mk / (ms + mk) - a)
    return a, b, gamma


def exchange_coefficients(n: np.ndarray, m: np.ndarray, lam: np.ndarray, K: float):
    """Density-weighted exchange coefficients xi_sk and gamma^sk.

    xi_sk  = lam_sk m_s m_k n_s n_k/(m_s+m_k)   - row-sum on the diagonal
    gam_sk = 3K lam_sk m_s m_k n_s n_k/(m_s+m_k)^2 - row-sum on the diagonal
    Rows therefore sum to zero exactly up to rounding.
    """
    L = m.size
    ms = m[:, None]
    mk = m[None, :]
    shape_tail = (None,) * (n.ndim - 1)
    msk = (ms * mk / (ms + mk))[(...,) + shape_tail]
    msk2 = (ms * mk / (ms + mk) ** 2)[(...,) + shape_tail]
    lamx = lam[(...,) + shape_tail]
    nn = n[:, None, ...] * n[None, :, ...]
    xi = lamx * msk * nn
    gam = 3.0 * K * lamx * msk2 * nn
    eye = np.eye(L)[(...,) + shape_tail]
    xi = xi - eye * xi.sum(axis=1, keepdims=True)
    gam = gam - eye * gam.sum(axis=1, keepdims=True)
    return xi, gam


@dataclass
class AuxClosure:
    """Model-tagged attractor parameters for one moment set."""

    model: str
    nu_s: np.ndarray                     # (L, ...)
    nu_pair: np.ndarray                  # (L, L, ...)
    u_star: np.ndarray | None = None     # aap: (L, ...)
    T_star: np.ndarray | None = None
    u_bar: np.ndarray | None = None      # gs: (...)
    T_bar: np.ndarray | None = None
    u_pair: np.ndarray | None = None     # bbgsp: (L, L, ...)
    T_pair: np.ndarray | None = None
    a: np.ndarray | None = None          # bbgsp mass constants (L, L)
    b: np.ndarray | None = None
    gamma: np.ndarray | None = None


def aap_aux(n, u, T, params: MixtureParams):
    """Fictitious per-species (u*_s, T*_s) of the single-attractor model."""
    m, K = params.m, params.K
    nu_s, _ = collision_frequencies(n, params.lam)
    xi, gam = exchange_coefficients(n, m, params.lam, K)
    shape_tail = (None,) * (n.ndim - 1)
    ms = m[(slice(None),) + shape_tail]
    denom = ms * n * nu_s
    u_star = u + np.einsum("sk...,k...->s...", xi, u) / denom

    msk2 = (m[:, None] * m[None, :] / (m[:, None] + m[None, :]) ** 2)
    lam_msk2 = (params.lam * msk2)[(...,) + shape_tail]
    nn = n[:, None, ...] * n[None, :, ...]
    cross = lam_msk2 * nn * (m[(slice(None), None) + shape_tail] * u[:, None, ...]
                             + m[(None, slice(None)) + shape_tail] * u[None, :, ...]) \
        * (u[None, :, ...] - u[:, None, ...])
    T_star = (
        T
        - ms / (3.0 * K) * (u_star ** 2 - u ** 2)
        + 2.0 / (3.0 * n * K * nu_s) * np.einsum("sk...,k...->s...", gam, T)
        + 2.0 / (3.0 * n * K * nu_s) * cross.sum(axis=1)
    )
    if np.any(T_star <= 0):
        raise ClosureError("non-positive fictitious temperature (inadmissible state)")
    return u_star, T_star


def gs_aux(n, u, T, params: MixtureParams):
    """Shared (u_bar, T_bar) enforcing total momentum/energy conservation."""
    m, K = params.m, params.K
    nu_s, _ = collision_frequencies(n, params.lam)
    shape_tail = (None,) * (n.ndim - 1)
    ms = m[(slice(None),) + shape_tail]
    w = nu_s * ms * n
    u_bar = (w * u).sum(axis=0) / w.sum(axis=0)
    T_bar = (nu_s * n * (ms * (u ** 2 - u_bar ** 2) + 3.0 * K * T)).sum(axis=0) \
        / (3.0 * K * (nu_s * n).sum(axis=0))
    if np.any(T_bar <= 0):
        raise ClosureError("non-positive shared auxiliary temperature")
    return u_bar, T_bar


def bbgsp_aux(n, u, T, params: MixtureParams):
    """Pair parameters (u_sk, T_sk) of the bi-species relaxation model."""
    a, b, gamma = pair_mass_coefficients(params.m)
    shape_tail = (None,) * (n.ndim - 1)
    a_x = a[(...,) + shape_tail]
    b_x = b[(...,) + shape_tail]
    g_x = gamma[(...,) + shape_tail]
    us = u[:, None, ...]
    uk = u[None, :, ...]
    Ts = T[:, None, ...]
    Tk = T[None, :, ...]
    u_pair = (1.0 - a_x) * us + a_x * uk
    T_pair = (1.0 - b_x) * Ts + b_x * Tk + (g_x / params.K) * (us - uk) ** 2
    if np.any(T_pair <= 0):
        raise ClosureError("non-positive pair temperature (violates positivity guarantee)")
    return u_pair, T_pair, a, b, gamma


def compute_closure(n, u, T, params: MixtureParams) -> AuxClosure:
    n = np.asarray(n, dtype=float)
    u = np.asarray(u, dtype=float)
    T = np.asarray(T, dtype=float)
    nu_s, nu_pair = collision_frequencies(n, params.lam)
    aux = AuxClosure(model=params.model, nu_s=nu_s, nu_pair=nu_pair)
    if params.model == AAP:
        aux.u_star, aux.T_star = aap_aux(n, u, T, params)
    elif params.model == GS:
        aux.u_bar, aux.T_bar = gs_aux(n, u, T, params)
    elif params.model == BBGSP:
        aux.u_pair, aux.T_pair, aux.a, aux.b, aux.gamma = bbgsp_aux(n, u, T, params)
    else:
        raise ClosureError(f"unknown model {params.model!r}")
    return aux


def discrete_maxwellian(n, u, T, m_s: float, K: float, vg: VelocityGrid,
                        normalize: bool = True):
    """Chu-pair attractor Gaussian on the velocity nodes.

    With normalize=True the g1 component is rescaled by its own quadrature
    mass so the discrete density is exactly n; implicit relaxation then
    conserves species mass to rounding instead of to truncation error.
    """
    n = np.asarray(n, dtype=float)
    b = K * np.asarray(T, dtype=float) / m_s
    phi = gaussian_1d(vg.nodes, np.asarray(u, dtype=float), b)
    if normalize:
        phi = phi / (phi @ vg.weights)[..., None]
    g1 = n[..., None] * phi
    g2 = (2.0 * b)[..., None] * g1
    return g1, g2


@njit(cache=True, parallel=True)
def _attractor_kernel(n_row, u_att, b_att, c_att, v, w):
    """Weighted sum of discretely-normalized Gaussian pairs, one row per
    attractor component: G1/G2 of shape (cells, velocities)."""
    P, M = u_att.shape
    n_v = v.size
    G1 = np.zeros((M, n_v))
    G2 = np.zeros((M, n_v))
    c_tot = np.zeros(M)
    for i in prange(M):
        phi = np.empty(n_v)
        for p in range(P):
            b = b_att[p, i]
            u = u_att[p, i]
            c = c_att[p, i]
            c_tot[i] += c
            pref = 1.0 / np.sqrt(2.0 * np.pi * b)
            ssum = 0.0
            for j in range(n_v):
                e = pref * np.exp(-0.5 * (v[j] - u) ** 2 / b)
                phi[j] = e
                ssum += e * w[j]
            scale = c * n_row[i] / ssum
            tb = 2.0 * b
            for j in range(n_v):
                G1[i, j] += scale * phi[j]
                G2[i, j] += tb * scale * phi[j]
    return G1, G2, c_tot


def build_attractor(aux: AuxClosure, s: int, n, params: MixtureParams,
                    vg: VelocityGrid, inv_scale: np.ndarray | None = None):
    """Frequency-weighted aggregate attractor of species s.

    Returns (G1_hat, G2_hat, c_tot) with the convention that the relaxation
    right-hand side of species s is  G_hat - c_tot * g.  inv_scale is an
    optional (L,) vector of per-pair prefactors (1/eps on the diagonal,
    1/kappa off it, for the split scaling); identity weights by default.
    """
    m_s, K = params.m[s], params.K
    n = np.asarray(n, dtype=float)
    if inv_scale is None:
        inv_scale = np.ones(params.L)
    if aux.model in (AAP, GS):
        # single attractor: every pair shares the species frequency
        c_tot = aux.nu_s[s] * inv_scale[s]
        u_a, T_a = (aux.u_star[s], aux.T_star[s]) if aux.model == AAP \
            else (aux.u_bar, aux.T_bar)
        u_att = np.atleast_1d(np.asarray(u_a, dtype=float))[None, :]
        T_att = np.atleast_1d(np.asarray(T_a, dtype=float))[None, :]
        c_att = np.broadcast_to(np.atleast_1d(np.asarray(c_tot, dtype=float)),
                                u_att.shape[1:])[None, :]
    else:
        c_pair = aux.nu_pair[s] \
            * inv_scale[(slice(None),) + (None,) * (aux.nu_pair.ndim - 2)]
        u_att = np.atleast_2d(aux.u_pair[s])
        T_att = np.atleast_2d(aux.T_pair[s])
        c_att = np.atleast_2d(c_pair)
    n_row = np.broadcast_to(np.atleast_1d(n[s]), (u_att.shape[1],))
    b_att = K * T_att / m_s
    G1, G2, c_tot_arr = _attractor_kernel(
        np.ascontiguousarray(n_row, dtype=float),
        np.ascontiguousarray(u_att, dtype=float),
        np.ascontiguousarray(b_att, dtype=float),
        np.ascontiguousarray(c_att, dtype=float),
        vg.nodes, vg.weights)
    squeeze = np.asarray(aux.nu_s[s]).ndim == 0
    if squeeze:
        return G1[0], G2[0], float(c_tot_arr[0])
    return G1, G2, c_tot_arr


def relaxation_term(state, params: MixtureParams, moments=None):
    """Unscaled collision term per species, as ChuPairs (diagnostic)."""
    from .moments import compute_moments

    mom = moments if moments is not None else compute_moments(state, params)
    n = np.stack([sp.n for sp in mom.species])
    u = np.stack([sp.u for sp in mom.species])
    T = np.stack([sp.T for sp in mom.species])
    aux = compute_closure(n, u, T, params)
    out = []
    for s in range(params.L):
        G1, G2, c_tot = build_attractor(aux, s, n, params, state.vg)
        ct = np.asarray(c_tot)[..., None]
        out.append(ChuPair(G1 - ct * state.pairs[s].g1, G2 - ct * state.pairs[s].g2))
    return out


def closure_table(state, params: MixtureParams) -> dict:
    """Per-cell auxiliary parameters as flat named columns (debug dump)."""
    from .moments import compute_moments

    mom = compute_moments(state, params)
    n = np.stack([sp.n for sp in mom.species])
    u = np.stack([sp.u for sp in mom.species])
    T = np.stack([sp.T for sp in mom.species])
    aux = compute_closure(n, u, T, params)
    cols = {"x": state.sx.centers}
    for s in range(params.L):
        cols[f"nu_{s + 1}"] = aux.nu_s[s]
    if aux.model == AAP:
        for s in range(params.L):
            cols[f"u_star_{s + 1}"] = aux.u_star[s]
            cols[f"T_star_{s + 1}"] = aux.T_star[s]
    elif aux.model == GS:
        cols["u_bar"] = aux.u_bar
        cols["T_bar"] = aux.T_bar
    else:
        for s in range(params.L):
            for k in range(params.L):
                cols[f"u_pair_{s + 1}{k + 1}"] = aux.u_pair[s, k]
                cols[f"T_pair_{s + 1}{k + 1}"] = aux.T_pair[s, k]
    return cols


def dump_closure_csv(state, params: MixtureParams, path) -> None:
    from .runio import write_table_csv

    cols = closure_table(state, params)
    write_table_csv(path, f"# field=closure model={params.model} "
                          f"units={params.units}", cols)


def noble_gas_frequencies(T: float, m: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Collision constants from temperature and species viscosities.

    Diagonal: (4/3) T / mu_s.  Off-diagonal:
    (2 sqrt2 / 3) (m_s+m_k)^(1/4) / (m_s m_k)^(1/2) * T / sqrt(mu_s mu_k).
    """
    m = np.asarray(m, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if not T > 0 or np.any(mu <= 0):
        raise ClosureError("temperature and viscosities must be positive")
    ms = m[:, None]
    mk = m[None, :]
    lam = (2.0 * np.sqrt(2.0) / 3.0) * (ms + mk) ** 0.25 / np.sqrt(ms * mk) \
        * T / np.sqrt(mu[:, None] * mu[None, :])
    np.fill_diagonal(lam, (4.0 / 3.0) * T / mu)
    return lam
