"""Leading-order discrepancy between the mixture models, and L1 distances.

Expanding the single-attractor Maxwellians around the actual species moments
and matching first derivatives gives closed-form coefficients for the
velocity-like and temperature-like leading error between the aap and bbgsp
operators (error_terms_*), and between aap and gs (shared_attractor_*).
Every closed form is also evaluated here from its defining frequency-weighted
sum through the closures module, so the two routes can be cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closures import aap_aux, bbgsp_aux, collision_frequencies, gs_aux
from .state import KineticState, MixtureParams


@dataclass
class ErrorTerms:
    """Velocity/temperature leading errors, closed-form and definitional."""

    e_u: np.ndarray
    e_T: np.ndarray
    e_u_def: np.ndarray
    e_T_def: np.ndarray


def prop_error_terms(n, u, T, params: MixtureParams) -> ErrorTerms:
    """aap-vs-bbgsp leading errors per species.

    Closed form: the velocity term vanishes identically; the temperature
    term is (m_s/3K)[sum_k nu_sk a_sk^2 (u_s-u_k)^2 - |X_s|^2/nu_s] with
    X_s = sum_r nu_sr a_sr (u_r - u_s).  The definitional route evaluates
    sum_k nu_sk (u*_s - u_sk) and sum_k nu_sk (T*_s - T_sk) directly.
    """
    n = np.asarray(n, dtype=float)
    u = np.asarray(u, dtype=float)
    T = np.asarray(T, dtype=float)
    m, K = params.m, params.K
    nu_s, nu_pair = collision_frequencies(n, params.lam)
    u_star, T_star = aap_aux(n, u, T, params)
    u_pair, T_pair, a, _, _ = bbgsp_aux(n, u, T, params)

    tail = (None,) * (n.ndim - 1)
    a_x = a[(...,) + tail]
    du = u[None, :, ...] - u[:, None, ...]
    X = (nu_pair * a_x * du).sum(axis=1)
    ms = m[(slice(None),) + tail]
    e_T = ms / (3.0 * K) * ((nu_pair * a_x ** 2 * du ** 2).sum(axis=1)
                            - X * X / nu_s)
    e_u = np.zeros_like(e_T)

    e_u_def = (nu_pair * (u_star[:, None, ...] - u_pair)).sum(axis=1)
    e_T_def = (nu_pair * (T_star[:, None, ...] - T_pair)).sum(axis=1)
    return ErrorTerms(e_u=e_u, e_T=e_T, e_u_def=e_u_def, e_T_def=e_T_def)


def shared_attractor_error_terms(n, u, T, params: MixtureParams) -> ErrorTerms:
    """aap-vs-gs leading errors per species (closed form and definitions).

    The temperature term is assembled from its three closed-form pieces
    (temperature exchange, shared-velocity kinetic shift, fictitious-velocity
    kinetic shift) and cross-checked against nu_s (T*_s - T_bar).
    """
    n = np.asarray(n, dtype=float)
    u = np.asarray(u, dtype=float)
    T = np.asarray(T, dtype=float)
    m, K, lam = params.m, params.K, params.lam
    nu_s, _ = collision_frequencies(n, params.lam)
    u_star, T_star = aap_aux(n, u, T, params)
    u_bar, T_bar = gs_aux(n, u, T, params)

    tail = (None,) * (n.ndim - 1)
    ms = m[(slice(None),) + tail]              # species-aligned (axis 0)
    ms_col = m[(slice(None), None) + tail]     # m_s inside (s, r) matrices
    mr = m[(None, slice(None)) + tail]         # m_r inside (s, r) matrices
    lam_x = lam[(...,) + tail]
    msum = (m[:, None] + m[None, :])[(...,) + tail]
    off = (1.0 - np.eye(params.L))[(...,) + tail]

    nr = n[None, :, ...]
    du = u[None, :, ...] - u[:, None, ...]
    dT = T[None, :, ...] - T[:, None, ...]
    w_mom_tot = (nu_s * ms * n).sum(axis=0)
    nun = nu_s * n
    nun_tot = nun.sum(axis=0)

    e_u = (off * (lam_x * mr * nr / msum
                  - nu_s[:, None, ...] * nu_s[None, :, ...] * mr * nr / w_mom_tot)
           * du).sum(axis=1)

    j1 = (off * (2.0 * lam_x * ms_col * mr * nr / msum ** 2
                 - nu_s[:, None, ...] * nun[None, :, ...] / nun_tot)
          * dT).sum(axis=1)
    j2 = nu_s * (nun * ms * (u_bar ** 2 - u ** 2)).sum(axis=0) \
        / (3.0 * K * nun_tot)
    xt = (off * lam_x * mr * nr / msum * du).sum(axis=1)
    j3 = (-ms / (3.0 * K) * xt * (xt / nu_s)
          + 2.0 * ms / (3.0 * K)
          * (off * lam_x * mr ** 2 * nr / msum ** 2 * du ** 2).sum(axis=1))
    e_T = j1 + j2 + j3

    e_u_def = nu_s * (u_star - u_bar)
    e_T_def = nu_s * (T_star - T_bar)
    return ErrorTerms(e_u=e_u, e_T=e_T, e_u_def=e_u_def, e_T_def=e_T_def)


def l1_relative_distance(a: KineticState, b: KineticState) -> np.ndarray:
    """Per-species ||g1_a - g1_b||_1 / ||g1_a||_1 over phase space."""
    if a.sx != b.sx or a.vg != b.vg:
        raise ValueError("states live on different grids")
    w = a.vg.weights
    out = []
    for pa, pb in zip(a.pairs, b.pairs):
        ref = float((np.abs(pa.g1) @ w).sum())
        if ref == 0.0:
            raise ValueError("zero-norm reference state")
        out.append(float((np.abs(pa.g1 - pb.g1) @ w).sum()) / ref)
    return np.array(out)


def fit_loglog_slope(eps_values, distances) -> float:
    """Least-squares slope of log(distance) against log(eps)."""
    x = np.log(np.asarray(eps_values, dtype=float))
    y = np.log(np.asarray(distances, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
