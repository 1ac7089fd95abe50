"""Conservative shift-remap of cell-averaged profiles.

Each velocity slice of the transport step is a rigid shift by v*dt.  The
shift splits into an integer number of cells plus a fractional part r in
[0, 1); the integer part is an exact relabeling and the fractional part is a
finite-volume remap of a piecewise-polynomial reconstruction, so the cell
total is preserved up to rounding (telescoping face masses).

Two reconstructions:

PL2  piecewise-linear with minmod-limited slope (second order, monotone).
PP3  piecewise-parabolic blending the three-cell parabola with one-sided
     linear stencils through smoothness-indicator weights (third order in
     smooth regions), plus a range guard: wherever the parabola leaves the
     local cell-average range it falls back to the minmod line, so the remap
     creates no new extrema.

Both keep the exact cell average in every cell, whatever the weights do.

The production path is a fused numba kernel (one pass per row); the plain
numpy implementation below is kept as the reference the tests check the
kernel against.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

PL2 = "pl2"
PP3 = "pp3"
METHODS = (PL2, PP3)

# smoothness-indicator regularization; also sets the ~1e-12 leakage of the
# wrong-side stencil at an O(1) jump
WENO_EPS = 1e-6
_IDEAL = (0.25, 0.5, 0.25)  # left, central, right


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.where(np.abs(a) < np.abs(b), a, b)
    return np.where(a * b > 0.0, out, 0.0)


def cell_polynomials(gm: np.ndarray, g0: np.ndarray, gp: np.ndarray,
                     method: str):
    """Per-cell polynomial coefficients (c0, c1, c2) in the local coordinate
    xi = (x - x_j)/dx over [-1/2, 1/2], from the three cell averages.

    Reference implementation (vectorized numpy); the solver uses the numba
    kernels below, which must agree with this to rounding.
    """
    if method == PL2:
        c1 = _minmod(g0 - gm, gp - g0)
        return g0, c1, np.zeros_like(g0)
    if method != PP3:
        raise ValueError(f"unknown reconstruction {method!r}")
    dp = gp - g0
    dm = g0 - gm
    d2 = gp - 2.0 * g0 + gm
    dc = gp - gm
    # candidate polynomials all have cell average g0
    cl, cc, cr = _IDEAL
    is_l = dm * dm
    is_r = dp * dp
    is_c = (13.0 / 3.0) * d2 * d2 + 0.25 * dc * dc
    al = cl / (WENO_EPS + is_l) ** 2
    ar = cr / (WENO_EPS + is_r) ** 2
    ac = cc / (WENO_EPS + is_c) ** 2
    tot = al + ac + ar
    wl, wc, wr = al / tot, ac / tot, ar / tot
    # optimal parabola: g0 - d2/24 + (dc/2) xi + (d2/2) xi^2
    # central candidate = (opt - cl*P_L - cr*P_R)/cc
    pc_c0 = (g0 - d2 / 24.0 - (cl + cr) * g0) / cc
    pc_c1 = (0.5 * dc - cl * dm - cr * dp) / cc
    pc_c2 = (0.5 * d2) / cc
    c0 = wl * g0 + wc * pc_c0 + wr * g0
    c1 = wl * dm + wc * pc_c1 + wr * dp
    c2 = wc * pc_c2
    # range guard: if the parabola leaves [min, max] of the three cell
    # averages anywhere in the cell, fall back to the monotone linear
    # polynomial.  Keeps the remap free of new extrema; costs third order
    # only in the O(1) cells at profile extrema.
    lo = np.minimum(np.minimum(gm, g0), gp)
    hi = np.maximum(np.maximum(gm, g0), gp)
    p_left = c0 - 0.5 * c1 + 0.25 * c2
    p_right = c0 + 0.5 * c1 + 0.25 * c2
    with np.errstate(divide="ignore", invalid="ignore"):
        xi_v = np.where(c2 != 0.0, -c1 / (2.0 * c2), np.inf)
        p_vert = c0 - c1 * c1 / np.where(c2 != 0.0, 4.0 * c2, 1.0)
    vertex_in = np.abs(xi_v) < 0.5
    p_min = np.minimum(p_left, p_right)
    p_max = np.maximum(p_left, p_right)
    p_min = np.where(vertex_in, np.minimum(p_min, p_vert), p_min)
    p_max = np.where(vertex_in, np.maximum(p_max, p_vert), p_max)
    slack = 1e-14 * (np.abs(hi) + np.abs(lo))
    bad = (p_max > hi + slack) | (p_min < lo - slack)
    c1_mm = _minmod(dm, dp)
    c0 = np.where(bad, g0, c0)
    c1 = np.where(bad, c1_mm, c1)
    c2 = np.where(bad, 0.0, c2)
    return c0, c1, c2


def face_outflux(c0, c1, c2, r):
    """Mass in [1/2 - r, 1/2] of the cell polynomial (r in [0, 1])."""
    a = 0.5 - r
    return c0 * r + 0.5 * c1 * (0.25 - a * a) + (c2 / 3.0) * (0.125 - a * a * a)


# ---------------------------------------------------------------------------
# fused kernels

@njit(cache=True, inline="always")
def _coeffs_scalar(gm, g0, gp, use_pp3):
    if not use_pp3:
        dm = g0 - gm
        dp = gp - g0
        if dm * dp > 0.0:
            c1 = dm if abs(dm) < abs(dp) else dp
        else:
            c1 = 0.0
        return g0, c1, 0.0
    dp = gp - g0
    dm = g0 - gm
    d2 = gp - 2.0 * g0 + gm
    dc = gp - gm
    is_l = dm * dm
    is_r = dp * dp
    is_c = (13.0 / 3.0) * d2 * d2 + 0.25 * dc * dc
    al = 0.25 / (WENO_EPS + is_l) ** 2
    ar = 0.25 / (WENO_EPS + is_r) ** 2
    ac = 0.5 / (WENO_EPS + is_c) ** 2
    tot = al + ac + ar
    wl = al / tot
    wc = ac / tot
    wr = ar / tot
    pc_c0 = (g0 - d2 / 24.0 - 0.5 * g0) / 0.5
    pc_c1 = (0.5 * dc - 0.25 * dm - 0.25 * dp) / 0.5
    pc_c2 = 0.5 * d2 / 0.5
    c0 = wl * g0 + wc * pc_c0 + wr * g0
    c1 = wl * dm + wc * pc_c1 + wr * dp
    c2 = wc * pc_c2
    lo = min(min(gm, g0), gp)
    hi = max(max(gm, g0), gp)
    p_left = c0 - 0.5 * c1 + 0.25 * c2
    p_right = c0 + 0.5 * c1 + 0.25 * c2
    p_min = min(p_left, p_right)
    p_max = max(p_left, p_right)
    if c2 != 0.0:
        xi_v = -c1 / (2.0 * c2)
        if abs(xi_v) < 0.5:
            p_vert = c0 - c1 * c1 / (4.0 * c2)
            p_min = min(p_min, p_vert)
            p_max = max(p_max, p_vert)
    slack = 1e-14 * (abs(hi) + abs(lo))
    if p_max > hi + slack or p_min < lo - slack:
        if dm * dp > 0.0:
            c1 = dm if abs(dm) < abs(dp) else dp
        else:
            c1 = 0.0
        return g0, c1, 0.0
    return c0, c1, c2


@njit(cache=True, inline="always")
def _outflux_scalar(c0, c1, c2, r):
    a = 0.5 - r
    return c0 * r + 0.5 * c1 * (0.25 - a * a) \
        + (c2 / 3.0) * (0.125 - a * a * a)


@njit(cache=True, parallel=True)
def _remap_ghosted(ext, s_arr, r_arr, n_x, ghost, use_pp3):
    rows = ext.shape[0]
    out = np.empty((rows, n_x))
    for i in prange(rows):
        s = s_arr[i]
        r = r_arr[i]
        lo = ghost - s - 1
        arow = np.empty(n_x + 1)
        for t in range(n_x + 1):
            j = lo + t
            c0, c1, c2 = _coeffs_scalar(ext[i, j - 1], ext[i, j],
                                        ext[i, j + 1], use_pp3)
            arow[t] = _outflux_scalar(c0, c1, c2, r)
        for t in range(n_x):
            out[i, t] = ext[i, lo + 1 + t] - arow[t + 1] + arow[t]
    return out


@njit(cache=True, parallel=True)
def _remap_periodic(arr, s_arr, r_arr, use_pp3):
    rows, n = arr.shape
    out = np.empty_like(arr)
    for i in prange(rows):
        s = s_arr[i] % n
        r = r_arr[i]
        arow = np.empty(n)
        for j in range(n):
            c0, c1, c2 = _coeffs_scalar(arr[i, (j - 1) % n], arr[i, j],
                                        arr[i, (j + 1) % n], use_pp3)
            arow[j] = _outflux_scalar(c0, c1, c2, r)
        for t in range(n):
            j = (t - s) % n
            out[i, t] = arr[i, j] - arow[j] + arow[(j - 1) % n]
    return out


def shift_periodic(arr: np.ndarray, c: np.ndarray, method: str) -> np.ndarray:
    """Remap rows of arr (R, N) by per-row shifts c (in cells, signed)."""
    arr = np.ascontiguousarray(np.atleast_2d(arr))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    s = np.floor(c).astype(np.int64)
    r = c - s
    if method not in METHODS:
        raise ValueError(f"unknown reconstruction {method!r}")
    return _remap_periodic(arr, s, r, method == PP3)


def shift_ghosted(ext: np.ndarray, c: np.ndarray, n_x: int, ghost: int,
                  method: str) -> np.ndarray:
    """Remap on a ghost-extended array ext (R, n_x + 2*ghost).

    ghost must be at least max(|floor(c)|) + 2; the result covers the n_x
    interior cells only.
    """
    ext = np.ascontiguousarray(np.atleast_2d(ext))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    s = np.floor(c).astype(np.int64)
    if np.any(np.abs(s) + 2 > ghost):
        raise ValueError("ghost width too small for this shift")
    r = c - s
    if method not in METHODS:
        raise ValueError(f"unknown reconstruction {method!r}")
    return _remap_ghosted(ext, s, r, n_x, ghost, method == PP3)


def required_ghost(c: np.ndarray) -> int:
    s = np.floor(np.asarray(c, dtype=float)).astype(int)
    return int(np.max(np.abs(s))) + 2


def shift_periodic_reference(arr, c, method):
    """Numpy reference path (tests compare the kernel against this)."""
    arr = np.atleast_2d(arr)
    c = np.atleast_1d(np.asarray(c, dtype=float))
    s = np.floor(c).astype(int)
    r = (c - s)[:, None]
    gm = np.roll(arr, 1, axis=1)
    gp = np.roll(arr, -1, axis=1)
    c0, c1, c2 = cell_polynomials(gm, arr, gp, method)
    A = face_outflux(c0, c1, c2, r)
    B = arr - A
    n = arr.shape[1]
    rows = np.arange(arr.shape[0])[:, None]
    idx = (np.arange(n)[None, :] - s[:, None]) % n
    return B[rows, idx] + A[rows, (idx - 1) % n]
