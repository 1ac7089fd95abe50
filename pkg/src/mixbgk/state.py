"""Mixture parameters and the reduced kinetic state.

The 3D-velocity problem with planar symmetry is carried as two coupled 1D
distributions per species: g1 marginalizes f over the transverse velocities,
g2 carries the full transverse kinetic energy density (not halved).  With
that convention the attractor of g2 is exactly (2*K*T/m) times the attractor
of g1, which keeps every relaxation formula below closed.

Arrays are species-major, then (x, v): state.g1[s][i, j].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import FREE_FLOW, INFLOW_OUTFLOW, PERIODIC, SpatialGrid, VelocityGrid

AAP = "aap"
GS = "gs"
BBGSP = "bbgsp"
MODELS = (AAP, GS, BBGSP)

ABSTRACT_UNITS = "abstract"
MOLAR_UNITS = "molar"

# R = 8.3145 J/(mol K) expressed in kJ/(mol K): with masses in kg/mol the
# velocity unit is sqrt(kJ/kg) ~ 31.62 m/s, which is the scale the noble-gas
# shock scenarios are set up in.
MOLAR_GAS_CONSTANT = 8.3145e-3


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class MixtureParams:
    """Species masses, collision-frequency constants and scale parameters."""

    m: np.ndarray                 # masses, shape (L,)
    lam: np.ndarray               # symmetric collision constants, shape (L, L)
    K: float = 1.0                # gas constant of the unit system
    eps: float = 1.0              # Knudsen-type scale, intra-species
    kappa: float = 1.0            # Knudsen-type scale, inter-species
    model: str = BBGSP
    units: str = ABSTRACT_UNITS

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "lam", lam)
        if m.ndim != 1 or m.size == 0 or np.any(m <= 0):
            raise StateError("masses must be a 1D array of positive values")
        L = m.size
        if lam.shape != (L, L):
            raise StateError(f"lambda matrix must be {L}x{L}")
        if np.any(lam < 0):
            raise StateError("lambda entries must be nonnegative")
        if not np.allclose(lam, lam.T, rtol=0.0, atol=0.0):
            raise StateError("lambda matrix must be exactly symmetric")
        if not (self.eps > 0 and self.kappa > 0):
            raise StateError("eps and kappa must be positive")
        if not self.K > 0:
            raise StateError("gas constant must be positive")
        if self.model not in MODELS:
            raise StateError(f"unknown model {self.model!r}")

    @property
    def L(self) -> int:
        return self.m.size

    def with_scales(self, eps: float | None = None, kappa: float | None = None,
                    model: str | None = None) -> "MixtureParams":
        return MixtureParams(
            m=self.m, lam=self.lam, K=self.K,
            eps=self.eps if eps is None else eps,
            kappa=self.kappa if kappa is None else kappa,
            model=self.model if model is None else model,
            units=self.units,
        )


@dataclass
class ChuPair:
    """Reduced distribution pair of one species on the (x, v) grid."""

    g1: np.ndarray
    g2: np.ndarray

    def copy(self) -> "ChuPair":
        return ChuPair(self.g1.copy(), self.g2.copy())


@dataclass
class KineticState:
    """Per-species Chu pairs plus the grids they live on."""

    pairs: list[ChuPair]
    sx: SpatialGrid
    vg: VelocityGrid

    @property
    def L(self) -> int:
        return len(self.pairs)

    def copy(self) -> "KineticState":
        return KineticState([p.copy() for p in self.pairs], self.sx, self.vg)


def gaussian_1d(v: np.ndarray, mean, variance) -> np.ndarray:
    """Unit-mass Gaussian density on the velocity nodes.

    mean/variance may be scalars or x-columns; output broadcasts to (x, v).
    """
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance <= 0):
        raise StateError("non-positive Maxwellian variance")
    a = mean[..., None] if mean.ndim else mean
    b = variance[..., None] if variance.ndim else variance
    return np.exp(-0.5 * (v - a) ** 2 / b) / np.sqrt(2.0 * np.pi * b)


def maxwellian_pair(n, u, T, m_s: float, K: float, vg: VelocityGrid) -> ChuPair:
    """Chu pair of the isotropic Maxwellian with fields (n, u, T).

    n, u, T are scalars or arrays over x.  Raises on non-positive n or T.
    """
    n = np.atleast_1d(np.asarray(n, dtype=float))
    u = np.broadcast_to(np.asarray(u, dtype=float), n.shape)
    T = np.broadcast_to(np.asarray(T, dtype=float), n.shape)
    if np.any(n <= 0):
        raise StateError("non-positive density in Maxwellian data")
    if np.any(T <= 0):
        raise StateError("non-positive temperature in Maxwellian data")
    b = K * T / m_s
    g1 = n[:, None] * gaussian_1d(vg.nodes, u, b)
    g2 = (2.0 * b)[:, None] * g1
    return ChuPair(g1, g2)


def init_maxwellian_state(
    fields: list[tuple],
    params: MixtureParams,
    sx: SpatialGrid,
    vg: VelocityGrid,
) -> KineticState:
    """Maxwellian initial data from per-species (n, u, T) over x.

    Each entry of fields is an (n, u, T) triple of scalars or arrays of
    length sx.n_x.
    """
    if len(fields) != params.L:
        raise StateError("one (n, u, T) triple per species required")
    pairs = []
    for s, (n, u, T) in enumerate(fields):
        n = np.broadcast_to(np.asarray(n, dtype=float), (sx.n_x,))
        pairs.append(maxwellian_pair(n, u, T, params.m[s], params.K, vg))
    return KineticState(pairs, sx, vg)


def extend_with_ghosts(
    arr: np.ndarray,
    bc: str,
    ghost: int,
    left_ghost: np.ndarray | None = None,
    right_ghost: np.ndarray | None = None,
) -> np.ndarray:
    """Pad an (x, ...) array with ghost cells along axis 0.

    periodic: wraparound copies; free-flow: edge replication; inflow-outflow:
    ghost values pinned to the supplied boundary states.  The interior block
    of the result is a copy, never a view into arr.
    """
    n = arr.shape[0]
    if ghost > n:
        raise StateError("ghost width exceeds interior size")
    if ghost == 0:
        return arr.copy()
    if bc == PERIODIC:
        return np.concatenate([arr[n - ghost:], arr, arr[:ghost]], axis=0)
    if bc == FREE_FLOW:
        left = np.repeat(arr[:1], ghost, axis=0)
        right = np.repeat(arr[-1:], ghost, axis=0)
        return np.concatenate([left, arr, right], axis=0)
    if bc == INFLOW_OUTFLOW:
        if left_ghost is None or right_ghost is None:
            raise StateError("inflow-outflow requires pinned boundary values")
        left = np.broadcast_to(left_ghost, (ghost,) + arr.shape[1:])
        right = np.broadcast_to(right_ghost, (ghost,) + arr.shape[1:])
        return np.concatenate([left, arr, right], axis=0)
    raise StateError(f"unknown boundary kind {bc!r}")


def apply_boundary(
    pair: ChuPair,
    bc: str,
    ghost: int,
    pinned: tuple[ChuPair, ChuPair] | None = None,
) -> ChuPair:
    """Ghost-extended view of one species' pair (interior cells untouched)."""
    lg1 = rg1 = lg2 = rg2 = None
    if bc == INFLOW_OUTFLOW:
        if pinned is None:
            raise StateError("inflow-outflow requires pinned boundary pairs")
        left, right = pinned
        lg1, rg1 = left.g1[:1], right.g1[-1:]
        lg2, rg2 = left.g2[:1], right.g2[-1:]
    return ChuPair(
        extend_with_ghosts(pair.g1, bc, ghost, lg1, rg1),
        extend_with_ghosts(pair.g2, bc, ghost, lg2, rg2),
    )
