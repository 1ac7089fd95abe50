"""Velocity-quadrature moments of Chu pairs, per species and mixture-global.

Temperatures are taken from the centered second moment (u_s first, then
integral of (v-u_s)^2 g1 plus the transverse energy g2) to avoid the
cancellation that the raw-second-moment form suffers at high drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import VelocityGrid
from .state import ChuPair, KineticState, MixtureParams

# densities below this are reported as vacuum instead of producing NaN moments
VACUUM_FLOOR = 1e-30


class MomentError(ValueError):
    pass


@dataclass
class SpeciesMoments:
    n: np.ndarray
    u: np.ndarray
    T: np.ndarray
    vacuum: np.ndarray  # bool mask of cells treated as vacuum


@dataclass
class MomentSet:
    """Per-species (n_s, u_s, T_s) plus global (n, rho, u, T) fields."""

    species: list[SpeciesMoments]
    n: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray

    @property
    def L(self) -> int:
        return len(self.species)


def compute_species_moments(pair: ChuPair, m_s: float, K: float,
                            vg: VelocityGrid) -> SpeciesMoments:
    """(n_s, u_s, T_s) of one species from its Chu pair."""
    v = vg.nodes
    w = vg.weights
    n = pair.g1 @ w
    vacuum = n < VACUUM_FLOOR
    n_safe = np.where(vacuum, 1.0, n)
    u = (pair.g1 * v) @ w / n_safe
    e_thermal = (pair.g1 * (v - u[:, None]) ** 2) @ w + pair.g2 @ w
    T = m_s * e_thermal / (3.0 * K * n_safe)
    n = np.where(vacuum, 0.0, n)
    u = np.where(vacuum, 0.0, u)
    T = np.where(vacuum, 0.0, T)
    return SpeciesMoments(n=n, u=u, T=T, vacuum=vacuum)


def compute_global_moments(species: list[SpeciesMoments], m: np.ndarray,
                           K: float) -> tuple[np.ndarray, ...]:
    """Mixture (n, rho, u, T) from the per-species moments."""
    n = sum(sp.n for sp in species)
    if np.all(n <= 0):
        raise MomentError("all-vacuum state has no global moments")
    rho = sum(m_s * sp.n for m_s, sp in zip(m, species))
    u = sum(m_s * sp.n * sp.u for m_s, sp in zip(m, species)) / rho
    # 3 n K T = 3 sum n_s K T_s + sum rho_s |u_s - u|^2
    e = sum(3.0 * sp.n * K * sp.T + m_s * sp.n * (sp.u - u) ** 2
            for m_s, sp in zip(m, species))
    T = e / (3.0 * K * n)
    return n, rho, u, T


def compute_moments(state: KineticState, params: MixtureParams) -> MomentSet:
    species = [
        compute_species_moments(pair, params.m[s], params.K, state.vg)
        for s, pair in enumerate(state.pairs)
    ]
    n, rho, u, T = compute_global_moments(species, params.m, params.K)
    return MomentSet(species=species, n=n, rho=rho, u=u, T=T)


def entropy_functional(state: KineticState) -> float:
    """Reduced-entropy proxy sum_s integral of g1 log g1 over (x, v).

    Monotonicity diagnostic for homogeneous relaxation; this is the entropy
    of the g1 marginals, not the full 3D functional.  Cells at or below the
    positivity floor contribute nothing (x log x -> 0).
    """
    dx = state.sx.dx
    w = state.vg.weights
    total = 0.0
    for pair in state.pairs:
        g = pair.g1
        mask = g > VACUUM_FLOOR
        q = np.where(mask, g, 1.0)
        total += float(((np.where(mask, q * np.log(q), 0.0)) @ w).sum() * dx)
    return total


def conservation_totals(state: KineticState, params: MixtureParams) -> dict:
    """Discrete invariants: per-species mass, total momentum, total energy."""
    dx = state.sx.dx
    w = state.vg.weights
    v = state.vg.nodes
    mass = []
    momentum = 0.0
    energy = 0.0
    for s, pair in enumerate(state.pairs):
        m_s = params.m[s]
        mass.append(float((pair.g1 @ w).sum() * dx))
        momentum += m_s * float(((pair.g1 * v) @ w).sum() * dx)
        energy += 0.5 * m_s * float(
            ((pair.g1 * v * v) @ w).sum() * dx + (pair.g2 @ w).sum() * dx
        )
    return {"mass": mass, "momentum": momentum, "energy": energy}
