"""Kinetic toolkit for inert monoatomic gas mixtures.

Three consistent relaxation models (aap, gs, bbgsp), an asymptotic
preserving semi-Lagrangian solver, their Navier-Stokes limits, and the
closed-form leading-order discrepancy diagnostics between the models.
"""

from numba import config as _numba_config

# fork-safe deterministic threading layer: kernel rows are independent, and
# scenario matrices may fan out into worker processes
_numba_config.THREADING_LAYER = "workqueue"

from .grids import FREE_FLOW, INFLOW_OUTFLOW, PERIODIC, SpatialGrid, \
    VelocityGrid, make_grids
from .state import AAP, BBGSP, GS, MODELS, ChuPair, KineticState, \
    MixtureParams, init_maxwellian_state, maxwellian_pair
from .moments import compute_moments, compute_species_moments, \
    compute_global_moments, conservation_totals, entropy_functional
from .closures import collision_frequencies, aap_aux, gs_aux, bbgsp_aux, \
    build_attractor, compute_closure, noble_gas_frequencies
from .kinetic import BE1, DIRK2, SolverConfig, TimeController, advance, \
    moment_solve, relax_implicit, transport

__version__ = "0.1.0"
