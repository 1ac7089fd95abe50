import numpy as np
import pytest

from mixbgk.grids import GridError, SpatialGrid, VelocityGrid, make_grids
from mixbgk.moments import compute_species_moments
from mixbgk.state import (FREE_FLOW, INFLOW_OUTFLOW, PERIODIC, MixtureParams,
                          StateError, apply_boundary, extend_with_ghosts,
                          init_maxwellian_state, maxwellian_pair)


def test_grid_spacings_match_published_setups():
    sx, vg = make_grids(-1.0, 1.0, 200, -15.0, 15.0, 60)
    assert sx.dx == pytest.approx(0.01, abs=0) and vg.dv == pytest.approx(0.5, abs=0)
    sx, vg = make_grids(0.0, 1.0, 4, -1.0, 1.0, 8)
    assert sx.dx == 0.25 and vg.dv == 0.25
    sx, vg = make_grids(-6.0, 6.0, 600, -160.0, 160.0, 320)
    assert sx.dx == pytest.approx(0.02) and vg.dv == pytest.approx(1.0)


def test_grid_nodes_bitwise_reproducible():
    vg = VelocityGrid(-15.0, 15.0, 60)
    nodes = vg.nodes
    recomputed = vg.v_min + vg.dv * np.arange(vg.n_v + 1)
    assert np.array_equal(nodes, recomputed)
    assert nodes[0] == -15.0 and nodes[-1] == 15.0


def test_grid_rejects_degenerate_bounds():
    with pytest.raises(GridError):
        VelocityGrid(1.0, 15.0, 60)       # zero not inside
    with pytest.raises(GridError):
        VelocityGrid(-np.inf, 15.0, 60)
    with pytest.raises(GridError):
        SpatialGrid(1.0, 1.0, 10)
    with pytest.raises(GridError):
        SpatialGrid(0.0, 1.0, 2)
    with pytest.raises(GridError):
        SpatialGrid(0.0, 1.0, 10, bc="bogus")


def test_quadrature_weights_trapezoid():
    vg = VelocityGrid(-2.0, 2.0, 8)
    w = vg.weights
    assert w[0] == w[-1] == 0.5 * vg.dv
    assert np.all(w[1:-1] == vg.dv)
    assert w.sum() == pytest.approx(vg.v_max - vg.v_min)


def test_maxwellian_peak_and_transverse_energy():
    # unit density, zero drift, T = m/K: variance 1 -> peak 1/sqrt(2 pi)
    vg = VelocityGrid(-8.0, 8.0, 64)
    pair = maxwellian_pair(1.0, 0.0, 3.0, 3.0, 1.0, vg)
    j0 = np.argmin(np.abs(vg.nodes))
    assert pair.g1[0, j0] == pytest.approx(1.0 / np.sqrt(2.0 * np.pi), rel=1e-12)
    assert pair.g2[0] @ vg.weights == pytest.approx(2.0, rel=1e-8)


def test_init_rejects_nonpositive_fields():
    sx, vg = make_grids(0.0, 1.0, 4, -8.0, 8.0, 16)
    params = MixtureParams(m=np.array([1.0]), lam=np.array([[1.0]]))
    with pytest.raises(StateError):
        init_maxwellian_state([(0.0, 0.0, 1.0)], params, sx, vg)
    with pytest.raises(StateError):
        init_maxwellian_state([(1.0, 0.0, -2.0)], params, sx, vg)


def test_init_moment_roundtrip_four_gas(four_gas):
    # published grid resolution; velocity domain spans > 8 thermal widths
    sx, vg = make_grids(-1.0, 1.0, 8, -15.0, 15.0, 60)
    n0 = 1.0 / four_gas.m
    T0 = 4.0 / n0.sum()
    assert T0 == pytest.approx(31.988015261815, rel=1e-10)
    x = sx.centers
    state = init_maxwellian_state(
        [(n0[s], 0.3 * np.sin(np.pi * x), T0) for s in range(4)],
        four_gas, sx, vg)
    for s in range(4):
        mom = compute_species_moments(state.pairs[s], four_gas.m[s],
                                      four_gas.K, vg)
        assert np.abs(mom.n - n0[s]).max() / n0[s] < 1e-8
        assert np.abs(mom.u - 0.3 * np.sin(np.pi * x)).max() < 1e-8
        assert np.abs(mom.T - T0).max() / T0 < 1e-8


def test_boundary_periodic_wraparound():
    arr = np.array([1.0, 2.0, 3.0, 4.0])
    out = extend_with_ghosts(arr, PERIODIC, 1)
    assert np.array_equal(out, [4.0, 1.0, 2.0, 3.0, 4.0, 1.0])


def test_boundary_free_flow_replication():
    arr = np.array([1.0, 2.0, 3.0, 4.0])
    out = extend_with_ghosts(arr, FREE_FLOW, 2)
    assert np.array_equal(out, [1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 4.0, 4.0])


def test_boundary_pinned_equals_boundary_maxwellian():
    sx, vg = make_grids(-1.0, 1.0, 6, -8.0, 8.0, 32)
    params = MixtureParams(m=np.array([2.0]), lam=np.array([[1.0]]))
    state = init_maxwellian_state([(1.0, 0.2, 1.5)], params, sx, vg)
    left = maxwellian_pair(np.array([2.0]), 0.0, 3.0, 2.0, 1.0, vg)
    right = maxwellian_pair(np.array([0.5]), 0.1, 1.0, 2.0, 1.0, vg)
    ext = apply_boundary(state.pairs[0], INFLOW_OUTFLOW, 2, (left, right))
    assert np.allclose(ext.g1[0], left.g1[0], rtol=0, atol=0)
    assert np.allclose(ext.g1[-1], right.g1[-1], rtol=0, atol=0)
    # interior untouched
    assert np.array_equal(ext.g1[2:-2], state.pairs[0].g1)
    with pytest.raises(StateError):
        apply_boundary(state.pairs[0], INFLOW_OUTFLOW, 2, None)


def test_ghost_width_capped():
    arr = np.ones((3, 4))
    with pytest.raises(StateError):
        extend_with_ghosts(arr, PERIODIC, 4)
