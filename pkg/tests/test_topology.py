import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from slitlab import topology
from slitlab.currents import normalized_current
from slitlab.fields import GridSpec, VectorField2D, commensurate_momentum, plane_wave


@pytest.fixture(scope="module")
def fine_grid():
    return GridSpec(512, 512, 8.0, 8.0)


@pytest.mark.parametrize("m", range(-3, 4))
def test_winding_of_synthetic_vortex(fine_grid, m):
    phi = topology.vortex_field(fine_grid, [(0.0, 0.0, m)], envelope=0.7)
    loop = topology.circle_loop((0.0, 0.0), 1.0, 512, fine_grid)
    t = time.perf_counter()
    r = topology.winding_number(phi, loop)
    assert time.perf_counter() - t < 1.0
    assert r.k == m
    assert abs(r.integral / (2 * np.pi) - m) < 1e-3
    assert r.unwrapped_k == m and r.agree


def test_off_center_vortex_and_loop_excluding_it(fine_grid):
    phi = topology.vortex_field(fine_grid, [(0.2, -0.1, 1), (2.0, 2.0, -1)], envelope=1.2)
    inside = topology.circle_loop((0.0, 0.0), 0.8, 256, fine_grid)
    outside = topology.circle_loop((-1.5, -1.5), 0.5, 256, fine_grid)
    assert topology.winding_number(phi, inside).k == 1
    assert topology.winding_number(phi, outside).k == 0


def test_two_vortices_add(fine_grid):
    phi = topology.vortex_field(fine_grid, [(-0.5, 0.0, 1), (0.5, 0.0, 2)], envelope=1.5)
    loop = topology.rectangle_loop(-1.5, 1.5, -1.0, 1.0, 128)
    assert topology.winding_number(phi, loop).k == 3


def test_reversed_loop_flips_sign(fine_grid):
    phi = topology.vortex_field(fine_grid, [(0.0, 0.0, 2)], envelope=0.7)
    loop = topology.circle_loop((0.0, 0.0), 1.0, 256, fine_grid)
    assert topology.winding_number(phi, loop.reversed()).k == -2


def test_plane_wave_has_zero_winding():
    g = GridSpec(128, 128, 10.0, 10.0)
    phi = plane_wave(g, commensurate_momentum(g, 3, 1))
    r = topology.winding_number(phi, topology.circle_loop((0.0, 0.0), 2.0, 128, g))
    assert r.k == 0 and r.residual < 1e-6


def test_loop_through_node_rejected(fine_grid):
    phi = topology.vortex_field(fine_grid, [(0.0, 0.0, 1)], envelope=0.7)
    grid_node_loop = topology.node_rectangle_loop(fine_grid, 256, 300, 200, 300)
    with pytest.raises(topology.WindingError):
        topology.winding_number(phi, grid_node_loop)


def test_loop_outside_grid_rejected(fine_grid):
    phi = topology.vortex_field(fine_grid, [(0.0, 0.0, 1)], envelope=0.7)
    with pytest.raises(topology.LoopError):
        topology.winding_number(phi, topology.circle_loop((3.5, 0.0), 1.0, 64))


def test_loop_validation():
    with pytest.raises(topology.LoopError):
        topology.circle_loop((0, 0), 1.0, 8)
    with pytest.raises(topology.LoopError):
        topology.LoopPath(np.array([[0, 0], [1, 0], [1, 1], [0, 0.5]] * 3))
    g = GridSpec(64, 64, 8.0, 8.0)
    with pytest.raises(topology.LoopError):
        topology.circle_loop((0, 0), 0.2, 64, g)


def test_loop_integral_of_gradient_field_is_zero():
    g = GridSpec(128, 128, 2 * np.pi, 2 * np.pi)
    X, Y = g.mesh()
    F = VectorField2D(g, np.stack([np.cos(X) * np.cos(Y), -np.sin(X) * np.sin(Y)]))  # grad(sin x cos y)
    loop = topology.rectangle_loop(-2.0, 2.0, -1.0, 1.5, 64)
    assert abs(topology.loop_integral(F, loop)) < 1e-3


def test_circulation_of_rigid_rotation():
    g = GridSpec(256, 256, 8.0, 8.0)
    X, Y = g.mesh()
    F = VectorField2D(g, np.stack([-Y, X]))
    loop = topology.circle_loop((0.0, 0.0), 1.5, 512, g)
    # polygon area 2 * (n/2) r^2 sin(2 pi / n) for the inscribed n-gon
    n = 512
    assert_allclose(topology.loop_integral(F, loop), n * 1.5 ** 2 * np.sin(2 * np.pi / n), rtol=1e-12)


def test_winding_invariant_under_loop_deformation(fine_grid):
    phi = topology.vortex_field(fine_grid, [(0.1, 0.1, -2)], envelope=0.9)
    ks = {topology.winding_number(phi, topology.circle_loop((0.1, 0.1), r, 256, fine_grid)).k
          for r in (0.3, 0.7, 1.2)}
    ks.add(topology.winding_number(phi, topology.rectangle_loop(-0.6, 0.9, -0.5, 0.8, 64)).k)
    assert ks == {-2}


def test_raw_and_component_currents_give_same_circulation(fine_grid):
    phi = topology.vortex_field(fine_grid, [(0.0, 0.0, 1)], envelope=0.7)
    loop = topology.circle_loop((0.0, 0.0), 1.0, 256, fine_grid)
    a = topology.loop_integral(normalized_current(phi), loop)
    b = topology.loop_integral(normalized_current(phi, form="raw"), loop)
    assert a == pytest.approx(b, abs=1e-10)


def test_vortex_scan_finds_charges_in_row_major_order():
    g = GridSpec(128, 128, 8.0, 8.0)
    phi = topology.vortex_field(g, [(1.03, 0.51, 1), (-1.01, -0.49, -1), (-1.02, 1.53, 1)], envelope=1.5)
    vs = topology.vortex_scan(phi)
    assert [v.charge for v in vs] == [-1, 1, 1]
    assert [(v.i, v.j) for v in vs] == sorted((v.i, v.j) for v in vs)
    assert topology.total_charge(vs) == 1
    assert_allclose([vs[0].x, vs[0].y], [-1.01, -0.49], atol=g.hx)


def test_plaquette_charges_sum_to_loop_winding():
    g = GridSpec(128, 128, 8.0, 8.0)
    phi = topology.vortex_field(g, [(0.33, 0.21, 2), (-0.71, -0.4, 1)], envelope=1.5)
    q = topology.plaquette_charges(phi)
    loop = topology.node_rectangle_loop(g, 40, 90, 40, 90)
    assert q[40:90, 40:90].sum() == topology.winding_number(phi, loop).k == 3


def test_winding_result_serializes():
    g = GridSpec(64, 64, 8.0, 8.0)
    phi = topology.vortex_field(g, [(0, 0, 1)], envelope=1.0)
    d = topology.winding_number(phi, topology.circle_loop((0.05, 0.05), 1.0, 64, g)).to_dict()
    assert d["k"] == 1 and set(d) >= {"integral", "residual", "unwrapped", "agree"}
