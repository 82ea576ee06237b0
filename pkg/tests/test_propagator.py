import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from slitlab.config import ConfigError
from slitlab.fields import ComplexField2D, GridSpec, gaussian_packet, norm
from slitlab.io import read_snapshot
from slitlab.propagator import (
    EvolutionConfig,
    FringePattern,
    PacketParams,
    PropagationError,
    SlitGeometry,
    SplitStepPropagator,
    absorbing_mask,
    analyze_fringes,
    barrier_columns,
    build_slit_potential,
    center_of_mass,
    energy,
    kinetic_phase_at_nyquist,
    recommended_dt,
    run_double_slit,
    split_step,
)


@pytest.fixture
def grid():
    return GridSpec(128, 128, 32.0, 32.0)


def _slits(**kw):
    base = dict(barrier_x=0.0, thickness=0.5, width=1.0, separation=4.0, height=1000.0)
    base.update(kw)
    return SlitGeometry(**base)


# slit potential

def test_open_cells_per_opening_match_width(small_setup):
    grid, slits, _, _ = small_setup
    V = build_slit_potential(grid, slits)
    col = V[barrier_columns(grid, slits)[0]]
    for yc in slits.openings():
        near = np.abs(grid.y - yc) < slits.separation / 2
        n_open = int(np.sum(col[near] == 0))
        assert abs(n_open - slits.width / grid.hy) <= 1
    frac = np.mean(col == 0)
    assert abs(frac - 2 * slits.width / grid.ly) <= 2 / grid.ny


def test_potential_values(grid):
    V = build_slit_potential(grid, _slits())
    assert set(np.unique(V)) == {0.0, 1000.0}
    assert np.all(V[np.abs(grid.x) > 0.5] == 0)


def test_under_resolved_barrier_rejected(grid):
    with pytest.raises(ConfigError, match="under-resolved"):
        build_slit_potential(grid, _slits(thickness=0.1))


def test_narrow_slit_rejected(grid):
    with pytest.raises(ConfigError):
        build_slit_potential(grid, _slits(width=0.5))


def test_slit_wider_than_separation_rejected():
    with pytest.raises(ConfigError):
        _slits(width=40.0, separation=4.0)


def test_nonpositive_height_rejected():
    with pytest.raises(ConfigError):
        _slits(height=0.0)


def test_barrier_outside_grid_rejected(grid):
    with pytest.raises(ConfigError):
        build_slit_potential(grid, _slits(barrier_x=20.0))


def test_single_and_blocked_modes(grid):
    s = _slits()
    assert len(s.openings()) == 2
    assert s.with_mode("upper").openings() == [2.0]
    assert s.with_mode("lower").openings() == [-2.0]
    assert s.with_mode("single").openings() == [0.0]
    with pytest.raises(ConfigError):
        _slits(mode="triple")


# absorber

def test_absorber_interior_and_edge(grid):
    mask = absorbing_mask(grid, 16, 0.3)
    assert mask[64, 64] == 1.0
    assert np.all(mask[20:108, 20:108] == 1.0)
    assert mask[0, 64] == pytest.approx(math.exp(-0.3), abs=1e-12)
    assert mask[64, 0] == pytest.approx(math.exp(-0.3), abs=1e-12)
    assert np.all((mask > 0) & (mask <= 1))


def test_absorber_is_mirror_symmetric(grid):
    mask = absorbing_mask(grid, 12, 0.5)
    assert_allclose(mask[1:], mask[1:][::-1])
    assert_allclose(mask[:, 1:], mask[:, 1:][:, ::-1])


def test_absorber_never_increases_norm(grid):
    mask = absorbing_mask(grid, 16, 0.2)
    phi = gaussian_packet(grid, (12.0, 0.0), 2.0)
    values = phi.values
    norms = [norm(phi)]
    for _ in range(5):
        values = values * mask
        norms.append(norm(ComplexField2D(grid, values)))
    assert np.all(np.diff(norms) <= 0)


def test_absorber_width_minimum(grid):
    with pytest.raises(ConfigError):
        absorbing_mask(grid, 4, 0.1)


# time stepping

def test_free_packet_drift_velocity():
    g = GridSpec(256, 256, 40.0, 40.0)
    k, m = 3.0, 1.0
    phi = gaussian_packet(g, (-8.0, 0.0), 1.5, (k, 0.0))
    cfg = EvolutionConfig(dt=0.01, n_steps=400, mass=m, screen_x=0.0)
    out = split_step(phi, np.zeros(g.shape), cfg, n_steps=cfg.n_steps)
    dx = center_of_mass(out)[0] - center_of_mass(phi)[0]
    assert dx == pytest.approx(k / m * cfg.dt * cfg.n_steps, rel=0.01)


def test_free_step_is_unitary_per_step(grid):
    phi = gaussian_packet(grid, (0.0, 0.0), 1.5, (2.0, 1.0))
    prop = SplitStepPropagator(grid, 0.0, 0.01)
    psi = phi.values
    n0 = norm(phi)
    for _ in range(20):
        psi = prop.step(psi)
        assert abs(norm(ComplexField2D(grid, psi)) - n0) < 1e-12


def test_constant_potential_gives_global_phase(grid):
    phi = gaussian_packet(grid, (0.0, 0.0), 1.5, (2.0, 0.0))
    c, dt, n = 3.7, 0.01, 200
    free = SplitStepPropagator(grid, 0.0, dt).evolve(phi.values, n)
    shifted = SplitStepPropagator(grid, c, dt).evolve(phi.values, n)
    assert_allclose(shifted, free * np.exp(-1j * c * dt * n), atol=1e-10)


def test_fused_evolution_matches_single_steps(grid):
    V = build_slit_potential(grid, _slits())
    mask = absorbing_mask(grid, 10, 0.05)
    phi = gaussian_packet(grid, (-5.0, 0.0), 1.5, (2 * np.pi, 0.0))
    prop = SplitStepPropagator(grid, V, 2e-3, mask=mask)
    psi = phi.values
    for _ in range(30):
        psi = prop.step(psi)
    assert_allclose(prop.evolve(phi.values, 30), psi, atol=1e-12)


def test_unitarity_with_barrier_over_1000_steps(grid):
    s = _slits(height=50 * (2 * np.pi) ** 2)
    V = build_slit_potential(grid, s)
    phi = gaussian_packet(grid, (-6.0, 0.0), 1.5, (2 * np.pi, 0.0))
    out = SplitStepPropagator(grid, V, 0.9 * np.pi / s.height).evolve(phi.values, 1000)
    assert abs(norm(ComplexField2D(grid, out)) - 1.0) < 1e-10


def test_energy_conserved_for_smooth_potential(grid):
    X, Y = grid.mesh()
    V = 5.0 * np.exp(-(X ** 2 + Y ** 2) / 2)
    phi = gaussian_packet(grid, (-6.0, 0.0), 1.5, (2 * np.pi, 0.0))
    prop = SplitStepPropagator(grid, V, 1e-3)
    E0 = energy(phi, V)
    psi = phi.values
    drift = 0.0
    for _ in range(10):
        psi = prop.evolve(psi, 150)
        drift = max(drift, abs(energy(ComplexField2D(grid, psi), V) - E0) / E0)
    assert drift < 1e-6


def test_energy_of_plane_packet_is_kinetic(grid):
    phi = gaussian_packet(grid, (0, 0), 2.0, (3.0, 0.0))
    # <p^2>/2 = (k^2 + 2 * 1/(4 w^2)) / 2 for density std w
    assert energy(phi, 0.0) == pytest.approx((9.0 + 2 / (4 * 4.0)) / 2, rel=1e-10)


def test_stability_guard(grid):
    V = build_slit_potential(grid, _slits(height=1000.0))
    phi = gaussian_packet(grid, (-6.0, 0.0), 1.5)
    with pytest.raises(ConfigError, match="pi"):
        split_step(phi, V, EvolutionConfig(dt=0.01, n_steps=1, screen_x=5.0))


def test_recommended_dt_respects_both_limits(grid):
    dt = recommended_dt(grid, 1000.0)
    assert dt * 1000.0 < np.pi
    assert kinetic_phase_at_nyquist(grid, dt) < np.pi / 4


def test_nan_aborts_with_diagnostic(grid):
    prop = SplitStepPropagator(grid, 0.0, 0.01)
    psi = np.ones(grid.shape, complex)
    psi[5, 5] = np.nan
    with pytest.raises(PropagationError, match="non-finite"):
        prop.evolve(psi, 3)


def test_evolution_config_validation():
    with pytest.raises(ConfigError):
        EvolutionConfig(dt=0.0, n_steps=1)
    with pytest.raises(ConfigError):
        EvolutionConfig(dt=0.1, n_steps=0)
    with pytest.raises(ConfigError):
        EvolutionConfig(dt=0.1, n_steps=1, absorber_width=3)


# fringe analysis

def test_analyze_fringes_on_synthetic_pattern():
    y = np.linspace(-20, 20, 2001)
    spacing = 3.1
    I = np.cos(np.pi * y / spacing) ** 2 * np.exp(-y ** 2 / 400) + 0.01
    fp = analyze_fringes(y, I, predicted_spacing=3.0)
    assert fp.reliable and fp.n_peaks >= 3
    assert fp.spacing == pytest.approx(spacing, rel=5e-3)
    assert fp.spacing_spectral == pytest.approx(spacing, rel=2e-2)
    assert fp.visibility > 0.9


def test_too_few_peaks_marks_unreliable():
    y = np.linspace(-5, 5, 501)
    I = np.exp(-y ** 2)
    fp = analyze_fringes(y, I, predicted_spacing=3.0)
    assert not fp.reliable


def test_fringe_pattern_invariants():
    y = np.linspace(0, 1, 5)
    with pytest.raises(ValueError):
        FringePattern(y, -np.ones(5), 1.0, 1.0, 0.5, 3, True)
    with pytest.raises(ValueError):
        FringePattern(y, np.ones(5), 1.0, 1.0, 1.5, 3, True)


# full double-slit runs (256^2, 6 cells per wavelength)

def test_double_slit_spacing_and_visibility(double_run):
    fp = double_run
    assert fp.reliable
    assert abs(fp.spacing - fp.predicted_spacing) / fp.predicted_spacing < 0.05
    assert abs(fp.spacing_spectral - fp.predicted_spacing) / fp.predicted_spacing < 0.05
    assert fp.info["estimators_agree"]
    assert fp.visibility > 0.6


def test_screen_profile_mirror_symmetric(double_run):
    I = double_run.intensity
    assert np.abs(I[1:] - I[1:][::-1]).max() / I.max() < 1e-6


def test_single_slit_has_no_central_fringes(single_run, double_run):
    fp = analyze_fringes(single_run.y, single_run.intensity, double_run.predicted_spacing)
    assert fp.visibility < 0.2


def test_blocking_one_slit_halves_transmission(upper_run, double_run):
    ratio = upper_run.info["transmitted"] / double_run.info["transmitted"]
    assert ratio == pytest.approx(0.5, rel=0.2)


def test_doubling_separation_halves_spacing(small_setup, double_run):
    grid, slits, cfg, packet = small_setup
    # reference at d/2 against the baseline at d
    fp = run_double_slit(grid, replace(slits, separation=slits.separation / 2), cfg, packet)
    assert double_run.spacing == pytest.approx(fp.spacing / 2, rel=0.05)


def _run_at(grid, slits, cfg, packet, kx, height):
    from slitlab.propagator import auto_n_steps
    pk = PacketParams(packet.center, packet.width, (kx, 0.0))
    s = replace(slits, height=height)
    dt = recommended_dt(grid, s.height)
    return run_double_slit(grid, s, replace(cfg, dt=dt, n_steps=auto_n_steps(pk, s, cfg.screen_x, dt)), pk)


@pytest.mark.slow
def test_doubling_k_halves_spacing(small_setup):
    grid, slits, cfg, packet = small_setup
    # slits wider than the longer wavelength so neither run sits near the channel cutoff pi/w
    wide = replace(slits, width=2.0, separation=8.0)
    k = packet.momentum[0]
    lo = _run_at(grid, wide, cfg, packet, k / 2, wide.height / 4)
    hi = _run_at(grid, wide, cfg, packet, k, wide.height)
    assert hi.spacing == pytest.approx(lo.spacing / 2, rel=0.05)


def test_run_validates_geometry(small_setup):
    grid, slits, cfg, packet = small_setup
    with pytest.raises(ConfigError):
        run_double_slit(grid, slits, replace(cfg, screen_x=slits.barrier_x - 1.0), packet)
    with pytest.raises(ConfigError):
        bad = PacketParams((slits.barrier_x + 2.0, 0.0), packet.width, packet.momentum)
        run_double_slit(grid, slits, cfg, bad)


def test_snapshots_written(tmp_path):
    g = GridSpec(64, 64, 16.0, 16.0)
    slits = SlitGeometry(barrier_x=0.0, thickness=0.5, width=1.0, separation=3.0, height=200.0)
    packet = PacketParams((-4.0, 0.0), 1.2, (2 * np.pi, 0.0))
    cfg = EvolutionConfig(dt=recommended_dt(g, 200.0), n_steps=30, absorber_width=8,
                          absorber_strength=0.05, screen_x=4.0)
    run_double_slit(g, slits, cfg, packet, snapshot_every=10, snapshot_dir=tmp_path)
    files = sorted(tmp_path.glob("snap_*.bin"))
    assert [f.name for f in files] == ["snap_000010.bin", "snap_000020.bin", "snap_000030.bin"]
    assert read_snapshot(files[0]).grid == g
