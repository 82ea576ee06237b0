"""Self-check suite: every check records its tolerance and measured value."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from slitlab import currents, interference, spin, topology
from slitlab.fields import (
    ComplexField2D,
    GridSpec,
    PauliField2D,
    commensurate_momentum,
    gaussian_packet,
    norm,
    plane_wave,
    random_band_limited,
)
from slitlab.propagator import SlitGeometry, SplitStepPropagator, build_slit_potential


@dataclass
class Check:
    name: str
    passed: bool
    tolerance: str
    measured: dict
    seconds: float = 0.0
    details: dict = field(default_factory=dict)


def convergence_order(h, err) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def check_algebra(spin_set: spin.SpinMatrixSet = spin.SPIN) -> Check:
    tol = 1e-12
    light = np.array([1.0, 0.6, 0.8, 0.0])       # A.A = 0
    timelike = np.array([2.0, 0.3, -0.4, 0.5])
    m = {
        "pauli": spin.pauli_algebra_error(spin_set),
        "clifford": spin.clifford_error(spin_set),
        "dirac_basis": spin.dirac_basis_error(spin_set),
        "det_lightlike": abs(spin.det_slash(light, spin_set)),
        "det_timelike": abs(spin.det_slash(timelike, spin_set) - spin.minkowski_square(timelike) ** 2),
    }
    return Check("algebra", all(v <= tol for v in m.values()), f"each <= {tol:g}", m)


def check_plane_wave_currents() -> Check:
    tol = 1e-10
    g = GridSpec(64, 64, 2 * np.pi, 2 * np.pi)
    k = commensurate_momentum(g, 3, -2)
    amp, mass = 0.7, 1.3
    phi = plane_wave(g, k, amp)
    J = currents.schrodinger_current(phi, mass).values
    Jt = currents.normalized_current(phi).values
    err_j = max(abs(J[i] - k[i] * amp ** 2 / mass).max() for i in range(2))
    err_t = max(abs(Jt[i] - k[i]).max() for i in range(2))
    m = {"schrodinger_error": float(err_j), "normalized_error": float(err_t)}
    return Check("plane_wave_currents", max(m.values()) <= tol, f"<= {tol:g}", m)


def check_jtilde_forms(rng: np.random.Generator) -> Check:
    tol = 1e-8
    g = GridSpec(128, 128, 2 * np.pi, 2 * np.pi)
    phase = random_band_limited(g, 1, 3, rng)[0].real
    amp = 1.5 + 0.5 * np.tanh(random_band_limited(g, 1, 2, rng)[0].real)
    phi = ComplexField2D(g, amp * np.exp(1j * phase))
    a = currents.normalized_current(phi, form="components").values
    b = currents.normalized_current(phi, form="raw").values
    c = currents.n_field_current(currents.n_field(phi)).values
    m = {"components_vs_raw": float(abs(a - b).max()), "components_vs_nfield": float(abs(a - c).max())}
    return Check("jtilde_triple_form", max(m.values()) <= tol, f"<= {tol:g}", m)


def _spinor(n: int, seed: int, band: int = 4) -> PauliField2D:
    g = GridSpec(n, n, 2 * np.pi, 2 * np.pi)
    return PauliField2D(g, random_band_limited(g, 2, band, np.random.default_rng(seed)))


def check_reduction(seed: int, n_fields: int = 10) -> Check:
    tol = 1e-8
    res = [currents.reduction_residual(_spinor(64, seed + i), m=1.0) for i in range(n_fields)]
    levels = (64, 128, 256)
    errs = [currents.reduction_residual(_spinor(n, seed), m=1.0, scheme="central2") for n in levels]
    order = convergence_order([2 * np.pi / n for n in levels], errs)
    m = {"max_spectral_residual": max(res), "central2_errors": errs, "central2_order": order}
    ok = max(res) <= tol and abs(order - 2.0) <= 0.2
    return Check("reduction_residual", ok, f"spectral <= {tol:g}; central2 order 2.0 +- 0.2", m)


def check_spin_curl(seed: int) -> Check:
    levels = (64, 128, 256)
    errs = []
    for n in levels:
        psi = _spinor(n, seed)
        a = currents.spin_current(psi, scheme="central2")
        b = currents.spin_current_direct(psi, scheme="central2")
        errs.append((a - b).max_norm())
    order = convergence_order([2 * np.pi / n for n in levels], errs)
    psi = _spinor(64, seed)
    spectral_gap = (currents.spin_current(psi) - currents.spin_current_direct(psi)).max_norm()
    ok = bool(np.all(np.diff(errs) < 0)) and abs(order - 2.0) <= 0.2 and spectral_gap <= 1e-10
    m = {"central2_errors": errs, "central2_order": order, "spectral_difference": spectral_gap}
    return Check("spin_curl_identity", ok, "order 2.0 +- 0.2, decreasing; spectral <= 1e-10", m)


def check_winding(n: int = 512) -> Check:
    tol = 1e-3
    g = GridSpec(n, n, 8.0, 8.0)
    loop = topology.circle_loop((0.0, 0.0), 1.0, 512, g)
    out = {}
    ok = True
    for mv in range(-3, 4):
        phi = topology.vortex_field(g, [(0.0, 0.0, mv)], envelope=0.7)
        r = topology.winding_number(phi, loop, strict=False)
        out[str(mv)] = {"integral_turns": r.integral / (2 * np.pi), "unwrapped_k": r.unwrapped_k,
                        "residual_vs_m": abs(r.integral / (2 * np.pi) - mv)}
        ok &= abs(r.integral / (2 * np.pi) - mv) < tol and r.unwrapped_k == mv and r.agree
    return Check("winding_quantization", bool(ok), f"|turns - m| < {tol:g}, estimators agree", out)


def check_unitarity(n_steps: int = 1000) -> Check:
    tol = 1e-10
    g = GridSpec(128, 128, 32.0, 32.0)
    k = 2 * np.pi
    slits = SlitGeometry(barrier_x=0.0, thickness=0.5, width=1.0, separation=4.0, height=50 * k ** 2)
    V = build_slit_potential(g, slits)
    dt = 0.9 * np.pi / slits.height
    phi = gaussian_packet(g, (-6.0, 0.0), 1.5, (k, 0.0))
    prop = SplitStepPropagator(g, V, dt)
    n0 = norm(phi)
    n1 = norm(ComplexField2D(g, prop.evolve(phi.values, n_steps)))
    drift = abs(n1 - n0) / n0
    return Check("unitarity", drift < tol, f"relative norm drift < {tol:g} over {n_steps} steps",
                 {"drift": drift})


def check_merging_identity(rng: np.random.Generator) -> Check:
    tol = 1e-12
    psi = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    S = rng.uniform(-10, 10, 100)
    lhs = np.abs(interference.merging_wave(psi, S)) ** 2
    rhs = interference.fringe_intensity(S, np.abs(psi) ** 2)
    err = float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, rhs)))
    return Check("merging_wave_identity", err <= tol, f"<= {tol:g}", {"max_error": err})


def check_equivalence() -> Check:
    import warnings
    tol = 1e-12
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", interference.ParaxialWarning)
        s = interference.ConventionalSetup(wavelength=0.7, separation=1.0, screen_distance=100.0)
    full = interference.equivalence_residual(s, s.p, 1)
    free = interference.equivalence_residual(s, 0.0, 1)
    half = interference.equivalence_residual(s, s.p / 2, 1)
    m = {"A=p": full, "A=0": free, "A=p/2 minus pi": abs(half - np.pi)}
    return Check("equivalence_residual", max(m.values()) <= tol, f"<= {tol:g}", m)


def check_virial() -> Check:
    e = interference.virial_estimate(-13.6, 20.0)
    demo = interference.demo_experiment_numbers()
    m = {"T_eV": e.T_eV, "V_eV": e.V_eV, "lambda_T_angstrom": e.lambda_T_angstrom,
         "v_L_over_c": e.v_L_over_c, "q_prime": e.q_prime,
         "demo_wavelength_angstrom": demo["wavelength_angstrom"]}
    ok = (e.T_eV == 13.6 and e.V_eV == -27.2 and 2 * e.T_eV + e.V_eV == 0
          and abs(e.lambda_T_angstrom - 3.32) <= 0.02 and abs(e.v_L_over_c / 7.3e-3 - 1) <= 0.05
          and demo["relative_deviation"] <= 0.15)
    return Check("virial_numbers", bool(ok),
                 "T, V exact; lambda_T 3.32 +- 0.02 A; v_L/c 7.3e-3 +- 5%; demo within 15%", m)


def run_verify(seed: int = 0, perturb_gamma: bool = False) -> dict:
    """Run all checks; ``perturb_gamma`` feeds a faulty gamma set to the algebra check only."""
    rng = np.random.default_rng(seed)
    spin_set = spin.perturbed_spin_matrices() if perturb_gamma else spin.SPIN
    jobs = [
        lambda: check_algebra(spin_set),
        check_plane_wave_currents,
        lambda: check_jtilde_forms(rng),
        lambda: check_reduction(seed),
        lambda: check_spin_curl(seed),
        check_winding,
        check_unitarity,
        lambda: check_merging_identity(rng),
        check_equivalence,
        check_virial,
    ]
    checks = []
    for job in jobs:
        t = time.perf_counter()
        c = job()
        c.seconds = time.perf_counter() - t
        checks.append(c)
    return {
        "passed": all(c.passed for c in checks),
        "seed": seed,
        "perturb_gamma": perturb_gamma,
        "checks": [asdict(c) for c in checks],
    }
