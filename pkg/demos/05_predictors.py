"""Self-action and path-difference predictors, visibility limit and coupling numbers.

Run: python3 demos/05_predictors.py
"""
import warnings

import numpy as np

from slitlab.interference import (
    ConventionalSetup,
    CouplingStrength,
    ParaxialWarning,
    conventional_intensity,
    conventional_spacing,
    demo_experiment_numbers,
    equivalence_residual,
    extract_qprime,
    path_difference,
    self_action_pattern,
    virial_estimate,
    visibility_sweep,
)

with warnings.catch_warnings():
    warnings.simplefilter("ignore", ParaxialWarning)
    s = ConventionalSetup(wavelength=1.0, separation=6.0, screen_distance=26.0)
y = np.linspace(-10, 10, 2001)
gap = np.abs(self_action_pattern(s, y, CouplingStrength(1.0)) - conventional_intensity(s, y)).max()
print(f"spacing lambda L/d = {conventional_spacing(s):.4f}; self-action (q' = 1) vs path-difference gap {gap:.1e}")
dr, _ = path_difference(s, conventional_spacing(s))
print(f"q' from the exact path difference at the first maximum: {extract_qprime(float(dr), 1.0):.4f}")
print(f"residual with A = p: {equivalence_residual(s, s.p):.1e}, with A = p/2: {equivalence_residual(s, s.p / 2):.4f}")

print("winding-class visibility over k = 0..200:")
for qq, v in visibility_sweep([0.0, 0.5, 1.0, 1.5, 10 * (1 + 5 ** 0.5) / 2], range(201)):
    print(f"  qq' = {qq:8.4f}  V = {v:.4f}")

e = virial_estimate(-13.6, 20.0)
for line in [f"<T> = {e.T_eV} eV, <V> = {e.V_eV} eV, lambda_T = {e.lambda_T_angstrom:.3f} A",
             f"v_L = {e.v_L_over_c:.3e} c, q' = {e.q_prime:.3f} (quoted {e.q_prime_quoted})", *e.notes]:
    print(line)
d = demo_experiment_numbers(50e3)
print(f"50 kV: lambda = {d['wavelength_angstrom']:.4f} A vs quoted {d['quoted_wavelength_angstrom']} A "
      f"({100 * d['relative_deviation']:.1f}%)")
