"""Fringe predictors: self-action phases and the merging wave, the
conventional path-difference picture, coupling-strength estimates and the
winding-class visibility sweep.

Physical constants appear only in this module (6 significant digits, SI).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from slitlab.propagator import FringePattern, visibility as _visibility

H_PLANCK = 6.62607e-34      # J s
M_ELECTRON = 9.10938e-31    # kg
C_LIGHT = 2.99792e8         # m / s
EV = 1.60218e-19            # J
ANGSTROM = 1e-10            # m

QUOTED_Q_PRIME = 1.8
QUOTED_DEMO_WAVELENGTH_A = 0.05
QUOTED_TRANSVERSE_WAVELENGTH_A = 500.0
QUOTED_DEMO_V_T = 10.0
SPIN_EPS_MAX = 0.01


class CouplingWarning(UserWarning):
    """Extracted coupling outside the perturbative interval [0, 1]."""


class ParaxialWarning(UserWarning):
    """Screen distance not large compared with the slit separation."""


@dataclass(frozen=True)
class PhaseAction:
    S: float

    def __post_init__(self):
        if not math.isfinite(self.S):
            raise ValueError("phase must be finite")


@dataclass(frozen=True)
class CouplingStrength:
    q_prime: float
    q: float = 1.0

    def __post_init__(self):
        if not self.q_prime >= 0:
            raise ValueError("q_prime must be non-negative")

    @property
    def product(self) -> float:
        return self.q * self.q_prime


@dataclass(frozen=True)
class ConventionalSetup:
    wavelength: float
    separation: float
    screen_distance: float

    def __post_init__(self):
        if min(self.wavelength, self.separation, self.screen_distance) <= 0:
            raise ValueError("wavelength, separation and screen distance must be positive")
        if self.screen_distance < 10 * self.separation:
            warnings.warn(f"L/d = {self.screen_distance / self.separation:.2f}; paraxial formulas degrade",
                          ParaxialWarning, stacklevel=2)

    @property
    def p(self) -> float:
        return 2 * np.pi / self.wavelength


@dataclass
class CouplingEstimate:
    T_eV: float
    V_eV: float
    lambda_T_angstrom: float
    v_L_over_c: float
    V_T_volt: float
    q_prime: float
    q_prime_quoted: float = QUOTED_Q_PRIME
    v_L_quoted_formula_over_c: float = float("nan")
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["units"] = {"T_eV": "eV", "V_eV": "eV", "lambda_T_angstrom": "angstrom", "v_L_over_c": "c",
                      "V_T_volt": "V", "q_prime": "e", "q_prime_quoted": "e",
                      "v_L_quoted_formula_over_c": "c"}
        return d


def _phase(S):
    return S.S if isinstance(S, PhaseAction) else np.asarray(S, dtype=float)


def self_action_phase(c: CouplingStrength, k: int) -> PhaseAction:
    """S = 2 pi q q' k for winding class k."""
    return PhaseAction(2 * np.pi * c.product * k)


def merging_wave(psi_i, S) -> complex:
    """psi_i + exp(iS) psi_i."""
    return psi_i + np.exp(1j * _phase(S)) * psi_i


def fringe_intensity(S, rho):
    """4 cos^2(S/2) rho."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    out = 4 * np.cos(0.5 * _phase(S)) ** 2 * rho
    return float(out) if np.ndim(out) == 0 else out


def path_difference(setup: ConventionalSetup, y):
    """(exact r1 - r2, paraxial y d / L); slit 1 at -d/2, slit 2 at +d/2."""
    y = np.asarray(y, dtype=float)
    L, h = setup.screen_distance, setup.separation / 2
    r1 = np.hypot(L, y + h)
    r2 = np.hypot(L, y - h)
    exact = 4 * h * y / (r1 + r2)       # r1 - r2 without cancellation
    paraxial = y * setup.separation / L
    return exact, paraxial


def conventional_intensity(setup: ConventionalSetup, y, half_angle: bool = True, exact: bool = False):
    """cos^2(theta/2), theta = p dr; ``half_angle=False`` gives the cos^2(theta) variant."""
    dr_exact, dr_par = path_difference(setup, y)
    theta = setup.p * (dr_exact if exact else dr_par)
    arg = 0.5 * theta if half_angle else theta
    out = np.cos(arg) ** 2
    return float(out) if np.ndim(out) == 0 else out


def conventional_spacing(setup: ConventionalSetup, half_angle: bool = True) -> float:
    s = setup.wavelength * setup.screen_distance / setup.separation
    return s if half_angle else s / 2


def self_action_pattern(setup: ConventionalSetup, y, coupling: CouplingStrength = CouplingStrength(1.0)):
    """Peak-normalized 4cos^2(S/2)/4 with S = 2 pi q q' dr / lambda (continuous winding)."""
    _, dr = path_difference(setup, y)
    S = 2 * np.pi * coupling.product * dr / setup.wavelength
    return fringe_intensity(S, np.ones_like(S)) / 4


def equivalence_residual(setup: ConventionalSetup, A_magnitude: float, loop_k: int = 1, q: float = 1.0) -> float:
    """Distance of (p - q A) dr, dr = loop_k lambda, to the nearest multiple of 2 pi."""
    dr = loop_k * setup.wavelength
    phi = (setup.p - q * A_magnitude) * dr
    return float(abs(phi - 2 * np.pi * round(phi / (2 * np.pi))))


def extract_qprime(delta_r: float, wavelength: float, k: int = 1) -> float:
    """q' = dr / (k lambda) with q = 1; warns when outside [0, 1]."""
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    if int(k) != k or k < 1:
        raise ValueError("k must be an integer >= 1")
    qp = float(delta_r) / (k * wavelength)
    if not 0.0 <= qp <= 1.0:
        warnings.warn(f"q' = {qp:.4g} outside [0, 1]", CouplingWarning, stacklevel=2)
    return qp


def _class_means(qq: float, ks: np.ndarray, w: np.ndarray) -> tuple[float, float, bool]:
    I = 4 * np.cos(np.pi * qq * ks) ** 2
    even = ks % 2 == 0
    if not (even.any() and (~even).any()):
        return float("nan"), float("nan"), False
    Ie = float(np.sum(w[even] * I[even]) / np.sum(w[even]))
    Io = float(np.sum(w[~even] * I[~even]) / np.sum(w[~even]))
    return Ie, Io, True


def _weights(ks: np.ndarray, weights) -> np.ndarray:
    if weights is None:
        return np.ones(ks.shape)
    w = np.asarray(weights, dtype=float)
    if w.shape != ks.shape:
        raise ValueError("weights must match k_window")
    if np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be non-negative and not all zero")
    return w


def class_visibility(qq: float, k_window, weights=None) -> float:
    """|I_even - I_odd| / (I_even + I_odd) of the two winding-parity ensemble means.

    Neighbouring winding classes are the ones that merge on the screen, so
    the fringe contrast is carried by the even/odd class means of
    4 cos^2(pi qq' k). Zero when only one parity is present or both means vanish.
    """
    ks = np.asarray(list(k_window), dtype=int)
    if ks.size == 0:
        raise ValueError("k_window must be non-empty")
    w = _weights(ks, weights)
    Ie, Io, both = _class_means(qq, ks, w)
    if not both or Ie + Io <= 0:
        return 0.0
    return abs(Ie - Io) / (Ie + Io)


def visibility_sweep(qq_primes, k_window, weights=None) -> list[tuple[float, float]]:
    """[(qq', visibility)] over the full window."""
    ks = list(k_window)
    if not ks:
        raise ValueError("k_window must be non-empty")
    return [(float(qq), class_visibility(qq, ks, weights)) for qq in qq_primes]


def visibility_vs_window(qq: float, k_window, weights=None) -> np.ndarray:
    """Visibility of the running class means as the window grows one k at a time."""
    ks = list(k_window)
    if not ks:
        raise ValueError("k_window must be non-empty")
    w = None if weights is None else list(weights)
    return np.array([class_visibility(qq, ks[:n], None if w is None else w[:n]) for n in range(1, len(ks) + 1)])


def de_broglie_wavelength_angstrom(kinetic_eV: float) -> float:
    """Nonrelativistic h / sqrt(2 m_e T)."""
    if not kinetic_eV > 0:
        raise ValueError("kinetic energy must be positive")
    return H_PLANCK / math.sqrt(2 * M_ELECTRON * kinetic_eV * EV) / ANGSTROM


def virial_estimate(E0_eV: float = -13.6, V_T_volt: float = 20.0) -> CouplingEstimate:
    """Bound-state estimate of the self-action coupling from 2<T> = -<V>."""
    if not E0_eV < 0:
        raise ValueError("E0 must be negative (bound state)")
    if not V_T_volt > 0:
        raise ValueError("V_T must be positive")
    T = -E0_eV
    V = 2 * E0_eV
    lam = de_broglie_wavelength_angstrom(T)
    v_over_c = math.sqrt(2 * T * EV / (M_ELECTRON * C_LIGHT ** 2))
    # lambda <T> / h = T / p = v / 2
    v_formula = lam * ANGSTROM * T * EV / H_PLANCK / C_LIGHT
    qp = abs(V) / V_T_volt
    notes = [
        f"q' = |<V>|/V_T = {qp:.4g}; the quoted value is {QUOTED_Q_PRIME}, "
        f"which corresponds to V_T = {abs(V) / QUOTED_Q_PRIME:.4g} V",
        f"v_L = sqrt(2<T>/m) = {v_over_c:.4g} c; lambda <T>/h = {v_formula:.4g} c (half the velocity)",
    ]
    return CouplingEstimate(T_eV=T, V_eV=V, lambda_T_angstrom=lam, v_L_over_c=v_over_c, V_T_volt=V_T_volt,
                            q_prime=qp, v_L_quoted_formula_over_c=v_formula, notes=notes)


def demo_experiment_numbers(voltage_V: float = 50e3) -> dict:
    """Wavelength after acceleration through ``voltage_V`` against the quoted figures."""
    if not voltage_V > 0:
        raise ValueError("accelerating voltage must be positive")
    lam = de_broglie_wavelength_angstrom(voltage_V)
    return {
        "voltage_V": voltage_V,
        "wavelength_angstrom": lam,
        "quoted_wavelength_angstrom": QUOTED_DEMO_WAVELENGTH_A,
        "relative_deviation": abs(lam - QUOTED_DEMO_WAVELENGTH_A) / QUOTED_DEMO_WAVELENGTH_A,
        "quoted_transverse_wavelength_angstrom": QUOTED_TRANSVERSE_WAVELENGTH_A,
        "quoted_V_T_volt": QUOTED_DEMO_V_T,
        "hydrogen_wavelength_angstrom": de_broglie_wavelength_angstrom(13.6),
    }


def model_pattern(y, spacing: float, rho: float = 1.0) -> FringePattern:
    """Ideal 4cos^2(pi y / spacing) rho on samples ``y``."""
    y = np.asarray(y, dtype=float)
    I = fringe_intensity(2 * np.pi * y / spacing, np.full(y.shape, rho))
    n_peaks = int(np.floor(y.max() / spacing) - np.ceil(y.min() / spacing) + 1) if y.size else 0
    return FringePattern(y=y, intensity=I, spacing=spacing, spacing_spectral=spacing,
                         visibility=_visibility(I) if I.size else 0.0, n_peaks=n_peaks,
                         reliable=n_peaks >= 3, predicted_spacing=spacing)


@dataclass
class SpinShift:
    pattern: FringePattern
    first_peak_shift: float     # absolute displacement of the first side peak
    relative_shift: float       # first_peak_shift / spacing
    bound: float                # epsilon * (number of fringes) * spacing

    def to_dict(self) -> dict:
        return {"first_peak_shift": self.first_peak_shift, "relative_shift": self.relative_shift,
                "bound": self.bound}


def spin_shift(pattern: FringePattern, epsilon: float = 1e-3) -> SpinShift:
    """Rescale phases S -> S (1 + epsilon): I'(y) = I(y (1 + epsilon)).

    The first side peak moves from the spacing to spacing / (1 + epsilon).
    """
    if not abs(epsilon) < SPIN_EPS_MAX:
        raise ValueError(f"|epsilon| = {abs(epsilon)} outside the perturbative bound {SPIN_EPS_MAX}")
    y = pattern.y
    f = 1.0 + epsilon
    I = np.interp(y * f, y, pattern.intensity) if epsilon else pattern.intensity.copy()
    sp = pattern.spacing / f
    shifted = FringePattern(y=y.copy(), intensity=I, spacing=sp, spacing_spectral=pattern.spacing_spectral / f,
                            visibility=pattern.visibility if not epsilon else float(np.clip(_visibility(I), 0, 1)),
                            n_peaks=pattern.n_peaks, reliable=pattern.reliable,
                            predicted_spacing=pattern.predicted_spacing, info=dict(pattern.info))
    shift = abs(pattern.spacing - sp)
    n_fringes = max(pattern.n_peaks, 1)
    return SpinShift(pattern=shifted, first_peak_shift=shift, relative_shift=shift / pattern.spacing,
                     bound=abs(epsilon) * n_fringes * pattern.spacing)
