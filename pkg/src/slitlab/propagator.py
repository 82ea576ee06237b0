"""Split-step (Strang) propagation of 2-D scalar wavepackets through a slit
barrier, with multiplicative absorbing boundaries and screen accumulation.

Dynamics: i d/dt psi = [p^2 / 2m + V] psi on the periodic grid.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.fft as sfft
from scipy.signal import find_peaks

from slitlab import fields
from slitlab.config import ConfigError
from slitlab.fields import ComplexField2D, GridSpec, gaussian_packet

NAN_CHECK_EVERY = 100


class PropagationError(RuntimeError):
    """Non-finite values appeared during time stepping."""


@dataclass(frozen=True)
class SlitGeometry:
    """Barrier column at ``barrier_x`` with openings of ``width``.

    ``mode`` selects the openings: "double" (two slits at center_y +- separation/2),
    "upper"/"lower" (one of the two, the other blocked) or "single" (one
    opening at center_y).
    """

    barrier_x: float
    thickness: float
    width: float
    separation: float
    height: float
    mode: str = "double"
    center_y: float = 0.0

    def __post_init__(self):
        if self.mode not in ("double", "upper", "lower", "single"):
            raise ConfigError(f"unknown slit mode {self.mode!r}")
        if self.height <= 0:
            raise ConfigError("barrier height must be positive")
        if self.width <= 0:
            raise ConfigError("slit width must be positive")
        if self.mode != "single" and not self.separation > self.width:
            raise ConfigError("slit separation must exceed slit width")

    def openings(self) -> list[float]:
        up, lo = self.center_y + self.separation / 2, self.center_y - self.separation / 2
        return {"double": [lo, up], "upper": [up], "lower": [lo], "single": [self.center_y]}[self.mode]

    def with_mode(self, mode: str) -> "SlitGeometry":
        return SlitGeometry(self.barrier_x, self.thickness, self.width, self.separation,
                            self.height, mode, self.center_y)


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    n_steps: int
    mass: float = 1.0
    absorber_width: int = 0          # cells; 0 disables the absorber
    absorber_strength: float = 0.0   # per-step attenuation exponent at the edge
    screen_x: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.n_steps < 1 or int(self.n_steps) != self.n_steps:
            raise ConfigError("n_steps must be a positive integer")
        if not self.mass > 0:
            raise ConfigError("mass must be positive")
        if self.absorber_width and self.absorber_width < 8:
            raise ConfigError("absorber width must be >= 8 cells")
        if self.absorber_strength < 0:
            raise ConfigError("absorber strength must be non-negative")


@dataclass(frozen=True)
class PacketParams:
    center: tuple[float, float]
    width: float
    momentum: tuple[float, float]

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / math.hypot(*self.momentum)

    def build(self, grid: GridSpec) -> ComplexField2D:
        return gaussian_packet(grid, self.center, self.width, self.momentum)


def build_slit_potential(grid: GridSpec, slits: SlitGeometry) -> np.ndarray:
    """V = height on the barrier column minus the openings, 0 elsewhere."""
    if slits.thickness < grid.hx:
        raise ConfigError(f"barrier thickness {slits.thickness} under-resolved (hx = {grid.hx})")
    if slits.width <= 3 * grid.hy:
        raise ConfigError(f"slit width {slits.width} must exceed 3 hy = {3 * grid.hy}")
    x0, x1, y0, y1 = grid.extent
    if not (x0 < slits.barrier_x - slits.thickness / 2 and slits.barrier_x + slits.thickness / 2 < x1):
        raise ConfigError("barrier outside grid")
    for yc in slits.openings():
        if not (y0 < yc - slits.width / 2 and yc + slits.width / 2 < y1):
            raise ConfigError("slit opening outside grid")
    X, Y = grid.mesh()
    wall = np.abs(X - slits.barrier_x) <= slits.thickness / 2 * (1 + 1e-12)
    if not wall.any():
        raise ConfigError("barrier covers no grid column")
    open_ = np.zeros(grid.shape, dtype=bool)
    for yc in slits.openings():
        open_ |= np.abs(Y - yc) < slits.width / 2
    return np.where(wall & ~open_, float(slits.height), 0.0)


def barrier_columns(grid: GridSpec, slits: SlitGeometry) -> np.ndarray:
    return np.nonzero(np.abs(grid.x - slits.barrier_x) <= slits.thickness / 2 * (1 + 1e-12))[0]


def absorbing_mask(grid: GridSpec, width: int, strength: float) -> np.ndarray:
    """exp(-strength * r), r a cos^2 ramp: 1 at the boundary node, 0 from ``width`` cells in.

    Node 0 sits on the periodic boundary; distances min(i, n - i) keep the
    mask mirror-symmetric about the domain center.
    """
    if width < 8:
        raise ConfigError("absorber width must be >= 8 cells")
    if strength < 0:
        raise ConfigError("absorber strength must be non-negative")

    def ramp(n):
        d = np.minimum(np.arange(n), n - np.arange(n)).astype(float)
        return np.where(d < width, np.cos(0.5 * np.pi * d / width) ** 2, 0.0)

    r = np.maximum(ramp(grid.nx)[:, None], ramp(grid.ny)[None, :])
    return np.exp(-strength * r)


def kinetic_phase_at_nyquist(grid: GridSpec, dt: float, m: float = 1.0) -> float:
    k2 = (np.pi / grid.hx) ** 2 + (np.pi / grid.hy) ** 2
    return k2 / (2 * m) * dt


def recommended_dt(grid: GridSpec, v_max: float, m: float = 1.0, safety: float = 0.9) -> float:
    """Largest dt keeping the Nyquist kinetic phase < pi/4 and dt * V_max < pi, times ``safety``."""
    k2 = (np.pi / grid.hx) ** 2 + (np.pi / grid.hy) ** 2
    dt = (np.pi / 4) / (k2 / (2 * m))
    if v_max > 0:
        dt = min(dt, np.pi / v_max)
    return safety * dt


def check_stability(potential: np.ndarray, cfg: EvolutionConfig) -> None:
    vmax = float(np.max(np.abs(potential))) if np.size(potential) else 0.0
    if vmax * cfg.dt >= np.pi:
        raise ConfigError(f"dt * V0 = {vmax * cfg.dt:.3f} must be < pi")


class SplitStepPropagator:
    """Strang splitting exp(-iV dt/2) exp(-i k^2 dt / 2m) exp(-iV dt/2), then the mask."""

    def __init__(self, grid: GridSpec, potential, dt: float, m: float = 1.0, mask: np.ndarray | None = None):
        self.grid = grid
        self.dt = dt
        self.m = m
        V = np.broadcast_to(np.asarray(potential, dtype=float), grid.shape)
        KX, KY = grid.kmesh()
        self.kinetic = np.exp(-1j * (KX ** 2 + KY ** 2) / (2 * m) * dt)
        self.half_v = np.exp(-0.5j * V * dt)
        self.mask = None if mask is None else np.asarray(mask, dtype=float)
        full = self.half_v ** 2
        self._full_v = full if self.mask is None else full * self.mask

    def _kick(self, psi: np.ndarray) -> np.ndarray:
        w = fields.FFT_WORKERS
        return sfft.ifft2(self.kinetic * sfft.fft2(psi, workers=w), workers=w)

    def step(self, psi: np.ndarray) -> np.ndarray:
        psi = self.half_v * psi
        psi = self._kick(psi)
        psi = self.half_v * psi
        if self.mask is not None:
            psi = psi * self.mask
        return psi

    def evolve(self, psi: np.ndarray, n_steps: int,
               callback: Callable[[int, np.ndarray], None] | None = None) -> np.ndarray:
        """Advance ``n_steps``; adjacent half potential kicks are fused.

        ``callback(step, psi)`` sees the state after each kinetic kick; its
        modulus equals the true state's wherever V = 0 and the mask is 1.
        """
        psi = self.half_v * np.asarray(psi, dtype=complex)
        for n in range(1, n_steps + 1):
            psi = self._kick(psi)
            if callback is not None:
                callback(n, psi)
            if n < n_steps:
                psi *= self._full_v
            if n % NAN_CHECK_EVERY == 0 and not np.isfinite(psi).all():
                raise PropagationError(f"non-finite wavefunction at step {n}")
        psi = self.half_v * psi
        if self.mask is not None:
            psi = psi * self.mask
        if not np.isfinite(psi).all():
            raise PropagationError(f"non-finite wavefunction after {n_steps} steps")
        return psi


def split_step(phi: ComplexField2D, potential, cfg: EvolutionConfig, mask: np.ndarray | None = None,
               n_steps: int = 1) -> ComplexField2D:
    """Advance ``phi`` by ``n_steps`` Strang steps of size ``cfg.dt``."""
    check_stability(np.asarray(potential, dtype=float), cfg)
    prop = SplitStepPropagator(phi.grid, potential, cfg.dt, cfg.mass, mask)
    return ComplexField2D(phi.grid, prop.evolve(phi.values, n_steps))


def energy(phi: ComplexField2D, potential, m: float = 1.0) -> float:
    """<H> = <p^2/2m> + <V> for the (not necessarily normalized) field."""
    grid = phi.grid
    KX, KY = grid.kmesh()
    power = np.abs(sfft.fft2(phi.values, workers=fields.FFT_WORKERS)) ** 2
    kinetic = np.sum((KX ** 2 + KY ** 2) / (2 * m) * power) * grid.cell_area / phi.values.size
    pot = np.sum(np.asarray(potential) * np.abs(phi.values) ** 2) * grid.cell_area
    return float(kinetic + pot)


def center_of_mass(phi: ComplexField2D) -> tuple[float, float]:
    rho = np.abs(phi.values) ** 2
    X, Y = phi.grid.mesh()
    return float((X * rho).sum() / rho.sum()), float((Y * rho).sum() / rho.sum())


@dataclass
class FringePattern:
    """Screen profile with fitted fringe spacing and central visibility."""

    y: np.ndarray
    intensity: np.ndarray
    spacing: float                 # median peak-to-peak
    spacing_spectral: float        # dominant Fourier period
    visibility: float
    n_peaks: int
    reliable: bool
    predicted_spacing: float = float("nan")
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.y.shape != self.intensity.shape:
            raise ValueError("y and intensity must have the same shape")
        if np.any(self.intensity < 0):
            raise ValueError("intensities must be non-negative")
        if not (0.0 <= self.visibility <= 1.0):
            raise ValueError("visibility must lie in [0, 1]")

    @property
    def spacing_deviation_pct(self) -> float:
        return 100 * abs(self.spacing - self.predicted_spacing) / self.predicted_spacing

    def peak_positions(self, halfwidth: float | None = None) -> np.ndarray:
        return _peak_positions(self.y, self.intensity, halfwidth)


def visibility(intensity: np.ndarray) -> float:
    imax, imin = float(np.max(intensity)), float(np.min(intensity))
    if imax + imin <= 0:
        return 0.0
    return (imax - imin) / (imax + imin)


def _peak_positions(y: np.ndarray, intensity: np.ndarray, halfwidth: float | None = None,
                    center: float = 0.0, prominence: float = 0.05) -> np.ndarray:
    sel = np.ones(y.shape, dtype=bool) if halfwidth is None else np.abs(y - center) <= halfwidth
    ys, Is = y[sel], intensity[sel]
    if Is.size < 3 or Is.max() <= 0:
        return np.empty(0)
    idx, _ = find_peaks(Is, prominence=prominence * Is.max())
    pos = []
    h = ys[1] - ys[0]
    for i in idx:
        a, b, c = Is[i - 1], Is[i], Is[i + 1]
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        pos.append(ys[i] + shift * h)
    return np.array(pos)


def _spectral_spacing(y: np.ndarray, intensity: np.ndarray, pad: int = 32) -> float:
    """Period of the dominant non-DC Fourier component (Hann window, zero padding)."""
    n = y.size
    if n < 8:
        return float("nan")
    h = y[1] - y[0]
    sig = (intensity - intensity.mean()) * np.hanning(n)
    nfft = pad * n
    power = np.abs(np.fft.rfft(sig, nfft)) ** 2
    freq = np.fft.rfftfreq(nfft, d=h)
    low = 2.0 / (n * h)   # ignore envelope-scale structure
    ok = freq >= low
    if not ok.any():
        return float("nan")
    i = np.argmax(np.where(ok, power, -1.0))
    if 0 < i < len(power) - 1:
        a, b, c = np.log(power[i - 1:i + 2] + 1e-300)
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    f = freq[i] + shift * (freq[1] - freq[0])
    return float(1.0 / f)


def analyze_fringes(y: np.ndarray, intensity: np.ndarray, predicted_spacing: float,
                    fit_halfwidth: float | None = None, vis_halfwidth: float | None = None,
                    center: float = 0.0) -> FringePattern:
    """Fit spacing (peak median and spectral) and visibility around ``center``.

    Defaults: fits over +-1.6 predicted spacings (the central peak and its
    two neighbours, where the paraxial law holds best), visibility over
    +-1 predicted spacing (the central fringe and its neighbouring minima).
    """
    if fit_halfwidth is None:
        fit_halfwidth = 1.6 * predicted_spacing
    if vis_halfwidth is None:
        vis_halfwidth = predicted_spacing
    peaks = _peak_positions(y, intensity, fit_halfwidth, center)
    n_peaks = len(peaks)
    spacing = float(np.median(np.diff(peaks))) if n_peaks >= 2 else float("nan")
    win = np.abs(y - center) <= fit_halfwidth
    spacing_spec = _spectral_spacing(y[win], intensity[win])
    vis_win = np.abs(y - center) <= vis_halfwidth
    vis = visibility(intensity[vis_win]) if vis_win.any() else 0.0
    agree = bool(np.isfinite(spacing) and np.isfinite(spacing_spec)
                 and abs(spacing - spacing_spec) <= 0.05 * spacing)
    return FringePattern(
        y=y, intensity=intensity, spacing=spacing, spacing_spectral=spacing_spec,
        visibility=float(np.clip(vis, 0.0, 1.0)), n_peaks=n_peaks, reliable=n_peaks >= 3,
        predicted_spacing=predicted_spacing,
        info={"estimators_agree": agree, "fit_halfwidth": fit_halfwidth, "vis_halfwidth": vis_halfwidth},
    )


def fraunhofer_spacing(wavelength: float, screen_distance: float, separation: float) -> float:
    return wavelength * screen_distance / separation


def run_double_slit(grid: GridSpec, slits: SlitGeometry, cfg: EvolutionConfig, packet: PacketParams,
                    snapshot_every: int | None = None, snapshot_dir: str | Path | None = None,
                    fit_halfwidth: float | None = None, vis_halfwidth: float | None = None) -> FringePattern:
    """Evolve ``packet`` through the slits and fit the time-integrated screen profile.

    ``info`` of the result carries the transmitted probability (time-integrated
    flux through a column just behind the barrier), final norm and run echo.
    """
    V = build_slit_potential(grid, slits)
    check_stability(V, cfg)
    x0, x1, _, _ = grid.extent
    margin = cfg.absorber_width * grid.hx
    if not (slits.barrier_x + slits.thickness / 2 < cfg.screen_x < x1 - margin):
        raise ConfigError("screen must lie beyond the barrier and inside the absorber-free region")
    if not (x0 + margin < packet.center[0] < slits.barrier_x - slits.thickness / 2):
        raise ConfigError("packet must start on the source side of the barrier")
    mask = absorbing_mask(grid, cfg.absorber_width, cfg.absorber_strength) if cfg.absorber_width else None
    phi = packet.build(grid)
    prop = SplitStepPropagator(grid, V, cfg.dt, cfg.mass, mask)

    i_screen = int(np.argmin(np.abs(grid.x - cfg.screen_x)))
    i_flux = int(barrier_columns(grid, slits).max()) + 3
    screen = np.zeros(grid.ny)
    flux = [0.0]
    hx, hy, dt, m = grid.hx, grid.hy, cfg.dt, cfg.mass
    snap_path = Path(snapshot_dir) if snapshot_dir is not None else None
    if snapshot_every and snap_path is not None:
        snap_path.mkdir(parents=True, exist_ok=True)
        from slitlab.io import write_snapshot

    def record(n, psi):
        col = psi[i_screen]
        screen[:] += (col.real ** 2 + col.imag ** 2) * dt
        c = psi[i_flux]
        dpsi = (psi[i_flux + 1] - psi[i_flux - 1]) / (2 * hx)
        flux[0] += float(np.sum(np.imag(np.conj(c) * dpsi)) / m * hy * dt)
        if snapshot_every and snap_path is not None and n % snapshot_every == 0:
            write_snapshot(snap_path / f"snap_{n:06d}.bin", ComplexField2D(grid, psi))

    psi = prop.evolve(phi.values, cfg.n_steps, record)
    L = cfg.screen_x - slits.barrier_x
    predicted = fraunhofer_spacing(packet.wavelength, L, slits.separation)
    pattern = analyze_fringes(grid.y, screen, predicted, fit_halfwidth, vis_halfwidth, slits.center_y)
    pattern.info.update({
        "transmitted": flux[0],
        "final_norm": float(np.sum(np.abs(psi) ** 2) * grid.cell_area),
        "screen_distance": L,
        "wavelength": packet.wavelength,
        "grid": asdict(grid),
        "slits": asdict(slits),
        "evolution": asdict(cfg),
        "packet": asdict(packet),
    })
    return pattern


def auto_n_steps(packet: PacketParams, slits: SlitGeometry, screen_x: float, dt: float, m: float = 1.0) -> int:
    """Steps for the packet tail (3 widths) to pass the screen, with 10% slack for oblique paths."""
    v = math.hypot(*packet.momentum) / m
    travel = (screen_x - packet.center[0]) + 3 * packet.width + 0.1 * (screen_x - slits.barrier_x)
    return int(math.ceil(travel / v / dt))


def default_setup(n: int = 512, wavelength: float = 1.0, cells_per_wavelength: int = 8,
                  separation: float = 6.0, barrier_height_factor: float = 100.0):
    """Reference double-slit configuration on an n x n grid (lengths in units of ``wavelength``).

    Slits one wavelength wide, ``separation`` apart, screen 26 wavelengths
    behind the barrier for n = 512; positions scale with the domain for
    other n. The
    barrier height is ``barrier_height_factor`` times the packet kinetic energy.
    """
    h = wavelength / cells_per_wavelength
    L_box = n * h
    grid = GridSpec(n, n, L_box, L_box)
    scale = L_box / 64.0
    k = 2 * np.pi / wavelength
    ke = k ** 2 / 2
    slits = SlitGeometry(barrier_x=-12.0 * scale, thickness=1.0 * wavelength, width=1.0 * wavelength,
                         separation=separation * wavelength, height=barrier_height_factor * ke)
    packet = PacketParams(center=(slits.barrier_x - 9.0 * scale * wavelength, 0.0), width=2.0 * wavelength,
                          momentum=(k, 0.0))
    screen_x = 14.0 * scale
    dt = recommended_dt(grid, slits.height)
    n_steps = auto_n_steps(packet, slits, screen_x, dt)
    cfg = EvolutionConfig(dt=dt, n_steps=n_steps, mass=1.0, absorber_width=max(8, n // 20),
                          absorber_strength=0.05, screen_x=screen_x)
    return grid, slits, cfg, packet
