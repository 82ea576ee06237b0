"""Uniform 2-D grids, complex scalar/spinor fields and their derivatives.

All fields live on a periodic rectangular grid with node coordinates
``x_i = (i - nx/2) * hx`` and ``y_j = (j - ny/2) * hy``. Arrays are indexed
``[..., ix, iy]`` so that component axes (spinor or vector) come first.
Natural units with hbar = 1 are used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

MIN_POINTS = 8

# Worker count handed to scipy.fft; the CLI ``--threads`` flag sets it.
FFT_WORKERS = 1


class GridError(ValueError):
    """Raised for invalid grid parameters or mismatched grids."""


def set_fft_workers(n: int) -> None:
    global FFT_WORKERS
    if n < 1:
        raise ValueError("thread count must be >= 1")
    FFT_WORKERS = int(n)


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise GridError("grid counts must be integers")
        if self.nx < MIN_POINTS or self.ny < MIN_POINTS:
            raise GridError(f"grid counts must be >= {MIN_POINTS}, got ({self.nx}, {self.ny})")
        if not (np.isfinite(self.lx) and np.isfinite(self.ly)) or self.lx <= 0 or self.ly <= 0:
            raise GridError(f"grid lengths must be positive, got ({self.lx}, {self.ly})")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx / 2) * self.hx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny / 2) * self.hy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def kx(self) -> np.ndarray:
        return 2 * np.pi * sfft.fftfreq(self.nx, d=self.hx)

    @property
    def ky(self) -> np.ndarray:
        return 2 * np.pi * sfft.fftfreq(self.ny, d=self.hy)

    def kmesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.kx, self.ky, indexing="ij")

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) over the grid nodes."""
        x, y = self.x, self.y
        return (x[0], x[-1], y[0], y[-1])


def make_grid(nx: int, ny: int, lx: float, ly: float) -> GridSpec:
    for n in (nx, ny):
        if int(n) != n:
            raise GridError(f"grid counts must be integers, got {n}")
    return GridSpec(int(nx), int(ny), float(lx), float(ly))


def _check_values(grid: GridSpec, values: np.ndarray, ncomp: int | None, dtype) -> np.ndarray:
    values = np.asarray(values, dtype=dtype)
    expected = grid.shape if ncomp is None else (ncomp, *grid.shape)
    if values.shape != expected:
        raise GridError(f"values have shape {values.shape}, expected {expected}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field samples must be finite")
    return values


@dataclass(frozen=True)
class ComplexField2D:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values, None, complex))

    ncomp = 1

    def components(self) -> np.ndarray:
        return self.values[np.newaxis]


@dataclass(frozen=True)
class PauliField2D:
    """Two-component spinor field, ``values[a, ix, iy]``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values, 2, complex))

    ncomp = 2

    def components(self) -> np.ndarray:
        return self.values

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area)

    @classmethod
    def from_scalar(cls, phi: ComplexField2D, spinor) -> "PauliField2D":
        """Scalar wavefunction times a fixed 2-spinor."""
        chi = np.asarray(spinor, dtype=complex).reshape(2, 1, 1)
        return cls(phi.grid, chi * phi.values[np.newaxis])


@dataclass(frozen=True)
class DiracField2D:
    """Four-component spinor field; components 0-1 are the large block."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values, 4, complex))

    ncomp = 4

    def components(self) -> np.ndarray:
        return self.values

    @classmethod
    def from_blocks(cls, large: PauliField2D, small: PauliField2D) -> "DiracField2D":
        require_same_grid(large.grid, small.grid)
        return cls(large.grid, np.concatenate([large.values, small.values]))

    @property
    def large(self) -> PauliField2D:
        return PauliField2D(self.grid, self.values[:2])

    @property
    def small(self) -> PauliField2D:
        return PauliField2D(self.grid, self.values[2:])


@dataclass(frozen=True)
class VectorField2D:
    """Real vector field with 2 (in-plane) or 3 components.

    ``mask`` marks points where the field is defined; ``None`` means
    everywhere. Undefined samples are stored as zero.
    """

    grid: GridSpec
    values: np.ndarray
    mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3 or values.shape[0] not in (2, 3) or values.shape[1:] != self.grid.shape:
            raise GridError(f"vector field values have shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "values", values)
        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != self.grid.shape:
                raise GridError("mask shape does not match grid")
            object.__setattr__(self, "mask", mask)

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    def defined(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.grid.shape, dtype=bool)
        return self.mask

    def planar(self) -> "VectorField2D":
        return VectorField2D(self.grid, self.values[:2], self.mask)

    def __add__(self, other: "VectorField2D") -> "VectorField2D":
        require_same_grid(self.grid, other.grid)
        n = max(self.ncomp, other.ncomp)
        a = _pad3(self.values, n) + _pad3(other.values, n)
        mask = None
        if self.mask is not None or other.mask is not None:
            mask = self.defined() & other.defined()
        return VectorField2D(self.grid, a, mask)

    def __sub__(self, other: "VectorField2D") -> "VectorField2D":
        return self + VectorField2D(other.grid, -other.values, other.mask)

    def max_norm(self) -> float:
        v = np.where(self.defined(), np.sqrt(np.sum(self.values ** 2, axis=0)), 0.0)
        return float(v.max())


def _pad3(values: np.ndarray, n: int) -> np.ndarray:
    if values.shape[0] == n:
        return values
    out = np.zeros((n, *values.shape[1:]))
    out[: values.shape[0]] = values
    return out


def require_same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise GridError(f"grid mismatch: {a} vs {b}")


def gaussian_packet(grid: GridSpec, center, width: float, momentum=(0.0, 0.0)) -> ComplexField2D:
    """Unit-norm Gaussian packet ``exp(-|r - c|^2 / (4 width^2) + i k.r)``.

    ``width`` is the standard deviation of the density |phi|^2.
    """
    if width <= 2 * max(grid.hx, grid.hy):
        raise GridError(f"packet width {width} under-resolved by spacing {max(grid.hx, grid.hy)}")
    X, Y = grid.mesh()
    x0, y0 = center
    kx, ky = momentum
    amp = np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (4 * width ** 2))
    phi = amp * np.exp(1j * (kx * X + ky * Y))
    phi /= np.sqrt(np.sum(np.abs(phi) ** 2) * grid.cell_area)
    return ComplexField2D(grid, phi)


def plane_wave(grid: GridSpec, momentum, amplitude: complex = 1.0) -> ComplexField2D:
    X, Y = grid.mesh()
    return ComplexField2D(grid, amplitude * np.exp(1j * (momentum[0] * X + momentum[1] * Y)))


def commensurate_momentum(grid: GridSpec, mx: int, my: int) -> tuple[float, float]:
    """Wave vector with mx, my whole periods across the domain."""
    return (2 * np.pi * mx / grid.lx, 2 * np.pi * my / grid.ly)


def random_band_limited(grid: GridSpec, ncomp: int, band: int, rng: np.random.Generator) -> np.ndarray:
    """Complex array (ncomp, nx, ny) built from Fourier modes |mx|, |my| <= band
    with standard normal coefficients; spectral derivatives are exact on it.
    """
    if not 1 <= band < min(grid.nx, grid.ny) // 2:
        raise GridError(f"band {band} must be in [1, n/2)")
    spec = np.zeros((ncomp, grid.nx, grid.ny), dtype=complex)
    m = np.r_[0:band + 1, -band:0]
    shape = (ncomp, len(m), len(m))
    coeff = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    spec[:, m[:, None], m[None, :]] = coeff
    return sfft.ifft2(spec, axes=(-2, -1), workers=FFT_WORKERS) * (grid.nx * grid.ny) / (2 * band + 1)


def norm(field) -> float:
    """L2 norm squared, sum |phi|^2 hx hy (summed over spinor components)."""
    return float(np.sum(np.abs(field.values) ** 2) * field.grid.cell_area)


def mean_momentum(phi: ComplexField2D) -> tuple[float, float]:
    """First moment of |phi_hat(k)|^2 over the discrete Fourier grid."""
    power = np.abs(sfft.fft2(phi.values, workers=FFT_WORKERS)) ** 2
    KX, KY = phi.grid.kmesh()
    total = power.sum()
    return float((KX * power).sum() / total), float((KY * power).sum() / total)


SCHEMES = ("spectral", "central2")


def derivative(values: np.ndarray, grid: GridSpec, axis: str, scheme: str = "spectral") -> np.ndarray:
    """d/dx or d/dy of ``values`` over its last two axes (periodic domain)."""
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    ax = -2 if axis == "x" else -1
    h = grid.hx if axis == "x" else grid.hy
    n = grid.nx if axis == "x" else grid.ny
    if scheme == "central2":
        return (np.roll(values, -1, axis=ax) - np.roll(values, 1, axis=ax)) / (2 * h)
    if scheme != "spectral":
        raise ValueError(f"unknown derivative scheme {scheme!r}")
    k = 2 * np.pi * sfft.fftfreq(n, d=h)
    if n % 2 == 0:
        k[n // 2] = 0.0  # odd derivative of the Nyquist mode is ill-defined
    shape = [1] * values.ndim
    shape[ax] = n
    k = k.reshape(shape)
    if np.isrealobj(values):
        return sfft.ifft(1j * k * sfft.fft(values, axis=ax, workers=FFT_WORKERS),
                         axis=ax, workers=FFT_WORKERS).real
    return sfft.ifft(1j * k * sfft.fft(values, axis=ax, workers=FFT_WORKERS),
                     axis=ax, workers=FFT_WORKERS)


def grad(values: np.ndarray, grid: GridSpec, scheme: str = "spectral") -> np.ndarray:
    """Stacked (d/dx, d/dy), new leading axis of length 2."""
    return np.stack([derivative(values, grid, "x", scheme), derivative(values, grid, "y", scheme)])


def gradient(field: ComplexField2D, scheme: str = "spectral") -> tuple[ComplexField2D, ComplexField2D]:
    gx, gy = grad(field.values, field.grid, scheme)
    return ComplexField2D(field.grid, gx), ComplexField2D(field.grid, gy)


def divergence(vec: VectorField2D, scheme: str = "spectral") -> np.ndarray:
    return (derivative(vec.values[0], vec.grid, "x", scheme)
            + derivative(vec.values[1], vec.grid, "y", scheme))


def curl(values: np.ndarray, grid: GridSpec, scheme: str = "spectral") -> np.ndarray:
    """Curl of a 3-component planar field with no z dependence."""
    mx, my, mz = values
    dx = lambda f: derivative(f, grid, "x", scheme)
    dy = lambda f: derivative(f, grid, "y", scheme)
    return np.stack([dy(mz), -dx(mz), dx(my) - dy(mx)])


def metric_overlap(psi, A: VectorField2D, dt: float, m: float = 1.0, scheme: str = "spectral") -> complex:
    """Projected metric ``int psi^dagger psi + i dt int J.A`` over the grid.

    ``J`` is the Schrodinger current for a scalar field and the full Pauli
    current for a 2-spinor. For unit-norm ``psi`` and a small second term
    the result approximates ``exp(i S)`` with ``S = dt int J.A``.
    """
    from slitlab import currents

    require_same_grid(psi.grid, A.grid)
    if isinstance(psi, ComplexField2D):
        J = currents.schrodinger_current(psi, m, scheme)
    elif isinstance(psi, PauliField2D):
        J = currents.pauli_current(psi, m, scheme)
    else:
        raise TypeError(f"unsupported field type {type(psi).__name__}")
    nA = A.values.shape[0]
    flux = np.sum(J.values[:nA] * A.values) * psi.grid.cell_area
    return complex(norm(psi) + 1j * dt * flux)
