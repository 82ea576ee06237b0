"""Closed-loop integrals of vector fields, winding numbers and plaquette
vortex scans of complex scalar fields.

Two winding estimators are always computed: the line integral of the
normalized current and the accumulated principal-branch phase differences
of the field sampled along the loop.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from slitlab.currents import default_eps0, normalized_current
from slitlab.fields import ComplexField2D, GridSpec, VectorField2D

CLOSURE_TOL = 1e-12
AGREEMENT_TOL = 0.25


class LoopError(ValueError):
    """Loop malformed, outside the grid, or crossing undefined field points."""


class WindingError(ValueError):
    """Winding estimate unavailable or unreliable."""


@dataclass(frozen=True)
class LoopPath:
    """Closed polyline, ``points[-1] == points[0]``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise LoopError("loop points must have shape (n, 2)")
        if len(pts) < 9:
            raise LoopError(f"loop needs at least 8 distinct points, got {len(pts) - 1}")
        if np.abs(pts[0] - pts[-1]).max() > CLOSURE_TOL:
            raise LoopError("loop is not closed")
        if np.any(np.all(np.diff(pts, axis=0) == 0, axis=1)):
            raise LoopError("consecutive loop points coincide")
        object.__setattr__(self, "points", pts)

    @property
    def closed(self) -> bool:
        return True

    @property
    def n_segments(self) -> int:
        return len(self.points) - 1

    def reversed(self) -> "LoopPath":
        return LoopPath(self.points[::-1].copy())

    def perimeter(self) -> float:
        return math.fsum(np.hypot(*np.diff(self.points, axis=0).T))

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.points[1:] + self.points[:-1])

    def segments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)


def circle_loop(center, radius: float, n_points: int, grid: GridSpec | None = None) -> LoopPath:
    """Regular n-gon inscribed in a circle, counterclockwise; ``n_points + 1`` vertices."""
    if n_points < 16:
        raise LoopError(f"circle loop needs >= 16 points, got {n_points}")
    if grid is not None and radius <= 2 * max(grid.hx, grid.hy):
        raise LoopError(f"radius {radius} under-resolved by grid spacing")
    if radius <= 0:
        raise LoopError("radius must be positive")
    theta = 2 * np.pi * np.arange(n_points + 1) / n_points
    pts = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    pts[-1] = pts[0]
    return LoopPath(pts)


def rectangle_loop(x0: float, x1: float, y0: float, y1: float, n_per_side: int = 16) -> LoopPath:
    """Counterclockwise rectangle with ``n_per_side`` equal segments per edge."""
    if not (x1 > x0 and y1 > y0):
        raise LoopError("rectangle corners must satisfy x1 > x0, y1 > y0")
    t = np.arange(n_per_side) / n_per_side
    bottom = np.column_stack([x0 + (x1 - x0) * t, np.full(n_per_side, y0)])
    right = np.column_stack([np.full(n_per_side, x1), y0 + (y1 - y0) * t])
    top = np.column_stack([x1 - (x1 - x0) * t, np.full(n_per_side, y1)])
    left = np.column_stack([np.full(n_per_side, x0), y1 - (y1 - y0) * t])
    pts = np.vstack([bottom, right, top, left, bottom[:1]])
    return LoopPath(pts)


def node_rectangle_loop(grid: GridSpec, i0: int, i1: int, j0: int, j1: int) -> LoopPath:
    """Counterclockwise loop through grid nodes around index box [i0, i1] x [j0, j1]."""
    if not (0 <= i0 < i1 < grid.nx and 0 <= j0 < j1 < grid.ny):
        raise LoopError("node rectangle outside grid")
    x, y = grid.x, grid.y
    idx = ([(i, j0) for i in range(i0, i1)] + [(i1, j) for j in range(j0, j1)]
           + [(i, j1) for i in range(i1, i0, -1)] + [(i0, j) for j in range(j1, j0, -1)])
    idx.append(idx[0])
    pts = np.array([(x[i], y[j]) for i, j in idx])
    return LoopPath(pts)


def _fractional_index(grid: GridSpec, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fx = pts[:, 0] / grid.hx + grid.nx / 2
    fy = pts[:, 1] / grid.hy + grid.ny / 2
    tol = 1e-9
    if (fx.min() < -tol or fx.max() > grid.nx - 1 + tol
            or fy.min() < -tol or fy.max() > grid.ny - 1 + tol):
        raise LoopError("loop leaves the grid interior")
    return np.clip(fx, 0, grid.nx - 1), np.clip(fy, 0, grid.ny - 1)


def _bilinear_weights(grid: GridSpec, pts: np.ndarray):
    fx, fy = _fractional_index(grid, pts)
    i = np.minimum(np.floor(fx).astype(int), grid.nx - 2)
    j = np.minimum(np.floor(fy).astype(int), grid.ny - 2)
    tx, ty = fx - i, fy - j
    corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
    weights = [(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty]
    return corners, weights


def interpolate(values: np.ndarray, grid: GridSpec, pts: np.ndarray, mask: np.ndarray | None = None):
    """Bilinear interpolation of ``values[..., ix, iy]`` at physical points."""
    corners, weights = _bilinear_weights(grid, pts)
    if mask is not None:
        ok = np.ones(len(pts), dtype=bool)
        for (i, j), w in zip(corners, weights):
            ok &= mask[i, j] | (w == 0)
        if not ok.all():
            raise LoopError("loop touches undefined field points")
    return sum(w * values[..., i, j] for (i, j), w in zip(corners, weights))


def loop_integral(field: VectorField2D, loop: LoopPath) -> float:
    """Circulation of the in-plane part of ``field``: midpoint rule per segment."""
    mids = loop.midpoints()
    F = interpolate(field.values[:2], field.grid, mids, field.mask)
    contributions = np.sum(F.T * loop.segments(), axis=1)
    return math.fsum(contributions)


def phase_unwrap_integral(values: np.ndarray, grid: GridSpec, loop: LoopPath) -> float:
    """Sum of principal-branch phase differences along the sampled loop."""
    z = interpolate(values, grid, loop.points)
    return math.fsum(np.angle(z[1:] * np.conj(z[:-1])))


@dataclass(frozen=True)
class WindingResult:
    integral: float
    k: int
    residual: float
    unwrapped: float
    agree: bool
    n_segments: int

    @property
    def unwrapped_k(self) -> int:
        return int(round(self.unwrapped / (2 * np.pi)))

    def to_dict(self) -> dict:
        return asdict(self)


def winding_number(phi: ComplexField2D, loop: LoopPath, eps0: float | None = None,
                   scheme: str = "spectral", strict: bool = True) -> WindingResult:
    """Winding of ``phi`` along ``loop`` from the normalized-current circulation,
    cross-checked against phase unwrapping.

    Raises ``WindingError`` when the loop passes a node (density below
    ``eps0``) or, with ``strict``, when the two estimators differ by more
    than a quarter turn.
    """
    rho = np.abs(phi.values) ** 2
    if eps0 is None:
        eps0 = default_eps0(rho)
    samples = np.vstack([loop.points, loop.midpoints()])
    if interpolate(rho, phi.grid, samples).min() <= eps0:
        raise WindingError("loop passes through a field node")
    Jt = normalized_current(phi, eps0, scheme)
    try:
        integral = loop_integral(Jt, loop)
    except LoopError as exc:
        if "undefined" in str(exc):
            raise WindingError("loop passes through a field node") from exc
        raise
    unwrapped = phase_unwrap_integral(phi.values, phi.grid, loop)
    turns = integral / (2 * np.pi)
    k = int(round(turns))
    agree = abs(turns - unwrapped / (2 * np.pi)) <= AGREEMENT_TOL
    if strict and not agree:
        raise WindingError(
            f"winding estimators disagree: line integral {turns:.4f} vs unwrapping {unwrapped / (2 * np.pi):.4f}")
    return WindingResult(integral=integral, k=k, residual=abs(turns - k), unwrapped=unwrapped,
                         agree=bool(agree), n_segments=loop.n_segments)


@dataclass(frozen=True)
class Vortex:
    i: int
    j: int
    x: float
    y: float
    charge: int
    low_density: bool
    under_resolved: bool

    def to_dict(self) -> dict:
        return asdict(self)


def plaquette_charges(phi: ComplexField2D) -> np.ndarray:
    """Integer charge of each cell (i, j)-(i+1, j)-(i+1, j+1)-(i, j+1), shape (nx-1, ny-1)."""
    v = phi.values
    a, b, c, d = v[:-1, :-1], v[1:, :-1], v[1:, 1:], v[:-1, 1:]
    turn = (np.angle(b * np.conj(a)) + np.angle(c * np.conj(b))
            + np.angle(d * np.conj(c)) + np.angle(a * np.conj(d)))
    return np.rint(turn / (2 * np.pi)).astype(int)


def vortex_scan(phi: ComplexField2D, eps0: float | None = None) -> list[Vortex]:
    """Nonzero plaquette charges in row-major cell order."""
    rho = np.abs(phi.values) ** 2
    if eps0 is None:
        eps0 = default_eps0(rho)
    q = plaquette_charges(phi)
    corner_min = np.minimum.reduce([rho[:-1, :-1], rho[1:, :-1], rho[1:, 1:], rho[:-1, 1:]])
    g = phi.grid
    out = []
    for i, j in zip(*np.nonzero(q)):
        out.append(Vortex(i=int(i), j=int(j), x=float(g.x[i] + g.hx / 2), y=float(g.y[j] + g.hy / 2),
                          charge=int(q[i, j]), low_density=bool(corner_min[i, j] <= eps0),
                          under_resolved=bool(abs(q[i, j]) > 1)))
    return out


def total_charge(vortices, include_low_density: bool = True) -> int:
    return sum(v.charge for v in vortices if include_low_density or not v.low_density)


def vortex_field(grid: GridSpec, vortices, envelope: float | None = None) -> ComplexField2D:
    """Product of ((x - x0) + i s (y - y0))^|m| factors, s = sign(m), optionally
    times a Gaussian envelope ``exp(-r^2 / (4 envelope^2))`` so that the
    field is negligible at the periodic boundary.
    """
    X, Y = grid.mesh()
    phi = np.ones(grid.shape, dtype=complex)
    for x0, y0, m in vortices:
        m = int(m)
        if m:
            phi *= ((X - x0) + 1j * np.sign(m) * (Y - y0)) ** abs(m)
    if envelope is not None:
        phi *= np.exp(-(X ** 2 + Y ** 2) / (4 * envelope ** 2))
    return ComplexField2D(grid, phi)
