"""Periodic pseudo-spectral grids and complex scalar fields.

The computational domain is the box [-L, L)^n with n in {1, 2, 3},
sampled at M equispaced nodes per axis, x_i = -L + 2*L*i/M.  Discrete
Fourier transforms use the unnormalized numpy convention; the dual
wavenumbers are xi = (pi/L)*m with integer m in [-M/2, M/2), stored in
FFT order.  These conventions are fixed once here; every multiplier,
norm and quadrature weight in the package derives from them:

  * cell volume      dV  = (2L/M)^n
  * Parseval weight  (2L)^n / M^(2n)  (per squared Fourier coefficient)

Fields are plain complex128 arrays tagged with their grid.  Operations
return new Field objects; values arrays are never mutated in place, so
fields can be shared freely across threads.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BoundaryDecayError

_MAGIC = b"WFLD"
_HEADER = struct.Struct("<4scBxxId")  # magic, endian tag, n, pad, M, L


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L)^n."""

    n: int
    M: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.M < 8 or (self.M & (self.M - 1)) != 0:
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.M}")
        if not self.L > 0:
            raise ValueError(f"box half-width must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**self.n

    @property
    def spectral_weight(self) -> float:
        # Parseval: sum_i |f_i|^2 dV = sum_m |F_m|^2 (2L)^n / M^(2n)
        return (2.0 * self.L) ** self.n / float(self.M) ** (2 * self.n)

    @property
    def axis_nodes(self) -> np.ndarray:
        return -self.L + (2.0 * self.L / self.M) * np.arange(self.M)

    @property
    def axis_modes(self) -> np.ndarray:
        """Integer mode numbers m in FFT order."""
        return np.fft.fftfreq(self.M, d=1.0 / self.M)

    @property
    def axis_wavenumbers(self) -> np.ndarray:
        return (np.pi / self.L) * self.axis_modes

    def coordinate_arrays(self) -> list:
        """Broadcastable node coordinates, one array per axis."""
        x = self.axis_nodes
        return [x.reshape(self._axis_shape(j)) for j in range(self.n)]

    def wavenumber_arrays(self) -> list:
        xi = self.axis_wavenumbers
        return [xi.reshape(self._axis_shape(j)) for j in range(self.n)]

    def wavenumber_square(self) -> np.ndarray:
        """|xi|^2 on the full grid (cached; treat as read-only)."""
        return _wavenumber_square(self)

    def radius_square(self) -> np.ndarray:
        """|x|^2 on the full grid (cached; treat as read-only)."""
        return _radius_square(self)

    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the two-thirds rule, |m| <= M/3 per axis."""
        return _dealias_mask(self)

    def _axis_shape(self, j: int) -> tuple:
        shape = [1] * self.n
        shape[j] = self.M
        return tuple(shape)


@lru_cache(maxsize=64)
def _wavenumber_square(grid: Grid) -> np.ndarray:
    acc = np.zeros(grid.shape)
    for xi in grid.wavenumber_arrays():
        acc = acc + xi**2
    return acc


@lru_cache(maxsize=64)
def _radius_square(grid: Grid) -> np.ndarray:
    acc = np.zeros(grid.shape)
    for x in grid.coordinate_arrays():
        acc = acc + x**2
    return acc


@lru_cache(maxsize=64)
def _dealias_mask(grid: Grid) -> np.ndarray:
    keep1d = np.abs(grid.axis_modes) <= grid.M / 3.0
    mask = np.ones(grid.shape, dtype=bool)
    for j in range(grid.n):
        mask = mask & keep1d.reshape(grid._axis_shape(j))
    return mask


def make_grid(n: int, M: int, L: float) -> Grid:
    return Grid(n=n, M=M, L=float(L))


@dataclass(frozen=True)
class Field:
    """Complex scalar field sampled on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        if self.values.dtype != np.complex128:
            object.__setattr__(self, "values", self.values.astype(np.complex128))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def field_from_values(grid: Grid, values: np.ndarray) -> Field:
    return Field(grid, np.asarray(values, dtype=np.complex128))


def spectral_gradient(f: Field) -> list:
    """Exact gradient of the trigonometric interpolant, one Field per axis."""
    hat = np.fft.fftn(f.values)
    out = []
    for xi in f.grid.wavenumber_arrays():
        out.append(Field(f.grid, np.fft.ifftn(1j * xi * hat)))
    return out


def spectral_laplacian(f: Field) -> Field:
    hat = np.fft.fftn(f.values)
    return Field(f.grid, np.fft.ifftn(-f.grid.wavenumber_square() * hat))


def dealias(f: Field) -> Field:
    """Two-thirds rule: zero every mode with |m| > M/3 on any axis.

    Applied inside nonlinear products only; evolving state is never
    filtered directly.
    """
    hat = np.fft.fftn(f.values)
    hat[~f.grid.dealias_mask()] = 0.0
    return Field(f.grid, np.fft.ifftn(hat))


def l2_inner(f: Field, g: Field) -> complex:
    """Trapezoid quadrature of integral f * conj(g); exact for band-limited data."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return complex(np.sum(f.values * np.conj(g.values)) * f.grid.cell_volume)


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume))


def mass(f: Field) -> float:
    """Conserved quantity: squared L2 norm."""
    return float(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume)


def sobolev_norm(f: Field, s: float) -> float:
    """Inhomogeneous Sobolev norm of order s >= 0.

    ||f||^2 = sum_m (1 + |xi_m|^2)^s |F_m|^2 (2L)^n / M^(2n); s = 0
    reproduces the trapezoid L2 norm.
    """
    if s < 0:
        raise ValueError(f"Sobolev order must be nonnegative, got {s}")
    hat = np.fft.fftn(f.values)
    weight = (1.0 + f.grid.wavenumber_square()) ** s
    return float(np.sqrt(np.sum(weight * np.abs(hat) ** 2) * f.grid.spectral_weight))


def homogeneous_sobolev_norm(f: Field, s: float) -> float:
    """Homogeneous counterpart, |xi|^(2s) weight.  Any real s is allowed;
    the zero mode is dropped whenever s != 0 (it would be infinite for
    s < 0 and contributes nothing for s > 0)."""
    hat = np.fft.fftn(f.values)
    if s == 0:
        weight = np.ones(f.grid.shape)
    else:
        xi2 = f.grid.wavenumber_square()
        weight = np.where(xi2 > 0, np.where(xi2 > 0, xi2, 1.0) ** s, 0.0)
    return float(np.sqrt(np.sum(weight * np.abs(hat) ** 2) * f.grid.spectral_weight))


def spectral_centroid(f: Field) -> float:
    """Mass-weighted mean of |xi|; tracks where the spectrum lives."""
    hat = np.abs(np.fft.fftn(f.values)) ** 2
    total = np.sum(hat)
    if total == 0.0:
        return 0.0
    return float(np.sum(np.sqrt(f.grid.wavenumber_square()) * hat) / total)


def check_boundary_decay(f: Field, tol: float = 1e-12) -> None:
    """Require |f| on the outermost node layer below tol * max |f|.

    Periodic wrap-around is harmless only for fields that are
    numerically supported inside the box; experiment setup calls this
    before trusting any run.
    """
    a = np.abs(f.values)
    peak = float(a.max())
    if peak == 0.0:
        return
    worst = 0.0
    for j in range(f.grid.n):
        sl = [slice(None)] * f.grid.n
        # first and last node layer; the first is also the periodic image
        # of the far wall
        sl[j] = 0
        worst = max(worst, float(a[tuple(sl)].max()))
        sl[j] = f.grid.M - 1
        worst = max(worst, float(a[tuple(sl)].max()))
    if worst > tol * peak:
        raise BoundaryDecayError(
            f"boundary amplitude {worst:.3e} exceeds {tol:.1e} * peak {peak:.3e}; "
            "enlarge the box or shrink the data"
        )


def write_field(f: Field, path) -> None:
    """Binary field container: fixed little-endian header, then the node
    values as interleaved re/im doubles in row-major order."""
    header = _HEADER.pack(_MAGIC, b"<", f.grid.n, f.grid.M, f.grid.L)
    payload = np.ascontiguousarray(f.values).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_field(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, endian, n, M, L = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise ValueError(f"not a field container: bad magic {magic!r}")
    if endian != b"<":
        raise ValueError(f"unsupported endianness tag {endian!r}")
    grid = Grid(n=int(n), M=int(M), L=float(L))
    count = grid.M**grid.n
    values = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size, count=count)
    return Field(grid, values.reshape(grid.shape).astype(np.complex128))


def field_to_csv(f: Field, path) -> None:
    """Node table with one row per grid point: coordinates, re, im."""
    coords = np.meshgrid(*([f.grid.axis_nodes] * f.grid.n), indexing="ij")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(f.grid.n)] + ["re", "im"])
        flat = [c.ravel() for c in coords]
        vals = f.values.ravel()
        for i in range(vals.size):
            row = [f"{c[i]:.17g}" for c in flat]
            row.append(f"{vals[i].real:.17g}")
            row.append(f"{vals[i].imag:.17g}")
            writer.writerow(row)
