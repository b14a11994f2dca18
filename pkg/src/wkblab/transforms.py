"""Changes of frame that trade potentials and singular horizons for
time weights.

Three exact maps live here, plus the spectral resampler they share:

* lens: between the isotropic harmonic frame (trap frequency 1, bounded
  time windows) and the free frame on all of R_t.  Free time t and
  harmonic time tau are linked by t = tan(tau).
* conformal: between a scaled-cubic problem that focuses at t = 1 and a
  weighted problem with a clean data line.  A pure-chirp initial state
  on the singular side becomes plain WKB data on the weighted side.
* parabolic: the amplitude/length rescaling that turns small rough data
  at fixed dispersion into O(1) data with a small semiclassical
  parameter, at the cost of a refined grid.

All three are unitary on L2 in the continuum.  On the grid they are
exact on band-limited fields up to the box-truncation error, which the
boundary-decay precondition keeps at roundoff size.
"""

from __future__ import annotations

import math

import numpy as np

from .dynamics import WaveFunction
from .errors import ConfigError
from .grid import Field, Grid, check_boundary_decay, make_grid


def _evaluation_matrix(source: Grid, targets: np.ndarray) -> np.ndarray:
    """One-axis Fourier evaluation: row i sums the interpolant at point
    targets[i].  Points outside the source box get an all-zero row; by
    the decay precondition the true value there is below tolerance, and
    the periodic image certainly is not."""
    xi = source.axis_wavenumbers
    mat = np.exp(1j * np.outer(targets + source.L, xi)) / source.M
    mat[np.abs(targets) > source.L, :] = 0.0
    return mat


def dilate(f: Field, scale: float, target: Grid | None = None) -> Field:
    """Sample the spectral interpolant of f at scale * x over the target
    grid: returns g with g(x) = f(scale x).

    scale < 1 spreads the field out (always band-safe); scale > 1
    contracts it, reading f far from the origin, where the field must
    have decayed for the result to mean anything.
    """
    if not (np.isfinite(scale) and scale > 0):
        raise ValueError(f"dilation scale must be positive, got {scale}")
    if target is None:
        target = f.grid
    if target.n != f.grid.n:
        raise ConfigError(f"dilation cannot change dimension ({f.grid.n} -> {target.n})")

    # isotropic grids: one per-axis matrix serves every axis
    mat = _evaluation_matrix(f.grid, scale * target.axis_nodes)
    out = np.fft.fftn(f.values)
    for axis in range(f.grid.n):
        out = np.moveaxis(np.tensordot(mat, out, axes=(1, axis)), 0, axis)
    return Field(target, out)


def translate(f: Field, shift) -> Field:
    """Periodic translation g(x) = f(x - shift), exact in the mode basis
    (multiplies each Fourier coefficient by exp(-i xi . shift))."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if shift.shape != (f.grid.n,):
        raise ConfigError(f"shift needs {f.grid.n} components, got {shift.shape}")
    hat = np.fft.fftn(f.values)
    for axis, s in enumerate(shift):
        xi = f.grid.axis_wavenumbers
        phase = np.exp(-1j * xi * s).reshape(
            [-1 if d == axis else 1 for d in range(f.grid.n)]
        )
        hat = hat * phase
    return Field(f.grid, np.fft.ifftn(hat))


def _radius_sq(grid: Grid) -> np.ndarray:
    coords = grid.coordinate_arrays()
    return sum(c**2 for c in coords)


# ---------------------------------------------------------------------------
# lens: harmonic frame <-> free frame


def free_time(tau: float) -> float:
    if not -math.pi / 2 < tau < math.pi / 2:
        raise ConfigError(f"harmonic time must lie in (-pi/2, pi/2), got {tau}")
    return math.tan(tau)


def harmonic_time(t: float) -> float:
    return math.atan(t)


def lens_to_free(wf: WaveFunction, target: Grid | None = None) -> WaveFunction:
    """Map a harmonic-frame state at time tau to the free-frame state at
    t = tan(tau):

        U(t, x) = (1+t^2)^(-n/4) exp(i t |x|^2 / (2h(1+t^2))) u(tau, x/sqrt(1+t^2))
    """
    t = free_time(wf.t)
    grid = target if target is not None else wf.grid
    stretch = math.sqrt(1.0 + t * t)
    g = dilate(wf.field, 1.0 / stretch, grid)
    chirp = np.exp((0.5j * t / (wf.h * (1.0 + t * t))) * _radius_sq(grid))
    values = (1.0 + t * t) ** (-grid.n / 4.0) * chirp * g.values
    return WaveFunction(Field(grid, values), h=wf.h, t=t)


def lens_from_free(wf: WaveFunction, target: Grid | None = None) -> WaveFunction:
    """Inverse lens: free-frame state at time t back to the harmonic
    frame at tau = arctan(t):

        u(tau, y) = (1+t^2)^(n/4) exp(-i t |y|^2 / (2h)) U(t, y sqrt(1+t^2))

    Contracts by sqrt(1+t^2), so the free field must be well decayed
    inside its box.
    """
    t = wf.t
    grid = target if target is not None else wf.grid
    stretch = math.sqrt(1.0 + t * t)
    g = dilate(wf.field, stretch, grid)
    chirp = np.exp((-0.5j * t / wf.h) * _radius_sq(grid))
    values = (1.0 + t * t) ** (grid.n / 4.0) * chirp * g.values
    return WaveFunction(Field(grid, values), h=wf.h, t=harmonic_time(t))


# ---------------------------------------------------------------------------
# conformal: focusing cubic frame <-> weighted frame


def _check_conformal_params(eps: float, gamma: float) -> None:
    if not 0 < gamma < 1:
        raise ConfigError(f"conformal exponent must lie in (0, 1), got {gamma}")
    if not 0 < eps <= 1:
        raise ConfigError(f"scaling parameter must lie in (0, 1], got {eps}")


def conformal_h(eps: float, gamma: float) -> float:
    """Semiclassical parameter of the weighted frame."""
    _check_conformal_params(eps, gamma)
    return eps ** (1.0 - gamma)


def conformal_start(eps: float, gamma: float) -> float:
    """Weighted-frame time of the data line (u-frame t = 0)."""
    _check_conformal_params(eps, gamma)
    return eps**gamma


def conformal_psi_time(t: float, eps: float, gamma: float) -> float:
    _check_conformal_params(eps, gamma)
    if t >= 1:
        raise ConfigError(f"the singular frame only exists for t < 1, got {t}")
    return eps**gamma / (1.0 - t)


def conformal_u_time(tau: float, eps: float, gamma: float) -> float:
    _check_conformal_params(eps, gamma)
    if tau <= 0:
        raise ConfigError(f"weighted-frame time must be positive, got {tau}")
    return 1.0 - eps**gamma / tau


def conformal_to_psi(
    wf: WaveFunction, eps: float, gamma: float, target: Grid | None = None
) -> WaveFunction:
    """Map the singular-frame state u(t) (semiclassical parameter eps,
    focus at t = 1) to the weighted frame:

        psi(tau, y) = (1-t)^(n/2) exp(i (1-t)|y|^2 / (2 eps)) u(t, (1-t) y)

    with tau = eps^gamma / (1-t).  At t = 0 this strips the chirp
    exp(-i|x|^2/(2 eps)) off the data exactly.
    """
    _check_conformal_params(eps, gamma)
    if abs(wf.h - eps) > 1e-12 * eps:
        raise ConfigError(
            f"singular-frame state carries h={wf.h!r}, expected the scaling parameter {eps!r}"
        )
    tau = conformal_psi_time(wf.t, eps, gamma)
    grid = target if target is not None else wf.grid
    span = 1.0 - wf.t
    g = dilate(wf.field, span, grid)
    chirp = np.exp((0.5j * span / eps) * _radius_sq(grid))
    values = span ** (grid.n / 2.0) * chirp * g.values
    return WaveFunction(Field(grid, values), h=conformal_h(eps, gamma), t=tau)


def conformal_from_psi(
    wf: WaveFunction, eps: float, gamma: float, target: Grid | None = None
) -> WaveFunction:
    """Inverse conformal map, weighted frame back to the singular frame:

        u(t, x) = (1-t)^(-n/2) exp(-i |x|^2 / (2 eps (1-t))) psi(tau, x/(1-t))

    with t = 1 - eps^gamma / tau.  Contracts by 1/(1-t), which blows up
    as the focus is approached; the target grid must resolve the chirp.
    """
    _check_conformal_params(eps, gamma)
    expected_h = conformal_h(eps, gamma)
    if abs(wf.h - expected_h) > 1e-12 * expected_h:
        raise ConfigError(
            f"weighted-frame state carries h={wf.h!r}, expected {expected_h!r}"
        )
    t = conformal_u_time(wf.t, eps, gamma)
    grid = target if target is not None else wf.grid
    span = 1.0 - t
    g = dilate(wf.field, 1.0 / span, grid)
    chirp = np.exp((-0.5j / (eps * span)) * _radius_sq(grid))
    values = span ** (-grid.n / 2.0) * chirp * g.values
    return WaveFunction(Field(grid, values), h=eps, t=t)


# ---------------------------------------------------------------------------
# parabolic rescaling: rough small data <-> semiclassical WKB data


def parabolic_h(lam: float, s: float, sigma: int, n: int) -> float:
    """Semiclassical parameter produced by the rescaling; small exactly
    when s sits below the critical index n/2 - 1/sigma."""
    if not 0 < lam < 1:
        raise ConfigError(f"rescaling length must lie in (0, 1), got {lam}")
    if sigma < 1 or int(sigma) != sigma:
        raise ConfigError(f"nonlinearity degree must be a positive integer, got {sigma}")
    if not s < n / 2.0 - 1.0 / sigma:
        raise ConfigError(
            f"order s={s} is not below the critical index {n / 2.0 - 1.0 / sigma} "
            f"for n={n}, sigma={sigma}"
        )
    return lam ** (0.5 * n * sigma - 1.0 - s * sigma)


def refined_grid(grid: Grid, lam: float) -> Grid:
    """Same box, mode count grown by the smallest power of two covering
    the 1/lam contraction."""
    factor = 1 << max(0, math.ceil(math.log2(1.0 / lam)))
    return make_grid(grid.n, grid.M * factor, grid.L)


def parabolic_rescale(
    a0: Field, lam: float, s: float, sigma: int, decay_tol: float = 1e-9
) -> tuple[Field, float]:
    """Concentrate a0 at scale lam with the Sobolev-critical amplitude:

        u0(x) = lam^(-n/2 + s) a0(x / lam)

    Returns (u0 on the refined grid, h) where h = lam^(n sigma/2 - 1 - s sigma)
    is the semiclassical parameter of the equivalent O(1)-data problem.
    Requires s < n/2 - 1/sigma, which is exactly what makes h small, and
    a profile that has decayed at the box edge (contraction reads a0
    beyond the nodes otherwise).
    """
    n = a0.grid.n
    h = parabolic_h(lam, s, sigma, n)
    check_boundary_decay(a0, decay_tol)
    target = refined_grid(a0.grid, lam)
    u0 = dilate(a0, 1.0 / lam, target)
    return Field(target, lam ** (-0.5 * n + s) * u0.values), h
