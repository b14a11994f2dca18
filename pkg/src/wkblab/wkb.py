"""Geometric-optics machinery for the semiclassical equation.

Three layers, all sharing the periodic spectral calculus:

  * the limit eikonal/transport system for (phase, amplitude),

        d_t phi = -1/2 |grad phi|^2 - W(t) f(w(t) |a|^2)
        d_t a   = -grad phi . grad a - 1/2 a Lap phi,

    integrated by RK4 in time and valid only before caustics (the step
    aborts once the phase Hessian exceeds a tolerance);

  * the exact hyperbolic reformulation: writing the solution as
    alpha exp(i phi / h) with complex amplitude alpha = alpha1 + i alpha2
    and velocity v = grad phi gives a quasilinear system

        d_t alpha = -v . grad alpha - 1/2 alpha div v + i (h/2) Lap alpha
        d_t v_j   = -(v . grad) v_j - 2 W w f'(w |alpha|^2) Re(conj(alpha) d_j alpha)

    that is symmetrizable as long as f' > 0; it carries the O(h) terms
    exactly, so alpha converges to the limit amplitude at rate h.  The
    phase is recovered from v by spectral inversion plus one scalar
    quadrature of the eikonal equation along a fixed anchor node;

  * small-time Taylor machinery: cascaded coefficients for phase and
    amplitude, partial-sum approximants, and the linear corrector system
    that captures the O(h) deviation of alpha from the limit amplitude.

Nonlinear products inside stepped right-hand sides are dealiased by the
two-thirds rule; evolving state and purely linear terms are never
filtered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CausticError, ConfigError, CurlError, SymmetrizerError
from .grid import Field, Grid, l2_norm
from .nonlinearity import (
    IDENTITY_WEIGHT,
    Nonlinearity,
    TimeWeight,
    coupled_f,
    coupled_gain,
)

DEFAULT_CAUSTIC_TOL = 1e3


# ---------------------------------------------------------------------------
# raw-array spectral helpers (hot paths work on ndarrays, not Fields)


def _grad(grid: Grid, arr: np.ndarray) -> list:
    hat = np.fft.fftn(arr)
    return [np.fft.ifftn(1j * xi * hat) for xi in grid.wavenumber_arrays()]


def _lap(grid: Grid, arr: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(-grid.wavenumber_square() * np.fft.fftn(arr))


def _dealias(grid: Grid, arr: np.ndarray) -> np.ndarray:
    hat = np.fft.fftn(arr)
    hat[~grid.dealias_mask()] = 0.0
    return np.fft.ifftn(hat)


def _hessian_max(grid: Grid, phi: np.ndarray) -> float:
    """max over nodes and index pairs of |d_j d_k phi|."""
    hat = np.fft.fftn(phi)
    xis = grid.wavenumber_arrays()
    worst = 0.0
    for j in range(grid.n):
        for k in range(j, grid.n):
            d2 = np.fft.ifftn(-xis[j] * xis[k] * hat).real
            worst = max(worst, float(np.abs(d2).max()))
    return worst


def hessian_max(phi: Field) -> float:
    return _hessian_max(phi.grid, phi.values.real)


def _rk4(state: tuple, t: float, dt: float, rhs) -> tuple:
    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * dt, tuple(y + 0.5 * dt * k for y, k in zip(state, k1)))
    k3 = rhs(t + 0.5 * dt, tuple(y + 0.5 * dt * k for y, k in zip(state, k2)))
    k4 = rhs(t + dt, tuple(y + dt * k for y, k in zip(state, k3)))
    return tuple(
        y + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        for y, a, b, c, d in zip(state, k1, k2, k3, k4)
    )


# ---------------------------------------------------------------------------
# limit system


@dataclass(frozen=True)
class LimitPair:
    """Phase/amplitude pair of the h = 0 system at one instant."""

    a: Field
    phi: Field
    t: float = 0.0


def limit_system_step(
    pair: LimitPair,
    dt: float,
    nl: Nonlinearity,
    weight: TimeWeight = IDENTITY_WEIGHT,
    caustic_tol: float = DEFAULT_CAUSTIC_TOL,
) -> LimitPair:
    """One RK4 step; aborts with a caustic flag when the phase steepens
    beyond tolerance."""
    grid = pair.a.grid

    def rhs(t, state):
        a, phi = state
        gphi = _grad(grid, phi)
        ga = _grad(grid, a)
        dphi = -0.5 * sum(g.real**2 for g in gphi) - coupled_f(
            weight, nl, t, np.abs(a) ** 2
        )
        da = -sum(gp.real * g for gp, g in zip(gphi, ga)) - 0.5 * a * _lap(grid, phi).real
        return (_dealias(grid, da), _dealias(grid, dphi).real)

    a_new, phi_new = _rk4((pair.a.values, pair.phi.values.real), pair.t, dt, rhs)
    t_new = pair.t + dt
    if not (np.all(np.isfinite(a_new)) and np.all(np.isfinite(phi_new))):
        raise CausticError(t_new, float("inf"), caustic_tol)
    hmax = _hessian_max(grid, phi_new)
    if hmax > caustic_tol:
        raise CausticError(t_new, hmax, caustic_tol)
    return LimitPair(Field(grid, a_new), Field(grid, phi_new.astype(np.complex128)), t_new)


@dataclass
class LimitTrajectory:
    """Limit-system history on a uniform time grid (every step kept)."""

    dt: float
    pairs: list

    @property
    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.pairs])

    @property
    def final(self) -> LimitPair:
        return self.pairs[-1]


def limit_trajectory(
    a0: Field,
    phi0: Optional[Field],
    nl: Nonlinearity,
    dt: float,
    n_steps: int,
    weight: TimeWeight = IDENTITY_WEIGHT,
    t0: float = 0.0,
    caustic_tol: float = DEFAULT_CAUSTIC_TOL,
) -> LimitTrajectory:
    grid = a0.grid
    if phi0 is None:
        phi0 = Field(grid, np.zeros(grid.shape, dtype=np.complex128))
    pair = LimitPair(a0.copy(), Field(grid, phi0.values.real.astype(np.complex128)), t0)
    pairs = [pair]
    for _ in range(n_steps):
        pair = limit_system_step(pair, dt, nl, weight, caustic_tol)
        pairs.append(pair)
    return LimitTrajectory(dt=dt, pairs=pairs)


def euler_variables(pair: LimitPair) -> tuple:
    """Hydrodynamic view: density |a|^2 and velocity grad phi."""
    grid = pair.a.grid
    rho = Field(grid, (np.abs(pair.a.values) ** 2).astype(np.complex128))
    vel = [Field(grid, g.real.astype(np.complex128)) for g in _grad(grid, pair.phi.values.real)]
    return rho, vel


# ---------------------------------------------------------------------------
# exact hyperbolic system


@dataclass(frozen=True)
class HyperbolicState:
    """State (alpha, v) of the exact system, plus the phase value at a
    fixed anchor node (integrated alongside so the full phase can be
    rebuilt from v without any free constant)."""

    alpha: Field
    v: tuple
    h: float
    t: float = 0.0
    anchor_index: tuple = ()
    anchor_phase: float = 0.0

    def __post_init__(self):
        if self.h < 0:
            raise ValueError(f"semiclassical parameter must be >= 0, got {self.h}")

    @property
    def grid(self) -> Grid:
        return self.alpha.grid

    # the real system evolves (alpha1, alpha2, v); alpha packs the first
    # two components into one complex field
    @property
    def alpha1(self) -> Field:
        return Field(self.grid, self.alpha.values.real.astype(np.complex128))

    @property
    def alpha2(self) -> Field:
        return Field(self.grid, self.alpha.values.imag.astype(np.complex128))


def init_hyperbolic(a0: Field, phi0: Optional[Field], h: float) -> HyperbolicState:
    """Anchor at the amplitude peak; v = grad phi0 computed spectrally."""
    grid = a0.grid
    if phi0 is None:
        phi0 = Field(grid, np.zeros(grid.shape, dtype=np.complex128))
    anchor = np.unravel_index(int(np.argmax(np.abs(a0.values))), grid.shape)
    vel = tuple(Field(grid, g.real.astype(np.complex128)) for g in _grad(grid, phi0.values.real))
    return HyperbolicState(
        alpha=a0.copy(),
        v=vel,
        h=h,
        t=0.0,
        anchor_index=anchor,
        anchor_phase=float(phi0.values[anchor].real),
    )


def grenier_step(
    state: HyperbolicState,
    dt: float,
    nl: Nonlinearity,
    weight: TimeWeight = IDENTITY_WEIGHT,
) -> HyperbolicState:
    """One RK4 step of the exact system; checks symmetrizability
    (f' > 0 on the whole grid) on arrival."""
    grid = state.grid
    n = grid.n
    anchor = state.anchor_index

    def rhs(t, arrays):
        alpha = arrays[0]
        vel = arrays[1 : 1 + n]
        galpha = _grad(grid, alpha)
        gv = [_grad(grid, vj) for vj in vel]
        divv = sum(gv[j][j].real for j in range(n))

        d_alpha = -sum(vel[j] * galpha[j] for j in range(n)) - 0.5 * alpha * divv
        d_alpha = _dealias(grid, d_alpha)
        if state.h > 0:
            d_alpha = d_alpha + 0.5j * state.h * _lap(grid, alpha)

        y = np.abs(alpha) ** 2
        gain = coupled_gain(weight, nl, t, y)
        d_v = []
        for j in range(n):
            adv = -sum(vel[k] * gv[j][k].real for k in range(n))
            press = -gain * (alpha.real * galpha[j].real + alpha.imag * galpha[j].imag)
            d_v.append(_dealias(grid, adv + press).real)

        # eikonal quadrature at the anchor node (fixed in space)
        speed2 = sum(vel[j][anchor] ** 2 for j in range(n))
        d_anchor = -0.5 * speed2 - coupled_f(weight, nl, t, y[anchor])
        return (d_alpha, *d_v, np.asarray(float(d_anchor.real)))

    arrays = (
        state.alpha.values,
        *[vj.values.real for vj in state.v],
        np.asarray(state.anchor_phase),
    )
    out = _rk4(arrays, state.t, dt, rhs)
    alpha_new = out[0]
    v_new = tuple(Field(grid, vj.astype(np.complex128)) for vj in out[1 : 1 + n])
    t_new = state.t + dt

    scale = weight.argument_scale(t_new)
    fp_min = float(np.min(nl.f_prime(scale * np.abs(alpha_new) ** 2)))
    if not np.isfinite(fp_min) or fp_min <= 0:
        raise SymmetrizerError(
            f"f' lost positivity at t={t_new:.6g} (min {fp_min:.3e}); "
            "the hyperbolic energy is no longer definite"
        )

    return HyperbolicState(
        alpha=Field(grid, alpha_new),
        v=v_new,
        h=state.h,
        t=t_new,
        anchor_index=state.anchor_index,
        anchor_phase=float(out[-1]),
    )


def _multi_indices(n: int, s: int) -> list:
    if n == 1:
        return [(b,) for b in range(s + 1)]
    if n == 2:
        return [(b1, b2) for b1 in range(s + 1) for b2 in range(s + 1 - b1)]
    return [
        (b1, b2, b3)
        for b1 in range(s + 1)
        for b2 in range(s + 1 - b1)
        for b3 in range(s + 1 - b1 - b2)
    ]


def grenier_energy(
    state: HyperbolicState,
    s: int,
    nl: Nonlinearity,
    weight: TimeWeight = IDENTITY_WEIGHT,
) -> float:
    """Symmetrized H^s energy: sum over |beta| <= s of
    (S d^beta u, d^beta u) with unit weight on the amplitude block and
    time-scaled 1/(4 f') on the velocity block."""
    grid = state.grid
    scale = weight.argument_scale(state.t)
    fp = nl.f_prime(scale * np.abs(state.alpha.values) ** 2)
    if np.min(fp) <= 0:
        raise SymmetrizerError("f' <= 0 somewhere: energy weight not positive")
    s_v = weight.symmetrizer_scale(state.t) / (4.0 * fp)

    xis = grid.wavenumber_arrays()
    hat_alpha = np.fft.fftn(state.alpha.values)
    hat_v = [np.fft.fftn(vj.values.real) for vj in state.v]
    dV = grid.cell_volume
    total = 0.0
    for beta in _multi_indices(grid.n, s):
        mult = np.ones(grid.shape, dtype=np.complex128)
        for j, b in enumerate(beta):
            if b:
                mult = mult * (1j * xis[j]) ** b
        d_alpha = np.fft.ifftn(mult * hat_alpha)
        total += float(np.sum(np.abs(d_alpha) ** 2) * dV)
        for hv in hat_v:
            d_v = np.fft.ifftn(mult * hv).real
            total += float(np.sum(s_v * d_v**2) * dV)
    return total


def phase_from_velocity(
    v: tuple,
    phi0: Optional[Field],
    anchor: tuple,
    curl_tol: float = 1e-8,
) -> Field:
    """Invert grad phi = v on the torus.

    The mean-zero part comes from solving the Poisson problem
    Lap phi = div v spectrally; the additive constant is pinned at the
    anchor node, whose phase value the caller has integrated in time
    (for data at t = 0 it is just phi0 there).  anchor = (index tuple,
    value); with value None, phi0 supplies it.
    """
    grid = v[0].grid
    n = grid.n
    hats = [np.fft.fftn(vj.values.real) for vj in v]
    xis = grid.wavenumber_arrays()

    if n > 1:
        vscale = max(max(l2_norm(vj) for vj in v), 1.0)
        for j in range(n):
            for k in range(j + 1, n):
                curl = np.fft.ifftn(1j * xis[j] * hats[k] - 1j * xis[k] * hats[j]).real
                norm = float(np.sqrt(np.sum(curl**2) * grid.cell_volume))
                if norm > curl_tol * vscale:
                    raise CurlError(
                        f"velocity field has curl of size {norm:.3e} "
                        f"(tolerance {curl_tol:.1e} x {vscale:.3g}); no phase exists"
                    )

    # -|xi|^2 phi_hat = div_hat, zero mean: least-squares inverse gradient
    xi2 = grid.wavenumber_square()
    div_hat = sum(1j * xis[j] * hats[j] for j in range(n))
    phi_hat = np.where(xi2 > 0, -div_hat / np.where(xi2 > 0, xi2, 1.0), 0.0)
    phi = np.fft.ifftn(phi_hat).real

    index, value = anchor
    if value is None:
        if phi0 is None:
            raise ValueError("anchor value missing and no initial phase given")
        value = float(phi0.values[tuple(index)].real)
    phi = phi + (value - phi[tuple(index)])
    return Field(grid, phi.astype(np.complex128))


def grenier_phase(state: HyperbolicState, curl_tol: float = 1e-8) -> Field:
    return phase_from_velocity(
        state.v, None, (state.anchor_index, state.anchor_phase), curl_tol
    )


def grenier_reconstruct(state: HyperbolicState, curl_tol: float = 1e-8) -> Field:
    """alpha exp(i phi / h) with the phase rebuilt from the velocity."""
    if state.h <= 0:
        raise ValueError("reconstruction needs h > 0")
    phi = grenier_phase(state, curl_tol)
    return Field(state.grid, state.alpha.values * np.exp(1j * phi.values.real / state.h))


# ---------------------------------------------------------------------------
# small-time Taylor cascades


@dataclass(frozen=True)
class TaylorCascade:
    """Coefficients of the small-time expansions, with their exponent
    ladders.  Standard variant:

        phi ~ sum_j t^j phi_j,  a ~ sum_j t^j a_j          (j = 0..J)

    Weak variant (n >= 2, flat initial phase, f expanded at 0):

        phi ~ sum_{j>=1} t^(n j - 1) phi_j,  a ~ sum_j t^(n j) a_j

    phis[0] of the weak variant is a placeholder zero field.
    """

    variant: str
    J: int
    phis: tuple
    amps: tuple
    phase_powers: tuple
    amp_powers: tuple

    def phase_partial(self, t: float, K: Optional[int] = None) -> np.ndarray:
        K = self.J if K is None else K
        grid = self.amps[0].grid
        acc = np.zeros(grid.shape)
        for j in range(min(K, self.J) + 1):
            acc = acc + t ** self.phase_powers[j] * self.phis[j].values.real
        return acc

    def amplitude_partial(self, t: float, K: Optional[int] = None) -> np.ndarray:
        K = self.J if K is None else K
        grid = self.amps[0].grid
        acc = np.zeros(grid.shape, dtype=np.complex128)
        for j in range(min(K, self.J) + 1):
            acc = acc + t ** self.amp_powers[j] * self.amps[j].values
        return acc


def _series_mul(A: list, B: list, J: int) -> list:
    """Cauchy product of coefficient lists, truncated at order J."""
    shape = np.broadcast_shapes(np.shape(A[0]), np.shape(B[0]))
    dtype = np.result_type(A[0], B[0])
    out = []
    for j in range(J + 1):
        acc = np.zeros(shape, dtype=dtype)
        for l in range(min(j, len(A) - 1) + 1):
            m = j - l
            if m < len(B):
                acc = acc + A[l] * B[m]
        out.append(acc)
    return out


def taylor_cascade(
    a0: Field,
    phi0: Optional[Field],
    J: int,
    nl: Nonlinearity,
    variant: str = "standard",
) -> TaylorCascade:
    """Recursively build the first J + 1 expansion coefficients.

    The nonlinear term is composed as a truncated power series, which
    needs f differentiable up to order J at the expansion point (the
    initial intensity for the standard variant, zero for the weak one).
    """
    if not 0 <= J <= 8:
        raise ConfigError(f"cascade order must lie in [0, 8], got {J}")
    if nl.max_order() < J:
        raise ConfigError(
            f"nonlinearity provides derivatives to order {nl.max_order()}, cascade needs {J}"
        )
    grid = a0.grid
    if variant == "standard":
        return _cascade_standard(grid, a0, phi0, J, nl)
    if variant == "weak":
        if grid.n < 2:
            raise ConfigError("weak cascade requires dimension n >= 2")
        if phi0 is not None and float(np.abs(phi0.values).max()) != 0.0:
            raise ConfigError("weak cascade requires a flat initial phase")
        return _cascade_weak(grid, a0, J, nl)
    raise ConfigError(f"unknown cascade variant {variant!r}")


def _cascade_standard(grid, a0, phi0, J, nl) -> TaylorCascade:
    phis = [np.zeros(grid.shape) if phi0 is None else phi0.values.real.copy()]
    amps = [a0.values.copy()]
    # premultiplied composition coefficients f^(m)(w0)/m! as fields
    w0 = np.abs(a0.values) ** 2
    comp = [nl.derivative(w0, m) / math.factorial(m) for m in range(J + 1)]

    for j in range(J):
        # w_k = sum_{l+m=k} a_l conj(a_m), orders 0..j known
        w = _series_mul(amps, [np.conj(a) for a in amps], j)
        w = [wk.real for wk in w]
        # F_j: order-j coefficient of f(w(t)) via powers of (w - w0);
        # j = 0 is f(w0) itself since the remainder series starts at t^1
        rem = [np.zeros(grid.shape)] + w[1:]
        F = comp[0].copy() if j == 0 else np.zeros(grid.shape)
        power = rem
        for m in range(1, j + 1):
            F = F + comp[m] * power[j]
            if m < j:
                power = _series_mul(power, rem, j)

        gphis = [_grad(grid, p) for p in phis]
        gamps = [_grad(grid, a) for a in amps]
        laps = [_lap(grid, p).real for p in phis]

        # (|grad phi|^2)_j
        P = np.zeros(grid.shape)
        for l in range(j + 1):
            m = j - l
            P = P + sum(gphis[l][d].real * gphis[m][d].real for d in range(grid.n))
        phis.append(-(0.5 * P + F) / (j + 1))

        # transport: (grad phi . grad a)_j + 1/2 (a Lap phi)_j, phi orders <= j
        Tr = np.zeros(grid.shape, dtype=np.complex128)
        for l in range(j + 1):
            m = j - l
            Tr = Tr + sum(gphis[l][d].real * gamps[m][d] for d in range(grid.n))
            Tr = Tr + 0.5 * amps[m] * laps[l]
        amps.append(-Tr / (j + 1))

    return TaylorCascade(
        variant="standard",
        J=J,
        phis=tuple(Field(grid, p.astype(np.complex128)) for p in phis),
        amps=tuple(Field(grid, a) for a in amps),
        phase_powers=tuple(range(J + 1)),
        amp_powers=tuple(range(J + 1)),
    )


def _cascade_weak(grid, a0, J, nl) -> TaylorCascade:
    n = grid.n
    amps = [a0.values.copy()]
    phis = [np.zeros(grid.shape)]  # j = 0 placeholder; ladder starts at j = 1
    # scalar Taylor coefficients of f at 0 (f(0) = 0)
    d = [0.0] + [float(nl.derivative(0.0, m)) / math.factorial(m) for m in range(1, J + 1)]

    for j in range(1, J + 1):
        # S(y) = sum_{k>=1} y^k omega_{k-1}, omega_k = sum_{l+m=k} a_l conj(a_m)
        omega = _series_mul(amps, [np.conj(a) for a in amps], j - 1)
        omega = [ok.real for ok in omega]
        S = [np.zeros(grid.shape)] + omega  # length j + 1, orders 0..j in y

        C = np.zeros(grid.shape)
        power = S
        for m in range(1, j + 1):
            if d[m] != 0.0:
                C = C + d[m] * power[j]
            if m < j:
                power = _series_mul(power, S, j)

        gphis = [_grad(grid, p) for p in phis]
        Q = np.zeros(grid.shape)
        for l in range(1, j):
            m = j - l
            Q = Q + sum(gphis[l][dd].real * gphis[m][dd].real for dd in range(n))
        phis.append(-(0.5 * Q + C) / (n * j - 1))

        gphis.append(_grad(grid, phis[j]))
        gamps = [_grad(grid, a) for a in amps]
        laps = [_lap(grid, p).real for p in phis]
        Tr = np.zeros(grid.shape, dtype=np.complex128)
        for l in range(1, j + 1):
            m = j - l
            Tr = Tr + sum(gphis[l][dd].real * gamps[m][dd] for dd in range(n))
            Tr = Tr + 0.5 * amps[m] * laps[l]
        amps.append(-Tr / (n * j))

    return TaylorCascade(
        variant="weak",
        J=J,
        phis=tuple(Field(grid, p.astype(np.complex128)) for p in phis),
        amps=tuple(Field(grid, a) for a in amps),
        phase_powers=tuple([0] + [n * j - 1 for j in range(1, J + 1)]),
        amp_powers=tuple(n * j for j in range(J + 1)),
    )


def phase_approximant(
    cascade: TaylorCascade, a0: Field, t: float, h: float, K: Optional[int] = None
) -> Field:
    """Frozen-amplitude approximant a0 exp(i (partial phase sum) / h)."""
    phase = cascade.phase_partial(t, K)
    return Field(a0.grid, a0.values * np.exp(1j * phase / h))


# ---------------------------------------------------------------------------
# corrector system


@dataclass(frozen=True)
class CorrectorPair:
    """First-order correction (a1c, phi1c) along a limit trajectory; the
    leading description of the solution is
    a exp(i phi1c) exp(i phi / h) + O(h^2)."""

    a1c: Field
    phi1c: Field
    t: float


def corrector_evolve(
    base: LimitTrajectory,
    a1: Optional[Field],
    dt: float,
    T: float,
    nl: Nonlinearity,
) -> list:
    """Integrate the linear corrector system along a stored base
    trajectory.

    The base must be sampled exactly at dt/2 so RK4 stages read stored
    states; no interpolation is done, mismatched grids are an error.

        d_t phi1 = -grad phi . grad phi1 - 2 Re(conj(a) a1) f'(|a|^2)
        d_t a1   = -grad phi . grad a1 - grad phi1 . grad a
                   - (a1 Lap phi + a Lap phi1)/2 + (i/2) Lap a

    with phi1(0) = 0 and a1(0) given (zero for unperturbed data).
    """
    grid = base.pairs[0].a.grid
    if abs(base.dt - 0.5 * dt) > 1e-12 * max(dt, 1.0):
        raise ConfigError(
            f"base trajectory spacing {base.dt} must equal half the corrector step {dt}"
        )
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-8 * max(1.0, T):
        raise ConfigError(f"horizon T={T} is not an integer number of steps of dt={dt}")
    if len(base.pairs) < 2 * n_steps + 1:
        raise ConfigError(
            f"base trajectory has {len(base.pairs)} states, need {2 * n_steps + 1}"
        )
    if a1 is not None and a1.grid != grid:
        raise ConfigError("corrector data lives on a different grid than the base")

    a1_arr = np.zeros(grid.shape, dtype=np.complex128) if a1 is None else a1.values.copy()
    p1_arr = np.zeros(grid.shape)
    out = [CorrectorPair(Field(grid, a1_arr.copy()),
                         Field(grid, p1_arr.astype(np.complex128)), base.pairs[0].t)]

    def make_rhs(pair: LimitPair):
        a = pair.a.values
        phi = pair.phi.values.real
        gphi = [g.real for g in _grad(grid, phi)]
        ga = _grad(grid, a)
        lap_phi = _lap(grid, phi).real
        lap_a = _lap(grid, a)
        fp = nl.f_prime(np.abs(a) ** 2)

        def rhs(_t, state):
            a1c, p1c = state
            gp1 = [g.real for g in _grad(grid, p1c)]
            ga1 = _grad(grid, a1c)
            dp1 = -sum(gphi[d] * gp1[d] for d in range(grid.n)) - 2.0 * fp * (
                a.real * a1c.real + a.imag * a1c.imag
            )
            da1 = (
                -sum(gphi[d] * ga1[d] for d in range(grid.n))
                - sum(gp1[d] * ga[d] for d in range(grid.n))
                - 0.5 * a1c * lap_phi
                - 0.5 * a * _lap(grid, p1c).real
            )
            return (_dealias(grid, da1) + 0.5j * lap_a, _dealias(grid, dp1).real)

        return rhs

    rhs_carry = None  # the hi stage of step k is the lo stage of step k+1
    for k in range(n_steps):
        p_lo = base.pairs[2 * k]
        p_mid = base.pairs[2 * k + 1]
        p_hi = base.pairs[2 * k + 2]
        rhs_lo = rhs_carry if rhs_carry is not None else make_rhs(p_lo)
        rhs_mid = make_rhs(p_mid)
        rhs_hi = make_rhs(p_hi)
        rhs_carry = rhs_hi

        state = (a1_arr, p1_arr)
        k1 = rhs_lo(0.0, state)
        k2 = rhs_mid(0.0, tuple(y + 0.5 * dt * g for y, g in zip(state, k1)))
        k3 = rhs_mid(0.0, tuple(y + 0.5 * dt * g for y, g in zip(state, k2)))
        k4 = rhs_hi(0.0, tuple(y + dt * g for y, g in zip(state, k3)))
        a1_arr, p1_arr = tuple(
            y + (dt / 6.0) * (a + 2 * b + 2 * c + e)
            for y, a, b, c, e in zip(state, k1, k2, k3, k4)
        )
        out.append(
            CorrectorPair(
                Field(grid, a1_arr.copy()),
                Field(grid, p1_arr.astype(np.complex128)),
                p_hi.t,
            )
        )
    return out
