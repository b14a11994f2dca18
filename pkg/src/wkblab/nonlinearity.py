"""Nonlinearity catalog, external potentials, and time weights.

The equations all couple through a local term W(t) * f(w(t) |u|^2) u.
The catalog below fixes f; the TimeWeight fixes (W, w).  The plain
equation has W = w = 1; the harmonic and conformal changes of frame
trade the potential for nontrivial time weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import Field, Grid


def _check_domain(y):
    if np.any(np.asarray(y) < 0):
        raise ValueError("nonlinearity argument is a squared modulus; negative values are a bug")


class Nonlinearity:
    """Base class: smooth f with f(0) = 0, acting on y = |u|^2 >= 0."""

    def f(self, y):
        return self.derivative(y, 0)

    def f_prime(self, y):
        return self.derivative(y, 1)

    def derivative(self, y, order: int):
        raise NotImplementedError

    def max_order(self) -> int:
        """Highest derivative order available (for series expansions)."""
        raise NotImplementedError


class Cubic(Nonlinearity):
    """f(y) = y, the defocusing cubic coupling."""

    def derivative(self, y, order: int):
        _check_domain(y)
        y = np.asarray(y, dtype=float)
        if order == 0:
            return y
        if order == 1:
            return np.ones_like(y)
        return np.zeros_like(y)

    def max_order(self) -> int:
        return 64  # polynomial: everything beyond degree 1 is zero

    def __repr__(self):
        return "Cubic()"


class Power(Nonlinearity):
    """f(y) = omega * y^sigma with omega != 0 and integer sigma >= 1."""

    def __init__(self, omega: float, sigma: int):
        if omega == 0:
            raise ValueError("coupling constant must be nonzero")
        if not (isinstance(sigma, (int, np.integer)) and sigma >= 1):
            raise ValueError(f"power must be a positive integer, got {sigma}")
        self.omega = float(omega)
        self.sigma = int(sigma)

    def derivative(self, y, order: int):
        _check_domain(y)
        y = np.asarray(y, dtype=float)
        if order > self.sigma:
            return np.zeros_like(y)
        coeff = self.omega * math.perm(self.sigma, order)
        return coeff * y ** (self.sigma - order)

    def max_order(self) -> int:
        return 64

    def __repr__(self):
        return f"Power(omega={self.omega}, sigma={self.sigma})"


class ScaledCubic(Nonlinearity):
    """Cubic coupling evaluated on rescaled intensity: f(y) = eps^k * y.

    Models data of size O(eps) fed through the cubic term after the
    amplitude has been normalized out.
    """

    def __init__(self, k: float, eps: float):
        if not 0 < eps:
            raise ValueError(f"scale must be positive, got {eps}")
        self.k = float(k)
        self.eps = float(eps)

    def derivative(self, y, order: int):
        _check_domain(y)
        y = np.asarray(y, dtype=float)
        factor = self.eps**self.k
        if order == 0:
            return factor * y
        if order == 1:
            return factor * np.ones_like(y)
        return np.zeros_like(y)

    def max_order(self) -> int:
        return 64

    def __repr__(self):
        return f"ScaledCubic(k={self.k}, eps={self.eps})"


class SmoothDefocusing(Nonlinearity):
    """User-supplied smooth f with f(0) = 0 and f' > 0.

    Higher derivatives are optional; series expansions raise when asked
    beyond what was provided.
    """

    def __init__(
        self,
        func: Callable,
        prime: Callable,
        higher: Optional[Callable] = None,
        orders: int = 1,
    ):
        self.func = func
        self.prime = prime
        self.higher = higher
        self.orders = int(orders) if higher is not None else 1

    def derivative(self, y, order: int):
        _check_domain(y)
        y = np.asarray(y, dtype=float)
        if order == 0:
            return np.asarray(self.func(y), dtype=float)
        if order == 1:
            return np.asarray(self.prime(y), dtype=float)
        if self.higher is None or order > self.orders:
            raise ValueError(
                f"derivative of order {order} not available for this nonlinearity"
            )
        return np.asarray(self.higher(y, order), dtype=float)

    def max_order(self) -> int:
        return self.orders

    def __repr__(self):
        return f"SmoothDefocusing(orders={self.orders})"


class NoNonlinearity(Nonlinearity):
    """f = 0: linear equations (potential-only runs)."""

    def derivative(self, y, order: int):
        _check_domain(y)
        return np.zeros_like(np.asarray(y, dtype=float))

    def max_order(self) -> int:
        return 64

    def __repr__(self):
        return "NoNonlinearity()"


# ---------------------------------------------------------------------------
# potentials


class Potential:
    def values(self, grid: Grid) -> np.ndarray:
        raise NotImplementedError


class NoPotential(Potential):
    def values(self, grid: Grid) -> np.ndarray:
        return np.zeros(grid.shape)

    def __repr__(self):
        return "NoPotential()"


class HarmonicPotential(Potential):
    """V(x) = omega_trap^2 |x|^2 / 2, the isotropic trap."""

    def __init__(self, omega_trap: float):
        if not omega_trap > 0:
            raise ValueError(f"trap frequency must be positive, got {omega_trap}")
        self.omega_trap = float(omega_trap)

    def values(self, grid: Grid) -> np.ndarray:
        return 0.5 * self.omega_trap**2 * grid.radius_square()

    def __repr__(self):
        return f"HarmonicPotential(omega_trap={self.omega_trap})"


class SampledPotential(Potential):
    """Potential given by its node values (bounded, smooth profiles)."""

    def __init__(self, field: Field):
        if np.any(np.abs(field.values.imag) > 0):
            raise ValueError("potential must be real")
        self.field = field

    def values(self, grid: Grid) -> np.ndarray:
        if grid != self.field.grid:
            raise ValueError("potential sampled on a different grid")
        return self.field.values.real

    def __repr__(self):
        return f"SampledPotential(grid={self.field.grid})"


# ---------------------------------------------------------------------------
# time weights


@dataclass(frozen=True)
class TimeWeight:
    """Pair (W, w) in the coupling W(t) f(w(t) |u|^2).

    Every supported weight has the form W = theta(t)^-2, w = theta(t)^n
    for a clock function theta:

    kind "identity":   theta = 1                      (so W = w = 1)
    kind "harmonic":   theta = sqrt(1 + t^2)          (trap removed by lens)
    kind "weak":       theta = t, t > 0               (conformal frame)
    kind "weak_trap":  theta = sqrt(t0^2 + (t-t0)^2)  (trap + conformal)

    symmetrizer_scale = theta^(2-n) is the time factor in the
    hyperbolic energy weight for the velocity block, chosen so the
    weighted system stays symmetrizable uniformly in time.
    """

    kind: str = "identity"
    n: int = 0
    t0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("identity", "harmonic", "weak", "weak_trap"):
            raise ValueError(f"unknown time weight kind {self.kind!r}")
        if self.kind != "identity" and self.n not in (1, 2, 3):
            raise ValueError(f"time weight {self.kind!r} needs a dimension, got n={self.n}")
        if self.kind == "weak_trap" and not self.t0 > 0:
            raise ValueError(f"weak_trap weight needs a positive start time, got {self.t0}")

    def theta(self, t: float) -> float:
        if self.kind == "identity":
            return 1.0
        if self.kind == "harmonic":
            return math.sqrt(1.0 + t * t)
        if self.kind == "weak_trap":
            return math.sqrt(self.t0**2 + (t - self.t0) ** 2)
        if t <= 0:
            raise ValueError(f"weak time weight is singular at t={t}; start the run at t > 0")
        return float(t)

    def coupling(self, t: float) -> float:
        return self.theta(t) ** -2.0

    def argument_scale(self, t: float) -> float:
        return self.theta(t) ** float(self.n)

    def symmetrizer_scale(self, t: float) -> float:
        return self.theta(t) ** (2.0 - self.n)


IDENTITY_WEIGHT = TimeWeight("identity")


def harmonic_weight(n: int) -> TimeWeight:
    return TimeWeight("harmonic", n)


def weak_weight(n: int) -> TimeWeight:
    return TimeWeight("weak", n)


def weak_trap_weight(n: int, t0: float) -> TimeWeight:
    return TimeWeight("weak_trap", n, t0)


def coupled_f(weight: TimeWeight, nl: Nonlinearity, t: float, y):
    """W(t) f(w(t) y).  The weak kind has a removable limit at t = 0
    (that is where f(0) = 0 and n >= 2 earn their keep): the value is
    f'(0) y in dimension two and zero above."""
    if weight.kind == "weak" and t == 0.0:
        y = np.asarray(y, dtype=float)
        if weight.n == 2:
            return float(nl.derivative(0.0, 1)) * y
        return np.zeros_like(y)
    return weight.coupling(t) * nl.f(weight.argument_scale(t) * y)


def coupled_gain(weight: TimeWeight, nl: Nonlinearity, t: float, y):
    """2 W(t) w(t) f'(w(t) y), the gain multiplying Re(conj(a) grad a)
    in the velocity equation; same removable limit at t = 0."""
    if weight.kind == "weak" and t == 0.0:
        y = np.asarray(y, dtype=float)
        if weight.n == 2:
            return 2.0 * float(nl.derivative(0.0, 1)) * np.ones_like(y)
        return np.zeros_like(y)
    scale = weight.argument_scale(t)
    return 2.0 * weight.coupling(t) * scale * nl.f_prime(scale * y)
