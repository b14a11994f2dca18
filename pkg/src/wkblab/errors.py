"""Exception hierarchy shared across the package.

Configuration problems and numerical failures are kept apart so the
command line tool can map them to distinct exit codes.
"""


class WkblabError(Exception):
    """Base class for all package errors."""


class ConfigError(WkblabError):
    """Invalid or incomplete run configuration."""


class NumericalError(WkblabError):
    """A run left its validity regime; results would be garbage."""


class MassDriftError(NumericalError):
    """Conserved L2 mass drifted beyond the configured tolerance."""


class BlowupError(NumericalError):
    """Non-finite values appeared in an evolving field."""


class CausticError(NumericalError):
    """Phase curvature exceeded the caustic tolerance; the smooth
    geometric-optics description has broken down."""

    def __init__(self, t: float, hessian_max: float, tol: float):
        self.t = t
        self.hessian_max = hessian_max
        self.tol = tol
        super().__init__(
            f"caustic flag at t={t:.6g}: max |phase Hessian| = {hessian_max:.3e} "
            f"exceeds tolerance {tol:.3e}"
        )


class SymmetrizerError(NumericalError):
    """The symmetric-hyperbolic energy weight lost positivity."""


class BoundaryDecayError(NumericalError):
    """Field does not decay at the box boundary; periodic wrap-around
    would contaminate the run."""


class CurlError(NumericalError):
    """Velocity field is not curl-free to tolerance; no single-valued
    phase exists."""
