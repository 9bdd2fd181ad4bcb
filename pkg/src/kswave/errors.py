"""Exception hierarchy shared across the solver."""


class KswaveError(Exception):
    """Base class for all solver errors."""


class DomainError(KswaveError):
    """Argument outside the admissible domain (flux inverse at |y| >= c, etc.)."""


class DegenerateError(KswaveError):
    """Zero eigenvalue: equilibrium structure degenerate (sigma at sigma_star)."""


class StepSizeUnderflow(KswaveError):
    """Adaptive controller drove the step size below the representable floor."""


class DenominatorVanished(KswaveError):
    """Graph-system denominator lambda - W - gamma v^2 fell below denom_eps."""


class SignChange(KswaveError):
    """v' changed sign where a single-signed parametrization was required."""


class SeedEscaped(KswaveError):
    """Manifold seed left the expected region for both eigenvector signs."""


class Inconclusive(KswaveError):
    """Trajectory hit the span cap without producing a classifiable signature."""


class NoDichotomy(KswaveError):
    """Bisection bracket ends classify identically after full expansion."""


class AnchorMismatch(KswaveError):
    """u0/S0 disagrees with w at the anchor point."""


class InsufficientResolution(KswaveError):
    """Too few samples in the fitting window for a slope estimate."""


class RegimeViolation(KswaveError):
    """Saturated-front precondition failed before or during computation."""
