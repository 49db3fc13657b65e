"""Exception hierarchy shared across the package."""


class FunnelSimError(Exception):
    """Base class for all funnelsim errors."""


class InvalidRotationError(FunnelSimError):
    """Matrix is not a proper rotation (orthonormality or determinant off)."""


class AxisSingularityError(FunnelSimError):
    """Barrier gradient requested within the singular cone around the
    approach axis (lateral radius below the configured threshold)."""


class QPNonConvergenceError(FunnelSimError):
    """Iterative QP reference solver exhausted its iteration budget."""


class BehindCameraError(FunnelSimError):
    """Point has non-positive depth in the camera frame."""


class DegenerateConfigurationError(FunnelSimError):
    """Pose estimation problem is rank deficient (too few or collinear points)."""


class PnPNonConvergenceError(FunnelSimError):
    """Pose refinement failed to converge within its iteration budget."""


class PlantInstabilityError(FunnelSimError):
    """Simulated plant diverged (velocity above the configured limit);
    usually a sign of unstable velocity-loop gains for the chosen dt."""


class ConfigError(FunnelSimError):
    """Scenario configuration is missing fields or violates invariants."""
