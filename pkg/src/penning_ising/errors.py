"""Exception hierarchy. ``exit_code`` maps each family onto the CLI exit status."""


class PenningIsingError(Exception):
    exit_code = 5


class ConfigError(PenningIsingError, ValueError):
    exit_code = 2


class PhysicsError(PenningIsingError):
    """The requested physical configuration is invalid or outside a formula's domain."""

    exit_code = 3


class RadialConfinementError(PhysicsError):
    pass


class CoincidentIonsError(PhysicsError):
    pass


class UnstablePlanarCrystalError(PhysicsError):
    pass


class ResonanceError(PhysicsError):
    pass


class DegenerateFitError(PhysicsError):
    pass


class UnsupportedPreparationError(PhysicsError):
    pass


class SizeCapError(PhysicsError):
    pass


class NormDriftError(PenningIsingError):
    pass


class NonConvergenceError(PenningIsingError):
    exit_code = 4
