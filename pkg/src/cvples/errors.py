"""Exception hierarchy for cvples."""


class CvplesError(Exception):
    pass


# numerics
class AxisTooSmall(CvplesError, ValueError):
    pass


class ZeroPivot(CvplesError, ArithmeticError):
    pass


class BadAlpha(CvplesError, ValueError):
    pass


class DomainError(CvplesError, ValueError):
    pass


class AnisotropicGridUnsupported(CvplesError, ValueError):
    pass


# solver state
class NonPositiveDensity(CvplesError, ArithmeticError):
    pass


class NonPositivePressure(CvplesError, ArithmeticError):
    pass


class SolverBlowUp(CvplesError, RuntimeError):
    def __init__(self, reason, t=None, step=None):
        self.reason = reason
        self.t = t
        self.step = step
        where = "" if t is None else f" at t={t:.6g}"
        super().__init__(f"solver blow-up{where}: {reason}")


# cases / diagnostics
class DomainMismatch(CvplesError, ValueError):
    pass


class QuadratureNotConverged(CvplesError, RuntimeError):
    pass


class TooFewSamples(CvplesError, ValueError):
    pass


class NonCubicGrid(CvplesError, ValueError):
    pass


class DegenerateFit(CvplesError, ValueError):
    pass


# configuration
class ConfigError(CvplesError, ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class UnknownKey(ConfigError):
    def __init__(self, key):
        super().__init__(key, "unknown configuration key")


class BadValue(ConfigError):
    pass


class MissingRequired(ConfigError):
    def __init__(self, key):
        super().__init__(key, "required key is missing")


# snapshots
class SnapshotError(CvplesError, IOError):
    pass


class BadMagic(SnapshotError):
    pass


class VersionMismatch(SnapshotError):
    pass


class DimensionMismatch(SnapshotError):
    pass


class TruncatedFile(SnapshotError):
    pass
