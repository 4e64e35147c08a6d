"""Exception hierarchy shared by all modules."""


class SteinBiasError(Exception):
    """Base class for every error raised by this package."""


class ParameterOutOfRange(SteinBiasError, ValueError):
    def __init__(self, family, name, value, allowed):
        self.family = family
        self.name = name
        self.value = value
        super().__init__(f"{family}: parameter {name}={value!r} outside {allowed}")


class KindUnsupported(SteinBiasError, ValueError):
    pass


class MomentInfinite(SteinBiasError, ValueError):
    pass


class DegreeTooLarge(SteinBiasError, ValueError):
    pass


class SingularMomentMatrix(SteinBiasError, ValueError):
    pass


class TruncationInsufficient(SteinBiasError, ValueError):
    pass


class OrthogonalityViolated(SteinBiasError, ValueError):
    def __init__(self, k, residual):
        self.k = k
        self.residual = residual
        super().__init__(f"E[X^{k} P(X)] = {residual:.3e} should vanish")


class NonPositiveAlpha(SteinBiasError, ValueError):
    pass


class SignStructureMismatch(SteinBiasError, ValueError):
    pass


class YSamplerFailure(SteinBiasError, RuntimeError):
    pass


class NegativeMass(SteinBiasError, ValueError):
    pass


class SingularSystem(SteinBiasError, ValueError):
    pass


class PreconditionViolated(SteinBiasError, ValueError):
    pass


class SizeOverflow(SteinBiasError, ValueError):
    pass


class FamilyNotClosed(SteinBiasError, ValueError):
    pass


class MembershipViolated(SteinBiasError, ValueError):
    pass


class OrderViolated(SteinBiasError, ValueError):
    pass


class NonFiniteValue(SteinBiasError, ValueError):
    pass


class OperatorParamMismatch(SteinBiasError, ValueError):
    pass


class ConfigInvalid(SteinBiasError, ValueError):
    pass
