"""Exception hierarchy shared by all modules."""


class ParaHyperError(Exception):
    """Base class for errors raised by this package."""


class ExpressionSyntaxError(ParaHyperError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ParaHyperError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(ParaHyperError):
    def __init__(self, name: str, got: int, offset: int):
        super().__init__(f"{name}() takes exactly one argument, got {got} at offset {offset}")
        self.name = name
        self.offset = offset


class DomainError(ParaHyperError, ArithmeticError):
    """Evaluation left the domain of ln, sqrt or division."""

    def __init__(self, message: str, subexpression=None):
        if subexpression is not None:
            message = f"{message} in {subexpression}"
        super().__init__(message)
        self.subexpression = subexpression


class DegenerateFormError(ParaHyperError):
    pass


class IsotropicVectorError(ParaHyperError):
    pass


class CompatibilityError(ParaHyperError):
    """A bilinear form is not compatible with a para-hypercomplex triple."""


class NotAlmostStructureError(ParaHyperError):
    """An endomorphism does not square to the claimed multiple of the identity."""


class InvalidTripleError(ParaHyperError):
    pass


class NotParaHyperhermitianError(ParaHyperError):
    """The Lee-form equations are inconsistent across the three forms."""


class CharacterizationError(ParaHyperError):
    """A form triple violates the algebraic relations of a para-hyperhermitian triple."""


class SingularMetricError(ParaHyperError):
    pass


class DegreeError(ParaHyperError):
    pass


class LatticeError(ParaHyperError):
    pass


class ValidationError(ParaHyperError):
    """Invalid input data (free variables, parameters, configuration)."""
