"""Exception hierarchy shared by every service and the CLI."""

from typing import Any, Dict, Optional


class TuringFlowError(Exception):
    """Base error; ``details`` is serialized verbatim by the CLI."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': type(self).__name__,
            'message': self.message,
            'details': self.details,
        }


# Machines and tapes

class MachineError(TuringFlowError):
    """Errors raised by the Turing machine core."""


class HaltedConfiguration(MachineError):
    """A step was requested from a configuration in the halting state."""


class MachineDefinitionError(MachineError):
    """A machine description violates the machine invariants."""


class OverlapError(MachineError):
    """Two tapes cannot be juxtaposed without their supports colliding."""


class TapeFormatError(MachineError):
    """A binary machine description cannot be decoded."""


# Square encodings

class EncodingError(TuringFlowError):
    """Errors raised by the square encoding of configurations."""


class NoCylinder(EncodingError):
    """A point lies in no cylinder of the generalized shift."""


class InvalidEncoding(EncodingError):
    """A point of the square is not the encoding of any configuration."""


class SupportTooWide(EncodingError):
    """An output tape does not fit the requested halting window."""


# Exterior calculus

class CalculusError(TuringFlowError):
    """Errors raised by the forms calculus."""


class DegreeError(CalculusError):
    """An operator was applied to a form of unsupported degree."""


class SingularMetric(CalculusError):
    """A metric is not positive-definite at an evaluation point."""


class DegeneratePair(CalculusError):
    """alpha ^ omega vanishes (or the Reeb field is tangent to t = const)."""


class VanishingField(CalculusError):
    """A vector field vanishes at a sample point."""


class NegativeViscosity(CalculusError):
    """A Navier-Stokes residual was requested for nu < 0."""


# Flows

class FlowError(TuringFlowError):
    """Errors raised by suspensions, return maps and gauge changes."""


class IntegrationFailure(FlowError):
    """The adaptive integrator could not meet its tolerance."""


class TransversalityLoss(FlowError):
    """The field became tangent to the Poincare section."""


class NonCohomologous(FlowError):
    """The loop integral of alpha around the t-circle differs from c."""


class NonClosed(FlowError):
    """A form expected to be closed has a large exterior derivative."""


class SupportViolation(FlowError):
    """An isotopy is not supported inside the allowed disk."""


class ValidationFailure(FlowError):
    """A constructed structure failed one of its invariants."""


# Gluing

class GluingError(TuringFlowError):
    """Errors raised while deforming the ambient torus."""


class BadRadii(GluingError):
    """The nested torus radii are not strictly ordered or do not fit."""


class PositivityFailure(GluingError):
    """alpha ^ beta_tilde is not positive at some sample."""


# CLI ingestion

class InputFileError(TuringFlowError):
    """An input file is missing, too large or malformed."""


class UsageError(TuringFlowError):
    """Command-line arguments are missing or inconsistent."""
