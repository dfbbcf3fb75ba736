"""Exception hierarchy shared by the library, the CLI and the HTTP layer."""
from typing import Any, Optional


class SdcaBenchError(Exception):
    """Base class for every error raised on purpose by sdcabench."""


class ContractError(SdcaBenchError, ValueError):
    """A documented precondition was violated (shapes, index ranges, parameter domains)."""


class MisuseError(SdcaBenchError, ValueError):
    """A valid call routed to the wrong entry point."""


class LibsvmParseError(SdcaBenchError, ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class LibsvmFormatError(LibsvmParseError):
    """The line parses but breaks the index ordering rules of the format."""


class NumericalError(SdcaBenchError, ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class DivergenceError(SdcaBenchError, ArithmeticError):
    def __init__(self, message: str, last_finite_epoch: float):
        super().__init__(f"{message} (last finite epoch: {last_finite_epoch:g})")
        self.last_finite_epoch = last_finite_epoch


class ReferenceQualityError(SdcaBenchError, ArithmeticError):
    def __init__(self, residual: float, reference: Optional[Any] = None):
        super().__init__(f"reference residual {residual:.3e} above target")
        self.residual = residual
        self.reference = reference


class InsufficientDataError(SdcaBenchError, ValueError):
    pass


class TuningError(SdcaBenchError, RuntimeError):
    pass


class PlotError(SdcaBenchError, ValueError):
    pass


class UnsupportedSolverError(SdcaBenchError, ValueError):
    pass
