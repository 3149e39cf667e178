"""
Custom error classes for the hyperbolic Dirichlet solver.

This module defines custom exceptions used throughout the application.
Every error carries the process exit status the command line maps it to.
"""
from enum import IntEnum
from typing import Any, Dict, List, Optional, Sequence, Tuple


class ExitStatus(IntEnum):
    """Process exit status enumeration."""
    SUCCESS = 0
    NUMERICAL_FAILURE = 1
    CONFIGURATION_ERROR = 2


class BaseSolverError(Exception):
    """Base class for all solver errors."""
    def __init__(
        self,
        detail: str,
        exit_code: int = ExitStatus.NUMERICAL_FAILURE,
        error_code: str = "internal_error"
    ):
        """
        Initialize the error.

        Args:
            detail: Human-readable error description
            exit_code: Process exit status for the command line
            error_code: Machine-readable error code
        """
        self.detail = detail
        self.exit_code = int(exit_code)
        self.error_code = error_code
        super().__init__(self.detail)

    def as_dict(self) -> Dict[str, Any]:
        """Returns the error as a JSON-serializable dictionary."""
        return {"error_code": self.error_code, "detail": self.detail, "exit_code": self.exit_code}


class ConfigurationError(BaseSolverError):
    """Error for invalid run configuration or schedule."""
    def __init__(self, detail: str, messages: Optional[List[str]] = None):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.CONFIGURATION_ERROR,
            error_code="configuration_error"
        )
        self.messages = list(messages or [])


class ArgumentError(BaseSolverError):
    """Error for an argument outside its admissible range."""
    def __init__(self, detail: str):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.CONFIGURATION_ERROR,
            error_code="argument_error"
        )


class ConeDomainError(BaseSolverError):
    """Exception raised when a curvature function is evaluated outside the positive cone."""
    def __init__(self, detail: str, eigenvalues: Optional[Sequence[float]] = None):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.NUMERICAL_FAILURE,
            error_code="cone_domain_error"
        )
        self.eigenvalues = None if eigenvalues is None else [float(v) for v in eigenvalues]


class AdmissibilityError(BaseSolverError):
    """Exception raised when a height field is not admissible at some nodes."""
    def __init__(self, detail: str, nodes: Optional[Sequence[int]] = None):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.NUMERICAL_FAILURE,
            error_code="admissibility_error"
        )
        self.nodes = [int(n) for n in (nodes or [])]


class DiscretizationError(BaseSolverError):
    """Exception raised when a finite-difference stencil has no support."""
    def __init__(self, detail: str, node: Optional[Tuple[int, int]] = None):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.NUMERICAL_FAILURE,
            error_code="discretization_error"
        )
        self.node = node


class GeometryError(BaseSolverError):
    """Exception raised when a barrier surface cannot be constructed."""
    def __init__(self, detail: str):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.NUMERICAL_FAILURE,
            error_code="geometry_error"
        )


class ConvergenceError(BaseSolverError):
    """Exception raised when the continuity method or the outer iteration fails."""
    def __init__(
        self,
        detail: str,
        history: Optional[List[float]] = None,
        last_t: Optional[float] = None,
        last_residual: Optional[float] = None,
    ):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.NUMERICAL_FAILURE,
            error_code="convergence_failure"
        )
        self.history = list(history or [])
        self.last_t = last_t
        self.last_residual = last_residual


class ShootingError(BaseSolverError):
    """Exception raised when the radial shooting bracket is exhausted."""
    def __init__(self, detail: str, residual_curve: Optional[List[Tuple[float, float]]] = None):
        super().__init__(
            detail=detail,
            exit_code=ExitStatus.NUMERICAL_FAILURE,
            error_code="no_solution"
        )
        self.residual_curve = list(residual_curve or [])
