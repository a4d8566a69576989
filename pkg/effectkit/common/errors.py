from typing import Any, Dict, Optional


class EffectKitError(Exception):
    """Base exception for all toolkit errors"""
    exit_code: int = 1

    def __init__(self, detail: Any = None, exit_code: Optional[int] = None) -> None:
        self.detail = detail if detail is not None else "Toolkit error"
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(str(self.detail))

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "detail": str(self.detail), "exit_code": self.exit_code}

class ValidationError(EffectKitError):
    """Raised when input validation fails"""
    exit_code = 2

    def __init__(self, detail: str = "Validation error") -> None:
        super().__init__(detail=detail)

class NotFoundError(EffectKitError):
    """Raised when a requested scenario or outcome label is not found"""
    exit_code = 2

    def __init__(self, detail: str = "Resource not found") -> None:
        super().__init__(detail=detail)

class OrderingError(ValidationError):
    """Raised when a factorisation needs M*M <= K*K and the order fails"""

    def __init__(self, min_eigenvalue: float, detail: Optional[str] = None) -> None:
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            detail or f"Ordering violated: min eigenvalue of K*K - M*M is {self.min_eigenvalue:.3e}"
        )

class MarginalMismatchError(ValidationError):
    """Raised when a candidate joint observable does not reproduce the marginals"""

    def __init__(self, max_deviation: float, detail: Optional[str] = None) -> None:
        self.max_deviation = float(max_deviation)
        super().__init__(
            detail or f"Marginals not reproduced: max deviation {self.max_deviation:.3e}"
        )

class InconclusiveOracleError(EffectKitError):
    """Raised when the feasibility oracle cannot decide"""
    exit_code = 3

    def __init__(
        self,
        detail: str = "Feasibility oracle inconclusive",
        stats: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.stats = stats or {}
        super().__init__(detail=detail)

class InternalError(EffectKitError):
    """Raised when a post-condition self-check fails"""
    exit_code = 1

    def __init__(self, detail: str = "Internal error") -> None:
        super().__init__(detail=detail)
