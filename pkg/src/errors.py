"""
Error hierarchy shared by every stage of the kernel.
"""

from typing import Optional

from .data_structures import SourcePosition


class SysmelError(Exception):
    """Base class for every diagnostic raised by the kernel"""
    default_kind = "error"

    def __init__(self, message: str, position: Optional[SourcePosition] = None, kind: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.position = position
        self.kind = kind or self.default_kind

    def __str__(self) -> str:
        if self.position is not None:
            return f"{self.position}: {self.kind}: {self.message}"
        return f"{self.kind}: {self.message}"


class ParseError(SysmelError):
    default_kind = "unexpected-token"


class SemanticError(SysmelError):
    default_kind = "type-mismatch"


class EvaluationError(SysmelError):
    default_kind = "runtime-error"


class ImageError(SysmelError):
    default_kind = "bad-image"
