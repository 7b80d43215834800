from dataclasses import dataclass, field, replace
from typing import Any, List, Optional


@dataclass(frozen=True)
class SourcePosition:
    """Location of a token or node inside a source file"""
    file_name: str
    start_offset: int
    end_offset: int
    line: int = 1
    column: int = 1

    def __post_init__(self):
        if self.start_offset > self.end_offset:
            raise ValueError(f"start offset {self.start_offset} is after end offset {self.end_offset}")
        if self.line < 1 or self.column < 1:
            raise ValueError(f"line and column are 1-based, got {self.line}:{self.column}")

    def to(self, other: "SourcePosition") -> "SourcePosition":
        """Return the position spanning from this one to the end of other"""
        return SourcePosition(self.file_name, self.start_offset, max(self.end_offset, other.end_offset),
                              self.line, self.column)

    def contains(self, other: "SourcePosition") -> bool:
        return self.start_offset <= other.start_offset and other.end_offset <= self.end_offset

    def __str__(self) -> str:
        return f"{self.file_name}:{self.line}:{self.column}"


EMPTY_POSITION = SourcePosition("<builtin>", 0, 0)


@dataclass
class PassOptions:
    """Toggles for the high-level optimization pipeline"""
    constant_propagation: bool = True
    simplify_control_flow: bool = True
    inlining: bool = True
    inline_threshold: int = 24


@dataclass
class DriverConfig:
    """Everything the command line driver needs to run one program"""
    input_path: Optional[str] = None
    expression: Optional[str] = None
    engine: str = "interp"
    dumps: List[str] = field(default_factory=list)
    pass_options: PassOptions = field(default_factory=PassOptions)
    roots: str = "main"
    emit_image: Optional[str] = None
    load_image: Optional[str] = None
    strip_ast: bool = False
    repl: bool = False
    log_level: str = "WARNING"
    log_file: Optional[str] = None


@dataclass
class RunResult:
    """Outcome of one driver run"""
    success: bool
    message: str
    exit_status: int = 0
    diagnostics: List[str] = field(default_factory=list)


@dataclass
class AnalysisContext:
    """Environment, expected type and function under analysis for one analyze call"""
    environment: Any
    analyzer: Any
    current_function: Any = None
    expected_type: Any = None

    def with_environment(self, environment) -> "AnalysisContext":
        return replace(self, environment=environment)

    def expecting(self, expected_type) -> "AnalysisContext":
        if expected_type is self.expected_type:
            return self
        return replace(self, expected_type=expected_type)

    def within(self, function, environment) -> "AnalysisContext":
        return replace(self, current_function=function, environment=environment, expected_type=None)
