"""
Every diagnostic carries its kind and, where a source location exists, the position it refers to
"""

import io

import pytest

from src.errors import SysmelError, ParseError, SemanticError, EvaluationError, ImageError
from src.image import ExternalTable, load_image
from src.session import Session

ERROR_PROGRAMS = [
    ("unbound identifier", "frobnitz + 1", SemanticError, "unbound-identifier", (1, 1)),
    ("unknown selector", "3i32 frobnicate", SemanticError, "no-such-method", (1, 1)),
    ("wrong argument count", "function f(x: Int32) => Int32 := x.\nf(1i32, 2i32)", SemanticError,
     "arity-mismatch", (2, 1)),
    ("argument type", 'function f(x: Int32) => Int32 := x.\nf("text")', SemanticError, "type-mismatch", None),
    ("immutable assignment", "function f() := {\n  let x := 3i32.\n  x := 4i32.\n  x\n}.", SemanticError,
     "type-mismatch", (3, 3)),
    ("unquote outside a quasi-quote", "1 + `,x", SemanticError, "macro-error", (1, 5)),
    ("finished builder", "public pure function; class", SemanticError, "macro-error", None),
    ("runaway macro", "macro function spin(x) := ``(spin(`,x)).\nspin(1)", SemanticError, "macro-error", None),
    ("reference to a reference", "Int32 ref ref", SemanticError, "type-mismatch", (1, 1)),
    ("division by zero", "5 // 0", EvaluationError, "division-by-zero", (1, 1)),
    ("dynamic send", "{:a | a frobnicate}(3)", EvaluationError, "does-not-understand", (1, 7)),
    ("index out of range", "(Array new: 2sz) at: 5sz", EvaluationError, "index-out-of-range", (1, 1)),
    ("missing key", "#{first: 1} at: #second", EvaluationError, "key-not-found", (1, 1)),
    ("not applicable", "{:a | a(1)}(3)", EvaluationError, "not-applicable", (1, 7)),
    ("unterminated string", 'printLine("abc', ParseError, "unterminated-string", (1, 11)),
    ("invalid digit", "2r102", ParseError, "invalid-digit", (1, 5)),
    ("unbalanced delimiter", "(1 + 2", ParseError, "unbalanced-delimiter", None),
    ("malformed lambda", "{:x x}", ParseError, "malformed-lambda", None),
    ("unknown character", "1 $ 2", ParseError, "unknown-character", (1, 3)),
]


@pytest.mark.parametrize("name,source,error_class,kind,location", ERROR_PROGRAMS,
                         ids=[entry[0] for entry in ERROR_PROGRAMS])
def test_error_kind_and_position(name, source, error_class, kind, location):
    with pytest.raises(error_class) as error:
        Session(output=io.StringIO()).evaluate_source(source, "bad.sysmel")
    assert error.value.kind == kind
    position = error.value.position
    assert position is not None
    assert position.file_name == "bad.sysmel"
    if location is not None:
        assert (position.line, position.column) == location
    assert str(error.value).startswith(f"bad.sysmel:{position.line}:{position.column}: {kind}: ")


@pytest.mark.parametrize("engine", ["interp", "bytecode", "hir", "mir"])
def test_runaway_recursion_is_a_diagnostic(engine):
    session = Session(engine)
    session.evaluate_source("function loop(n: Int32) => Int32 := loop(n + 1i32).")
    with pytest.raises(EvaluationError) as error:
        session.call("loop", session.evaluate_source("0i32"))
    assert error.value.kind == "stack-overflow"


@pytest.mark.parametrize("engine", ["interp", "bytecode", "hir", "mir"])
def test_runtime_errors_agree_across_engines(engine):
    session = Session(engine)
    session.evaluate_source("function pick(index: Size) := (Array new: 2sz) at: index.")
    with pytest.raises(EvaluationError) as error:
        session.call("pick", session.evaluate_source("7sz"))
    assert error.value.kind == "index-out-of-range"


@pytest.mark.parametrize("engine", ["interp", "bytecode", "hir", "mir"])
def test_runtime_error_inside_a_function_points_at_the_operation(engine):
    session = Session(engine, output=io.StringIO())
    with pytest.raises(EvaluationError) as error:
        session.evaluate_source("function f(a: Int32) => Int32 := 10i32 // a.\nf(0i32)", "bad.sysmel")
    assert error.value.kind == "division-by-zero"
    position = error.value.position
    assert position is not None
    assert (position.file_name, position.line, position.column) == ("bad.sysmel", 1, 34)
    assert str(error.value).startswith("bad.sysmel:1:34: division-by-zero: ")


def test_bad_image_magic():
    with pytest.raises(ImageError) as error:
        load_image(b"JUNKJUNKJUNK", ExternalTable(Session().builtins))
    assert error.value.kind == "bad-magic"
    assert "bad-magic" in str(error.value)


def test_error_hierarchy():
    for error_class in (ParseError, SemanticError, EvaluationError, ImageError):
        assert issubclass(error_class, SysmelError)
    assert ParseError("x").kind == "unexpected-token"
    assert EvaluationError("x").kind == "runtime-error"
