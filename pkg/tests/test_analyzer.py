"""
Tests for semantic analysis, compile time folding and the control macros
"""

import io
import logging
import random

import pytest

from src.ast_nodes import (walk, LiteralNode, FunctionApplicationNode, MessageSendNode, IfNode, WhileNode,
                           LocalDefinitionNode, ClosureNode, SlotLoadNode)
from src.data_structures import AnalysisContext
from src.errors import EvaluationError, SemanticError
from src.object_model import intern_symbol
from src.runtime import make_number, print_string, values_equal, number_value
from src.session import Session
from tests.sample_programs import CORPUS

FOLDED_OPERATORS = ["+", "-", "*", "//", "\\\\", "bitAnd:", "bitOr:", "bitXor:", "<", "<=", "=", ">"]


def last_body(session):
    return session.thunks[-1].body_node


def node_types(node):
    return {type(child) for child in walk(node)}


@pytest.fixture
def session():
    return Session()


def test_pure_intrinsic_application_is_folded(session):
    value = session.evaluate_source("3i32 + 4i32")
    body = last_body(session)
    assert isinstance(body, LiteralNode)
    assert FunctionApplicationNode not in node_types(body)
    assert print_string(value) == "7"
    assert body.analyzed_type is session.universe["Int32"]


def test_nested_pure_expressions_fold_completely(session):
    session.evaluate_source("(2 + 3) * (10 - 4)")
    body = last_body(session)
    assert isinstance(body, LiteralNode)
    assert print_string(body.value) == "30"


def test_pure_user_function_folds(session):
    session.evaluate_source("pure function square(x: Int32) => Int32 := x * x.")
    value = session.evaluate_source("square(7i32)")
    assert isinstance(last_body(session), LiteralNode)
    assert print_string(value) == "49"


def test_impure_application_is_kept(session):
    session.evaluate_source("function twice(x: Int32) => Int32 := x + x.")
    session.evaluate_source("twice(4i32)")
    assert FunctionApplicationNode in node_types(last_body(session))


def test_failed_fold_is_kept_with_a_warning(session, caplog):
    with caplog.at_level(logging.WARNING, logger="SysmelKernel"):
        with pytest.raises(EvaluationError) as error:
            session.evaluate_source("5 // 0")
    assert error.value.kind == "division-by-zero"
    assert any("unfolded" in record.getMessage() for record in caplog.records)


def test_randomized_folds_match_runtime(session):
    """Folded literals equal what the same operation computes at run time on arguments"""
    int32 = session.universe["Int32"]
    for index, operator in enumerate(FOLDED_OPERATORS):
        result = "Boolean" if operator in ("<", "<=", "=", ">") else "Int32"
        session.evaluate_source(f"function op{index}(a: Int32, b: Int32) => {result} := a {operator} b.")
    generator = random.Random(20240611)
    for _ in range(200):
        index = generator.randrange(len(FOLDED_OPERATORS))
        operator = FOLDED_OPERATORS[index]
        left = generator.randint(-(2 ** 31), 2 ** 31 - 1)
        right = generator.randint(-(2 ** 31), 2 ** 31 - 1)
        if operator in ("//", "\\\\") and right == 0:
            right = 7
        folded = session.evaluate_source(f"{left}i32 {operator} {right}i32")
        body = last_body(session)
        assert isinstance(body, LiteralNode), f"{left} {operator} {right} was not folded"
        assert FunctionApplicationNode not in node_types(body)
        runtime = session.call(f"op{index}", make_number(left, int32), make_number(right, int32))
        assert values_equal(folded, runtime), f"{left} {operator} {right}: {folded} != {runtime}"


def test_unsuffixed_literal_adopts_argument_type(session):
    session.evaluate_source("1 + 1i32")
    assert session.thunks[-1].result_type is session.universe["Int32"]
    session.evaluate_source("1i64 + 1")
    assert session.thunks[-1].result_type is session.universe["Int64"]


def test_literal_coerced_to_declared_argument_type(session):
    session.evaluate_source("function id(x: UInt8) => UInt8 := x.")
    assert print_string(session.evaluate_source("id(200)")) == "200"


def test_if_node_built_for_literal_condition(session):
    session.evaluate_source("if: true then: 1 else: 2")
    assert IfNode in node_types(last_body(session))


def test_while_macro_inlines_blocks(session):
    session.evaluate_source("function count() => Int32 := { let i mutable := 0i32. "
                            "while: i < 3i32 do: { i := i + 1i32 }. i }.")
    definition = session.lookup("count")
    definition.ensure_analyzed()
    kinds = node_types(definition.body_node)
    assert WhileNode in kinds
    assert LocalDefinitionNode in kinds
    assert ClosureNode not in kinds


def test_boolean_macros_short_circuit(session):
    assert print_string(session.evaluate_source("(3 > 4) and: { 1 // 0 = 0 }")) == "false"
    assert print_string(session.evaluate_source("(3 < 4) or: { 1 // 0 = 0 }")) == "true"


def test_cascade_on_computed_receiver_uses_a_local(session):
    session.evaluate_source("(Array new: 2sz) at: 0sz put: 1; yourself")
    locals_ = [node.binding.name.text for node in walk(last_body(session)) if isinstance(node, LocalDefinitionNode)]
    assert locals_ == ["cascade receiver"]


def test_dynamic_receiver_becomes_a_runtime_send(session):
    session.evaluate_source("function poke(x) := x negated.")
    definition = session.lookup("poke")
    sends = [node for node in walk(definition.body_node) if isinstance(node, MessageSendNode)]
    assert [send.selector_text for send in sends] == ["negated"]
    assert print_string(session.call("poke", make_number(4, session.universe["Int32"]))) == "-4"


def test_namespace_let_defines_a_global(session):
    session.evaluate_source("let answer := 6 * 7.")
    assert print_string(session.lookup("answer")) == "42"
    assert session.namespace.member("answer") is not None


def test_mutable_local_has_reference_type(session):
    session.evaluate_source("function f() => Int32 := { let x mutable := 1i32. x := x + 1i32. x }.")
    definition = session.lookup("f")
    definition.ensure_analyzed()
    definitions = [node for node in walk(definition.body_node) if isinstance(node, LocalDefinitionNode)]
    assert definitions[0].analyzed_type.is_reference
    assert number_value(session.call("f")) == 2


REFERENCE_ASSIGNMENTS = [
    ("let x mutable := 1i32. x := 5i32. x", "5"),
    ("let c mutable := 1. c := 4. c", "4"),
    ("function f() => Int32 := { let x mutable := 1i32. x := 5i32. x }. f()", "5"),
    ("function f() => Int32 := { let x mutable := 1i32. let p := x address. p _ := 9i32. x }. f()", "9"),
    ("function count() => Int32 := { let i mutable := 0i32. while: i < 3i32 do: { i := i + 1i32 }. i }. count()",
     "3"),
]


@pytest.mark.parametrize("engine", ["interp", "bytecode", "hir", "mir"])
@pytest.mark.parametrize("source,expected", REFERENCE_ASSIGNMENTS)
def test_assignment_stores_through_the_reference(engine, source, expected):
    value = Session(engine, output=io.StringIO()).evaluate_source(source)
    assert print_string(value) == expected


def test_type_side_methods_reach_derived_types(session):
    assert session.evaluate_source("Int32 pointer pointer").name == "Int32 pointer pointer"
    assert session.evaluate_source("Int32 pointer ref").name == "Int32 pointer ref"


def test_reference_to_a_reference_is_rejected_during_analysis(session):
    with pytest.raises(SemanticError) as error:
        session.evaluate_source("Int32 ref ref")
    assert error.value.kind == "type-mismatch"
    assert error.value.position is not None


@pytest.mark.parametrize("sample", CORPUS, ids=[sample.name for sample in CORPUS])
def test_analyzing_an_analyzed_node_returns_it(sample):
    session = Session(output=io.StringIO())
    session.evaluate_source(sample.source)
    for definition in session.defined_functions() + session.thunks:
        definition.ensure_analyzed()
        if definition.body_node is None:
            continue
        context = AnalysisContext(session.environment, session.analyzer, definition, definition.result_type)
        for node in walk(definition.body_node):
            if node.analyzed_type is not None:
                assert session.analyzer.analyze_node(node, context) is node


def test_field_access_inside_methods(session):
    session.evaluate_source("public class Point superclass: Object; definition: { public field x => Int32. "
                            "public method twiceX ::=> Int32 := x + x. }.")
    entity = session.namespace.member("Point")
    method = entity.methods[intern_symbol("twiceX")].definition
    method.ensure_analyzed()
    assert SlotLoadNode in node_types(method.body_node)
