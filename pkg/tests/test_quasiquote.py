"""
Tests for quotation, quasi-quotation and macros built on them
"""

import pytest

from src.ast_nodes import nodes_equal, IdentifierNode, LiteralNode, FunctionApplicationNode
from src.errors import SemanticError, EvaluationError
from src.parser import parse_source
from src.quasiquote import QuasiQuoteTemplate, collect_holes, instantiate
from src.runtime import make_tuple, print_string
from src.session import Session
from src.unparser import unparse


def template_of(source):
    quasi = parse_source(source).expressions[0]
    return QuasiQuoteTemplate(quasi.inner, collect_holes(quasi.inner))


def test_holes_in_evaluation_order():
    template = template_of("``(a `,unarySelectorNode (`@callArgumentNodes))")
    assert [type(hole).__name__ for hole in template.holes] == ["QuasiUnquoteNode", "SpliceNode"]


def test_nested_quasi_quote_hides_inner_holes():
    assert template_of("``(``(`,x))").holes == []


def test_splice_outside_a_list_is_rejected():
    quasi = parse_source("``(`@items)").expressions[0]
    with pytest.raises(SemanticError) as error:
        collect_holes(quasi.inner)
    assert error.value.kind == "macro-error"
    assert error.value.position is not None


def test_instantiate_substitutes_nodes():
    template = template_of("``(`,x + 1)")
    result = instantiate(template, LiteralNode(5))
    assert unparse(result) == "5 + 1"
    assert template.template.receiver.inner.name == "x"


def test_instantiate_splices_sequences():
    template = template_of("``(f(`@arguments))")
    result = instantiate(template, make_tuple([LiteralNode(1), IdentifierNode("y")]))
    assert isinstance(result, FunctionApplicationNode)
    assert unparse(result) == "f(1, y)"


def test_instantiate_checks_value_count():
    template = template_of("``(`,a + `,b)")
    with pytest.raises(EvaluationError) as error:
        instantiate(template, LiteralNode(1))
    assert error.value.kind == "arity-mismatch"


def test_quote_evaluates_to_the_node():
    value = Session().evaluate_source("`'a")
    assert nodes_equal(value, IdentifierNode("a"))


def test_quasi_quote_builds_a_tree_at_run_time():
    session = Session()
    value = session.evaluate_source("let base := `'(1 + 2).\n``(`,base * 3)")
    assert nodes_equal(value, parse_source("(1 + 2) * 3").expressions[0])


def test_macro_function_expands_at_analysis():
    session = Session()
    session.evaluate_source("macro function square(expression) := ``(`,expression * `,expression).")
    session.evaluate_source("function nine() => Int32 := square(3i32).")
    definition = session.lookup("nine")
    definition.ensure_analyzed()
    assert isinstance(definition.body_node, LiteralNode)
    assert print_string(definition.body_node.value) == "9"


def test_macro_receives_unevaluated_arguments():
    session = Session()
    session.evaluate_source("macro function quoted(expression) := ``(`'`,expression).")
    value = session.evaluate_source("quoted(undefinedName + 1)")
    assert unparse(value) == "undefinedName + 1"
