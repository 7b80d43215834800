"""
Tests for the parser and the unparser
"""

import random

import pytest

from src.ast_nodes import (nodes_equal, walk, clone_node, LiteralNode, IdentifierNode, MessageSendNode,
                           FunctionApplicationNode, CascadeNode, SequenceNode, LambdaNode, TupleNode,
                           MakeDictionaryNode, MakeByteArrayNode, LiteralArrayNode, QuoteNode, QuasiQuoteNode,
                           QuasiUnquoteNode, SpliceNode)
from src.errors import ParseError
from src.parser import parse, parse_source, parse_with_recovery
from src.tokenizer import tokenize
from src.unparser import unparse
from tests.sample_programs import SYNTAX_TOUR, SAMPLE_CLASS_PROGRAM, CORPUS


def single(source):
    tree = parse_source(source)
    assert len(tree.expressions) == 1
    return tree.expressions[0]


def test_binary_messages_are_left_to_right():
    node = single("2 + 3 * 5.")
    assert isinstance(node, MessageSendNode)
    assert node.selector_text == "*"
    assert node.receiver.selector_text == "+"
    assert node.receiver.receiver.value == 2
    assert node.arguments[0].value == 5


BINARY_OPERATORS = ["+", "-", "*", "/", "//", "\\\\", "<", "<=", ">", ">=", "=", "==", "~=", "&", "<<", ">>", "%",
                    "@", "->", "?"]


def test_binary_operators_share_one_precedence_and_associate_left():
    generator = random.Random(11)
    for _ in range(200):
        first, second = generator.choice(BINARY_OPERATORS), generator.choice(BINARY_OPERATORS)
        node = single(f"a {first} b {second} c")
        assert node.selector_text == second
        assert node.receiver.selector_text == first
        names = [node.receiver.receiver.name, node.receiver.arguments[0].name, node.arguments[0].name]
        assert names == ["a", "b", "c"]


def test_keyword_binds_looser_than_binary():
    node = single("Array with: 1 + 1 with: 2")
    assert node.selector_text == "with:with:"
    assert node.arguments[0].selector_text == "+"


def test_low_precedence_operator_binds_below_keywords():
    node = single("2 ::+ 3 max: 4")
    assert node.selector_text == "+"
    assert node.arguments[0].selector_text == "max:"


def test_receiverless_keyword_message():
    node = single("with: #x with: 42")
    assert node.receiver is None
    assert node.selector_text == "with:with:"


def test_cascade():
    node = single("(Array new: 3sz) at: 0sz put: 1; at: 1sz put: 2; yourself.")
    assert isinstance(node, CascadeNode)
    assert node.receiver.selector_text == "new:"
    assert [message.selector.value.text for message in node.messages] == ["at:put:", "at:put:", "yourself"]


def test_assignment():
    node = single("a := 2")
    assert node.selector_text == ":="
    assert node.receiver.name == "a"


def test_adjacent_bracket_sends():
    assert single("Int32[5sz]").selector_text == "[]:"
    assert single("doSomething{5sz}").selector_text == "{}:"
    assert single("doSomething#[1u8]").selector_text == "#[]:"


def test_function_application():
    node = single("malloc(16sz)")
    assert isinstance(node, FunctionApplicationNode)
    assert node.functional.name == "malloc"
    assert node.arguments[0].suffix == "sz"


def test_collections():
    assert len(single("1, 2, 3").elements) == 3
    assert isinstance(single("1, 2, 3"), TupleNode)
    dictionary = single('#{first: 1. #second : 2 . "third": 3}')
    assert isinstance(dictionary, MakeDictionaryNode)
    assert len(dictionary.pairs) == 3
    assert isinstance(single("#[1u8 . (2 + 3) asUInt8]"), MakeByteArrayNode)
    array = single("#(1 2 test (2.5 3))")
    assert isinstance(array, LiteralArrayNode)
    assert isinstance(array.elements[3], LiteralArrayNode)


def test_lambda_header():
    node = single("{:(Int32)x :y :: Int32 | x + y}")
    assert isinstance(node, LambdaNode)
    assert [argument.name for argument in node.arguments] == ["x", "y"]
    assert node.arguments[0].type_node.name == "Int32"
    assert node.arguments[1].type_node is None
    assert node.result_type_node.name == "Int32"


def test_plain_block_is_a_sequence():
    node = single("{ let: #x with: 2 . x }")
    assert isinstance(node, SequenceNode)
    assert len(node.expressions) == 2


def test_quote_forms():
    quote = single("`'a")
    assert isinstance(quote, QuoteNode)
    assert nodes_equal(quote.inner, IdentifierNode("a"))
    quasi = single("``(a `,unarySelectorNode (`@callArgumentNodes))")
    assert isinstance(quasi, QuasiQuoteNode)
    kinds = {type(node) for node in walk(quasi)}
    assert QuasiUnquoteNode in kinds
    assert SpliceNode in kinds


def test_statements_may_end_at_a_newline():
    tree = parse_source("1 + 2\n3 negated")
    assert len(tree.expressions) == 2


def test_syntax_tour_parses():
    tree = parse_source(SYNTAX_TOUR)
    assert len(tree.expressions) == 38


def test_sample_class_program_parses():
    tree = parse_source(SAMPLE_CLASS_PROGRAM)
    assert len(tree.expressions) == 3


def test_unparse_fixpoint_on_syntax_tour():
    tree = parse_source(SYNTAX_TOUR)
    assert nodes_equal(parse_source(unparse(tree)), tree)


@pytest.mark.parametrize("sample", CORPUS, ids=lambda sample: sample.name)
def test_unparse_fixpoint_on_corpus(sample):
    tree = parse_source(sample.source)
    text = unparse(tree)
    assert nodes_equal(parse_source(text), tree), text


def assert_parents_cover_children(tree):
    for node in walk(tree):
        assert node.position is not None, node
        for child in node.children():
            assert node.position.contains(child.position), (node, child)


def test_parent_positions_cover_children_in_syntax_tour():
    assert_parents_cover_children(parse_source(SYNTAX_TOUR))


@pytest.mark.parametrize("sample", CORPUS, ids=lambda sample: sample.name)
def test_parent_positions_cover_children_in_corpus(sample):
    assert_parents_cover_children(parse_source(sample.source))


def test_nodes_equal_ignores_positions():
    first = parse_source("2 + 3")
    second = parse_source("\n\n   2   +   3")
    assert nodes_equal(first, second)
    assert not nodes_equal(first, parse_source("2 + 4"))


def test_clone_node_replaces_subtrees():
    tree = single("x + 1")
    copy = clone_node(tree, lambda node: LiteralNode(41) if isinstance(node, IdentifierNode) else None)
    assert copy.receiver.value == 41
    assert tree.receiver.name == "x"


@pytest.mark.parametrize("source, kind", [
    ("(1 + 2", "unbalanced-delimiter"),
    ("1 + 2)", "unbalanced-delimiter"),
    ("#(1 2", "unbalanced-delimiter"),
    ("{:x :y x}", "malformed-lambda"),
    ("{: | 1}", "malformed-lambda"),
    ("1 + ", "unexpected-token"),
])
def test_parse_errors(source, kind):
    with pytest.raises(ParseError) as error:
        parse(tokenize(source))
    assert error.value.kind == kind
    assert error.value.position is not None


def test_recovery_keeps_later_statements():
    tree, errors = parse_with_recovery(tokenize("1 + ). 2 + 3."))
    assert len(errors) == 1
    assert len(tree.expressions) == 1
    assert tree.expressions[0].selector_text == "+"
