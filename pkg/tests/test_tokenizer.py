"""
Tests for the tokenizer
"""

import pytest

from src.errors import ParseError
from src.object_model import ImmediateTag
from src.tokenizer import tokenize, TokenKind
from tests.sample_programs import SYNTAX_TOUR


def kinds(source):
    return [token.kind for token in tokenize(source)]


def test_radix_literals():
    tokens = tokenize("2r1101_0011 . 16rFF1F_F2F3")
    assert tokens[0].kind == TokenKind.INTEGER
    assert tokens[0].value == 211
    assert tokens[2].value == 4280283891
    assert tokens[2].suffix is None
    assert tokens[-1].kind == TokenKind.END


def test_lowercase_radix_digits():
    assert tokenize("16rff")[0].value == 255
    assert tokenize("36rZ")[0].value == 35


def test_suffixed_literals():
    tokens = tokenize("255u8 5sz 2.5f32")
    assert (tokens[0].value, tokens[0].suffix) == (255, "u8")
    assert (tokens[1].value, tokens[1].suffix) == (5, "sz")
    assert tokens[2].kind == TokenKind.FLOAT
    assert tokens[2].suffix == "f32"


def test_spaced_suffix_is_a_unary_message():
    assert kinds("3 i32") == [TokenKind.INTEGER, TokenKind.IDENTIFIER, TokenKind.END]


def test_negative_literal_depends_on_previous_token():
    tokens = tokenize("0 . -1")
    assert tokens[2].kind == TokenKind.INTEGER
    assert tokens[2].value == -1
    assert kinds("a -1") == [TokenKind.IDENTIFIER, TokenKind.BINARY_OPERATOR, TokenKind.INTEGER, TokenKind.END]


def test_float_with_exponent():
    token = tokenize("-3.5e-2")[0]
    assert token.kind == TokenKind.FLOAT
    assert token.value == pytest.approx(-0.035)


def test_symbols():
    tokens = tokenize('#hello #with:with: #+ #"odd name"')
    assert [t.value.text for t in tokens[:-1]] == ["hello", "with:with:", "+", "odd name"]
    assert all(t.kind == TokenKind.SYMBOL for t in tokens[:-1])
    assert tokens[0].value is tokenize("#hello")[0].value


def test_strings_and_characters():
    tokens = tokenize(r'"Hello World\n\r" ' + r"'A' '\''")
    assert tokens[0].value == "Hello World\n\r"
    assert tokens[1].value.tag == ImmediateTag.CHARACTER
    assert tokens[1].value.payload == ord("A")
    assert tokens[2].value.payload == ord("'")


def test_keywords_and_paths():
    tokens = tokenize("at: 0sz put: 1 RawTuple::slotAt:put:")
    assert tokens[0].kind == TokenKind.KEYWORD
    assert tokens[0].text == "at:"
    assert tokens[-2].kind == TokenKind.IDENTIFIER
    assert tokens[-2].text == "RawTuple::slotAt:put:"


def test_operators_and_punctuation():
    assert kinds("a := 2 ::+ 3; x") == [
        TokenKind.IDENTIFIER, TokenKind.ASSIGNMENT, TokenKind.INTEGER, TokenKind.LOW_PRECEDENCE_OPERATOR,
        TokenKind.INTEGER, TokenKind.SEMICOLON, TokenKind.IDENTIFIER, TokenKind.END]
    assert kinds("{:x :: T | x}")[:5] == [TokenKind.LEFT_BRACE, TokenKind.COLON, TokenKind.IDENTIFIER,
                                         TokenKind.COLON_COLON, TokenKind.IDENTIFIER]


def test_collection_openers_and_quotes():
    assert kinds("#( #[ #{ `' `` `, `@")[:-1] == [
        TokenKind.LITERAL_ARRAY_OPEN, TokenKind.BYTE_ARRAY_OPEN, TokenKind.DICTIONARY_OPEN,
        TokenKind.QUOTE, TokenKind.QUASI_QUOTE, TokenKind.UNQUOTE, TokenKind.SPLICE]


def test_comments_emit_no_tokens():
    tokens = tokenize("1 ## one\n2")
    assert [t.value for t in tokens[:-1]] == [1, 2]
    assert tokens[1].newline_before


def test_positions_are_one_based():
    tokens = tokenize("a\n  bc", "sample.sysmel")
    assert (tokens[1].position.line, tokens[1].position.column) == (2, 3)
    assert str(tokens[1].position) == "sample.sysmel:2:3"


@pytest.mark.parametrize("source, kind", [
    ('"never closed', "unterminated-string"),
    ("'A", "unterminated-character"),
    ("2r102", "invalid-digit"),
    ("40r1", "invalid-digit"),
    ("3 $ 4", "unknown-character"),
    ("#;", "unknown-character"),
    ("`x", "unknown-character"),
])
def test_lexical_errors(source, kind):
    with pytest.raises(ParseError) as error:
        tokenize(source)
    assert error.value.kind == kind
    assert error.value.position is not None


def test_invalid_digit_points_at_the_digit():
    with pytest.raises(ParseError) as error:
        tokenize("2r102")
    assert error.value.position.column == 5


def test_syntax_tour_tokenizes():
    tokens = tokenize(SYNTAX_TOUR)
    assert tokens[-1].kind == TokenKind.END
    assert any(t.kind == TokenKind.SPLICE for t in tokens)
    assert 4280283891 in [t.value for t in tokens if t.kind == TokenKind.INTEGER]
