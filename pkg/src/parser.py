"""
Recursive descent parser for Sysmel.

Precedence, tightest first: unary sends, bracket sends and juxtaposed calls;
binary operators; keyword messages; low precedence ::operators; cascades;
assignment; comma tuples; period separated sequences.
"""

import logging
from typing import List, Optional, Tuple

from .data_structures import SourcePosition
from .errors import ParseError
from .object_model import intern_symbol
from .tokenizer import Token, TokenKind, tokenize
from .ast_nodes import (AstNode, LiteralNode, IdentifierNode, MessageSendNode, FunctionApplicationNode,
                        CascadeMessageNode, CascadeNode, SequenceNode, LambdaArgumentNode, LambdaNode, TupleNode,
                        DictionaryPairNode, MakeDictionaryNode, MakeByteArrayNode, LiteralArrayNode, QuoteNode,
                        QuasiQuoteNode, QuasiUnquoteNode, SpliceNode)

LITERAL_KINDS = (TokenKind.INTEGER, TokenKind.FLOAT, TokenKind.STRING, TokenKind.CHARACTER, TokenKind.SYMBOL)
CLOSERS = {TokenKind.RIGHT_PAREN: ")", TokenKind.RIGHT_BRACE: "}", TokenKind.RIGHT_BRACKET: "]"}


def _selector(text: str, position: SourcePosition) -> LiteralNode:
    return LiteralNode(intern_symbol(text), position=position)


class Parser:
    def __init__(self, tokens: List[Token]):
        if not tokens or tokens[-1].kind != TokenKind.END:
            raise ValueError("token stream must end with an END token")
        self.tokens = tokens
        self.index = 0
        self.logger = logging.getLogger("SysmelKernel")

    # --- token helpers ---
    @property
    def token(self) -> Token:
        return self.tokens[self.index]

    @property
    def previous(self) -> Token:
        return self.tokens[self.index - 1]

    def peek(self, kind: TokenKind, offset: int = 0) -> bool:
        index = min(self.index + offset, len(self.tokens) - 1)
        return self.tokens[index].kind == kind

    def peek_operator(self, text: str) -> bool:
        return self.token.kind == TokenKind.BINARY_OPERATOR and self.token.text == text

    def advance(self) -> Token:
        token = self.token
        if token.kind != TokenKind.END:
            self.index += 1
        return token

    def accept(self, kind: TokenKind) -> Optional[Token]:
        if self.peek(kind):
            return self.advance()
        return None

    def error(self, message: str, kind: str = "unexpected-token", token: Optional[Token] = None) -> ParseError:
        token = token or self.token
        return ParseError(message, token.position, kind)

    def match(self, kind: TokenKind, opener: Optional[Token] = None) -> Token:
        if self.peek(kind):
            return self.advance()
        if opener is not None:
            raise self.error(f"expected '{CLOSERS.get(kind, kind.value)}' to close the '{opener.text}' "
                             f"at {opener.position}, found {self.describe(self.token)}", "unbalanced-delimiter")
        raise self.error(f"expected {kind.value}, found {self.describe(self.token)}")

    @staticmethod
    def describe(token: Token) -> str:
        return "end of input" if token.kind == TokenKind.END else f"'{token.text}'"

    def span(self, start: SourcePosition) -> SourcePosition:
        return start.to(self.previous.position)

    def is_adjacent(self) -> bool:
        return not self.token.space_before

    # --- sequences ---
    def parse_top_level(self) -> SequenceNode:
        start = self.token.position
        expressions = self.parse_expression_list((TokenKind.END,))
        self.match(TokenKind.END)
        return SequenceNode(expressions, position=self.span(start) if expressions else start)

    def parse_expression_list(self, terminators: Tuple[TokenKind, ...]) -> List[AstNode]:
        expressions: List[AstNode] = []
        while True:
            while self.accept(TokenKind.PERIOD):
                pass
            if self.token.kind in terminators:
                return expressions
            expressions.append(self.parse_expression())
            if self.accept(TokenKind.PERIOD) or self.token.kind in terminators:
                continue
            # A statement ending at a line break needs no period.
            if self.token.newline_before:
                continue
            if self.token.kind in CLOSERS:
                raise self.error(f"unbalanced '{self.token.text}'", "unbalanced-delimiter")
            raise self.error(f"unexpected {self.describe(self.token)} after expression")

    def parse_expression(self) -> AstNode:
        start = self.token.position
        first = self.parse_assignment()
        if not self.peek(TokenKind.COMMA):
            return first
        elements = [first]
        while self.accept(TokenKind.COMMA):
            elements.append(self.parse_assignment())
        return TupleNode(elements, position=self.span(start))

    # --- message levels ---
    def parse_assignment(self) -> AstNode:
        start = self.token.position
        target = self.parse_cascade()
        operator = self.accept(TokenKind.ASSIGNMENT)
        if operator is None:
            return target
        value = self.parse_assignment()
        return MessageSendNode(target, _selector(":=", operator.position), [value], position=self.span(start))

    def parse_cascade(self) -> AstNode:
        start = self.token.position
        first = self.parse_low_precedence()
        if not self.peek(TokenKind.SEMICOLON):
            return first
        if not isinstance(first, MessageSendNode) or first.receiver is None:
            raise self.error("a cascade needs a message send with a receiver before ';'")
        messages = [CascadeMessageNode(first.selector, first.arguments, position=first.selector.position.to(
            first.position))]
        while self.accept(TokenKind.SEMICOLON):
            messages.append(self.parse_cascade_message())
        return CascadeNode(first.receiver, messages, position=self.span(start))

    def parse_cascade_message(self) -> CascadeMessageNode:
        start = self.token
        if self.peek(TokenKind.IDENTIFIER):
            self.advance()
            return CascadeMessageNode(_selector(start.text, start.position), [], position=start.position)
        if self.peek(TokenKind.BINARY_OPERATOR) or self.peek(TokenKind.LOW_PRECEDENCE_OPERATOR):
            self.advance()
            argument = self.parse_unary() if start.kind == TokenKind.BINARY_OPERATOR else self.parse_keyword()
            return CascadeMessageNode(_selector(self.operator_selector(start), start.position), [argument],
                                      position=self.span(start.position))
        if self.peek(TokenKind.KEYWORD):
            selector, arguments = self.parse_keyword_parts()
            return CascadeMessageNode(_selector(selector, start.position), arguments,
                                      position=self.span(start.position))
        raise self.error(f"expected a cascaded message, found {self.describe(self.token)}")

    @staticmethod
    def operator_selector(token: Token) -> str:
        return token.text[2:] if token.kind == TokenKind.LOW_PRECEDENCE_OPERATOR else token.text

    def parse_low_precedence(self) -> AstNode:
        start = self.token.position
        expression = self.parse_keyword()
        while self.peek(TokenKind.LOW_PRECEDENCE_OPERATOR):
            operator = self.advance()
            argument = self.parse_keyword()
            expression = MessageSendNode(expression, _selector(self.operator_selector(operator), operator.position),
                                         [argument], position=self.span(start))
        return expression

    def parse_keyword_parts(self) -> Tuple[str, List[AstNode]]:
        selector = ""
        arguments: List[AstNode] = []
        while self.peek(TokenKind.KEYWORD):
            selector += self.advance().text
            arguments.append(self.parse_binary())
        return selector, arguments

    def parse_keyword(self) -> AstNode:
        start = self.token.position
        if self.peek(TokenKind.KEYWORD):
            selector, arguments = self.parse_keyword_parts()
            return MessageSendNode(None, _selector(selector, start), arguments, position=self.span(start))
        receiver = self.parse_binary()
        if not self.peek(TokenKind.KEYWORD):
            return receiver
        selector_position = self.token.position
        selector, arguments = self.parse_keyword_parts()
        return MessageSendNode(receiver, _selector(selector, selector_position), arguments,
                               position=self.span(start))

    def parse_binary(self) -> AstNode:
        start = self.token.position
        expression = self.parse_unary()
        while self.peek(TokenKind.BINARY_OPERATOR):
            operator = self.advance()
            argument = self.parse_unary()
            expression = MessageSendNode(expression, _selector(operator.text, operator.position), [argument],
                                         position=self.span(start))
        return expression

    def parse_unary(self) -> AstNode:
        start = self.token.position
        expression = self.parse_primary()
        while True:
            token = self.token
            if token.kind == TokenKind.IDENTIFIER and not token.newline_before:
                self.advance()
                expression = MessageSendNode(expression, _selector(token.text, token.position), [],
                                             position=self.span(start))
            elif token.kind == TokenKind.LEFT_PAREN and not token.newline_before:
                arguments = self.parse_call_arguments()
                expression = FunctionApplicationNode(expression, arguments, position=self.span(start))
            elif token.kind == TokenKind.LEFT_BRACKET and self.is_adjacent():
                opener = self.advance()
                if self.peek(TokenKind.RIGHT_BRACKET):
                    argument: AstNode = TupleNode([], position=opener.position)
                else:
                    argument = self.parse_expression()
                self.match(TokenKind.RIGHT_BRACKET, opener)
                expression = MessageSendNode(expression, _selector("[]:", opener.position), [argument],
                                             position=self.span(start))
            elif token.kind == TokenKind.LEFT_BRACE and self.is_adjacent():
                block = self.parse_block()
                expression = MessageSendNode(expression, _selector("{}:", token.position), [block],
                                             position=self.span(start))
            elif token.kind == TokenKind.BYTE_ARRAY_OPEN and self.is_adjacent():
                byte_array = self.parse_byte_array()
                expression = MessageSendNode(expression, _selector("#[]:", token.position), [byte_array],
                                             position=self.span(start))
            elif token.kind == TokenKind.UNQUOTE:
                self.advance()
                selector = QuasiUnquoteNode(self.parse_primary(), position=self.span(token.position))
                arguments = self.parse_call_arguments() if self.peek(TokenKind.LEFT_PAREN) else []
                expression = MessageSendNode(expression, selector, arguments, position=self.span(start))
            else:
                return expression

    def parse_call_arguments(self) -> List[AstNode]:
        opener = self.match(TokenKind.LEFT_PAREN)
        arguments: List[AstNode] = []
        if not self.peek(TokenKind.RIGHT_PAREN):
            arguments.append(self.parse_assignment())
            while self.accept(TokenKind.COMMA):
                arguments.append(self.parse_assignment())
        self.match(TokenKind.RIGHT_PAREN, opener)
        return arguments

    # --- primaries ---
    def parse_primary(self) -> AstNode:
        token = self.token
        if token.kind in LITERAL_KINDS:
            self.advance()
            return LiteralNode(token.value, token.suffix, position=token.position)
        if token.kind == TokenKind.IDENTIFIER:
            self.advance()
            return IdentifierNode(token.text, position=token.position)
        if token.kind == TokenKind.LEFT_PAREN:
            self.advance()
            if self.accept(TokenKind.RIGHT_PAREN):
                return TupleNode([], position=self.span(token.position))
            expression = self.parse_expression()
            self.match(TokenKind.RIGHT_PAREN, token)
            return expression
        if token.kind == TokenKind.LEFT_BRACE:
            return self.parse_block()
        if token.kind == TokenKind.LITERAL_ARRAY_OPEN:
            self.advance()
            return self.parse_literal_array(token)
        if token.kind == TokenKind.DICTIONARY_OPEN:
            return self.parse_dictionary()
        if token.kind == TokenKind.BYTE_ARRAY_OPEN:
            return self.parse_byte_array()
        quote_forms = {TokenKind.QUOTE: QuoteNode, TokenKind.QUASI_QUOTE: QuasiQuoteNode,
                       TokenKind.UNQUOTE: QuasiUnquoteNode, TokenKind.SPLICE: SpliceNode}
        if token.kind in quote_forms:
            self.advance()
            inner = self.parse_primary()
            return quote_forms[token.kind](inner, position=self.span(token.position))
        if token.kind in CLOSERS:
            raise self.error(f"unbalanced '{token.text}'", "unbalanced-delimiter")
        raise self.error(f"expected an expression, found {self.describe(token)}")

    def parse_block(self) -> AstNode:
        opener = self.match(TokenKind.LEFT_BRACE)
        if self.peek(TokenKind.COLON) or self.peek(TokenKind.COLON_COLON) or self.peek_operator("|"):
            return self.parse_lambda(opener)
        expressions = self.parse_expression_list((TokenKind.RIGHT_BRACE, TokenKind.END))
        self.match(TokenKind.RIGHT_BRACE, opener)
        return SequenceNode(expressions, position=self.span(opener.position))

    def parse_lambda(self, opener: Token) -> LambdaNode:
        arguments: List[LambdaArgumentNode] = []
        while self.peek(TokenKind.COLON):
            colon = self.advance()
            type_node = None
            if self.peek(TokenKind.LEFT_PAREN):
                type_node = self.parse_primary()
            if not self.peek(TokenKind.IDENTIFIER):
                raise self.error(f"expected an argument name in the lambda header, found "
                                 f"{self.describe(self.token)}", "malformed-lambda")
            name = self.advance()
            arguments.append(LambdaArgumentNode(name.text, type_node, position=self.span(colon.position)))
        result_type_node = None
        if self.accept(TokenKind.COLON_COLON):
            result_type_node = self.parse_unary()
        if not self.peek_operator("|"):
            raise self.error(f"expected '|' to end the lambda header, found {self.describe(self.token)}",
                             "malformed-lambda")
        bar = self.advance()
        expressions = self.parse_expression_list((TokenKind.RIGHT_BRACE, TokenKind.END))
        body_start = expressions[0].position if expressions else bar.position
        body = SequenceNode(expressions, position=body_start.to(self.previous.position) if expressions
                            else bar.position)
        self.match(TokenKind.RIGHT_BRACE, opener)
        return LambdaNode(arguments, result_type_node, body, position=self.span(opener.position))

    def parse_literal_array(self, opener: Token) -> LiteralArrayNode:
        elements: List[AstNode] = []
        while not self.peek(TokenKind.RIGHT_PAREN):
            token = self.token
            if token.kind in LITERAL_KINDS:
                self.advance()
                elements.append(LiteralNode(token.value, token.suffix, position=token.position))
            elif token.kind in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
                self.advance()
                elements.append(LiteralNode(intern_symbol(token.text), position=token.position))
            elif token.kind == TokenKind.BINARY_OPERATOR:
                self.advance()
                following = self.token
                if token.text == "-" and following.kind in (TokenKind.INTEGER, TokenKind.FLOAT) and \
                        not following.space_before:
                    self.advance()
                    elements.append(LiteralNode(-following.value, following.suffix,
                                                position=token.position.to(following.position)))
                else:
                    elements.append(LiteralNode(intern_symbol(token.text), position=token.position))
            elif token.kind in (TokenKind.LEFT_PAREN, TokenKind.LITERAL_ARRAY_OPEN):
                self.advance()
                elements.append(self.parse_literal_array(token))
            elif token.kind == TokenKind.END:
                raise self.error("unterminated literal array", "unbalanced-delimiter", opener)
            else:
                raise self.error(f"{self.describe(token)} cannot appear in a literal array")
        self.match(TokenKind.RIGHT_PAREN, opener)
        return LiteralArrayNode(elements, position=self.span(opener.position))

    def parse_dictionary(self) -> MakeDictionaryNode:
        opener = self.match(TokenKind.DICTIONARY_OPEN)
        pairs: List[DictionaryPairNode] = []
        while True:
            while self.accept(TokenKind.PERIOD):
                pass
            if self.peek(TokenKind.RIGHT_BRACE) or self.peek(TokenKind.END):
                break
            start = self.token
            if start.kind == TokenKind.KEYWORD:
                self.advance()
                key: AstNode = LiteralNode(intern_symbol(start.text[:-1]), position=start.position)
            else:
                key = self.parse_binary()
                self.match(TokenKind.COLON)
            value = self.parse_assignment()
            pairs.append(DictionaryPairNode(key, value, position=self.span(start.position)))
            if not self.peek(TokenKind.RIGHT_BRACE):
                self.match(TokenKind.PERIOD)
        self.match(TokenKind.RIGHT_BRACE, opener)
        return MakeDictionaryNode(pairs, position=self.span(opener.position))

    def parse_byte_array(self) -> MakeByteArrayNode:
        opener = self.match(TokenKind.BYTE_ARRAY_OPEN)
        elements: List[AstNode] = []
        while True:
            while self.accept(TokenKind.PERIOD):
                pass
            if self.peek(TokenKind.RIGHT_BRACKET) or self.peek(TokenKind.END):
                break
            elements.append(self.parse_assignment())
            if not self.peek(TokenKind.RIGHT_BRACKET):
                self.match(TokenKind.PERIOD)
        self.match(TokenKind.RIGHT_BRACKET, opener)
        return MakeByteArrayNode(elements, position=self.span(opener.position))


def parse(tokens: List[Token]) -> SequenceNode:
    """Parse a whole token stream; raises ParseError on the first error"""
    return Parser(tokens).parse_top_level()


def parse_with_recovery(tokens: List[Token]) -> Tuple[SequenceNode, List[ParseError]]:
    """Parse statement by statement, skipping to the next period after an error"""
    parser = Parser(tokens)
    expressions: List[AstNode] = []
    errors: List[ParseError] = []
    start = parser.token.position
    while not parser.peek(TokenKind.END):
        if parser.accept(TokenKind.PERIOD):
            continue
        try:
            expressions.append(parser.parse_expression())
            if not (parser.accept(TokenKind.PERIOD) or parser.peek(TokenKind.END) or parser.token.newline_before):
                raise parser.error(f"unexpected {parser.describe(parser.token)} after expression")
        except ParseError as e:
            errors.append(e)
            depth = 0
            while not parser.peek(TokenKind.END):
                token = parser.advance()
                if token.kind in (TokenKind.LEFT_PAREN, TokenKind.LEFT_BRACE, TokenKind.LEFT_BRACKET,
                                  TokenKind.LITERAL_ARRAY_OPEN, TokenKind.DICTIONARY_OPEN,
                                  TokenKind.BYTE_ARRAY_OPEN):
                    depth += 1
                elif token.kind in CLOSERS:
                    depth = max(0, depth - 1)
                elif token.kind == TokenKind.PERIOD and depth == 0:
                    break
    node = SequenceNode(expressions, position=start.to(parser.previous.position) if expressions else start)
    return node, errors


def parse_source(source: str, file_name: str = "<input>") -> SequenceNode:
    return parse(tokenize(source, file_name))
