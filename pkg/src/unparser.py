"""
Turns AST nodes back into source text that re-parses to an equal tree.
"""

import re
from typing import Any, List

from .object_model import Symbol, Immediate, ImmediateTag, ObjectValue
from .tokenizer import OPERATOR_CHARACTERS
from .ast_nodes import (AstNode, LiteralNode, IdentifierNode, MessageSendNode, FunctionApplicationNode,
                        CascadeMessageNode, CascadeNode, SequenceNode, LambdaNode, TupleNode, MakeDictionaryNode,
                        MakeByteArrayNode, LiteralArrayNode, QuoteNode, QuasiQuoteNode, QuasiUnquoteNode,
                        SpliceNode, LocalVariableNode, CaptureNode, LocalDefinitionNode, SlotLoadNode,
                        SlotStoreNode, ClosureNode, IfNode, WhileNode)

# Precedence levels, tightest first.
PRIMARY, POSTFIX, BINARY, KEYWORD, LOW, CASCADE, ASSIGNMENT, TUPLE = range(8)

_IDENTIFIER_RE = re.compile(r'[A-Za-z_]\w*(::[A-Za-z_]\w*)*\Z')
_KEYWORD_SELECTOR_RE = re.compile(r'([A-Za-z_]\w*:)+\Z')
_ESCAPES = {'\\': '\\\\', '\n': '\\n', '\r': '\\r', '\t': '\\t', '\0': '\\0'}


def _escape(text: str, quote: str) -> str:
    return ''.join(_ESCAPES.get(c, '\\' + c if c == quote else c) for c in text)


def _is_operator(text: str) -> bool:
    return bool(text) and all(c in OPERATOR_CHARACTERS for c in text)


def _symbol_text(symbol: Symbol) -> str:
    text = symbol.text
    if _IDENTIFIER_RE.match(text) or _KEYWORD_SELECTOR_RE.match(text) or _is_operator(text):
        return "#" + text
    return '#"' + _escape(text, '"') + '"'


def _keyword_parts(selector: str) -> List[str]:
    return [part + ":" for part in selector.split(":")[:-1]]


def unparse_literal_value(value: Any, suffix=None) -> str:
    suffix = suffix or ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return f"{value}{suffix}"
    if isinstance(value, float):
        text = repr(value)
        if not any(c in text for c in '.e'):
            text += ".0"
        return text + suffix
    if isinstance(value, str):
        return '"' + _escape(value, '"') + '"'
    if isinstance(value, Symbol):
        return _symbol_text(value)
    if isinstance(value, Immediate) and value.tag == ImmediateTag.CHARACTER:
        return "'" + _escape(chr(value.payload), "'") + "'"
    if isinstance(value, ObjectValue):
        from .runtime import print_string
        return print_string(value)
    return repr(value)


class Unparser:
    def unparse(self, node: AstNode, limit: int = TUPLE) -> str:
        text, level = getattr(self, "unparse_" + node.visitor_name)(node)
        return f"({text})" if level > limit else text

    # --- leaves ---
    def unparse_literal(self, node: LiteralNode):
        return unparse_literal_value(node.value, node.suffix), PRIMARY

    def unparse_identifier(self, node: IdentifierNode):
        return node.name, PRIMARY

    # --- sends ---
    def literal_selector(self, selector: AstNode):
        if isinstance(selector, LiteralNode) and isinstance(selector.value, Symbol):
            return selector.value.text
        return None

    def message_text(self, receiver_text: str, selector: AstNode, arguments: List[AstNode]):
        text = self.literal_selector(selector)
        if text is None:
            selector_text = self.unparse(selector, PRIMARY)
            if arguments:
                selector_text += "(" + ", ".join(self.unparse(a, ASSIGNMENT) for a in arguments) + ")"
            return f"{receiver_text} {selector_text}".strip(), POSTFIX
        if text in ("[]:", "{}:", "#[]:") and len(arguments) == 1:
            argument = arguments[0]
            if text == "[]:":
                inner = "" if isinstance(argument, TupleNode) and not argument.elements else self.unparse(argument)
                return f"{receiver_text}[{inner}]", POSTFIX
            if text == "{}:" and isinstance(argument, (SequenceNode, LambdaNode)):
                return receiver_text + self.unparse(argument, PRIMARY), POSTFIX
            if text == "#[]:" and isinstance(argument, MakeByteArrayNode):
                return receiver_text + self.unparse(argument, PRIMARY), POSTFIX
        if _KEYWORD_SELECTOR_RE.match(text) and len(_keyword_parts(text)) == len(arguments):
            parts = [f"{part} {self.unparse(arg, BINARY)}" for part, arg in zip(_keyword_parts(text), arguments)]
            return f"{receiver_text} {' '.join(parts)}".strip(), KEYWORD
        if _is_operator(text) and len(arguments) == 1:
            return f"{receiver_text} {text} {self.unparse(arguments[0], POSTFIX)}", BINARY
        if _IDENTIFIER_RE.match(text) and not arguments:
            return f"{receiver_text} {text}", POSTFIX
        raise ValueError(f"selector {text!r} cannot be written with {len(arguments)} arguments")

    def receiver_limit(self, selector: AstNode, arguments: List[AstNode]) -> int:
        text = self.literal_selector(selector)
        if text is None or text in ("[]:", "{}:", "#[]:") or (_IDENTIFIER_RE.match(text or "") and not arguments):
            return POSTFIX
        return BINARY

    def unparse_message_send(self, node: MessageSendNode):
        text = self.literal_selector(node.selector)
        if text == ":=" and node.receiver is not None and len(node.arguments) == 1:
            return (f"{self.unparse(node.receiver, CASCADE)} := {self.unparse(node.arguments[0], ASSIGNMENT)}",
                    ASSIGNMENT)
        if node.receiver is None:
            return self.message_text("", node.selector, node.arguments)
        receiver = self.unparse(node.receiver, self.receiver_limit(node.selector, node.arguments))
        return self.message_text(receiver, node.selector, node.arguments)

    def unparse_application(self, node: FunctionApplicationNode):
        arguments = ", ".join(self.unparse(argument, ASSIGNMENT) for argument in node.arguments)
        return f"{self.unparse(node.functional, POSTFIX)}({arguments})", POSTFIX

    def unparse_cascade(self, node: CascadeNode):
        first, rest = node.messages[0], node.messages[1:]
        receiver = self.unparse(node.receiver, self.receiver_limit(first.selector, first.arguments))
        text, _ = self.message_text(receiver, first.selector, first.arguments)
        for message in rest:
            message_text, _ = self.message_text("", message.selector, message.arguments)
            text += "; " + message_text.strip()
        return text, CASCADE

    def unparse_cascade_message(self, node: CascadeMessageNode):
        text, level = self.message_text("", node.selector, node.arguments)
        return text.strip(), level

    # --- blocks and collections ---
    def statements(self, expressions: List[AstNode], separator: str = ". ") -> str:
        return separator.join(self.unparse(expression) for expression in expressions)

    def unparse_sequence(self, node: SequenceNode):
        return "{" + self.statements(node.expressions) + "}", PRIMARY

    def unparse_lambda(self, node: LambdaNode):
        header = []
        for argument in node.arguments:
            if argument.type_node is not None:
                header.append(f":({self.unparse(argument.type_node)}){argument.name}")
            else:
                header.append(f":{argument.name}")
        if node.result_type_node is not None:
            header.append(":: " + self.unparse(node.result_type_node, POSTFIX))
        body = node.body.expressions if isinstance(node.body, SequenceNode) else [node.body]
        return "{" + " ".join(header) + " | " + self.statements(body) + "}", PRIMARY

    def unparse_tuple(self, node: TupleNode):
        return "(" + ", ".join(self.unparse(element, ASSIGNMENT) for element in node.elements) + ")", PRIMARY

    def unparse_make_dictionary(self, node: MakeDictionaryNode):
        pairs = []
        for pair in node.pairs:
            key = pair.key
            if isinstance(key, LiteralNode) and isinstance(key.value, Symbol) and _IDENTIFIER_RE.match(
                    key.value.text) and "::" not in key.value.text:
                pairs.append(f"{key.value.text}: {self.unparse(pair.value, ASSIGNMENT)}")
            else:
                pairs.append(f"{self.unparse(key, BINARY)} : {self.unparse(pair.value, ASSIGNMENT)}")
        return "#{" + ". ".join(pairs) + "}", PRIMARY

    def unparse_make_byte_array(self, node: MakeByteArrayNode):
        return "#[" + " . ".join(self.unparse(element, ASSIGNMENT) for element in node.elements) + "]", PRIMARY

    def literal_array_element(self, node: AstNode) -> str:
        if isinstance(node, LiteralArrayNode):
            return "(" + " ".join(self.literal_array_element(e) for e in node.elements) + ")"
        if isinstance(node, LiteralNode) and isinstance(node.value, Symbol) and (
                _IDENTIFIER_RE.match(node.value.text) or _KEYWORD_SELECTOR_RE.match(node.value.text)):
            return node.value.text
        return self.unparse(node, PRIMARY)

    def unparse_literal_array(self, node: LiteralArrayNode):
        return "#(" + " ".join(self.literal_array_element(e) for e in node.elements) + ")", PRIMARY

    # --- quotation ---
    def unparse_quote(self, node: QuoteNode):
        return "`'" + self.unparse(node.inner, PRIMARY), PRIMARY

    def unparse_quasi_quote(self, node: QuasiQuoteNode):
        return "``" + self.unparse(node.inner, PRIMARY), PRIMARY

    def unparse_quasi_unquote(self, node: QuasiUnquoteNode):
        return "`," + self.unparse(node.inner, PRIMARY), PRIMARY

    def unparse_splice(self, node: SpliceNode):
        return "`@" + self.unparse(node.inner, PRIMARY), PRIMARY

    # --- analyzed forms, for dumps ---
    def unparse_local_variable(self, node: LocalVariableNode):
        return node.binding.name.text, PRIMARY

    def unparse_capture(self, node: CaptureNode):
        return node.binding.name.text, PRIMARY

    def unparse_local_definition(self, node: LocalDefinitionNode):
        mutable = " mutable" if node.binding.mutable else ""
        return f"let {node.binding.name.text}{mutable} := {self.unparse(node.initializer, ASSIGNMENT)}", ASSIGNMENT

    def unparse_slot_load(self, node: SlotLoadNode):
        return f"{self.unparse(node.receiver, POSTFIX)} slotAt: {node.slot_index}", KEYWORD

    def unparse_slot_store(self, node: SlotStoreNode):
        return (f"{self.unparse(node.receiver, POSTFIX)} slotAt: {node.slot_index} put: "
                f"{self.unparse(node.value, BINARY)}", KEYWORD)

    def unparse_closure(self, node: ClosureNode):
        return f"<closure {node.definition.display_name}>", PRIMARY

    def unparse_if(self, node: IfNode):
        text = f"if: {self.unparse(node.condition, BINARY)} then: {self.unparse(node.then_branch, BINARY)}"
        if node.else_branch is not None:
            text += f" else: {self.unparse(node.else_branch, BINARY)}"
        return text, KEYWORD

    def unparse_while(self, node: WhileNode):
        body = self.unparse(node.body, BINARY) if node.body is not None else "{}"
        return f"while: {self.unparse(node.condition, BINARY)} do: {body}", KEYWORD

    def unparse_lambda_argument(self, node):
        return node.name, PRIMARY

    def unparse_dictionary_pair(self, node):
        return f"{self.unparse(node.key, BINARY)} : {self.unparse(node.value, ASSIGNMENT)}", ASSIGNMENT


def unparse(node: AstNode) -> str:
    """Source text for node; a top-level sequence prints as period terminated statements"""
    unparser = Unparser()
    if isinstance(node, SequenceNode):
        return "".join(unparser.unparse(expression) + ".\n" for expression in node.expressions)
    return unparser.unparse(node)
