"""
Quasi-quotation: a quasi-quoted tree becomes a template plus the expressions
of its holes; running the application rebuilds the tree with the hole values
substituted, splicing list values into argument and element lists.
"""

import dataclasses
from typing import Any, Dict, List

from .errors import SemanticError, EvaluationError
from .object_model import ObjectValue, NativeFunction, Symbol, intern_symbol, builtin_type
from .runtime import sequence_items, print_string, string_value
from .intrinsics import register
from .ast_nodes import (AstNode, LiteralNode, IdentifierNode, FunctionApplicationNode, QuasiQuoteNode,
                        QuasiUnquoteNode, SpliceNode)


class QuasiQuoteTemplate(ObjectValue):
    """An unanalyzed tree and the hole nodes inside it, in evaluation order"""
    type_name = "QuasiQuoteTemplate"

    def __init__(self, template: AstNode, holes: List[AstNode]):
        self.template = template
        self.holes = holes

    def describe(self) -> str:
        return f"a template with {len(self.holes)} holes"


def collect_holes(node: AstNode) -> List[AstNode]:
    holes: List[AstNode] = []

    def visit(current: AstNode, depth: int, in_list: bool):
        if isinstance(current, QuasiQuoteNode):
            visit(current.inner, depth + 1, False)
            return
        if isinstance(current, (QuasiUnquoteNode, SpliceNode)):
            if depth == 1:
                if isinstance(current, SpliceNode) and not in_list:
                    raise SemanticError("a splice must appear inside an argument or element list",
                                        current.position, "macro-error")
                holes.append(current)
            else:
                visit(current.inner, depth - 1, False)
            return
        for name in current.child_fields:
            value = getattr(current, name)
            if isinstance(value, list):
                for child in value:
                    if isinstance(child, AstNode):
                        visit(child, depth, True)
            elif isinstance(value, AstNode):
                visit(value, depth, False)

    visit(node, 1, False)
    return holes


def _as_node(value: Any) -> AstNode:
    if isinstance(value, AstNode):
        return value
    return LiteralNode(value)


def _as_selector(value: Any, position) -> AstNode:
    if isinstance(value, IdentifierNode):
        return LiteralNode(intern_symbol(value.name), position=value.position)
    if isinstance(value, LiteralNode) and isinstance(value.value, (Symbol, str)):
        text = value.value if isinstance(value.value, str) else value.value.text
        return LiteralNode(intern_symbol(text), position=value.position)
    if isinstance(value, Symbol):
        return LiteralNode(value, position=position)
    if isinstance(value, ObjectValue) and value.object_type is builtin_type("String"):
        return LiteralNode(intern_symbol(string_value(value)), position=position)
    raise EvaluationError(f"{print_string(value)} cannot be used as a selector", position, "type-mismatch")


def instantiate(template: QuasiQuoteTemplate, *values) -> AstNode:
    if len(values) != len(template.holes):
        raise EvaluationError(f"template expects {len(template.holes)} values, got {len(values)}",
                              kind="arity-mismatch")
    substitutions: Dict[int, Any] = {id(hole): value for hole, value in zip(template.holes, values)}

    def rebuild(node: AstNode) -> AstNode:
        if id(node) in substitutions:
            return _as_node(substitutions[id(node)])
        changes = {}
        for name in node.child_fields:
            value = getattr(node, name)
            if isinstance(value, list):
                items = []
                for child in value:
                    if isinstance(child, SpliceNode) and id(child) in substitutions:
                        items.extend(_as_node(item) for item in sequence_items(substitutions[id(child)]))
                    elif isinstance(child, AstNode):
                        items.append(rebuild(child))
                    else:
                        items.append(child)
                changes[name] = items
            elif isinstance(value, AstNode):
                if name == "selector" and id(value) in substitutions:
                    changes[name] = _as_selector(substitutions[id(value)], value.position)
                else:
                    changes[name] = rebuild(value)
        return dataclasses.replace(node, **changes)

    return rebuild(template.template)


INSTANTIATE = register(NativeFunction("quasiQuote:instantiate", [], None, instantiate,
                                      intrinsic_id="quasiquote.instantiate", variadic=True))


def expand_quasi_quote(analyzer, node: QuasiQuoteNode, context) -> AstNode:
    """A quasi-quote analyzes to an application that builds the tree at run time"""
    holes = collect_holes(node.inner)
    template = QuasiQuoteTemplate(node.inner, holes)
    arguments = [analyzer.literal(template, node.position)]
    arguments.extend(analyzer.analyze_argument(hole.inner, context) for hole in holes)
    functional = analyzer.literal(INSTANTIATE, node.position)
    application = FunctionApplicationNode(functional, arguments, position=node.position)
    return analyzer.typed(application, builtin_type("ASTNode"))
