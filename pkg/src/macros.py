"""
Control-flow and definition macros. Each macro is a native function that
receives the analyzer, the send node, the analyzed receiver and the
unexpanded arguments, and returns the node to analyze in place of the send.
"""

from typing import Dict, List, Optional

from .errors import SemanticError
from .object_model import NativeFunction, Environment, Symbol, intern_symbol, builtin_type
from .type_system import TypeObject, MethodEntry, common_type
from .runtime import make_boolean, void
from .ast_nodes import AstNode, LiteralNode, LambdaNode, IfNode, WhileNode, FunctionApplicationNode
from .intrinsics import intrinsic


def _macro(name: str, implementation) -> NativeFunction:
    return NativeFunction(name, [], builtin_type("ASTNode"), implementation, is_macro=True)


def analyze_condition(analyzer, node: AstNode, context) -> AstNode:
    condition = analyzer.analyze_argument(node, context.expecting(None))
    condition_type = condition.analyzed_type
    if not (condition_type.is_dynamic or condition_type.is_subtype_of(builtin_type("Boolean"))):
        raise SemanticError(f"a condition must be a Boolean, got {condition_type}", node.position, "type-mismatch")
    return condition


def analyze_branch(analyzer, node: AstNode, context, expected=None) -> AstNode:
    """Blocks given to control-flow macros are inlined, not turned into closures"""
    if isinstance(node, LambdaNode) and not node.arguments and node.result_type_node is None:
        node = node.body
    return analyzer.analyze_argument(node, context.expecting(expected), expected)


def make_if(analyzer, node: AstNode, condition: AstNode, then_branch: AstNode,
            else_branch: Optional[AstNode]) -> AstNode:
    if else_branch is None:
        result_type = builtin_type("Void")
    else:
        then_type, else_type = then_branch.analyzed_type, else_branch.analyzed_type
        if then_type.is_dynamic or else_type.is_dynamic:
            result_type = builtin_type("Dynamic")
        else:
            result_type = common_type(then_type, else_type) or builtin_type("Dynamic")
    return analyzer.typed(IfNode(condition, then_branch, else_branch, position=node.position), result_type)


# --- receiver-less macros ---
def if_then(analyzer, node, receiver, arguments: List[AstNode], context):
    condition = analyze_condition(analyzer, arguments[0], context)
    return make_if(analyzer, node, condition, analyze_branch(analyzer, arguments[1], context), None)


def if_then_else(analyzer, node, receiver, arguments: List[AstNode], context):
    condition = analyze_condition(analyzer, arguments[0], context)
    expected = context.expected_type
    then_branch = analyze_branch(analyzer, arguments[1], context, expected)
    else_branch = analyze_branch(analyzer, arguments[2], context, expected)
    return make_if(analyzer, node, condition, then_branch, else_branch)


def while_do(analyzer, node, receiver, arguments: List[AstNode], context):
    condition = analyze_condition(analyzer, arguments[0], context)
    body = analyze_branch(analyzer, arguments[1], context)
    return analyzer.typed(WhileNode(condition, body, position=node.position), builtin_type("Void"))


def _symbol_argument(analyzer, node: AstNode, context) -> Symbol:
    analyzed = analyzer.analyze_expression(node, context.expecting(None))
    if isinstance(analyzed, LiteralNode) and isinstance(analyzed.value, Symbol):
        return analyzed.value
    raise SemanticError("a variable name must be a literal symbol", node.position, "type-mismatch")


def let_with(analyzer, node, receiver, arguments: List[AstNode], context):
    name = _symbol_argument(analyzer, arguments[0], context)
    return analyzer.define_variable(name, None, False, arguments[1], context, node.position)


def let_type_with(analyzer, node, receiver, arguments: List[AstNode], context):
    name = _symbol_argument(analyzer, arguments[0], context)
    value_type = analyzer.evaluate_type(arguments[1], context)
    return analyzer.define_variable(name, value_type, False, arguments[2], context, node.position)


ENVIRONMENT_MACROS = {
    "if:then:": if_then,
    "if:then:else:": if_then_else,
    "while:do:": while_do,
    "let:with:": let_with,
    "let:type:with:": let_type_with,
}


# --- Boolean macros ---
def if_true(analyzer, node, receiver, arguments, context):
    return make_if(analyzer, node, analyze_condition(analyzer, receiver, context),
                   analyze_branch(analyzer, arguments[0], context), None)


def if_false(analyzer, node, receiver, arguments, context):
    condition = analyze_condition(analyzer, receiver, context)
    empty = analyzer.literal(void(), node.position)
    return make_if(analyzer, node, condition, empty, analyze_branch(analyzer, arguments[0], context))


def if_true_if_false(analyzer, node, receiver, arguments, context):
    expected = context.expected_type
    return make_if(analyzer, node, analyze_condition(analyzer, receiver, context),
                   analyze_branch(analyzer, arguments[0], context, expected),
                   analyze_branch(analyzer, arguments[1], context, expected))


def if_false_if_true(analyzer, node, receiver, arguments, context):
    expected = context.expected_type
    return make_if(analyzer, node, analyze_condition(analyzer, receiver, context),
                   analyze_branch(analyzer, arguments[1], context, expected),
                   analyze_branch(analyzer, arguments[0], context, expected))


def and_macro(analyzer, node, receiver, arguments, context):
    condition = analyze_condition(analyzer, receiver, context)
    right = analyze_condition(analyzer, _inline_block(arguments[0]), context)
    result = make_if(analyzer, node, condition, right, analyzer.literal(make_boolean(False), node.position))
    return analyzer.typed(result, builtin_type("Boolean"))


def or_macro(analyzer, node, receiver, arguments, context):
    condition = analyze_condition(analyzer, receiver, context)
    right = analyze_condition(analyzer, _inline_block(arguments[0]), context)
    result = make_if(analyzer, node, condition, analyzer.literal(make_boolean(True), node.position), right)
    return analyzer.typed(result, builtin_type("Boolean"))


def _inline_block(node: AstNode) -> AstNode:
    if isinstance(node, LambdaNode) and not node.arguments:
        return node.body
    return node


BOOLEAN_MACROS = {
    "ifTrue:": if_true,
    "ifFalse:": if_false,
    "ifTrue:ifFalse:": if_true_if_false,
    "ifFalse:ifTrue:": if_false_if_true,
    "and:": and_macro,
    "or:": or_macro,
}


# --- instantiation ---
def new_instance(analyzer, node, receiver, arguments, context):
    """`Type new`: a fresh instance statically typed as the receiver type"""
    if isinstance(receiver, LiteralNode) and isinstance(receiver.value, TypeObject):
        instance_type = receiver.value
    else:
        instance_type = builtin_type("Dynamic")
    basic_new = analyzer.literal(intrinsic("Object class::basicNew"), node.position)
    application = FunctionApplicationNode(basic_new, [receiver], position=node.position)
    return analyzer.typed(application, instance_type)


def install_control_macros(types: Dict[str, TypeObject]):
    """Boolean macros on Boolean and Dynamic, and the type-side new of Object"""
    for selector, implementation in BOOLEAN_MACROS.items():
        for owner in (types["Boolean"], types["Dynamic"]):
            owner.add_method(MethodEntry(intern_symbol(selector), _macro(selector, implementation), is_macro=True))
    types["Object"].add_method(MethodEntry(intern_symbol("new"), _macro("new", new_instance), is_macro=True),
                               type_side=True)


def install_environment_macros(environment: Environment):
    for selector, implementation in ENVIRONMENT_MACROS.items():
        environment.define(selector, _macro(selector, implementation))
