"""
Tree-walking evaluator over analyzed nodes. It is the reference semantics the
other engines are compared against, and the engine compile-time folding and
macro expansion run on.
"""

import logging
from typing import Any, List, Sequence

from .errors import EvaluationError
from .object_model import FunctionDefinition, NativeFunction, Closure, MemoryHandle, SlotTuple
from .runtime import (prepare_call, prepare_send, check_arity, call_native, is_true, void, symbol_of,
                      print_string)

DEPTH_LIMIT = 10000


class Activation:
    """Locals and captures of one running function"""
    __slots__ = ("definition", "locals", "captures")

    def __init__(self, definition: FunctionDefinition, captures: Sequence[Any]):
        self.definition = definition
        self.locals: List[Any] = [None] * definition.local_count
        self.captures = list(captures)


class Evaluator:
    def __init__(self, depth_limit: int = DEPTH_LIMIT):
        self.depth_limit = depth_limit
        self.depth = 0
        self.logger = logging.getLogger("SysmelKernel")

    # --- calls ---
    def apply(self, callee: Any, arguments: Sequence[Any], position=None) -> Any:
        target, captures, arguments = prepare_call(callee, list(arguments), position)
        if isinstance(target, NativeFunction):
            return call_native(target, arguments, position)
        return self.call_function(target, captures, arguments, position)

    def call_function(self, definition: FunctionDefinition, captures: Sequence[Any], arguments: Sequence[Any],
                      position=None) -> Any:
        definition.ensure_analyzed()
        check_arity(definition, list(arguments), position)
        if self.depth >= self.depth_limit:
            raise EvaluationError(f"call depth exceeded {self.depth_limit} in {definition.display_name}",
                                  position, "stack-overflow")
        activation = Activation(definition, captures)
        for local, value in zip(definition.arguments, arguments):
            activation.locals[local.index] = value
        self.depth += 1
        try:
            return self.evaluate(definition.body_node, activation)
        except RecursionError:
            raise EvaluationError(f"host stack exhausted in {definition.display_name}", position,
                                  "stack-overflow") from None
        finally:
            self.depth -= 1

    def evaluate(self, node, activation: Activation) -> Any:
        return node.evaluate_with_environment(self, activation)

    # --- analyzed nodes ---
    def evaluate_literal(self, node, activation):
        return node.value

    def evaluate_local_variable(self, node, activation):
        return activation.locals[node.binding.index]

    def evaluate_capture(self, node, activation):
        return activation.captures[node.index]

    def evaluate_local_definition(self, node, activation):
        value = self.evaluate(node.initializer, activation)
        if node.binding.mutable:
            activation.locals[node.binding.index] = MemoryHandle.new_cell(value)
        else:
            activation.locals[node.binding.index] = value
        return activation.locals[node.binding.index]

    def evaluate_application(self, node, activation):
        callee = self.evaluate(node.functional, activation)
        arguments = [self.evaluate(argument, activation) for argument in node.arguments]
        return self.apply(callee, arguments, node.position)

    def evaluate_message_send(self, node, activation):
        receiver = self.evaluate(node.receiver, activation)
        selector = symbol_of(self.evaluate(node.selector, activation))
        arguments = [self.evaluate(argument, activation) for argument in node.arguments]
        target, captures, arguments = prepare_send(receiver, selector, arguments, node.position)
        if isinstance(target, NativeFunction):
            return call_native(target, arguments, node.position)
        return self.call_function(target, captures, arguments, node.position)

    def evaluate_sequence(self, node, activation):
        value = void()
        for expression in node.expressions:
            value = self.evaluate(expression, activation)
        return value

    def evaluate_closure(self, node, activation):
        captures = [self.evaluate(capture, activation) for capture in node.captures]
        return Closure(node.definition, captures)

    def evaluate_if(self, node, activation):
        condition = is_true(self.evaluate(node.condition, activation))
        if node.else_branch is None:
            if condition:
                self.evaluate(node.then_branch, activation)
            return void()
        return self.evaluate(node.then_branch if condition else node.else_branch, activation)

    def evaluate_while(self, node, activation):
        while is_true(self.evaluate(node.condition, activation)):
            if node.body is not None:
                self.evaluate(node.body, activation)
        return void()

    def evaluate_slot_load(self, node, activation):
        receiver = self.evaluate(node.receiver, activation)
        if not isinstance(receiver, SlotTuple):
            raise EvaluationError(f"{print_string(receiver)} has no slots", node.position, "does-not-understand")
        return receiver.slots[node.slot_index]

    def evaluate_slot_store(self, node, activation):
        receiver = self.evaluate(node.receiver, activation)
        value = self.evaluate(node.value, activation)
        if not isinstance(receiver, SlotTuple):
            raise EvaluationError(f"{print_string(receiver)} has no slots", node.position, "does-not-understand")
        receiver.slots[node.slot_index] = value
        return value

    def evaluate_node(self, node, activation):
        raise EvaluationError(f"cannot evaluate an unanalyzed {node.type_name}", node.position, "runtime-error")

    evaluate_identifier = evaluate_node
    evaluate_cascade = evaluate_node
    evaluate_cascade_message = evaluate_node
    evaluate_lambda = evaluate_node
    evaluate_lambda_argument = evaluate_node
    evaluate_tuple = evaluate_node
    evaluate_dictionary_pair = evaluate_node
    evaluate_make_dictionary = evaluate_node
    evaluate_make_byte_array = evaluate_node
    evaluate_literal_array = evaluate_node
    evaluate_quote = evaluate_node
    evaluate_quasi_quote = evaluate_node
    evaluate_quasi_unquote = evaluate_node
    evaluate_splice = evaluate_node
