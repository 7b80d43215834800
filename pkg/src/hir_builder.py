"""
Builds HIR from analyzed function definitions. Each analyzed node answers
generate_ssa_value_with by landing on a generate_<visitor> method here.
Mutable locals become alloca slots accessed through load and store; the
promotion pass later turns the ones that never escape into SSA values.
"""

import logging
from typing import Any, Dict, Optional

from .errors import EvaluationError
from .object_model import FunctionDefinition, NativeFunction, Symbol, LocalBinding, builtin_type
from .runtime import void
from .ast_nodes import LiteralNode
from .hir import HirOp, HirFunction, HirValue, BasicBlock

PASS_THROUGH_INTRINSICS = ("reference.address", "pointer.reference")


class HirBuilder:
    def __init__(self):
        self.logger = logging.getLogger("SysmelKernel")
        self.function: Optional[HirFunction] = None
        self.block: Optional[BasicBlock] = None
        self.locals: Dict[LocalBinding, HirValue] = {}

    def build(self, definition: FunctionDefinition) -> HirFunction:
        definition.ensure_analyzed()
        if definition.body_node is None:
            raise EvaluationError(f"{definition.display_name} has not been analyzed", definition.position,
                                  "runtime-error")
        self.function = HirFunction(definition.display_name, definition)
        self.locals = {}
        self.block = self.function.new_block()
        for binding in definition.arguments:
            self.locals[binding] = self.function.add_parameter(binding.value_type, binding.name.text)
        result = self.generate(definition.body_node)
        self.emit(HirOp.RETURN, [result])
        self.logger.debug(f"Built HIR for {definition.display_name}: {len(self.function.blocks)} blocks")
        return self.function

    # --- helpers ---
    def generate(self, node) -> HirValue:
        return node.generate_ssa_value_with(self)

    def emit(self, op: HirOp, operands=None, value_type=None, payload=None, position=None):
        return self.block.append(self.function.instruction(op, operands, value_type, payload, position))

    def constant(self, value: Any, value_type=None):
        return self.emit(HirOp.CONSTANT, [], value_type, value)

    def branch(self, target: BasicBlock):
        self.emit(HirOp.BRANCH, [], None, target)

    # --- nodes ---
    def generate_literal(self, node):
        return self.constant(node.value, node.analyzed_type)

    def generate_local_variable(self, node):
        return self.locals[node.binding]

    def generate_capture(self, node):
        return self.emit(HirOp.CAPTURE, [], node.analyzed_type, node.index)

    def generate_local_definition(self, node):
        value = self.generate(node.initializer)
        binding = node.binding
        if binding.mutable:
            slot = self.emit(HirOp.ALLOCA, [], node.analyzed_type, binding.value_type)
            self.emit(HirOp.STORE, [slot, value])
            self.locals[binding] = slot
            return slot
        self.locals[binding] = value
        return value

    def generate_application(self, node):
        functional = node.functional
        arguments = [self.generate(argument) for argument in node.arguments]
        callee = functional.value if isinstance(functional, LiteralNode) else None
        intrinsic_id = callee.intrinsic_id if isinstance(callee, NativeFunction) else None
        if intrinsic_id == "reference.load":
            return self.emit(HirOp.LOAD, arguments, node.analyzed_type)
        if intrinsic_id == "reference.store":
            self.emit(HirOp.STORE, arguments)
            return arguments[1]
        if intrinsic_id in PASS_THROUGH_INTRINSICS:
            return arguments[0]
        if isinstance(callee, (NativeFunction, FunctionDefinition)):
            return self.emit(HirOp.APPLY, arguments, node.analyzed_type, callee, node.position)
        function_value = self.generate(functional)
        return self.emit(HirOp.APPLY, [function_value, *arguments], node.analyzed_type, None, node.position)

    def generate_message_send(self, node):
        receiver = self.generate(node.receiver)
        arguments = [self.generate(argument) for argument in node.arguments]
        selector = node.selector.value
        if not isinstance(selector, Symbol):
            raise EvaluationError("computed selectors must be resolved before compilation", node.position,
                                  "runtime-error")
        return self.emit(HirOp.SEND, [receiver, *arguments], node.analyzed_type, selector, node.position)

    def generate_sequence(self, node):
        result = None
        for expression in node.expressions:
            result = self.generate(expression)
        return result if result is not None else self.constant(void(), builtin_type("Void"))

    def generate_closure(self, node):
        captures = [self.generate(capture) for capture in node.captures]
        return self.emit(HirOp.MAKE_CLOSURE, captures, node.analyzed_type, node.definition)

    def generate_if(self, node):
        condition = self.generate(node.condition)
        then_block = self.function.new_block()
        else_block = self.function.new_block()
        merge_block = self.function.new_block()
        self.emit(HirOp.COND_BRANCH, [condition], None, (then_block, else_block))

        self.block = then_block
        then_value = self.generate(node.then_branch)
        then_end = self.block
        self.branch(merge_block)

        self.block = else_block
        else_value = self.generate(node.else_branch) if node.else_branch is not None else None
        else_end = self.block
        self.branch(merge_block)

        self.block = merge_block
        if node.else_branch is None:
            return self.constant(void(), builtin_type("Void"))
        return self.emit(HirOp.PHI, [then_value, else_value], node.analyzed_type, (then_end, else_end))

    def generate_while(self, node):
        header = self.function.new_block()
        body = self.function.new_block()
        exit_block = self.function.new_block()
        self.branch(header)

        self.block = header
        condition = self.generate(node.condition)
        self.emit(HirOp.COND_BRANCH, [condition], None, (body, exit_block))

        self.block = body
        if node.body is not None:
            self.generate(node.body)
        self.branch(header)

        self.block = exit_block
        return self.constant(void(), builtin_type("Void"))

    def generate_slot_load(self, node):
        receiver = self.generate(node.receiver)
        return self.emit(HirOp.SLOT_GET, [receiver], node.analyzed_type, node.slot_index)

    def generate_slot_store(self, node):
        receiver = self.generate(node.receiver)
        value = self.generate(node.value)
        self.emit(HirOp.SLOT_SET, [receiver, value], None, node.slot_index)
        return value

    def generate_node(self, node):
        raise EvaluationError(f"cannot build HIR for an unanalyzed {node.type_name}", node.position,
                              "runtime-error")

    generate_identifier = generate_node
    generate_cascade = generate_node
    generate_cascade_message = generate_node
    generate_lambda = generate_node
    generate_lambda_argument = generate_node
    generate_tuple = generate_node
    generate_dictionary_pair = generate_node
    generate_make_dictionary = generate_node
    generate_make_byte_array = generate_node
    generate_literal_array = generate_node
    generate_quote = generate_node
    generate_quasi_quote = generate_node
    generate_quasi_unquote = generate_node
    generate_splice = generate_node


def build_hir(definition: FunctionDefinition) -> HirFunction:
    return HirBuilder().build(definition)
