"""
Compiles analyzed function definitions to register bytecode. Each analyzed
node answers compile_bytecodes_directly_with by landing on a compile_<visitor>
method here, which returns the register holding the node's value.
"""

import logging
from typing import Any, Dict, Optional

from .errors import EvaluationError
from .object_model import FunctionDefinition, NativeFunction, Symbol
from .runtime import void
from .ast_nodes import LiteralNode
from .bytecode import Opcode, Instruction, BytecodeFunction, verify_bytecode

PASS_THROUGH_INTRINSICS = ("reference.address", "pointer.reference")


class BytecodeCompiler:
    def __init__(self):
        self.logger = logging.getLogger("SysmelKernel")
        self.function: Optional[BytecodeFunction] = None
        self.literal_indices: Dict[int, int] = {}
        self.position = None

    # --- entry point ---
    def compile_function(self, definition: FunctionDefinition) -> BytecodeFunction:
        if definition.compiled_bytecode is not None:
            return definition.compiled_bytecode
        definition.ensure_analyzed()
        if definition.body_node is None:
            raise EvaluationError(f"{definition.display_name} has not been analyzed", definition.position,
                                  "runtime-error")
        saved = (self.function, self.literal_indices, self.position)
        self.function = BytecodeFunction(definition.display_name, definition.argument_count,
                                         len(definition.capture_bindings), register_count=definition.local_count)
        self.literal_indices = {}
        self.position = definition.position
        try:
            for index, local in enumerate(definition.arguments):
                self.emit(Opcode.LOAD_ARGUMENT, local.index, index)
            result = self.compile(definition.body_node)
            self.emit(Opcode.RETURN, result)
            compiled = self.function
        finally:
            self.function, self.literal_indices, self.position = saved
        problems = verify_bytecode(compiled)
        if problems:
            raise EvaluationError(f"invalid bytecode for {definition.display_name}: {problems[0]}",
                                  definition.position, "runtime-error")
        definition.compiled_bytecode = compiled
        self.logger.debug(f"Compiled {definition.display_name} to {len(compiled.instructions)} instructions")
        return compiled

    # --- emission helpers ---
    def compile(self, node) -> int:
        self.position = node.position
        return node.compile_bytecodes_directly_with(self)

    def emit(self, opcode: Opcode, *operands) -> int:
        self.function.instructions.append(Instruction(opcode, tuple(operands), self.position))
        return len(self.function.instructions) - 1

    def patch(self, index: int, target: int):
        instruction = self.function.instructions[index]
        self.function.instructions[index] = Instruction(instruction.opcode, instruction.operands[:-1] + (target,),
                                                        instruction.position)

    @property
    def here(self) -> int:
        return len(self.function.instructions)

    def new_register(self) -> int:
        self.function.register_count += 1
        return self.function.register_count - 1

    def literal_index(self, value: Any) -> int:
        index = self.literal_indices.get(id(value))
        if index is None:
            index = len(self.function.literals)
            self.function.literals.append(value)
            self.literal_indices[id(value)] = index
        return index

    def load_literal(self, value: Any) -> int:
        register = self.new_register()
        self.emit(Opcode.LOAD_LITERAL, register, self.literal_index(value))
        return register

    # --- nodes ---
    def compile_literal(self, node) -> int:
        return self.load_literal(node.value)

    def compile_local_variable(self, node) -> int:
        return node.binding.index

    def compile_capture(self, node) -> int:
        register = self.new_register()
        self.emit(Opcode.LOAD_CAPTURE, register, node.index)
        return register

    def compile_local_definition(self, node) -> int:
        value = self.compile(node.initializer)
        target = node.binding.index
        if node.binding.mutable:
            self.emit(Opcode.ALLOC_CELL, target)
            self.emit(Opcode.CELL_STORE, target, value)
        else:
            self.emit(Opcode.MOVE, target, value)
        return target

    def compile_application(self, node) -> int:
        functional = node.functional
        arguments = [self.compile(argument) for argument in node.arguments]
        self.position = node.position
        callee = functional.value if isinstance(functional, LiteralNode) else None
        intrinsic_id = callee.intrinsic_id if isinstance(callee, NativeFunction) else None
        if intrinsic_id == "reference.load":
            register = self.new_register()
            self.emit(Opcode.CELL_LOAD, register, arguments[0])
            return register
        if intrinsic_id == "reference.store":
            register = self.new_register()
            self.emit(Opcode.CELL_STORE, arguments[0], arguments[1])
            self.emit(Opcode.MOVE, register, arguments[1])
            return register
        if intrinsic_id in PASS_THROUGH_INTRINSICS:
            register = self.new_register()
            self.emit(Opcode.MOVE, register, arguments[0])
            return register
        register = self.new_register()
        if intrinsic_id is not None:
            self.emit(Opcode.INTRINSIC, register, intrinsic_id, tuple(arguments))
        else:
            function_register = self.compile(functional)
            self.position = node.position
            self.emit(Opcode.CALL, register, function_register, tuple(arguments))
        return register

    def compile_message_send(self, node) -> int:
        receiver = self.compile(node.receiver)
        arguments = [self.compile(argument) for argument in node.arguments]
        selector = node.selector.value
        if not isinstance(selector, Symbol):
            raise EvaluationError("computed selectors must be resolved before compilation", node.position,
                                  "runtime-error")
        self.position = node.position
        register = self.new_register()
        self.emit(Opcode.SEND, register, self.literal_index(selector), receiver, tuple(arguments))
        return register

    def compile_sequence(self, node) -> int:
        result = None
        for expression in node.expressions:
            result = self.compile(expression)
        return result if result is not None else self.load_literal(void())

    def compile_closure(self, node) -> int:
        captures = tuple(self.compile(capture) for capture in node.captures)
        register = self.new_register()
        self.emit(Opcode.MAKE_CLOSURE, register, self.literal_index(node.definition), captures)
        return register

    def compile_if(self, node) -> int:
        condition = self.compile(node.condition)
        result = self.new_register()
        to_else = self.emit(Opcode.JUMP_IF_FALSE, condition, 0)
        then_value = self.compile(node.then_branch)
        if node.else_branch is not None:
            self.emit(Opcode.MOVE, result, then_value)
        to_end = self.emit(Opcode.JUMP, 0)
        self.patch(to_else, self.here)
        if node.else_branch is not None:
            self.emit(Opcode.MOVE, result, self.compile(node.else_branch))
        self.patch(to_end, self.here)
        if node.else_branch is None:
            self.emit(Opcode.LOAD_LITERAL, result, self.literal_index(void()))
        return result

    def compile_while(self, node) -> int:
        start = self.here
        condition = self.compile(node.condition)
        to_end = self.emit(Opcode.JUMP_IF_FALSE, condition, 0)
        if node.body is not None:
            self.compile(node.body)
        self.emit(Opcode.JUMP, start)
        self.patch(to_end, self.here)
        return self.load_literal(void())

    def compile_slot_load(self, node) -> int:
        receiver = self.compile(node.receiver)
        register = self.new_register()
        self.emit(Opcode.SLOT_LOAD, register, receiver, node.slot_index)
        return register

    def compile_slot_store(self, node) -> int:
        receiver = self.compile(node.receiver)
        value = self.compile(node.value)
        self.emit(Opcode.SLOT_STORE, receiver, node.slot_index, value)
        return value

    def compile_node(self, node) -> int:
        raise EvaluationError(f"cannot compile an unanalyzed {node.type_name}", node.position, "runtime-error")

    compile_identifier = compile_node
    compile_cascade = compile_node
    compile_cascade_message = compile_node
    compile_lambda = compile_node
    compile_lambda_argument = compile_node
    compile_tuple = compile_node
    compile_dictionary_pair = compile_node
    compile_make_dictionary = compile_node
    compile_make_byte_array = compile_node
    compile_literal_array = compile_node
    compile_quote = compile_node
    compile_quasi_quote = compile_node
    compile_quasi_unquote = compile_node
    compile_splice = compile_node


def compile_to_bytecode(definition: FunctionDefinition) -> BytecodeFunction:
    return BytecodeCompiler().compile_function(definition)
