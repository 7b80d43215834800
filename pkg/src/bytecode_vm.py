"""
Register bytecode virtual machine. Calls between bytecode functions push
frames on an explicit stack, so deep recursion in the guest does not consume
the host stack; natives run directly.
"""

import logging
from typing import Any, List, Sequence

from .errors import EvaluationError
from .object_model import FunctionDefinition, NativeFunction, Closure, MemoryHandle, SlotTuple
from .runtime import prepare_call, prepare_send, check_arity, call_native, is_true, print_string
from .intrinsics import intrinsic
from .bytecode import Opcode, BytecodeFunction
from .bytecode_compiler import BytecodeCompiler

DEPTH_LIMIT = 10000


class Frame:
    __slots__ = ("function", "registers", "arguments", "captures", "pc", "result_register")

    def __init__(self, function: BytecodeFunction, captures: Sequence[Any], arguments: Sequence[Any],
                 result_register: int = -1):
        self.function = function
        self.registers: List[Any] = [None] * function.register_count
        self.arguments = list(arguments)
        self.captures = list(captures)
        self.pc = 0
        self.result_register = result_register


class BytecodeVM:
    def __init__(self, compiler: BytecodeCompiler = None, depth_limit: int = DEPTH_LIMIT):
        self.compiler = compiler or BytecodeCompiler()
        self.depth_limit = depth_limit
        self.logger = logging.getLogger("SysmelKernel")

    def function_for(self, definition: FunctionDefinition) -> BytecodeFunction:
        return self.compiler.compile_function(definition)

    def call(self, callee: Any, arguments: Sequence[Any], position=None) -> Any:
        target, captures, arguments = prepare_call(callee, list(arguments), position)
        if isinstance(target, NativeFunction):
            return call_native(target, arguments, position)
        return self.run(target, captures, arguments, position)

    def _enter(self, frames: List[Frame], definition: FunctionDefinition, captures, arguments, position,
               result_register: int = -1):
        check_arity(definition, arguments, position)
        if len(frames) >= self.depth_limit:
            raise EvaluationError(f"call depth exceeded {self.depth_limit} in {definition.display_name}",
                                  position, "stack-overflow")
        frames.append(Frame(self.function_for(definition), captures, arguments, result_register))

    def run(self, definition: FunctionDefinition, captures: Sequence[Any], arguments: Sequence[Any],
            position=None) -> Any:
        frames: List[Frame] = []
        self._enter(frames, definition, captures, list(arguments), position)
        while True:
            frame = frames[-1]
            instruction = frame.function.instructions[frame.pc]
            frame.pc += 1
            opcode = instruction.opcode
            operands = instruction.operands
            registers = frame.registers

            if opcode == Opcode.LOAD_LITERAL:
                registers[operands[0]] = frame.function.literals[operands[1]]
            elif opcode == Opcode.MOVE:
                registers[operands[0]] = registers[operands[1]]
            elif opcode == Opcode.LOAD_ARGUMENT:
                registers[operands[0]] = frame.arguments[operands[1]]
            elif opcode == Opcode.LOAD_CAPTURE:
                registers[operands[0]] = frame.captures[operands[1]]
            elif opcode == Opcode.MAKE_CLOSURE:
                closure_definition = frame.function.literals[operands[1]]
                registers[operands[0]] = Closure(closure_definition, [registers[r] for r in operands[2]])
            elif opcode in (Opcode.CALL, Opcode.SEND):
                values = [registers[r] for r in operands[-1]]
                if opcode == Opcode.CALL:
                    target, target_captures, values = prepare_call(registers[operands[1]], values,
                                                                   instruction.position)
                else:
                    selector = frame.function.literals[operands[1]]
                    target, target_captures, values = prepare_send(registers[operands[2]], selector, values,
                                                                   instruction.position)
                if isinstance(target, NativeFunction):
                    registers[operands[0]] = call_native(target, values, instruction.position)
                else:
                    self._enter(frames, target, target_captures, values, instruction.position, operands[0])
            elif opcode == Opcode.INTRINSIC:
                registers[operands[0]] = call_native(intrinsic(operands[1]), [registers[r] for r in operands[2]],
                                                     instruction.position)
            elif opcode == Opcode.ALLOC_CELL:
                registers[operands[0]] = MemoryHandle.new_cell(None)
            elif opcode == Opcode.CELL_LOAD:
                registers[operands[0]] = self._handle(registers[operands[1]], instruction).load()
            elif opcode == Opcode.CELL_STORE:
                self._handle(registers[operands[0]], instruction).store(registers[operands[1]])
            elif opcode == Opcode.SLOT_LOAD:
                registers[operands[0]] = self._slots(registers[operands[1]], instruction)[operands[2]]
            elif opcode == Opcode.SLOT_STORE:
                self._slots(registers[operands[0]], instruction)[operands[1]] = registers[operands[2]]
            elif opcode == Opcode.JUMP:
                frame.pc = operands[0]
            elif opcode == Opcode.JUMP_IF_FALSE:
                if not is_true(registers[operands[0]]):
                    frame.pc = operands[1]
            elif opcode == Opcode.JUMP_IF_TRUE:
                if is_true(registers[operands[0]]):
                    frame.pc = operands[1]
            elif opcode == Opcode.RETURN:
                value = registers[operands[0]]
                frames.pop()
                if not frames:
                    return value
                frames[-1].registers[frame.result_register] = value
            else:
                raise EvaluationError(f"unknown opcode {opcode}", instruction.position, "runtime-error")

    @staticmethod
    def _handle(value: Any, instruction) -> MemoryHandle:
        if not isinstance(value, MemoryHandle):
            raise EvaluationError(f"{print_string(value)} is not a reference", instruction.position,
                                  "type-mismatch")
        return value

    @staticmethod
    def _slots(value: Any, instruction) -> List[Any]:
        if not isinstance(value, SlotTuple):
            raise EvaluationError(f"{print_string(value)} has no slots", instruction.position,
                                  "does-not-understand")
        return value.slots
