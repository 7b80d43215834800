"""
Emulator for three address code at any stage: virtual registers before
allocation, physical registers and frame slots after it. Every activation
gets its own register file and frame.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

from .errors import EvaluationError
from .object_model import FunctionDefinition, NativeFunction, MemoryHandle, SlotTuple
from .runtime import prepare_call, prepare_send, check_arity, call_native, is_true, print_string
from .mir import MirFunction, MirInstruction, VirtualRegister, PhysicalRegister, FrameSlot, Constant, Label
from .mir_lowering import DISPATCH
from .mir_passes import MirPipeline

DEPTH_LIMIT = 10000


class MirEmulator:
    def __init__(self, pipeline: Optional[MirPipeline] = None, stage: str = "laid-out",
                 depth_limit: int = DEPTH_LIMIT):
        self.pipeline = pipeline or MirPipeline()
        self.stage = stage
        self.depth_limit = depth_limit
        self.depth = 0
        self.executed = 0
        self.logger = logging.getLogger("SysmelKernel")

    def function_for(self, definition: FunctionDefinition) -> MirFunction:
        return self.pipeline.stage(definition, self.stage)

    def call(self, callee: Any, arguments: Sequence[Any], position=None) -> Any:
        target, captures, arguments = prepare_call(callee, list(arguments), position)
        if isinstance(target, NativeFunction):
            return call_native(target, arguments, position)
        check_arity(target, arguments, position)
        return self.run(self.function_for(target), arguments, captures, position)

    def run(self, function: MirFunction, arguments: Sequence[Any], captures: Sequence[Any] = (),
            position=None) -> Any:
        if self.depth >= self.depth_limit:
            raise EvaluationError(f"call depth exceeded {self.depth_limit} in {function.name}", position,
                                  "stack-overflow")
        self.depth += 1
        try:
            return self._execute(function, list(arguments), list(captures))
        except RecursionError:
            raise EvaluationError(f"host stack exhausted in {function.name}", position, "stack-overflow") from None
        finally:
            self.depth -= 1

    def _execute(self, function: MirFunction, arguments: List[Any], captures: List[Any]) -> Any:
        registers: Dict[Any, Any] = {}
        frame: Dict[int, Any] = {}
        frame_cell = _FrameCell(frame)

        def read(operand):
            if isinstance(operand, (VirtualRegister, PhysicalRegister)):
                return registers[operand]
            if isinstance(operand, FrameSlot):
                return frame[operand.index]
            if isinstance(operand, Constant):
                return operand.value
            return operand

        def write(operand, value):
            if isinstance(operand, FrameSlot):
                frame[operand.index] = value
            else:
                registers[operand] = value

        for location, value in zip(function.parameters, arguments):
            write(location, value)
        if function.environment is not None:
            write(function.environment, captures)

        blocks = {block.label: block for block in function.blocks}
        block = function.blocks[0]
        index = 0
        while True:
            if index >= len(block.instructions):
                raise EvaluationError(f"control fell off {block.label} in {function.name}", kind="runtime-error")
            instruction = block.instructions[index]
            index += 1
            self.executed += 1
            op = instruction.op
            target: Optional[Label] = None
            if op == "mov":
                write(instruction.dst, read(instruction.operands[0]))
            elif op == "jump":
                target = instruction.operands[0]
            elif op == "branch-if":
                if is_true(read(instruction.operands[0])):
                    target = instruction.operands[1]
            elif op == "branch-cmp":
                left, right, label = instruction.operands
                if is_true(call_native(instruction.native, [read(left), read(right)], instruction.position)):
                    target = label
            elif op == "return":
                return read(instruction.operands[0])
            elif op == "call":
                write(instruction.dst, self._call(instruction, [read(operand) for operand in instruction.operands]))
            elif op == "frame-addr":
                slot = instruction.operands[0]
                frame.setdefault(slot.index, None)
                write(instruction.dst, MemoryHandle(frame_cell, slot.index))
            elif op == "load":
                write(instruction.dst, self._load(read(instruction.operands[0]), instruction.operands[1]))
            elif op == "store":
                self._store(read(instruction.operands[0]), instruction.operands[1], read(instruction.operands[2]))
            elif instruction.native is not None:
                write(instruction.dst, call_native(instruction.native, [read(o) for o in instruction.operands],
                                                   instruction.position))
            else:
                raise EvaluationError(f"cannot emulate {op}", kind="runtime-error")
            if target is not None:
                block = blocks[target]
                index = 0

    def _call(self, instruction: MirInstruction, values: List[Any]) -> Any:
        callee, arguments = values[0], values[1:]
        position = instruction.position
        if callee is DISPATCH:
            receiver, selector, arguments = arguments[0], arguments[1], arguments[2:]
            target, captures, arguments = prepare_send(receiver, selector, arguments, position)
            if isinstance(target, NativeFunction):
                return call_native(target, arguments, position)
            check_arity(target, arguments, position)
            return self.run(self.function_for(target), arguments, captures, position)
        return self.call(callee, arguments, position)

    @staticmethod
    def _load(base: Any, offset: int) -> Any:
        if isinstance(base, MemoryHandle):
            return base.load()
        if isinstance(base, SlotTuple):
            return base.slots[offset]
        if isinstance(base, list):
            return base[offset]
        raise EvaluationError(f"cannot load from {print_string(base)}", kind="does-not-understand")

    @staticmethod
    def _store(base: Any, offset: int, value: Any):
        if isinstance(base, MemoryHandle):
            base.store(value)
        elif isinstance(base, SlotTuple):
            base.slots[offset] = value
        else:
            raise EvaluationError(f"cannot store into {print_string(base)}", kind="does-not-understand")


class _FrameCell:
    """Adapts a frame dictionary to the slot list a MemoryHandle indexes"""

    def __init__(self, frame: Dict[int, Any]):
        self.frame = frame

    def __getitem__(self, index: int) -> Any:
        return self.frame[index]

    def __setitem__(self, index: int, value: Any):
        self.frame[index] = value
