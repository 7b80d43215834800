"""
Reference interpreter for HIR, used as the differential oracle for the
optimization passes and as the hir engine.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

from .errors import EvaluationError
from .object_model import FunctionDefinition, NativeFunction, Closure, MemoryHandle, SlotTuple
from .runtime import prepare_call, prepare_send, check_arity, call_native, is_true, print_string
from .hir import HirOp, HirFunction, HirValue, BasicBlock
from .hir_passes import HirPipeline

DEPTH_LIMIT = 10000


class HirInterpreter:
    def __init__(self, pipeline: Optional[HirPipeline] = None, depth_limit: int = DEPTH_LIMIT):
        self.pipeline = pipeline or HirPipeline()
        self.depth_limit = depth_limit
        self.depth = 0
        self.logger = logging.getLogger("SysmelKernel")

    def function_for(self, definition: FunctionDefinition) -> HirFunction:
        return self.pipeline.optimized(definition)

    def call(self, callee: Any, arguments: Sequence[Any], position=None) -> Any:
        target, captures, arguments = prepare_call(callee, list(arguments), position)
        if isinstance(target, NativeFunction):
            return call_native(target, arguments, position)
        return self.call_definition(target, captures, arguments, position)

    def call_definition(self, definition: FunctionDefinition, captures, arguments, position=None) -> Any:
        check_arity(definition, list(arguments), position)
        return self.run(self.function_for(definition), arguments, captures, position)

    def run(self, function: HirFunction, arguments: Sequence[Any], captures: Sequence[Any] = (),
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

    def _execute(self, function: HirFunction, arguments: List[Any], captures: List[Any]) -> Any:
        values: Dict[HirValue, Any] = dict(zip(function.parameters, arguments))
        block: BasicBlock = function.entry
        previous: Optional[BasicBlock] = None
        while True:
            phis = block.phis
            if phis:
                # phis read their inputs simultaneously on entry
                incoming = [values[phi.operands[list(phi.payload).index(previous)]] for phi in phis]
                for phi, value in zip(phis, incoming):
                    values[phi] = value
            for instruction in block.instructions[len(phis):]:
                op = instruction.op
                if op == HirOp.BRANCH:
                    previous, block = block, instruction.payload
                    break
                if op == HirOp.COND_BRANCH:
                    taken = is_true(values[instruction.operands[0]])
                    previous, block = block, instruction.payload[0 if taken else 1]
                    break
                if op == HirOp.RETURN:
                    return values[instruction.operands[0]]
                values[instruction] = self.execute_instruction(instruction, values, captures)

    def execute_instruction(self, instruction, values: Dict[HirValue, Any], captures: List[Any]) -> Any:
        op = instruction.op
        operands = [values[operand] for operand in instruction.operands]
        if op == HirOp.CONSTANT:
            return instruction.payload
        if op == HirOp.APPLY:
            callee = instruction.payload
            if callee is None:
                callee, operands = operands[0], operands[1:]
            return self.call(callee, operands, instruction.position)
        if op == HirOp.SEND:
            position = instruction.position
            target, target_captures, arguments = prepare_send(operands[0], instruction.payload, operands[1:], position)
            if isinstance(target, NativeFunction):
                return call_native(target, arguments, position)
            return self.call_definition(target, target_captures, arguments, position)
        if op == HirOp.ALLOCA:
            return MemoryHandle.new_cell(None)
        if op == HirOp.LOAD:
            return self._handle(operands[0]).load()
        if op == HirOp.STORE:
            return self._handle(operands[0]).store(operands[1])
        if op == HirOp.SLOT_GET:
            return self._slots(operands[0])[instruction.payload]
        if op == HirOp.SLOT_SET:
            self._slots(operands[0])[instruction.payload] = operands[1]
            return operands[1]
        if op == HirOp.MAKE_CLOSURE:
            return Closure(instruction.payload, operands)
        if op == HirOp.CAPTURE:
            return captures[instruction.payload]
        raise EvaluationError(f"cannot interpret {op.value}", kind="runtime-error")

    @staticmethod
    def _handle(value: Any) -> MemoryHandle:
        if not isinstance(value, MemoryHandle):
            raise EvaluationError(f"{print_string(value)} is not a reference", kind="type-mismatch")
        return value

    @staticmethod
    def _slots(value: Any) -> List[Any]:
        if not isinstance(value, SlotTuple):
            raise EvaluationError(f"{print_string(value)} has no slots", kind="does-not-understand")
        return value.slots


def interpret_hir(function: HirFunction, arguments: Sequence[Any], pipeline: Optional[HirPipeline] = None) -> Any:
    return HirInterpreter(pipeline).run(function, arguments)
