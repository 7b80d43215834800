"""
Lowers optimized HIR to three address code. Phis leave SSA as moves on the
incoming edges; critical edges into phi blocks get their own block.
"""

import logging
from typing import Any, Dict, List, Set, Tuple

from .errors import EvaluationError
from .object_model import NativeFunction, Closure, MemoryHandle
from .hir import HirOp, HirFunction, HirInstruction, HirValue, BasicBlock, known_callee
from .hir_passes import promotable_allocas
from .mir import (MirFunction, MirBlock, MirInstruction, Constant, Label, ARITHMETIC_OPS,
                  COMPARE_OPS)

logger = logging.getLogger("SysmelKernel")

PRIMITIVE_OPS = set(ARITHMETIC_OPS) | set(COMPARE_OPS)

# Runtime helpers reached through call tuples. The emulator dispatches sends
# itself so user methods run on the same machine.
DISPATCH = NativeFunction("runtime.dispatch", [], None, lambda *arguments: None, variadic=True)
MAKE_CLOSURE = NativeFunction("runtime.makeClosure", [], None,
                              lambda definition, *captures: Closure(definition, list(captures)), variadic=True)
NEW_CELL = NativeFunction("runtime.newCell", [], None, lambda: MemoryHandle.new_cell(None))


def block_label(block: BasicBlock) -> Label:
    return Label(f".L{block.id}")


def blocks_in_loops(function: HirFunction) -> Set[BasicBlock]:
    """Blocks that can reach themselves again"""
    looping = set()
    for start in function.blocks:
        pending, seen = list(start.successors), set()
        while pending:
            block = pending.pop()
            if block is start:
                looping.add(start)
                break
            if block not in seen:
                seen.add(block)
                pending.extend(block.successors)
    return looping


class MirLowering:
    def __init__(self, source: HirFunction):
        self.source = source
        self.function = MirFunction(source.name, source.definition)
        self.values: Dict[HirValue, Any] = {}
        self.current: MirBlock = None
        self.edge_count = 0
        self.looping = blocks_in_loops(source)

    def lower(self) -> MirFunction:
        if promotable_allocas(self.source):
            logger.debug(f"{self.source.name} still has promotable allocas; they stay in the frame")
        for parameter in self.source.parameters:
            register = self.function.new_register()
            self.values[parameter] = register
            self.function.parameters.append(register)
        if any(instruction.op == HirOp.CAPTURE for instruction in self.source.instructions()):
            self.function.environment = self.function.new_register()
        for block in self.source.blocks:
            for instruction in block.instructions:
                if instruction.op == HirOp.CONSTANT:
                    self.values[instruction] = Constant(instruction.payload)
                elif instruction.op == HirOp.PHI or not instruction.is_terminator:
                    self.values[instruction] = self.function.new_register()
        for block in self.source.blocks:
            self.current = MirBlock(block_label(block))
            self.function.blocks.append(self.current)
            for instruction in block.instructions:
                self.lower_instruction(block, instruction)
        return self.function

    def operand(self, value: HirValue) -> Any:
        return self.values[value]

    def emit(self, op: str, dst=None, operands=(), native=None, position=None):
        self.current.instructions.append(MirInstruction(op, dst, tuple(operands), native, position=position))

    def lower_instruction(self, block: BasicBlock, instruction: HirInstruction):
        op = instruction.op
        dst = self.values.get(instruction)
        operands = [self.operand(value) for value in instruction.operands]
        if op in (HirOp.CONSTANT, HirOp.PHI):
            return
        position = instruction.position
        if op == HirOp.APPLY:
            callee = known_callee(instruction)
            if isinstance(callee, NativeFunction) and callee.primitive_op in PRIMITIVE_OPS:
                self.emit(callee.primitive_op, dst, operands, callee, position)
            elif callee is not None:
                self.emit("call", dst, [Constant(callee), *operands], position=position)
            else:
                self.emit("call", dst, operands, position=position)
        elif op == HirOp.SEND:
            self.emit("call", dst, [Constant(DISPATCH), operands[0], Constant(instruction.payload), *operands[1:]],
                      position=position)
        elif op == HirOp.MAKE_CLOSURE:
            self.emit("call", dst, [Constant(MAKE_CLOSURE), Constant(instruction.payload), *operands])
        elif op == HirOp.ALLOCA and block in self.looping:
            # one cell per iteration
            self.emit("call", dst, [Constant(NEW_CELL)])
        elif op == HirOp.ALLOCA:
            slot_type = instruction.payload
            size = slot_type.byte_size if slot_type is not None else 8
            slot = self.function.new_frame_slot(size, size, "alloca")
            self.emit("frame-addr", dst, [slot])
        elif op == HirOp.LOAD:
            self.emit("load", dst, [operands[0], 0])
        elif op == HirOp.STORE:
            self.emit("store", None, [operands[0], 0, operands[1]])
        elif op == HirOp.SLOT_GET:
            self.emit("load", dst, [operands[0], instruction.payload])
        elif op == HirOp.SLOT_SET:
            self.emit("store", None, [operands[0], instruction.payload, operands[1]])
        elif op == HirOp.CAPTURE:
            self.emit("load", dst, [self.function.environment, instruction.payload])
        elif op == HirOp.BRANCH:
            self.emit_edge_moves(block, instruction.payload)
            self.emit("jump", None, [block_label(instruction.payload)])
        elif op == HirOp.COND_BRANCH:
            then_label = self.edge_target(block, instruction.payload[0])
            else_label = self.edge_target(block, instruction.payload[1])
            self.emit("branch-if", None, [operands[0], then_label])
            self.emit("jump", None, [else_label])
        elif op == HirOp.RETURN:
            self.emit("return", None, operands)
        else:
            raise EvaluationError(f"cannot lower {op.value} in {self.source.name}", kind="runtime-error")

    def phi_moves(self, source: BasicBlock, target: BasicBlock) -> List[Tuple[Any, Any]]:
        moves = []
        for phi in target.phis:
            index = list(phi.payload).index(source)
            moves.append((self.values[phi], self.operand(phi.operands[index])))
        return moves

    def emit_edge_moves(self, source: BasicBlock, target: BasicBlock):
        moves = self.phi_moves(source, target)
        destinations = {destination for destination, _ in moves}
        if not any(value in destinations for _, value in moves):
            for destination, value in moves:
                self.emit("mov", destination, [value])
            return
        # a phi reads another phi of the same block: copy through temporaries first
        temporaries = []
        for _, value in moves:
            temporary = self.function.new_register()
            self.emit("mov", temporary, [value])
            temporaries.append(temporary)
        for (phi_register, _), temporary in zip(moves, temporaries):
            self.emit("mov", phi_register, [temporary])

    def edge_target(self, source: BasicBlock, target: BasicBlock) -> Label:
        if not target.phis:
            return block_label(target)
        saved = self.current
        self.edge_count += 1
        self.current = MirBlock(Label(f".E{source.id}_{target.id}_{self.edge_count}"))
        self.function.blocks.append(self.current)
        self.emit_edge_moves(source, target)
        self.emit("jump", None, [block_label(target)])
        edge_label = self.current.label
        self.current = saved
        return edge_label


def lower_to_mir(function: HirFunction) -> MirFunction:
    return MirLowering(function).lower()
