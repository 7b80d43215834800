"""
MIR passes: compare-branch fusion, liveness, linear scan register
allocation with spilling, the allocation checker and frame layout.
"""

import logging
from dataclasses import astuple, dataclass, replace
from typing import Any, Dict, List, Optional, Set, Tuple

from .errors import EvaluationError
from .object_model import FunctionDefinition
from .mir import (MirFunction, MirInstruction, VirtualRegister, PhysicalRegister, FrameSlot, Label,
                  COMPARE_OPS, layout_frame)
from .mir_lowering import lower_to_mir
from .hir_passes import HirPipeline

logger = logging.getLogger("SysmelKernel")

ALLOCATABLE_REGISTERS = [PhysicalRegister(number) for number in range(10)]
SCRATCH_REGISTERS = [PhysicalRegister(10), PhysicalRegister(11)]
DIRECT_OPERAND_OPS = ("call", "return", "mov")


def _virtual(operands) -> List[VirtualRegister]:
    return [operand for operand in operands if isinstance(operand, VirtualRegister)]


def uses_of(instruction: MirInstruction) -> List[VirtualRegister]:
    return _virtual(instruction.operands)


def defs_of(instruction: MirInstruction) -> List[VirtualRegister]:
    return _virtual([instruction.dst])


def entry_definitions(function: MirFunction) -> List[VirtualRegister]:
    return _virtual([*function.parameters, function.environment])


# --- compare-branch fusion ---
def use_counts(function: MirFunction) -> Dict[VirtualRegister, int]:
    counts: Dict[VirtualRegister, int] = {}
    for instruction in function.instructions():
        for register in uses_of(instruction):
            counts[register] = counts.get(register, 0) + 1
    return counts


def fuse_compare_branch(function: MirFunction) -> MirFunction:
    """A compare used only by the branch right after it becomes one branch-cmp"""
    result = function.copy(stage="fused")
    counts = use_counts(function)
    fused = 0
    for block in result.blocks:
        instructions: List[MirInstruction] = []
        index = 0
        while index < len(block.instructions):
            current = block.instructions[index]
            following = block.instructions[index + 1] if index + 1 < len(block.instructions) else None
            if (current.op in COMPARE_OPS and following is not None and following.op == "branch-if"
                    and following.operands[0] == current.dst and counts.get(current.dst) == 1):
                instructions.append(MirInstruction("branch-cmp", None, (*current.operands, following.operands[1]),
                                                   current.native, current.op, current.position))
                fused += 1
                index += 2
                continue
            instructions.append(current)
            index += 1
        block.instructions = instructions
    if fused:
        logger.debug(f"Fused {fused} compare-branch pairs in {function.name}")
    return result


# --- liveness ---
def block_liveness(function: MirFunction) -> Tuple[Dict[Label, Set], Dict[Label, Set]]:
    used: Dict[Label, Set] = {}
    defined: Dict[Label, Set] = {}
    for block in function.blocks:
        block_used, block_defined = set(), set()
        for instruction in block.instructions:
            block_used.update(register for register in uses_of(instruction) if register not in block_defined)
            block_defined.update(defs_of(instruction))
        used[block.label], defined[block.label] = block_used, block_defined
    live_in = {block.label: set() for block in function.blocks}
    live_out = {block.label: set() for block in function.blocks}
    changed = True
    while changed:
        changed = False
        for block in reversed(function.blocks):
            out = set()
            for successor in block.successors():
                out |= live_in.get(successor, set())
            incoming = used[block.label] | (out - defined[block.label])
            if out != live_out[block.label] or incoming != live_in[block.label]:
                live_out[block.label], live_in[block.label] = out, incoming
                changed = True
    return live_in, live_out


@dataclass
class LiveInterval:
    register: VirtualRegister
    start: int
    end: int


def live_intervals(function: MirFunction) -> List[LiveInterval]:
    live_in, live_out = block_liveness(function)
    starts: Dict[VirtualRegister, int] = {}
    ends: Dict[VirtualRegister, int] = {}

    def touch(register: VirtualRegister, position: int):
        starts[register] = min(starts.get(register, position), position)
        ends[register] = max(ends.get(register, position), position)

    for register in entry_definitions(function):
        touch(register, -1)
    position = 0
    for block in function.blocks:
        first = position
        for instruction in block.instructions:
            for register in uses_of(instruction) + defs_of(instruction):
                touch(register, position)
            position += 1
        last = max(first, position - 1)
        for register in live_in[block.label]:
            touch(register, first)
        for register in live_out[block.label]:
            touch(register, last)
    intervals = [LiveInterval(register, starts[register], ends[register]) for register in starts]
    intervals.sort(key=lambda interval: (interval.start, interval.register.number))
    return intervals


# --- linear scan ---
def linear_scan(function: MirFunction, registers: List[PhysicalRegister] = None) -> Dict[VirtualRegister, Any]:
    """Assign each interval a register, spilling the one ending last when none is free"""
    registers = list(registers or ALLOCATABLE_REGISTERS)
    free = list(reversed(registers))
    active: List[Tuple[int, int, VirtualRegister]] = []
    assignment: Dict[VirtualRegister, Any] = {}

    for interval in live_intervals(function):
        still_active = []
        for end, number, register in active:
            if end >= interval.start:
                still_active.append((end, number, register))
            else:
                free.append(assignment[register])
        active = sorted(still_active)
        if free:
            assignment[interval.register] = free.pop()
            active.append((interval.end, interval.register.number, interval.register))
            active.sort()
            continue
        spill_end, _, spilled = active[-1]
        if spill_end > interval.end:
            assignment[interval.register] = assignment[spilled]
            assignment[spilled] = function.new_frame_slot()
            active[-1] = (interval.end, interval.register.number, interval.register)
            active.sort()
        else:
            assignment[interval.register] = function.new_frame_slot()
    return assignment


def _rewrite(instruction: MirInstruction, assignment: Dict[VirtualRegister, Any]) -> List[MirInstruction]:
    locate = lambda operand: assignment.get(operand, operand) if isinstance(operand, VirtualRegister) else operand
    dst = locate(instruction.dst)
    if instruction.op in DIRECT_OPERAND_OPS:
        operands = tuple(locate(operand) for operand in instruction.operands)
        if instruction.op == "mov" and isinstance(dst, FrameSlot) and isinstance(operands[0], FrameSlot):
            scratch = SCRATCH_REGISTERS[0]
            return [MirInstruction("mov", scratch, operands), MirInstruction("mov", dst, (scratch,))]
        return [replace(instruction, dst=dst, operands=operands)]
    if instruction.op == "frame-addr":
        before, operands = [], instruction.operands
    else:
        before, scratch = [], iter(SCRATCH_REGISTERS)
        located = []
        for operand in instruction.operands:
            location = locate(operand)
            if isinstance(operand, VirtualRegister) and isinstance(location, FrameSlot):
                register = next(scratch)
                before.append(MirInstruction("mov", register, (location,)))
                location = register
            located.append(location)
        operands = tuple(located)
    after = []
    if isinstance(dst, FrameSlot):
        after.append(MirInstruction("mov", dst, (SCRATCH_REGISTERS[0],)))
        dst = SCRATCH_REGISTERS[0]
    return before + [replace(instruction, dst=dst, operands=operands)] + after


def allocate_registers(function: MirFunction) -> MirFunction:
    result = function.copy(stage="allocated")
    assignment = linear_scan(result)
    for block in result.blocks:
        rewritten: List[MirInstruction] = []
        for instruction in block.instructions:
            rewritten.extend(_rewrite(instruction, assignment))
        block.instructions = rewritten
    result.parameters = [assignment.get(parameter, parameter) for parameter in function.parameters]
    if function.environment is not None:
        result.environment = assignment.get(function.environment, function.environment)
    result.assignment = assignment
    spills = sum(1 for location in assignment.values() if isinstance(location, FrameSlot))
    logger.debug(f"Allocated {function.name}: {len(assignment)} values, {spills} spilled")
    return result


def spill_slot_count(function: MirFunction) -> int:
    return sum(1 for slot in function.frame_slots if slot.kind == "spill")


# --- allocation checker ---
def instruction_liveness(function: MirFunction) -> List[Tuple[MirInstruction, Set[VirtualRegister]]]:
    """Values live after every instruction, from a per-instruction fixpoint"""
    flat: List[MirInstruction] = []
    block_start: Dict[Label, int] = {}
    for block in function.blocks:
        block_start[block.label] = len(flat)
        flat.extend(block.instructions)
    successors: List[List[int]] = []
    for block in function.blocks:
        start = block_start[block.label]
        for offset, instruction in enumerate(block.instructions):
            index = start + offset
            following = [block_start[label] for label in instruction.labels if label in block_start]
            if not instruction.is_terminator and offset + 1 < len(block.instructions):
                following.append(index + 1)
            successors.append(following)
    live_after: List[Set[VirtualRegister]] = [set() for _ in flat]
    live_before: List[Set[VirtualRegister]] = [set() for _ in flat]
    changed = True
    while changed:
        changed = False
        for index in range(len(flat) - 1, -1, -1):
            after = set()
            for successor in successors[index]:
                after |= live_before[successor]
            before = set(uses_of(flat[index])) | (after - set(defs_of(flat[index])))
            if after != live_after[index] or before != live_before[index]:
                live_after[index], live_before[index] = after, before
                changed = True
    return list(zip(flat, live_after))


def check_allocation(function: MirFunction, assignment: Dict[VirtualRegister, Any]) -> List[str]:
    """Conflicts between simultaneously live values sharing a location"""
    problems: List[str] = []
    for register, location in assignment.items():
        if isinstance(location, PhysicalRegister) and location in SCRATCH_REGISTERS:
            problems.append(f"{register} was given scratch register {location}")

    def check_group(values: Set[VirtualRegister], where: str):
        seen: Dict[Any, VirtualRegister] = {}
        for register in sorted(values, key=lambda item: item.number):
            location = assignment.get(register)
            if location is None:
                problems.append(f"{register} has no location {where}")
                continue
            if location in seen:
                problems.append(f"{register} and {seen[location]} share {location} {where}")
            seen[location] = register

    check_group(set(entry_definitions(function)), "at entry")
    for instruction, live in instruction_liveness(function):
        check_group(live | set(defs_of(instruction)), f"after `{instruction.op}`")
    return problems


# --- frame layout ---
def compute_frame_layout(function: MirFunction) -> MirFunction:
    return function.copy(frame=layout_frame(function.frame_slots), stage="laid-out")


# --- pipeline ---
MIR_STAGES = ("lowered", "fused", "allocated", "laid-out")


class MirPipeline:
    def __init__(self, hir_pipeline: Optional[HirPipeline] = None):
        self.hir_pipeline = hir_pipeline or HirPipeline()
        self.logger = logging.getLogger("SysmelKernel")

    def stage(self, definition: FunctionDefinition, stage: str = "laid-out") -> MirFunction:
        if stage not in MIR_STAGES:
            raise ValueError(f"unknown MIR stage {stage}")
        key = (stage, astuple(self.hir_pipeline.options))
        cached = definition.mir_cache.get(key)
        if cached is not None:
            return cached
        if stage == "lowered":
            cached = lower_to_mir(self.hir_pipeline.optimized(definition))
        elif stage == "fused":
            cached = fuse_compare_branch(self.stage(definition, "lowered"))
        elif stage == "allocated":
            fused = self.stage(definition, "fused")
            cached = allocate_registers(fused)
            problems = check_allocation(fused, cached.assignment)
            if problems:
                raise EvaluationError(f"register allocation of {definition.display_name} failed: {problems[0]}",
                                      kind="runtime-error")
        else:
            cached = compute_frame_layout(self.stage(definition, "allocated"))
            self.logger.info(f"Backend finished {definition.display_name}: {cached.instruction_count()} tuples, "
                             f"frame size {cached.frame.size}")
        definition.mir_cache[key] = cached
        return cached
