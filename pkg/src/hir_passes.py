"""
HIR optimization passes: alloca promotion, constant propagation, control
flow simplification and inlining, and the pipeline that runs them.

Pipeline order: promote -> constant propagation -> simplify -> inline ->
constant propagation -> simplify. Each pass edits the function it is given;
the pipeline always works on a clone of the cached builder output.
"""

import logging
from dataclasses import astuple
from typing import Callable, Dict, FrozenSet, List, Optional, Set

from .data_structures import PassOptions
from .errors import SysmelError, EvaluationError
from .object_model import FunctionDefinition, FunctionFlag, NativeFunction
from .runtime import call_native, identical, is_true, nil
from .hir import (HirOp, HirFunction, HirInstruction, HirValue, BasicBlock, verify_hir,
                  clone_function, known_callee)
from .hir_builder import build_hir

logger = logging.getLogger("SysmelKernel")

MAX_INLINES_PER_FUNCTION = 64


# --- shared edits ---
def remove_incoming(block: BasicBlock, predecessor: BasicBlock):
    for phi in block.phis:
        incoming = list(phi.payload)
        while predecessor in incoming:
            index = incoming.index(predecessor)
            del incoming[index]
            del phi.operands[index]
        phi.payload = tuple(incoming)


def rename_incoming(block: BasicBlock, old: BasicBlock, new: BasicBlock):
    for phi in block.phis:
        phi.payload = tuple(new if source is old else source for source in phi.payload)


def remove_unreachable(function: HirFunction) -> bool:
    reachable = set(function.reachable_blocks())
    dead = [block for block in function.blocks if block not in reachable]
    for block in dead:
        for successor in block.successors:
            if successor in reachable:
                remove_incoming(successor, block)
    function.blocks = [block for block in function.blocks if block in reachable]
    return bool(dead)


def fold_constant_branch(block: BasicBlock) -> bool:
    terminator = block.terminator
    if terminator is None or terminator.op != HirOp.COND_BRANCH:
        return False
    condition = terminator.operands[0]
    if not (isinstance(condition, HirInstruction) and condition.op == HirOp.CONSTANT):
        return False
    then_block, else_block = terminator.payload
    chosen, dropped = (then_block, else_block) if is_true(condition.payload) else (else_block, then_block)
    terminator.op = HirOp.BRANCH
    terminator.operands = []
    terminator.payload = chosen
    if dropped is not chosen:
        remove_incoming(dropped, block)
    return True


def remove_trivial_phis(function: HirFunction) -> bool:
    """Replace phis whose inputs are all one value (or the phi itself) by that value"""
    removed_any = False
    changed = True
    while changed:
        changed = False
        replacements: Dict[HirValue, HirValue] = {}
        for block in function.blocks:
            for phi in block.phis:
                distinct = {id(operand): operand for operand in phi.operands if operand is not phi}
                if len(distinct) == 1:
                    replacements[phi] = next(iter(distinct.values()))
                    block.instructions.remove(phi)
        if replacements:
            function.replace_uses(replacements)
            changed = removed_any = True
    return removed_any


# --- alloca promotion ---
def promotable_allocas(function: HirFunction) -> List[HirInstruction]:
    allocas = [instruction for instruction in function.instructions() if instruction.op == HirOp.ALLOCA]
    escaped: Set[HirInstruction] = set()
    candidates = set(allocas)
    for instruction in function.instructions():
        for position, operand in enumerate(instruction.operands):
            if operand in candidates:
                address_use = instruction.op in (HirOp.LOAD, HirOp.STORE) and position == 0
                if not address_use:
                    escaped.add(operand)
    return [alloca for alloca in allocas if alloca not in escaped]


class AllocaPromoter:
    """
    Rewrites loads and stores of non-escaping allocas into SSA values,
    placing phis on demand at join points.
    """

    def __init__(self, function: HirFunction):
        self.function = function
        self.predecessors = function.predecessors()
        self.last_store: Dict[tuple, HirValue] = {}
        self.entry_values: Dict[tuple, HirValue] = {}
        self.undefined: Optional[HirInstruction] = None

    def read_at_end(self, alloca: HirInstruction, block: BasicBlock) -> HirValue:
        key = (alloca, block)
        if key in self.last_store:
            return self.last_store[key]
        return self.read_at_entry(alloca, block)

    def read_at_entry(self, alloca: HirInstruction, block: BasicBlock) -> HirValue:
        key = (alloca, block)
        if key in self.entry_values:
            return self.entry_values[key]
        predecessors = self.predecessors[block]
        if not predecessors:
            value = self.undefined_value()
        elif len(predecessors) == 1:
            value = self.read_at_end(alloca, predecessors[0])
        else:
            value = self.function.instruction(HirOp.PHI, [], alloca.payload, tuple(predecessors))
            block.insert(0, value)
            self.entry_values[key] = value
            value.operands = [self.read_at_end(alloca, predecessor) for predecessor in predecessors]
        self.entry_values[key] = value
        return value

    def undefined_value(self) -> HirInstruction:
        if self.undefined is None:
            self.undefined = self.function.instruction(HirOp.CONSTANT, [], None, nil())
            self.function.entry.insert(0, self.undefined)
        return self.undefined

    def run(self, allocas: List[HirInstruction]):
        promoted = set(allocas)
        for block in self.function.blocks:
            for instruction in block.instructions:
                if instruction.op == HirOp.STORE and instruction.operands[0] in promoted:
                    self.last_store[(instruction.operands[0], block)] = instruction.operands[1]

        replacements: Dict[HirValue, HirValue] = {}
        for block in list(self.function.blocks):
            current: Dict[HirInstruction, HirValue] = {}
            kept = []
            snapshot = list(block.instructions)
            for instruction in snapshot:
                address = instruction.operands[0] if instruction.operands else None
                if instruction.op == HirOp.STORE and address in promoted:
                    current[address] = instruction.operands[1]
                elif instruction.op == HirOp.LOAD and address in promoted:
                    replacements[instruction] = current[address] if address in current \
                        else self.read_at_entry(address, block)
                elif instruction in promoted:
                    pass
                else:
                    kept.append(instruction)
            # phis and the undefined constant placed in this block while it was being scanned
            original = set(snapshot)
            inserted = [instruction for instruction in block.instructions if instruction not in original]
            block.instructions = inserted + kept
        self.function.replace_uses(replacements)


def promote_allocas(function: HirFunction) -> HirFunction:
    remove_unreachable(function)
    allocas = promotable_allocas(function)
    if allocas:
        AllocaPromoter(function).run(allocas)
        remove_trivial_phis(function)
        logger.debug(f"Promoted {len(allocas)} allocas in {function.name}")
    return function


# --- constant propagation ---
def _is_constant(value: HirValue) -> bool:
    return isinstance(value, HirInstruction) and value.op == HirOp.CONSTANT


def _foldable(callee) -> bool:
    return isinstance(callee, NativeFunction) and callee.pure and not callee.variadic


def _fold_phi(block: BasicBlock, phi: HirInstruction) -> bool:
    if not phi.operands or not all(_is_constant(operand) for operand in phi.operands):
        return False
    first = phi.operands[0].payload
    if not all(identical(operand.payload, first) for operand in phi.operands[1:]):
        return False
    block.instructions.remove(phi)
    phi.become_constant(first)
    block.insert(len(block.phis), phi)
    return True


def constant_propagation(function: HirFunction) -> HirFunction:
    changed = True
    while changed:
        changed = False
        for block in function.blocks:
            for instruction in list(block.instructions):
                if instruction.op == HirOp.APPLY:
                    callee = known_callee(instruction)
                    if _foldable(callee) and all(_is_constant(operand) for operand in instruction.operands):
                        try:
                            value = call_native(callee, [operand.payload for operand in instruction.operands])
                        except SysmelError:
                            continue
                        instruction.become_constant(value)
                        changed = True
                elif instruction.op == HirOp.PHI:
                    changed |= _fold_phi(block, instruction)
            changed |= fold_constant_branch(block)
    return function


# --- control flow simplification ---
def _merge_into_predecessor(function: HirFunction, block: BasicBlock, successor: BasicBlock):
    replacements = {phi: phi.operands[0] for phi in successor.phis}
    block.instructions.pop()
    for instruction in successor.instructions:
        if instruction.op != HirOp.PHI:
            block.append(instruction)
    for following in successor.successors:
        rename_incoming(following, successor, block)
    function.blocks.remove(successor)
    function.replace_uses(replacements)


def simplify_control_flow(function: HirFunction) -> HirFunction:
    changed = True
    while changed:
        changed = False
        for block in function.blocks:
            changed |= fold_constant_branch(block)
        changed |= remove_unreachable(function)
        changed |= remove_trivial_phis(function)
        predecessors = function.predecessors()
        for block in function.blocks:
            terminator = block.terminator
            if terminator is None or terminator.op != HirOp.BRANCH:
                continue
            successor = terminator.payload
            if successor is block or successor is function.entry or predecessors[successor] != [block]:
                continue
            _merge_into_predecessor(function, block, successor)
            changed = True
            break
    return function


# --- inlining ---
def _inline_site(function: HirFunction, block: BasicBlock, call: HirInstruction, callee: HirFunction,
                 origin: Dict[HirInstruction, FrozenSet], chain: FrozenSet):
    index = block.instructions.index(call)
    continuation = function.new_block()
    for instruction in block.instructions[index + 1:]:
        continuation.append(instruction)
    del block.instructions[index:]
    for successor in continuation.successors:
        rename_incoming(successor, block, continuation)

    values: Dict[HirValue, HirValue] = dict(zip(callee.parameters, call.operands))
    blocks: Dict[BasicBlock, BasicBlock] = {old: function.new_block() for old in callee.blocks}
    returns = []
    copies = []
    for old_block in callee.blocks:
        new_block = blocks[old_block]
        for instruction in old_block.instructions:
            if instruction.op == HirOp.RETURN:
                returns.append((instruction.operands[0], new_block))
                new_block.append(function.instruction(HirOp.BRANCH, [], None, continuation))
                continue
            copy = new_block.append(function.instruction(instruction.op, [], instruction.value_type,
                                                         instruction.payload, instruction.position))
            origin[copy] = chain
            values[instruction] = copy
            copies.append((instruction, copy))
    for old, copy in copies:
        copy.operands = [values[operand] for operand in old.operands]
        if old.op == HirOp.BRANCH:
            copy.payload = blocks[old.payload]
        elif old.op in (HirOp.COND_BRANCH, HirOp.PHI):
            copy.payload = tuple(blocks[source] for source in old.payload)
    block.append(function.instruction(HirOp.BRANCH, [], None, blocks[callee.entry]))

    if len(returns) == 1:
        result = values[returns[0][0]]
    else:
        result = function.instruction(HirOp.PHI, [values[value] for value, _ in returns], call.value_type,
                                      tuple(source for _, source in returns))
        continuation.insert(0, result)
    function.replace_uses({call: result})


def inline_calls(function: HirFunction, callee_body: Callable[[FunctionDefinition], HirFunction],
                 threshold: int = 24) -> HirFunction:
    """Splice small or always-inline known callees into function, refusing recursion"""
    root: FrozenSet = frozenset([function.definition])
    origin: Dict[HirInstruction, FrozenSet] = {}
    budget = MAX_INLINES_PER_FUNCTION
    changed = True
    while changed and budget > 0:
        changed = False
        for block in list(function.blocks):
            for instruction in block.instructions:
                callee = known_callee(instruction)
                if not isinstance(callee, FunctionDefinition):
                    continue
                chain = origin.get(instruction, root)
                if callee in chain or callee.capture_bindings or callee.stripped:
                    continue
                if len(instruction.operands) != callee.argument_count:
                    continue
                body = callee_body(callee)
                if body.instruction_count() > threshold and FunctionFlag.INLINE not in callee.flags:
                    continue
                _inline_site(function, block, instruction, body, origin, chain | {callee})
                logger.debug(f"Inlined {callee.display_name} into {function.name}")
                budget -= 1
                changed = True
                break
            if changed:
                break
    return function


# --- pipeline ---
class HirPipeline:
    def __init__(self, options: Optional[PassOptions] = None):
        self.options = options or PassOptions()
        self.logger = logging.getLogger("SysmelKernel")

    def built(self, definition: FunctionDefinition) -> HirFunction:
        """Builder output, verified and cached on the definition"""
        cached = definition.hir_cache.get("built")
        if cached is None:
            cached = build_hir(definition)
            self.check(cached, "building")
            definition.hir_cache["built"] = cached
        return cached

    def promoted(self, definition: FunctionDefinition) -> HirFunction:
        cached = definition.hir_cache.get("promoted")
        if cached is None:
            cached = promote_allocas(clone_function(self.built(definition)))
            self.check(cached, "promotion")
            definition.hir_cache["promoted"] = cached
        return cached

    def callee_body(self, definition: FunctionDefinition) -> HirFunction:
        return clone_function(self.promoted(definition))

    def optimized(self, definition: FunctionDefinition) -> HirFunction:
        key = ("optimized", astuple(self.options))
        cached = definition.hir_cache.get(key)
        if cached is None:
            cached = self.optimize(clone_function(self.promoted(definition)))
            definition.hir_cache[key] = cached
        return cached

    def optimize(self, function: HirFunction) -> HirFunction:
        options = self.options
        self.run_scalar_passes(function)
        if options.inlining:
            inline_calls(function, self.callee_body, options.inline_threshold)
            self.check(function, "inlining")
            self.run_scalar_passes(function)
        self.logger.info(f"Optimized HIR for {function.name}: {len(function.blocks)} blocks, "
                         f"{function.instruction_count()} instructions")
        return function

    def run_scalar_passes(self, function: HirFunction):
        if self.options.constant_propagation:
            constant_propagation(function)
            self.check(function, "constant propagation")
        if self.options.simplify_control_flow:
            simplify_control_flow(function)
            self.check(function, "control flow simplification")

    @staticmethod
    def check(function: HirFunction, stage: str):
        problems = verify_hir(function)
        if problems:
            raise EvaluationError(f"invalid HIR for {function.name} after {stage}: {problems[0]}",
                                  kind="runtime-error")
