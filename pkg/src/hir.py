"""
High-level SSA intermediate representation: values, instructions, basic
blocks and functions, plus the verifier, the text dump and cloning.
"""

from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Set

from .object_model import FunctionDefinition, NativeFunction
from .runtime import print_string


class HirOp(Enum):
    CONSTANT = "constant"
    APPLY = "apply"
    SEND = "send"
    ALLOCA = "alloca"
    LOAD = "load"
    STORE = "store"
    SLOT_GET = "slotGet"
    SLOT_SET = "slotSet"
    MAKE_CLOSURE = "makeClosure"
    CAPTURE = "capture"
    PHI = "phi"
    BRANCH = "branch"
    COND_BRANCH = "condBranch"
    RETURN = "return"


TERMINATOR_OPS = (HirOp.BRANCH, HirOp.COND_BRANCH, HirOp.RETURN)


class HirValue:
    id: int
    value_type: Any

    @property
    def label(self) -> str:
        return f"%{self.id}"


class HirParameter(HirValue):
    def __init__(self, value_id: int, index: int, value_type, name: str = ""):
        self.id = value_id
        self.index = index
        self.value_type = value_type
        self.name = name


class HirInstruction(HirValue):
    """
    One instruction. payload holds the non-value operand: the constant, the
    known callee, the selector, the slot index, the closure definition, the
    capture index, the incoming blocks of a phi or the branch targets.
    """

    def __init__(self, value_id: int, op: HirOp, operands: List[HirValue] = None, value_type=None,
                 payload: Any = None, position=None):
        self.id = value_id
        self.op = op
        self.operands: List[HirValue] = list(operands or [])
        self.value_type = value_type
        self.payload = payload
        self.position = position
        self.block: Optional["BasicBlock"] = None

    @property
    def is_terminator(self) -> bool:
        return self.op in TERMINATOR_OPS

    @property
    def targets(self) -> List["BasicBlock"]:
        if self.op == HirOp.BRANCH:
            return [self.payload]
        if self.op == HirOp.COND_BRANCH:
            return list(self.payload)
        return []

    def retarget(self, old: "BasicBlock", new: "BasicBlock"):
        if self.op == HirOp.BRANCH and self.payload is old:
            self.payload = new
        elif self.op == HirOp.COND_BRANCH:
            self.payload = tuple(new if target is old else target for target in self.payload)

    def become_constant(self, value: Any):
        self.op = HirOp.CONSTANT
        self.operands = []
        self.payload = value


class BasicBlock:
    def __init__(self, block_id: int):
        self.id = block_id
        self.instructions: List[HirInstruction] = []

    @property
    def label(self) -> str:
        return f"block{self.id}"

    @property
    def terminator(self) -> Optional[HirInstruction]:
        if self.instructions and self.instructions[-1].is_terminator:
            return self.instructions[-1]
        return None

    @property
    def successors(self) -> List["BasicBlock"]:
        terminator = self.terminator
        return terminator.targets if terminator is not None else []

    @property
    def phis(self) -> List[HirInstruction]:
        return [instruction for instruction in self.instructions if instruction.op == HirOp.PHI]

    def append(self, instruction: HirInstruction) -> HirInstruction:
        instruction.block = self
        self.instructions.append(instruction)
        return instruction

    def insert(self, index: int, instruction: HirInstruction) -> HirInstruction:
        instruction.block = self
        self.instructions.insert(index, instruction)
        return instruction


class HirFunction:
    def __init__(self, name: str, definition: Optional[FunctionDefinition] = None):
        self.name = name
        self.definition = definition
        self.parameters: List[HirParameter] = []
        self.blocks: List[BasicBlock] = []
        self.next_value_id = 0
        self.next_block_id = 0

    @property
    def entry(self) -> BasicBlock:
        return self.blocks[0]

    def new_value_id(self) -> int:
        self.next_value_id += 1
        return self.next_value_id - 1

    def new_block(self) -> BasicBlock:
        block = BasicBlock(self.next_block_id)
        self.next_block_id += 1
        self.blocks.append(block)
        return block

    def add_parameter(self, value_type, name: str = "") -> HirParameter:
        parameter = HirParameter(self.new_value_id(), len(self.parameters), value_type, name)
        self.parameters.append(parameter)
        return parameter

    def instruction(self, op: HirOp, operands=None, value_type=None, payload=None, position=None) -> HirInstruction:
        return HirInstruction(self.new_value_id(), op, operands, value_type, payload, position)

    def instructions(self) -> Iterable[HirInstruction]:
        for block in self.blocks:
            yield from block.instructions

    def instruction_count(self) -> int:
        return sum(len(block.instructions) for block in self.blocks)

    def predecessors(self) -> Dict[BasicBlock, List[BasicBlock]]:
        result: Dict[BasicBlock, List[BasicBlock]] = {block: [] for block in self.blocks}
        for block in self.blocks:
            for successor in block.successors:
                if successor in result and block not in result[successor]:
                    result[successor].append(block)
        return result

    def reachable_blocks(self) -> List[BasicBlock]:
        seen: Set[BasicBlock] = set()
        order: List[BasicBlock] = []
        pending = [self.entry]
        while pending:
            block = pending.pop()
            if block in seen:
                continue
            seen.add(block)
            order.append(block)
            pending.extend(reversed(block.successors))
        return order

    def replace_uses(self, replacements: Dict[HirValue, HirValue]):
        """Rewrite every operand through replacements, following chains"""
        if not replacements:
            return

        def resolve(value: HirValue) -> HirValue:
            while value in replacements:
                value = replacements[value]
            return value

        for instruction in self.instructions():
            instruction.operands = [resolve(operand) for operand in instruction.operands]


# --- dominance ---
def dominators(function: HirFunction) -> Dict[BasicBlock, Set[BasicBlock]]:
    """Iterative dominator sets over the reachable blocks"""
    blocks = function.reachable_blocks()
    predecessors = function.predecessors()
    everything = set(blocks)
    result = {block: set(everything) for block in blocks}
    result[function.entry] = {function.entry}
    changed = True
    while changed:
        changed = False
        for block in blocks:
            if block is function.entry:
                continue
            incoming = [result[p] for p in predecessors[block] if p in result]
            new = set.intersection(*incoming) if incoming else set()
            new = new | {block}
            if new != result[block]:
                result[block] = new
                changed = True
    return result


# --- verifier ---
def verify_hir(function: HirFunction) -> List[str]:
    problems: List[str] = []
    if not function.blocks:
        return ["function has no blocks"]
    block_set = set(function.blocks)
    defined: Dict[HirValue, Optional[BasicBlock]] = {parameter: None for parameter in function.parameters}
    seen_ids: Set[int] = {parameter.id for parameter in function.parameters}
    for block in function.blocks:
        if not block.instructions:
            problems.append(f"{block.label} is empty")
            continue
        for index, instruction in enumerate(block.instructions):
            if instruction.id in seen_ids:
                problems.append(f"{instruction.label} is defined more than once")
            seen_ids.add(instruction.id)
            defined[instruction] = block
            if instruction.block is not block:
                problems.append(f"{instruction.label} does not belong to {block.label}")
            if instruction.is_terminator and index != len(block.instructions) - 1:
                problems.append(f"{block.label} has a terminator before its end")
            for target in instruction.targets:
                if target not in block_set:
                    problems.append(f"{block.label} branches to a block outside the function")
        if not block.instructions[-1].is_terminator:
            problems.append(f"{block.label} does not end in a terminator")
        seen_other = False
        for instruction in block.instructions:
            if instruction.op == HirOp.PHI and seen_other:
                problems.append(f"{instruction.label} is a phi after a non-phi instruction")
            seen_other = seen_other or instruction.op != HirOp.PHI
    if problems:
        return problems

    predecessors = function.predecessors()
    dominator_sets = dominators(function)
    for block in function.blocks:
        if block not in dominator_sets:
            continue
        positions = {instruction: index for index, instruction in enumerate(block.instructions)}
        for instruction in block.instructions:
            if instruction.op == HirOp.PHI:
                incoming = list(instruction.payload)
                if len(incoming) != len(instruction.operands):
                    problems.append(f"{instruction.label} has {len(instruction.operands)} inputs for "
                                    f"{len(incoming)} incoming blocks")
                    continue
                if sorted(b.id for b in incoming) != sorted(b.id for b in predecessors[block]):
                    problems.append(f"{instruction.label} inputs do not match the predecessors of {block.label}")
                for operand, source in zip(instruction.operands, incoming):
                    problems.extend(_check_use(operand, instruction, source, None, defined, dominator_sets))
                continue
            for operand in instruction.operands:
                problems.extend(_check_use(operand, instruction, block, positions, defined, dominator_sets))
    return problems


def _check_use(operand: HirValue, user: HirInstruction, block: BasicBlock, positions, defined,
               dominator_sets) -> List[str]:
    if operand not in defined:
        return [f"{user.label} uses {operand.label}, which is not defined in the function"]
    definition_block = defined[operand]
    if definition_block is None:
        return []
    if definition_block is block:
        if positions is not None and positions[operand] >= positions[user]:
            return [f"{user.label} uses {operand.label} before its definition"]
        return []
    if block in dominator_sets and definition_block not in dominator_sets[block]:
        return [f"the definition of {operand.label} does not dominate its use in {user.label}"]
    return []


# --- dump ---
def _describe_payload(instruction: HirInstruction) -> str:
    payload = instruction.payload
    if instruction.op == HirOp.CONSTANT:
        return print_string(payload)
    if instruction.op == HirOp.APPLY and payload is not None:
        return payload.display_name
    if instruction.op == HirOp.SEND:
        return f"#{payload.text}"
    if instruction.op in (HirOp.SLOT_GET, HirOp.SLOT_SET, HirOp.CAPTURE):
        return str(payload)
    if instruction.op == HirOp.MAKE_CLOSURE:
        return payload.display_name
    if instruction.op == HirOp.ALLOCA:
        return str(payload)
    return ""


def _type_name(value_type) -> str:
    return str(value_type) if value_type is not None else "Void"


def dump_hir(function: HirFunction) -> str:
    header = ", ".join(f"{p.label}: {_type_name(p.value_type)}" for p in function.parameters)
    lines = [f"function {function.name}({header})"]
    for block in function.blocks:
        lines.append(f"{block.label}:")
        for instruction in block.instructions:
            if instruction.op == HirOp.PHI:
                arguments = ", ".join(f"[{operand.label}, {source.label}]"
                                      for operand, source in zip(instruction.operands, instruction.payload))
            elif instruction.op == HirOp.BRANCH:
                arguments = instruction.payload.label
            elif instruction.op == HirOp.COND_BRANCH:
                arguments = f"{instruction.operands[0].label}, {instruction.payload[0].label}, " \
                            f"{instruction.payload[1].label}"
            else:
                payload = _describe_payload(instruction)
                arguments = ", ".join(([payload] if payload else []) + [o.label for o in instruction.operands])
            if instruction.is_terminator or instruction.op in (HirOp.STORE, HirOp.SLOT_SET):
                lines.append(f"  {instruction.op.value}({arguments})")
            else:
                lines.append(f"  {instruction.label} = {instruction.op.value}({arguments}) : "
                             f"{_type_name(instruction.value_type)}")
    return "\n".join(lines) + "\n"


# --- cloning ---
def clone_function(function: HirFunction, name: Optional[str] = None) -> HirFunction:
    """Independent copy with the same value and block ids"""
    copy = HirFunction(name or function.name, function.definition)
    copy.next_value_id = function.next_value_id
    copy.next_block_id = function.next_block_id
    values: Dict[HirValue, HirValue] = {}
    for parameter in function.parameters:
        new = HirParameter(parameter.id, parameter.index, parameter.value_type, parameter.name)
        copy.parameters.append(new)
        values[parameter] = new
    blocks: Dict[BasicBlock, BasicBlock] = {}
    for block in function.blocks:
        new_block = BasicBlock(block.id)
        copy.blocks.append(new_block)
        blocks[block] = new_block
        for instruction in block.instructions:
            values[instruction] = new_block.append(
                HirInstruction(instruction.id, instruction.op, [], instruction.value_type, instruction.payload,
                               instruction.position))
    for block in function.blocks:
        for instruction in block.instructions:
            new = values[instruction]
            new.operands = [values[operand] for operand in instruction.operands]
            new.payload = _map_blocks(instruction, blocks)
    return copy


def _map_blocks(instruction: HirInstruction, blocks: Dict[BasicBlock, BasicBlock]) -> Any:
    if instruction.op == HirOp.BRANCH:
        return blocks[instruction.payload]
    if instruction.op in (HirOp.COND_BRANCH, HirOp.PHI):
        return tuple(blocks[block] for block in instruction.payload)
    return instruction.payload


def known_callee(instruction: HirInstruction) -> Any:
    """The statically known FunctionDefinition or NativeFunction of an application"""
    if instruction.op == HirOp.APPLY and isinstance(instruction.payload, (FunctionDefinition, NativeFunction)):
        return instruction.payload
    return None
