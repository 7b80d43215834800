"""
Middle-level three address code. Every instruction is one machine primitive
with its destination and operands; operands are virtual registers before
allocation and physical registers or frame slots after it.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from .object_model import FunctionDefinition, NativeFunction
from .runtime import print_string

PHYSICAL_REGISTER_COUNT = 12
FRAME_ALIGNMENT = 16

ARITHMETIC_OPS = ("add", "sub", "mul", "div", "rem", "and", "or", "xor", "shl", "shr")
COMPARE_OPS = ("cmp-eq", "cmp-ne", "cmp-lt", "cmp-le", "cmp-gt", "cmp-ge")
TERMINATOR_OPS = ("jump", "return")
BRANCH_OPS = ("branch-if", "branch-cmp")


@dataclass(frozen=True)
class VirtualRegister:
    number: int

    def __str__(self):
        return f"v{self.number}"


@dataclass(frozen=True)
class PhysicalRegister:
    number: int

    def __str__(self):
        return f"r{self.number}"


@dataclass(frozen=True)
class FrameSlot:
    index: int
    size: int = 8
    alignment: int = 8
    kind: str = "spill"

    def __str__(self):
        return f"[s{self.index}]"


@dataclass(frozen=True, eq=False)
class Constant:
    value: Any

    def __str__(self):
        value = self.value
        if isinstance(value, (FunctionDefinition, NativeFunction)):
            return f"@{value.display_name}"
        return f"#{print_string(value)}"


@dataclass(frozen=True)
class Label:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class MirInstruction:
    """
    op is the primitive; native is the intrinsic implementing arithmetic and
    compare ops; relation names the compare of a fused branch-cmp; position is
    the source position of the call or primitive, reported by runtime errors.
    """
    op: str
    dst: Any = None
    operands: Tuple[Any, ...] = ()
    native: Optional[NativeFunction] = None
    relation: Optional[str] = None
    position: Any = field(default=None, compare=False)

    @property
    def is_terminator(self) -> bool:
        return self.op in TERMINATOR_OPS

    @property
    def labels(self) -> List[Label]:
        return [operand for operand in self.operands if isinstance(operand, Label)]

    def reads(self) -> List[Any]:
        return [operand for operand in self.operands if isinstance(operand, (VirtualRegister, PhysicalRegister,
                                                                              FrameSlot))]


@dataclass
class MirBlock:
    label: Label
    instructions: List[MirInstruction] = field(default_factory=list)

    def successors(self) -> List[Label]:
        result = []
        for instruction in self.instructions:
            for label in instruction.labels:
                if label not in result:
                    result.append(label)
        return result


@dataclass
class FrameLayout:
    offsets: Dict[int, int] = field(default_factory=dict)
    slots: List[FrameSlot] = field(default_factory=list)
    size: int = 0


@dataclass
class MirFunction:
    name: str
    definition: Optional[FunctionDefinition] = None
    parameters: List[Any] = field(default_factory=list)
    environment: Any = None
    blocks: List[MirBlock] = field(default_factory=list)
    virtual_register_count: int = 0
    frame_slots: List[FrameSlot] = field(default_factory=list)
    frame: Optional[FrameLayout] = None
    assignment: Dict[VirtualRegister, Any] = field(default_factory=dict)
    stage: str = "lowered"

    def new_register(self) -> VirtualRegister:
        self.virtual_register_count += 1
        return VirtualRegister(self.virtual_register_count - 1)

    def new_frame_slot(self, size: int = 8, alignment: int = 8, kind: str = "spill") -> FrameSlot:
        slot = FrameSlot(len(self.frame_slots), size, alignment, kind)
        self.frame_slots.append(slot)
        return slot

    def block(self, label: Label) -> MirBlock:
        for block in self.blocks:
            if block.label == label:
                return block
        raise KeyError(label)

    def instructions(self) -> List[MirInstruction]:
        return [instruction for block in self.blocks for instruction in block.instructions]

    def instruction_count(self) -> int:
        return sum(len(block.instructions) for block in self.blocks)

    def count(self, op: str) -> int:
        return sum(1 for instruction in self.instructions() if instruction.op == op)

    def copy(self, **changes) -> "MirFunction":
        blocks = [MirBlock(block.label, list(block.instructions)) for block in self.blocks]
        return replace(self, blocks=blocks, parameters=list(self.parameters), frame_slots=list(self.frame_slots),
                       assignment=dict(self.assignment), **changes)


def align_up(value: int, alignment: int) -> int:
    return (value + alignment - 1) // alignment * alignment


def layout_frame(slots: List[FrameSlot]) -> FrameLayout:
    """Place slots in order at offsets aligned to their alignment"""
    layout = FrameLayout(slots=list(slots))
    cursor = 0
    for slot in slots:
        offset = align_up(cursor, slot.alignment)
        layout.offsets[slot.index] = offset
        cursor = offset + slot.size
    layout.size = align_up(cursor, FRAME_ALIGNMENT) if slots else 0
    return layout


# --- listing ---
MNEMONICS = {
    "cmp-eq": "seq", "cmp-ne": "sne", "cmp-lt": "slt", "cmp-le": "sle", "cmp-gt": "sgt", "cmp-ge": "sge",
    "jump": "j", "branch-if": "bnez", "return": "ret", "frame-addr": "lea", "load": "ld", "store": "st",
}
BRANCH_MNEMONICS = {"cmp-eq": "beq", "cmp-ne": "bne", "cmp-lt": "blt", "cmp-le": "ble", "cmp-gt": "bgt",
                    "cmp-ge": "bge"}


def _operand_text(operand: Any, frame: Optional[FrameLayout]) -> str:
    if isinstance(operand, FrameSlot) and frame is not None and operand.index in frame.offsets:
        return f"[fp+{frame.offsets[operand.index]}]"
    return str(operand)


def format_instruction(instruction: MirInstruction, frame: Optional[FrameLayout] = None) -> str:
    text = lambda operand: _operand_text(operand, frame)
    op = instruction.op
    if op == "branch-cmp":
        mnemonic = BRANCH_MNEMONICS[instruction.relation]
        return f"{mnemonic} " + ", ".join(text(operand) for operand in instruction.operands)
    if op in ("load", "store"):
        base, offset = instruction.operands[0], instruction.operands[1]
        address = f"[{text(base)}+{offset}]"
        if op == "load":
            return f"ld {text(instruction.dst)}, {address}"
        return f"st {address}, {text(instruction.operands[2])}"
    if op == "frame-addr":
        return f"lea {text(instruction.dst)}, {text(instruction.operands[0])}"
    if op == "call":
        callee, arguments = instruction.operands[0], instruction.operands[1:]
        target = f"{text(instruction.dst)}, " if instruction.dst is not None else ""
        return f"call {target}{text(callee)}(" + ", ".join(text(a) for a in arguments) + ")"
    mnemonic = MNEMONICS.get(op, op)
    parts = ([text(instruction.dst)] if instruction.dst is not None else [])
    parts += [text(operand) for operand in instruction.operands]
    return f"{mnemonic} " + ", ".join(parts)


def format_listing(function: MirFunction) -> str:
    """Deterministic assembly-style listing of any stage of a function"""
    parameters = ", ".join(_operand_text(p, function.frame) for p in function.parameters)
    lines = [f"; function {function.name}({parameters}) stage={function.stage}"]
    if function.environment is not None:
        lines.append(f"; environment in {_operand_text(function.environment, function.frame)}")
    if function.frame is not None:
        slots = ", ".join(f"s{slot.index}@{function.frame.offsets[slot.index]}:{slot.size}"
                          for slot in function.frame.slots)
        lines.append(f"; frame size {function.frame.size}" + (f" ({slots})" if slots else ""))
    lines.append(f"{function.name}:")
    for block in function.blocks:
        lines.append(f"{block.label}:")
        for instruction in block.instructions:
            lines.append(f"    {format_instruction(instruction, function.frame)}")
    return "\n".join(lines) + "\n"
