"""
Register bytecode: instruction set, function container, verifier and
disassembler.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Tuple

from .data_structures import SourcePosition, EMPTY_POSITION


class Opcode(Enum):
    LOAD_LITERAL = "LoadLiteral"
    MOVE = "Move"
    LOAD_ARGUMENT = "LoadArgument"
    LOAD_CAPTURE = "LoadCapture"
    MAKE_CLOSURE = "MakeClosure"
    CALL = "Call"
    SEND = "Send"
    ALLOC_CELL = "AllocCell"
    CELL_LOAD = "CellLoad"
    CELL_STORE = "CellStore"
    SLOT_LOAD = "SlotLoad"
    SLOT_STORE = "SlotStore"
    JUMP = "Jump"
    JUMP_IF_FALSE = "JumpIfFalse"
    JUMP_IF_TRUE = "JumpIfTrue"
    RETURN = "Return"
    INTRINSIC = "Intrinsic"


# Operand kinds: dst (written register), reg (read register), regs (read registers),
# lit (literal index), arg, cap, slot, target (instruction index), id (intrinsic id).
OPERAND_KINDS: Dict[Opcode, Tuple[str, ...]] = {
    Opcode.LOAD_LITERAL: ("dst", "lit"),
    Opcode.MOVE: ("dst", "reg"),
    Opcode.LOAD_ARGUMENT: ("dst", "arg"),
    Opcode.LOAD_CAPTURE: ("dst", "cap"),
    Opcode.MAKE_CLOSURE: ("dst", "lit", "regs"),
    Opcode.CALL: ("dst", "reg", "regs"),
    Opcode.SEND: ("dst", "lit", "reg", "regs"),
    Opcode.ALLOC_CELL: ("dst",),
    Opcode.CELL_LOAD: ("dst", "reg"),
    Opcode.CELL_STORE: ("reg", "reg"),
    Opcode.SLOT_LOAD: ("dst", "reg", "slot"),
    Opcode.SLOT_STORE: ("reg", "slot", "reg"),
    Opcode.JUMP: ("target",),
    Opcode.JUMP_IF_FALSE: ("reg", "target"),
    Opcode.JUMP_IF_TRUE: ("reg", "target"),
    Opcode.RETURN: ("reg",),
    Opcode.INTRINSIC: ("dst", "id", "regs"),
}

TERMINATORS = (Opcode.JUMP, Opcode.RETURN)


@dataclass
class Instruction:
    opcode: Opcode
    operands: Tuple[Any, ...] = ()
    position: SourcePosition = EMPTY_POSITION

    def targets(self) -> List[int]:
        return [operand for kind, operand in zip(OPERAND_KINDS[self.opcode], self.operands) if kind == "target"]


@dataclass(eq=False)
class BytecodeFunction:
    name: str
    argument_count: int
    capture_count: int
    register_count: int = 0
    literals: List[Any] = field(default_factory=list)
    instructions: List[Instruction] = field(default_factory=list)

    def count(self, opcode: Opcode) -> int:
        return sum(1 for instruction in self.instructions if instruction.opcode == opcode)


def verify_bytecode(function: BytecodeFunction) -> List[str]:
    """Problems found in function; an empty list means it is well formed"""
    problems: List[str] = []
    size = len(function.instructions)
    limits = {"dst": function.register_count, "reg": function.register_count, "lit": len(function.literals),
              "arg": function.argument_count, "cap": function.capture_count, "target": size}
    for index, instruction in enumerate(function.instructions):
        kinds = OPERAND_KINDS[instruction.opcode]
        if len(kinds) != len(instruction.operands):
            problems.append(f"{index}: {instruction.opcode.value} takes {len(kinds)} operands")
            continue
        for kind, operand in zip(kinds, instruction.operands):
            if kind == "regs":
                bad = [register for register in operand if not 0 <= register < function.register_count]
                if bad:
                    problems.append(f"{index}: registers {bad} out of range")
            elif kind in limits and not (isinstance(operand, int) and 0 <= operand < limits[kind]):
                problems.append(f"{index}: {kind} operand {operand} out of range")
            elif kind == "slot" and operand < 0:
                problems.append(f"{index}: negative slot index {operand}")
    if problems:
        return problems

    if size == 0:
        return ["missing return: the function has no instructions"]
    visited = set()
    pending = [0]
    while pending:
        index = pending.pop()
        while index not in visited:
            if index >= size:
                problems.append(f"missing return: control falls off the end after {size - 1}")
                break
            visited.add(index)
            instruction = function.instructions[index]
            pending.extend(instruction.targets())
            if instruction.opcode in TERMINATORS:
                break
            index += 1
    return problems


def _format_operand(kind: str, operand: Any, function: BytecodeFunction) -> str:
    if kind in ("dst", "reg"):
        return f"r{operand}"
    if kind == "regs":
        return "(" + ", ".join(f"r{register}" for register in operand) + ")"
    if kind == "lit":
        from .runtime import print_string
        return f"lit{operand}<{print_string(function.literals[operand])}>"
    if kind == "arg":
        return f"arg{operand}"
    if kind == "cap":
        return f"cap{operand}"
    if kind == "target":
        return f"@{operand}"
    if kind == "slot":
        return f"#{operand}"
    return str(operand)


def disassemble(function: BytecodeFunction) -> str:
    lines = [f"function {function.name} args={function.argument_count} captures={function.capture_count} "
             f"registers={function.register_count}"]
    for index, instruction in enumerate(function.instructions):
        operands = ", ".join(_format_operand(kind, operand, function)
                             for kind, operand in zip(OPERAND_KINDS[instruction.opcode], instruction.operands))
        lines.append(f"{index:4d}: {instruction.opcode.value} {operands}".rstrip())
    return "\n".join(lines) + "\n"
