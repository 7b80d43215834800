"""
Tests for the bytecode compiler, verifier and virtual machine
"""

import pytest

from src.bytecode import Opcode, Instruction, BytecodeFunction, verify_bytecode, disassemble
from src.bytecode_compiler import compile_to_bytecode
from src.bytecode_vm import BytecodeVM
from src.errors import EvaluationError
from src.runtime import make_number, number_value, print_string
from src.session import Session
from tests.sample_programs import FACTORIAL, FIBONACCI, SUM_TO, POINTER_BUMP, COUNTER_CLASS, SAMPLE_CLASS_PROGRAM


@pytest.fixture
def session():
    return Session(engine="bytecode")


def int32(session, value):
    return make_number(value, session.universe["Int32"])


@pytest.mark.parametrize("source", [FACTORIAL, FIBONACCI, SUM_TO, POINTER_BUMP, COUNTER_CLASS, SAMPLE_CLASS_PROGRAM])
def test_compiled_functions_verify(source):
    session = Session()
    session.evaluate_source(source)
    definitions = session.defined_functions()
    assert definitions
    for definition in definitions:
        compiled = compile_to_bytecode(definition)
        assert verify_bytecode(compiled) == [], disassemble(compiled)
        assert compiled.instructions[-1].opcode == Opcode.RETURN


def test_compilation_is_cached(session):
    session.evaluate_source("function same(x: Int32) => Int32 := x.")
    definition = session.lookup("same")
    assert compile_to_bytecode(definition) is compile_to_bytecode(definition)


def test_while_loop_uses_jumps_and_cells():
    session = Session()
    session.evaluate_source(SUM_TO)
    compiled = compile_to_bytecode(session.lookup("sumTo"))
    assert compiled.count(Opcode.JUMP_IF_FALSE) >= 1
    assert compiled.count(Opcode.JUMP) >= 1
    assert compiled.count(Opcode.ALLOC_CELL) == 2


def test_intrinsics_are_compiled_inline():
    session = Session()
    session.evaluate_source("function add(a: Int32, b: Int32) => Int32 := a + b.")
    compiled = compile_to_bytecode(session.lookup("add"))
    assert compiled.count(Opcode.INTRINSIC) == 1
    assert compiled.count(Opcode.CALL) == 0
    assert compiled.count(Opcode.LOAD_ARGUMENT) == 2


def test_disassembly_lists_every_instruction():
    session = Session()
    session.evaluate_source("function add(a: Int32, b: Int32) => Int32 := a + b.")
    compiled = compile_to_bytecode(session.lookup("add"))
    lines = disassemble(compiled).splitlines()
    assert lines[0].startswith("function add args=2")
    assert len(lines) == len(compiled.instructions) + 1
    assert "Return" in lines[-1]


def test_verifier_reports_missing_return():
    function = BytecodeFunction("broken", 0, 0, register_count=1, literals=[1])
    function.instructions.append(Instruction(Opcode.LOAD_LITERAL, (0, 0)))
    problems = verify_bytecode(function)
    assert problems and problems[0].startswith("missing return")
    assert verify_bytecode(BytecodeFunction("empty", 0, 0))[0].startswith("missing return")


def test_verifier_reports_bad_operands():
    function = BytecodeFunction("bad", 0, 0, register_count=1)
    function.instructions.append(Instruction(Opcode.MOVE, (0, 5)))
    function.instructions.append(Instruction(Opcode.RETURN, (0,)))
    assert verify_bytecode(function) == ["0: reg operand 5 out of range"]
    function.instructions[0] = Instruction(Opcode.MOVE, (0,))
    assert verify_bytecode(function) == ["0: Move takes 2 operands"]


def test_vm_runs_sample_function(session):
    session.evaluate_source(SAMPLE_CLASS_PROGRAM.split("printLine(")[0])
    vm = BytecodeVM()
    result = vm.call(session.lookup("sampleFunction"), [int32(session, 2), int32(session, 3)])
    assert number_value(result) == 5


def test_vm_runs_recursion_without_host_stack(session):
    session.evaluate_source("function down(n: Int32) => Int32 := if: n = 0i32 then: 0i32 else: down(n - 1i32).")
    result = BytecodeVM().call(session.lookup("down"), [int32(session, 5000)])
    assert number_value(result) == 0


def test_vm_depth_limit(session):
    session.evaluate_source("function forever(n: Int32) => Int32 := forever(n + 1i32).")
    with pytest.raises(EvaluationError) as error:
        BytecodeVM(depth_limit=50).call(session.lookup("forever"), [int32(session, 0)])
    assert error.value.kind == "stack-overflow"


def test_bytecode_engine_runs_programs(session):
    assert print_string(session.evaluate_source(FACTORIAL)) == "3628800"
    assert print_string(session.evaluate_source(COUNTER_CLASS)) == "2"
