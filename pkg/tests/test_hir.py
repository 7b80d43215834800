"""
Tests for HIR construction, promotion, the optimization passes and HIR interpretation
"""

import pytest

from src.data_structures import PassOptions
from src.hir import HirOp, verify_hir, dump_hir, clone_function, known_callee
from src.hir_interpreter import HirInterpreter, interpret_hir
from src.hir_passes import HirPipeline
from src.runtime import make_number, number_value, values_equal
from src.session import Session
from tests.sample_programs import FACTORIAL, FIBONACCI, SUM_TO, POINTER_BUMP, COUNTER_CLASS, SAMPLE_CLASS_PROGRAM

DIAMOND = "function f(x: Int32) => Int32 := if: true then: x + 1i32 else: x - 1i32."

INLINING = """function g(x: Int32) => Int32 := x * 2i32.
function f(x: Int32) => Int32 := g(x) + 1i32.
"""

NO_PASSES = PassOptions(constant_propagation=False, simplify_control_flow=False, inlining=False)


def ops(function):
    return [instruction.op for instruction in function.instructions()]


@pytest.fixture
def session():
    return Session()


@pytest.fixture
def pipeline():
    return HirPipeline()


@pytest.mark.parametrize("source", [FACTORIAL, FIBONACCI, SUM_TO, POINTER_BUMP, COUNTER_CLASS, SAMPLE_CLASS_PROGRAM])
def test_every_stage_verifies(session, pipeline, source):
    session.evaluate_source(source)
    for definition in session.defined_functions():
        for function in (pipeline.built(definition), pipeline.promoted(definition), pipeline.optimized(definition)):
            assert verify_hir(function) == [], dump_hir(function)


def test_stages_are_cached(session, pipeline):
    session.evaluate_source(DIAMOND)
    definition = session.lookup("f")
    assert pipeline.built(definition) is pipeline.built(definition)
    assert pipeline.promoted(definition) is not pipeline.built(definition)
    assert pipeline.optimized(definition) is pipeline.optimized(definition)


def test_promotion_removes_local_cells(session, pipeline):
    session.evaluate_source(SUM_TO)
    definition = session.lookup("sumTo")
    assert HirOp.ALLOCA in ops(pipeline.built(definition))
    promoted = ops(pipeline.promoted(definition))
    assert HirOp.ALLOCA not in promoted
    assert HirOp.LOAD not in promoted
    assert HirOp.PHI in promoted


def test_escaping_cell_is_kept(session, pipeline):
    session.evaluate_source(POINTER_BUMP)
    assert HirOp.ALLOCA in ops(pipeline.promoted(session.lookup("run")))


def test_constant_branch_collapses_the_diamond(session, pipeline):
    session.evaluate_source(DIAMOND)
    definition = session.lookup("f")
    promoted = pipeline.promoted(definition)
    optimized = pipeline.optimized(definition)
    assert len(promoted.blocks) == 4
    assert len(optimized.blocks) <= len(promoted.blocks) - 2
    assert HirOp.COND_BRANCH not in ops(optimized)
    assert HirOp.PHI not in ops(optimized)


def test_small_callee_is_inlined(session, pipeline):
    session.evaluate_source(INLINING)
    g = session.lookup("g")
    f = session.lookup("f")
    assert any(known_callee(instruction) is g for instruction in pipeline.promoted(f).instructions())
    assert not any(known_callee(instruction) is g for instruction in pipeline.optimized(f).instructions())


def test_recursive_callee_is_not_inlined_into_itself(session, pipeline):
    session.evaluate_source(FACTORIAL)
    definition = session.lookup("factorial")
    calls = [instruction for instruction in pipeline.optimized(definition).instructions()
             if known_callee(instruction) is definition]
    assert len(calls) == 1


def test_inline_threshold_is_respected(session):
    session.evaluate_source(INLINING)
    pipeline = HirPipeline(PassOptions(inline_threshold=0))
    g = session.lookup("g")
    assert any(known_callee(instruction) is g for instruction in pipeline.optimized(session.lookup("f")).instructions())


@pytest.mark.parametrize("source", [DIAMOND, INLINING])
@pytest.mark.parametrize("argument", [-7, 0, 1, 41, 2 ** 31 - 1])
def test_passes_preserve_results(source, argument):
    session = Session()
    session.evaluate_source(source)
    definition = session.lookup("f")
    value = make_number(argument, session.universe["Int32"])
    plain = HirPipeline(NO_PASSES)
    optimized = HirPipeline()
    before = interpret_hir(plain.promoted(definition), [value], plain)
    after = interpret_hir(optimized.optimized(definition), [value], optimized)
    assert values_equal(before, after)


def test_interpreter_runs_loops_and_recursion(session):
    session.evaluate_source(SUM_TO)
    session.evaluate_source(FIBONACCI)
    interpreter = HirInterpreter()
    int32 = session.universe["Int32"]
    assert number_value(interpreter.call(session.lookup("sumTo"), [make_number(10, int32)])) == 55
    assert number_value(interpreter.call(session.lookup("fib"), [make_number(12, int32)])) == 144


def test_clone_is_independent(session, pipeline):
    session.evaluate_source(DIAMOND)
    original = pipeline.promoted(session.lookup("f"))
    copy = clone_function(original, "copy")
    copy.blocks.pop()
    assert len(original.blocks) == 4
    assert copy.name == "copy"


def test_dump_names_blocks_and_values(session, pipeline):
    session.evaluate_source(DIAMOND)
    text = dump_hir(pipeline.promoted(session.lookup("f")))
    assert text.startswith("function f(")
    assert "condBranch(" in text
    assert "phi(" in text
