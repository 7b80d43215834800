"""
Tests for MIR lowering, compare-branch fusion, register allocation, frame layout and emulation
"""

import io
import unittest

from src.data_structures import PassOptions
from src.hir_passes import HirPipeline
from src.mir import (MirFunction, MirBlock, MirInstruction, VirtualRegister, PhysicalRegister, FrameSlot, Constant,
                     Label, layout_frame, format_listing)
from src.mir_emulator import MirEmulator
from src.mir_lowering import NEW_CELL
from src.mir_passes import (MirPipeline, MIR_STAGES, fuse_compare_branch, allocate_registers, check_allocation,
                            spill_slot_count, SCRATCH_REGISTERS)
from src.runtime import make_number, number_value
from src.session import Session
from tests.sample_programs import FIBONACCI, SUM_TO, POINTER_BUMP, COUNTER_CLASS, LOOP_CAPTURES, CORPUS

WIDE_SUM = ("function wide(a: Int32) => Int32 := {\n"
            + "".join(f"    let x{index} := a + {index}i32.\n" for index in range(20))
            + "    " + " + ".join(f"x{index}" for index in range(20)) + "\n}.")


def stressor(count=20):
    """count constants moved into registers that all stay live until one long sum"""
    function = MirFunction("stressor")
    block = MirBlock(Label("entry"))
    function.blocks.append(block)
    values = []
    for index in range(count):
        register = function.new_register()
        block.instructions.append(MirInstruction("mov", register, (Constant(index),)))
        values.append(register)
    total = values[0]
    for value in values[1:]:
        result = function.new_register()
        block.instructions.append(MirInstruction("add", result, (total, value)))
        total = result
    block.instructions.append(MirInstruction("return", None, (total,)))
    return function


class TestLowering(unittest.TestCase):

    def setUp(self):
        self.session = Session()
        self.pipeline = MirPipeline()

    def test_all_stages_are_produced_and_cached(self):
        self.session.evaluate_source(FIBONACCI)
        definition = self.session.lookup("fib")
        for stage in MIR_STAGES:
            function = self.pipeline.stage(definition, stage)
            self.assertEqual(function.stage, stage)
            self.assertIs(self.pipeline.stage(definition, stage), function)

    def test_unknown_stage(self):
        self.session.evaluate_source(FIBONACCI)
        with self.assertRaises(ValueError):
            self.pipeline.stage(self.session.lookup("fib"), "assembled")

    def test_lowered_code_uses_virtual_registers(self):
        self.session.evaluate_source(FIBONACCI)
        lowered = self.pipeline.stage(self.session.lookup("fib"), "lowered")
        for instruction in lowered.instructions():
            for operand in instruction.reads():
                self.assertIsInstance(operand, VirtualRegister)
        self.assertGreaterEqual(lowered.count("cmp-lt"), 1)
        self.assertGreaterEqual(lowered.count("call"), 2)

    def test_escaping_local_gets_a_frame_slot(self):
        self.session.evaluate_source(POINTER_BUMP)
        lowered = self.pipeline.stage(self.session.lookup("run"), "lowered")
        self.assertEqual([slot.kind for slot in lowered.frame_slots], ["alloca"])
        self.assertEqual(lowered.frame_slots[0].size, 4)
        self.assertEqual(lowered.count("frame-addr"), 1)

    def test_local_captured_inside_a_loop_gets_a_cell_per_iteration(self):
        self.session.evaluate_source(LOOP_CAPTURES)
        lowered = self.pipeline.stage(self.session.lookup("loopCaptures"), "lowered")
        self.assertNotIn("alloca", [slot.kind for slot in lowered.frame_slots])
        cells = [instruction for instruction in lowered.instructions()
                 if instruction.op == "call" and instruction.operands[0] == Constant(NEW_CELL)]
        self.assertEqual(len(cells), 1)


class TestFusion(unittest.TestCase):

    def test_compare_and_branch_become_one_instruction(self):
        session = Session()
        session.evaluate_source(FIBONACCI)
        session.evaluate_source(SUM_TO)
        for name in ("fib", "sumTo"):
            lowered = MirPipeline().stage(session.lookup(name), "lowered")
            fused = fuse_compare_branch(lowered)
            fused_count = fused.count("branch-cmp")
            self.assertGreaterEqual(fused_count, 1)
            self.assertEqual(fused.instruction_count() - lowered.instruction_count(), -fused_count)
            self.assertEqual(lowered.count("branch-if") - fused.count("branch-if"), fused_count)
            self.assertEqual(lowered.stage, "lowered")

    def test_compare_with_other_uses_is_kept(self):
        function = MirFunction("kept", parameters=[VirtualRegister(0), VirtualRegister(1)],
                               virtual_register_count=3)
        condition = VirtualRegister(2)
        function.blocks = [
            MirBlock(Label("entry"), [MirInstruction("cmp-lt", condition, (VirtualRegister(0), VirtualRegister(1))),
                                      MirInstruction("branch-if", None, (condition, Label("yes"))),
                                      MirInstruction("return", None, (condition,))]),
            MirBlock(Label("yes"), [MirInstruction("return", None, (condition,))]),
        ]
        self.assertEqual(fuse_compare_branch(function).count("branch-cmp"), 0)


class TestAllocation(unittest.TestCase):

    def test_spill_stressor(self):
        function = stressor()
        allocated = allocate_registers(function)
        self.assertGreaterEqual(spill_slot_count(allocated), 8)
        self.assertEqual(check_allocation(function, allocated.assignment), [])
        for location in allocated.assignment.values():
            self.assertNotIn(location, SCRATCH_REGISTERS)
        for instruction in allocated.instructions():
            for operand in instruction.reads():
                self.assertIsInstance(operand, (PhysicalRegister, FrameSlot))

    def test_small_function_does_not_spill(self):
        allocated = allocate_registers(stressor(4))
        self.assertEqual(spill_slot_count(allocated), 0)

    def test_checker_reports_shared_locations(self):
        function = stressor(3)
        shared = {register: PhysicalRegister(0) for register in allocate_registers(function).assignment}
        self.assertTrue(any("share" in problem for problem in check_allocation(function, shared)))

    def test_wide_sum_spills_and_still_computes(self):
        session = Session()
        session.evaluate_source(WIDE_SUM)
        definition = session.lookup("wide")
        pipeline = MirPipeline()
        allocated = pipeline.stage(definition, "allocated")
        self.assertGreaterEqual(spill_slot_count(allocated), 8)
        emulator = MirEmulator(pipeline)
        result = emulator.call(definition, [make_number(1, session.universe["Int32"])])
        self.assertEqual(number_value(result), 20 + sum(range(20)))


    def test_every_corpus_function_allocates_cleanly(self):
        for sample in CORPUS:
            with self.subTest(sample=sample.name):
                session = Session(output=io.StringIO())
                session.evaluate_source(sample.source)
                pipeline = MirPipeline()
                for definition in session.defined_functions() + session.thunks:
                    definition.ensure_analyzed()
                    fused = pipeline.stage(definition, "fused")
                    allocated = pipeline.stage(definition, "allocated")
                    self.assertEqual(check_allocation(fused, allocated.assignment), [], definition.display_name)


class TestFrameLayout(unittest.TestCase):

    def test_two_word_slots(self):
        layout = layout_frame([FrameSlot(0), FrameSlot(1)])
        self.assertEqual(layout.offsets, {0: 0, 1: 8})
        self.assertEqual(layout.size, 16)

    def test_byte_slot_then_word_slot_is_padded(self):
        layout = layout_frame([FrameSlot(0, 1, 1, "alloca"), FrameSlot(1)])
        self.assertEqual(layout.offsets, {0: 0, 1: 8})
        self.assertEqual(layout.size, 16)

    def test_frame_size_is_rounded_to_sixteen(self):
        self.assertEqual(layout_frame([FrameSlot(0, 4, 4)]).size, 16)
        self.assertEqual(layout_frame([FrameSlot(index) for index in range(3)]).size, 32)

    def test_empty_frame(self):
        self.assertEqual(layout_frame([]).size, 0)


class TestListingAndEmulation(unittest.TestCase):

    def setUp(self):
        self.session = Session()
        self.int32 = self.session.universe["Int32"]

    def test_listing_is_deterministic(self):
        self.session.evaluate_source(FIBONACCI)
        definition = self.session.lookup("fib")
        first = format_listing(MirPipeline().stage(definition, "laid-out"))
        definition.mir_cache.clear()
        second = format_listing(MirPipeline().stage(definition, "laid-out"))
        self.assertEqual(first, second)
        self.assertTrue(first.startswith("; function fib("))
        self.assertIn("stage=laid-out", first)
        self.assertIn("; frame size", first)
        self.assertIn("fib:", first)

    def test_fused_branch_mnemonic(self):
        self.session.evaluate_source(FIBONACCI)
        listing = format_listing(MirPipeline().stage(self.session.lookup("fib"), "fused"))
        self.assertIn("blt ", listing)

    def test_emulator_runs_every_stage(self):
        self.session.evaluate_source(SUM_TO)
        definition = self.session.lookup("sumTo")
        for stage in MIR_STAGES:
            emulator = MirEmulator(stage=stage)
            self.assertEqual(number_value(emulator.call(definition, [make_number(10, self.int32)])), 55)

    def test_emulator_without_optimizations(self):
        self.session.evaluate_source(POINTER_BUMP)
        pipeline = MirPipeline(HirPipeline(PassOptions(False, False, False)))
        self.assertEqual(number_value(MirEmulator(pipeline).call(self.session.lookup("run"), [])), 42)

    def test_emulator_handles_objects(self):
        self.session.evaluate_source(COUNTER_CLASS)
        result = MirEmulator().call(self.session.lookup("countTwice"), [])
        self.assertEqual(number_value(result), 2)


if __name__ == '__main__':
    unittest.main()
