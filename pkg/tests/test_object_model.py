"""
Tests for the object model and the runtime value helpers
"""

import unittest

from src.bootstrap import universe
from src.errors import EvaluationError
from src.object_model import (Immediate, ImmediateTag, ByteTuple, SlotTuple, ObjectKind, MemoryHandle,
                              FunctionDefinition, FunctionFlag, Closure, Environment, ScopeKind, make_object,
                              intern_symbol)
from src.runtime import (make_number, make_integer, make_string, make_array, make_tuple, number_value,
                         print_string, display_string, values_equal, identical, wrap_integer)


class TestObjectKinds(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.universe = universe()

    def test_small_integers_are_immediates(self):
        value = make_integer(42)
        self.assertIsInstance(value, Immediate)
        self.assertEqual(value.object_kind, ObjectKind.IMMEDIATE)
        self.assertIs(value.object_type, self.universe["Integer"])

    def test_large_integers_are_boxed(self):
        value = make_integer(1 << 80)
        self.assertIsInstance(value, ByteTuple)
        self.assertEqual(number_value(value), 1 << 80)
        self.assertEqual(print_string(value), str(1 << 80))

    def test_primitive_numbers_wrap_to_their_width(self):
        self.assertEqual(number_value(make_number(256, self.universe["UInt8"])), 0)
        self.assertEqual(number_value(make_number(300, self.universe["UInt8"])), 44)
        self.assertEqual(number_value(make_number(2 ** 31, self.universe["Int32"])), -2 ** 31)
        self.assertEqual(wrap_integer(-1, 16, False), 65535)

    def test_make_object_layouts(self):
        sample_class = self.universe["Object"]
        instance = make_object(sample_class, 1)
        self.assertIsInstance(instance, SlotTuple)
        self.assertIs(instance.slots[0], self.universe.nil)
        text = make_object(self.universe["String"], "abc")
        self.assertIsInstance(text, ByteTuple)
        self.assertEqual(text.size, 3)

    def test_make_object_rejects_mismatched_payload(self):
        with self.assertRaises(EvaluationError) as context:
            make_object(self.universe["String"], 3)
        self.assertEqual(context.exception.kind, "payload-kind-mismatch")

    def test_identity_hashes_are_distinct(self):
        first = make_object(self.universe["Object"], 1)
        second = make_object(self.universe["Object"], 1)
        self.assertNotEqual(first.identity_hash, second.identity_hash)
        self.assertEqual(first.identity_hash, first.identity_hash)

    def test_symbols_are_interned(self):
        self.assertIs(intern_symbol("with:with:"), intern_symbol("with:with:"))
        self.assertIsNot(intern_symbol("a"), intern_symbol("b"))


class TestPrinting(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.universe = universe()

    def test_print_string_forms(self):
        nil = self.universe.nil
        self.assertEqual(print_string(make_integer(25)), "25")
        self.assertEqual(print_string(make_number(2.75, self.universe["Float64"])), "2.75")
        self.assertEqual(print_string(make_string("x")), '"x"')
        self.assertEqual(print_string(Immediate(ord("A"), ImmediateTag.CHARACTER)), "'A'")
        self.assertEqual(print_string(intern_symbol("foo")), "#foo")
        self.assertEqual(print_string(make_array([make_integer(1), make_integer(2), nil])), "#(1 2 nil)")
        self.assertEqual(print_string(make_tuple([make_integer(1), make_integer(2)])), "(1, 2)")
        self.assertEqual(print_string(self.universe.void), "void")
        self.assertEqual(print_string(self.universe["Int32"]), "Int32")

    def test_display_string_drops_quotes(self):
        self.assertEqual(display_string(make_string("hello")), "hello")
        self.assertEqual(display_string(intern_symbol("foo")), "foo")
        self.assertEqual(display_string(make_integer(7)), "7")


class TestEquality(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.universe = universe()

    def test_numbers_compare_by_bits(self):
        int32 = self.universe["Int32"]
        self.assertTrue(identical(make_number(5, int32), make_number(5, int32)))
        self.assertFalse(identical(make_number(5, int32), make_number(5, self.universe["Int64"])))
        self.assertTrue(identical(make_integer(3), make_integer(3)))

    def test_structural_equality(self):
        first = make_array([make_integer(1), make_string("a")])
        second = make_array([make_integer(1), make_string("a")])
        self.assertFalse(identical(first, second))
        self.assertTrue(values_equal(first, second))
        self.assertFalse(values_equal(first, make_tuple([make_integer(1), make_string("a")])))

    def test_memory_handles(self):
        cell = MemoryHandle.new_cell(make_integer(1))
        alias = MemoryHandle(cell.container, 0)
        alias.store(make_integer(2))
        self.assertEqual(number_value(cell.load()), 2)
        self.assertTrue(identical(cell, alias))


class TestFunctions(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.universe = universe()

    def test_macro_and_pure_are_exclusive(self):
        definition = FunctionDefinition(name=intern_symbol("f"))
        definition.add_flag(FunctionFlag.MACRO)
        with self.assertRaises(ValueError):
            definition.add_flag(FunctionFlag.PURE)
        with self.assertRaises(ValueError):
            FunctionDefinition(flags={FunctionFlag.MACRO, FunctionFlag.PURE})

    def test_closure_checks_capture_count(self):
        definition = FunctionDefinition(name=intern_symbol("g"))
        with self.assertRaises(ValueError):
            Closure(definition, [make_integer(1)])
        self.assertEqual(Closure(definition, []).size, 0)

    def test_new_local_numbers_slots(self):
        definition = FunctionDefinition(name=intern_symbol("h"))
        first = definition.new_local(intern_symbol("a"), self.universe["Int32"], is_argument=True)
        second = definition.new_local(intern_symbol("b"), self.universe["Int32"])
        self.assertEqual((first.index, second.index), (0, 1))
        self.assertEqual(definition.local_count, 2)

    def test_stripped_definition_refuses_to_run(self):
        definition = FunctionDefinition(name=intern_symbol("gone"), stripped=True)
        with self.assertRaises(EvaluationError) as context:
            definition.ensure_analyzed()
        self.assertEqual(context.exception.kind, "stripped-definition")

    def test_pending_analysis_runs_once(self):
        calls = []
        definition = FunctionDefinition(name=intern_symbol("lazy"), pending_analysis=lambda: calls.append(1))
        definition.ensure_analyzed()
        definition.ensure_analyzed()
        self.assertEqual(calls, [1])


class TestEnvironment(unittest.TestCase):

    def test_lookup_walks_parents(self):
        outer = Environment(None, ScopeKind.GLOBAL)
        inner = Environment(outer, ScopeKind.BLOCK)
        outer.define("x", make_integer(1))
        inner.define("y", make_integer(2), mutable=True)
        self.assertEqual(inner.lookup_identifier("x")[0], make_integer(1))
        self.assertTrue(inner.lookup_identifier("y")[2])
        self.assertIsNone(outer.lookup_identifier("y"))
        self.assertIs(inner.enclosing(ScopeKind.GLOBAL), outer)


if __name__ == '__main__':
    unittest.main()
