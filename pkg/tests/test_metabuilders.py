"""
Tests for the definition metabuilders
"""

import io
import unittest

from src.errors import SemanticError
from src.object_model import FunctionDefinition, FunctionFlag, MemoryHandle
from src.program_entities import ClassEntity, FunctionEntity
from src.runtime import print_string
from src.session import Session
from src.type_system import DispatchKind
from tests.sample_programs import SAMPLE_CLASS_PROGRAM


class TestSampleClassProgram(unittest.TestCase):

    def setUp(self):
        self.output = io.StringIO()
        self.session = Session(output=self.output)
        self.session.evaluate_source(SAMPLE_CLASS_PROGRAM, "sample_class.sysmel")

    def test_prints_five(self):
        self.assertEqual(self.output.getvalue(), "5\n")

    def test_class_layout_and_methods(self):
        entity = self.session.namespace.member("SampleClass")
        self.assertIsInstance(entity, ClassEntity)
        class_type = entity.class_type
        self.assertEqual([name for name, _ in class_type.fields], ["first"])
        self.assertIs(class_type.fields[0][1], self.session.universe["Int32"])
        self.assertEqual(sorted(selector.text for selector in entity.methods), ["add:", "first", "first:"])
        self.assertEqual(class_type.lookup_selector("add:").dispatch, DispatchKind.DYNAMIC)

    def test_function_entity(self):
        entity = self.session.namespace.member("sampleFunction")
        self.assertIsInstance(entity, FunctionEntity)
        self.assertEqual(entity.definition.argument_count, 2)
        self.assertIs(entity.definition.result_type, self.session.universe["Int32"])
        self.assertEqual(entity.visibility, "public")

    def test_accessors_work(self):
        value = self.session.evaluate_source("let sample := SampleClass new.\nsample first: 3i32.\nsample first")
        self.assertEqual(print_string(value), "3")


class TestDefinitionForms(unittest.TestCase):

    def setUp(self):
        self.session = Session()

    def test_result_type_defers_analysis(self):
        self.session.evaluate_source("function later(x: Int32) => Int32 := x + 1i32.")
        definition = self.session.lookup("later")
        self.assertIsNotNone(definition.pending_analysis)
        self.assertIsNone(definition.body_node)
        self.assertEqual(print_string(self.session.call("later", self.session.evaluate_source("1i32"))), "2")
        self.assertIsNone(definition.pending_analysis)

    def test_inferred_result_type_analyzes_now(self):
        self.session.evaluate_source("function now(x: Int32) := x + 1i32.")
        definition = self.session.lookup("now")
        self.assertIsNotNone(definition.body_node)
        self.assertIs(definition.result_type, self.session.universe["Int32"])

    def test_eager_modifier(self):
        self.session.evaluate_source("eager function early(x: Int32) => Int32 := x.")
        definition = self.session.lookup("early")
        self.assertIn(FunctionFlag.EAGER, definition.flags)
        self.assertIsNone(definition.pending_analysis)

    def test_private_visibility(self):
        self.session.evaluate_source("private function hidden() => Int32 := 1i32.")
        self.assertEqual(self.session.namespace.member("hidden").visibility, "private")

    def test_final_class_dispatches_statically(self):
        self.session.evaluate_source("public final class Box superclass: Object; definition: { public field item => Int32. }.")
        class_type = self.session.lookup("Box")
        self.assertTrue(class_type.final)
        self.assertEqual(class_type.lookup_selector("item").dispatch, DispatchKind.STATIC)

    def test_mutable_global(self):
        self.session.evaluate_source("let total mutable := 0.")
        self.assertIsInstance(self.session.namespace.member("total"), MemoryHandle)
        self.assertTrue(self.session.environment.lookup("total").value_type.is_reference)
        self.assertEqual(print_string(self.session.evaluate_source("total := total + 5. total")), "5")

    def test_defined_functions_lists_methods(self):
        self.session.evaluate_source(SAMPLE_CLASS_PROGRAM)
        names = [definition.display_name for definition in self.session.defined_functions()]
        self.assertIn("sampleFunction", names)
        self.assertIn("add:", names)
        self.assertTrue(all(isinstance(d, FunctionDefinition) for d in self.session.defined_functions()))


class TestBuilderErrors(unittest.TestCase):

    def setUp(self):
        self.session = Session()

    def assert_kind(self, source, kind):
        with self.assertRaises(SemanticError) as context:
            self.session.evaluate_source(source)
        self.assertEqual(context.exception.kind, kind)
        self.assertIsNotNone(context.exception.position)
        return context.exception

    def test_macro_and_pure_modifiers_conflict(self):
        self.assert_kind("macro pure function f(x) := x.", "macro-error")

    def test_finished_builder_rejects_messages(self):
        error = self.assert_kind("public pure function; class", "macro-error")
        self.assertIn("finished", error.message)

    def test_field_outside_class(self):
        self.assert_kind("public field stray => Int32.", "macro-error")

    def test_duplicate_field(self):
        self.assert_kind("public class Twice superclass: Object; definition: { public field a => Int32. "
                         "public field a => Int32. }.", "duplicate-definition")

    def test_final_superclass_is_rejected(self):
        self.assert_kind("public class Bad superclass: Int32; definition: { }.", "type-mismatch")

    def test_unknown_modifier(self):
        self.assert_kind("public banana", "macro-error")

    def test_function_without_body(self):
        self.assert_kind("function incomplete(x: Int32) => Int32", "macro-error")

    def test_let_needs_a_value(self):
        self.assert_kind("let nothing", "macro-error")


if __name__ == '__main__':
    unittest.main()
