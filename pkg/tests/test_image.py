"""
Tests for image tracing, serialization and loading
"""

import io
import random
import unittest

from src.errors import ImageError, SysmelError
from src.image import (ExternalTable, IMAGE_MAGIC, HEADER, resolve_roots, trace_entities, serialize_image,
                       load_image, measure_image)
from src.main import install_image
from src.object_model import FunctionDefinition
from src.program_entities import FunctionEntity
from src.runtime import number_value
from src.session import Session
from tests.sample_programs import DEAD_CODE_PROGRAM, COUNTER_CLASS


def build_session(source=DEAD_CODE_PROGRAM):
    session = Session(output=io.StringIO())
    session.evaluate_source(source)
    return session


def image_of(session, roots="main", strip_ast=False):
    externals = ExternalTable(session.builtins)
    trace = trace_entities(resolve_roots(session.namespace, roots), externals, strip_ast)
    return trace, serialize_image(trace, externals)


class TestTracing(unittest.TestCase):

    def setUp(self):
        self.session = build_session()

    def test_main_roots_exclude_dead_functions(self):
        trace, _ = image_of(self.session, "main")
        helper = self.session.namespace.member("helper")
        unused = self.session.namespace.member("unused")
        self.assertTrue(trace.contains(helper.definition))
        self.assertFalse(trace.contains(unused))
        self.assertFalse(trace.contains(unused.definition))

    def test_namespace_roots_include_everything(self):
        trace, _ = image_of(self.session, "all")
        unused = self.session.namespace.member("unused")
        self.assertTrue(trace.contains(unused.definition))
        main_trace, _ = image_of(self.session, "main")
        self.assertTrue(all(trace.contains(value) for value in main_trace.objects))

    def test_main_only_image_is_smaller(self):
        _, main_only = image_of(self.session, "main")
        _, everything = image_of(self.session, "all")
        self.assertLess(len(main_only), len(everything))

    def test_missing_main_is_reported(self):
        session = build_session("function lonely() => Int32 := 1i32.")
        with self.assertRaises(ImageError) as context:
            resolve_roots(session.namespace, "main")
        self.assertEqual(context.exception.kind, "unresolvable-root")

    def test_unknown_root_set(self):
        with self.assertRaises(ImageError):
            resolve_roots(self.session.namespace, "some")

    def test_tracing_analyzes_pending_definitions(self):
        self.assertIsNotNone(self.session.lookup("helper").pending_analysis)
        image_of(self.session, "main")
        self.assertIsNone(self.session.lookup("helper").pending_analysis)


class TestRoundTrip(unittest.TestCase):

    def setUp(self):
        self.session = build_session()
        _, self.data = image_of(self.session, "main")

    def test_header(self):
        self.assertEqual(self.data[:4], IMAGE_MAGIC)
        self.assertEqual(len(self.data) % 4, 0)
        self.assertGreater(len(self.data), HEADER.size)

    def test_reserialization_is_byte_identical(self):
        second = Session(output=io.StringIO())
        externals = ExternalTable(second.builtins)
        image = load_image(self.data, externals)
        again = serialize_image(trace_entities(image.roots, externals), externals)
        self.assertEqual(again, self.data)

    def test_main_runs_the_same_after_reload(self):
        before = self.session.call("main")
        self.assertEqual(self.session.output.getvalue(), "42\n")

        second = Session(output=io.StringIO())
        image = load_image(self.data, ExternalTable(second.builtins))
        main = install_image(second, image)
        self.assertIsInstance(main, FunctionDefinition)
        after = second.call(main)
        self.assertEqual(second.output.getvalue(), "42\n")
        self.assertEqual(number_value(after), number_value(before))

    def test_loaded_roots(self):
        image = load_image(self.data, ExternalTable(Session().builtins))
        self.assertEqual(len(image.roots), 1)
        self.assertIsInstance(image.roots[0], FunctionEntity)
        self.assertIsNone(image.namespace)
        self.assertIs(image.main_entity(), image.roots[0])
        self.assertFalse(image.strip_ast)

    def test_classes_survive_a_round_trip(self):
        session = build_session(COUNTER_CLASS + "\nfunction main() => Int32 := countTwice().")
        _, data = image_of(session, "main")
        second = Session()
        main = install_image(second, load_image(data, ExternalTable(second.builtins)))
        self.assertEqual(number_value(second.call(main)), 2)

    def test_namespace_image_restores_globals(self):
        session = build_session(DEAD_CODE_PROGRAM + "let scale := 3i32.")
        _, data = image_of(session, "all")
        second = Session()
        install_image(second, load_image(data, ExternalTable(second.builtins)))
        self.assertEqual(number_value(second.lookup("scale")), 3)
        self.assertIsNotNone(second.namespace.member("unused"))


class TestStrippedImages(unittest.TestCase):

    def test_stripped_image_is_smaller(self):
        session = build_session()
        sizes = measure_image(resolve_roots(session.namespace, "main"), ExternalTable(session.builtins))
        self.assertGreater(sizes.ast_records, 0)
        self.assertGreater(sizes.ast_bytes, 0)
        self.assertLess(sizes.stripped, sizes.full)

    def test_stripped_definitions_refuse_to_run(self):
        session = build_session()
        _, data = image_of(session, "main", strip_ast=True)
        second = Session()
        image = load_image(data, ExternalTable(second.builtins))
        self.assertTrue(image.strip_ast)
        main = install_image(second, image)
        self.assertTrue(main.stripped)
        with self.assertRaises(SysmelError) as context:
            second.call(main)
        self.assertEqual(context.exception.kind, "stripped-definition")


class TestCorruptImages(unittest.TestCase):

    def setUp(self):
        session = build_session()
        _, self.data = image_of(session, "main")
        self.externals = ExternalTable(Session().builtins)

    def assert_kind(self, data, kind):
        with self.assertRaises(ImageError) as context:
            load_image(data, self.externals)
        self.assertEqual(context.exception.kind, kind)

    def test_bad_magic(self):
        self.assert_kind(b"NOPE" + self.data[4:], "bad-magic")
        self.assert_kind(b"", "bad-magic")

    def test_version_mismatch(self):
        header = list(HEADER.unpack(self.data[:HEADER.size]))
        header[1] = 99
        self.assert_kind(HEADER.pack(*header) + self.data[HEADER.size:], "version-mismatch")

    def test_truncated(self):
        self.assert_kind(self.data[:len(self.data) // 2], "truncated-payload")
        self.assert_kind(self.data[:HEADER.size - 4], "truncated-payload")

    def test_unknown_external(self):
        with self.assertRaises(ImageError):
            ExternalTable(Session().builtins).resolve("no such builtin")

    def test_flipped_bytes_load_or_raise_image_errors(self):
        generator = random.Random(7)
        for _ in range(600):
            data = bytearray(self.data)
            position = generator.randrange(len(IMAGE_MAGIC), len(data))
            data[position] ^= 1 << generator.randrange(8)
            try:
                load_image(bytes(data), self.externals)
            except ImageError:
                pass


if __name__ == '__main__':
    unittest.main()
