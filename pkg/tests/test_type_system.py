"""
Tests for types, derived types and method lookup
"""

import pytest

from src.bootstrap import universe
from src.errors import SemanticError
from src.object_model import MemoryHandle, intern_symbol
from src.runtime import make_number, number_value
from src.type_system import (TypeKind, DispatchKind, TypeObject, MethodEntry, make_reference_type,
                             make_pointer_type, function_type, is_assignable, common_type)


@pytest.fixture(scope="module")
def types():
    return universe()


def test_numeric_types(types):
    int32 = types["Int32"]
    assert int32.kind == TypeKind.PRIMITIVE_INTEGER
    assert (int32.bits, int32.signed, int32.byte_size) == (32, True, 4)
    assert types["UInt8"].signed is False
    assert types["Float64"].kind == TypeKind.PRIMITIVE_FLOAT
    assert int32.is_subtype_of(types["Number"])


def test_intrinsic_lookup(types):
    entry = types["Int32"].lookup_selector("+")
    assert entry is not None
    assert entry.dispatch == DispatchKind.STATIC
    assert entry.target.is_pure
    assert entry.target.primitive_op == "add"
    assert types["Int32"].lookup_selector("nonexistent") is None


def test_lookup_walks_the_supertype_chain(types):
    assert types["Int32"].lookup_selector("yourself") is types["Any"].lookup_selector("yourself")


def test_reference_types_are_cached(types):
    reference = make_reference_type(types["Int32"])
    assert reference is make_reference_type(types["Int32"])
    assert reference.kind == TypeKind.REFERENCE
    assert reference.base is types["Int32"]
    assert reference.name == "Int32 ref"


def test_reference_understands_almost_nothing(types):
    reference = make_reference_type(types["Int64"])
    assert set(s.text for s in reference.method_dictionary) == {":=", "address"}
    assert reference.lookup_selector("+") is None


def test_reference_store_and_address(types):
    int32 = types["Int32"]
    reference = make_reference_type(int32)
    cell = MemoryHandle.new_cell(make_number(1, int32))
    store = reference.lookup_selector(":=").target
    store(cell, make_number(9, int32))
    assert number_value(reference.reference_load(cell)) == 9
    pointer = reference.lookup_selector("address").target(cell)
    dereference = make_pointer_type(int32).lookup_selector("_").target
    assert dereference(pointer).same_location(cell)


def test_reference_to_reference_is_rejected(types):
    reference = make_reference_type(types["Int16"])
    with pytest.raises(SemanticError) as error:
        make_reference_type(reference)
    assert error.value.kind == "type-mismatch"


def test_function_types_are_interned(types):
    int32 = types["Int32"]
    first = function_type((int32, int32), int32)
    assert first is function_type((int32, int32), int32)
    assert first.kind == TypeKind.FUNCTION
    assert first is not function_type((int32,), int32)


def test_assignability(types):
    assert is_assignable(types["Number"], types["Int32"])
    assert is_assignable(types["Int32"], types["Dynamic"])
    assert is_assignable(types["Object"], types["UndefinedObject"])
    assert not is_assignable(types["Int32"], types["UndefinedObject"])
    assert not is_assignable(types["Int32"], types["String"])


def test_common_type(types):
    assert common_type(types["True"], types["False"]) is types["Boolean"]
    assert common_type(types["Int32"], types["Int32"]) is types["Int32"]
    assert common_type(types["String"], types["Int32"]) is None


def test_user_class_fields_and_methods(types):
    sample = TypeObject("SampleClass", TypeKind.SLOT_CLASS, types["Object"])
    assert sample.add_field("first", types["Int32"]) == 0
    assert sample.slot_count == 1
    assert sample.field_index("first") == 0
    with pytest.raises(SemanticError):
        sample.add_field("first", types["Int32"])
    entry = MethodEntry(intern_symbol("add:"), object(), dispatch=DispatchKind.DYNAMIC)
    sample.add_method(entry)
    assert sample.lookup_selector("add:") is entry
    assert entry.owner is sample
    assert sample.defines_selector(intern_symbol("add:"))
