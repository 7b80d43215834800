"""
Primitive intrinsics: arithmetic, comparison, bitwise and conversion methods
of the numeric types, the universal messages of Any, and collection access.
Every intrinsic is a NativeFunction registered under its intrinsic id.
"""

import logging
import sys
from contextlib import contextmanager
from typing import Callable, Dict, List, Optional, TextIO

from .errors import EvaluationError
from .object_model import NativeFunction, ByteTuple, SlotTuple, Immediate, intern_symbol, builtin_type, make_object
from .type_system import TypeObject, TypeKind, MethodEntry, DispatchKind, make_reference_type, make_pointer_type
from .runtime import (make_number, number_value, integer_value, make_boolean, make_string, make_character,
                      identical, values_equal, print_string, display_string, nil, void, runtime_type, make_array,
                      make_tuple, is_true)

logger = logging.getLogger("SysmelKernel")

INTRINSICS: Dict[str, NativeFunction] = {}

ARITHMETIC = {'+': 'add', '-': 'sub', '*': 'mul', '//': 'div', '\\\\': 'rem'}
FLOAT_ONLY = {'/': 'div'}
BITWISE = {'bitAnd:': 'and', 'bitOr:': 'or', 'bitXor:': 'xor', '<<': 'shl', '>>': 'shr'}
COMPARISONS = {'=': 'cmp-eq', '~=': 'cmp-ne', '<': 'cmp-lt', '<=': 'cmp-le', '>': 'cmp-gt', '>=': 'cmp-ge'}

CONVERSIONS = {
    'asInt8': 'Int8', 'asInt16': 'Int16', 'asInt32': 'Int32', 'asInt64': 'Int64',
    'asUInt8': 'UInt8', 'asUInt16': 'UInt16', 'asUInt32': 'UInt32', 'asUInt64': 'UInt64',
    'asSize': 'Size', 'asFloat32': 'Float32', 'asFloat64': 'Float64', 'asInteger': 'Integer',
    'i8': 'Int8', 'i16': 'Int16', 'i32': 'Int32', 'i64': 'Int64',
    'u8': 'UInt8', 'u16': 'UInt16', 'u32': 'UInt32', 'u64': 'UInt64',
    'sz': 'Size', 'f32': 'Float32', 'f64': 'Float64',
}

NUMERIC_TYPE_NAMES = ["Integer", "Int8", "Int16", "Int32", "Int64", "UInt8", "UInt16", "UInt32", "UInt64",
                      "Size", "Float32", "Float64"]


def register(native: NativeFunction) -> NativeFunction:
    INTRINSICS[native.intrinsic_id] = native
    return native


def intrinsic(intrinsic_id: str) -> NativeFunction:
    try:
        return INTRINSICS[intrinsic_id]
    except KeyError:
        raise EvaluationError(f"unknown intrinsic {intrinsic_id}", kind="runtime-error") from None


# --- numeric operation factories ---
def _arithmetic(operation: str, value_type: TypeObject) -> Callable:
    is_float = value_type.kind == TypeKind.PRIMITIVE_FLOAT

    def operate(left, right):
        a, b = number_value(left), number_value(right)
        if is_float:
            a, b = float(a), float(b)
        else:
            a, b = int(a), int(b)
        if operation == 'add':
            result = a + b
        elif operation == 'sub':
            result = a - b
        elif operation == 'mul':
            result = a * b
        else:
            if b == 0:
                raise EvaluationError("division by zero", kind="division-by-zero")
            if is_float:
                result = a / b if operation == 'div' else a - b * (a // b)
            else:
                result = a // b if operation == 'div' else a % b
        return make_number(result, value_type)
    return operate


def _bitwise(operation: str, value_type: TypeObject) -> Callable:
    def operate(left, right):
        a, b = integer_value(left), integer_value(right)
        if operation == 'and':
            result = a & b
        elif operation == 'or':
            result = a | b
        elif operation == 'xor':
            result = a ^ b
        else:
            if b < 0:
                raise EvaluationError(f"negative shift count {b}", kind="runtime-error")
            if operation == 'shl':
                result = a << min(b, value_type.bits or 4096)
            elif value_type.bits and not value_type.signed:
                result = (a & ((1 << value_type.bits) - 1)) >> b
            else:
                result = a >> b
        return make_number(result, value_type)
    return operate


def _comparison(operation: str) -> Callable:
    def operate(left, right):
        a, b = number_value(left), number_value(right)
        return make_boolean({
            'cmp-eq': a == b, 'cmp-ne': a != b, 'cmp-lt': a < b,
            'cmp-le': a <= b, 'cmp-gt': a > b, 'cmp-ge': a >= b,
        }[operation])
    return operate


def _conversion(target: TypeObject) -> Callable:
    def convert(value):
        number = number_value(value)
        if target.kind == TypeKind.PRIMITIVE_FLOAT:
            return make_number(float(number), target)
        return make_number(integer_value(value) if isinstance(number, float) else number, target)
    return convert


def _install_numeric_type(value_type: TypeObject, types: Dict[str, TypeObject]):
    boolean = types["Boolean"]
    is_float = value_type.kind == TypeKind.PRIMITIVE_FLOAT

    def add(selector: str, arguments: List[TypeObject], result: TypeObject, implementation: Callable,
            primitive_op: Optional[str] = None):
        native = register(NativeFunction(f"{value_type.name}::{selector}", arguments, result, implementation,
                                         pure=True, intrinsic_id=f"{value_type.name}::{selector}",
                                         primitive_op=primitive_op))
        value_type.add_method(MethodEntry(intern_symbol(selector), native, dispatch=DispatchKind.STATIC,
                                          pure=True))

    operations = dict(ARITHMETIC)
    if is_float:
        operations.update(FLOAT_ONLY)
    for selector, operation in operations.items():
        add(selector, [value_type, value_type], value_type, _arithmetic(operation, value_type), operation)
    if not is_float:
        for selector, operation in BITWISE.items():
            add(selector, [value_type, value_type], value_type, _bitwise(operation, value_type), operation)
    for selector, operation in COMPARISONS.items():
        add(selector, [value_type, value_type], boolean, _comparison(operation), operation)

    negate = _arithmetic('sub', value_type)
    zero = make_number(0, value_type)
    add('negated', [value_type], value_type, lambda value: negate(zero, value))
    for selector, target_name in CONVERSIONS.items():
        add(selector, [value_type], types[target_name], _conversion(types[target_name]))


# --- universal and collection messages ---
def _checked_index(collection, index_value, size: int) -> int:
    index = integer_value(index_value)
    if not 0 <= index < size:
        raise EvaluationError(f"index {index} is out of bounds for {print_string(collection)} of size {size}",
                              kind="index-out-of-range")
    return index


def _collection_at(collection, index_value):
    if isinstance(collection, SlotTuple):
        if collection.value_type.name == "Dictionary":
            for i in range(0, len(collection.slots), 2):
                if values_equal(collection.slots[i], index_value):
                    return collection.slots[i + 1]
            raise EvaluationError(f"key {print_string(index_value)} not found", kind="key-not-found")
        return collection.slots[_checked_index(collection, index_value, len(collection.slots))]
    if isinstance(collection, ByteTuple):
        byte = collection.data[_checked_index(collection, index_value, len(collection.data))]
        if collection.value_type.name == "String":
            return make_character(byte)
        return make_number(byte, builtin_type("UInt8"))
    raise EvaluationError(f"{print_string(collection)} is not indexable", kind="does-not-understand")


def _collection_at_put(collection, index_value, value):
    if isinstance(collection, SlotTuple):
        if collection.value_type.name == "Dictionary":
            for i in range(0, len(collection.slots), 2):
                if values_equal(collection.slots[i], index_value):
                    collection.slots[i + 1] = value
                    return value
            collection.slots.extend([index_value, value])
            return value
        collection.slots[_checked_index(collection, index_value, len(collection.slots))] = value
        return value
    if isinstance(collection, ByteTuple):
        index = _checked_index(collection, index_value, len(collection.data))
        collection.data[index] = (value.payload if isinstance(value, Immediate) else integer_value(value)) & 0xFF
        return value
    raise EvaluationError(f"{print_string(collection)} is not indexable", kind="does-not-understand")


def _collection_size(collection):
    size = len(collection.slots) // 2 if isinstance(collection, SlotTuple) and \
        collection.value_type.name == "Dictionary" else collection.size
    return make_number(size, builtin_type("Size"))


def _includes_key(collection, key):
    return make_boolean(any(values_equal(collection.slots[i], key) for i in range(0, len(collection.slots), 2)))


def _install_any(types: Dict[str, TypeObject]):
    any_type, boolean = types["Any"], types["Boolean"]

    def add(selector: str, arguments, result, implementation, pure: bool, owner: TypeObject = any_type):
        native = register(NativeFunction(f"{owner.name}::{selector}", arguments, result, implementation,
                                         pure=pure, intrinsic_id=f"{owner.name}::{selector}"))
        owner.add_method(MethodEntry(intern_symbol(selector), native, dispatch=DispatchKind.STATIC, pure=pure))

    add('==', [any_type, any_type], boolean, lambda a, b: make_boolean(identical(a, b)), True)
    add('~~', [any_type, any_type], boolean, lambda a, b: make_boolean(not identical(a, b)), True)
    add('=', [any_type, any_type], boolean, lambda a, b: make_boolean(values_equal(a, b)), False)
    add('~=', [any_type, any_type], boolean, lambda a, b: make_boolean(not values_equal(a, b)), False)
    add('yourself', [any_type], any_type, lambda a: a, True)
    add('printString', [any_type], types["String"], lambda a: make_string(print_string(a)), False)
    add('class', [any_type], types["Type"], runtime_type, True)
    add('isNil', [any_type], boolean, lambda a: make_boolean(a is nil()), True)
    add('notNil', [any_type], boolean, lambda a: make_boolean(a is not nil()), True)

    for name in ("Array", "Tuple", "String", "ByteArray", "Dictionary", "Symbol"):
        owner = types[name]
        add('size', [owner], types["Size"], _collection_size, name in ("Tuple", "Symbol"), owner)
        if name == "Symbol":
            continue
        add('at:', [owner, any_type], any_type, _collection_at, False, owner)
        if name != "Tuple":
            add('at:put:', [owner, any_type, any_type], any_type, _collection_at_put, False, owner)
    add('includesKey:', [types["Dictionary"], any_type], boolean, _includes_key, False, types["Dictionary"])

    add('not', [boolean], boolean, lambda a: make_boolean(not is_true(a)), True, boolean)
    add('&', [boolean, boolean], boolean, lambda a, b: make_boolean(is_true(a) and is_true(b)), True, boolean)
    add('|', [boolean, boolean], boolean, lambda a, b: make_boolean(is_true(a) or is_true(b)), True, boolean)


def _install_type_side(types: Dict[str, TypeObject]):
    type_type, any_type, size = types["Type"], types["Any"], types["Size"]
    array = types["Array"]

    def add(owner: TypeObject, selector: str, arguments, result, implementation, pure: bool):
        native = register(NativeFunction(f"{owner.name} class::{selector}", arguments, result, implementation,
                                         pure=pure, intrinsic_id=f"{owner.name} class::{selector}"))
        owner.add_method(MethodEntry(intern_symbol(selector), native, dispatch=DispatchKind.STATIC, pure=pure),
                         type_side=True)

    add(any_type, 'ref', [type_type], type_type, make_reference_type, True)
    add(any_type, 'pointer', [type_type], type_type, make_pointer_type, True)
    add(any_type, 'name', [type_type], types["Symbol"], lambda t: t.name_symbol, True)
    add(types["Object"], 'basicNew', [type_type], types["Object"], lambda t: make_object(t, t.slot_count), False)
    add(array, 'new:', [type_type, size], array,
        lambda t, count: SlotTuple(array, [nil()] * integer_value(count)), False)
    add(types["ByteArray"], 'new:', [type_type, size], types["ByteArray"],
        lambda t, count: ByteTuple(types["ByteArray"], bytes(integer_value(count))), False)
    add(array, 'new', [type_type], array, lambda t: make_array([]), False)
    for arity in range(1, 5):
        selector = "with:" * arity
        add(array, selector, [type_type] + [any_type] * arity, array,
            lambda t, *items: make_array(list(items)), False)


# --- constructors behind collection syntax ---
def _install_constructors(types: Dict[str, TypeObject]):
    any_type = types["Any"]
    byte_array, dictionary = types["ByteArray"], types["Dictionary"]

    def make_byte_array(*items):
        return ByteTuple(byte_array, bytes(integer_value(item) & 0xFF for item in items))

    def make_dictionary(*items):
        if len(items) % 2:
            raise EvaluationError("a dictionary needs key and value pairs", kind="arity-mismatch")
        return SlotTuple(dictionary, list(items))

    register(NativeFunction("tuple.make", [any_type], types["Tuple"], lambda *items: make_tuple(list(items)),
                            pure=True, intrinsic_id="tuple.make", variadic=True))
    register(NativeFunction("dictionary.make", [any_type], dictionary, make_dictionary,
                            intrinsic_id="dictionary.make", variadic=True))
    register(NativeFunction("bytearray.make", [types["UInt8"]], byte_array, make_byte_array,
                            intrinsic_id="bytearray.make", variadic=True))


# --- console output ---
_output_streams: List[TextIO] = []


@contextmanager
def redirect_output(stream: TextIO):
    """Send printLine and print output to stream while the block runs"""
    _output_streams.append(stream)
    try:
        yield stream
    finally:
        _output_streams.pop()


def _write(text: str):
    stream = _output_streams[-1] if _output_streams else sys.stdout
    stream.write(text)


def _print_line(value):
    _write(display_string(value) + "\n")
    return void()


def _print(value):
    _write(display_string(value))
    return void()


def _install_output(types: Dict[str, TypeObject]):
    register(NativeFunction("printLine", [types["Any"]], types["Void"], _print_line, intrinsic_id="io.printLine"))
    register(NativeFunction("print", [types["Any"]], types["Void"], _print, intrinsic_id="io.print"))


def install_intrinsics(types: Dict[str, TypeObject]):
    """Populate the primitive and collection types with their intrinsic methods"""
    for name in NUMERIC_TYPE_NAMES:
        _install_numeric_type(types[name], types)
    _install_any(types)
    _install_type_side(types)
    _install_constructors(types)
    _install_output(types)
    logger.debug(f"Installed {len(INTRINSICS)} intrinsics")
