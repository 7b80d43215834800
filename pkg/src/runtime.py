"""
Conversions between host values and language values, printing and equality.
Shared by the intrinsics and every execution engine.
"""

import struct
from typing import Any, List

from .errors import EvaluationError
from .object_model import (ObjectValue, Immediate, ImmediateTag, ByteTuple, SlotTuple, Symbol, MemoryHandle,
                           FunctionDefinition, Closure, NativeFunction, builtin_type, builtin_value,
                           intern_symbol, SMALL_INTEGER_MIN, SMALL_INTEGER_MAX)
from .type_system import TypeObject, TypeKind, MethodEntry

SINGLETON_NAMES = {"UndefinedObject": "nil", "True": "true", "False": "false", "Void": "void"}


# --- integers ---
def wrap_integer(value: int, bits: int, signed: bool) -> int:
    mask = (1 << bits) - 1
    value &= mask
    if signed and value >> (bits - 1):
        value -= 1 << bits
    return value


def make_integer(value: int) -> ObjectValue:
    """An arbitrary precision Integer: immediate when small, boxed otherwise"""
    if SMALL_INTEGER_MIN <= value <= SMALL_INTEGER_MAX:
        return Immediate(value)
    length = (value.bit_length() + 8) // 8
    return ByteTuple(builtin_type("Integer"), value.to_bytes(length, 'little', signed=True))


def make_number(value, value_type: TypeObject) -> ObjectValue:
    if value_type.kind == TypeKind.PRIMITIVE_INTEGER:
        wrapped = wrap_integer(int(value), value_type.bits, value_type.signed)
        return ByteTuple(value_type, wrapped.to_bytes(value_type.bits // 8, 'little', signed=value_type.signed))
    if value_type.kind == TypeKind.PRIMITIVE_FLOAT:
        return ByteTuple(value_type, struct.pack('<f' if value_type.bits == 32 else '<d', float(value)))
    if value_type.name == "Integer":
        return make_integer(int(value))
    raise EvaluationError(f"{value_type} is not a numeric type", kind="type-mismatch")


def number_value(value: Any):
    """Host int or float held by a numeric language value"""
    if isinstance(value, Immediate):
        return value.payload
    if isinstance(value, ByteTuple):
        value_type = value.value_type
        if value_type.kind == TypeKind.PRIMITIVE_INTEGER:
            return int.from_bytes(value.data, 'little', signed=value_type.signed)
        if value_type.kind == TypeKind.PRIMITIVE_FLOAT:
            return struct.unpack('<f' if value_type.bits == 32 else '<d', bytes(value.data))[0]
        if value_type.name == "Integer":
            return int.from_bytes(value.data, 'little', signed=True)
    raise EvaluationError(f"expected a number, got {print_string(value)}", kind="type-mismatch")


def integer_value(value: Any) -> int:
    number = number_value(value)
    if isinstance(number, float):
        if number != number or number in (float('inf'), float('-inf')):
            raise EvaluationError(f"cannot convert {number} to an integer", kind="type-mismatch")
        return int(number)
    return number


def is_number(value: Any) -> bool:
    if isinstance(value, Immediate):
        return value.tag == ImmediateTag.SMALL_INTEGER
    return isinstance(value, ByteTuple) and value.value_type.is_numeric


# --- other scalars ---
def make_character(code: int) -> Immediate:
    return Immediate(code, ImmediateTag.CHARACTER)


def make_string(text: str) -> ByteTuple:
    return ByteTuple(builtin_type("String"), text.encode('utf-8'))


def string_value(value: Any) -> str:
    if isinstance(value, ByteTuple) and value.value_type.name in ("String", "ByteArray"):
        return value.data.decode('utf-8', errors='replace')
    if isinstance(value, Symbol):
        return value.text
    raise EvaluationError(f"expected a string, got {print_string(value)}", kind="type-mismatch")


def make_boolean(flag: bool) -> SlotTuple:
    return builtin_value("true" if flag else "false")


def is_true(value: Any) -> bool:
    if value is builtin_value("true"):
        return True
    if value is builtin_value("false"):
        return False
    raise EvaluationError(f"expected a Boolean, got {print_string(value)}", kind="type-mismatch")


def nil() -> SlotTuple:
    return builtin_value("nil")


def void() -> SlotTuple:
    return builtin_value("void")


def make_array(items: List[Any]) -> SlotTuple:
    return SlotTuple(builtin_type("Array"), items)


def make_tuple(items: List[Any]) -> SlotTuple:
    return SlotTuple(builtin_type("Tuple"), items)


def sequence_items(value: Any) -> List[Any]:
    if isinstance(value, SlotTuple) and value.value_type.name in ("Array", "Tuple"):
        return list(value.slots)
    if isinstance(value, (list, tuple)):
        return list(value)
    raise EvaluationError(f"expected an Array or Tuple, got {print_string(value)}", kind="type-mismatch")


def runtime_type(value: Any) -> TypeObject:
    if isinstance(value, ObjectValue):
        return value.object_type
    raise EvaluationError(f"host value {value!r} leaked into the language", kind="runtime-error")


def lookup_runtime_method(receiver: Any, selector: Symbol, position=None) -> MethodEntry:
    """Dynamic dispatch: a fresh lookup on the receiver's runtime type"""
    receiver_type = runtime_type(receiver)
    entry = receiver_type.lookup_selector(selector)
    if entry is None and isinstance(receiver, TypeObject):
        entry = receiver.lookup_type_side(selector)
    if entry is None or entry.is_macro:
        raise EvaluationError(f"{print_string(receiver)} does not understand #{selector.text}", position,
                              "does-not-understand")
    return entry


# --- identity and equality ---
def identical(first: Any, second: Any) -> bool:
    if first is second:
        return True
    if isinstance(first, Immediate) and isinstance(second, Immediate):
        return first == second
    if isinstance(first, ByteTuple) and isinstance(second, ByteTuple):
        return (first.value_type is second.value_type and first.value_type.is_numeric
                and first.data == second.data)
    if isinstance(first, MemoryHandle) and isinstance(second, MemoryHandle):
        return first.same_location(second)
    return False


def values_equal(first: Any, second: Any, _depth: int = 0) -> bool:
    """Structural equality: bit-exact for scalars, element-wise for tuples"""
    if identical(first, second):
        return True
    if _depth > 64:
        return False
    if isinstance(first, ByteTuple) and isinstance(second, ByteTuple):
        return first.value_type is second.value_type and first.data == second.data
    if isinstance(first, SlotTuple) and isinstance(second, SlotTuple):
        return (first.value_type is second.value_type and len(first.slots) == len(second.slots)
                and all(values_equal(a, b, _depth + 1) for a, b in zip(first.slots, second.slots)))
    from .ast_nodes import AstNode, nodes_equal
    if isinstance(first, AstNode) and isinstance(second, AstNode):
        return nodes_equal(first, second)
    return False


# --- printing ---
def _escape(text: str, quote: str) -> str:
    escaped = text.replace('\\', '\\\\').replace(quote, '\\' + quote)
    return escaped.replace('\n', '\\n').replace('\r', '\\r').replace('\t', '\\t').replace('\0', '\\0')


def format_float(number: float) -> str:
    text = repr(number)
    return text if any(c in text for c in '.en') else text + ".0"


def print_string(value: Any) -> str:
    """Source-like textual form of a value"""
    if isinstance(value, Immediate):
        if value.tag == ImmediateTag.CHARACTER:
            return "'" + _escape(chr(value.payload), "'") + "'"
        return str(value.payload)
    if isinstance(value, ByteTuple):
        value_type = value.value_type
        if value_type.kind == TypeKind.PRIMITIVE_FLOAT:
            return format_float(number_value(value))
        if value_type.is_numeric:
            return str(number_value(value))
        if value_type.name == "String":
            return '"' + _escape(string_value(value), '"') + '"'
        if value_type.name == "ByteArray":
            return "#[" + " ".join(str(b) for b in value.data) + "]"
        return f"a {value_type.name}"
    if isinstance(value, Symbol):
        return "#" + value.text
    if isinstance(value, SlotTuple):
        value_type = value.value_type
        if value_type.kind == TypeKind.SINGLETON:
            return SINGLETON_NAMES.get(value_type.name, value_type.name)
        if value_type.name == "Array":
            return "#(" + " ".join(print_string(item) for item in value.slots) + ")"
        if value_type.name == "Tuple":
            return "(" + ", ".join(print_string(item) for item in value.slots) + ")"
        if value_type.name == "Dictionary":
            pairs = [f"{print_string(value.slots[i])} : {print_string(value.slots[i + 1])}"
                     for i in range(0, len(value.slots), 2)]
            return "#{" + ". ".join(pairs) + "}"
        article = "an" if value_type.name[:1] in "AEIOU" else "a"
        return f"{article} {value_type.name}"
    if isinstance(value, TypeObject):
        return value.name
    if isinstance(value, FunctionDefinition):
        return f"<function {value.display_name}>"
    if isinstance(value, Closure):
        return f"<closure {value.definition.display_name}>"
    if isinstance(value, NativeFunction):
        return f"<native {value.name}>"
    if isinstance(value, MemoryHandle):
        return f"<handle {value.index}>"
    from .ast_nodes import AstNode
    if isinstance(value, AstNode):
        from .unparser import unparse
        return unparse(value)
    if isinstance(value, ObjectValue):
        describe = getattr(value, "describe", None)
        if describe is not None:
            return describe()
        return f"a {value.object_type.name}"
    return repr(value)


def display_string(value: Any) -> str:
    """What printLine writes: strings, symbols and characters without quoting"""
    if isinstance(value, ByteTuple) and value.value_type.name == "String":
        return string_value(value)
    if isinstance(value, Symbol):
        return value.text
    if isinstance(value, Immediate) and value.tag == ImmediateTag.CHARACTER:
        return chr(value.payload)
    return print_string(value)


def symbol_of(value: Any) -> Symbol:
    if isinstance(value, Symbol):
        return value
    if isinstance(value, ByteTuple) and value.value_type.name == "String":
        return intern_symbol(string_value(value))
    raise EvaluationError(f"expected a symbol, got {print_string(value)}", kind="type-mismatch")


# --- calls ---
APPLY_SELECTOR = "applyWithArguments:"


def prepare_call(callee: Any, arguments: List[Any], position=None):
    """Resolve an application to (native or definition, captures, arguments)"""
    if isinstance(callee, (NativeFunction, FunctionDefinition)):
        return callee, [], list(arguments)
    if isinstance(callee, Closure):
        return callee.definition, callee.captures, list(arguments)
    if isinstance(callee, ObjectValue):
        entry = runtime_type(callee).lookup_selector(intern_symbol(APPLY_SELECTOR))
        if entry is not None and not entry.is_macro:
            return prepare_call(entry.target, [callee, make_tuple(list(arguments))], position)
    raise EvaluationError(f"{print_string(callee)} is not applicable", position, "not-applicable")


def prepare_send(receiver: Any, selector: Symbol, arguments: List[Any], position=None):
    entry = lookup_runtime_method(receiver, selector, position)
    return prepare_call(entry.target, [receiver, *arguments], position)


def check_arity(callee, arguments: List[Any], position=None):
    if isinstance(callee, NativeFunction) and callee.variadic:
        return
    if len(arguments) != callee.argument_count:
        raise EvaluationError(f"{callee.display_name} expects {callee.argument_count} arguments, "
                              f"got {len(arguments)}", position, "arity-mismatch")


def call_native(native: NativeFunction, arguments: List[Any], position=None) -> Any:
    check_arity(native, arguments, position)
    try:
        return native.implementation(*arguments)
    except EvaluationError as error:
        if error.position is None:
            error.position = position
        raise
