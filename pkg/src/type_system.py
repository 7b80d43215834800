"""
First-class type objects: method and macro dictionaries, selector lookup,
analysis hooks, and the memoized derived reference, pointer and function types.
"""

import logging
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .errors import SemanticError
from .object_model import (ObjectValue, ObjectKind, Symbol, NativeFunction, MemoryHandle, intern_symbol,
                           BUILTIN_TYPES)

logger = logging.getLogger("SysmelKernel")


class TypeKind(Enum):
    PRIMITIVE_INTEGER = "primitive-integer"
    PRIMITIVE_FLOAT = "primitive-float"
    SLOT_CLASS = "slot-class"
    BYTES_CLASS = "bytes-class"
    SINGLETON = "singleton"
    DYNAMIC = "dynamic"
    FUNCTION = "function-type"
    REFERENCE = "reference-to"
    POINTER = "pointer-to"
    AST_NODE_CLASS = "ast-node-class"
    TYPE_OF_TYPES = "type-of-types"
    OPAQUE = "opaque"
    METABUILDER = "metabuilder"


class DispatchKind(Enum):
    STATIC = "static-dispatch"
    DYNAMIC = "dynamic-dispatch"


@dataclass(eq=False)
class MethodEntry(ObjectValue):
    type_name = "MethodEntry"
    selector: Symbol
    target: Any
    is_macro: bool = False
    dispatch: DispatchKind = DispatchKind.STATIC
    pure: bool = False
    owner: Any = None


class TypeObject(ObjectValue):
    """A type; itself an instance of the type Type"""
    type_name = "Type"

    def __init__(self, name: str, kind: TypeKind, supertype: Optional["TypeObject"] = None, *,
                 bits: int = 0, signed: bool = False, base: Optional["TypeObject"] = None,
                 argument_types: Sequence["TypeObject"] = (), result_type: Optional["TypeObject"] = None,
                 final: bool = False, builtin: bool = False):
        self.name = name
        self.kind = kind
        self.supertype = supertype
        self.bits = bits
        self.signed = signed
        self.base = base
        self.argument_types = tuple(argument_types)
        self.result_type = result_type
        self.final = final
        self.builtin = builtin
        self.fields: List[Tuple[str, "TypeObject"]] = list(supertype.fields) if supertype is not None and \
            kind == TypeKind.SLOT_CLASS and supertype.kind == TypeKind.SLOT_CLASS else []
        self.method_dictionary: Dict[Symbol, MethodEntry] = {}
        self.macro_dictionary: Dict[Symbol, MethodEntry] = {}
        self.type_side_dictionary: Dict[Symbol, MethodEntry] = {}
        self.reference_load: Optional[NativeFunction] = None
        self.entity = None
        self._reference_type: Optional["TypeObject"] = None
        self._pointer_type: Optional["TypeObject"] = None

    def __repr__(self):
        return f"TypeObject({self.name})"

    def __str__(self):
        return self.name

    @property
    def name_symbol(self) -> Symbol:
        return intern_symbol(self.name)

    @property
    def layout_kind(self) -> ObjectKind:
        if self.kind in (TypeKind.PRIMITIVE_INTEGER, TypeKind.PRIMITIVE_FLOAT, TypeKind.BYTES_CLASS):
            return ObjectKind.BYTES
        return ObjectKind.SLOTS

    @property
    def byte_size(self) -> int:
        return max(1, self.bits // 8) if self.bits else 8

    @property
    def is_numeric(self) -> bool:
        return self.kind in (TypeKind.PRIMITIVE_INTEGER, TypeKind.PRIMITIVE_FLOAT) or self.name == "Integer"

    @property
    def is_primitive(self) -> bool:
        return self.kind in (TypeKind.PRIMITIVE_INTEGER, TypeKind.PRIMITIVE_FLOAT)

    @property
    def is_reference(self) -> bool:
        return self.kind == TypeKind.REFERENCE

    @property
    def is_dynamic(self) -> bool:
        return self.kind == TypeKind.DYNAMIC

    def supertypes(self):
        current = self
        while current is not None:
            yield current
            current = current.supertype

    def is_subtype_of(self, other: "TypeObject") -> bool:
        return any(t is other for t in self.supertypes())

    # --- dictionaries ---
    def add_method(self, entry: MethodEntry, type_side: bool = False):
        entry.owner = self
        if type_side:
            self.type_side_dictionary[entry.selector] = entry
        elif entry.is_macro:
            self.macro_dictionary[entry.selector] = entry
        else:
            self.method_dictionary[entry.selector] = entry
        logger.debug(f"Installed {entry.selector.text} in {self.name}")
        return entry

    def defines_selector(self, selector: Symbol) -> bool:
        return selector in self.method_dictionary or selector in self.macro_dictionary

    def lookup_selector(self, selector) -> Optional[MethodEntry]:
        """Macro dictionary, then method dictionary, then the supertype chain"""
        symbol = selector if isinstance(selector, Symbol) else intern_symbol(selector)
        for current in self.supertypes():
            entry = current.macro_dictionary.get(symbol) or current.method_dictionary.get(symbol)
            if entry is not None:
                return entry
        return None

    def lookup_type_side(self, selector) -> Optional[MethodEntry]:
        symbol = selector if isinstance(selector, Symbol) else intern_symbol(selector)
        for current in self.supertypes():
            entry = current.type_side_dictionary.get(symbol)
            if entry is not None:
                return entry
        return None

    # --- slot layout ---
    def add_field(self, name: str, field_type: "TypeObject") -> int:
        if any(existing == name for existing, _ in self.fields):
            raise SemanticError(f"duplicate field '{name}' in {self.name}", kind="duplicate-definition")
        self.fields.append((name, field_type))
        return len(self.fields) - 1

    def field_index(self, name: str) -> Optional[int]:
        for index, (existing, _) in enumerate(self.fields):
            if existing == name:
                return index
        return None

    @property
    def slot_count(self) -> int:
        return len(self.fields)

    # --- analysis hooks ---
    def analyze_message_send(self, analyzer, node, receiver, context):
        return analyzer.analyze_standard_message_send(node, receiver, context)

    def analyze_application(self, analyzer, node, functional, context):
        return analyzer.analyze_standard_application(node, functional, context)


class MetabuilderType(TypeObject):
    """Routes send and application analysis to the builder instance on the literal receiver"""

    def __init__(self, name: str, supertype: Optional[TypeObject] = None):
        super().__init__(name, TypeKind.METABUILDER, supertype, builtin=True)

    def analyze_message_send(self, analyzer, node, receiver, context):
        builder = analyzer.literal_builder_of(receiver, node)
        return builder.analyze_message_send(analyzer, node, context)

    def analyze_application(self, analyzer, node, functional, context):
        builder = analyzer.literal_builder_of(functional, node)
        return builder.analyze_application(analyzer, node, context)


# --- derived types ---
_derived_lock = threading.Lock()
_function_types: Dict[Tuple[Tuple[TypeObject, ...], Any], TypeObject] = {}


def _reference_store(handle: MemoryHandle, value):
    return handle.store(value)


def _reference_load(handle: MemoryHandle):
    return handle.load()


def _same_handle(handle: MemoryHandle):
    return handle


def make_reference_type(base: TypeObject) -> TypeObject:
    if base.kind == TypeKind.REFERENCE:
        raise SemanticError(f"cannot make a reference to the reference type {base}", kind="type-mismatch")
    with _derived_lock:
        if base._reference_type is not None:
            return base._reference_type
        reference = TypeObject(f"{base.name} ref", TypeKind.REFERENCE, BUILTIN_TYPES.get("AnyReference"),
                               base=base, final=True, builtin=base.builtin)
        base._reference_type = reference
    pointer = make_pointer_type(base)
    reference.add_method(MethodEntry(intern_symbol(":="), NativeFunction(
        ":=", [reference, base], base, _reference_store, intrinsic_id="reference.store")))
    reference.add_method(MethodEntry(intern_symbol("address"), NativeFunction(
        "address", [reference], pointer, _same_handle, intrinsic_id="reference.address")))
    reference.reference_load = NativeFunction("load", [reference], base, _reference_load,
                                              intrinsic_id="reference.load")
    return reference


def make_pointer_type(base: TypeObject) -> TypeObject:
    with _derived_lock:
        if base._pointer_type is not None:
            return base._pointer_type
        pointer = TypeObject(f"{base.name} pointer", TypeKind.POINTER, BUILTIN_TYPES.get("AnyPointer"),
                             base=base, final=True, builtin=base.builtin)
        base._pointer_type = pointer
    if base.kind != TypeKind.REFERENCE:
        reference = make_reference_type(base)
        pointer.add_method(MethodEntry(intern_symbol("_"), NativeFunction(
            "_", [pointer], reference, _same_handle, intrinsic_id="pointer.reference")))
    return pointer


def function_type(argument_types: Tuple[TypeObject, ...], result_type) -> TypeObject:
    key = (tuple(argument_types), result_type)
    with _derived_lock:
        existing = _function_types.get(key)
        if existing is not None:
            return existing
        arguments = ", ".join(str(t) for t in argument_types)
        created = TypeObject(f"({arguments}) => {result_type}", TypeKind.FUNCTION, BUILTIN_TYPES.get("Function"),
                             argument_types=argument_types, result_type=result_type, final=True, builtin=True)
        _function_types[key] = created
        return created


def is_assignable(target: TypeObject, source: TypeObject) -> bool:
    """Whether a value statically typed source may flow where target is expected"""
    if target is source or target is None or source is None:
        return True
    if target.is_dynamic or source.is_dynamic or target.name == "Any":
        return True
    if source.is_subtype_of(target):
        return True
    if source.name == "UndefinedObject" and not target.is_primitive and target.kind != TypeKind.SINGLETON:
        return True
    if target.kind == TypeKind.FUNCTION and source.kind == TypeKind.FUNCTION:
        return len(target.argument_types) == len(source.argument_types)
    return False


def common_type(first: TypeObject, second: TypeObject) -> Optional[TypeObject]:
    """Nearest shared supertype below Any, or None"""
    if first is second:
        return first
    for candidate in first.supertypes():
        if candidate.name in ("Any", "Object"):
            break
        if second.is_subtype_of(candidate):
            return candidate
    return None
