"""
Program images.

Tracing walks the program entity graph breadth first from a root set.
Serialization writes one record per traced object; every reference between
records is a placeholder in the payload plus an entry in the relocation
table. Builtin types, singletons, intrinsics and macros are never written:
records name them through the externals table and the loader resolves the
names against its own session. Reference, pointer and function types are
rebuilt through their memoizing constructors so loaded programs share them.

Layout (little-endian, records padded to 4 bytes):
    header      magic "SYIM", version, flags, class count, external count,
                record count, relocation count, root count
    strings     class names, then external names (u32 length + UTF-8)
    records     kind u8, type index u32 (into the class names), payload
    relocations (record index, payload offset, target record index)
    roots       record indices
"""

import logging
import struct
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Callable, Dict, List, Optional, Tuple

from .data_structures import SourcePosition
from .errors import ImageError
from .object_model import (Immediate, ImmediateTag, ObjectKind, ByteTuple, SlotTuple, Symbol,
                           Environment, Binding, ScopeKind, FunctionDefinition, FunctionFlag, LocalBinding, Closure,
                           NativeFunction, MemoryHandle, intern_symbol)
from .type_system import (TypeObject, TypeKind, MethodEntry, DispatchKind, make_reference_type, make_pointer_type,
                          function_type)
from .program_entities import Namespace, FunctionEntity, ClassEntity, FieldEntity
from .quasiquote import QuasiQuoteTemplate
from .intrinsics import INTRINSICS
from .bootstrap import universe
from . import ast_nodes

logger = logging.getLogger("SysmelKernel")

IMAGE_MAGIC = b"SYIM"
IMAGE_VERSION = 1
FLAG_STRIPPED_AST = 0x1

HEADER = struct.Struct("<4s7I")
RECORD_HEADER = struct.Struct("<B3xII")
RELOCATION = struct.Struct("<III")
WORD = struct.Struct("<I")
UNRELOCATED = 0xFFFFFFFF

ROOT_SETS = ("main", "all")


class RecordKind(IntEnum):
    OBJECT = 1
    DERIVED_TYPE = 2
    DERIVED_NATIVE = 3


class ValueTag(IntEnum):
    NONE = 0
    FALSE = 1
    TRUE = 2
    INTEGER = 3
    FLOAT = 4
    STRING = 5
    BYTES = 6
    BYTEARRAY = 7
    LIST = 8
    TUPLE = 9
    DICT = 10
    SET = 11
    ENUM = 12
    SYMBOL = 13
    IMMEDIATE = 14
    POSITION = 15
    EXTERNAL = 16
    REFERENCE = 17


RECORD_CLASSES: Dict[str, type] = {cls.__name__: cls for cls in [
    Namespace, FunctionEntity, ClassEntity, FieldEntity, Environment, Binding, FunctionDefinition, LocalBinding,
    Closure, MemoryHandle, SlotTuple, ByteTuple, TypeObject, MethodEntry, QuasiQuoteTemplate,
    *ast_nodes.ALL_NODE_CLASSES,
]}

ENUM_CLASSES: Dict[str, type] = {cls.__name__: cls for cls in [
    ScopeKind, TypeKind, DispatchKind, FunctionFlag, ImmediateTag, ObjectKind,
]}

# Caches and host callables; the loader restores them to these defaults.
TRANSIENT_ATTRIBUTES: List[Tuple[type, Dict[str, Callable[[], Any]]]] = [
    (FunctionDefinition, {"pending_analysis": lambda: None, "compiled_bytecode": lambda: None,
                          "hir_cache": dict, "mir_cache": dict}),
    (TypeObject, {"_reference_type": lambda: None, "_pointer_type": lambda: None}),
]

DERIVED_TYPE_KINDS = (TypeKind.REFERENCE, TypeKind.POINTER, TypeKind.FUNCTION)
DERIVED_NATIVE_IDS = ("reference.store", "reference.address", "reference.load", "pointer.reference")


def transient_attributes(value: Any) -> Dict[str, Callable[[], Any]]:
    for owner, attributes in TRANSIENT_ATTRIBUTES:
        if isinstance(value, owner):
            return attributes
    return {}


class ExternalTable:
    """Stable names for the objects every session already owns"""

    def __init__(self, builtins: Optional[Environment] = None):
        self.names: Dict[int, str] = {}
        self.by_name: Dict[str, Any] = {}
        cosmos = universe()
        for name, builtin in cosmos.types.items():
            self.add(f"type:{name}", builtin)
        for name in ("nil", "true", "false", "void"):
            self.add(f"value:{name}", getattr(cosmos, name))
        for intrinsic_id, native in INTRINSICS.items():
            self.add(f"intrinsic:{intrinsic_id}", native)
        for name, builtin in cosmos.types.items():
            for label, dictionary in (("method", builtin.method_dictionary), ("macro", builtin.macro_dictionary),
                                      ("type-side", builtin.type_side_dictionary)):
                for selector, entry in dictionary.items():
                    self.add(f"{label}:{name}>>{selector.text}", entry.target)
                    self.add(f"entry:{label}:{name}>>{selector.text}", entry)
        if builtins is not None:
            self.add("environment:builtins", builtins)
            for symbol, binding in builtins.bindings.items():
                self.add(f"global:{symbol.text}", binding.value)

    def add(self, name: str, value: Any):
        if value is None or id(value) in self.names:
            return
        self.names[id(value)] = name
        self.by_name.setdefault(name, value)

    def name_of(self, value: Any) -> Optional[str]:
        return self.names.get(id(value))

    def resolve(self, name: str) -> Any:
        try:
            return self.by_name[name]
        except KeyError:
            raise ImageError(f"the image refers to {name}, which this session does not define",
                             kind="unknown-external") from None


def record_kind(value: Any, externals: ExternalTable) -> Optional[RecordKind]:
    """The record a value is written as; None for externals and inline values"""
    if value is None or isinstance(value, (bool, int, float, str, bytes, bytearray, Enum, Symbol, Immediate,
                                           SourcePosition, list, tuple, dict, set, frozenset)):
        return None
    if externals.name_of(value) is not None:
        return None
    if isinstance(value, TypeObject) and value.kind in DERIVED_TYPE_KINDS:
        return RecordKind.DERIVED_TYPE
    if isinstance(value, NativeFunction):
        if value.intrinsic_id in DERIVED_NATIVE_IDS:
            return RecordKind.DERIVED_NATIVE
        raise ImageError(f"native {value.name} has no external name", kind="unknown-external")
    if type(value).__name__ in RECORD_CLASSES:
        return RecordKind.OBJECT
    raise ImageError(f"cannot write a {type(value).__name__} into an image", kind="unknown-external")


def record_state(value: Any, kind: RecordKind, strip_ast: bool = False) -> List[Tuple[str, Any]]:
    """Named fields of one record, in the order they are written"""
    if kind == RecordKind.DERIVED_TYPE:
        return [("kind", value.kind), ("base", value.base), ("argument_types", value.argument_types),
                ("result_type", value.result_type)]
    if kind == RecordKind.DERIVED_NATIVE:
        return [("intrinsic_id", value.intrinsic_id), ("owner", value.argument_types[0])]
    skipped = transient_attributes(value)
    state = {name: item for name, item in vars(value).items() if name != "_identity_hash" and name not in skipped}
    if strip_ast and isinstance(value, FunctionDefinition):
        state["body_node"] = None
        state["stripped"] = True
    return sorted(state.items())


def _nested_values(item: Any):
    if isinstance(item, (list, tuple)):
        yield from item
    elif isinstance(item, dict):
        for key, value in item.items():
            yield key
            yield value
    elif isinstance(item, (set, frozenset)):
        yield from sorted(item, key=_set_order)


def _set_order(item: Any):
    return type(item).__name__, str(getattr(item, "value", item))


# --- tracing ---
@dataclass
class TraceResult:
    """Traced objects in record order plus the roots they were traced from"""
    objects: List[Any]
    roots: List[Any]
    strip_ast: bool = False
    kinds: List[RecordKind] = field(default_factory=list)

    def contains(self, value: Any) -> bool:
        return any(candidate is value for candidate in self.objects)

    def __len__(self):
        return len(self.objects)


def resolve_roots(namespace: Namespace, roots: str = "main") -> List[Any]:
    main = namespace.member("main")
    if roots == "main":
        if main is None:
            raise ImageError(f"{namespace.name.text} has no main function to trace from", kind="unresolvable-root")
        return [main]
    if roots == "all":
        return ([main] if main is not None else []) + [namespace]
    raise ImageError(f"unknown root set {roots!r}; choose one of {', '.join(ROOT_SETS)}", kind="unresolvable-root")


def trace_entities(roots: List[Any], externals: ExternalTable, strip_ast: bool = False) -> TraceResult:
    """Breadth-first closure over record fields, in field order"""
    result = TraceResult([], list(roots), strip_ast)
    seen: Dict[int, int] = {}

    def visit(value: Any):
        if id(value) in seen:
            return
        kind = record_kind(value, externals)
        if kind is None:
            for nested in _nested_values(value):
                visit(nested)
            return
        seen[id(value)] = len(result.objects)
        result.objects.append(value)
        result.kinds.append(kind)

    for root in roots:
        if record_kind(root, externals) is None:
            raise ImageError(f"root {root!r} cannot be written as a record", kind="unresolvable-root")
        visit(root)
    index = 0
    while index < len(result.objects):
        value, kind = result.objects[index], result.kinds[index]
        if isinstance(value, FunctionDefinition) and value.pending_analysis is not None and not value.stripped:
            value.ensure_analyzed()
        for _, item in record_state(value, kind, strip_ast):
            visit(item)
        index += 1
    logger.info(f"Traced {len(result.objects)} entities from {len(roots)} roots")
    return result


# --- writing ---
def _padding(length: int) -> bytes:
    return b"\0" * (-length % 4)


def _string(text: str) -> bytes:
    encoded = text.encode('utf-8')
    return WORD.pack(len(encoded)) + encoded + _padding(len(encoded))


class ImageWriter:
    def __init__(self, trace: TraceResult, externals: ExternalTable):
        self.trace = trace
        self.externals = externals
        self.indices: Dict[int, int] = {id(value): index for index, value in enumerate(trace.objects)}
        self.class_names: Dict[str, int] = {}
        self.external_names: Dict[str, int] = {}
        self.relocations: List[Tuple[int, int, int]] = []
        self.record_index = 0
        self.payload = bytearray()

    @staticmethod
    def _table_index(table: Dict[str, int], name: str) -> int:
        return table.setdefault(name, len(table))

    def write(self) -> bytes:
        records = bytearray()
        for index, (value, kind) in enumerate(zip(self.trace.objects, self.trace.kinds)):
            self.record_index = index
            self.payload = bytearray()
            state = record_state(value, kind, self.trace.strip_ast)
            if kind == RecordKind.OBJECT:
                self.payload += WORD.pack(len(state))
                for name, item in state:
                    self.payload += _string(name)
                    self.value(item)
            else:
                for _, item in state:
                    self.value(item)
            type_index = self._table_index(self.class_names, type(value).__name__)
            records += RECORD_HEADER.pack(kind, type_index, len(self.payload))
            records += self.payload + _padding(len(self.payload))

        flags = FLAG_STRIPPED_AST if self.trace.strip_ast else 0
        output = bytearray(HEADER.pack(IMAGE_MAGIC, IMAGE_VERSION, flags, len(self.class_names),
                                       len(self.external_names), len(self.trace.objects), len(self.relocations),
                                       len(self.trace.roots)))
        for name in list(self.class_names) + list(self.external_names):
            output += _string(name)
        output += records
        for relocation in self.relocations:
            output += RELOCATION.pack(*relocation)
        for root in self.trace.roots:
            output += WORD.pack(self.indices[id(root)])
        return bytes(output)

    def tag(self, tag: ValueTag):
        self.payload.append(tag)

    def value(self, item: Any):
        if item is None:
            self.tag(ValueTag.NONE)
        elif isinstance(item, bool):
            self.tag(ValueTag.TRUE if item else ValueTag.FALSE)
        elif isinstance(item, Enum):
            self.tag(ValueTag.ENUM)
            self.payload += _string(type(item).__name__) + _string(item.name)
        elif isinstance(item, int):
            self.tag(ValueTag.INTEGER)
            encoded = item.to_bytes((item.bit_length() + 8) // 8, 'little', signed=True)
            self.payload += WORD.pack(len(encoded)) + encoded
        elif isinstance(item, float):
            self.tag(ValueTag.FLOAT)
            self.payload += struct.pack('<d', item)
        elif isinstance(item, str):
            self.tag(ValueTag.STRING)
            self.payload += _string(item)
        elif isinstance(item, (bytes, bytearray)):
            self.tag(ValueTag.BYTEARRAY if isinstance(item, bytearray) else ValueTag.BYTES)
            self.payload += WORD.pack(len(item)) + bytes(item)
        elif isinstance(item, Symbol):
            self.tag(ValueTag.SYMBOL)
            self.payload += _string(item.text)
        elif isinstance(item, Immediate):
            self.tag(ValueTag.IMMEDIATE)
            self.payload += _string(item.tag.name)
            self.value(item.payload)
        elif isinstance(item, SourcePosition):
            self.tag(ValueTag.POSITION)
            self.payload += _string(item.file_name)
            self.payload += struct.pack("<4I", item.start_offset, item.end_offset, item.line, item.column)
        elif isinstance(item, (list, tuple, set, frozenset)):
            self.tag(ValueTag.TUPLE if isinstance(item, tuple) else ValueTag.SET if isinstance(item, (set, frozenset))
                     else ValueTag.LIST)
            self.payload += WORD.pack(len(item))
            for nested in _nested_values(item):
                self.value(nested)
        elif isinstance(item, dict):
            self.tag(ValueTag.DICT)
            self.payload += WORD.pack(len(item))
            for nested in _nested_values(item):
                self.value(nested)
        else:
            name = self.externals.name_of(item)
            if name is not None:
                self.tag(ValueTag.EXTERNAL)
                self.payload += WORD.pack(self._table_index(self.external_names, name))
                return
            target = self.indices.get(id(item))
            if target is None:
                raise ImageError(f"{item!r} was not traced", kind="unresolvable-root")
            self.tag(ValueTag.REFERENCE)
            self.relocations.append((self.record_index, len(self.payload), target))
            self.payload += WORD.pack(UNRELOCATED)


def serialize_image(trace: TraceResult, externals: ExternalTable) -> bytes:
    data = ImageWriter(trace, externals).write()
    logger.info(f"Serialized {len(trace.objects)} records into {len(data)} bytes")
    return data


# --- loading ---
@dataclass(frozen=True)
class _Reference:
    target: int


@dataclass
class LoadedImage:
    version: int
    flags: int
    objects: List[Any]
    roots: List[Any]
    relocation_count: int = 0

    @property
    def strip_ast(self) -> bool:
        return bool(self.flags & FLAG_STRIPPED_AST)

    @property
    def namespace(self) -> Optional[Namespace]:
        return next((root for root in self.roots if isinstance(root, Namespace)), None)

    def main_entity(self) -> Optional[FunctionEntity]:
        for root in self.roots:
            if isinstance(root, FunctionEntity) and root.name.text == "main":
                return root
        namespace = self.namespace
        return namespace.member("main") if namespace is not None else None


class ImageReader:
    def __init__(self, data: bytes, externals: ExternalTable):
        self.data = bytes(data)
        self.externals = externals
        self.offset = 0

    # --- raw reads ---
    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise ImageError(f"image ends inside {what} at byte {self.offset}", kind="truncated-payload")
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, layout: struct.Struct, what: str) -> tuple:
        return layout.unpack(self.take(layout.size, what))

    def word(self, what: str) -> int:
        return self.unpack(WORD, what)[0]

    def string(self, what: str) -> str:
        length = self.word(what)
        text = self.take(length, what)
        self.take(-length % 4, what)
        try:
            return text.decode('utf-8')
        except UnicodeDecodeError:
            raise ImageError(f"{what} is not UTF-8 text", kind="truncated-payload") from None

    # --- container ---
    def read(self) -> LoadedImage:
        if len(self.data) < len(IMAGE_MAGIC) or self.data[:len(IMAGE_MAGIC)] != IMAGE_MAGIC:
            raise ImageError(f"not an image: magic {self.data[:4]!r}", kind="bad-magic")
        _, version, flags, class_count, external_count, record_count, relocation_count, root_count = \
            self.unpack(HEADER, "the header")
        if version != IMAGE_VERSION:
            raise ImageError(f"image version {version} is not {IMAGE_VERSION}", kind="version-mismatch")
        class_names = [self.string("the class names") for _ in range(class_count)]
        external_names = [self.string("the external names") for _ in range(external_count)]
        records: List[Tuple[RecordKind, str, bytes]] = []
        for index in range(record_count):
            kind, type_index, length = self.unpack(RECORD_HEADER, f"record {index}")
            payload = self.take(length, f"record {index}")
            self.take(-length % 4, f"record {index}")
            if type_index >= len(class_names) or kind not in {member.value for member in RecordKind}:
                raise ImageError(f"record {index} has an unknown kind or class", kind="truncated-payload")
            records.append((RecordKind(kind), class_names[type_index], payload))
        relocations: Dict[Tuple[int, int], int] = {}
        for _ in range(relocation_count):
            record, offset, target = self.unpack(RELOCATION, "the relocation table")
            if record >= record_count or target >= record_count or offset + WORD.size > len(records[record][2]):
                raise ImageError(f"relocation ({record}, {offset}) -> {target} is outside the image",
                                 kind="relocation-out-of-range")
            relocations[(record, offset)] = target
        root_indices = [self.word("the roots") for _ in range(root_count)]
        for index in root_indices:
            if index >= record_count:
                raise ImageError(f"root {index} is not a record", kind="unresolvable-root")

        decoder = _RecordDecoder(records, relocations, [self.externals.resolve(name) for name in external_names])
        try:
            objects = decoder.build()
        except (KeyError, TypeError, ValueError, IndexError, AttributeError, RecursionError) as error:
            raise ImageError(f"record {decoder.record_index} does not decode: {error}",
                             kind="truncated-payload") from None
        logger.info(f"Loaded {record_count} records and {relocation_count} relocations")
        return LoadedImage(version, flags, objects, [objects[index] for index in root_indices], relocation_count)


class _RecordDecoder:
    """Decodes payloads, then links records in three passes so cycles resolve"""

    def __init__(self, records: List[Tuple[RecordKind, str, bytes]], relocations: Dict[Tuple[int, int], int],
                 externals: List[Any]):
        self.records = records
        self.relocations = relocations
        self.externals = externals
        self.objects: List[Any] = [None] * len(records)
        self.states: List[List[Tuple[str, Any]]] = []
        self.record_index = 0
        self.payload = b""
        self.offset = 0

    def build(self) -> List[Any]:
        for index, (kind, class_name, payload) in enumerate(self.records):
            self.record_index, self.payload, self.offset = index, payload, 0
            if kind == RecordKind.OBJECT:
                count = self.word()
                state = [(self.string(), self.value()) for _ in range(count)]
            else:
                state = [("", self.value()) for _ in range(4 if kind == RecordKind.DERIVED_TYPE else 2)]
            if self.offset != len(payload):
                raise ImageError(f"record {index} has {len(payload) - self.offset} trailing bytes",
                                 kind="truncated-payload")
            self.states.append(state)

        for index, (kind, class_name, _) in enumerate(self.records):
            if kind == RecordKind.OBJECT:
                self.allocate(index, class_name)
        for index, (kind, _, _) in enumerate(self.records):
            if kind != RecordKind.OBJECT:
                self.derived(index)
        for index, (kind, _, _) in enumerate(self.records):
            if kind == RecordKind.OBJECT:
                for name, item in self.states[index]:
                    if _has_references(item):
                        setattr(self.objects[index], name, self.link(item))
        return self.objects

    def allocate(self, index: int, class_name: str):
        cls = RECORD_CLASSES.get(class_name)
        if cls is None:
            raise ImageError(f"record {index} has unknown class {class_name}", kind="unknown-external")
        instance = cls.__new__(cls)
        for name, default in transient_attributes(instance).items():
            setattr(instance, name, default())
        for name, item in self.states[index]:
            if not _has_references(item):
                setattr(instance, name, item)
        self.objects[index] = instance

    def derived(self, index: int) -> Any:
        if self.objects[index] is not None:
            return self.objects[index]
        kind = self.records[index][0]
        values = [self.link(item) for _, item in self.states[index]]
        if kind == RecordKind.DERIVED_TYPE:
            type_kind, base, argument_types, result_type = values
            if type_kind in (TypeKind.REFERENCE, TypeKind.POINTER) and \
                    (not isinstance(base, TypeObject) or base.is_reference and type_kind == TypeKind.REFERENCE):
                raise ImageError(f"record {index} derives a type from {base!r}", kind="truncated-payload")
            if type_kind == TypeKind.REFERENCE:
                created = make_reference_type(base)
            elif type_kind == TypeKind.POINTER:
                created = make_pointer_type(base)
            else:
                created = function_type(tuple(argument_types), result_type)
        else:
            intrinsic_id, owner = values
            created = _derived_native(owner, intrinsic_id)
        self.objects[index] = created
        return created

    def link(self, item: Any) -> Any:
        if isinstance(item, _Reference):
            target = self.objects[item.target]
            return target if target is not None else self.derived(item.target)
        if isinstance(item, list):
            return [self.link(nested) for nested in item]
        if isinstance(item, tuple):
            return tuple(self.link(nested) for nested in item)
        if isinstance(item, set):
            return {self.link(nested) for nested in item}
        if isinstance(item, dict):
            return {self.link(key): self.link(value) for key, value in item.items()}
        return item

    # --- payload reads ---
    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise ImageError(f"record {self.record_index} ends early", kind="truncated-payload")
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def word(self) -> int:
        return WORD.unpack(self.take(WORD.size))[0]

    def string(self) -> str:
        length = self.word()
        text = self.take(length)
        self.take(-length % 4)
        try:
            return text.decode('utf-8')
        except UnicodeDecodeError:
            raise ImageError(f"record {self.record_index} holds text that is not UTF-8",
                             kind="truncated-payload") from None

    def items(self) -> List[Any]:
        return [self.value() for _ in range(self.word())]

    def value(self) -> Any:
        start = self.offset
        try:
            tag = ValueTag(self.take(1)[0])
        except ValueError:
            raise ImageError(f"record {self.record_index} has a bad value tag at {start}",
                             kind="truncated-payload") from None
        if tag == ValueTag.NONE:
            return None
        if tag in (ValueTag.FALSE, ValueTag.TRUE):
            return tag == ValueTag.TRUE
        if tag == ValueTag.INTEGER:
            return int.from_bytes(self.take(self.word()), 'little', signed=True)
        if tag == ValueTag.FLOAT:
            return struct.unpack('<d', self.take(8))[0]
        if tag == ValueTag.STRING:
            return self.string()
        if tag in (ValueTag.BYTES, ValueTag.BYTEARRAY):
            data = self.take(self.word())
            return bytearray(data) if tag == ValueTag.BYTEARRAY else bytes(data)
        if tag == ValueTag.LIST:
            return self.items()
        if tag == ValueTag.TUPLE:
            return tuple(self.items())
        if tag == ValueTag.SET:
            return set(self.items())
        if tag == ValueTag.DICT:
            return dict(self.items_pairs())
        if tag == ValueTag.ENUM:
            class_name, member = self.string(), self.string()
            enum_class = ENUM_CLASSES.get(class_name)
            if enum_class is None or member not in enum_class.__members__:
                raise ImageError(f"unknown enumeration {class_name}.{member}", kind="unknown-external")
            return enum_class[member]
        if tag == ValueTag.SYMBOL:
            return intern_symbol(self.string())
        if tag == ValueTag.IMMEDIATE:
            tag_name = self.string()
            if tag_name not in ImmediateTag.__members__:
                raise ImageError(f"record {self.record_index} has an unknown immediate tag {tag_name}",
                                 kind="truncated-payload")
            immediate_tag = ImmediateTag[tag_name]
            return Immediate(self.value(), immediate_tag)
        if tag == ValueTag.POSITION:
            file_name = self.string()
            try:
                return SourcePosition(file_name, *struct.unpack("<4I", self.take(16)))
            except ValueError as error:
                raise ImageError(f"record {self.record_index} has a bad position: {error}",
                                 kind="truncated-payload") from None
        if tag == ValueTag.EXTERNAL:
            index = self.word()
            if index >= len(self.externals):
                raise ImageError(f"external {index} is outside the externals table", kind="unknown-external")
            return self.externals[index]
        offset = self.offset
        self.take(WORD.size)
        target = self.relocations.get((self.record_index, offset))
        if target is None:
            raise ImageError(f"record {self.record_index} has an unrelocated reference at {offset}",
                             kind="relocation-out-of-range")
        return _Reference(target)

    def items_pairs(self) -> List[Tuple[Any, Any]]:
        count = self.word()
        return [(self.value(), self.value()) for _ in range(count)]


def _has_references(item: Any) -> bool:
    if isinstance(item, _Reference):
        return True
    if isinstance(item, (list, tuple, set)):
        return any(_has_references(nested) for nested in item)
    if isinstance(item, dict):
        return any(_has_references(key) or _has_references(value) for key, value in item.items())
    return False


def _derived_native(owner: TypeObject, intrinsic_id: str) -> NativeFunction:
    if intrinsic_id == "reference.load":
        return owner.reference_load
    selector = {"reference.store": ":=", "reference.address": "address", "pointer.reference": "_"}[intrinsic_id]
    return owner.method_dictionary[intern_symbol(selector)].target


def load_image(data: bytes, externals: ExternalTable) -> LoadedImage:
    return ImageReader(data, externals).read()


# --- measurement ---
@dataclass
class ImageSizes:
    full: int
    stripped: int
    records: int
    ast_records: int

    @property
    def ast_bytes(self) -> int:
        return self.full - self.stripped


def measure_image(roots: List[Any], externals: ExternalTable) -> ImageSizes:
    """Size of an image with and without the analyzed AST"""
    full_trace = trace_entities(roots, externals)
    stripped_trace = trace_entities(roots, externals, strip_ast=True)
    full = len(serialize_image(full_trace, externals))
    stripped = len(serialize_image(stripped_trace, externals))
    ast_records = sum(1 for value in full_trace.objects if isinstance(value, ast_nodes.AstNode))
    return ImageSizes(full, stripped, len(full_trace.objects), ast_records)
