"""
Runtime object model.

Every first-class value is an ObjectValue of exactly one kind: an immediate
(small integer or character), a byte tuple or a slot tuple. Python-level
objects that the language also treats as values (symbols, environments,
function definitions, closures, native functions, memory handles) derive
from ObjectValue too and report their type through the builtin type registry.
"""

import itertools
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .data_structures import SourcePosition, EMPTY_POSITION
from .errors import EvaluationError

# Filled by bootstrap.universe(); object_model never imports the type system.
BUILTIN_TYPES: Dict[str, Any] = {}
BUILTIN_VALUES: Dict[str, Any] = {}

SMALL_INTEGER_MIN = -(1 << 60)
SMALL_INTEGER_MAX = (1 << 60) - 1

_identity_counter = itertools.count(1)


def builtin_type(name: str):
    try:
        return BUILTIN_TYPES[name]
    except KeyError:
        raise LookupError(f"builtin type '{name}' requested before bootstrap") from None


def builtin_value(name: str):
    try:
        return BUILTIN_VALUES[name]
    except KeyError:
        raise LookupError(f"builtin value '{name}' requested before bootstrap") from None


class ObjectKind(Enum):
    IMMEDIATE = "immediate"
    BYTES = "bytes"
    SLOTS = "slots"


class ObjectValue:
    """Base class of every language value"""
    object_kind = ObjectKind.SLOTS
    type_name = "Any"

    @property
    def identity_hash(self) -> int:
        try:
            return self.__dict__["_identity_hash"]
        except KeyError:
            value = next(_identity_counter)
            self.__dict__["_identity_hash"] = value
            return value

    @property
    def object_type(self):
        return builtin_type(self.type_name)

    @property
    def size(self) -> int:
        return 0


class ImmediateTag(Enum):
    SMALL_INTEGER = "small-int"
    CHARACTER = "char"


class Immediate(ObjectValue):
    """Tagged value without identity; equal payloads are the same value"""
    object_kind = ObjectKind.IMMEDIATE
    __slots__ = ("payload", "tag")

    def __init__(self, payload: int, tag: ImmediateTag = ImmediateTag.SMALL_INTEGER):
        if tag == ImmediateTag.SMALL_INTEGER and not SMALL_INTEGER_MIN <= payload <= SMALL_INTEGER_MAX:
            raise ValueError(f"{payload} does not fit a small integer immediate")
        self.payload = payload
        self.tag = tag

    @property
    def identity_hash(self) -> int:
        return self.payload

    @property
    def object_type(self):
        return builtin_type("Integer" if self.tag == ImmediateTag.SMALL_INTEGER else "Character")

    def __eq__(self, other):
        return isinstance(other, Immediate) and other.tag == self.tag and other.payload == self.payload

    def __hash__(self):
        return hash((self.tag, self.payload))

    def __repr__(self):
        if self.tag == ImmediateTag.CHARACTER:
            return f"Immediate({chr(self.payload)!r})"
        return f"Immediate({self.payload})"


class ByteTuple(ObjectValue):
    object_kind = ObjectKind.BYTES

    def __init__(self, value_type, data: bytes):
        self.value_type = value_type
        self.data = bytearray(data)

    @property
    def object_type(self):
        return self.value_type

    @property
    def size(self) -> int:
        return len(self.data)

    def __repr__(self):
        return f"ByteTuple({self.value_type}, {bytes(self.data)!r})"


class SlotTuple(ObjectValue):
    object_kind = ObjectKind.SLOTS

    def __init__(self, value_type, slots: Sequence[Any]):
        self.value_type = value_type
        self.slots = list(slots)

    @property
    def object_type(self):
        return self.value_type

    @property
    def size(self) -> int:
        return len(self.slots)

    def __repr__(self):
        return f"SlotTuple({self.value_type}, {len(self.slots)} slots)"


def make_object(value_type, payload) -> ObjectValue:
    """Allocate a byte or slot tuple; an integer payload is a slot count filled with nil"""
    layout = value_type.layout_kind
    if layout == ObjectKind.BYTES:
        if isinstance(payload, (bytes, bytearray)):
            return ByteTuple(value_type, payload)
        if isinstance(payload, str):
            return ByteTuple(value_type, payload.encode('utf-8'))
    elif layout == ObjectKind.SLOTS:
        if isinstance(payload, int) and not isinstance(payload, bool):
            return SlotTuple(value_type, [builtin_value("nil")] * payload)
        if isinstance(payload, (list, tuple)):
            return SlotTuple(value_type, payload)
    raise EvaluationError(f"cannot make a {value_type} from a {type(payload).__name__} payload",
                          kind="payload-kind-mismatch")


# --- Symbols ---
class Symbol(ObjectValue):
    """Interned name; compare symbols with 'is'"""
    type_name = "Symbol"

    def __init__(self, text: str, symbol_id: int):
        self.text = text
        self.symbol_id = symbol_id

    @property
    def size(self) -> int:
        return len(self.text.encode('utf-8'))

    def __repr__(self):
        return f"#{self.text}"

    def __str__(self):
        return self.text


_symbol_table: Dict[str, Symbol] = {}
_symbol_lock = threading.Lock()


def intern_symbol(text: str) -> Symbol:
    with _symbol_lock:
        symbol = _symbol_table.get(text)
        if symbol is None:
            symbol = Symbol(text, len(_symbol_table) + 1)
            _symbol_table[text] = symbol
        return symbol


# --- Environments ---
class ScopeKind(Enum):
    GLOBAL = "global"
    NAMESPACE = "namespace"
    CLASS = "class"
    FUNCTION = "function"
    BLOCK = "block"


@dataclass(eq=False)
class Binding:
    """What a name means in one scope"""
    name: Symbol
    value: Any = None
    value_type: Any = None
    mutable: bool = False
    local: Any = None
    field_index: Optional[int] = None


class Environment(ObjectValue):
    type_name = "Environment"

    def __init__(self, parent: Optional["Environment"] = None, scope_kind: ScopeKind = ScopeKind.BLOCK,
                 owner: Any = None):
        self.parent = parent
        self.scope_kind = scope_kind
        self.owner = owner
        self.bindings: Dict[Symbol, Binding] = {}

    def define(self, name, value=None, value_type=None, mutable: bool = False, local=None,
               field_index: Optional[int] = None) -> Binding:
        symbol = name if isinstance(name, Symbol) else intern_symbol(name)
        binding = Binding(symbol, value, value_type, mutable, local, field_index)
        self.bindings[symbol] = binding
        return binding

    def lookup(self, name) -> Optional[Binding]:
        symbol = name if isinstance(name, Symbol) else intern_symbol(name)
        environment = self
        while environment is not None:
            binding = environment.bindings.get(symbol)
            if binding is not None:
                return binding
            environment = environment.parent
        return None

    def lookup_identifier(self, name) -> Optional[Tuple[Any, Any, bool]]:
        binding = self.lookup(name)
        if binding is None:
            return None
        return binding.value, binding.value_type, binding.mutable

    def enclosing(self, *kinds: ScopeKind) -> Optional["Environment"]:
        environment = self
        while environment is not None:
            if environment.scope_kind in kinds:
                return environment
            environment = environment.parent
        return None

    @property
    def is_definition_scope(self) -> bool:
        return self.scope_kind in (ScopeKind.GLOBAL, ScopeKind.NAMESPACE, ScopeKind.CLASS)


# --- Functions ---
class FunctionFlag(Enum):
    MACRO = "macro"
    PURE = "pure"
    EAGER = "compiled-eagerly"
    INLINE = "always-inline"


@dataclass(eq=False)
class LocalBinding(ObjectValue):
    """A local variable or argument slot of one function"""
    type_name = "LocalBinding"
    name: Symbol
    value_type: Any
    index: int
    owner: Any = None
    mutable: bool = False
    is_argument: bool = False


def _function_type_of(argument_types, result_type):
    from .type_system import function_type
    return function_type(tuple(argument_types), result_type)


@dataclass(eq=False)
class FunctionDefinition(ObjectValue):
    """Analyzed arguments and body of a function, method or lambda"""
    name: Optional[Symbol] = None
    arguments: List[LocalBinding] = field(default_factory=list)
    result_type: Any = None
    body_node: Any = None
    flags: set = field(default_factory=set)
    capture_bindings: List[Any] = field(default_factory=list)
    position: SourcePosition = EMPTY_POSITION
    parent: Optional["FunctionDefinition"] = None
    local_count: int = 0
    pending_analysis: Optional[Callable[[], None]] = None
    compiled_bytecode: Any = None
    hir_cache: Dict[Any, Any] = field(default_factory=dict)
    mir_cache: Dict[Any, Any] = field(default_factory=dict)
    entity: Any = None
    stripped: bool = False

    def __post_init__(self):
        if FunctionFlag.MACRO in self.flags and FunctionFlag.PURE in self.flags:
            raise ValueError("a macro definition cannot be pure")

    @property
    def object_type(self):
        return _function_type_of([a.value_type for a in self.arguments], self.result_type)

    @property
    def is_macro(self) -> bool:
        return FunctionFlag.MACRO in self.flags

    @property
    def is_pure(self) -> bool:
        return FunctionFlag.PURE in self.flags

    @property
    def capture_names(self) -> List[Symbol]:
        return [binding.name for binding in self.capture_bindings]

    @property
    def argument_count(self) -> int:
        return len(self.arguments)

    @property
    def display_name(self) -> str:
        return self.name.text if self.name is not None else "<lambda>"

    def add_flag(self, flag: FunctionFlag):
        if {flag, *self.flags} >= {FunctionFlag.MACRO, FunctionFlag.PURE}:
            raise ValueError("a macro definition cannot be pure")
        self.flags.add(flag)

    def new_local(self, name: Symbol, value_type, mutable: bool = False, is_argument: bool = False) -> LocalBinding:
        binding = LocalBinding(name, value_type, self.local_count, self, mutable, is_argument)
        self.local_count += 1
        return binding

    def ensure_analyzed(self):
        if self.stripped:
            raise EvaluationError(f"the body of {self.display_name} was stripped from the image",
                                  self.position, "stripped-definition")
        pending = self.pending_analysis
        if pending is not None:
            self.pending_analysis = None
            pending()

    def __repr__(self):
        return f"FunctionDefinition({self.display_name}/{self.argument_count})"


class Closure(ObjectValue):
    """Capture vector plus function definition"""

    def __init__(self, definition: FunctionDefinition, captures: Sequence[Any]):
        if len(captures) != len(definition.capture_bindings):
            raise ValueError(f"{definition.display_name} expects {len(definition.capture_bindings)} captures, "
                             f"got {len(captures)}")
        self.definition = definition
        self.captures = list(captures)

    @property
    def object_type(self):
        return self.definition.object_type

    @property
    def size(self) -> int:
        return len(self.captures)


class NativeFunction(ObjectValue):
    """A function implemented by the host; intrinsics carry an intrinsic id"""

    def __init__(self, name: str, argument_types: Sequence[Any], result_type, implementation: Callable,
                 pure: bool = False, intrinsic_id: Optional[str] = None, is_macro: bool = False,
                 variadic: bool = False, primitive_op: Optional[str] = None):
        if is_macro and pure:
            raise ValueError(f"native macro {name} cannot be pure")
        self.name = name
        self.argument_types = list(argument_types)
        self.result_type = result_type
        self.implementation = implementation
        self.pure = pure
        self.intrinsic_id = intrinsic_id
        self.is_macro = is_macro
        self.variadic = variadic
        self.primitive_op = primitive_op

    @property
    def object_type(self):
        return _function_type_of(self.argument_types, self.result_type)

    @property
    def argument_count(self) -> int:
        return len(self.argument_types)

    @property
    def is_pure(self) -> bool:
        return self.pure

    @property
    def display_name(self) -> str:
        return self.name

    def __call__(self, *arguments):
        return self.implementation(*arguments)

    def __repr__(self):
        return f"NativeFunction({self.name})"


class MemoryHandle(ObjectValue):
    """Runtime form of references and pointers: a container plus a slot index"""
    type_name = "MemoryHandle"

    def __init__(self, container: Any, index: int = 0):
        self.container = container
        self.index = index

    @classmethod
    def new_cell(cls, initial_value: Any) -> "MemoryHandle":
        return cls(SlotTuple(builtin_type("Cell"), [initial_value]), 0)

    def _slots(self) -> List[Any]:
        return self.container.slots if isinstance(self.container, SlotTuple) else self.container

    def load(self) -> Any:
        return self._slots()[self.index]

    def store(self, value: Any) -> Any:
        self._slots()[self.index] = value
        return value

    def same_location(self, other: "MemoryHandle") -> bool:
        return self.container is other.container and self.index == other.index
