"""
Builds the builtin type universe once per process: the root types, the
primitive numeric types, the singletons, the AST node class hierarchy and the
intrinsic methods.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict

from .object_model import SlotTuple, BUILTIN_TYPES, BUILTIN_VALUES
from .type_system import TypeObject, TypeKind, MetabuilderType
from .intrinsics import install_intrinsics
from .macros import install_control_macros
from . import ast_nodes

logger = logging.getLogger("SysmelKernel")

INTEGER_TYPES = [("Int8", 8, True), ("Int16", 16, True), ("Int32", 32, True), ("Int64", 64, True),
                 ("UInt8", 8, False), ("UInt16", 16, False), ("UInt32", 32, False), ("UInt64", 64, False),
                 ("Size", 64, False)]
FLOAT_TYPES = [("Float32", 32), ("Float64", 64)]
OPAQUE_TYPES = ["Symbol", "Environment", "MemoryHandle", "LocalBinding", "MethodEntry", "Namespace",
                "ClassEntity", "FunctionEntity", "FieldEntity", "QuasiQuoteTemplate"]
METABUILDER_TYPES = ["MetabuilderFactory", "LetBuilder", "ModifierBuilder", "FunctionBuilder", "ClassBuilder",
                     "FieldBuilder", "MethodBuilder"]


@dataclass
class BuiltinUniverse:
    types: Dict[str, TypeObject]
    nil: SlotTuple
    true: SlotTuple
    false: SlotTuple
    void: SlotTuple

    def __getitem__(self, name: str) -> TypeObject:
        return self.types[name]


@lru_cache(maxsize=1)
def universe() -> BuiltinUniverse:
    types: Dict[str, TypeObject] = {}

    def define(name: str, kind: TypeKind, supertype_name=None, **kwargs) -> TypeObject:
        created = TypeObject(name, kind, types[supertype_name] if supertype_name else None, builtin=True, **kwargs)
        types[name] = created
        BUILTIN_TYPES[name] = created
        return created

    define("Any", TypeKind.OPAQUE)
    define("Dynamic", TypeKind.DYNAMIC)
    define("AnyReference", TypeKind.OPAQUE, "Any", final=True)
    define("AnyPointer", TypeKind.OPAQUE, "Any", final=True)
    define("Type", TypeKind.TYPE_OF_TYPES, "Any", final=True)
    define("Function", TypeKind.OPAQUE, "Any")
    define("Object", TypeKind.SLOT_CLASS, "Any")
    define("Cell", TypeKind.SLOT_CLASS, "Any", final=True)

    define("UndefinedObject", TypeKind.SINGLETON, "Any", final=True)
    define("Void", TypeKind.SINGLETON, "Any", final=True)
    define("Boolean", TypeKind.OPAQUE, "Any")
    define("True", TypeKind.SINGLETON, "Boolean", final=True)
    define("False", TypeKind.SINGLETON, "Boolean", final=True)

    define("Number", TypeKind.OPAQUE, "Any")
    define("Integer", TypeKind.BYTES_CLASS, "Number", final=True)
    for name, bits, signed in INTEGER_TYPES:
        define(name, TypeKind.PRIMITIVE_INTEGER, "Number", bits=bits, signed=signed, final=True)
    for name, bits in FLOAT_TYPES:
        define(name, TypeKind.PRIMITIVE_FLOAT, "Number", bits=bits, final=True)
    define("Character", TypeKind.OPAQUE, "Any", final=True)

    define("String", TypeKind.BYTES_CLASS, "Any", final=True)
    define("ByteArray", TypeKind.BYTES_CLASS, "Any", final=True)
    define("Array", TypeKind.SLOT_CLASS, "Any", final=True)
    define("Tuple", TypeKind.SLOT_CLASS, "Any", final=True)
    define("Dictionary", TypeKind.SLOT_CLASS, "Any", final=True)
    for name in OPAQUE_TYPES:
        define(name, TypeKind.OPAQUE, "Any", final=True)

    define("ASTNode", TypeKind.AST_NODE_CLASS, "Any")
    for node_class in ast_nodes.ALL_NODE_CLASSES:
        define(node_class.type_name, TypeKind.AST_NODE_CLASS, "ASTNode", final=True)

    define("Metabuilder", TypeKind.OPAQUE, "Any")
    for name in METABUILDER_TYPES:
        created = MetabuilderType(name, types["Metabuilder"])
        types[name] = created
        BUILTIN_TYPES[name] = created

    singletons = {}
    for value_name, type_name in (("nil", "UndefinedObject"), ("true", "True"), ("false", "False"),
                                  ("void", "Void")):
        singletons[value_name] = SlotTuple(types[type_name], [])
        BUILTIN_VALUES[value_name] = singletons[value_name]

    install_intrinsics(types)
    install_control_macros(types)
    logger.debug(f"Bootstrapped {len(types)} builtin types")
    return BuiltinUniverse(types, **singletons)
