"""
Program entities produced by the metabuilders. The global namespace is the
root of the program entity graph that images are traced from.
"""

from typing import Any, Dict, List, Optional

from .object_model import ObjectValue, Symbol, Environment, ScopeKind, intern_symbol


class Namespace(ObjectValue):
    type_name = "Namespace"

    def __init__(self, name: str, environment: Optional[Environment] = None):
        self.name = intern_symbol(name)
        self.members: Dict[Symbol, Any] = {}
        self.environment = environment or Environment(None, ScopeKind.NAMESPACE, self)

    def add_member(self, name: Symbol, member: Any) -> Any:
        self.members[name] = member
        return member

    def member(self, name) -> Optional[Any]:
        return self.members.get(name if isinstance(name, Symbol) else intern_symbol(name))

    def describe(self) -> str:
        return f"namespace {self.name.text}"


class FieldEntity(ObjectValue):
    type_name = "FieldEntity"

    def __init__(self, name: Symbol, field_type, slot_index: int, visibility: str = "public"):
        self.name = name
        self.field_type = field_type
        self.slot_index = slot_index
        self.visibility = visibility

    def describe(self) -> str:
        return f"field {self.name.text} => {self.field_type}"


class FunctionEntity(ObjectValue):
    type_name = "FunctionEntity"

    def __init__(self, name: Symbol, definition, visibility: str = "public"):
        self.name = name
        self.definition = definition
        self.visibility = visibility

    def describe(self) -> str:
        return f"function {self.name.text}"


class ClassEntity(ObjectValue):
    """Name, layout and methods of a class defined by the class metabuilder"""
    type_name = "ClassEntity"

    def __init__(self, name: Symbol, class_type, visibility: str = "public"):
        self.name = name
        self.class_type = class_type
        self.visibility = visibility
        self.fields: List[FieldEntity] = []
        self.methods: Dict[Symbol, FunctionEntity] = {}

    @property
    def supertype(self):
        return self.class_type.supertype

    def describe(self) -> str:
        return f"class {self.name.text}"
