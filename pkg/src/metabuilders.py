"""
Metabuilders: stateful builders that consume the message chain of a
definition (`function name(args) => Type := body`, `public class ...`) during
analysis and produce program entities when they finish.

A builder finishes on its terminal message (`:=` for let, function and
method) or at the end of the statement it appears in.
"""

import logging
from typing import ClassVar, Dict, List, Optional, Tuple

from .data_structures import AnalysisContext, SourcePosition, EMPTY_POSITION
from .errors import SysmelError, SemanticError
from .object_model import (ObjectValue, Environment, ScopeKind, FunctionDefinition, FunctionFlag, Symbol,
                           intern_symbol, builtin_type)
from .type_system import TypeObject, TypeKind, MethodEntry, DispatchKind
from .program_entities import ClassEntity, FieldEntity, FunctionEntity
from .ast_nodes import (AstNode, IdentifierNode, MessageSendNode, SequenceNode, LocalVariableNode, SlotLoadNode,
                        SlotStoreNode)

VISIBILITY_MODIFIERS = ("public", "private")
FLAG_MODIFIERS = {"pure": FunctionFlag.PURE, "macro": FunctionFlag.MACRO, "eager": FunctionFlag.EAGER,
                  "inline": FunctionFlag.INLINE}
MODIFIERS = VISIBILITY_MODIFIERS + tuple(FLAG_MODIFIERS) + ("final",)


def _builder_error(message: str, position: Optional[SourcePosition]) -> SemanticError:
    return SemanticError(message, position, "macro-error")


def parse_argument_spec(node: AstNode) -> Tuple[Symbol, Optional[AstNode]]:
    """`x` or `x: Type` inside an argument list"""
    if isinstance(node, IdentifierNode):
        return intern_symbol(node.name), None
    if isinstance(node, MessageSendNode) and node.receiver is None and len(node.arguments) == 1:
        text = node.selector_text or ""
        if text.endswith(":") and text.count(":") == 1:
            return intern_symbol(text[:-1]), node.arguments[0]
    raise _builder_error("expected an argument of the form 'name' or 'name: Type'", node.position)


def definition_environment(environment: Environment) -> Environment:
    return environment.enclosing(ScopeKind.GLOBAL, ScopeKind.NAMESPACE, ScopeKind.CLASS) or environment


class Metabuilder(ObjectValue):
    type_name = "Metabuilder"
    selectors: ClassVar[Dict[str, str]] = {}

    def __init__(self, factory_name: str, modifiers: List[str], position: SourcePosition = EMPTY_POSITION):
        self.factory_name = intern_symbol(factory_name)
        self.modifiers = list(modifiers)
        self.position = position
        self.name: Optional[Symbol] = None
        self.finished = False
        self.logger = logging.getLogger("SysmelKernel")

    @property
    def visibility(self) -> str:
        return "private" if "private" in self.modifiers else "public"

    def check_open(self, position: SourcePosition):
        if self.finished:
            raise _builder_error(f"the {self.factory_name.text} builder has already finished", position)

    def analyze_message_send(self, analyzer, node: MessageSendNode, context: AnalysisContext) -> AstNode:
        self.check_open(node.position)
        selector = analyzer.selector_of(node, context).text
        handler = self.selectors.get(selector)
        if handler is not None:
            result = getattr(self, handler)(analyzer, node, context)
        elif not node.arguments and self.name is None and selector.isidentifier():
            self.name = intern_symbol(selector)
            result = None
        else:
            raise _builder_error(f"the {self.factory_name.text} builder does not understand #{selector}",
                                 node.position)
        return result if result is not None else analyzer.literal(self, node.position)

    def analyze_application(self, analyzer, node, context: AnalysisContext) -> AstNode:
        self.check_open(node.position)
        raise _builder_error(f"the {self.factory_name.text} builder cannot be applied", node.position)

    def finish(self, analyzer, context: AnalysisContext, position: SourcePosition) -> AstNode:
        self.check_open(position)
        self.finished = True
        try:
            result = self.build(analyzer, context, position)
        except SysmelError as error:
            if error.position is None:
                error.position = position
            raise
        self.logger.debug(f"Finished {self.factory_name.text} builder for {self.name}")
        return result

    def build(self, analyzer, context: AnalysisContext, position: SourcePosition) -> AstNode:
        raise NotImplementedError

    def require_name(self, position: SourcePosition) -> Symbol:
        if self.name is None:
            raise _builder_error(f"the {self.factory_name.text} builder needs a name", position)
        return self.name

    def apply_flags(self, definition: FunctionDefinition, position: SourcePosition):
        for modifier in self.modifiers:
            flag = FLAG_MODIFIERS.get(modifier)
            if flag is None:
                continue
            try:
                definition.add_flag(flag)
            except ValueError as error:
                raise _builder_error(str(error), position) from None

    def describe(self) -> str:
        return f"a {type(self).__name__}"


class MetabuilderFactory(ObjectValue):
    """Bound in the environment under a builder's name; every use starts a fresh builder"""
    type_name = "MetabuilderFactory"

    def __init__(self, name: str, builder_class, modifiers: Tuple[str, ...] = ()):
        self.name = name
        self.builder_class = builder_class
        self.modifiers = tuple(modifiers)

    def new_builder(self, position: SourcePosition) -> Metabuilder:
        return self.builder_class(self.name, list(self.modifiers), position)

    def analyze_message_send(self, analyzer, node, context):
        return self.new_builder(node.position).analyze_message_send(analyzer, node, context)

    def analyze_application(self, analyzer, node, context):
        return self.new_builder(node.position).analyze_application(analyzer, node, context)

    def describe(self) -> str:
        return f"the {self.name} metabuilder"


class ModifierBuilder(Metabuilder):
    """Collects modifiers such as public or pure, then hands them to the definition builder that follows"""
    type_name = "ModifierBuilder"

    def analyze_message_send(self, analyzer, node, context):
        self.check_open(node.position)
        selector = analyzer.selector_of(node, context).text
        if node.arguments:
            raise _builder_error(f"#{selector} cannot follow the modifiers {' '.join(self.modifiers)}",
                                 node.position)
        if selector in MODIFIERS:
            self.modifiers.append(selector)
            return analyzer.literal(self, node.position)
        builder_class = DEFINITION_BUILDERS.get(selector)
        if builder_class is None:
            raise _builder_error(f"unknown modifier or definition kind '{selector}'", node.position)
        self.finished = True
        return analyzer.literal(builder_class(selector, self.modifiers, node.position), node.position)

    def build(self, analyzer, context, position):
        raise _builder_error(f"the modifiers {' '.join(self.modifiers)} are not followed by a definition", position)


class LetBuilder(Metabuilder):
    type_name = "LetBuilder"
    selectors = {"type:": "set_type", "mutable": "set_mutable", ":=": "assign"}

    def __init__(self, factory_name, modifiers, position=EMPTY_POSITION):
        super().__init__(factory_name, modifiers, position)
        self.type_node: Optional[AstNode] = None
        self.mutable = False
        self.initializer: Optional[AstNode] = None

    def set_type(self, analyzer, node, context):
        self.type_node = node.arguments[0]

    def set_mutable(self, analyzer, node, context):
        self.mutable = True

    def assign(self, analyzer, node, context):
        self.initializer = node.arguments[0]
        return self.finish(analyzer, context, node.position)

    def build(self, analyzer, context, position):
        name = self.require_name(position)
        if self.initializer is None:
            raise _builder_error(f"let {name.text} needs an initial value", position)
        value_type = analyzer.evaluate_type(self.type_node, context) if self.type_node is not None else None
        return analyzer.define_variable(name, value_type, self.mutable, self.initializer, context, position)


class FunctionBuilder(Metabuilder):
    type_name = "FunctionBuilder"
    selectors = {"=>": "set_result", ":=": "assign"}

    def __init__(self, factory_name, modifiers, position=EMPTY_POSITION):
        super().__init__(factory_name, modifiers, position)
        self.argument_nodes: Optional[List[AstNode]] = None
        self.result_node: Optional[AstNode] = None
        self.body: Optional[AstNode] = None

    def analyze_application(self, analyzer, node, context):
        self.check_open(node.position)
        if self.name is None or self.argument_nodes is not None:
            raise _builder_error("a function argument list must follow the function name", node.position)
        self.argument_nodes = list(node.arguments)
        return analyzer.literal(self, node.position)

    def set_result(self, analyzer, node, context):
        self.result_node = node.arguments[0]

    def assign(self, analyzer, node, context):
        self.body = node.arguments[0]
        return self.finish(analyzer, context, node.position)

    def build(self, analyzer, context, position):
        name = self.require_name(position)
        if self.body is None:
            raise _builder_error(f"function {name.text} needs a body", position)
        definition = FunctionDefinition(name=name, position=self.position)
        self.apply_flags(definition, position)
        scope = definition_environment(context.environment)
        environment = Environment(scope, ScopeKind.FUNCTION, definition)
        for argument_node in self.argument_nodes or []:
            argument_name, type_node = parse_argument_spec(argument_node)
            argument_type = (analyzer.evaluate_type(type_node, context) if type_node is not None
                             else builtin_type("Dynamic"))
            local = definition.new_local(argument_name, argument_type, is_argument=True)
            definition.arguments.append(local)
            environment.define(argument_name, value_type=argument_type, local=local)
        if self.result_node is not None:
            definition.result_type = analyzer.evaluate_type(self.result_node, context)

        scope.define(name, definition)
        entity = FunctionEntity(name, definition, self.visibility)
        definition.entity = entity
        owner = scope.owner
        if hasattr(owner, "add_member"):
            owner.add_member(name, entity)
        schedule_body(analyzer, definition, self.body, environment)
        self.logger.info(f"Defined function {name.text}/{definition.argument_count}")
        return analyzer.literal(definition, position)


def schedule_body(analyzer, definition: FunctionDefinition, body: AstNode, environment: Environment):
    """Analyze now when the result type must be inferred, otherwise on first use"""
    if definition.result_type is None or FunctionFlag.EAGER in definition.flags:
        analyzer.analyze_function_body(definition, body, environment)
    else:
        definition.pending_analysis = lambda: analyzer.analyze_function_body(definition, body, environment)


class ClassBuilder(Metabuilder):
    type_name = "ClassBuilder"
    selectors = {"superclass:": "set_superclass", "definition:": "set_definition"}

    def __init__(self, factory_name, modifiers, position=EMPTY_POSITION):
        super().__init__(factory_name, modifiers, position)
        self.superclass_node: Optional[AstNode] = None
        self.definition_node: Optional[AstNode] = None

    def set_superclass(self, analyzer, node, context):
        self.superclass_node = node.arguments[0]

    def set_definition(self, analyzer, node, context):
        if not isinstance(node.arguments[0], SequenceNode):
            raise _builder_error("a class definition must be a block", node.arguments[0].position)
        self.definition_node = node.arguments[0]

    def build(self, analyzer, context, position):
        name = self.require_name(position)
        object_type = builtin_type("Object")
        supertype = (analyzer.evaluate_type(self.superclass_node, context) if self.superclass_node is not None
                     else object_type)
        if supertype.kind != TypeKind.SLOT_CLASS or supertype.final:
            raise SemanticError(f"{supertype} cannot be subclassed", position, "type-mismatch")
        class_type = TypeObject(name.text, TypeKind.SLOT_CLASS, supertype, final="final" in self.modifiers)
        entity = ClassEntity(name, class_type, self.visibility)
        class_type.entity = entity

        scope = definition_environment(context.environment)
        scope.define(name, class_type)
        owner = scope.owner
        if hasattr(owner, "add_member"):
            owner.add_member(name, entity)

        class_environment = Environment(scope, ScopeKind.CLASS, entity)
        for index, (field_name, field_type) in enumerate(class_type.fields):
            class_environment.define(field_name, value_type=field_type, field_index=index)
        if self.definition_node is not None:
            class_context = AnalysisContext(class_environment, analyzer, context.current_function)
            analyzer.analyze_statements(self.definition_node.expressions, class_context)
        self.logger.info(f"Defined class {name.text} with {class_type.slot_count} slots")
        return analyzer.literal(class_type, position)


def enclosing_class(context: AnalysisContext, what: str, position: SourcePosition) -> Tuple[Environment, ClassEntity]:
    environment = context.environment
    if environment.scope_kind != ScopeKind.CLASS or not isinstance(environment.owner, ClassEntity):
        raise _builder_error(f"{what} outside of a class definition", position)
    return environment, environment.owner


def install_method(entity: ClassEntity, selector: Symbol, definition: FunctionDefinition, visibility: str,
                   position: SourcePosition):
    class_type = entity.class_type
    if class_type.defines_selector(selector):
        raise SemanticError(f"duplicate method #{selector.text} in {class_type}", position, "duplicate-definition")
    dispatch = DispatchKind.STATIC if class_type.final else DispatchKind.DYNAMIC
    class_type.add_method(MethodEntry(selector, definition, is_macro=definition.is_macro, dispatch=dispatch,
                                      pure=definition.is_pure))
    method_entity = FunctionEntity(selector, definition, visibility)
    definition.entity = method_entity
    entity.methods[selector] = method_entity


class FieldBuilder(Metabuilder):
    type_name = "FieldBuilder"
    selectors = {"=>": "set_type"}

    def __init__(self, factory_name, modifiers, position=EMPTY_POSITION):
        super().__init__(factory_name, modifiers, position)
        self.type_node: Optional[AstNode] = None

    def set_type(self, analyzer, node, context):
        self.type_node = node.arguments[0]

    def build(self, analyzer, context, position):
        name = self.require_name(position)
        environment, entity = enclosing_class(context, "a field", position)
        class_type = entity.class_type
        field_type = (analyzer.evaluate_type(self.type_node, context) if self.type_node is not None
                      else builtin_type("Dynamic"))
        index = class_type.add_field(name.text, field_type)
        field_entity = FieldEntity(name, field_type, index, self.visibility)
        entity.fields.append(field_entity)
        environment.define(name, value_type=field_type, field_index=index)

        getter = FunctionDefinition(name=name, result_type=field_type, position=position)
        receiver = getter.new_local(intern_symbol("self"), class_type, is_argument=True)
        getter.arguments.append(receiver)
        getter.body_node = analyzer.typed(
            SlotLoadNode(analyzer.typed(LocalVariableNode(receiver, position=position), class_type), index,
                         position=position), field_type)
        install_method(entity, name, getter, self.visibility, position)

        setter_name = intern_symbol(name.text + ":")
        setter = FunctionDefinition(name=setter_name, result_type=class_type, position=position)
        receiver = setter.new_local(intern_symbol("self"), class_type, is_argument=True)
        value = setter.new_local(intern_symbol("value"), field_type, is_argument=True)
        setter.arguments.extend([receiver, value])
        receiver_node = analyzer.typed(LocalVariableNode(receiver, position=position), class_type)
        store = SlotStoreNode(receiver_node, index, analyzer.typed(LocalVariableNode(value, position=position),
                                                                   field_type), position=position)
        setter.body_node = analyzer.typed(SequenceNode([analyzer.typed(store, field_type), receiver_node],
                                                       position=position), class_type)
        install_method(entity, setter_name, setter, self.visibility, position)
        return analyzer.literal(field_entity, position)


class MethodBuilder(Metabuilder):
    type_name = "MethodBuilder"
    selectors = {"=>": "set_result", ":=": "assign"}

    def __init__(self, factory_name, modifiers, position=EMPTY_POSITION):
        super().__init__(factory_name, modifiers, position)
        self.argument_nodes: List[AstNode] = []
        self.result_node: Optional[AstNode] = None
        self.body: Optional[AstNode] = None

    def analyze_message_send(self, analyzer, node, context):
        self.check_open(node.position)
        if self.name is None:
            self.name = analyzer.selector_of(node, context)
            self.argument_nodes = list(node.arguments)
            return analyzer.literal(self, node.position)
        return super().analyze_message_send(analyzer, node, context)

    def set_result(self, analyzer, node, context):
        self.result_node = node.arguments[0]

    def assign(self, analyzer, node, context):
        self.body = node.arguments[0]
        return self.finish(analyzer, context, node.position)

    def build(self, analyzer, context, position):
        selector = self.require_name(position)
        if self.body is None:
            raise _builder_error(f"method #{selector.text} needs a body", position)
        environment, entity = enclosing_class(context, "a method", position)
        class_type = entity.class_type
        definition = FunctionDefinition(name=selector, position=self.position)
        self.apply_flags(definition, position)
        method_environment = Environment(environment, ScopeKind.FUNCTION, definition)
        receiver = definition.new_local(intern_symbol("self"), class_type, is_argument=True)
        definition.arguments.append(receiver)
        method_environment.define(receiver.name, value_type=class_type, local=receiver)
        for argument_node in self.argument_nodes:
            argument_name, type_node = parse_argument_spec(argument_node)
            argument_type = (analyzer.evaluate_type(type_node, context) if type_node is not None
                             else builtin_type("Dynamic"))
            local = definition.new_local(argument_name, argument_type, is_argument=True)
            definition.arguments.append(local)
            method_environment.define(argument_name, value_type=argument_type, local=local)
        if self.result_node is not None:
            definition.result_type = analyzer.evaluate_type(self.result_node, context)
        install_method(entity, selector, definition, self.visibility, position)
        schedule_body(analyzer, definition, self.body, method_environment)
        return analyzer.literal(definition, position)


DEFINITION_BUILDERS = {"let": LetBuilder, "function": FunctionBuilder, "class": ClassBuilder,
                       "field": FieldBuilder, "method": MethodBuilder}


def install_builder_factories(environment: Environment):
    """Bind the standard metabuilders and the modifier words in environment"""
    for name, builder_class in DEFINITION_BUILDERS.items():
        environment.define(name, MetabuilderFactory(name, builder_class))
    for modifier in MODIFIERS:
        environment.define(modifier, MetabuilderFactory(modifier, ModifierBuilder, (modifier,)))
