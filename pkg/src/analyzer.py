"""
Semantic analysis: turns parsed nodes into typed, analyzed nodes.

Every node is analyzed through its analyze_with_environment message, which
lands on an analyze_<visitor> method here. Message sends are delegated to the
static type of the receiver; function applications are analyzed in two
phases so that macros see their arguments unexpanded. Applications of pure
functions whose arguments are all literals are evaluated at compile time.
"""

import logging
from typing import Any, List, Optional, Sequence

from .data_structures import AnalysisContext, SourcePosition
from .errors import SysmelError, SemanticError, EvaluationError
from .object_model import (ObjectValue, Symbol, Environment, ScopeKind, FunctionDefinition,
                           LocalBinding, NativeFunction, Closure, MemoryHandle, intern_symbol, builtin_type)
from .type_system import (TypeObject, TypeKind, DispatchKind, make_reference_type, is_assignable)
from .runtime import make_integer, make_number, make_string, nil, void, make_array, is_number, integer_value
from .intrinsics import CONVERSIONS, intrinsic
from .metabuilders import Metabuilder, MetabuilderFactory
from .evaluator import Evaluator
from .ast_nodes import (AstNode, LiteralNode, IdentifierNode, MessageSendNode, FunctionApplicationNode,
                        CascadeNode, SequenceNode, LambdaNode, TupleNode, MakeDictionaryNode, MakeByteArrayNode,
                        LiteralArrayNode, QuoteNode, LocalVariableNode, CaptureNode, LocalDefinitionNode,
                        SlotLoadNode, SlotStoreNode, ClosureNode)
from . import quasiquote

MACRO_DEPTH_LIMIT = 32
TOPLEVEL_NAME = "__toplevel__"


def _fits(value: int, value_type: TypeObject) -> bool:
    if value_type.kind == TypeKind.PRIMITIVE_FLOAT:
        return True
    if value_type.kind != TypeKind.PRIMITIVE_INTEGER:
        return False
    if value_type.signed:
        return -(1 << (value_type.bits - 1)) <= value < (1 << (value_type.bits - 1))
    return 0 <= value < (1 << value_type.bits)


def _is_macro_value(value: Any) -> bool:
    return isinstance(value, (NativeFunction, FunctionDefinition)) and value.is_macro


class Analyzer:
    def __init__(self, session=None, evaluator: Optional[Evaluator] = None):
        self.session = session
        self.evaluator = evaluator or Evaluator()
        self.macro_depth = 0
        self.logger = logging.getLogger("SysmelKernel")

    # --- helpers ---
    @staticmethod
    def typed(node: AstNode, value_type) -> AstNode:
        node.analyzed_type = value_type
        return node

    def literal(self, value: Any, position: SourcePosition, value_type=None) -> LiteralNode:
        if value_type is None:
            value_type = value.object_type if isinstance(value, ObjectValue) else builtin_type("Dynamic")
        return self.typed(LiteralNode(value, position=position), value_type)

    def error(self, message: str, position: SourcePosition, kind: str) -> SemanticError:
        return SemanticError(message, position, kind)

    def check_assignable(self, expected, node: AstNode, what: str):
        if expected is not None and not is_assignable(expected, node.analyzed_type):
            raise self.error(f"{what} expects {expected}, got {node.analyzed_type}", node.position, "type-mismatch")

    def coerce(self, node: AstNode, expected) -> AstNode:
        """Retype an unsuffixed integer literal to the primitive type it flows into"""
        if expected is None or not expected.is_primitive or not isinstance(node, LiteralNode):
            return node
        if node.analyzed_type is not builtin_type("Integer") or not is_number(node.value):
            return node
        value = integer_value(node.value)
        if not _fits(value, expected):
            return node
        return self.literal(make_number(value, expected), node.position, expected)

    def new_thunk(self, position: SourcePosition) -> FunctionDefinition:
        return FunctionDefinition(name=intern_symbol(TOPLEVEL_NAME), position=position)

    def run_thunk(self, thunk: FunctionDefinition) -> Any:
        if self.session is not None:
            return self.session.run_thunk(thunk)
        return self.evaluator.call_function(thunk, [], [], thunk.position)

    # --- entry points ---
    def analyze(self, node: AstNode, context: AnalysisContext) -> AstNode:
        if node.analyzed_type is not None:
            return node
        method = getattr(self, "analyze_" + node.visitor_name)
        return method(node, context)

    def analyze_node(self, node: AstNode, context: AnalysisContext) -> AstNode:
        return node.analyze_with_environment(context)

    def analyze_expression(self, node: AstNode, context: AnalysisContext) -> AstNode:
        """Analyze and load through a reference, the value form of an expression"""
        return self.auto_load(self.analyze_node(node, context))

    def analyze_argument(self, node: AstNode, context: AnalysisContext, expected=None) -> AstNode:
        if expected is not None and expected.is_reference:
            analyzed = self.analyze_node(node, context.expecting(expected))
            if analyzed.analyzed_type is not None and analyzed.analyzed_type.is_reference:
                return analyzed
            return self.coerce(self.finish_builder(self.auto_load(analyzed), context), expected)
        analyzed = self.finish_builder(self.analyze_expression(node, context.expecting(expected)), context)
        return self.coerce(analyzed, expected)

    def auto_load(self, node: AstNode) -> AstNode:
        value_type = node.analyzed_type
        if value_type is None or not value_type.is_reference:
            return node
        load = self.literal(value_type.reference_load, node.position)
        return self.typed(FunctionApplicationNode(load, [node], position=node.position), value_type.base)

    def finish_builder(self, node: AstNode, context: AnalysisContext) -> AstNode:
        if isinstance(node, LiteralNode) and isinstance(node.value, Metabuilder) and not node.value.finished:
            return self.auto_load(node.value.finish(self, context, node.position))
        return node

    def literal_builder_of(self, node: AstNode, send: AstNode):
        if not isinstance(node, LiteralNode) or not isinstance(node.value, (Metabuilder, MetabuilderFactory)):
            raise self.error("a metabuilder must be used as a literal receiver", send.position, "macro-error")
        return node.value

    def analyze_and_evaluate(self, node: AstNode, context: AnalysisContext) -> Any:
        """Analyze and run top-level statements one after another"""
        if isinstance(node, SequenceNode) and context.environment.is_definition_scope:
            value = void()
            for expression in node.expressions:
                value = self.analyze_and_evaluate_statement(expression, context.environment)
            return value
        return self.analyze_and_evaluate_statement(node, context.environment)

    def analyze_and_evaluate_statement(self, expression: AstNode, environment: Environment) -> Any:
        thunk = self.new_thunk(expression.position)
        context = AnalysisContext(environment, self, thunk)
        analyzed = self.finish_builder(self.analyze_expression(expression, context), context)
        thunk.body_node = analyzed
        thunk.result_type = analyzed.analyzed_type
        if self.session is not None:
            self.session.statement_analyzed(thunk)
        self.logger.debug(f"Analyzed top-level statement at {expression.position}")
        return self.run_thunk(thunk)

    # --- literals ---
    def analyze_literal(self, node: LiteralNode, context: AnalysisContext) -> AstNode:
        value, suffix, expected = node.value, node.suffix, context.expected_type
        if isinstance(value, bool):
            raise self.error("host booleans are not literals", node.position, "type-mismatch")
        if isinstance(value, int):
            if suffix:
                value_type = builtin_type(CONVERSIONS[suffix])
                return self.literal(make_number(value, value_type), node.position, value_type)
            if expected is not None and expected.is_primitive and _fits(value, expected):
                return self.literal(make_number(value, expected), node.position, expected)
            return self.literal(make_integer(value), node.position, builtin_type("Integer"))
        if isinstance(value, float):
            if suffix:
                value_type = builtin_type(CONVERSIONS[suffix])
            elif expected is not None and expected.kind == TypeKind.PRIMITIVE_FLOAT:
                value_type = expected
            else:
                value_type = builtin_type("Float64")
            return self.literal(make_number(value, value_type), node.position, value_type)
        if isinstance(value, str):
            return self.literal(make_string(value), node.position)
        if value is None:
            return self.literal(nil(), node.position)
        if isinstance(value, ObjectValue):
            return self.literal(value, node.position)
        raise self.error(f"unsupported literal {value!r}", node.position, "type-mismatch")

    def literal_array_value(self, node: AstNode, context: AnalysisContext) -> Any:
        if isinstance(node, LiteralArrayNode):
            return make_array([self.literal_array_value(element, context) for element in node.elements])
        return self.analyze_literal(node, context.expecting(None)).value

    def analyze_literal_array(self, node: LiteralArrayNode, context: AnalysisContext) -> AstNode:
        return self.literal(self.literal_array_value(node, context), node.position)

    # --- identifiers ---
    def analyze_identifier(self, node: IdentifierNode, context: AnalysisContext) -> AstNode:
        name = node.name
        if "::" in name.strip(":"):
            return self.analyze_path_identifier(node, context)
        binding = context.environment.lookup(name)
        if binding is None:
            raise self.error(f"unbound identifier '{name}'", node.position, "unbound-identifier")
        if binding.local is not None:
            return self.local_reference(binding.local, node.position, context)
        if binding.field_index is not None:
            receiver = self.self_reference(node.position, context)
            return self.typed(SlotLoadNode(receiver, binding.field_index, position=node.position),
                              binding.value_type)
        return self.literal(binding.value, node.position, binding.value_type)

    def analyze_path_identifier(self, node: IdentifierNode, context: AnalysisContext) -> AstNode:
        first, *rest = node.name.split("::")
        binding = context.environment.lookup(first)
        if binding is None or binding.local is not None or binding.field_index is not None:
            raise self.error(f"unbound identifier '{first}'", node.position, "unbound-identifier")
        value = binding.value
        for part in rest:
            value = self.member_of(value, part, node)
        return self.literal(value, node.position)

    def member_of(self, container: Any, name: str, node: AstNode) -> Any:
        member = None
        if hasattr(container, "member"):
            member = container.member(name)
        elif isinstance(container, TypeObject):
            entry = container.lookup_type_side(name) or container.lookup_selector(name)
            member = entry.target if entry is not None else None
        if member is None:
            raise self.error(f"'{name}' is not a member of {container}", node.position, "unbound-identifier")
        return member

    def local_reference(self, local: LocalBinding, position: SourcePosition, context: AnalysisContext) -> AstNode:
        function = context.current_function
        if local.owner is function:
            return self.typed(LocalVariableNode(local, position=position), local.value_type)
        index = self.capture_index(function, local, position)
        return self.typed(CaptureNode(local, index, position=position), local.value_type)

    def capture_index(self, function: Optional[FunctionDefinition], local: LocalBinding,
                      position: SourcePosition) -> int:
        if function is None or function.parent is None:
            raise self.error(f"'{local.name.text}' is not reachable from here", position, "unbound-identifier")
        for index, existing in enumerate(function.capture_bindings):
            if existing is local:
                return index
        function.capture_bindings.append(local)
        return len(function.capture_bindings) - 1

    def self_reference(self, position: SourcePosition, context: AnalysisContext) -> AstNode:
        binding = context.environment.lookup("self")
        if binding is None or binding.local is None:
            raise self.error("fields are only accessible inside methods", position, "unbound-identifier")
        return self.local_reference(binding.local, position, context)

    # --- message sends ---
    def selector_of(self, node: AstNode, context: AnalysisContext) -> Symbol:
        selector = node.selector
        if isinstance(selector, LiteralNode) and isinstance(selector.value, Symbol):
            return selector.value
        if isinstance(selector, IdentifierNode):
            return intern_symbol(selector.name)
        analyzed = self.analyze_expression(selector, context.expecting(None))
        if isinstance(analyzed, LiteralNode) and isinstance(analyzed.value, Symbol):
            return analyzed.value
        raise self.error("a message selector must be a compile time symbol", selector.position, "type-mismatch")

    def selector_literal(self, symbol: Symbol, position: SourcePosition) -> LiteralNode:
        return self.literal(symbol, position)

    def analyze_message_send(self, node: MessageSendNode, context: AnalysisContext) -> AstNode:
        symbol = self.selector_of(node, context)
        if not isinstance(node.selector, LiteralNode) or node.selector.value is not symbol:
            node = MessageSendNode(node.receiver, LiteralNode(symbol, position=node.selector.position),
                                   node.arguments, position=node.position)
        if node.receiver is None:
            return self.analyze_receiverless_send(node, symbol, context)
        receiver_context = context.expecting(None)
        if symbol.text == ":=" and isinstance(node.receiver, IdentifierNode):
            binding = context.environment.lookup(node.receiver.name)
            if binding is not None and binding.field_index is not None:
                return self.analyze_field_store(node, binding, context)
        if symbol.text in (":=", "address"):
            receiver = self.analyze_node(node.receiver, receiver_context)
        else:
            receiver = self.analyze_expression(node.receiver, receiver_context)
        receiver_type = receiver.analyzed_type
        if symbol.text == ":=" and not receiver_type.is_reference and not receiver_type.is_dynamic and \
                receiver_type.kind != TypeKind.METABUILDER:
            raise self.error(f"cannot assign to an immutable {receiver_type} value", node.position, "type-mismatch")
        return receiver_type.analyze_message_send(self, node, receiver, context)

    def analyze_field_store(self, node: MessageSendNode, binding, context: AnalysisContext) -> AstNode:
        receiver = self.self_reference(node.receiver.position, context)
        value = self.analyze_argument(node.arguments[0], context, binding.value_type)
        self.check_assignable(binding.value_type, value, f"field {binding.name.text}")
        return self.typed(SlotStoreNode(receiver, binding.field_index, value, position=node.position),
                          binding.value_type)

    def analyze_receiverless_send(self, node: MessageSendNode, symbol: Symbol, context: AnalysisContext) -> AstNode:
        binding = context.environment.lookup(symbol)
        if binding is None or binding.local is not None or binding.field_index is not None:
            raise self.error(f"unbound selector #{symbol.text}", node.position, "unbound-identifier")
        if _is_macro_value(binding.value):
            return self.expand_macro(binding.value, node, None, node.arguments, context)
        functional = self.literal(binding.value, node.selector.position, binding.value_type)
        application = FunctionApplicationNode(functional, node.arguments, position=node.position)
        return functional.analyzed_type.analyze_application(self, application, functional, context)

    def expand_macro(self, macro: Any, node: AstNode, receiver: Optional[AstNode], arguments: Sequence[AstNode],
                     context: AnalysisContext) -> AstNode:
        self.macro_depth += 1
        try:
            if self.macro_depth > MACRO_DEPTH_LIMIT:
                raise self.error("macro expansion is nested too deeply", node.position, "macro-error")
            if isinstance(macro, NativeFunction):
                expansion = macro.implementation(self, node, receiver, list(arguments), context)
            else:
                values = ([receiver] if receiver is not None else []) + list(arguments)
                try:
                    expansion = self.evaluator.apply(macro, values, node.position)
                except EvaluationError as error:
                    raise self.error(f"macro {macro.display_name} failed: {error.message}", node.position,
                                     "macro-error") from error
            if not isinstance(expansion, AstNode):
                expansion = self.literal(expansion, node.position)
            self.logger.debug(f"Expanded macro {macro.display_name} at {node.position}")
            return self.analyze_expression(expansion, context)
        except RecursionError:
            raise self.error(f"macro {macro.display_name} expands without end", node.position, "macro-error") from None
        finally:
            self.macro_depth -= 1

    def coerce_integer_receiver(self, receiver: AstNode, node: MessageSendNode, context: AnalysisContext):
        """An unsuffixed literal receiver adopts the primitive type of the single argument"""
        if len(node.arguments) != 1 or not isinstance(receiver, LiteralNode) or \
                receiver.analyzed_type is not builtin_type("Integer"):
            return receiver, node
        argument = self.analyze_expression(node.arguments[0], context.expecting(None))
        node = MessageSendNode(node.receiver, node.selector, [argument], position=node.position)
        if argument.analyzed_type is not None and argument.analyzed_type.is_primitive:
            return self.coerce(receiver, argument.analyzed_type), node
        return receiver, node

    def analyze_standard_message_send(self, node: MessageSendNode, receiver: AstNode,
                                      context: AnalysisContext) -> AstNode:
        symbol = self.selector_of(node, context)
        receiver, node = self.coerce_integer_receiver(receiver, node, context)
        receiver_type = receiver.analyzed_type
        entry = None
        if isinstance(receiver, LiteralNode) and isinstance(receiver.value, TypeObject):
            entry = receiver.value.lookup_type_side(symbol)
        if entry is None:
            entry = receiver_type.lookup_selector(symbol)
        if entry is None:
            if receiver_type.is_dynamic:
                arguments = [self.analyze_argument(argument, context) for argument in node.arguments]
                send = MessageSendNode(receiver, self.selector_literal(symbol, node.selector.position), arguments,
                                       position=node.position)
                return self.typed(send, builtin_type("Dynamic"))
            raise self.error(f"{receiver_type} does not understand #{symbol.text}", node.position, "no-such-method")
        if entry.is_macro:
            return self.expand_macro(entry.target, node, receiver, node.arguments, context)
        if entry.dispatch == DispatchKind.STATIC:
            functional = self.literal(entry.target, node.selector.position)
            application = FunctionApplicationNode(functional, [receiver, *node.arguments], position=node.position)
            return self.analyze_standard_application(application, functional, context)

        argument_types, result_type = self.signature_of(entry.target)
        expected_types = argument_types[1:] if argument_types is not None else [None] * len(node.arguments)
        if len(expected_types) != len(node.arguments):
            raise self.error(f"#{symbol.text} expects {len(expected_types)} arguments, got {len(node.arguments)}",
                             node.position, "arity-mismatch")
        arguments = []
        for argument, expected in zip(node.arguments, expected_types):
            analyzed = self.analyze_argument(argument, context, expected)
            self.check_assignable(expected, analyzed, f"#{symbol.text}")
            arguments.append(analyzed)
        send = MessageSendNode(receiver, self.selector_literal(symbol, node.selector.position), arguments,
                               position=node.position)
        return self.typed(send, result_type)

    # --- function application ---
    @staticmethod
    def signature_of(callee: Any):
        """(argument types or None when variadic, result type) of an applicable value"""
        dynamic = builtin_type("Dynamic")
        if isinstance(callee, Closure):
            callee = callee.definition
        if isinstance(callee, NativeFunction):
            arguments = None if callee.variadic else list(callee.argument_types)
            return arguments, callee.result_type or dynamic
        if isinstance(callee, FunctionDefinition):
            return [local.value_type for local in callee.arguments], callee.result_type or dynamic
        if isinstance(callee, TypeObject) and callee.kind == TypeKind.FUNCTION:
            return list(callee.argument_types), callee.result_type or dynamic
        return None, dynamic

    def analyze_application(self, node: FunctionApplicationNode, context: AnalysisContext) -> AstNode:
        functional = self.analyze_expression(node.functional, context.expecting(None))
        if isinstance(functional, LiteralNode) and _is_macro_value(functional.value):
            return self.expand_macro(functional.value, node, None, node.arguments, context)
        return functional.analyzed_type.analyze_application(self, node, functional, context)

    def analyze_standard_application(self, node: FunctionApplicationNode, functional: AstNode,
                                     context: AnalysisContext) -> AstNode:
        functional_type = functional.analyzed_type
        callee = functional.value if isinstance(functional, LiteralNode) else None
        if isinstance(callee, (NativeFunction, FunctionDefinition, Closure)):
            argument_types, result_type = self.signature_of(callee)
        elif functional_type.kind == TypeKind.FUNCTION:
            argument_types, result_type = self.signature_of(functional_type)
        elif functional_type.is_dynamic:
            argument_types, result_type = None, builtin_type("Dynamic")
        else:
            entry = functional_type.lookup_selector("applyWithArguments:")
            if entry is None:
                raise self.error(f"a {functional_type} value cannot be applied", node.position, "type-mismatch")
            send = MessageSendNode(functional, LiteralNode(intern_symbol("applyWithArguments:")),
                                   [TupleNode(list(node.arguments), position=node.position)], position=node.position)
            return self.analyze_standard_message_send(send, functional, context)

        if argument_types is not None and len(argument_types) != len(node.arguments):
            name = getattr(callee, "display_name", str(functional_type))
            raise self.error(f"{name} expects {len(argument_types)} arguments, got {len(node.arguments)}",
                             node.position, "arity-mismatch")
        expected_types = argument_types if argument_types is not None else [None] * len(node.arguments)
        arguments = []
        for index, (argument, expected) in enumerate(zip(node.arguments, expected_types)):
            analyzed = self.analyze_argument(argument, context, expected)
            self.check_assignable(expected, analyzed, f"argument {index + 1}")
            arguments.append(analyzed)
        application = FunctionApplicationNode(functional, arguments, position=node.position)
        return self.fold_application(self.typed(application, result_type))

    def fold_application(self, application: FunctionApplicationNode) -> AstNode:
        """Evaluate a pure application with literal arguments at compile time"""
        functional = application.functional
        if not isinstance(functional, LiteralNode):
            return application
        callee = functional.value
        if not isinstance(callee, (NativeFunction, FunctionDefinition)) or not callee.is_pure:
            return application
        if not all(isinstance(argument, LiteralNode) for argument in application.arguments):
            return application
        try:
            value = self.evaluator.apply(callee, [argument.value for argument in application.arguments],
                                         application.position)
        except EvaluationError as error:
            self.logger.warning(f"Keeping {callee.display_name} at {application.position} unfolded: {error.message}")
            return application
        except SysmelError as error:
            if error.position is None:
                error.position = application.position
            raise
        value_type = application.analyzed_type
        if value_type is None or value_type.is_dynamic or value_type.name == "Any":
            value_type = None
        return self.literal(value, application.position, value_type)

    # --- blocks and lambdas ---
    def analyze_statements(self, expressions: Sequence[AstNode], context: AnalysisContext) -> List[AstNode]:
        analyzed: List[AstNode] = []
        for index, expression in enumerate(expressions):
            last = index == len(expressions) - 1
            statement_context = context if last else context.expecting(None)
            statement = self.finish_builder(self.analyze_expression(expression, statement_context),
                                            statement_context)
            if last:
                statement = self.coerce(statement, context.expected_type)
            analyzed.append(statement)
        return analyzed

    def sequence_of(self, statements: List[AstNode], position: SourcePosition) -> AstNode:
        if not statements:
            return self.literal(void(), position)
        if len(statements) == 1:
            return statements[0]
        return self.typed(SequenceNode(statements, position=position), statements[-1].analyzed_type)

    def analyze_sequence(self, node: SequenceNode, context: AnalysisContext) -> AstNode:
        block_context = context.with_environment(Environment(context.environment, ScopeKind.BLOCK))
        return self.sequence_of(self.analyze_statements(node.expressions, block_context), node.position)

    def evaluate_type(self, type_node: AstNode, context: AnalysisContext) -> TypeObject:
        analyzed = self.analyze_expression(type_node, context.expecting(None))
        if isinstance(analyzed, LiteralNode) and isinstance(analyzed.value, TypeObject):
            return analyzed.value
        raise self.error("expected a type known at compile time", type_node.position, "type-mismatch")

    def analyze_function_body(self, definition: FunctionDefinition, body: AstNode, environment: Environment):
        context = AnalysisContext(environment, self, definition, definition.result_type)
        expressions = body.expressions if isinstance(body, SequenceNode) else [body]
        statements = self.analyze_statements(expressions, context)
        result_type = definition.result_type
        if result_type is builtin_type("Void"):
            statements.append(self.literal(void(), body.position))
        analyzed = self.sequence_of(statements, body.position)
        self.check_assignable(result_type, analyzed, f"the result of {definition.display_name}")
        if result_type is None:
            definition.result_type = analyzed.analyzed_type
        definition.body_node = analyzed
        self.logger.debug(f"Analyzed body of {definition.display_name}")

    def analyze_lambda(self, node: LambdaNode, context: AnalysisContext) -> AstNode:
        definition = FunctionDefinition(position=node.position, parent=context.current_function)
        environment = Environment(context.environment, ScopeKind.FUNCTION, definition)
        for argument in node.arguments:
            argument_type = (self.evaluate_type(argument.type_node, context) if argument.type_node is not None
                             else builtin_type("Dynamic"))
            local = definition.new_local(intern_symbol(argument.name), argument_type, is_argument=True)
            definition.arguments.append(local)
            environment.define(local.name, value_type=argument_type, local=local)
        if node.result_type_node is not None:
            definition.result_type = self.evaluate_type(node.result_type_node, context)
        self.analyze_function_body(definition, node.body, environment)
        if not definition.capture_bindings:
            return self.literal(definition, node.position)
        captures = [self.local_reference(local, node.position, context) for local in definition.capture_bindings]
        return self.typed(ClosureNode(definition, captures, position=node.position), definition.object_type)

    # --- cascades ---
    def analyze_cascade(self, node: CascadeNode, context: AnalysisContext) -> AstNode:
        receiver = self.analyze_expression(node.receiver, context.expecting(None))
        statements: List[AstNode] = []
        if isinstance(receiver, LiteralNode):
            target = receiver
        else:
            local = context.current_function.new_local(intern_symbol("cascade receiver"), receiver.analyzed_type)
            statements.append(self.typed(LocalDefinitionNode(local, receiver, position=receiver.position),
                                         receiver.analyzed_type))
            target = self.typed(LocalVariableNode(local, position=receiver.position), receiver.analyzed_type)
        results = []
        for index, message in enumerate(node.messages):
            send = MessageSendNode(target, message.selector, message.arguments, position=message.position)
            last = index == len(node.messages) - 1
            result = self.analyze_expression(send, context if last else context.expecting(None))
            if last or not isinstance(result, LiteralNode):
                results.append(result)
        return self.sequence_of(statements + results, node.position)

    # --- collections ---
    def make_with_intrinsic(self, intrinsic_id: str, arguments: List[AstNode], position: SourcePosition,
                            value_type) -> AstNode:
        functional = self.literal(intrinsic(intrinsic_id), position)
        application = self.typed(FunctionApplicationNode(functional, arguments, position=position), value_type)
        return self.fold_application(application)

    def analyze_tuple(self, node: TupleNode, context: AnalysisContext) -> AstNode:
        elements = [self.analyze_argument(element, context) for element in node.elements]
        return self.make_with_intrinsic("tuple.make", elements, node.position, builtin_type("Tuple"))

    def analyze_make_dictionary(self, node: MakeDictionaryNode, context: AnalysisContext) -> AstNode:
        arguments = []
        for pair in node.pairs:
            arguments.append(self.analyze_argument(pair.key, context))
            arguments.append(self.analyze_argument(pair.value, context))
        return self.make_with_intrinsic("dictionary.make", arguments, node.position, builtin_type("Dictionary"))

    def analyze_make_byte_array(self, node: MakeByteArrayNode, context: AnalysisContext) -> AstNode:
        byte_type = builtin_type("UInt8")
        elements = []
        for element in node.elements:
            analyzed = self.analyze_argument(element, context, byte_type)
            self.check_assignable(byte_type, analyzed, "a byte array element")
            elements.append(analyzed)
        return self.make_with_intrinsic("bytearray.make", elements, node.position, builtin_type("ByteArray"))

    # --- quotation ---
    def analyze_quote(self, node: QuoteNode, context: AnalysisContext) -> AstNode:
        return self.literal(node.inner, node.position)

    def analyze_quasi_quote(self, node, context: AnalysisContext) -> AstNode:
        return quasiquote.expand_quasi_quote(self, node, context)

    def analyze_quasi_unquote(self, node, context: AnalysisContext) -> AstNode:
        raise self.error("unquote outside of a quasi-quote", node.position, "macro-error")

    def analyze_splice(self, node, context: AnalysisContext) -> AstNode:
        raise self.error("splice outside of a quasi-quote", node.position, "macro-error")

    def analyze_lambda_argument(self, node, context: AnalysisContext) -> AstNode:
        raise self.error("a lambda argument outside of a lambda", node.position, "type-mismatch")

    def analyze_cascade_message(self, node, context: AnalysisContext) -> AstNode:
        raise self.error("a cascaded message outside of a cascade", node.position, "type-mismatch")

    def analyze_dictionary_pair(self, node, context: AnalysisContext) -> AstNode:
        raise self.error("a dictionary pair outside of a dictionary", node.position, "type-mismatch")

    # --- variables ---
    def define_variable(self, name: Symbol, value_type: Optional[TypeObject], mutable: bool,
                        initializer: AstNode, context: AnalysisContext, position: SourcePosition) -> AstNode:
        """Bind name globally in a definition scope, or as a local of the function being analyzed"""
        environment = context.environment
        if environment.scope_kind == ScopeKind.CLASS:
            raise self.error(f"'{name.text}' must be declared as a field inside a class", position, "type-mismatch")
        if environment.is_definition_scope:
            thunk = self.new_thunk(position)
            thunk_context = AnalysisContext(environment, self, thunk)
            analyzed = self.analyze_argument(initializer, thunk_context, value_type)
            self.check_assignable(value_type, analyzed, f"'{name.text}'")
            variable_type = value_type or analyzed.analyzed_type
            thunk.body_node = analyzed
            thunk.result_type = variable_type
            value = self.run_thunk(thunk)
            if mutable:
                value = MemoryHandle.new_cell(value)
                variable_type = make_reference_type(variable_type)
            environment.define(name, value, variable_type, mutable)
            owner = environment.owner
            if hasattr(owner, "add_member"):
                owner.add_member(name, value)
            self.logger.info(f"Defined global {name.text} : {variable_type}")
            return self.literal(value, position, variable_type)

        analyzed = self.analyze_argument(initializer, context, value_type)
        self.check_assignable(value_type, analyzed, f"'{name.text}'")
        variable_type = value_type or analyzed.analyzed_type
        stored_type = make_reference_type(variable_type) if mutable else variable_type
        local = context.current_function.new_local(name, stored_type, mutable)
        environment.define(name, value_type=stored_type, mutable=mutable, local=local)
        return self.typed(LocalDefinitionNode(local, analyzed, position=position), stored_type)
