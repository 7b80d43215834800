"""
AST node classes. Nodes are first-class values: quoting yields them, macros
receive and return them. Each node answers the five meta-object protocol
messages by dispatching to a visitor method named after its visitor_name.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Iterator, List, Optional, Tuple

from .data_structures import SourcePosition, EMPTY_POSITION
from .object_model import ObjectValue, LocalBinding, FunctionDefinition


@dataclass(eq=False)
class AstNode(ObjectValue):
    position: SourcePosition = field(default=EMPTY_POSITION, kw_only=True)
    analyzed_type: Any = field(default=None, kw_only=True)

    type_name: ClassVar[str] = "ASTNode"
    visitor_name: ClassVar[str] = "node"
    child_fields: ClassVar[Tuple[str, ...]] = ()

    @property
    def is_analyzed(self) -> bool:
        return self.analyzed_type is not None

    @property
    def size(self) -> int:
        return len(self.child_fields)

    def children(self) -> Iterator["AstNode"]:
        for name in self.child_fields:
            value = getattr(self, name)
            if isinstance(value, list):
                yield from (child for child in value if isinstance(child, AstNode))
            elif isinstance(value, AstNode):
                yield value

    # --- meta-object protocol ---
    def analyze_and_evaluate_with_environment(self, context):
        return context.analyzer.analyze_and_evaluate(self, context)

    def analyze_with_environment(self, context):
        return context.analyzer.analyze(self, context)

    def evaluate_with_environment(self, evaluator, activation):
        return getattr(evaluator, "evaluate_" + self.visitor_name)(self, activation)

    def compile_bytecodes_directly_with(self, compiler):
        return getattr(compiler, "compile_" + self.visitor_name)(self)

    def generate_ssa_value_with(self, builder):
        return getattr(builder, "generate_" + self.visitor_name)(self)


# --- parsed nodes ---
@dataclass(eq=False)
class LiteralNode(AstNode):
    value: Any = None
    suffix: Optional[str] = None
    type_name: ClassVar[str] = "ASTLiteralNode"
    visitor_name: ClassVar[str] = "literal"


@dataclass(eq=False)
class IdentifierNode(AstNode):
    name: str = ""
    type_name: ClassVar[str] = "ASTIdentifierNode"
    visitor_name: ClassVar[str] = "identifier"


@dataclass(eq=False)
class MessageSendNode(AstNode):
    receiver: Optional[AstNode] = None
    selector: Optional[AstNode] = None
    arguments: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTMessageSendNode"
    visitor_name: ClassVar[str] = "message_send"
    child_fields: ClassVar[Tuple[str, ...]] = ("receiver", "selector", "arguments")

    @property
    def selector_text(self) -> Optional[str]:
        """The literal selector text, or None for computed selectors"""
        if isinstance(self.selector, LiteralNode):
            return getattr(self.selector.value, "text", None)
        return None


@dataclass(eq=False)
class FunctionApplicationNode(AstNode):
    functional: Optional[AstNode] = None
    arguments: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTFunctionApplicationNode"
    visitor_name: ClassVar[str] = "application"
    child_fields: ClassVar[Tuple[str, ...]] = ("functional", "arguments")


@dataclass(eq=False)
class CascadeMessageNode(AstNode):
    selector: Optional[AstNode] = None
    arguments: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTCascadeMessageNode"
    visitor_name: ClassVar[str] = "cascade_message"
    child_fields: ClassVar[Tuple[str, ...]] = ("selector", "arguments")


@dataclass(eq=False)
class CascadeNode(AstNode):
    receiver: Optional[AstNode] = None
    messages: List[CascadeMessageNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTCascadeNode"
    visitor_name: ClassVar[str] = "cascade"
    child_fields: ClassVar[Tuple[str, ...]] = ("receiver", "messages")


@dataclass(eq=False)
class SequenceNode(AstNode):
    expressions: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTSequenceNode"
    visitor_name: ClassVar[str] = "sequence"
    child_fields: ClassVar[Tuple[str, ...]] = ("expressions",)


@dataclass(eq=False)
class LambdaArgumentNode(AstNode):
    name: str = ""
    type_node: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTLambdaArgumentNode"
    visitor_name: ClassVar[str] = "lambda_argument"
    child_fields: ClassVar[Tuple[str, ...]] = ("type_node",)


@dataclass(eq=False)
class LambdaNode(AstNode):
    arguments: List[LambdaArgumentNode] = field(default_factory=list)
    result_type_node: Optional[AstNode] = None
    body: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTLambdaNode"
    visitor_name: ClassVar[str] = "lambda"
    child_fields: ClassVar[Tuple[str, ...]] = ("arguments", "result_type_node", "body")


@dataclass(eq=False)
class TupleNode(AstNode):
    elements: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTTupleNode"
    visitor_name: ClassVar[str] = "tuple"
    child_fields: ClassVar[Tuple[str, ...]] = ("elements",)


@dataclass(eq=False)
class DictionaryPairNode(AstNode):
    key: Optional[AstNode] = None
    value: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTDictionaryPairNode"
    visitor_name: ClassVar[str] = "dictionary_pair"
    child_fields: ClassVar[Tuple[str, ...]] = ("key", "value")


@dataclass(eq=False)
class MakeDictionaryNode(AstNode):
    pairs: List[DictionaryPairNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTMakeDictionaryNode"
    visitor_name: ClassVar[str] = "make_dictionary"
    child_fields: ClassVar[Tuple[str, ...]] = ("pairs",)


@dataclass(eq=False)
class MakeByteArrayNode(AstNode):
    elements: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTMakeByteArrayNode"
    visitor_name: ClassVar[str] = "make_byte_array"
    child_fields: ClassVar[Tuple[str, ...]] = ("elements",)


@dataclass(eq=False)
class LiteralArrayNode(AstNode):
    elements: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTLiteralArrayNode"
    visitor_name: ClassVar[str] = "literal_array"
    child_fields: ClassVar[Tuple[str, ...]] = ("elements",)


@dataclass(eq=False)
class QuoteNode(AstNode):
    inner: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTQuoteNode"
    visitor_name: ClassVar[str] = "quote"
    child_fields: ClassVar[Tuple[str, ...]] = ("inner",)


@dataclass(eq=False)
class QuasiQuoteNode(AstNode):
    inner: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTQuasiQuoteNode"
    visitor_name: ClassVar[str] = "quasi_quote"
    child_fields: ClassVar[Tuple[str, ...]] = ("inner",)


@dataclass(eq=False)
class QuasiUnquoteNode(AstNode):
    inner: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTQuasiUnquoteNode"
    visitor_name: ClassVar[str] = "quasi_unquote"
    child_fields: ClassVar[Tuple[str, ...]] = ("inner",)


@dataclass(eq=False)
class SpliceNode(AstNode):
    inner: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTSpliceNode"
    visitor_name: ClassVar[str] = "splice"
    child_fields: ClassVar[Tuple[str, ...]] = ("inner",)


# --- nodes produced only by analysis ---
@dataclass(eq=False)
class LocalVariableNode(AstNode):
    binding: Optional[LocalBinding] = None
    type_name: ClassVar[str] = "ASTLocalVariableNode"
    visitor_name: ClassVar[str] = "local_variable"


@dataclass(eq=False)
class CaptureNode(AstNode):
    binding: Optional[LocalBinding] = None
    index: int = 0
    type_name: ClassVar[str] = "ASTCaptureNode"
    visitor_name: ClassVar[str] = "capture"


@dataclass(eq=False)
class LocalDefinitionNode(AstNode):
    binding: Optional[LocalBinding] = None
    initializer: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTLocalDefinitionNode"
    visitor_name: ClassVar[str] = "local_definition"
    child_fields: ClassVar[Tuple[str, ...]] = ("initializer",)


@dataclass(eq=False)
class SlotLoadNode(AstNode):
    receiver: Optional[AstNode] = None
    slot_index: int = 0
    type_name: ClassVar[str] = "ASTSlotLoadNode"
    visitor_name: ClassVar[str] = "slot_load"
    child_fields: ClassVar[Tuple[str, ...]] = ("receiver",)


@dataclass(eq=False)
class SlotStoreNode(AstNode):
    receiver: Optional[AstNode] = None
    slot_index: int = 0
    value: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTSlotStoreNode"
    visitor_name: ClassVar[str] = "slot_store"
    child_fields: ClassVar[Tuple[str, ...]] = ("receiver", "value")


@dataclass(eq=False)
class ClosureNode(AstNode):
    definition: Optional[FunctionDefinition] = None
    captures: List[AstNode] = field(default_factory=list)
    type_name: ClassVar[str] = "ASTClosureNode"
    visitor_name: ClassVar[str] = "closure"
    child_fields: ClassVar[Tuple[str, ...]] = ("captures",)


@dataclass(eq=False)
class IfNode(AstNode):
    condition: Optional[AstNode] = None
    then_branch: Optional[AstNode] = None
    else_branch: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTIfNode"
    visitor_name: ClassVar[str] = "if"
    child_fields: ClassVar[Tuple[str, ...]] = ("condition", "then_branch", "else_branch")


@dataclass(eq=False)
class WhileNode(AstNode):
    condition: Optional[AstNode] = None
    body: Optional[AstNode] = None
    type_name: ClassVar[str] = "ASTWhileNode"
    visitor_name: ClassVar[str] = "while"
    child_fields: ClassVar[Tuple[str, ...]] = ("condition", "body")


ALL_NODE_CLASSES = [
    LiteralNode, IdentifierNode, MessageSendNode, FunctionApplicationNode, CascadeMessageNode, CascadeNode,
    SequenceNode, LambdaArgumentNode, LambdaNode, TupleNode, DictionaryPairNode, MakeDictionaryNode,
    MakeByteArrayNode, LiteralArrayNode, QuoteNode, QuasiQuoteNode, QuasiUnquoteNode, SpliceNode,
    LocalVariableNode, CaptureNode, LocalDefinitionNode, SlotLoadNode, SlotStoreNode, ClosureNode, IfNode,
    WhileNode,
]


def _values_equal(first: Any, second: Any) -> bool:
    if isinstance(first, AstNode) or isinstance(second, AstNode):
        return isinstance(first, AstNode) and isinstance(second, AstNode) and nodes_equal(first, second)
    if isinstance(first, list) or isinstance(second, list):
        return (isinstance(first, list) and isinstance(second, list) and len(first) == len(second)
                and all(_values_equal(a, b) for a, b in zip(first, second)))
    if isinstance(first, ObjectValue) and isinstance(second, ObjectValue):
        from .runtime import values_equal
        return values_equal(first, second)
    if type(first) is not type(second):
        return False
    return first == second


def nodes_equal(first: AstNode, second: AstNode) -> bool:
    """Structural equality ignoring positions"""
    if type(first) is not type(second):
        return False
    for item in dataclasses.fields(first):
        if item.name in ("position", "analyzed_type"):
            continue
        if not _values_equal(getattr(first, item.name), getattr(second, item.name)):
            return False
    return True


def clone_node(node: AstNode, replace: Callable[[AstNode], Optional[Any]] = lambda n: None) -> AstNode:
    """Deep copy of an unanalyzed tree; replace may return a substitute for any node"""
    substitute = replace(node)
    if substitute is not None:
        return substitute
    changes = {}
    for name in node.child_fields:
        value = getattr(node, name)
        if isinstance(value, list):
            changes[name] = [clone_node(child, replace) if isinstance(child, AstNode) else child
                             for child in value]
        elif isinstance(value, AstNode):
            changes[name] = clone_node(value, replace)
    return dataclasses.replace(node, **changes)


def walk(node: AstNode) -> Iterator[AstNode]:
    """Pre-order traversal"""
    yield node
    for child in node.children():
        yield from walk(child)
