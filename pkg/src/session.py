"""
A session owns one global namespace, the analyzer and the selected engine,
and evaluates source text statement by statement.
"""

import logging
from contextlib import nullcontext
from typing import Any, Callable, List, Optional, TextIO

from .data_structures import AnalysisContext, PassOptions
from .errors import SemanticError
from .object_model import Environment, ScopeKind, FunctionDefinition
from .bootstrap import universe
from .intrinsics import intrinsic, redirect_output
from .macros import install_environment_macros
from .metabuilders import install_builder_factories
from .program_entities import Namespace, FunctionEntity, ClassEntity
from .parser import parse_source
from .evaluator import Evaluator
from .analyzer import Analyzer
from .engines import Engine, make_engine

BUILTIN_FUNCTIONS = {"printLine": "io.printLine", "print": "io.print"}


class Session:
    def __init__(self, engine: str = "interp", pass_options: Optional[PassOptions] = None,
                 output: Optional[TextIO] = None):
        self.logger = logging.getLogger("SysmelKernel")
        self.universe = universe()
        self.builtins = Environment(None, ScopeKind.GLOBAL)
        self.namespace = Namespace("Global", Environment(self.builtins, ScopeKind.NAMESPACE))
        self.namespace.environment.owner = self.namespace
        self.pass_options = pass_options or PassOptions()
        self.evaluator = Evaluator()
        self.analyzer = Analyzer(self, self.evaluator)
        self.engine: Engine = make_engine(engine, self.pass_options, self.evaluator)
        self.output = output
        self.thunks: List[FunctionDefinition] = []
        self.listeners: List[Callable[[FunctionDefinition], None]] = []
        self.populate_builtins()

    @property
    def environment(self) -> Environment:
        return self.namespace.environment

    def populate_builtins(self):
        for name, builtin in self.universe.types.items():
            self.builtins.define(name, builtin, builtin.object_type)
        for name in ("nil", "true", "false", "void"):
            value = getattr(self.universe, name)
            self.builtins.define(name, value, value.object_type)
        for name, intrinsic_id in BUILTIN_FUNCTIONS.items():
            native = intrinsic(intrinsic_id)
            self.builtins.define(name, native, native.object_type)
        install_environment_macros(self.builtins)
        install_builder_factories(self.builtins)

    # --- evaluation ---
    def output_redirection(self):
        return redirect_output(self.output) if self.output is not None else nullcontext()

    def evaluate_source(self, source: str, file_name: str = "<input>") -> Any:
        return self.evaluate_tree(parse_source(source, file_name))

    def evaluate_tree(self, tree) -> Any:
        context = AnalysisContext(self.environment, self.analyzer)
        with self.output_redirection():
            return tree.analyze_and_evaluate_with_environment(context)

    def run_thunk(self, thunk: FunctionDefinition) -> Any:
        return self.engine.run_thunk(thunk)

    def statement_analyzed(self, thunk: FunctionDefinition):
        self.thunks.append(thunk)
        for listener in self.listeners:
            listener(thunk)

    # --- lookups ---
    def lookup(self, name: str) -> Any:
        binding = self.environment.lookup(name)
        if binding is None:
            raise SemanticError(f"{name} is not defined", kind="unbound-identifier")
        return binding.value

    def call(self, callee: Any, *arguments) -> Any:
        if isinstance(callee, str):
            callee = self.lookup(callee)
        with self.output_redirection():
            return self.engine.call(callee, list(arguments))

    def defined_functions(self) -> List[FunctionDefinition]:
        """Functions and methods defined in the namespace, in definition order"""
        definitions: List[FunctionDefinition] = []
        for member in self.namespace.members.values():
            if isinstance(member, FunctionEntity):
                definitions.append(member.definition)
            elif isinstance(member, ClassEntity):
                definitions.extend(method.definition for method in member.methods.values())
        return definitions
