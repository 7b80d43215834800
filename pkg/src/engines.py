"""
The four interchangeable execution engines. Each runs analyzed thunks and
applies callables; they must agree on every program's results.
"""

import logging
from typing import Any, Dict, Optional, Sequence, Type

from .data_structures import PassOptions
from .object_model import FunctionDefinition
from .evaluator import Evaluator
from .bytecode_vm import BytecodeVM
from .hir_passes import HirPipeline
from .hir_interpreter import HirInterpreter
from .mir_passes import MirPipeline
from .mir_emulator import MirEmulator


class Engine:
    name = "engine"

    def __init__(self, pass_options: Optional[PassOptions] = None, evaluator: Optional[Evaluator] = None):
        self.pass_options = pass_options or PassOptions()
        self.logger = logging.getLogger("SysmelKernel")

    def call(self, callee: Any, arguments: Sequence[Any] = ()) -> Any:
        raise NotImplementedError

    def run_thunk(self, thunk: FunctionDefinition) -> Any:
        return self.call(thunk, [])


class TreeWalkEngine(Engine):
    name = "interp"

    def __init__(self, pass_options: Optional[PassOptions] = None, evaluator: Optional[Evaluator] = None):
        super().__init__(pass_options)
        self.evaluator = evaluator or Evaluator()

    def call(self, callee, arguments=()):
        return self.evaluator.apply(callee, list(arguments))


class BytecodeEngine(Engine):
    name = "bytecode"

    def __init__(self, pass_options: Optional[PassOptions] = None, evaluator: Optional[Evaluator] = None):
        super().__init__(pass_options)
        self.vm = BytecodeVM()

    def call(self, callee, arguments=()):
        return self.vm.call(callee, list(arguments))


class HirEngine(Engine):
    name = "hir"

    def __init__(self, pass_options: Optional[PassOptions] = None, evaluator: Optional[Evaluator] = None):
        super().__init__(pass_options)
        self.pipeline = HirPipeline(self.pass_options)
        self.interpreter = HirInterpreter(self.pipeline)

    def call(self, callee, arguments=()):
        return self.interpreter.call(callee, list(arguments))


class MirEngine(Engine):
    name = "mir"

    def __init__(self, pass_options: Optional[PassOptions] = None, evaluator: Optional[Evaluator] = None,
                 stage: str = "laid-out"):
        super().__init__(pass_options)
        self.pipeline = MirPipeline(HirPipeline(self.pass_options))
        self.emulator = MirEmulator(self.pipeline, stage)

    def call(self, callee, arguments=()):
        return self.emulator.call(callee, list(arguments))


ENGINES: Dict[str, Type[Engine]] = {
    "interp": TreeWalkEngine,
    "bytecode": BytecodeEngine,
    "hir": HirEngine,
    "mir": MirEngine,
}


def make_engine(name: str, pass_options: Optional[PassOptions] = None,
                evaluator: Optional[Evaluator] = None) -> Engine:
    try:
        engine_class = ENGINES[name]
    except KeyError:
        raise ValueError(f"unknown engine {name!r}; choose one of {', '.join(ENGINES)}") from None
    return engine_class(pass_options, evaluator)
