import sys
import logging
from typing import Callable, Dict, List, Optional, TextIO

from .data_structures import DriverConfig, RunResult
from .errors import SysmelError
from .file_operations import setup_logging, read_source_file, write_binary_file, read_binary_file
from .object_model import FunctionDefinition
from .tokenizer import tokenize
from .parser import parse
from .unparser import unparse
from .runtime import print_string
from .bytecode import disassemble
from .bytecode_compiler import compile_to_bytecode
from .hir import dump_hir
from .hir_passes import HirPipeline
from .mir import format_listing
from .mir_passes import MirPipeline
from .image import ExternalTable, resolve_roots, trace_entities, serialize_image, load_image, measure_image
from .program_entities import FunctionEntity, ClassEntity
from .session import Session

DUMP_STAGES = ("tokens", "ast", "analyzed-ast", "bytecode", "hir", "hir-opt", "mir", "asm")
SOURCE_DUMPS = ("tokens", "ast")


def check_config(config: DriverConfig):
    """Raise ValueError for command lines the driver cannot run"""
    if config.input_path and config.expression is not None:
        raise ValueError("give either an input file or -e, not both")
    if not (config.input_path or config.expression is not None or config.load_image or config.repl):
        raise ValueError("nothing to run: give an input file, -e EXPR, --load-image or --repl")
    unknown = [stage for stage in config.dumps if stage not in DUMP_STAGES]
    if unknown:
        raise ValueError(f"unknown dump stage {unknown[0]}")
    if config.roots not in ("main", "all"):
        raise ValueError(f"--roots must be main or all, not {config.roots}")
    if config.pass_options.inline_threshold < 0:
        raise ValueError("--inline-threshold must not be negative")


class StageDumper:
    """Writes the requested intermediate forms of every function defined or run"""

    def __init__(self, session: Session, stages: List[str], output: TextIO):
        self.session = session
        self.stages = [stage for stage in DUMP_STAGES if stage in stages]
        self.output = output
        self.hir_pipeline = HirPipeline(session.pass_options)
        self.mir_pipeline = MirPipeline(self.hir_pipeline)
        self.logger = logging.getLogger("SysmelKernel")

    def write(self, text: str):
        self.output.write(text if text.endswith("\n") else text + "\n")

    def dump_source(self, source: str, file_name: str):
        if "tokens" in self.stages:
            self.write("== tokens ==")
            for token in tokenize(source, file_name):
                self.write(f"{token.position.line}:{token.position.column} {token.kind.value} {token.text!r}")
        if "ast" in self.stages:
            self.write("== ast ==")
            for statement in parse(tokenize(source, file_name)).expressions:
                self.write(unparse(statement))

    def functions(self) -> List[FunctionDefinition]:
        seen = set()
        functions = []
        for definition in [*self.session.thunks, *self.session.defined_functions()]:
            if id(definition) not in seen and not definition.stripped:
                seen.add(id(definition))
                functions.append(definition)
        return functions

    def dump_functions(self):
        renderers: Dict[str, Callable[[FunctionDefinition], str]] = {
            "analyzed-ast": self.analyzed_ast,
            "bytecode": lambda definition: disassemble(compile_to_bytecode(definition)),
            "hir": lambda definition: dump_hir(self.hir_pipeline.promoted(definition)),
            "hir-opt": lambda definition: dump_hir(self.hir_pipeline.optimized(definition)),
            "mir": lambda definition: format_listing(self.mir_pipeline.stage(definition, "fused")),
            "asm": lambda definition: format_listing(self.mir_pipeline.stage(definition, "laid-out")),
        }
        functions = self.functions()
        for stage in self.stages:
            if stage in SOURCE_DUMPS:
                continue
            self.write(f"== {stage} ==")
            for definition in functions:
                try:
                    self.write(renderers[stage](definition))
                except SysmelError as e:
                    self.logger.warning(f"Could not dump {stage} of {definition.display_name}: {e}")
                    self.write(f"; {definition.display_name}: {e}")

    @staticmethod
    def analyzed_ast(definition: FunctionDefinition) -> str:
        definition.ensure_analyzed()
        arguments = ", ".join(f"{argument.name.text}: {argument.value_type}" for argument in definition.arguments)
        return f"{definition.display_name}({arguments}) => {definition.result_type} := " \
               f"{unparse(definition.body_node) if definition.body_node is not None else '<no body>'}"


def install_image(session: Session, image) -> Optional[FunctionDefinition]:
    """Bind the loaded entities in the session namespace; returns main's definition when present"""
    namespace = image.namespace
    if namespace is not None:
        for symbol, binding in namespace.environment.bindings.items():
            session.environment.define(symbol, binding.value, binding.value_type, binding.mutable)
        for symbol, member in namespace.members.items():
            session.namespace.add_member(symbol, member)
    for root in image.roots:
        if isinstance(root, FunctionEntity):
            session.environment.define(root.name, root.definition, root.definition.object_type)
            session.namespace.add_member(root.name, root)
        elif isinstance(root, ClassEntity):
            session.environment.define(root.name, root.class_type, root.class_type.object_type)
            session.namespace.add_member(root.name, root)
    main = image.main_entity()
    return main.definition if main is not None else None


def emit_image(session: Session, config: DriverConfig) -> int:
    externals = ExternalTable(session.builtins)
    roots = resolve_roots(session.namespace, config.roots)
    data = serialize_image(trace_entities(roots, externals, config.strip_ast), externals)
    write_binary_file(config.emit_image, data)
    if config.strip_ast:
        sizes = measure_image(roots, externals)
        print(f"image: {sizes.stripped} bytes without the analyzed AST, {sizes.full} bytes with it "
              f"({sizes.ast_records} of {sizes.records} records are AST nodes)", file=sys.stderr)
    return len(data)


def run_repl(session: Session, stdin: TextIO, output: TextIO, errors: TextIO) -> int:
    """Read period-terminated statements until end of input; returns the failed statement count"""
    logger = logging.getLogger("SysmelKernel")
    failures = 0
    buffer: List[str] = []
    line_number = 0
    interactive = stdin.isatty() if hasattr(stdin, "isatty") else False
    while True:
        if interactive:
            output.write("... " if buffer else "sysmel> ")
            output.flush()
        line = stdin.readline()
        if not line:
            break
        line_number += 1
        buffer.append(line)
        text = "".join(buffer).strip()
        if not text.endswith("."):
            continue
        buffer = []
        try:
            value = session.evaluate_source(text, f"<repl:{line_number}>")
            if value is not session.universe.void:
                output.write(print_string(value) + "\n")
        except SysmelError as e:
            failures += 1
            logger.warning(f"REPL statement failed: {e}")
            errors.write(f"{e}\n")
    return failures


def run_driver(config: DriverConfig, output: Optional[TextIO] = None, errors: Optional[TextIO] = None,
               stdin: Optional[TextIO] = None, configure_logging: bool = False) -> RunResult:
    """Run one program as the command line describes it.

    Program output and dumps go to ``output``; diagnostics are returned in
    the result and written to ``errors``. Exit status 0 means success, 1 a
    diagnostic, 2 a bad command line or a missing file.
    """
    output = output or sys.stdout
    errors = errors or sys.stderr
    if configure_logging:
        logger, _ = setup_logging(config.log_level, config.log_file)
    else:
        logger = logging.getLogger("SysmelKernel")

    def failed(message: str, status: int) -> RunResult:
        errors.write(message + "\n")
        return RunResult(False, message, status, [message])

    try:
        check_config(config)
        session = Session(config.engine, config.pass_options, output)
    except ValueError as e:
        logger.error(f"Bad command line: {e}")
        return failed(f"error: {e}", 2)

    dumper = StageDumper(session, config.dumps, output)
    try:
        if config.load_image:
            image = load_image(read_binary_file(config.load_image), ExternalTable(session.builtins))
            main = install_image(session, image)
            logger.info(f"Loaded image {config.load_image} with {len(image.objects)} records")
            if main is not None and not config.input_path and config.expression is None and not config.repl:
                session.call(main)

        source, file_name = None, None
        if config.input_path:
            source, file_name = read_source_file(config.input_path), config.input_path
        elif config.expression is not None:
            source, file_name = config.expression, "<expression>"

        if source is not None:
            dumper.dump_source(source, file_name)
            value = session.evaluate_source(source, file_name)
            if config.expression is not None and value is not session.universe.void:
                output.write(print_string(value) + "\n")

        if config.repl:
            failures = run_repl(session, stdin or sys.stdin, output, errors)
            logger.info(f"REPL finished with {failures} failed statements")

        dumper.dump_functions()
        if config.emit_image:
            size = emit_image(session, config)
            logger.info(f"Image {config.emit_image} written ({size} bytes)")
        return RunResult(True, "ok", 0)

    except FileNotFoundError as e:
        logger.error(f"File not found: {e.filename}")
        return failed(f"error: file not found: {e.filename}", 2)
    except SysmelError as e:
        logger.error(f"Run failed: {e}")
        return failed(str(e), 1)
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return failed(f"error: {e}", 1)
    except Exception as e:
        logger.exception(f"Unexpected error while running: {e}")
        return failed(f"internal error: {e}", 1)
