"""
Every engine must print the same value and produce the same output for every sample program
"""

import io

import pytest

from src.data_structures import PassOptions
from src.engines import ENGINES, MirEngine, make_engine
from src.runtime import print_string
from src.session import Session
from tests.sample_programs import CORPUS

NO_PASSES = PassOptions(constant_propagation=False, simplify_control_flow=False, inlining=False)


def run_sample(session, sample):
    value = session.evaluate_source(sample.source, f"{sample.name}.sysmel")
    return print_string(value), session.output.getvalue()


@pytest.mark.parametrize("engine", list(ENGINES))
@pytest.mark.parametrize("sample", CORPUS, ids=[sample.name for sample in CORPUS])
def test_sample_on_engine(engine, sample):
    session = Session(engine, output=io.StringIO())
    assert run_sample(session, sample) == (sample.expected, sample.output)


@pytest.mark.parametrize("sample", CORPUS, ids=[sample.name for sample in CORPUS])
def test_unoptimized_virtual_register_code(sample):
    session = Session("mir", NO_PASSES, output=io.StringIO())
    session.engine = MirEngine(NO_PASSES, session.evaluator, stage="lowered")
    assert run_sample(session, sample) == (sample.expected, sample.output)


@pytest.mark.parametrize("engine", ["hir", "mir"])
@pytest.mark.parametrize("sample", CORPUS[:16], ids=[sample.name for sample in CORPUS[:16]])
def test_pass_toggles_do_not_change_results(engine, sample):
    session = Session(engine, NO_PASSES, output=io.StringIO())
    assert run_sample(session, sample) == (sample.expected, sample.output)


def test_engines_are_named():
    for name, engine_class in ENGINES.items():
        assert engine_class.name == name
        assert make_engine(name).name == name


def test_unknown_engine():
    with pytest.raises(ValueError):
        make_engine("jit")
