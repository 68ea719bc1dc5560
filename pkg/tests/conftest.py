from importlib import resources
from pathlib import Path

import pytest

from symtsg.lang import build_explicit, build_symbolic, load_model

MODELS = Path(str(resources.files("symtsg") / "models"))

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def example_ast():
    return load_model(MODELS / "example.tsg")


@pytest.fixture(scope="session")
def example_sym(example_ast):
    return build_symbolic(example_ast)


@pytest.fixture(scope="session")
def example_game(example_ast):
    return build_explicit(example_ast)
