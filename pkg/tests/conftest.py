from importlib import resources

import pytest

from fracthermo.specparse import load_problem, parse_problem

SHIPPED = ("case1", "case2", "case3", "degenerate_f1")


def shipped_path(name):
    return resources.files("fracthermo") / "problems" / f"{name}.prob"


def shipped(name):
    return load_problem(str(shipped_path(name)))


@pytest.fixture(scope="session")
def case1():
    return shipped("case1")


@pytest.fixture(scope="session")
def case2():
    return shipped("case2")


@pytest.fixture(scope="session")
def case3():
    return shipped("case3")


@pytest.fixture(scope="session")
def degenerate():
    return shipped("degenerate_f1")


def make_spec(**keys):
    base = {"alpha": "1.5", "eta": "0.5", "beta": "1", "f": "1", "H1": "0", "H2": "0"}
    base.update(keys)
    return parse_problem("\n".join(f"{k} = {v}" for k, v in base.items()))


# {{{ acceptance report

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the summary."""

    def record(label, ok, detail=""):
        ACCEPTANCE[label] = (bool(ok), detail)
        assert ok, f"criterion {label} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: (int(s.split()[0].rstrip("ab")), s)):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}")


# }}}
