import pytest

from metricfactor.bitgraphs import build_binary_tree, build_diamond, build_laakso


@pytest.fixture(scope="session")
def d1():
    return build_diamond(1)


@pytest.fixture(scope="session")
def d2():
    return build_diamond(2)


@pytest.fixture(scope="session")
def l1():
    return build_laakso(1)


@pytest.fixture(scope="session")
def b4():
    return build_binary_tree(4)


def pytest_terminal_summary(terminalreporter):
    from oracles import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
