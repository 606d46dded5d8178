from __future__ import annotations

import pytest

from hidekit.graph import GraphFamilySpec, build_graph, gen_family


def fam(family: str, seed: int | None = None, **params):
    return gen_family(GraphFamilySpec(family, params, seed))


def acceptance_graphs():
    """(label, graph) pairs for the exit-criteria graph set."""
    out = []
    out += [(f"P{n}", fam("path", n=n)) for n in range(2, 9)]
    out += [(f"C{n}", fam("cycle", n=n)) for n in range(3, 9)]
    out += [(f"K{n}", fam("clique", n=n)) for n in range(3, 7)]
    out += [(f"double_star({d},{p})", fam("double_star", d=d, p=p))
            for d in range(2, 5) for p in range(1, d + 2)]
    out += [(f"chain({x},{y})", fam("chain_of_cliques", seed=x * 10 + y, x=x, y=y))
            for x in range(3, 6) for y in range(1, 4)]
    return out


@pytest.fixture(scope="session")
def graph_set():
    return acceptance_graphs()


@pytest.fixture
def p3():
    return build_graph([(1, 2), (2, 3)])


@pytest.fixture
def k2():
    return build_graph([(1, 2)])


# -- acceptance reporting ------------------------------------------------------

_CRITERIA: dict[int, str] = {}


class CriterionRecorder:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; the outcome line is printed in the terminal summary."""
    marker = request.node.get_closest_marker("acceptance")
    number, title = marker.args
    rec = CriterionRecorder(number, title)
    _CRITERIA[number] = f"FAIL  criterion {number:>2}: {title}"
    yield rec
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    extra = f"  ({'; '.join(rec.details)})" if rec.details else ""
    _CRITERIA[number] = f"{status}  criterion {number:>2}: {title}{extra}"


@pytest.hookimpl(wrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    if rep.when == "call":
        item.rep_call = rep
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
