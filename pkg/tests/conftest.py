import pytest

from cpds.instance import Instance

G7_LABELS = "abcdefg"
G7_EDGES = ["ab", "bc", "cd", "da", "ae", "bf", "cg"]


def labelled(labels, edges, zero, capacity=0, name=""):
    idx = {c: i for i, c in enumerate(labels)}
    return Instance.from_edges(
        len(labels),
        [(idx[e[0]], idx[e[1]]) for e in edges],
        [idx[c] for c in zero],
        capacity=capacity,
        labels=list(labels),
        name=name,
    )


def g7(k=2):
    return labelled(G7_LABELS, G7_EDGES, "abcd", k, "G7")


def h6(k=0):
    return labelled("abcdef", ["ab", "bc", "cd", "de", "ef", "fa"], "ace", k, "H6")


def pairs(inst, *names):
    """Translate ``"ab"`` style pairs into vertex-id pairs."""
    idx = {inst.label(v): v for v in range(inst.n)}
    return {(idx[p[0]], idx[p[1]]) for p in names}


@pytest.fixture
def G7():
    return g7(2)


@pytest.fixture
def H6():
    return h6()


# One line per acceptance criterion, echoed at the end of the session so the
# verdicts are visible even when output capture is on.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
