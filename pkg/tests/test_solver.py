import pytest

from conftest import g7, labelled
from cpds.formulations import Formulation, Options
from cpds.instance import Instance
from cpds.milp import Limits
from cpds.propagation import CapFunction, is_power_dominating
from cpds.solver import VerificationError, relative_gap, solve_cpds, verify

ALL = [(Formulation.FPS, Options()), (Formulation.FPS, Options(True, True, True)),
       (Formulation.EFPS, Options()), (Formulation.EFPS, Options(False, True, True)),
       (Formulation.BRI, Options()), (Formulation.JOV, Options()), (Formulation.FORT, Options())]


@pytest.mark.parametrize("kind,opts", ALL, ids=lambda x: str(x))
@pytest.mark.parametrize("k,expected", [(0, 3), (1, 2), (2, 1), (3, 1)])
def test_g7_optima(kind, opts, k, expected):
    rep = solve_cpds(g7(k), kind, opts, backend="scip-lite")
    assert rep.status == "optimal"
    assert rep.objective == expected and rep.bound == expected
    assert rep.verified and rep.gap == 0
    assert is_power_dominating(g7(k), rep.rho)


@pytest.mark.parametrize("mode,backend", [("iterative", "highs"), ("iterative", "scip"), ("callback", "scip")])
def test_lazy_modes_agree(mode, backend):
    for kind in (Formulation.FPS, Formulation.EFPS, Formulation.FORT):
        rep = solve_cpds(g7(1), kind, backend=backend, mode=mode)
        assert rep.objective == 2
        if mode == "iterative":
            assert rep.iterations >= 1


def test_report_fields():
    rep = solve_cpds(g7(2), Formulation.EFPS, Options(outp=True, init2=True), backend="scip")
    assert rep.model == "EFPS-IP-OutP-Init" and rep.options == "OutP-Init"
    assert rep.n == 7 and rep.m == 7 and rep.k == 2
    assert rep.vars == 27 and rep.init_rows > 10
    assert rep.instance == "G7"
    assert len(rep.placed) == 1 and rep.placed <= {0, 2}


def test_disconnected_input_is_split():
    base = g7(2)
    edges = list(base.edges()) + [(7, 8)]
    inst = Instance.from_edges(10, edges, base.zero_injection_set, capacity=2,
                               labels=list("abcdefgxyz"), name="split")
    rep = solve_cpds(inst, Formulation.EFPS, backend="scip-lite")
    # G7 needs one device, the edge x-y one more, the isolated z one more
    assert rep.components == 3
    assert rep.objective == 3 and rep.status == "optimal"
    assert rep.verified and is_power_dominating(inst, rep.rho)
    assert {inst.label(v) for v in rep.placed} >= {"z"}


def test_empty_instance():
    rep = solve_cpds(Instance.from_edges(0, [], []), Formulation.EFPS, backend="scip-lite")
    assert rep.objective == 0 and rep.status == "optimal"


def test_time_limit_status_and_gap_convention():
    assert relative_gap(None, 3, 10) == pytest.approx(0.7)
    assert relative_gap(5, 5, 10) == 0
    assert relative_gap(4, 3, 10) == pytest.approx(0.25)
    assert relative_gap(None, None, 10) is None
    rep = solve_cpds(g7(1), Formulation.BRI, limits=Limits(time_limit=60), backend="scip")
    assert rep.status == "optimal"


def test_verify_rejects_bad_solutions():
    inst = g7(2)
    with pytest.raises(VerificationError):
        verify(inst, CapFunction.of({4: {0}}), 1)
    with pytest.raises(VerificationError):
        verify(inst, CapFunction.of({0: {1, 3}}), 2)
    with pytest.raises(VerificationError):
        verify(g7(1), CapFunction.of({0: {1, 3}}), 1)
    with pytest.raises(ValueError):
        verify(inst, CapFunction.of({0: {2}}), 1)
    assert verify(inst, CapFunction.of({0: {1, 3}}), 1)


def test_zero_injection_free_graph_is_domination():
    # with no zero-injection vertex only direct observation counts
    inst = labelled("abcde", ["ab", "bc", "cd", "de"], "", capacity=2)
    assert solve_cpds(inst, Formulation.EFPS, backend="scip-lite").objective == 2
