import json
from fractions import Fraction as F

import jsonschema
import numpy as np
import pytest

from clustered_ising.checks import default_grid
from clustered_ising.classes import (NamedState, build_lumped_chain, classify,
                                     enumerate_classes)
from clustered_ising.errors import CapacityError
from clustered_ising.landscape import gate_set, identify_states
from clustered_ising.model import Params, SpinConfig, build_graph, flip, flip_delta_exact
from clustered_ising.oracle import (ClassGraph, StateGraph, class_descent_move, descent_move,
                                    full_gibbs, full_transition_matrix, oracle_report,
                                    project_matrix)

from .conftest import load_schema

PLUS, MINUS, PM, MP = NamedState.PLUS, NamedState.MINUS, NamedState.PM, NamedState.MP


@pytest.fixture(scope="module")
def g4():
    return StateGraph(Params(4, 2, "0.5", "0"))


def test_capacity_guard():
    with pytest.raises(CapacityError):
        StateGraph(Params(6, 2, 0, 0))
    with pytest.raises(CapacityError):
        full_transition_matrix(Params(5, 2, 0, 0), 1.0)


def test_state_graph_is_regular(g4):
    assert all(len(g4.neighbors(s)) == 8 for s in range(0, g4.num_states, 17))


def test_communication_height_examples(g4):
    m = g4.named(MINUS)
    assert g4.communication_height(m, m) == g4.energy(m)
    assert g4.communication_height(MINUS, PLUS) - g4.energy(m) == 10
    assert g4.communication_height(PLUS, MINUS) == g4.communication_height(MINUS, PLUS)
    assert g4.communication_height(PM, MP) == g4.communication_height(MP, PM)


def test_stability_levels(g4):
    assert g4.stability_level(PM) == 6
    assert g4.stability_level(PLUS) is None and g4.stability_level(MINUS) is None
    # a single plus spin in a sea of minus has a downhill neighbour
    assert g4.stability_level(SpinConfig(1, 8)) == 0


def test_stable_and_metastable_sets(g4):
    assert {g4.named(PLUS), g4.named(MINUS)} == g4.stable_states()
    meta, top = g4.metastable_states()
    assert meta == {g4.named(PM), g4.named(MP)} and top == 6


def test_class_graph_agrees_with_configurations():
    for eps, h in [("0.5", "0"), ("-0.6", "0.25"), ("0.3", "0.5"), ("-0.3", "1")]:
        p = Params(4, 2, eps, h)
        g, cg = StateGraph(p), ClassGraph(p)
        for a in NamedState:
            assert cg.stability_level(a.class_state(4)) == g.stability_level(a)
            for b in NamedState:
                assert cg.communication_height(a.class_state(4), b.class_state(4)) == \
                    g.communication_height(a, b)


def test_minimal_saddles_in_even_gate(g4):
    sad = g4.minimal_saddles(MINUS, PLUS)
    phi = g4.communication_height(MINUS, PLUS)
    assert sad and all(g4.energy(s) == phi for s in sad)
    gate = set(gate_set(Params(4, 2, "0.5", "0")).classes)
    assert {g4.class_of(s) for s in sad} <= gate


def test_minimal_saddles_in_odd_gate():
    p = Params(3, 2, "-0.5", "0")
    g = StateGraph(p)
    assert set(g.saddle_classes(PM, MP)) <= set(gate_set(p).classes)


def test_verify_gate_examples(g4):
    gate = gate_set(Params(4, 2, "0.5", "0")).classes
    v = g4.verify_gate(MINUS, PLUS, gate)
    assert v.is_gate and v.disconnects and v.subset_of_saddles
    # either crossing alone already blocks every optimal path
    assert v.minimal is False
    assert g4.verify_gate(MINUS, PLUS, [(2, 0, 0), (0, 2, 0)]).minimal is True
    v = g4.verify_gate(MINUS, PLUS, [])
    assert not v.is_gate and v.witness[0] == [0, 0, 0] and v.witness[-1] == [4, 4, 4]
    # the whole slice contains classes above the saddle level, so it is not a subset of S
    slices = [c for c in enumerate_classes(4) if c.p1 + c.p2 in (2, 6)]
    v = g4.verify_gate(MINUS, PLUS, slices)
    assert v.disconnects and not v.subset_of_saddles and not v.is_gate
    assert [1, 1, 1] in v.classes_not_saddles


def test_witness_path_is_optimal(g4):
    path = g4.optimal_path(MINUS, PLUS)
    phi = g4.communication_height(MINUS, PLUS)
    assert path[0] == g4.named(MINUS) and path[-1] == g4.named(PLUS)
    assert max(g4.energy(s) for s in path) == phi
    assert all((a ^ b).bit_count() == 1 for a, b in zip(path, path[1:]))


def test_stated_strong_gate_fails():
    p = Params(4, 2, "-0.6", "0.25")
    g = StateGraph(p)
    v = g.verify_gate(PM, MP, gate_set(p).classes)
    assert not v.is_gate and v.witness is not None


def test_descent_case_a():
    n, p = 5, Params(5, 2, "0.5", "0")
    for p2 in range(1, n):
        d = class_descent_move((n, p2, p2), p)
        if p2 >= 2:  # ceil((n-1)/2 - eps/2) = 2
            assert d.case == "A" and d.move.cluster == 2 and d.move.direction == 1


@pytest.mark.parametrize("n", [3, 4, 5])
def test_descent_fixed_points_are_named(n):
    named = {s.class_state(n) for s in NamedState}
    for p in default_grid(n):
        if abs(p.epsilon) == 1:
            continue  # flat directions at the coupling extremes
        if p.h == 1 and p.epsilon == 1:
            continue
        for c in enumerate_classes(n):
            d = class_descent_move(c, p)
            assert (d is None) == (c in named), (p, c)


def test_descent_move_is_downhill_on_configurations():
    p = Params(4, 2, "0.3", "0.25")
    g = build_graph(p)
    rng = np.random.default_rng(3)
    for bits in rng.integers(0, 256, size=60):
        s = SpinConfig(int(bits), 8)
        v = descent_move(s, p)
        if v is None:
            assert classify(s, 4) in {x.class_state(4) for x in NamedState}
        else:
            assert flip_delta_exact(g, s, v).exact(p.epsilon, p.h) < 0
    assert descent_move(PLUS.config(4), p) is None


@pytest.mark.parametrize("n,eps,h,beta", [(2, "0.5", "0", 1.0), (3, "-0.3", "0.5", 4.0),
                                          (4, "0.5", "0", 1.0), (4, "-0.6", "0.25", 4.0)])
def test_full_matrix_and_projection(n, eps, h, beta):
    p = Params(n, 2, eps, h)
    P = full_transition_matrix(p, beta)
    mu = full_gibbs(p, beta)
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)
    F_ = mu[:, None] * P
    assert np.abs(F_ - F_.T).max() < 1e-12
    proj, spread = project_matrix(P, n)
    assert spread < 1e-12
    assert np.abs(proj - build_lumped_chain(n, p, beta).P.toarray()).max() < 1e-12


def test_oracle_report_schema():
    rep = oracle_report(Params(3, 2, "-0.6", "0.25"))
    doc = json.loads(rep.to_json())
    jsonschema.validate(doc, load_schema("oracle_report"))
    assert doc["stability_levels"]["(3, 0, 0)"] == "infinite"
    assert doc["metastable"] == ["(3, 3, 3)"]


@pytest.mark.parametrize("n", [3, 4])
def test_identify_states_matches_definitions(n):
    for p in default_grid(n):
        g = StateGraph(p)
        s = identify_states(p)
        assert {g.named(x) for x in s.stable} == g.stable_states()
        meta, _ = g.metastable_states()
        assert {g.named(x) for x in s.metastable} == meta, p
        assert min(g.energy(x) for x in g.stable_states()) == s.min_energy


def test_flip_matches_neighbors(g4):
    s = 0b10110010
    assert sorted(g4.neighbors(s)) == sorted(flip(SpinConfig(s, 8), v).bits for v in range(8))
    assert g4.energy(s) == F(g4.E[s], g4.den)
