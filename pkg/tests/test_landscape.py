import json
from fractions import Fraction as F

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clustered_ising.checks import default_grid, is_interior
from clustered_ising.classes import NamedState, class_energy_exact, enumerate_classes
from clustered_ising.errors import ParameterError, RegimeError
from clustered_ising.landscape import (PathKind, RegimeTag, analyze, critical_slices, energy,
                                       gamma_values, gate_set, identify_states,
                                       manifold_minimum, printed_state_sets, reference_path,
                                       regime)
from clustered_ising.model import Params
from clustered_ising.oracle import StateGraph

from .conftest import load_schema

PLUS, MINUS, PM, MP = NamedState.PLUS, NamedState.MINUS, NamedState.PM, NamedState.MP


@pytest.mark.parametrize("eps,h,tag", [
    ("0.5", "0", RegimeTag.H0_EPS_POS), ("0", "0", RegimeTag.H0_EPS_ZERO),
    ("-0.5", "0", RegimeTag.H0_EPS_NEG), ("0", "0.3", RegimeTag.H_POS_EPS_NONNEG),
    ("-0.3", "0.5", RegimeTag.H_POS_EPS_NEG_WEAK), ("-0.5", "0.5", RegimeTag.H_POS_EPS_NEG_EQ),
    ("-0.3", "0.3", RegimeTag.H_POS_EPS_NEG_EQ), ("-0.8", "0.3", RegimeTag.H_POS_EPS_NEG_STRONG),
])
def test_regime_tags(eps, h, tag):
    assert regime(Params(4, 2, eps, h)) is tag


def test_regime_boundary_uses_exact_decimals():
    # 0.1 + 0.2 style float noise must not move h = -eps off the boundary
    assert regime(Params(3, 2, "-0.3", "0.3")) is RegimeTag.H_POS_EPS_NEG_EQ
    assert regime(Params(3, 2, -0.3, 0.3)) is RegimeTag.H_POS_EPS_NEG_EQ


def test_identify_states_examples():
    n = 4
    s = identify_states(Params(n, 2, "0.5", "0"))
    assert s.stable == {PLUS, MINUS} and s.metastable == {PM, MP}
    assert s.min_energy == -n * n + n - F(1, 2) * n
    s = identify_states(Params(n, 2, "0", "0"))
    assert s.stable == {PLUS, MINUS, PM, MP} and s.metastable == frozenset()
    s = identify_states(Params(n, 2, "-0.8", "0.3"))
    assert s.stable == {PM, MP} and s.metastable == {PLUS}
    assert s.min_energy == -n * n + n + F(-4, 5) * n


def test_decoupled_field_metastable_set():
    s = identify_states(Params(4, 2, "0", "0.5"))
    assert s.metastable == {MINUS, PM, MP}
    assert s.printed_metastable == {MINUS}
    assert s.discrepancies


def test_equal_boundary_follows_stability_level():
    assert identify_states(Params(4, 2, "-1", "1")).metastable == {MINUS}
    s = identify_states(Params(3, 2, "-1", "1"))
    assert s.metastable == frozenset() and s.printed_metastable == {MINUS}


@pytest.mark.parametrize("n,eps,h,gs,gm", [
    (4, "0.5", "0", 10, 6), (3, "-0.5", "0", 6, 3), (4, "0.5", "0.25", None, 9),
    (4, "-0.3", "0.5", None, F(36, 5)), (4, "-0.6", "0.25", F(47, 5), F(33, 5)),
    (4, "0", "0", 8, None), (4, "-0.5", "0.5", None, None),
])
def test_gamma_values(n, eps, h, gs, gm):
    g = gamma_values(Params(n, 2, eps, h))
    assert (g.gamma_s, g.gamma_m) == (gs, gm)


def test_gamma_discrepancies_recorded():
    g = gamma_values(Params(4, 2, "0.5", "0"))
    (d,) = g.discrepancies
    assert d.printed["metastable-identification display"] == 6 and d.adopted == 10
    g = gamma_values(Params(4, 2, "-0.6", "0.25"))
    assert {x for d in g.discrepancies for x in d.printed.values()} >= {F(57, 5), F(47, 5)}


@pytest.mark.parametrize("n", range(2, 9))
def test_manifold_minimum_matches_class_scan(n):
    for eps, h in [("0.5", "0"), ("-0.4", "0.3"), ("1", "1"), ("0", "0.25"), ("-1", "0.5")]:
        p = Params(n, 2, eps, h)
        for k in range(2 * n + 1):
            cand = [c for c in enumerate_classes(n) if c.p1 + c.p2 == k]
            best = min(energy(c, p) for c in cand)
            value, argmin = manifold_minimum(k, p)
            assert value == best
            assert set(argmin) <= {c for c in cand if energy(c, p) == best}


def test_manifold_minimum_endpoints():
    p = Params(5, 2, "0.3", "0.2")
    n, e, h = 5, p.epsilon, p.h
    assert manifold_minimum(0, p) == (n - n * n - e * n + 2 * h * n, [(0, 0, 0)])
    assert manifold_minimum(2 * n, p)[0] == identify_states(p).min_energy
    with pytest.raises(ParameterError):
        manifold_minimum(11, p)


def test_critical_slices_examples():
    assert critical_slices(Params(4, 2, "0.5", "0")) == {"p_left": 2, "p_right": 6}
    assert critical_slices(Params(5, 2, "-0.5", "0")) == {"p_left": 2, "p_right": 8}
    assert critical_slices(Params(4, 2, "-0.8", "0.4")) == {"p3": 1}


def test_gate_set_examples():
    assert set(gate_set(Params(4, 2, "0.5", "0")).classes) == {(2, 0, 0), (0, 2, 0), (4, 2, 2), (2, 4, 2)}
    assert set(gate_set(Params(5, 2, "0.5", "0.25")).classes) == {(3, 0, 0), (0, 3, 0)}
    assert gate_set(Params(5, 2, "-0.2", "0.6")).classes == ((5, 2, 2),)
    assert gate_set(Params(4, 2, "-0.5", "0.5")) is None


@pytest.mark.parametrize("n", [3, 4])
def test_gate_classes_share_the_communication_height(n):
    for p in default_grid(n):
        gate = gate_set(p)
        if gate is None or not is_interior(p) or regime(p) is RegimeTag.H_POS_EPS_NEG_STRONG:
            continue
        if abs(p.epsilon) == 1 or p.h == 1:
            continue  # tie points, see the oracle tests
        g = StateGraph(p)
        slices = set(critical_slices(p).values())
        for a, b in gate.transitions:
            phi = g.communication_height(a, b)
            assert all(energy(c, p) == phi for c in gate.classes), (p, a, b)
        assert {c.p1 + c.p2 for c in gate.classes} <= slices


def test_reference_path_examples():
    path = reference_path(Params(4, 2, "0.7", "0"), PathKind.BAR)
    assert path.max_energy == -4 and path.argmax == (2, 6)
    p = Params(5, 2, "-0.3", "0.6")
    path = reference_path(p, "tilde")
    assert path.argmax == (2,)
    assert path.max_energy == 5 - F(26, 2) + p.epsilon - p.h * 4
    assert path.is_valid(5)


def test_reference_path_regime_mismatch():
    with pytest.raises(RegimeError):
        reference_path(Params(4, 2, "0.5", "0"), PathKind.TILDE)


def test_hat_even_lemma_discrepancy():
    path = reference_path(Params(4, 2, "-0.5", "0"), PathKind.HAT)
    assert path.max_energy == path.lemma.value == 4 - 8
    assert path.lemma.printed_value == 4 - 8 + 2
    assert path.discrepancies


fracs = st.fractions(-1, 1, max_denominator=12)
hs = st.fractions(0, 1, max_denominator=12)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 8), fracs, hs)
def test_reference_path_barrier_is_gamma(n, eps, h):
    p = Params(n, 2, eps, h)
    rep = analyze(p)
    path = rep.reference_path
    if path is None:
        assert regime(p) is RegimeTag.H_POS_EPS_NEG_EQ
        return
    assert path.is_valid(n)
    g = gamma_values(p)
    r = regime(p)
    if r in (RegimeTag.H0_EPS_POS, RegimeTag.H0_EPS_NEG, RegimeTag.H0_EPS_ZERO,
             RegimeTag.H_POS_EPS_NEG_STRONG):
        assert path.barrier >= g.gamma_s
        if r is not RegimeTag.H_POS_EPS_NEG_STRONG:
            assert path.barrier == g.gamma_s
    else:
        assert path.barrier == g.gamma_m


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), fracs, hs)
def test_report_invariants(n, eps, h):
    p = Params(n, 2, eps, h)
    rep = analyze(p)
    assert rep.stable_set and not set(rep.stable_set) & set(rep.metastable_set)
    if rep.gate is not None:
        assert len({energy(c, p) for c in rep.gate.classes}) == 1
    mins = {energy(s.class_state(n), p) for s in rep.stable_set}
    assert mins == {rep.min_energy}
    assert rep.min_energy == min(class_energy_exact(c, n).exact(p.epsilon, p.h)
                                 for c in enumerate_classes(n))


def test_report_json_and_table():
    rep = analyze(Params(4, 2, "-0.6", "0.25"))
    doc = rep.to_json_dict()
    jsonschema.validate(json.loads(json.dumps(doc)), load_schema("landscape_report"))
    assert doc["gamma_s"] == 9.4 and len(doc["discrepancies"]) >= 2
    assert "Gamma_s" in rep.render_table()
    printed = printed_state_sets(Params(4, 2, "-0.5", "0.5"))
    assert printed == ({PLUS, PM, MP}, {MINUS})
