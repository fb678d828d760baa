import json
from fractions import Fraction
from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clustered_ising.classes import (MOVES, ClassState, MoveType, NamedState,
                                     build_lumped_chain, class_energy, class_energy_exact,
                                     class_flip_delta, class_flip_delta_exact, class_neighbors,
                                     class_size, classify, enumerate_classes, flip_multiplicities,
                                     representative)
from clustered_ising.errors import ParameterError
from clustered_ising.model import (Params, SpinConfig, build_graph, flip, hamiltonian,
                                   hamiltonian_exact)

FIG_SPINS = [1, 1, 1, 1, -1, -1, -1] + [1, 1, 1, -1, -1, -1, -1]


def triples(n):
    return [(p1, p2, a) for p1, p2, a in product(range(n + 1), repeat=3)
            if max(0, p1 + p2 - n) <= a <= min(p1, p2)]


@pytest.mark.parametrize("n,count", [(2, 10), (3, 20), (4, 35), (5, 56), (8, 165)])
def test_class_count(n, count):
    classes = enumerate_classes(n)
    assert len(classes) == count == len(triples(n))
    assert classes == sorted(classes)


def test_corner_class_bounds():
    assert [c for c in enumerate_classes(2) if c[:2] == (2, 2)] == [(2, 2, 2)]


@pytest.mark.parametrize("n", range(2, 7))
def test_sizes_partition_configurations(n):
    assert sum(class_size(c, n) for c in enumerate_classes(n)) == 4 ** n


def test_class_sizes_by_enumeration():
    n = 3
    counts = {}
    for bits in range(1 << (2 * n)):
        c = classify(SpinConfig(bits, 2 * n), n)
        counts[c] = counts.get(c, 0) + 1
    assert counts == {c: class_size(c, n) for c in enumerate_classes(n)}
    assert class_size((1, 1, 1), 2) == 2
    assert class_size((5, 5, 5), 5) == 1
    assert class_size((2, 2, 1), 4) == comb(4, 2) * comb(2, 1) * comb(2, 1)


def test_invalid_class_rejected():
    with pytest.raises(ParameterError):
        class_size((2, 2, 0), 3)
    with pytest.raises(ParameterError):
        class_energy((4, 0, 0), Params(3, 2, 0, 0))


def test_drawn_configuration_class_and_energy():
    s = SpinConfig.from_spins(FIG_SPINS)
    assert classify(s) == (4, 3, 3)
    assert class_energy((4, 3, 3), Params(7, 2, 1, 0)) == 1.0


@pytest.mark.parametrize("n", [2, 3, 5])
def test_named_class_energies(n):
    p = Params(n, 2, "0.3", "0.7")
    assert class_energy_exact((n, n, n), n).exact(p.epsilon, p.h) == \
        -n * n + n - p.epsilon * n - 2 * p.h * n
    assert class_energy((n, 0, 0), Params(n, 2, 0, 0)) == n - n * n


def test_classify_named():
    assert classify(SpinConfig.all_plus(8)) == (4, 4, 4)
    assert classify(SpinConfig.all_minus(8)) == (0, 0, 0)
    for s in NamedState:
        assert classify(s.config(3)) == s.class_state(3)
    assert NamedState.parse("±1") is NamedState.PM
    with pytest.raises(ParameterError):
        NamedState.parse("zero")


def test_drawn_configuration_multiplicities():
    m = flip_multiplicities((4, 3, 3), 7)
    assert (m.up1_pair, m.up1, m.down1_pair, m.down1) == (0, 3, 3, 1)
    assert (m.up2_pair, m.up2, m.down2_pair, m.down2) == (1, 3, 3, 0)
    assert m.total == 14


def test_multiplicities_from_minus():
    m = flip_multiplicities((0, 0, 0), 4)
    assert m.up1 == m.up2 == 4 and m.total == 8


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_multiplicities_match_representatives(n):
    for c in enumerate_classes(n):
        s = representative(c, n)
        assert classify(s, n) == c
        seen = {m: 0 for m in MOVES}
        for v in range(2 * n):
            t = classify(flip(s, v), n)
            seen[next(m for m in MOVES if m.apply(c) == t)] += 1
        assert tuple(seen[m] for m in MOVES) == tuple(flip_multiplicities(c, n))


def test_class_flip_delta_examples():
    p = Params(3, 2, "0.5", "0")
    assert class_flip_delta((1, 0, 0), MoveType.UP1, p) == 1.0
    for c in [(1, 1, 0), (0, 1, 0), (0, 2, 0)]:
        diff = (class_flip_delta_exact(c, MoveType.UP1_PAIR, 3)
                - class_flip_delta_exact(c, MoveType.UP1, 3))
        assert diff == (0, -4, 0)


def test_zero_multiplicity_move_rejected():
    with pytest.raises(ParameterError):
        class_flip_delta_exact((3, 0, 0), MoveType.UP1, 3)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_class_flip_delta_is_energy_difference(n):
    for c in enumerate_classes(n):
        for move, mult, t in class_neighbors(c, n):
            d = class_flip_delta_exact(c, move, n)
            assert d == class_energy_exact(t, n) - class_energy_exact(c, n)
            back = next(m for m, _, u in class_neighbors(t, n) if u == c)
            assert class_flip_delta_exact(t, back, n) == -d


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 4 ** n - 1))))
def test_class_energy_matches_hamiltonian(cfg):
    n, bits = cfg
    s = SpinConfig(bits, 2 * n)
    g = build_graph(Params(n, 2, 0, 0))
    assert class_energy_exact(classify(s, n), n) == hamiltonian_exact(g, s)


# -- lumped chain ----------------------------------------------------------------

@pytest.mark.parametrize("n,eps,h,beta", [(2, "0.5", "0", 1.0), (4, "-0.3", "0.25", 3.0),
                                          (6, "1", "1", 0.5), (5, "-1", "0.5", 8.0)])
def test_lumped_chain_is_stochastic_and_reversible(n, eps, h, beta):
    ch = build_lumped_chain(n, Params(n, 2, eps, h), beta)
    P = ch.P.toarray()
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)
    assert (P >= 0).all()
    lw = ch.log_weights()
    i, j = np.nonzero(ch.offdiag.toarray())
    lhs = lw[i] + np.log(P[i, j])
    rhs = lw[j] + np.log(P[j, i])
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_lumped_chain_frozen_entries():
    # n=2, eps=1/2, h=0, beta=1; computed by hand from the multiplicities
    ch = build_lumped_chain(2, Params(2, 2, "0.5", "0"), 1.0)
    P = ch.P.toarray()
    i, j = ch.index[(0, 0, 0)], ch.index[(1, 0, 0)]
    assert P[i, j] == pytest.approx(2 / 4 * np.exp(-3.0))
    assert P[i, i] == pytest.approx(1 - np.exp(-3.0))
    k = ch.index[(1, 1, 0)]
    assert P[k, k] == 0.0


def test_lumped_chain_json_roundtrip():
    ch = build_lumped_chain(3, Params(3, 2, "0.5", "0.25"), 2.0)
    d = json.loads(ch.to_json())
    assert d["kind"] == "lumped_chain" and d["params"]["epsilon"] == "1/2"
    m = d["matrix"]
    assert len(m["row"]) == len(m["col"]) == len(m["val"])
    dense = np.zeros(m["shape"])
    dense[m["row"], m["col"]] = m["val"]
    assert np.allclose(dense, ch.P.toarray())
    assert d["sizes"] == [class_size(c, 3) for c in enumerate_classes(3)]


def test_exact_energies_are_rational():
    e = class_energy_exact((2, 1, 0), 3).exact(Fraction(3, 10), Fraction(1, 4))
    assert isinstance(e, Fraction)
    assert class_energy_exact((2, 1, 0), 3).exact(Fraction(3, 10), Fraction(1, 4)) == \
        hamiltonian_exact(build_graph(Params(3, 2, 0, 0)), representative((2, 1, 0), 3)).exact(
            Fraction(3, 10), Fraction(1, 4))
    assert hamiltonian(build_graph(Params(3, 2, 0, 0)), representative((2, 1, 0), 3),
                       Params(3, 2, 0, 0)) == class_energy((2, 1, 0), Params(3, 2, 0, 0))


def test_class_state_helpers():
    c = ClassState(3, 1, 1)
    assert c.mirror() == (1, 3, 1) and c.plus_count == 4
    assert MoveType.DOWN2_PAIR.apply(c) == (3, 0, 0)
