"""Definition-level brute force over all configurations of G(2, n).

Energies are held as integers ``den * H`` so every comparison is exact.
Communication heights come from a union-find sweep over states sorted by
energy; saddles and gate checks from breadth-first search inside sublevel
sets.  A class-level minimax search (``ClassGraph``) gives an independent
route to the same heights for named endpoints at any ``n``.
"""
from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .classes import (MOVES, SCHEMA_VERSION, ClassState, MoveType, NamedState,
                      check_class, class_energy_exact, class_flip_delta_exact,
                      class_neighbors, classify, enumerate_classes,
                      flip_multiplicities, named_of)
from .errors import CapacityError, ParameterError
from .exact import scaled_energies
from .model import Params, SpinConfig, energy_coefficients

DEFAULT_N_MAX = 5
FULL_MATRIX_N_MAX = 4


class _UnionFind:
    def __init__(self, size: int, key):
        self.parent = list(range(size))
        self.low = list(key)  # lowest energy in each component

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            if self.low[rb] < self.low[ra]:
                self.low[ra] = self.low[rb]


class StateGraph:
    """All ``4**n`` configurations with single-flip adjacency and exact energies."""

    def __init__(self, params: Params, n_max: int = DEFAULT_N_MAX):
        params.require_two_clusters()
        if params.n > n_max:
            raise CapacityError(f"n={params.n} exceeds oracle capacity n_max={n_max}")
        self.params = params
        self.n = params.n
        self.size = 2 * self.n
        self.num_states = 1 << self.size
        self.coefs = energy_coefficients(self.n)
        scaled, self.den = scaled_energies(self.coefs, params.epsilon, params.h)
        self.E = [int(x) for x in scaled]
        b = np.arange(self.num_states)
        mask = (1 << self.n) - 1
        lo, hi = b & mask, b >> self.n
        pc = np.array([bin(i).count("1") for i in range(1 << self.n)])
        self.cls = np.stack([pc[lo], pc[hi], pc[lo & hi]], axis=1)
        self.order = sorted(range(self.num_states), key=self.E.__getitem__)

    # -- basic accessors ----------------------------------------------------
    def neighbors(self, s: int) -> list[int]:
        return [s ^ (1 << v) for v in range(self.size)]

    def energy(self, s: int) -> Fraction:
        return Fraction(self.E[s], self.den)

    def class_of(self, s: int) -> ClassState:
        return ClassState(*map(int, self.cls[s]))

    def states_of(self, classes: Iterable) -> set[int]:
        want = {tuple(c) for c in classes}
        return {s for s in range(self.num_states) if tuple(self.cls[s]) in want}

    def named(self, s: NamedState) -> int:
        return s.config(self.n).bits

    def _state(self, x) -> int:
        if isinstance(x, NamedState):
            return self.named(x)
        if isinstance(x, SpinConfig):
            return x.bits
        return int(x)

    # -- sweeps ---------------------------------------------------------------
    def _levels(self):
        """Insert states by increasing energy; yield ``(level, uf, inserted)``."""
        uf = _UnionFind(self.num_states, self.E)
        inserted = [False] * self.num_states
        E, order = self.E, self.order
        i, N = 0, self.num_states
        while i < N:
            level = E[order[i]]
            j = i
            while j < N and E[order[j]] == level:
                inserted[order[j]] = True
                j += 1
            for s in order[i:j]:
                for t in self.neighbors(s):
                    if inserted[t]:
                        uf.union(s, t)
            yield level, uf, inserted, order[i:j]
            i = j

    def _phi_scaled(self, a: int, targets: set[int]) -> int | None:
        if a in targets:
            return self.E[a]
        for level, uf, inserted, _ in self._levels():
            if not inserted[a]:
                continue
            ra = uf.find(a)
            if any(inserted[t] and uf.find(t) == ra for t in targets):
                return level
        return None

    def communication_height(self, eta, eta_prime) -> Fraction:
        """Min over paths of the max energy along the path."""
        a, b = self._state(eta), self._state(eta_prime)
        return Fraction(self._phi_scaled(a, {b}), self.den)

    def communication_height_to_set(self, eta, targets) -> Fraction:
        a = self._state(eta)
        return Fraction(self._phi_scaled(a, {self._state(t) for t in targets}), self.den)

    def stability_levels(self) -> list[Fraction | None]:
        """V per state; ``None`` stands for an infinite level (global minima)."""
        V: list[Fraction | None] = [None] * self.num_states
        pending: list[int] = []
        for level, uf, _, new in self._levels():
            pending.extend(new)
            keep = []
            for s in pending:
                if uf.low[uf.find(s)] < self.E[s]:
                    V[s] = Fraction(level - self.E[s], self.den)
                else:
                    keep.append(s)
            pending = keep
        return V

    def stability_level(self, sigma) -> Fraction | None:
        s = self._state(sigma)
        below = {t for t in range(self.num_states) if self.E[t] < self.E[s]}
        if not below:
            return None
        return Fraction(self._phi_scaled(s, below) - self.E[s], self.den)

    # -- sublevel searches -------------------------------------------------
    def _component(self, a: int, cap: int, removed: set[int] = frozenset()) -> dict[int, int]:
        """BFS tree (child -> parent) of ``a`` inside ``{E <= cap} minus removed``."""
        if self.E[a] > cap or a in removed:
            return {}
        parent = {a: -1}
        q = deque([a])
        while q:
            s = q.popleft()
            for t in self.neighbors(s):
                if t not in parent and self.E[t] <= cap and t not in removed:
                    parent[t] = s
                    q.append(t)
        return parent

    @staticmethod
    def _trace(parent: dict[int, int], b: int) -> list[int]:
        path = [b]
        while parent[path[-1]] != -1:
            path.append(parent[path[-1]])
        return path[::-1]

    def minimal_saddles(self, eta, eta_prime) -> set[int]:
        """States at height Phi lying in the component of ``eta`` in ``{H <= Phi}``.

        Paths may revisit states, so every such state lies on some optimal path.
        """
        a, b = self._state(eta), self._state(eta_prime)
        phi = self._phi_scaled(a, {b})
        comp = self._component(a, phi)
        return {s for s in comp if self.E[s] == phi}

    def saddle_classes(self, eta, eta_prime) -> list[ClassState]:
        return sorted({self.class_of(s) for s in self.minimal_saddles(eta, eta_prime)})

    def optimal_path(self, eta, eta_prime, removed: set[int] = frozenset()) -> list[int] | None:
        a, b = self._state(eta), self._state(eta_prime)
        phi = self._phi_scaled(a, {b})
        parent = self._component(a, phi, removed)
        return self._trace(parent, b) if b in parent else None

    def verify_gate(self, eta, eta_prime, W: Iterable) -> "GateVerdict":
        """Check that ``W`` is a gate for ``eta -> eta_prime``.

        TRUE iff every configuration of ``W`` is a minimal saddle and removing
        them from the sublevel graph disconnects the endpoints.
        """
        a, b = self._state(eta), self._state(eta_prime)
        W = sorted({check_class(c, self.n) for c in W})
        phi = self._phi_scaled(a, {b})
        comp = self._component(a, phi)
        saddles = {s for s in comp if self.E[s] == phi}
        wstates = self.states_of(W)
        outside = sorted({self.class_of(s) for s in wstates - saddles})
        parent = self._component(a, phi, wstates)
        disconnects = b not in parent
        witness = None if disconnects else [list(self.class_of(s)) for s in self._trace(parent, b)]
        minimal = None
        if disconnects and not outside:
            minimal = all(b in self._component(a, phi, self.states_of([c for c in W if c != d]))
                          for d in W)
        return GateVerdict(
            is_gate=disconnects and not outside, subset_of_saddles=not outside,
            disconnects=disconnects, minimal=minimal, phi=Fraction(phi, self.den),
            witness=witness, classes_not_saddles=[list(c) for c in outside],
            saddle_classes=[list(c) for c in sorted({self.class_of(s) for s in saddles})],
        )

    # -- definition-level state sets -----------------------------------------
    def stable_states(self) -> set[int]:
        m = min(self.E)
        return {s for s in range(self.num_states) if self.E[s] == m}

    def metastable_states(self, levels=None) -> tuple[set[int], Fraction | None]:
        """Non-stable states of maximal stability level.

        A maximal level of zero means no state is trapped at all, and the set
        is reported empty.
        """
        V = self.stability_levels() if levels is None else levels
        finite = [v for v in V if v is not None]
        if not finite:
            return set(), None
        top = max(finite)
        if top == 0:
            return set(), top
        return {s for s, v in enumerate(V) if v == top}, top


class GateVerdict(NamedTuple):
    is_gate: bool
    subset_of_saddles: bool
    disconnects: bool
    minimal: bool | None
    phi: Fraction
    witness: list | None
    classes_not_saddles: list
    saddle_classes: list

    def to_json_dict(self) -> dict:
        d = self._asdict()
        d["phi"] = float(self.phi)
        return d


def named_set(graph: StateGraph, states: set[int]) -> tuple[set[NamedState], set[int]]:
    """Split a state set into named states and the rest."""
    names, rest = set(), set()
    for s in states:
        nm = named_of(graph.class_of(s), graph.n)
        (names.add(nm) if nm is not None else rest.add(s))
    return names, rest


# ---------------------------------------------------------------------------
# class-level minimax (independent route, any n)
# ---------------------------------------------------------------------------

class ClassGraph:
    """Minimax search on the class graph.

    A class path lifts to a configuration path through any starting
    configuration, so for singleton endpoints (the named states) the
    class-level communication height equals the configuration-level one.
    """

    def __init__(self, params: Params):
        params.require_two_clusters()
        self.params = params
        self.n = params.n
        self.classes = enumerate_classes(self.n)
        self.E = {c: class_energy_exact(c, self.n).exact(params.epsilon, params.h)
                  for c in self.classes}

    def _minimax(self, a: ClassState, cap=None):
        best = {a: self.E[a]}
        heap = [(self.E[a], a)]
        while heap:
            h, c = heapq.heappop(heap)
            if h > best[c]:
                continue
            for _, _, t in class_neighbors(c, self.n):
                ht = max(h, self.E[t])
                if (cap is None or ht <= cap) and ht < best.get(t, ht + 1):
                    best[t] = ht
                    heapq.heappush(heap, (ht, t))
        return best

    def communication_height(self, a, b) -> Fraction:
        a, b = ClassState(*a), ClassState(*b)
        return self._minimax(a)[b]

    def saddle_classes(self, a, b) -> list[ClassState]:
        phi = self.communication_height(a, b)
        reach = self._minimax(ClassState(*a), cap=phi)
        return sorted(c for c in reach if self.E[c] == phi)

    def stability_level(self, c) -> Fraction | None:
        c = ClassState(*c)
        best = self._minimax(c)
        lower = [best[d] for d in best if self.E[d] < self.E[c]]
        return None if not lower else min(lower) - self.E[c]


# ---------------------------------------------------------------------------
# descent moves
# ---------------------------------------------------------------------------

class Descent(NamedTuple):
    move: MoveType
    case: str
    fallback: bool


def class_descent_move(c, params: Params) -> Descent | None:
    """A strictly downhill move chosen by the three-case analysis on (p1, p2, a).

    Case A: cluster 1 full.  Case B: a above its lower bound, so cluster 1
    has a minus vertex with a minus twin.  Case C: a at its lower bound.
    If the case's move is not strictly downhill, the steepest strictly
    downhill move is returned with ``fallback=True``.
    """
    params.require_two_clusters()
    n = params.n
    c = check_class(c, n)
    p1, p2, a = c
    mult = flip_multiplicities(c, n)

    def delta(m: MoveType):
        if mult.of(m) == 0:
            return None
        return class_flip_delta_exact(c, m, n).exact(params.epsilon, params.h)

    def downhill(m: MoveType) -> bool:
        d = delta(m)
        return d is not None and d < 0

    def pick(*moves):
        for m in moves:
            if downhill(m):
                return m
        return None

    lo = max(0, p1 + p2 - n)
    if p1 == n:
        case = "A"
        chosen = pick(MoveType.UP2_PAIR, MoveType.DOWN2_PAIR) if 0 < p2 < n else None
    elif a > lo:
        case = "B"
        chosen = pick(MoveType.UP1) or (pick(MoveType.DOWN1) if p1 > p2 else pick(MoveType.DOWN1_PAIR))
    else:
        case = "C"
        if p2 == n:
            chosen = pick(MoveType.UP1_PAIR, MoveType.DOWN1_PAIR) if 0 < p1 < n else None
        else:
            chosen = (pick(MoveType.UP1_PAIR, MoveType.UP2_PAIR)
                      or pick(MoveType.DOWN1 if p1 > 0 else MoveType.DOWN2))
    if chosen is not None:
        return Descent(chosen, case, False)
    options = [(delta(m), i, m) for i, m in enumerate(MOVES) if downhill(m)]
    if not options:
        return None
    return Descent(min(options)[2], case, True)


def vertex_for_move(sigma: SpinConfig, move: MoveType, n: int) -> int:
    """Lowest vertex id realising ``move`` from ``sigma``."""
    s = sigma.spins
    mine, twin = (s[:n], s[n:]) if move.cluster == 1 else (s[n:], s[:n])
    want = -move.direction
    for i in range(n):
        if mine[i] != want:
            continue
        # the pair count changes exactly when the twin is plus
        if (twin[i] == 1) != move.changes_a:
            continue
        return i if move.cluster == 1 else n + i
    raise ParameterError(f"no vertex realises {move.name}")


def descent_move(sigma: SpinConfig, params: Params) -> int | None:
    """Vertex whose flip strictly lowers the energy, or ``None``."""
    n = params.n
    d = class_descent_move(classify(sigma, n), params)
    return None if d is None else vertex_for_move(sigma, d.move, n)


# ---------------------------------------------------------------------------
# full transition matrix
# ---------------------------------------------------------------------------

def full_offdiag(params: Params, beta: float | None = None) -> np.ndarray:
    """Dense off-diagonal Metropolis probabilities over all configurations."""
    params.require_two_clusters()
    if params.n > FULL_MATRIX_N_MAX:
        raise CapacityError(f"full matrix needs n <= {FULL_MATRIX_N_MAX}, got n={params.n}")
    beta = params.beta if beta is None else float(beta)
    n = params.n
    coefs = energy_coefficients(n)
    e = coefs[:, 0] + coefs[:, 1] * float(params.epsilon) + coefs[:, 2] * float(params.h)
    N = len(e)
    s = np.arange(N)
    Q = np.zeros((N, N))
    for v in range(2 * n):
        t = s ^ (1 << v)
        Q[s, t] = np.exp(-beta * np.maximum(e[t] - e[s], 0.0)) / (2 * n)
    return Q


def full_transition_matrix(params: Params, beta: float | None = None) -> np.ndarray:
    """Row-stochastic Metropolis matrix over all ``4**n`` configurations."""
    Q = full_offdiag(params, beta)
    Q[np.diag_indices_from(Q)] = 1.0 - Q.sum(axis=1)
    return Q


def full_gibbs(params: Params, beta: float | None = None) -> np.ndarray:
    beta = params.beta if beta is None else float(beta)
    coefs = energy_coefficients(params.n)
    e = coefs[:, 0] + coefs[:, 1] * float(params.epsilon) + coefs[:, 2] * float(params.h)
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


def state_classes(n: int) -> np.ndarray:
    """Index into ``enumerate_classes(n)`` for every configuration."""
    index = {c: i for i, c in enumerate(enumerate_classes(n))}
    return np.array([index[classify(SpinConfig(b, 2 * n), n)] for b in range(1 << (2 * n))])


def project_matrix(P: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """Class-to-class matrix from a full matrix and the largest within-class spread.

    A spread of zero means every configuration of a class sends the same
    mass to each class (strong lumpability).
    """
    idx = state_classes(n)
    K = idx.max() + 1
    ind = np.zeros((len(idx), K))
    ind[np.arange(len(idx)), idx] = 1.0
    M = P @ ind
    out = np.zeros((K, K))
    spread = 0.0
    for c in range(K):
        rows = M[idx == c]
        out[c] = rows.mean(axis=0)
        spread = max(spread, float(np.max(rows.max(axis=0) - rows.min(axis=0))))
    return out, spread


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class OracleReport:
    params: Params
    phi: dict = field(default_factory=dict)
    stability_levels: dict = field(default_factory=dict)
    stable: list = field(default_factory=list)
    metastable: list = field(default_factory=list)
    saddles: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json_dict(self) -> dict:
        def num(x):
            return "infinite" if x is None else float(x)

        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "oracle_report",
            "params": self.params.as_dict(),
            "phi": {k: num(v) for k, v in self.phi.items()},
            "stability_levels": {k: num(v) for k, v in self.stability_levels.items()},
            "stable": self.stable,
            "metastable": self.metastable,
            "saddles": self.saddles,
            "verdicts": {k: v.to_json_dict() for k, v in self.verdicts.items()},
            "checks": self.checks,
            "passed": self.passed,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, default=str)


def oracle_report(params: Params, n_max: int = DEFAULT_N_MAX) -> OracleReport:
    """Definition-level quantities for the named states of ``params``."""
    g = StateGraph(params, n_max)
    V = g.stability_levels()
    rep = OracleReport(params)
    named = (NamedState.PLUS, NamedState.MINUS, NamedState.PM, NamedState.MP)
    for a in named:
        for b in named:
            if a != b:
                rep.phi[f"{a.value}->{b.value}"] = g.communication_height(a, b)
    seen = {}
    for s in range(g.num_states):
        seen.setdefault(g.class_of(s), V[s])
    rep.stability_levels = {str(tuple(c)): v for c, v in sorted(seen.items())}
    rep.stable = sorted({str(tuple(g.class_of(s))) for s in g.stable_states()})
    meta, _ = g.metastable_states(V)
    rep.metastable = sorted({str(tuple(g.class_of(s))) for s in meta})
    return rep
