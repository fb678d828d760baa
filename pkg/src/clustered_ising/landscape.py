"""Closed-form landscape predictions for G(2, n).

All quantities are computed in exact rational arithmetic from ``n``,
``epsilon`` and ``h``.  Where two printed closed forms disagree, or where a
printed value is contradicted by the path energies it is derived from, the
report carries the adopted value together with every printed alternative.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .classes import (ClassState, NamedState, SCHEMA_VERSION, class_energy_exact,
                      move_between)
from .errors import ParameterError, RegimeError
from .model import Params

F = Fraction
PLUS, MINUS, PM, MP = NamedState.PLUS, NamedState.MINUS, NamedState.PM, NamedState.MP


class RegimeTag(Enum):
    H0_EPS_POS = "H0_EPS_POS"
    H0_EPS_ZERO = "H0_EPS_ZERO"
    H0_EPS_NEG = "H0_EPS_NEG"
    H_POS_EPS_NONNEG = "H_POS_EPS_NONNEG"
    H_POS_EPS_NEG_WEAK = "H_POS_EPS_NEG_WEAK"
    H_POS_EPS_NEG_EQ = "H_POS_EPS_NEG_EQ"
    H_POS_EPS_NEG_STRONG = "H_POS_EPS_NEG_STRONG"


def regime(params: Params) -> RegimeTag:
    eps, h = params.epsilon, params.h
    if h == 0:
        if eps > 0:
            return RegimeTag.H0_EPS_POS
        if eps == 0:
            return RegimeTag.H0_EPS_ZERO
        return RegimeTag.H0_EPS_NEG
    if eps >= 0:
        return RegimeTag.H_POS_EPS_NONNEG
    if -eps < h:
        return RegimeTag.H_POS_EPS_NEG_WEAK
    if -eps == h:
        return RegimeTag.H_POS_EPS_NEG_EQ
    return RegimeTag.H_POS_EPS_NEG_STRONG


def energy(c, params: Params) -> Fraction:
    return class_energy_exact(c, params.n).exact(params.epsilon, params.h)


def named_energy(s: NamedState, params: Params) -> Fraction:
    return energy(s.class_state(params.n), params)


@dataclass(frozen=True)
class Discrepancy:
    """Two printed statements, or a printed statement and its own derivation, disagree."""

    quantity: str
    adopted: object
    printed: dict
    note: str

    def to_json_dict(self) -> dict:
        return {"quantity": self.quantity, "adopted": _jsonable(self.adopted),
                "printed": {k: _jsonable(v) for k, v in self.printed.items()},
                "note": self.note}


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v) if v.denominator != 1 else int(v)
    if isinstance(v, NamedState):
        return v.value
    if isinstance(v, (list, tuple, set, frozenset)):
        items = [_jsonable(x) for x in v]
        return sorted(items, key=str) if isinstance(v, (set, frozenset)) else items
    return v


# ---------------------------------------------------------------------------
# stable and metastable states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateSets:
    stable: frozenset
    metastable: frozenset
    min_energy: Fraction
    printed_metastable: frozenset
    discrepancies: tuple = ()


def printed_state_sets(params: Params) -> tuple[frozenset, frozenset]:
    """Stable and metastable sets exactly as tabulated per regime."""
    r = regime(params)
    table = {
        RegimeTag.H0_EPS_POS: ({PLUS, MINUS}, {PM, MP}),
        RegimeTag.H0_EPS_ZERO: ({PLUS, MINUS, PM, MP}, set()),
        RegimeTag.H0_EPS_NEG: ({PM, MP}, {PLUS, MINUS}),
        RegimeTag.H_POS_EPS_NONNEG: ({PLUS}, {MINUS}),
        RegimeTag.H_POS_EPS_NEG_WEAK: ({PLUS}, {PM, MP}),
        RegimeTag.H_POS_EPS_NEG_EQ: ({PLUS, PM, MP}, {MINUS}),
        RegimeTag.H_POS_EPS_NEG_STRONG: ({PM, MP}, {PLUS}),
    }
    s, m = table[r]
    return frozenset(s), frozenset(m)


def identify_states(params: Params) -> StateSets:
    """Stable set, metastable set and minimum energy.

    At ``eps == 0 < h`` the two clusters decouple, so the barrier out of
    ``+-1`` (filling the second cluster) equals the barrier out of ``-1``
    (filling the first one); all three share the maximal stability level.
    The adopted metastable set reflects that and the tabulated ``{-1}`` is
    kept as a discrepancy.
    """
    params.require_two_clusters()
    n, eps, h = params.n, params.epsilon, params.h
    stable, meta = printed_state_sets(params)
    if h == 0:
        emin = -n * n + n - abs(eps) * n
    elif eps >= 0 or -eps < h:
        emin = -n * n + n - eps * n - 2 * h * n
    else:
        emin = -n * n + n + eps * n
    disc = []
    adopted_meta = meta
    if h > 0 and eps == 0:
        adopted_meta = frozenset({MINUS, PM, MP})
        disc.append(Discrepancy(
            "metastable_set", adopted_meta, {"tabulated": meta},
            "at eps=0 the clusters decouple and +-1, -+1 have the same "
            "stability level as -1"))
    elif h > 0 and h == -eps:
        from .oracle import ClassGraph  # class-level minimax, exact for -1

        if ClassGraph(params).stability_level(MINUS.class_state(n)) == 0:
            adopted_meta = frozenset()
            disc.append(Discrepancy(
                "metastable_set", adopted_meta, {"tabulated": meta},
                "on h=-eps the stability level of -1 vanishes here, so no "
                "state is metastable"))
    return StateSets(frozenset(stable), adopted_meta, F(emin), meta, tuple(disc))


# ---------------------------------------------------------------------------
# barriers
# ---------------------------------------------------------------------------

def _even(n: int) -> bool:
    return n % 2 == 0


def gamma_tunneling_h0(n: int, eps: Fraction) -> Fraction:
    if _even(n):
        return F(n * n, 2) + abs(eps) * n
    return F(n * n - 1, 2) + abs(eps) * (n + 1)


def gamma_meta_h0(n: int, eps: Fraction) -> Fraction:
    if _even(n):
        return F(n * n, 2) - abs(eps) * n
    return F(n * n - 1, 2) - abs(eps) * (n - 1)


def gamma_meta_nonneg(n: int, eps: Fraction, h: Fraction) -> Fraction:
    if _even(n):
        return F(n * n, 2) + n * (eps - h)
    if h <= eps:
        return F(n * n - 1, 2) + (n + 1) * (eps - h)
    return F(n * n - 1, 2) + (n - 1) * (eps - h)


def gamma_meta_weak(n: int, eps: Fraction, h: Fraction) -> Fraction:
    if _even(n):
        return F(n * n, 2) - n * (eps + h)
    return F(n * n - 1, 2) - (n - 1) * (eps + h)


def gamma_tunneling_strong_sweep(n: int, eps: Fraction, h: Fraction) -> Fraction:
    """Barrier of the sweep through -1 (the ``n(h-eps)`` form)."""
    d = h - eps
    if _even(n):
        if d < 1:
            return F(n * n, 2) + n * d
        return F(n * n - 4, 2) + (n + 2) * d
    return F(n * n - 1, 2) + (n + 1) * d


def gamma_tunneling_strong_plus(n: int, eps: Fraction, h: Fraction) -> Fraction:
    """Barrier of the route through +1 (the ``-n(eps+h)`` form)."""
    if _even(n):
        return F(n * n, 2) - n * (eps + h)
    return F(n * n - 1, 2) - (n + 1) * (eps + h)


def gamma_meta_strong(n: int, eps: Fraction, h: Fraction) -> Fraction:
    if _even(n):
        return F(n * n, 2) + n * (eps + h)
    return F(n * n - 1, 2) + (n - 1) * (eps + h)


@dataclass(frozen=True)
class GammaValues:
    gamma_s: Fraction | None
    gamma_m: Fraction | None
    gamma_s_label: str | None = None
    gamma_m_label: str | None = None
    discrepancies: tuple = ()


def gamma_values(params: Params) -> GammaValues:
    """Barrier closed forms for the regime and parity of ``n``.

    ``gamma_s`` is the stable-to-stable barrier (absent with a single
    stable state), ``gamma_m`` the metastable-to-stable barrier.  Both are
    absent at ``h == -eps``, where no value is stated.
    """
    params.require_two_clusters()
    n, eps, h = params.n, params.epsilon, params.h
    r = regime(params)
    if r in (RegimeTag.H0_EPS_POS, RegimeTag.H0_EPS_NEG, RegimeTag.H0_EPS_ZERO):
        gs = gamma_tunneling_h0(n, eps)
        gm = None if r is RegimeTag.H0_EPS_ZERO else gamma_meta_h0(n, eps)
        disc = Discrepancy(
            "gamma_s", gs,
            {"maximal-barrier corollary": gs,
             "metastable-identification display": gamma_meta_h0(n, eps)},
            "the second display repeats the metastable barrier; the corollary "
            "value matches the reference path and brute force")
        return GammaValues(gs, gm, "maximal-barrier corollary",
                           None if gm is None else "metastable barrier, h=0", (disc,))
    if r is RegimeTag.H_POS_EPS_NONNEG:
        return GammaValues(None, gamma_meta_nonneg(n, eps, h), None, "Gamma^1_m")
    if r is RegimeTag.H_POS_EPS_NEG_WEAK:
        return GammaValues(None, gamma_meta_weak(n, eps, h), None, "Gamma^2_m")
    if r is RegimeTag.H_POS_EPS_NEG_EQ:
        return GammaValues(None, None)
    sweep = gamma_tunneling_strong_sweep(n, eps, h)
    plus = gamma_tunneling_strong_plus(n, eps, h)
    disc = Discrepancy(
        "gamma_s", plus,
        {"Gamma^h_s definition": sweep, "maximal-barrier corollary": plus},
        "Gamma^h_s is the barrier of the sweep through -1; the route "
        "+-1 -> +1 -> -+1 is lower, which the corollary form captures")
    return GammaValues(plus, gamma_meta_strong(n, eps, h), "maximal-barrier corollary",
                       "metastable barrier, 0<h<-eps", (disc,))


# ---------------------------------------------------------------------------
# manifolds and critical slices
# ---------------------------------------------------------------------------

def manifold_minimum(p: int, params: Params) -> tuple[Fraction, list[ClassState]]:
    """Minimum energy over classes with ``p1 + p2 == p`` and the achieving classes."""
    params.require_two_clusters()
    n, eps, h = params.n, params.epsilon, params.h
    if not 0 <= p <= 2 * n:
        raise ParameterError(f"p must lie in [0, {2 * n}], got {p}")
    if p <= n:
        value = n - (p - n) ** 2 - p * p - eps * (n - 2 * p) - 2 * h * (p - n)
        cls = [ClassState(p, 0, 0), ClassState(0, p, 0)]
    else:
        value = (n - (2 * n - p) ** 2 - (p - n) ** 2 - eps * (2 * p - 3 * n)
                 - 2 * h * (p - n))
        cls = [ClassState(n, p - n, p - n), ClassState(p - n, n, p - n)]
    return F(value), sorted(set(cls))


def critical_slices(params: Params) -> dict[str, int]:
    """Critical plus-counts ``p*`` for the regime (empty where none is stated)."""
    params.require_two_clusters()
    n, eps, h = params.n, params.epsilon, params.h
    r = regime(params)
    even = _even(n)
    if r in (RegimeTag.H0_EPS_POS, RegimeTag.H0_EPS_ZERO, RegimeTag.H0_EPS_NEG):
        if even:
            return {"p_left": n // 2, "p_right": n + n // 2}
        if eps >= 0:
            return {"p_left": (n + 1) // 2, "p_right": n + (n - 1) // 2}
        return {"p_left": (n - 1) // 2, "p_right": n + (n + 1) // 2}
    if r is RegimeTag.H_POS_EPS_NONNEG:
        if even:
            return {"p1": n // 2}
        return {"p1": (n + 1) // 2 if h <= eps else (n - 1) // 2}
    if r is RegimeTag.H_POS_EPS_NEG_WEAK:
        return {"p2": 3 * n // 2 if even else (3 * n - 1) // 2}
    if r is RegimeTag.H_POS_EPS_NEG_STRONG:
        if even:
            return {"p3": n // 2 if h - eps < 1 else (n - 2) // 2}
        return {"p3": (n - 1) // 2}
    return {}


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateSet:
    label: str
    classes: tuple[ClassState, ...]
    transitions: tuple[tuple[NamedState, NamedState], ...]

    def to_json_dict(self) -> dict:
        return {"label": self.label, "classes": [list(c) for c in self.classes],
                "transitions": [[a.value, b.value] for a, b in self.transitions]}


def _left(k: int) -> list[ClassState]:
    return [ClassState(k, 0, 0), ClassState(0, k, 0)]


def _right(n: int, k: int) -> list[ClassState]:
    return [ClassState(n, k, k), ClassState(k, n, k)]


def _pairs(states) -> tuple:
    return tuple((a, b) for a in states for b in states if a != b)


def gate_set(params: Params) -> GateSet | None:
    """The tabulated gate for the regime, or ``None`` where no gate is stated."""
    params.require_two_clusters()
    n, eps, h = params.n, params.epsilon, params.h
    r = regime(params)
    stable, meta = printed_state_sets(params)
    order = [s for s in (MINUS, PLUS, PM, MP)]
    stable_l = [s for s in order if s in stable]
    if h == 0:
        if _even(n):
            k = n // 2
            cls, label = _left(k) + _right(n, k), "C*_even"
        elif eps >= 0:
            cls = _left((n + 1) // 2) + _right(n, (n - 1) // 2)
            label = "C*_odd"
        else:
            cls = _left((n - 1) // 2) + _right(n, (n + 1) // 2)
            label = "C*_odd"
        return GateSet(label, tuple(cls), _pairs(stable_l))
    if r is RegimeTag.H_POS_EPS_NONNEG:
        k = critical_slices(params)["p1"]
        return GateSet("C*_1", tuple(_left(k)), ((MINUS, PLUS),))
    if r is RegimeTag.H_POS_EPS_NEG_WEAK:
        k = (n - 1) // 2 if not _even(n) else n // 2
        return GateSet("C*_2", (ClassState(n, k, k),), ((PM, PLUS),))
    if r is RegimeTag.H_POS_EPS_NEG_STRONG:
        k = critical_slices(params)["p3"]
        return GateSet("C*_3", tuple(_left(k)), ((PM, MP), (MP, PM)))
    return None


def corrected_gate_strong(params: Params) -> GateSet | None:
    """Saddle classes of the optimal route ``+-1 -> +1 -> -+1`` for ``0 < h < -eps``."""
    if regime(params) is not RegimeTag.H_POS_EPS_NEG_STRONG:
        return None
    n = params.n
    k = n // 2 if _even(n) else (n + 1) // 2
    return GateSet("C(n,k,k) u C(k,n,k)", tuple(_right(n, k)), ((PM, MP), (MP, PM)))


# ---------------------------------------------------------------------------
# reference paths
# ---------------------------------------------------------------------------

class PathKind(Enum):
    BAR = "bar"        # -1 -> +1 filling cluster 1 then cluster 2
    HAT = "hat"        # +-1 -> +1 -> -+1
    CHECK = "check"    # +-1 -> -1 -> -+1
    TILDE = "tilde"    # +-1 -> +1


_PATH_REGIMES = {
    PathKind.BAR: {RegimeTag.H0_EPS_POS, RegimeTag.H0_EPS_ZERO, RegimeTag.H_POS_EPS_NONNEG},
    PathKind.HAT: {RegimeTag.H0_EPS_NEG, RegimeTag.H_POS_EPS_NEG_STRONG},
    PathKind.CHECK: {RegimeTag.H_POS_EPS_NEG_STRONG},
    PathKind.TILDE: {RegimeTag.H_POS_EPS_NEG_WEAK},
}


@dataclass(frozen=True)
class LemmaValue:
    indices: tuple[int, ...]
    value: Fraction
    printed_value: Fraction

    @property
    def printed_matches(self) -> bool:
        return self.value == self.printed_value


@dataclass(frozen=True)
class ReferencePath:
    kind: PathKind
    classes: tuple[ClassState, ...]
    energies: tuple[Fraction, ...]
    lemma: LemmaValue | None = None
    discrepancies: tuple = ()

    @property
    def max_energy(self) -> Fraction:
        return max(self.energies)

    @property
    def argmax(self) -> tuple[int, ...]:
        m = self.max_energy
        return tuple(i for i, e in enumerate(self.energies) if e == m)

    @property
    def start(self) -> ClassState:
        return self.classes[0]

    @property
    def barrier(self) -> Fraction:
        return self.max_energy - self.energies[0]

    def profile(self) -> list[tuple[ClassState, Fraction]]:
        return list(zip(self.classes, self.energies))

    def is_valid(self, n: int) -> bool:
        return all(move_between(a, b, n) is not None
                   for a, b in zip(self.classes, self.classes[1:]))


def _path_classes(kind: PathKind, n: int) -> list[ClassState]:
    r = range(n + 1)
    if kind is PathKind.BAR:
        return [ClassState(k, 0, 0) for k in r] + [ClassState(n, k, k) for k in r[1:]]
    if kind is PathKind.HAT:
        return [ClassState(n, k, k) for k in r] + [ClassState(n - k, n, n - k) for k in r[1:]]
    if kind is PathKind.CHECK:
        return [ClassState(n - k, 0, 0) for k in r] + [ClassState(0, k, 0) for k in r[1:]]
    return [ClassState(n, k, k) for k in r]


def _lemma(kind: PathKind, params: Params) -> tuple[LemmaValue | None, tuple]:
    """Tabulated argmax indices and maximum of a reference path."""
    n, eps, h = params.n, params.epsilon, params.h
    even = _even(n)
    half = F(n * n, 2)
    odd_c = F(n * n + 1, 2)
    if kind is PathKind.BAR and h == 0:
        if even:
            v = n - half
            return LemmaValue((n // 2, n + n // 2), v, v), ()
        v = n - odd_c + eps
        return LemmaValue(((n + 1) // 2, n + (n - 1) // 2), v, v), ()
    if kind is PathKind.BAR:
        if even:
            v = n - half + h * n
            return LemmaValue((n // 2,), v, v), ()
        if h <= eps:
            v = n - odd_c + eps + h * (n - 1)
            return LemmaValue(((n + 1) // 2,), v, v), ()
        v = n - odd_c - eps + h * (n + 1)
        return LemmaValue(((n - 1) // 2,), v, v), ()
    if kind is PathKind.HAT and h == 0:
        if even:
            printed = n - half - eps * n
            v = n - half
            d = Discrepancy("hat path maximum", v, {"lemma": printed},
                            "C(n,k,k) and C(k,0,0) have equal energy at h=0 after "
                            "eps -> -eps; the -eps*n term does not survive")
            return LemmaValue((n // 2, n + n // 2), v, printed), (d,)
        v = n - odd_c - eps
        return LemmaValue(((n + 1) // 2, n + (n - 1) // 2), v, v), ()
    if kind is PathKind.CHECK:
        if even and h - eps < 1:
            v = n - half + h * n
            return LemmaValue((n // 2, n + n // 2), v, v), ()
        if even:
            v = n - half - 2 * (eps + 1) + h * (n + 2)
            return LemmaValue(((n + 2) // 2, n + (n - 2) // 2), v, v), ()
        v = n - odd_c - eps + h * (n + 1)
        return LemmaValue(((n + 1) // 2, n + (n - 1) // 2), v, v), ()
    if kind is PathKind.TILDE:
        if even:
            v = n - half - h * n
            return LemmaValue((n // 2,), v, v), ()
        v = n - odd_c + eps - h * (n - 1)
        return LemmaValue(((n - 1) // 2,), v, v), ()
    return None, ()


def reference_path(params: Params, kind: PathKind | str) -> ReferencePath:
    """Build a reference path with exact energies and its tabulated maximum."""
    params.require_two_clusters()
    kind = PathKind(kind) if not isinstance(kind, PathKind) else kind
    r = regime(params)
    if r not in _PATH_REGIMES[kind]:
        raise RegimeError(f"path {kind.value!r} is not defined in regime {r.value}")
    cls = _path_classes(kind, params.n)
    lemma, disc = _lemma(kind, params)
    return ReferencePath(kind, tuple(cls), tuple(energy(c, params) for c in cls),
                         lemma, disc)


def optimal_path_kind(params: Params) -> PathKind | None:
    r = regime(params)
    if r in (RegimeTag.H0_EPS_POS, RegimeTag.H0_EPS_ZERO, RegimeTag.H_POS_EPS_NONNEG):
        return PathKind.BAR
    if r in (RegimeTag.H0_EPS_NEG, RegimeTag.H_POS_EPS_NEG_STRONG):
        return PathKind.HAT
    if r is RegimeTag.H_POS_EPS_NEG_WEAK:
        return PathKind.TILDE
    return None


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LandscapeReport:
    params: Params
    regime: RegimeTag
    stable_set: tuple[NamedState, ...]
    metastable_set: tuple[NamedState, ...]
    min_energy: Fraction
    gamma_s: Fraction | None
    gamma_m: Fraction | None
    critical_slices: dict
    gate: GateSet | None
    corrected_gate: GateSet | None
    reference_path: ReferencePath | None
    discrepancies: tuple = ()
    notes: tuple = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        rp = self.reference_path
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "landscape_report",
            "params": self.params.as_dict(),
            "regime": self.regime.value,
            "stable_set": [s.value for s in self.stable_set],
            "metastable_set": [s.value for s in self.metastable_set],
            "min_energy": _jsonable(self.min_energy),
            "gamma_s": None if self.gamma_s is None else _jsonable(self.gamma_s),
            "gamma_m": None if self.gamma_m is None else _jsonable(self.gamma_m),
            "critical_slices": dict(self.critical_slices),
            "gate": None if self.gate is None else self.gate.to_json_dict(),
            "corrected_gate": (None if self.corrected_gate is None
                               else self.corrected_gate.to_json_dict()),
            "reference_path": None if rp is None else {
                "kind": rp.kind.value,
                "profile": [{"class": list(c), "energy": _jsonable(e)}
                            for c, e in rp.profile()],
                "argmax": list(rp.argmax),
                "max_energy": _jsonable(rp.max_energy),
            },
            "discrepancies": [d.to_json_dict() for d in self.discrepancies],
            "notes": list(self.notes),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    def render_table(self) -> str:
        def fmt(x):
            return "-" if x is None else str(_jsonable(x))

        def names(ss):
            return "{" + ", ".join(s.value for s in ss) + "}"

        rows = [
            ("regime", self.regime.value),
            ("stable", names(self.stable_set)),
            ("metastable", names(self.metastable_set)),
            ("min energy", fmt(self.min_energy)),
            ("Gamma_s", fmt(self.gamma_s)),
            ("Gamma_m", fmt(self.gamma_m)),
            ("critical slices", ", ".join(f"{k}={v}" for k, v in self.critical_slices.items()) or "-"),
            ("gate", "-" if self.gate is None else
             f"{self.gate.label} " + " ".join(str(tuple(c)) for c in self.gate.classes)),
        ]
        if self.corrected_gate is not None:
            rows.append(("corrected gate", " ".join(str(tuple(c)) for c in self.corrected_gate.classes)))
        if self.reference_path is not None:
            rp = self.reference_path
            rows.append((f"path {rp.kind.value} max", f"{fmt(rp.max_energy)} at {list(rp.argmax)}"))
        for d in self.discrepancies:
            alt = "; ".join(f"{k}: {_jsonable(v)}" for k, v in d.printed.items())
            rows.append((f"discrepancy {d.quantity}", f"adopted {_jsonable(d.adopted)} ({alt})"))
        for note in self.notes:
            rows.append(("note", note))
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows)


def analyze(params: Params) -> LandscapeReport:
    """Assemble every closed-form prediction for ``params``."""
    params.require_two_clusters()
    r = regime(params)
    states = identify_states(params)
    gam = gamma_values(params)
    kind = optimal_path_kind(params)
    rp = reference_path(params, kind) if kind is not None else None
    notes = []
    if r is RegimeTag.H_POS_EPS_NEG_EQ:
        notes.append("boundary h = -eps: barriers and gate not stated")
    if r is RegimeTag.H0_EPS_ZERO:
        notes.append("eps = 0, h = 0: no metastable state")
    disc = list(states.discrepancies) + list(gam.discrepancies)
    if rp is not None:
        disc.extend(rp.discrepancies)
    corrected = corrected_gate_strong(params)
    if corrected is not None:
        disc.append(Discrepancy(
            "gate", [list(c) for c in corrected.classes],
            {"C*_3": [list(c) for c in gate_set(params).classes]},
            "optimal paths run through +1; the tabulated classes lie on the "
            "higher sweep through -1"))
    order = (PLUS, MINUS, PM, MP)
    return LandscapeReport(
        params=params, regime=r,
        stable_set=tuple(s for s in order if s in states.stable),
        metastable_set=tuple(s for s in order if s in states.metastable),
        min_energy=states.min_energy,
        gamma_s=gam.gamma_s, gamma_m=gam.gamma_m,
        critical_slices=critical_slices(params),
        gate=gate_set(params), corrected_gate=corrected,
        reference_path=rp, discrepancies=tuple(disc), notes=tuple(notes),
    )
