"""Symmetry classes C(p1, p2, a) on G(2, n) and the lumped Metropolis chain.

A configuration is summarised by the plus counts ``p1``, ``p2`` in the two
clusters and the number ``a`` of plus-plus cross edges.  All configurations
in a class share one energy, and the Metropolis chain projected onto
classes is again Markov (strong lumpability under twin-pair permutations).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from math import comb
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .exact import Affine
from .model import Params, SpinConfig

SCHEMA_VERSION = "1.0"


class ClassState(NamedTuple):
    p1: int
    p2: int
    a: int

    def is_valid(self, n: int) -> bool:
        return (0 <= self.p1 <= n and 0 <= self.p2 <= n
                and max(0, self.p1 + self.p2 - n) <= self.a <= min(self.p1, self.p2))

    def mirror(self) -> "ClassState":
        """Swap the roles of the two clusters."""
        return ClassState(self.p2, self.p1, self.a)

    @property
    def plus_count(self) -> int:
        return self.p1 + self.p2


def check_class(c, n: int) -> ClassState:
    c = ClassState(*c)
    if not c.is_valid(n):
        raise ParameterError(f"{tuple(c)} is not a valid class for n={n}")
    return c


class NamedState(Enum):
    PLUS = "+1"
    MINUS = "-1"
    PM = "+-1"
    MP = "-+1"

    def class_state(self, n: int) -> ClassState:
        return {
            NamedState.PLUS: ClassState(n, n, n),
            NamedState.MINUS: ClassState(0, 0, 0),
            NamedState.PM: ClassState(n, 0, 0),
            NamedState.MP: ClassState(0, n, 0),
        }[self]

    def config(self, n: int) -> SpinConfig:
        c = self.class_state(n)
        return representative(c, n)

    @classmethod
    def parse(cls, text: str) -> "NamedState":
        key = text.strip().replace("±", "+-").replace("∓", "-+").replace("−", "-")
        aliases = {"+1": cls.PLUS, "plus": cls.PLUS, "-1": cls.MINUS, "minus": cls.MINUS,
                   "+-1": cls.PM, "pm": cls.PM, "-+1": cls.MP, "mp": cls.MP}
        try:
            return aliases[key.lower()]
        except KeyError:
            raise ParameterError(f"unknown named state {text!r}") from None


NAMED_ORDER = (NamedState.PLUS, NamedState.MINUS, NamedState.PM, NamedState.MP)


def named_of(c: ClassState, n: int) -> NamedState | None:
    for s in NAMED_ORDER:
        if s.class_state(n) == tuple(c):
            return s
    return None


# ---------------------------------------------------------------------------
# enumeration, sizes, energies
# ---------------------------------------------------------------------------

def enumerate_classes(n: int) -> list[ClassState]:
    """All valid classes for cluster size ``n`` in lexicographic order."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    return [ClassState(p1, p2, a)
            for p1 in range(n + 1) for p2 in range(n + 1)
            for a in range(max(0, p1 + p2 - n), min(p1, p2) + 1)]


def class_size(c, n: int) -> int:
    """Number of configurations in C(p1, p2, a)."""
    p1, p2, a = check_class(c, n)
    return comb(n, p1) * comb(p1, a) * comb(n - p1, p2 - a)


def class_energy_exact(c, n: int) -> Affine:
    """H on C(p1, p2, a) as integer coefficients of (1, eps, h).

    n - eps*n - 2(p1-n/2)^2 - 2(p2-n/2)^2 - 2 eps (2a-p1-p2) - 2h(p1+p2-n)
    """
    p1, p2, a = check_class(c, n)
    d1, d2 = 2 * p1 - n, 2 * p2 - n
    return Affine(n - (d1 * d1 + d2 * d2) // 2,
                  -n - 2 * (2 * a - p1 - p2),
                  -2 * (p1 + p2 - n))


def class_energy(c, params: Params) -> float:
    return class_energy_exact(c, params.n).value(params.epsilon, params.h)


def classify(sigma: SpinConfig, n: int | None = None) -> ClassState:
    """Class of a configuration on G(2, n)."""
    if n is None:
        if sigma.size % 2:
            raise ParameterError("classify requires k = 2")
        n = sigma.size // 2
    if sigma.size != 2 * n:
        raise ParameterError("classify requires k = 2")
    mask = (1 << n) - 1
    b1, b2 = sigma.bits & mask, sigma.bits >> n
    return ClassState(b1.bit_count(), b2.bit_count(), (b1 & b2).bit_count())


def representative(c, n: int) -> SpinConfig:
    """A canonical configuration of class ``c``.

    Pair index ``i`` holds a plus-plus pair for ``i < a``, then plus-minus
    pairs, then minus-plus pairs, then minus-minus pairs.
    """
    p1, p2, a = check_class(c, n)
    bits = 0
    for i in range(p1):
        bits |= 1 << i
    for i in range(a):
        bits |= 1 << (n + i)
    for i in range(p1, p1 + p2 - a):
        bits |= 1 << (n + i)
    return SpinConfig(bits, 2 * n)


# ---------------------------------------------------------------------------
# moves
# ---------------------------------------------------------------------------

class MoveType(Enum):
    """Single-flip moves: cluster, direction, and whether ``a`` changes."""

    UP1_PAIR = (1, +1, True)
    UP1 = (1, +1, False)
    DOWN1_PAIR = (1, -1, True)
    DOWN1 = (1, -1, False)
    UP2_PAIR = (2, +1, True)
    UP2 = (2, +1, False)
    DOWN2_PAIR = (2, -1, True)
    DOWN2 = (2, -1, False)

    @property
    def cluster(self) -> int:
        return self.value[0]

    @property
    def direction(self) -> int:
        return self.value[1]

    @property
    def changes_a(self) -> bool:
        return self.value[2]

    def apply(self, c: ClassState) -> ClassState:
        p1, p2, a = c
        da = self.direction if self.changes_a else 0
        if self.cluster == 1:
            return ClassState(p1 + self.direction, p2, a + da)
        return ClassState(p1, p2 + self.direction, a + da)


MOVES = tuple(MoveType)


class FlipMultiplicities(NamedTuple):
    up1_pair: int
    up1: int
    down1_pair: int
    down1: int
    up2_pair: int
    up2: int
    down2_pair: int
    down2: int

    def of(self, move: MoveType) -> int:
        return self[MOVES.index(move)]

    @property
    def total(self) -> int:
        return sum(self)


def flip_multiplicities(c, n: int) -> FlipMultiplicities:
    """Number of vertices realising each move type from class ``c``."""
    p1, p2, a = check_class(c, n)
    return FlipMultiplicities(
        p2 - a, n - p1 - (p2 - a), a, p1 - a,
        p1 - a, n - p2 - (p1 - a), a, p2 - a,
    )


def class_flip_delta_exact(c, move: MoveType, n: int) -> Affine:
    """Energy change of ``move`` from class ``c`` from the closed-form flip rules.

    Up-flip in cluster i with plus count p:   2(n-1-2p +- eps - h)
    Down-flip in cluster i with plus count p: -2(n+1-2p +- eps - h)
    with ``+eps`` when ``a`` is unchanged and ``-eps`` when it changes.
    """
    c = check_class(c, n)
    if flip_multiplicities(c, n).of(move) == 0:
        raise ParameterError(f"move {move.name} has zero multiplicity from {tuple(c)}")
    p = c.p1 if move.cluster == 1 else c.p2
    e = -1 if move.changes_a else 1
    if move.direction > 0:
        return Affine(2 * (n - 1 - 2 * p), 2 * e, -2)
    return Affine(-2 * (n + 1 - 2 * p), -2 * e, 2)


def class_flip_delta(c, move: MoveType, params: Params) -> float:
    return class_flip_delta_exact(c, move, params.n).value(params.epsilon, params.h)


def class_neighbors(c: ClassState, n: int):
    """Yield ``(move, multiplicity, target)`` for moves of positive multiplicity."""
    mult = flip_multiplicities(c, n)
    for move, m in zip(MOVES, mult):
        if m:
            yield move, m, move.apply(c)


def move_between(c: ClassState, d: ClassState, n: int) -> MoveType | None:
    for move, _, t in class_neighbors(c, n):
        if t == d:
            return move
    return None


# ---------------------------------------------------------------------------
# lumped chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LumpedChain:
    """Exact Metropolis chain on classes at inverse temperature ``beta``.

    ``P[i, j] = (mult / 2n) * exp(-beta * [dH]_+)`` off the diagonal; the
    diagonal carries the rejected mass.  ``offdiag`` holds the same matrix
    without its diagonal, so escape probabilities ``1 - P[i, i]`` can be
    formed as sums rather than differences.
    """

    params: Params
    beta: float
    classes: tuple[ClassState, ...]
    sizes: tuple[int, ...]
    energies: tuple[Affine, ...]
    offdiag: sp.csr_matrix = field(repr=False)

    @property
    def n(self) -> int:
        return self.params.n

    def __len__(self) -> int:
        return len(self.classes)

    @cached_property
    def index(self) -> dict[ClassState, int]:
        return {c: i for i, c in enumerate(self.classes)}

    @cached_property
    def escape(self) -> np.ndarray:
        """``1 - P[i, i]`` computed without cancellation."""
        return np.asarray(self.offdiag.sum(axis=1)).ravel()

    @cached_property
    def P(self) -> sp.csr_matrix:
        return (self.offdiag + sp.diags(1.0 - self.escape)).tocsr()

    @cached_property
    def energy_values(self) -> np.ndarray:
        return np.array([e.value(self.params.epsilon, self.params.h) for e in self.energies])

    def log_weights(self) -> np.ndarray:
        """log |C| - beta H, unnormalised."""
        return np.log(np.array(self.sizes, dtype=float)) - self.beta * self.energy_values

    def stationary(self) -> np.ndarray:
        """Class-size weighted Gibbs vector, normalised."""
        lw = self.log_weights()
        w = np.exp(lw - lw.max())
        return w / w.sum()

    def to_json_dict(self) -> dict:
        coo = self.P.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "lumped_chain",
            "params": self.params.as_dict(),
            "beta": self.beta,
            "classes": [list(map(int, c)) for c in self.classes],
            "sizes": [int(s) for s in self.sizes],
            "energies": [e.value(self.params.epsilon, self.params.h) for e in self.energies],
            "matrix": {
                "shape": [len(self), len(self)],
                "row": coo.row[order].tolist(),
                "col": coo.col[order].tolist(),
                "val": coo.data[order].tolist(),
            },
            "provenance": ("verified against the full chain" if self.n <= 4
                           else "verified-by-symmetry"),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def build_lumped_chain(n: int, params: Params, beta: float | None = None) -> LumpedChain:
    """Lumped Metropolis chain for G(2, n)."""
    params.require_two_clusters()
    if params.n != n:
        params = Params(n, 2, params.epsilon, params.h, params.beta)
    beta = params.beta if beta is None else float(beta)
    if not beta > 0:
        raise ParameterError("beta must be positive")
    classes = enumerate_classes(n)
    index = {c: i for i, c in enumerate(classes)}
    energies = [class_energy_exact(c, n) for c in classes]
    ev = np.array([e.value(params.epsilon, params.h) for e in energies])
    rows, cols, vals = [], [], []
    for i, c in enumerate(classes):
        for _, m, t in class_neighbors(c, n):
            j = index[t]
            dh = ev[j] - ev[i]
            rows.append(i)
            cols.append(j)
            vals.append(m / (2 * n) * np.exp(-beta * max(dh, 0.0)))
    off = sp.csr_matrix((vals, (rows, cols)), shape=(len(classes), len(classes)))
    off.sum_duplicates()
    return LumpedChain(params=params, beta=beta, classes=tuple(classes),
                       sizes=tuple(class_size(c, n) for c in classes),
                       energies=tuple(energies), offdiag=off)
