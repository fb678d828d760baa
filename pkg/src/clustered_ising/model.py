"""Graph construction, spin configurations and the Hamiltonian.

The graph G(k, n) has k complete clusters of n vertices.  Vertex ``v``
belongs to cluster ``v // n`` and its twins (same ``v % n``) in the other
clusters are joined to it by cross edges.  The energy of a configuration is

    H(s) = - sum_internal s_i s_j - eps * sum_cross s_i s_j - h * sum_i s_i
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import DimensionError, ParameterError
from .exact import Affine, Number, to_rational


@dataclass(frozen=True)
class Params:
    """Model parameters.

    ``epsilon`` and ``h`` are stored as exact rationals; ``beta`` is only
    used by the dynamics.
    """

    n: int
    k: int = 2
    epsilon: Fraction = Fraction(0)
    h: Fraction = Fraction(0)
    beta: float = 1.0

    def __post_init__(self):
        try:
            eps = to_rational(self.epsilon)
            h = to_rational(self.h)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParameterError(str(exc)) from None
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "beta", float(self.beta))
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ParameterError(f"n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.k, (int, np.integer)) or self.k < 2:
            raise ParameterError(f"k must be an integer >= 2, got {self.k!r}")
        if not -1 <= eps <= 1:
            raise ParameterError(f"epsilon must lie in [-1, 1], got {eps}")
        if not 0 <= h <= 1:
            raise ParameterError(f"h must lie in [0, 1], got {h}")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ParameterError(f"beta must be positive, got {self.beta}")

    @property
    def eps_f(self) -> float:
        return float(self.epsilon)

    @property
    def h_f(self) -> float:
        return float(self.h)

    def with_beta(self, beta: float) -> "Params":
        return Params(self.n, self.k, self.epsilon, self.h, beta)

    def require_two_clusters(self):
        if self.k != 2:
            raise ParameterError("this analysis requires k = 2")

    def as_dict(self) -> dict:
        return {"n": int(self.n), "k": int(self.k), "epsilon": str(self.epsilon),
                "h": str(self.h), "beta": self.beta}


def make_params(n: int, epsilon: Number = 0, h: Number = 0, beta: float = 1.0,
                k: int = 2) -> Params:
    return Params(n=n, k=k, epsilon=epsilon, h=h, beta=beta)


@dataclass(frozen=True)
class ClusteredGraph:
    """G(k, n) with 0-based vertex ids; cluster ``c`` holds ``c*n .. c*n+n-1``."""

    n: int
    k: int
    internal_edges: np.ndarray = field(repr=False)
    cross_edges: np.ndarray = field(repr=False)

    @property
    def num_vertices(self) -> int:
        return self.n * self.k

    def cluster_of(self, v: int) -> int:
        return v // self.n

    def twins(self, v: int) -> list[int]:
        r = v % self.n
        return [c * self.n + r for c in range(self.k) if c != v // self.n]

    @cached_property
    def internal_neighbors(self) -> np.ndarray:
        """``(V, n-1)`` array of within-cluster neighbours."""
        n = self.n
        out = np.empty((self.num_vertices, n - 1), dtype=np.int64)
        for v in range(self.num_vertices):
            base = (v // n) * n
            out[v] = [base + j for j in range(n) if base + j != v]
        return out

    @cached_property
    def cross_neighbors(self) -> np.ndarray:
        """``(V, k-1)`` array of twins."""
        return np.array([self.twins(v) for v in range(self.num_vertices)],
                        dtype=np.int64).reshape(self.num_vertices, self.k - 1)

    def degree(self, v: int) -> int:
        return self.internal_neighbors.shape[1] + self.cross_neighbors.shape[1]


def build_graph(params: Params) -> ClusteredGraph:
    """Build G(k, n) for ``params``."""
    if not isinstance(params, Params):
        raise ParameterError("build_graph expects a Params instance")
    n, k = int(params.n), int(params.k)
    internal = [(c * n + i, c * n + j)
                for c in range(k) for i in range(n) for j in range(i + 1, n)]
    cross = [(c1 * n + r, c2 * n + r)
             for r in range(n) for c1 in range(k) for c2 in range(c1 + 1, k)]
    return ClusteredGraph(
        n=n, k=k,
        internal_edges=np.array(internal, dtype=np.int64).reshape(-1, 2),
        cross_edges=np.array(cross, dtype=np.int64).reshape(-1, 2),
    )


# ---------------------------------------------------------------------------
# spin configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinConfig:
    """Packed spin configuration: bit ``v`` of ``bits`` set means spin +1."""

    bits: int
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise DimensionError("empty configuration")
        if not 0 <= self.bits < (1 << self.size):
            raise DimensionError("bit pattern does not fit the configuration size")

    @classmethod
    def from_spins(cls, spins) -> "SpinConfig":
        s = np.asarray(spins)
        if s.ndim != 1 or not np.all((s == 1) | (s == -1)):
            raise DimensionError("spins must be a 1-d array of +1/-1")
        bits = 0
        for v in np.flatnonzero(s == 1):
            bits |= 1 << int(v)
        return cls(bits, len(s))

    @classmethod
    def all_plus(cls, size: int) -> "SpinConfig":
        return cls((1 << size) - 1, size)

    @classmethod
    def all_minus(cls, size: int) -> "SpinConfig":
        return cls(0, size)

    @property
    def spins(self) -> np.ndarray:
        return np.where((self.bits >> np.arange(self.size)) & 1, 1, -1).astype(np.int64)

    def spin(self, v: int) -> int:
        return 1 if (self.bits >> v) & 1 else -1

    def __len__(self) -> int:
        return self.size


def _check(g: ClusteredGraph, sigma: SpinConfig):
    if sigma.size != g.num_vertices:
        raise DimensionError(f"configuration has {sigma.size} spins, graph has {g.num_vertices}")


def hamiltonian_exact(g: ClusteredGraph, sigma: SpinConfig) -> Affine:
    """Integer coefficients of H(sigma) as an affine function of (eps, h)."""
    _check(g, sigma)
    s = sigma.spins
    ie, ce = g.internal_edges, g.cross_edges
    return Affine(-int(np.sum(s[ie[:, 0]] * s[ie[:, 1]])),
                  -int(np.sum(s[ce[:, 0]] * s[ce[:, 1]])),
                  -int(np.sum(s)))


def hamiltonian(g: ClusteredGraph, sigma: SpinConfig, params: Params) -> float:
    """Energy of ``sigma`` in double precision."""
    return hamiltonian_exact(g, sigma).value(params.epsilon, params.h)


def flip(sigma: SpinConfig, v: int) -> SpinConfig:
    """Return the configuration with the spin at ``v`` reversed."""
    if not 0 <= v < sigma.size:
        raise IndexError(f"vertex {v} out of range")
    return SpinConfig(sigma.bits ^ (1 << v), sigma.size)


def flip_delta_exact(g: ClusteredGraph, sigma: SpinConfig, v: int) -> Affine:
    """H(flip(sigma, v)) - H(sigma) by local summation."""
    _check(g, sigma)
    if not 0 <= v < sigma.size:
        raise IndexError(f"vertex {v} out of range")
    sv = sigma.spin(v)
    si = sum(sigma.spin(int(u)) for u in g.internal_neighbors[v])
    sc = sum(sigma.spin(int(u)) for u in g.cross_neighbors[v])
    return Affine(2 * sv * si, 2 * sv * sc, 2 * sv)


def flip_delta(g: ClusteredGraph, sigma: SpinConfig, v: int, params: Params) -> float:
    return flip_delta_exact(g, sigma, v).value(params.epsilon, params.h)


def energy_coefficients(n: int) -> np.ndarray:
    """Affine coefficients for every configuration of G(2, n).

    Row ``b`` corresponds to the packed configuration with bit pattern ``b``.
    Vectorised; intended for ``n <= 6``.
    """
    size = 2 * n
    b = np.arange(1 << size, dtype=np.int64)
    s = np.where((b[:, None] >> np.arange(size)) & 1, 1, -1)
    s1, s2 = s[:, :n], s[:, n:]
    m1, m2 = s1.sum(1), s2.sum(1)
    # sum over pairs i<j of s_i s_j = (M^2 - n) / 2
    internal = (m1 * m1 - n) // 2 + (m2 * m2 - n) // 2
    cross = np.sum(s1 * s2, axis=1)
    return np.stack([-internal, -cross, -(m1 + m2)], axis=1)
