"""Subtraction-free elimination for absorbing-chain systems.

Expected hitting times in metastable chains reach ``exp(beta * Gamma)``
while escape probabilities fall to ``exp(-beta * Gamma)``.  Forming
``I - Q`` directly loses those small numbers to cancellation, so the
systems here are written as

    D_i m_i = c_i + sum_{j != i} W_ij m_j,     D_i = sum_{j != i} W_ij (incl. targets)

and reduced state by state.  After eliminating ``k`` the new pivots are
recomputed as sums of the updated off-diagonal weights, in the manner of
the Grassmann-Taksar-Heyman algorithm, so no step subtracts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnreachableTargetError


@dataclass
class AbsorbingFactor:
    """Elimination of the non-target states of a chain."""

    keep: np.ndarray       # non-target state indices, elimination order
    pivots: np.ndarray     # D_k at elimination time
    upper: list            # W_kj / D_k over states eliminated later
    lower: list            # W_ik / D_k over states eliminated later
    offdiag: np.ndarray    # original off-diagonal weights among non-targets
    escape: np.ndarray     # original D_i

    def solve(self, c: np.ndarray) -> np.ndarray:
        """Solve ``D m - W m = c`` on the non-target states."""
        c = np.array(c, dtype=float, copy=True)
        K = len(self.keep)
        for k in range(K):
            if K - k - 1:
                c[k + 1:] += self.lower[k] * c[k]
        m = np.zeros(K)
        for k in range(K - 1, -1, -1):
            m[k] = c[k] / self.pivots[k]
            if K - k - 1:
                m[k] += self.upper[k] @ m[k + 1:]
        return m

    def residual(self, m: np.ndarray, c: np.ndarray) -> float:
        """Normwise relative residual of ``D m - W m = c``."""
        dm = self.escape * m
        wm = self.offdiag @ m
        r = dm - wm - c
        scale = np.abs(dm) + np.abs(wm) + np.abs(c)
        return float(np.max(np.abs(r) / np.where(scale > 0, scale, 1.0)))


def factor_absorbing(W: np.ndarray, target: np.ndarray) -> AbsorbingFactor:
    """Eliminate all non-target states of the chain with off-diagonal weights ``W``.

    ``W`` is dense with a zero diagonal; ``target`` is a boolean mask.
    """
    W = np.asarray(W, dtype=float)
    keep = np.flatnonzero(~target)
    if len(keep) == 0:
        return AbsorbingFactor(keep, np.zeros(0), [], [], np.zeros((0, 0)), np.zeros(0))
    A = W[np.ix_(keep, keep)].copy()
    np.fill_diagonal(A, 0.0)
    to_target = W[np.ix_(keep, np.flatnonzero(target))].sum(axis=1)
    escape0 = A.sum(axis=1) + to_target
    sink = to_target.copy()
    K = len(keep)
    pivots = np.empty(K)
    upper, lower = [], []
    for k in range(K):
        rest = slice(k + 1, K)
        d = sink[k] + A[k, rest].sum()
        if not d > 0:
            raise UnreachableTargetError("target set is not reachable from every state")
        pivots[k] = d
        u = A[k, rest] / d
        l = A[rest, k] / d
        upper.append(u)
        lower.append(l)
        if K - k - 1:
            A[rest, rest] += np.outer(A[rest, k], u)
            sink[rest] += l * sink[k]
            sub = A[rest, rest]
            np.fill_diagonal(sub, 0.0)
            A[rest, rest] = sub
    return AbsorbingFactor(keep, pivots, upper, lower,
                           W[np.ix_(keep, keep)] * (1 - np.eye(K)), escape0)


def hitting_moments(W: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """First and second moments of the hitting time of ``target`` from every state.

    Returns arrays over all states (zero on the target) and the worst
    relative residual of the two solves.
    """
    target = np.asarray(target, dtype=bool)
    N = len(target)
    f = factor_absorbing(W, target)
    K = len(f.keep)
    m1 = np.zeros(N)
    m2 = np.zeros(N)
    if K == 0:
        return m1, m2, 0.0
    ones = np.ones(K)
    t1 = f.solve(ones)
    # E[tau^2] = 1 + 2 E[tau'] + E[tau'^2] with tau' the time after one step
    stay = np.clip(1.0 - f.escape, 0.0, 1.0)
    c2 = 1.0 + 2.0 * (stay * t1 + f.offdiag @ t1)
    t2 = f.solve(c2)
    res = max(f.residual(t1, ones), f.residual(t2, c2))
    m1[f.keep] = t1
    m2[f.keep] = t2
    return m1, m2, res
