"""Metropolis simulation and exact chain analysis.

Time is discrete and counted in proposal steps.  Random numbers come from
numpy ``Generator`` objects seeded by ``SeedSequence(seed, spawn_key=(i,))``,
so trial ``i`` sees the same stream whatever the thread count.  The step
loops are compiled with numba and consume pre-drawn chunks of random
numbers.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numba
import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .classes import (SCHEMA_VERSION, ClassState, LumpedChain, NamedState,
                      build_lumped_chain, check_class, class_energy_exact)
from .errors import ParameterError, UnreachableTargetError
from .linalg import hitting_moments
from .model import Params, SpinConfig

CHUNK = 1 << 16
DENSE_LIMIT = 2000


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def resolve_class(x, n: int) -> ClassState:
    if isinstance(x, NamedState):
        return x.class_state(n)
    if isinstance(x, str):
        return NamedState.parse(x).class_state(n)
    if isinstance(x, SpinConfig):
        from .classes import classify
        return classify(x, n)
    return check_class(x, n)


def resolve_targets(targets, n: int) -> frozenset:
    if isinstance(targets, (NamedState, str, SpinConfig)) or (
            isinstance(targets, tuple) and len(targets) == 3 and all(isinstance(t, int) for t in targets)):
        targets = [targets]
    out = frozenset(resolve_class(t, n) for t in targets)
    if not out:
        raise ParameterError("target set is empty")
    return out


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _full_kernel(spins, state, acc, target, verts, unif, step0, max_steps,
                 rec_step, rec_vert, rec_cls, rec_len):
    n = spins.shape[0] // 2
    p1, p2, a = state[0], state[1], state[2]
    cap = rec_step.shape[0]
    t = step0
    for i in range(verts.shape[0]):
        if t >= max_steps:
            break
        t += 1
        v = verts[i]
        s = spins[v]
        tw = spins[v + n] if v < n else spins[v - n]
        p = p1 if v < n else p2
        up = 1 if s < 0 else 0
        pair = 1 if tw > 0 else 0
        if unif[i] < acc[p, up, pair]:
            spins[v] = -s
            d = 1 if up == 1 else -1
            if v < n:
                p1 += d
            else:
                p2 += d
            if pair == 1:
                a += d
            if rec_len[0] < cap:
                k = rec_len[0]
                rec_step[k] = t
                rec_vert[k] = v
                rec_cls[k, 0] = p1
                rec_cls[k, 1] = p2
                rec_cls[k, 2] = a
                rec_len[0] = k + 1
            if target[p1, p2, a]:
                state[0], state[1], state[2] = p1, p2, a
                return t, True
    state[0], state[1], state[2] = p1, p2, a
    return t, False


@numba.njit(cache=True)
def _lumped_kernel(cur, log_stay, cum, cols, indptr, target, u1, u2, step0, max_steps,
                   rec_step, rec_cls, rec_len):
    c = cur[0]
    t = step0
    cap = rec_step.shape[0]
    for i in range(u1.shape[0]):
        ls = log_stay[c]
        if ls == 0.0:
            hold = max_steps + 1
        elif ls == -np.inf:
            hold = 1
        else:
            g = math.ceil(math.log(u1[i]) / ls)
            hold = g if g >= 1 else 1
        if t + hold > max_steps:
            cur[0] = c
            return max_steps, False
        t += hold
        lo, hi = indptr[c], indptr[c + 1]
        r = u2[i] * cum[hi - 1]
        j = lo
        while j < hi - 1 and cum[j] <= r:
            j += 1
        c = cols[j]
        if rec_len[0] < cap:
            k = rec_len[0]
            rec_step[k] = t
            rec_cls[k] = c
            rec_len[0] = k + 1
        if target[c]:
            cur[0] = c
            return t, True
    cur[0] = c
    return t, False


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Accepted moves of one run and the first hitting step of the target set."""

    seed: int
    trial: int
    n: int
    params: Params
    start: ClassState
    targets: frozenset
    steps: np.ndarray
    vertices: np.ndarray | None
    classes: np.ndarray
    hitting_step: int | None
    censored: bool
    max_steps: int
    truncated_record: bool = False

    def energies(self) -> np.ndarray:
        e, h = self.params.epsilon, self.params.h
        return np.array([class_energy_exact(tuple(map(int, c)), self.n).value(e, h)
                         for c in self.classes])

    def write_csv(self, path) -> None:
        """Columns ``step,p1,p2,a,energy``; row 0 is the initial state."""
        e0 = class_energy_exact(self.start, self.n).value(self.params.epsilon, self.params.h)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "p1", "p2", "a", "energy"])
            w.writerow([0, *self.start, repr(float(e0))])
            for t, c, e in zip(self.steps, self.classes, self.energies()):
                w.writerow([int(t), int(c[0]), int(c[1]), int(c[2]), repr(float(e))])


def _acceptance_table(params: Params, beta: float) -> np.ndarray:
    """Acceptance probability indexed by (plus count of the cluster, up?, twin plus?)."""
    n = params.n
    eps, h = params.eps_f, params.h_f
    acc = np.empty((n + 1, 2, 2))
    for p in range(n + 1):
        for pair in (0, 1):
            e = -eps if pair else eps
            up = 2 * (n - 1 - 2 * p + e - h)
            down = -2 * (n + 1 - 2 * p + e - h)
            acc[p, 1, pair] = math.exp(-beta * max(up, 0.0))
            acc[p, 0, pair] = math.exp(-beta * max(down, 0.0))
    return acc


def _target_cube(targets, n: int) -> np.ndarray:
    cube = np.zeros((n + 1, n + 1, n + 1), dtype=np.bool_)
    for c in targets:
        cube[c] = True
    return cube


def _initial_config(start, n: int) -> SpinConfig:
    if isinstance(start, SpinConfig):
        if start.size != 2 * n:
            raise ParameterError("start configuration has the wrong size")
        return start
    if isinstance(start, (NamedState, str)):
        s = start if isinstance(start, NamedState) else NamedState.parse(start)
        return s.config(n)
    from .classes import representative
    return representative(check_class(start, n), n)


def simulate(params: Params, beta: float | None, start, targets, seed: int,
             max_steps: int = 10 ** 7, trial: int = 0, record: bool = True,
             record_limit: int = 10 ** 6) -> Trajectory:
    """Single-flip Metropolis run on all configurations until the target set is hit.

    A uniform vertex is proposed each step and accepted with probability
    ``exp(-beta [dH]_+)``.  Runs that exhaust ``max_steps`` are censored.
    """
    params.require_two_clusters()
    n = params.n
    beta = params.beta if beta is None else float(beta)
    sigma = _initial_config(start, n)
    from .classes import classify
    c0 = classify(sigma, n)
    tset = resolve_targets(targets, n)
    rng = trial_rng(seed, trial)
    cap = record_limit if record else 0
    rec_step = np.zeros(cap, dtype=np.int64)
    rec_vert = np.zeros(cap, dtype=np.int64)
    rec_cls = np.zeros((cap, 3), dtype=np.int64)
    rec_len = np.zeros(1, dtype=np.int64)
    if c0 in tset:
        return Trajectory(seed, trial, n, params, c0, tset, rec_step[:0], rec_vert[:0],
                          rec_cls[:0], 0, False, max_steps)
    spins = sigma.spins.astype(np.int64)
    state = np.array(c0, dtype=np.int64)
    acc = _acceptance_table(params, beta)
    cube = _target_cube(tset, n)
    t, hit = 0, False
    while not hit and t < max_steps:
        m = min(CHUNK, max_steps - t)
        verts = rng.integers(0, 2 * n, size=m)
        unif = rng.random(m)
        t, hit = _full_kernel(spins, state, acc, cube, verts, unif, t, max_steps,
                              rec_step, rec_vert, rec_cls, rec_len)
    k = int(rec_len[0])
    return Trajectory(seed, trial, n, params, c0, tset, rec_step[:k].copy(),
                      rec_vert[:k].copy(), rec_cls[:k].copy(), int(t) if hit else None,
                      not hit, max_steps, truncated_record=record and k == cap)


def _csr_arrays(chain: LumpedChain):
    off = chain.offdiag.tocsr()
    off.sort_indices()
    indptr = off.indptr.astype(np.int64)
    cols = off.indices.astype(np.int64)
    cum = np.empty(len(off.data))
    for r in range(len(chain)):
        lo, hi = indptr[r], indptr[r + 1]
        cum[lo:hi] = np.cumsum(off.data[lo:hi])
    with np.errstate(divide="ignore"):
        log_stay = np.log1p(-np.minimum(chain.escape, 1.0))
    return log_stay, cum, cols, indptr


def simulate_lumped(chain: LumpedChain, start_class, targets, seed: int,
                    max_steps: int = 10 ** 9, trial: int = 0, record: bool = True,
                    record_limit: int = 10 ** 6) -> Trajectory:
    """Class-level run with the same law of the hitting time as ``simulate``.

    Holding times in a class are drawn as geometric variables and the next
    class in proportion to the off-diagonal probabilities, so the step
    count matches the proposal-step clock of the full chain.
    """
    n = chain.n
    c0 = resolve_class(start_class, n)
    tset = resolve_targets(targets, n)
    cap = record_limit if record else 0
    rec_step = np.zeros(cap, dtype=np.int64)
    rec_idx = np.zeros(cap, dtype=np.int64)
    rec_len = np.zeros(1, dtype=np.int64)
    empty = np.zeros((0, 3), dtype=np.int64)
    if c0 in tset:
        return Trajectory(seed, trial, n, chain.params, c0, tset, rec_step[:0], None,
                          empty, 0, False, max_steps)
    log_stay, cum, cols, indptr = _csr_arrays(chain)
    target = np.zeros(len(chain), dtype=np.bool_)
    for c in tset:
        target[chain.index[c]] = True
    cur = np.array([chain.index[c0]], dtype=np.int64)
    rng = trial_rng(seed, trial)
    t, hit = 0, False
    while not hit and t < max_steps:
        u1 = 1.0 - rng.random(CHUNK)   # in (0, 1]
        u2 = rng.random(CHUNK)
        t, hit = _lumped_kernel(cur, log_stay, cum, cols, indptr, target, u1, u2, t,
                                max_steps, rec_step, rec_idx, rec_len)
    k = int(rec_len[0])
    cls = np.array([chain.classes[i] for i in rec_idx[:k]], dtype=np.int64).reshape(k, 3)
    return Trajectory(seed, trial, n, chain.params, c0, tset, rec_step[:k].copy(), None,
                      cls, int(t) if hit else None, not hit, max_steps,
                      truncated_record=record and k == cap)


# ---------------------------------------------------------------------------
# exact moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactMoments:
    mean: float
    second_moment: float
    residual: float

    @property
    def ratio(self) -> float:
        return self.second_moment / self.mean ** 2 if self.mean > 0 else float("nan")


def exact_hitting_moments(chain: LumpedChain, start_class, target_set) -> ExactMoments:
    """``E[tau]`` and ``E[tau^2]`` by subtraction-free elimination."""
    n = chain.n
    c0 = resolve_class(start_class, n)
    tset = resolve_targets(target_set, n)
    if c0 in tset:
        return ExactMoments(0.0, 0.0, 0.0)
    mask = np.zeros(len(chain), dtype=bool)
    for c in tset:
        mask[chain.index[c]] = True
    m1, m2, res = hitting_moments(chain.offdiag.toarray(), mask)
    i = chain.index[c0]
    if not np.isfinite(m1[i]) or m1[i] <= 0:
        raise UnreachableTargetError("target not reachable")
    return ExactMoments(float(m1[i]), float(m2[i]), res)


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

@dataclass
class SpectrumResult:
    beta: float
    eigenvalues: list
    gap: float
    log_rate: float
    method: str
    precision_digits: int
    t_mix: int | None = None
    t_mix_gamma: float | None = None
    flags: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": "spectrum_result",
                "beta": self.beta, "eigenvalues": self.eigenvalues, "gap": self.gap,
                "log_rate": self.log_rate, "method": self.method,
                "precision_digits": self.precision_digits, "t_mix": self.t_mix,
                "t_mix_gamma": self.t_mix_gamma, "flags": self.flags}


def _sym_laplacian(chain: LumpedChain) -> np.ndarray:
    """``D^{1/2} (I - P) D^{-1/2}`` with D the stationary weights; diagonal from escapes."""
    lw = chain.log_weights()
    off = chain.offdiag.tocoo()
    K = len(chain)
    L = np.zeros((K, K))
    L[off.row, off.col] = -off.data * np.exp((lw[off.row] - lw[off.col]) / 2)
    L = (L + L.T) / 2
    L[np.diag_indices(K)] = chain.escape
    return L


def _mp_gap(chain: LumpedChain, digits: int, k: int):
    """Smallest Laplacian eigenvalues in extended precision."""
    from .classes import class_neighbors
    n, beta = chain.n, mpmath.mpf(chain.beta)
    eps, h = chain.params.epsilon, chain.params.h
    with mpmath.workdps(digits):
        E = [mpmath.mpf(e.exact(eps, h).numerator) / e.exact(eps, h).denominator
             for e in chain.energies]
        lw = [mpmath.log(s) - beta * e for s, e in zip(chain.sizes, E)]
        K = len(chain)
        M = mpmath.matrix(K, K)
        for i, c in enumerate(chain.classes):
            for _, m, t in class_neighbors(c, n):
                j = chain.index[t]
                p = mpmath.mpf(m) / (2 * n) * mpmath.exp(-beta * max(E[j] - E[i], 0))
                M[i, j] -= p * mpmath.exp((lw[i] - lw[j]) / 2)
                M[i, i] += p
        ev = sorted(mpmath.eigsy(M, eigvals_only=True))
        return [float(x) for x in ev[:k]]


def spectral_gap(chain: LumpedChain, k: int = 6, precision: str = "auto",
                 threshold: float = 1e-8) -> SpectrumResult:
    """Spectral gap ``1 - a2`` of the lumped chain.

    The chain is symmetrised with the square roots of its stationary weights.
    In double precision the gap carries an absolute error near machine
    epsilon, so gaps below ``threshold`` are recomputed in extended
    precision (``precision='auto'``).
    """
    K = len(chain)
    flags = []
    if K > DENSE_LIMIT:
        L = _sym_laplacian_sparse(chain)
        vals = spla.eigsh(L, k=min(k, K - 1), sigma=-1e-3, which="LM", tol=1e-10,
                          return_eigenvectors=False)
        mu = np.sort(vals)
        method, digits = "iterative", 16
    else:
        L = _sym_laplacian(chain)
        mu = scipy.linalg.eigvalsh(L)
        method, digits = "dense", 16
    mu = np.sort(mu)
    gap = float(mu[1]) if K > 1 else 1.0
    if precision == "mp" or (precision == "auto" and gap < threshold and K <= DENSE_LIMIT):
        ev = chain.energy_values
        digits = 30 + int(math.ceil(chain.beta * (ev.max() - ev.min()) / math.log(10)))
        mu = np.array(_mp_gap(chain, digits, max(k, 2)))
        gap = float(mu[1])
        method = "dense-extended"
    if not gap > 0:
        flags.append("non-positive gap: precision exhausted")
    eig = [float(1.0 - x) for x in mu[:k]]
    rate = -math.log(gap) / chain.beta if gap > 0 else float("inf")
    return SpectrumResult(chain.beta, eig, gap, rate, method, digits, flags=flags)


def _sym_laplacian_sparse(chain: LumpedChain):
    import scipy.sparse as sp
    lw = chain.log_weights()
    off = chain.offdiag.tocoo()
    vals = -off.data * np.exp((lw[off.row] - lw[off.col]) / 2)
    L = sp.csr_matrix((vals, (off.row, off.col)), shape=off.shape)
    L = (L + L.T) / 2
    return (L + sp.diags(chain.escape)).tocsr()


def full_spectral_gap(P: np.ndarray, mu: np.ndarray) -> float:
    """Gap of a dense reversible matrix ``P`` with stationary vector ``mu``."""
    s = np.sqrt(mu)
    Q = P.copy()
    np.fill_diagonal(Q, 0.0)
    S = -(s[:, None] * Q / s[None, :])
    S = (S + S.T) / 2
    S[np.diag_indices_from(S)] = Q.sum(axis=1)
    return float(np.sort(scipy.linalg.eigvalsh(S))[1])


# ---------------------------------------------------------------------------
# mixing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixingResult:
    t_mix: int | None
    gamma: float
    worst_start: ClassState | None
    lower_bound_only: bool
    budget: int

    @property
    def value(self) -> int:
        return self.budget if self.t_mix is None else self.t_mix


def mixing_time(chain: LumpedChain, gamma: float = 0.25, budget: int = 10 ** 6,
                starts: Iterable | None = None) -> MixingResult:
    """First ``t`` with worst-start total variation to the Gibbs measure at most ``gamma``.

    Distances are taken between class distributions, each class weighted by
    its size through the stationary vector.  From a named (singleton) start
    the law inside each class is uniform, so the class distance equals the
    configuration distance; for other starts it is a lower bound.
    """
    if not 0 < gamma < 1:
        raise ParameterError("gamma must lie in (0, 1)")
    pi = chain.stationary()
    K = len(chain)
    idx = list(range(K)) if starts is None else [chain.index[resolve_class(s, chain.n)]
                                                  for s in starts]
    D = np.zeros((len(idx), K))
    D[np.arange(len(idx)), idx] = 1.0
    PT = chain.P.T.tocsr()
    for t in range(budget + 1):
        tv = 0.5 * np.abs(D - pi[None, :]).sum(axis=1)
        worst = int(np.argmax(tv))
        if tv[worst] <= gamma:
            return MixingResult(t, gamma, chain.classes[idx[worst]], False, budget)
        D = (PT @ D.T).T
    return MixingResult(None, gamma, None, True, budget)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

@dataclass
class HittingStats:
    count: int
    censored: int
    mean: float | None
    variance: float | None
    second_moment: float | None
    std_error: float | None
    ci95: tuple | None
    exact_mean: float | None
    exact_second_moment: float | None
    log_rate: float | None
    exact_log_rate: float | None
    beta: float
    window_delta: float | None = None
    window_gamma: float | None = None
    window_fraction: float | None = None
    samples: list = field(default_factory=list, repr=False)

    @property
    def z_score(self) -> float | None:
        if self.exact_mean is None or not self.std_error:
            return None
        return (self.mean - self.exact_mean) / self.std_error

    def to_json_dict(self, include_samples: bool = False) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "kind": "hitting_stats",
             "count": self.count, "censored": self.censored, "mean": self.mean,
             "variance": self.variance, "second_moment": self.second_moment,
             "std_error": self.std_error,
             "ci95": None if self.ci95 is None else list(self.ci95),
             "exact_mean": self.exact_mean, "exact_second_moment": self.exact_second_moment,
             "log_rate": self.log_rate, "exact_log_rate": self.exact_log_rate,
             "beta": self.beta, "window_delta": self.window_delta,
             "window_gamma": self.window_gamma, "window_fraction": self.window_fraction,
             "z_score": self.z_score}
        if include_samples:
            d["samples"] = [None if s is None else int(s) for s in self.samples]
        return d


def _run_block(args):
    mode, source, beta, start, targets, seed, trials, max_steps = args
    out = []
    for i in trials:
        if mode == "lumped":
            tr = simulate_lumped(source, start, targets, seed, max_steps, trial=i, record=False)
        else:
            tr = simulate(source, beta, start, targets, seed, max_steps, trial=i, record=False)
        out.append(tr.hitting_step)
    return out


def sample_hitting_times(source, start, targets, trials: int, seed: int,
                         beta: float | None = None, max_steps: int = 10 ** 8,
                         delta: float | None = None, gamma_ref: float | None = None,
                         exact: bool = True, threads: int = 1) -> HittingStats:
    """Independent seeded replicas of the hitting time.

    ``source`` is a ``Params`` (full configuration dynamics) or a
    ``LumpedChain`` (class-level dynamics).  Censored runs are counted and
    excluded from the moments.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if isinstance(source, LumpedChain):
        mode, chain, b = "lumped", source, source.beta
    elif isinstance(source, Params):
        b = source.beta if beta is None else float(beta)
        mode, chain = "full", None
        if exact:
            chain = build_lumped_chain(source.n, source, b)
    else:
        raise ParameterError("source must be Params or LumpedChain")
    n = source.n if isinstance(source, Params) else source.n
    start_c = resolve_class(start, n)
    tset = resolve_targets(targets, n)
    st = start if mode == "full" and isinstance(start, (SpinConfig, NamedState)) else start_c
    if threads > 1:
        blocks = [list(range(k, trials, threads)) for k in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(_run_block, [(mode, source, b, st, tset, seed, blk, max_steps)
                                           for blk in blocks]))
        samples: list = [None] * trials
        for blk, vals in zip(blocks, res):
            for i, v in zip(blk, vals):
                samples[i] = v
    else:
        samples = _run_block((mode, source, b, st, tset, seed, range(trials), max_steps))
    done = np.array([s for s in samples if s is not None], dtype=float)
    cens = trials - len(done)
    mean = var = m2 = se = ci = lr = None
    if len(done):
        mean = float(done.mean())
        m2 = float(np.mean(done ** 2))
        var = float(done.var(ddof=1)) if len(done) > 1 else 0.0
        se = math.sqrt(var / len(done))
        ci = (mean - 1.96 * se, mean + 1.96 * se)
        lr = math.log(mean) / b if mean > 0 else None
    em = esm = elr = None
    if chain is not None:
        ex_m = exact_hitting_moments(chain, start_c, tset)
        em, esm = ex_m.mean, ex_m.second_moment
        elr = math.log(em) / b if em > 0 else None
    frac = None
    if delta is not None and gamma_ref is not None:
        lo, hi = math.exp(b * (gamma_ref - delta)), math.exp(b * (gamma_ref + delta))
        inside = [s for s in samples if s is not None and lo < s < hi]
        frac = len(inside) / trials
    return HittingStats(len(done), cens, mean, var, m2, se, ci, em, esm, lr, elr, b,
                        delta, gamma_ref, frac, samples)


def slope_table(params: Params, betas: Sequence[float], start, targets) -> list[dict]:
    """(1/beta) log E[tau] and -(1/beta) log gap over a list of inverse temperatures."""
    rows = []
    for b in betas:
        chain = build_lumped_chain(params.n, params, b)
        mom = exact_hitting_moments(chain, start, targets)
        sp = spectral_gap(chain)
        rows.append({"beta": b, "mean": mom.mean, "log_mean_rate": math.log(mom.mean) / b,
                     "ratio": mom.ratio, "gap": sp.gap, "log_gap_rate": sp.log_rate})
    return rows


def to_json(obj, indent: int | None = 2) -> str:
    return json.dumps(obj.to_json_dict(), indent=indent)
