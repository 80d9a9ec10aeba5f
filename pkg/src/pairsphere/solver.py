"""Projection of a query vector onto the set of clustering vectors.

Minimizing the angular distance to a query equals maximizing the inner
product with the clustering vector, which decomposes over node pairs. The
local-move solver is a greedy relabeling scheme over that objective: sweeps
of best-gain single-node moves, followed by aggregation of communities into
supernodes, repeated until nothing improves. The sparse-plus-low-rank query
structure keeps each relabeling linear in the node's sparse support plus one
aggregate per rank-one term and candidate community.

For small instances an exhaustive enumerator over set partitions provides an
exact reference optimum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .clustering import (
    DegeneratePartitionError,
    Partition,
    partition_latitude,
    pearson_correlation,
    query_angular_distance,
    query_correlation_distance,
    relative_granularity_error,
)
from .geometry import PairVector
from .pairs import pair_id, pair_members


@dataclass
class SolverConfig:
    """Tunables for the local-move solver.

    epsilon defaults to 1e-12 * |q| * sqrt(N) (guards against move cycling
    from round-off); screening_threshold defaults to 4 * sqrt(n).
    """

    epsilon: float | None = None
    max_sweeps: int = 1000
    screening_threshold: int | None = None
    screen_top: int = 8
    exact_cap: int = 12
    max_cycles: int = 50
    restarts: int = 1  # independent seeded runs; best objective wins
    debug_checks: bool = False

    def screen_limit(self, n: int) -> int:
        if self.screening_threshold is not None:
            return self.screening_threshold
        return int(4 * math.sqrt(n))


class _Instance:
    """A query vector unpacked into solver-friendly arrays."""

    def __init__(self, n, indptr, nbr, wts, coefs, factors, constant, total):
        self.n = n
        self.indptr = indptr  # CSR over nodes, both directions of each sparse pair
        self.nbr = nbr
        self.wts = wts
        self.coefs = coefs  # (K,)
        self.factors = factors  # (K, n)
        self.constant = constant
        self.total = total  # sum of all pair entries

    @classmethod
    def from_pair_vector(cls, q: PairVector) -> "_Instance":
        n = q.n
        if q.pair_ids.size:
            ii, jj = q.sparse_members()
            indptr, tails, vals = _build_csr(n, ii, jj, q.values)
        else:
            indptr = np.zeros(n + 1, dtype=np.int64)
            tails = np.empty(0, np.int64)
            vals = np.empty(0)
        coefs = np.array([t.coef for t in q.terms])
        factors = np.stack([t.factor for t in q.terms]) if q.terms else np.empty((0, n))
        return cls(n, indptr, tails, vals, coefs, factors, q.constant, q.total())


def _build_csr(n, ii, jj, values):
    heads = np.concatenate([ii, jj])
    tails = np.concatenate([jj, ii])
    vals = np.concatenate([values, values])
    order = np.argsort(heads, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, heads + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, tails[order], vals[order]


class SolverState:
    """Mutable solve state: membership plus per-community aggregates.

    For every rank-one term k and community slot a, U[k, a] holds the sum of
    the term's factor over the slot's members; sizes[a] carries the constant
    term. The tracked objective is the inner product with the clustering
    vector of the current membership.
    """

    def __init__(self, inst: _Instance, membership: np.ndarray, screen_limit: int | None = None):
        self.inst = inst
        n = inst.n
        self.membership = np.asarray(membership, dtype=np.int64).copy()
        if self.membership.shape != (n,):
            raise ValueError("membership must assign every node")
        self.sizes = np.bincount(self.membership, minlength=n).astype(np.int64)
        self.U = np.zeros((len(inst.coefs), n))
        for k in range(len(inst.coefs)):
            self.U[k] = np.bincount(self.membership, weights=inst.factors[k], minlength=n)
        self.n_comms = int(np.count_nonzero(self.sizes))
        self.screen_limit = screen_limit if screen_limit is not None else int(4 * math.sqrt(n))
        self.objective = self._alignment()

    @classmethod
    def from_partition(cls, q: PairVector, C: Partition) -> "SolverState":
        if q.n != C.n:
            raise ValueError("dimension mismatch between query and partition")
        return cls(_Instance.from_pair_vector(q), C.membership)

    def _alignment(self) -> float:
        inst = self.inst
        memb = self.membership
        intra = 0.0
        if inst.nbr.size:
            heads = np.repeat(np.arange(inst.n), np.diff(inst.indptr))
            same = memb[heads] == memb[inst.nbr]
            intra += float(inst.wts[same].sum()) / 2.0  # both directions stored
        for k in range(len(inst.coefs)):
            u = inst.factors[k]
            intra += inst.coefs[k] * (float(self.U[k] @ self.U[k]) - float(u @ u)) / 2.0
        szf = self.sizes.astype(np.float64)
        intra += inst.constant * float(szf @ (szf - 1.0)) / 2.0
        return 2.0 * intra - inst.total

    def community_weight(self, i: int, a: int) -> float:
        """W_i(a) = sum of q_ij over j in community a, j != i."""
        inst = self.inst
        lo, hi = inst.indptr[i], inst.indptr[i + 1]
        nbrs = inst.nbr[lo:hi]
        w = float(inst.wts[lo:hi][self.membership[nbrs] == a].sum())
        in_a = 1.0 if self.membership[i] == a else 0.0
        for k in range(len(inst.coefs)):
            f = inst.factors[k][i]
            w += inst.coefs[k] * f * (self.U[k][a] - in_a * f)
        w += inst.constant * (float(self.sizes[a]) - in_a)
        return w


def move_gain(state: SolverState, i: int, target: int) -> float:
    """Objective change from relabeling node i into `target` (2*(W_in - W_out))."""
    cur = int(state.membership[i])
    if target == cur:
        return 0.0
    return 2.0 * (state.community_weight(i, target) - state.community_weight(i, cur))


def _apply_move(state: SolverState, i: int, target: int, gain: float) -> None:
    cur = int(state.membership[i])
    state.membership[i] = target
    state.sizes[cur] -= 1
    state.sizes[target] += 1
    if state.sizes[cur] == 0:
        state.n_comms -= 1
    if state.sizes[target] == 1:
        state.n_comms += 1
    if len(state.inst.coefs):
        state.U[:, cur] -= state.inst.factors[:, i]
        state.U[:, target] += state.inst.factors[:, i]
    state.objective += gain


def _node_gain_vector(state: SolverState, i: int) -> tuple[np.ndarray, float]:
    """W_i over all community slots (empty slots read 0 = fresh community)."""
    inst = state.inst
    n = inst.n
    if len(inst.coefs):
        li = inst.coefs * inst.factors[:, i]
        W = li @ state.U
    else:
        li = None
        W = np.zeros(n)
    if inst.constant != 0.0:
        W = W + inst.constant * state.sizes
    lo, hi = inst.indptr[i], inst.indptr[i + 1]
    if hi > lo:
        W = W + np.bincount(
            state.membership[inst.nbr[lo:hi]], weights=inst.wts[lo:hi], minlength=n
        )
    cur = int(state.membership[i])
    self_term = inst.constant
    if li is not None:
        self_term += float(li @ inst.factors[:, i])
    W[cur] -= self_term
    return W, float(W[cur])


def _sweep(state: SolverState, order: np.ndarray, eps: float, allow_screen: bool, top: int) -> int:
    """One pass of best-gain relabelings; returns the number of moves.

    With screening active (many communities), only the communities of sparse
    neighbors, the top slots by rank-one score, the current community and one
    fresh slot are considered as targets.
    """
    moves = 0
    inst = state.inst
    half_eps = eps / 2.0
    for i in order:
        W, w_cur = _node_gain_vector(state, i)
        if allow_screen and state.n_comms > state.screen_limit:
            lo, hi = inst.indptr[i], inst.indptr[i + 1]
            parts = [state.membership[inst.nbr[lo:hi]]]
            if top < W.size:
                parts.append(np.argpartition(W, -top)[-top:].astype(np.int64))
            else:
                parts.append(np.arange(W.size, dtype=np.int64))
            extras = [int(state.membership[i])]
            empty = int(np.argmin(state.sizes))
            if state.sizes[empty] == 0:
                extras.append(empty)
            parts.append(np.asarray(extras, dtype=np.int64))
            cand = np.unique(np.concatenate(parts))
            local = W[cand]
            pos = int(np.argmax(local))
            best, w_best = int(cand[pos]), float(local[pos])
        else:
            best = int(np.argmax(W))
            w_best = float(W[best])
        if w_best - w_cur > half_eps:
            _apply_move(state, int(i), best, 2.0 * (w_best - w_cur))
            moves += 1
    return moves


def _local_moves(state: SolverState, rng, cfg: SolverConfig, eps: float) -> int:
    """Sweeps until no single-node move improves. When the final quiet sweep
    ran under screening, one unrestricted sweep verifies exhaustive local
    optimality (and resumes sweeping if it finds a move)."""
    total_moves = 0
    sweeps = 0
    while True:
        if sweeps >= cfg.max_sweeps:
            warnings.warn("sweep cap reached before local convergence")
            break
        screened = state.n_comms > state.screen_limit
        moves = _sweep(state, rng.permutation(state.inst.n), eps, True, cfg.screen_top)
        sweeps += 1
        total_moves += moves
        if moves:
            continue
        if not screened:
            break
        moves = _sweep(state, rng.permutation(state.inst.n), eps, False, cfg.screen_top)
        sweeps += 1
        total_moves += moves
        if moves == 0:
            break
    return total_moves


def _aggregate(inst: _Instance, membership: np.ndarray) -> tuple[_Instance, np.ndarray]:
    """Collapse communities to supernodes.

    Sparse entries sum between supernode pairs; rank-one factors sum within
    supernodes; the constant becomes a rank-one term over supernode sizes.
    Pairs inside a supernode contribute a fixed amount that is dropped, so
    coarse-level gains equal fine-level gains. Returns the coarse instance
    and the fine-node -> supernode map.
    """
    labels, compact = np.unique(membership, return_inverse=True)
    compact = compact.astype(np.int64)
    k = labels.size
    if inst.nbr.size:
        heads = np.repeat(np.arange(inst.n), np.diff(inst.indptr))
        keep = heads < inst.nbr  # each sparse pair once
        ai = compact[heads[keep]]
        bj = compact[inst.nbr[keep]]
        vals = inst.wts[keep]
        cross = ai != bj
        if np.any(cross):
            lo = np.minimum(ai[cross], bj[cross])
            hi = np.maximum(ai[cross], bj[cross])
            ids = pair_id(lo, hi, k)
            uniq, inv = np.unique(ids, return_inverse=True)
            summed = np.bincount(inv, weights=vals[cross], minlength=uniq.size)
            s_ii, s_jj = pair_members(uniq, k)
            indptr, tails, cvals = _build_csr(k, s_ii, s_jj, summed)
        else:
            indptr = np.zeros(k + 1, dtype=np.int64)
            tails = np.empty(0, np.int64)
            cvals = np.empty(0)
    else:
        indptr = np.zeros(k + 1, dtype=np.int64)
        tails = np.empty(0, np.int64)
        cvals = np.empty(0)
    coefs = list(inst.coefs)
    factors = [np.bincount(compact, weights=inst.factors[t], minlength=k) for t in range(len(coefs))]
    if inst.constant != 0.0:
        coefs.append(inst.constant)
        factors.append(np.bincount(compact, minlength=k).astype(np.float64))
    coarse = _Instance(
        k,
        indptr,
        tails,
        cvals,
        np.asarray(coefs),
        np.stack(factors) if factors else np.empty((0, k)),
        0.0,
        0.0,  # coarse total unused: coarse objectives track gains only
    )
    return coarse, compact


def louvain_project(q: PairVector, seed: int = 0, config: SolverConfig | None = None) -> Partition:
    """Greedy local-move projection.

    Starts from singletons; sweeps best-gain single-node relabelings in a
    seeded random order (fresh shuffle per sweep, ties to the lowest slot),
    aggregates communities into supernodes and recurses, and repeats the whole
    cycle until the objective stops improving. The returned partition admits
    no improving single-node relabel at the finest level.

    config.restarts > 1 runs that many independent greedy passes (seed streams
    derived from the given seed) and keeps the best objective; the result is
    still deterministic for a fixed seed.
    """
    cfg = config or SolverConfig()
    n = q.n
    if n == 1:
        return Partition(np.zeros(1, dtype=np.int64))
    eps = cfg.epsilon if cfg.epsilon is not None else 1e-12 * q.norm() * math.sqrt(q.N)
    inst = _Instance.from_pair_vector(q)
    best_obj = -math.inf
    best_memb = None
    for r in range(max(1, cfg.restarts)):
        rng = np.random.default_rng([seed, r] if cfg.restarts > 1 else seed)
        state = _project_once(inst, q, rng, cfg, eps)
        if state.objective > best_obj:
            best_obj = state.objective
            best_memb = state.membership
    return Partition(best_memb)


def _project_once(inst: _Instance, q: PairVector, rng, cfg: SolverConfig, eps: float) -> SolverState:
    n = inst.n
    state = SolverState(inst, np.arange(n), cfg.screen_limit(n))
    cycles = 0
    while True:
        cycles += 1
        if cycles > cfg.max_cycles:
            warnings.warn("cycle cap reached before convergence")
            break
        obj_before = state.objective
        _local_moves(state, rng, cfg, eps)
        # aggregation hierarchy on top of the node-level solution
        node_memb = state.membership.copy()
        node_to_level = None  # node -> current-level supernode
        level_inst, level_memb = inst, state.membership
        gained = 0.0
        while True:
            coarse, compact = _aggregate(level_inst, level_memb)
            if coarse.n == level_inst.n:
                break  # nothing left to merge at this granularity
            node_to_level = compact if node_to_level is None else compact[node_to_level]
            cstate = SolverState(coarse, np.arange(coarse.n), cfg.screen_limit(coarse.n))
            moved = _local_moves(cstate, rng, cfg, eps)
            if not moved:
                break
            gained += cstate.objective
            node_memb = cstate.membership[node_to_level]
            level_inst, level_memb = coarse, cstate.membership
        if gained > 0.0:
            state = SolverState(inst, node_memb, cfg.screen_limit(n))
        if cfg.debug_checks:
            drift = abs(SolverState(inst, state.membership).objective - state.objective)
            if drift > 1e-6 * max(1.0, abs(state.objective)):
                raise AssertionError(f"tracked objective drifted by {drift:.3e}")
        if state.objective - obj_before <= eps:
            break
    return state


def exact_project(q: PairVector, cap: int | None = None) -> Partition:
    """Exhaustive optimum over all set partitions, enumerated as
    restricted-growth strings. Ties break toward the lexicographically
    smallest canonical membership. Feasible only for small n."""
    n = q.n
    limit = cap if cap is not None else SolverConfig().exact_cap
    if n > limit:
        raise ValueError(f"exact projection capped at n={limit} (got n={n})")
    Q = np.zeros((n, n))
    if n >= 2:
        iu, ju = np.triu_indices(n, k=1)
        iu = iu.astype(np.int64)
        ju = ju.astype(np.int64)
        ids = pair_id(iu, ju, n)
        vals = np.zeros(ids.size)
        if q.pair_ids.size:
            _, ix, iv = np.intersect1d(ids, q.pair_ids, assume_unique=True, return_indices=True)
            vals[ix] = q.values[iv]
        vals += q.smooth_at(iu, ju)
        Q[iu, ju] = vals
        Q[ju, iu] = vals
    memb = np.zeros(n, dtype=np.int64)
    best_intra = -math.inf
    best_memb = memb.copy()

    def rec(i: int, k: int, intra: float) -> None:
        nonlocal best_intra, best_memb
        if i == n:
            if intra > best_intra:
                best_intra = intra
                best_memb = memb.copy()
            return
        row = Q[i]
        for a in range(k):
            gain = float(row[:i][memb[:i] == a].sum())
            memb[i] = a
            rec(i + 1, k, intra + gain)
        memb[i] = k
        rec(i + 1, k + 1, intra)

    rec(0, 0, 0.0)
    return Partition(best_memb)


def max_single_move_gain(q: PairVector, C: Partition) -> float:
    """Largest objective gain any single-node relabel could achieve from C,
    checked against every community plus a fresh singleton."""
    state = SolverState.from_partition(q, C)
    best = 0.0
    for i in range(q.n):
        W, w_cur = _node_gain_vector(state, i)
        gain = 2.0 * (float(W.max()) - w_cur)
        if state.n_comms == q.n:
            gain = max(gain, -2.0 * w_cur)  # no empty slot in W; fresh community has W=0
        best = max(best, gain)
    return best


# -- evaluation -----------------------------------------------------------------


@dataclass
class DetectionResult:
    """Detected-partition metrics; fields are None when a metric is undefined."""

    d_a_qC: float | None = None
    latitude_C: float | None = None
    rho: float | None = None
    latitude_T: float | None = None
    d_a_qT: float | None = None
    d_cc_qT: float | None = None
    granularity_error: float | None = None
    excess_ratio: float | None = None
    seed: int | None = None
    solve_ms: float | None = None
    query_ms: float | None = None

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "latitude_C": self.latitude_C,
            "latitude_T": self.latitude_T,
            "d_a_qC": self.d_a_qC,
            "d_a_qT": self.d_a_qT,
            "d_cc_qT": self.d_cc_qT,
            "granularity_error": self.granularity_error,
            "excess_ratio": self.excess_ratio,
            "seed": self.seed,
            "solve_ms": self.solve_ms,
            "query_ms": self.query_ms,
        }


def evaluate(
    q: PairVector,
    detected: Partition,
    planted: Partition | None = None,
    *,
    seed: int | None = None,
    solve_ms: float | None = None,
    query_ms: float | None = None,
) -> DetectionResult:
    """All quality metrics for a detected partition, against the query and
    (when given) the planted partition. Degenerate metrics come back as None."""
    res = DetectionResult(seed=seed, solve_ms=solve_ms, query_ms=query_ms)
    res.latitude_C = partition_latitude(detected)
    try:
        res.d_a_qC = query_angular_distance(q, detected)
    except ValueError:
        pass
    if planted is None:
        return res
    res.latitude_T = partition_latitude(planted)
    try:
        res.rho = pearson_correlation(detected, planted)
    except DegeneratePartitionError:
        pass
    try:
        res.granularity_error = relative_granularity_error(detected, planted)
    except DegeneratePartitionError:
        pass
    try:
        res.d_a_qT = query_angular_distance(q, planted)
    except ValueError:
        pass
    try:
        res.d_cc_qT = query_correlation_distance(q, planted)
    except (ValueError, DegeneratePartitionError):
        pass
    if res.d_a_qC is not None and res.d_a_qT is not None and res.d_a_qT > 0:
        res.excess_ratio = res.d_a_qC / res.d_a_qT - 1.0
    return res
