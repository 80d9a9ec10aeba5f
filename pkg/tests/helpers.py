"""Shared test oracles: dense reference implementations, independent of the
package's sparse-plus-low-rank closed forms.

Everything here materializes full N-vectors or n x n matrices, which is why
it is test-only and gated to small n.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from pairsphere.geometry import LowRankTerm, PairVector


def dense_of(v: PairVector) -> np.ndarray:
    """Materialize a pair vector as a dense length-N array (lex pair order).

    np.triu_indices enumerates pairs in the same lexicographic order the
    package's flat pair ids use, so sparse values land at their ids directly.
    """
    assert v.n <= 64, "dense reference gated to small n"
    iu, ju = np.triu_indices(v.n, k=1)
    out = np.full(iu.size, float(v.constant))
    for t in v.terms:
        out += t.coef * t.factor[iu] * t.factor[ju]
    if v.pair_ids.size:
        out[v.pair_ids] += v.values
    return out


def dense_partition_vector(membership) -> np.ndarray:
    """+-1 pair embedding of a membership array, densely."""
    membership = np.asarray(membership)
    iu, ju = np.triu_indices(membership.size, k=1)
    return np.where(membership[iu] == membership[ju], 1.0, -1.0)


def random_sl_vector(rng, n, sparse_density=0.3, n_terms=2, with_constant=True) -> PairVector:
    """Random sparse-plus-low-rank vector for property tests."""
    pairs = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < sparse_density:
                pairs[(i, j)] = rng.normal()
    terms = tuple(
        LowRankTerm(rng.normal(), rng.normal(size=n)) for _ in range(rng.integers(0, n_terms + 1))
    )
    const = rng.normal() * 0.5 if with_constant else 0.0
    return PairVector.from_pairs(n, pairs, terms, const)


def random_membership(rng, n, k_max=None) -> np.ndarray:
    k = int(rng.integers(1, (k_max or n) + 1))
    memb = rng.integers(0, k, size=n)
    return memb


def nontrivial_membership(rng, n) -> np.ndarray:
    """A membership that is neither all-singletons nor one cluster."""
    while True:
        memb = random_membership(rng, n)
        sizes = np.bincount(memb)
        intra = int((sizes * (sizes - 1) // 2).sum())
        if 0 < intra < n * (n - 1) // 2:
            return memb


@lru_cache(maxsize=None)
def all_partitions(n: int) -> tuple:
    """Every set partition of [0, n) as a canonical membership tuple
    (restricted-growth strings, lexicographic order)."""
    results = []

    def grow(prefix, k):
        i = len(prefix)
        if i == n:
            results.append(tuple(prefix))
            return
        for a in range(k):
            grow(prefix + [a], k)
        grow(prefix + [k], k + 1)

    grow([], 0)
    return tuple(results)


def random_graph_edges(rng, n, p) -> list:
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def dense_adjacency(n, edges) -> np.ndarray:
    A = np.zeros((n, n))
    for u, v in edges:
        A[u, v] = A[v, u] = 1.0
    return A


# -- original quality functions (brute-force, dense) ---------------------------------


def erm_objective(A: np.ndarray, membership, gamma: float) -> float:
    """Edge count inside communities minus gamma * density * intra pairs."""
    n = A.shape[0]
    m = A.sum() / 2.0
    N = n * (n - 1) / 2.0
    acc = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if membership[i] == membership[j]:
                acc += A[i, j] - gamma * m / N
    return acc / (2.0 * m)


def clm_objective(A: np.ndarray, membership, gamma: float) -> float:
    n = A.shape[0]
    deg = A.sum(axis=1)
    m = A.sum() / 2.0
    acc = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if membership[i] == membership[j]:
                acc += A[i, j] - gamma * deg[i] * deg[j] / (2.0 * m)
    return acc / (2.0 * m)


def markov_trace_objective(A: np.ndarray, membership, t: int) -> float:
    """Trace of H^T (diag(s) P^t - s s^T) H via dense matrix power."""
    deg = A.sum(axis=1)
    P = A / deg[:, None]
    Pt = np.linalg.matrix_power(P, t)
    s = deg / deg.sum()
    X = np.diag(s) @ Pt - np.outer(s, s)
    k = int(np.max(membership)) + 1
    H = np.zeros((A.shape[0], k))
    H[np.arange(A.shape[0]), membership] = 1.0
    return float(np.trace(H.T @ X @ H))


def corclust_objective(w_plus: dict, w_minus: dict, membership, n: int) -> float:
    acc = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if membership[i] == membership[j]:
                acc += w_plus.get((i, j), 0.0)
            else:
                acc += w_minus.get((i, j), 0.0)
    return acc


def binary_ppm_loglik(A: np.ndarray, membership, p_in: float, p_out: float) -> float:
    acc = 0.0
    n = A.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if membership[i] == membership[j] else p_out
            a = A[i, j]
            acc += np.log(p**a * (1 - p) ** (1 - a))
    return float(acc)


def same_ranking(key1, key2, tol1=None, tol2=None) -> bool:
    """True iff the two key arrays induce the same weak order (ties included)."""
    key1 = np.asarray(key1, dtype=float)
    key2 = np.asarray(key2, dtype=float)
    if tol1 is None:
        tol1 = 1e-9 * max(np.ptp(key1), 1e-30)
    if tol2 is None:
        tol2 = 1e-9 * max(np.ptp(key2), 1e-30)
    d1 = key1[:, None] - key1[None, :]
    d2 = key2[:, None] - key2[None, :]
    s1 = np.where(np.abs(d1) <= tol1, 0, np.sign(d1))
    s2 = np.where(np.abs(d2) <= tol2, 0, np.sign(d2))
    return bool(np.all(s1 == s2))
