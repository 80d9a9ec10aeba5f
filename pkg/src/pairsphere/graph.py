"""Undirected graphs and the pair vectors derived from them.

Provides the adjacency vector, the degree-product vector, the neighborhood
Jaccard vector, and t-step random-walk co-occurrence weights. Matrix powers
use sparse propagation with a density guard that switches to dense once the
walk matrix fills up.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._util import atomic_write_text
from .geometry import LowRankTerm, PairVector
from .pairs import num_pairs, pair_id, pair_members


@dataclass(eq=False)
class Graph:
    """Simple undirected graph: deduplicated edges, no self-loops."""

    n: int
    edges: np.ndarray  # (m, 2) int64 with edges[:,0] < edges[:,1], sorted

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.m = int(self.edges.shape[0])
        self.degrees = np.zeros(self.n, dtype=np.int64)
        if self.m:
            np.add.at(self.degrees, self.edges[:, 0], 1)
            np.add.at(self.degrees, self.edges[:, 1], 1)
        # CSR neighbor structure over both directions
        heads = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        tails = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((tails, heads))
        self._adj_tails = tails[order]
        self._adj_ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self._adj_ptr, heads + 1, 1)
        np.cumsum(self._adj_ptr, out=self._adj_ptr)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable of (u, v); drops self-loops and duplicate edges."""
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        loops = arr[:, 0] == arr[:, 1]
        if np.any(loops):
            warnings.warn(f"dropping {int(loops.sum())} self-loop(s)")
            arr = arr[~loops]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        ids = pair_id(lo, hi, n) if arr.size else np.empty(0, np.int64)
        uniq, counts = np.unique(ids, return_counts=True)
        if np.any(counts > 1):
            warnings.warn(f"dropping {int((counts - 1).sum())} duplicate edge(s)")
        keep = np.stack(pair_members(uniq, n), axis=1) if uniq.size else np.empty((0, 2), np.int64)
        return cls(n, keep)

    @property
    def N(self) -> int:
        return num_pairs(self.n)

    def neighbors(self, i: int) -> np.ndarray:
        return self._adj_tails[self._adj_ptr[i] : self._adj_ptr[i + 1]]

    def adjacency_csr(self) -> sp.csr_matrix:
        if self.m == 0:
            return sp.csr_matrix((self.n, self.n))
        row = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        col = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(2 * self.m)
        return sp.csr_matrix((data, (row, col)), shape=(self.n, self.n))


@dataclass(eq=False)
class WalkDistribution:
    """Pair weights of the symmetric matrix diag(s) P^t plus the stationary law s."""

    n: int
    t: int
    pair_ids: np.ndarray
    weights: np.ndarray
    stationary: np.ndarray


def adjacency_vector(G: Graph) -> PairVector:
    """Sparse pair vector with entry 1 on every edge."""
    ids = pair_id(G.edges[:, 0], G.edges[:, 1], G.n) if G.m else np.empty(0, np.int64)
    return PairVector(G.n, ids, np.ones(G.m))


def degree_product_vector(G: Graph) -> PairVector:
    """Single rank-one term: entry (i, j) equals d_i * d_j / (2m)."""
    if G.m == 0:
        raise ValueError("degree-product vector undefined for an empty graph")
    term = LowRankTerm(1.0 / (2.0 * G.m), G.degrees.astype(np.float64))
    return PairVector(G.n, np.empty(0, np.int64), np.empty(0), (term,))


def jaccard_vector(G: Graph) -> PairVector:
    """Jaccard similarity of closed neighborhoods, for pairs that share any
    closed neighbor. Entries lie in (0, 1]; adjacent pairs always qualify."""
    B = G.adjacency_csr() + sp.identity(G.n, format="csr")
    common = (B @ B.T).tocoo()
    mask = common.row < common.col
    ii, jj, shared = common.row[mask], common.col[mask], common.data[mask]
    closed_deg = G.degrees + 1
    union = closed_deg[ii] + closed_deg[jj] - shared
    ids = pair_id(ii.astype(np.int64), jj.astype(np.int64), G.n)
    order = np.argsort(ids)
    return PairVector(G.n, ids[order], (shared / union)[order])


def walk_distribution(
    G: Graph, t: int, dense_threshold: float = 0.5, isolated: str = "error"
) -> WalkDistribution:
    """Random-walk co-occurrence weights after t steps.

    Computes diag(s) P^t for the simple random walk (P_ij = 1/d_i on edges,
    s = d/(2m)) and returns its upper-triangle pair weights. The matrix is
    symmetric for undirected graphs, so symmetrization only cancels round-off.
    Sparse propagation switches to dense when P^t exceeds the given fill
    fraction of all n^2 cells.

    Isolated nodes leave P without a defined row; by default they raise.
    isolated="zero" instead assigns them zero stationary mass, which is the
    exact value of diag(s) P^t on the subgraph of non-isolated nodes (an
    isolated node is never visited, so all its pair weights vanish).
    """
    if t < 1:
        raise ValueError("walk length must be at least 1")
    if G.n == 0:
        raise ValueError("empty graph")
    if isolated not in ("error", "zero"):
        raise ValueError("isolated must be 'error' or 'zero'")
    if np.any(G.degrees == 0) and isolated == "error":
        bad = int(np.argmin(G.degrees))
        raise ValueError(f"graph has an isolated node ({bad}); random walk undefined")
    if G.m == 0:
        raise ValueError("graph has no edges; random walk undefined")
    A = G.adjacency_csr()
    inv_deg = np.zeros(G.n)
    np.divide(1.0, G.degrees, out=inv_deg, where=G.degrees > 0)
    P = (sp.diags(inv_deg) @ A).tocsr()
    Pt = P
    dense = None
    p_dense = None
    for _ in range(t - 1):
        if dense is None:
            Pt = Pt @ P
            if Pt.nnz > dense_threshold * G.n * G.n:
                dense = Pt.toarray()
        else:
            if p_dense is None:
                p_dense = P.toarray()
            dense = dense @ p_dense
    s = G.degrees / (2.0 * G.m)
    if dense is not None:
        M = dense * s[:, None]
        W = 0.5 * (M + M.T)
        iu, ju = np.triu_indices(G.n, k=1)
        vals = W[iu, ju]
        keep = vals != 0.0
        ii, jj, vals = iu[keep], ju[keep], vals[keep]
    else:
        M = (sp.diags(s) @ Pt).tocoo()
        Msym = 0.5 * (M + M.T)
        Msym = Msym.tocoo()
        mask = Msym.row < Msym.col
        ii, jj, vals = Msym.row[mask], Msym.col[mask], Msym.data[mask]
    ids = pair_id(ii.astype(np.int64), jj.astype(np.int64), G.n)
    order = np.argsort(ids)
    return WalkDistribution(G.n, t, ids[order], vals[order], s)


# -- edge-list file format -----------------------------------------------------


def write_edges(path, G: Graph) -> None:
    """One `<u> <v>` line per edge."""
    lines = [f"{int(u)} {int(v)}" for u, v in G.edges]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_edges(path) -> tuple[Graph, dict | None]:
    """Read an edge list; `#` comments ignored.

    Node ids that are 0-based contiguous integers are used directly; any other
    tokens are mapped to dense ids in file order and the mapping is returned.
    """
    tokens: list[tuple[str, str]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected '<u> <v>'")
            tokens.append((parts[0], parts[1]))
    if not tokens:
        raise ValueError(f"{path}: no edges")
    as_int = True
    try:
        ints = [(int(u), int(v)) for u, v in tokens]
    except ValueError:
        as_int = False
    if as_int:
        flat = {u for uv in ints for u in uv}
        lo, hi = min(flat), max(flat)
        if lo == 0 and flat == set(range(hi + 1)):
            return Graph.from_edges(hi + 1, ints), None
    id_map: dict[str, int] = {}
    mapped = []
    for u, v in tokens:
        iu = id_map.setdefault(u, len(id_map))
        iv = id_map.setdefault(v, len(id_map))
        mapped.append((iu, iv))
    return Graph.from_edges(len(id_map), mapped), id_map
