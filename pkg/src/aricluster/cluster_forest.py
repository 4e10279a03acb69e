"""Forest encoding of every supra-threshold cluster.

Vertices are processed in ascending rank (p-value) order; when rank ``v``
arrives, each edge to an already-present component attaches that component's
root below ``v``.  The subtree rooted at any rank ``v`` then holds exactly
the connected component of ``v`` among the vertices with rank ``<= v``, so
the forest enumerates all supra-threshold clusters at once.  A cluster is
*represented* by its largest rank; a rank whose parent carries the same
p-value denotes a component that is not maximal for its threshold and is
therefore not a supra-threshold cluster.

Children are ordered heavy-first (largest subtree, ties to the smallest
rank) with the remaining children ascending, which makes the stored
post-order, and everything derived from it, deterministic.
"""

from __future__ import annotations

import numpy as np

from ._kernels import (
    accumulate_sizes_kernel,
    build_forest_kernel,
    children_csr_kernel,
    group_edges_kernel,
    post_order_kernel,
)
from .errors import InputError
from .graph_model import Graph
from .stats_core import SortedPValues

__all__ = ["ClusterForest", "build_forest", "forest_from_parents", "representatives", "subtree_members"]


class ClusterForest:
    """Directed rooted forest over ranks with subtree metadata.

    Attributes
    ----------
    parent : ndarray
        Parent rank per rank, -1 at roots; parents always have larger ranks.
    size : ndarray
        Subtree order per rank.
    heavy : ndarray
        The child with the largest subtree (smallest rank on ties), -1 at
        leaves; always the first entry of the child list.
    child_indptr, child_list : ndarray
        Child lists in CSR form, heavy child first.
    roots : ndarray
        Ranks without parents, ascending; one per connected component.
    po, pos : ndarray
        Heavy-first post-order and its inverse.  The subtree of ``v`` spans
        positions ``[pos[v] - size[v] + 1, pos[v]]`` of ``po``.
    is_representative : ndarray of bool
        True where the subtree is a supra-threshold cluster.
    """

    def __init__(self, parent, size, heavy, child_indptr, child_list, roots, po, pos,
                 is_representative):
        self.m = int(parent.shape[0])
        self.parent = parent
        self.size = size
        self.heavy = heavy
        self.child_indptr = child_indptr
        self.child_list = child_list
        self.roots = roots
        self.po = po
        self.pos = pos
        self.is_representative = is_representative

    def children(self, v: int) -> np.ndarray:
        return self.child_list[self.child_indptr[v]:self.child_indptr[v + 1]]

    def subtree_slice(self, v: int) -> tuple[int, int]:
        """Half-open position range of the subtree rooted at ``v``."""
        hi = int(self.pos[v])
        return hi - int(self.size[v]) + 1, hi + 1


def build_forest(graph: Graph, sp: SortedPValues) -> ClusterForest:
    """Run the incremental-connectivity construction on a ranked graph.

    Costs one find and at most one union per edge.  Requires
    ``graph.m == sp.m``.
    """
    if graph.m != sp.m:
        raise InputError(f"graph has {graph.m} vertices but {sp.m} p-values were ranked")
    m = sp.m
    ranks32 = sp.ranks.astype(np.int32)
    ru = ranks32[graph.edges_u]
    rv = ranks32[graph.edges_v]
    lo_sorted, hi_sorted = group_edges_kernel(
        np.minimum(ru, rv), np.maximum(ru, rv), m
    )
    parent, size, heavy = build_forest_kernel(lo_sorted, hi_sorted, m)
    rep = np.ones(m, dtype=bool)
    non_root = parent >= 0
    rep[non_root] = sp.values[parent[non_root]] != sp.values[non_root.nonzero()[0]]
    return _assemble(parent, size, heavy, rep)


def forest_from_parents(parent, is_representative=None) -> ClusterForest:
    """Forest from an explicit parent array (parents must outrank children).

    Used by the synthetic-tree generators and the cover studies, where no
    graph or p-values exist; representative flags default to all-true.
    """
    parent = np.asarray(parent, dtype=np.int64)
    m = parent.shape[0]
    if m < 1:
        raise InputError("forest needs at least one vertex")
    non_root = parent >= 0
    if (parent[non_root] <= np.flatnonzero(non_root)).any():
        raise InputError("parent rank must exceed child rank")
    if (parent >= m).any():
        raise InputError("parent rank out of range")
    size, heavy = accumulate_sizes_kernel(parent, m)
    if is_representative is None:
        rep = np.ones(m, dtype=bool)
    else:
        rep = np.asarray(is_representative, dtype=bool).copy()
    return _assemble(parent, size, heavy, rep)


def _assemble(parent, size, heavy, rep) -> ClusterForest:
    m = parent.shape[0]
    child_indptr, child_list = children_csr_kernel(parent, heavy, m)
    roots = np.flatnonzero(parent == -1).astype(np.int64)
    po, pos = post_order_kernel(child_indptr, child_list, roots, m)
    return ClusterForest(parent, size, heavy, child_indptr, child_list, roots, po, pos, rep)


def representatives(forest: ClusterForest) -> np.ndarray:
    """Ranks whose subtree is a supra-threshold cluster (ascending)."""
    return np.flatnonzero(forest.is_representative).astype(np.int64)


def subtree_members(forest: ClusterForest, v: int) -> np.ndarray:
    """Members of the component of ``v``, in heavy-first post-order, ``v`` last."""
    if not (0 <= v < forest.m):
        raise InputError(f"rank {v} out of range [0, {forest.m})")
    lo, hi = forest.subtree_slice(v)
    return forest.po[lo:hi].copy()
