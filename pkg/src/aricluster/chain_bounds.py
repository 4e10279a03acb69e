"""True-discovery-number bounds along an ascending chain of vertex sets.

A chain is described by the discretised p-values ``c_1, ..., c_ell`` of its
defining sequence: the i-th prefix set consists of the vertices contributing
``c_1 .. c_i``.  :func:`compute_tdn_bounds` returns the bound of every prefix
in one linear-ish pass by maintaining a partition of ``{1..ell}`` into
consecutive integer intervals; each input value either bumps the running
bound (its interval touches 1) or merges its interval with the one directly
to the left.

:func:`naive_chain_bounds` is the quadratic reference implementation used to
cross-check the fast pass, and :func:`chain_bounds_with_cutoff` applies the
rank cutoff ``zeta`` as a pre-filter without changing any output.
"""

from __future__ import annotations

import numpy as np

from ._kernels import chain_bounds_kernel
from .errors import InputError

__all__ = [
    "IntervalPartition",
    "compute_tdn_bounds",
    "naive_chain_bounds",
    "chain_bounds_with_cutoff",
]


class IntervalPartition:
    """Partition of ``{1..ell}`` into consecutive integer intervals.

    Supports interval lookup by member, querying an interval's minimum, and
    merging an interval with its immediate left neighbour -- the only
    mutation the chain-bounds pass ever needs.  Backed by a path-compressed
    disjoint-set structure with the minimum tracked at each root.
    """

    def __init__(self, ell: int):
        if ell < 1:
            raise InputError(f"interval partition needs ell >= 1, got {ell}")
        self.ell = ell
        self._parent = list(range(ell))
        self._min = list(range(ell))  # stored at roots; 0-based
        self._size = [1] * ell

    def find(self, value: int) -> int:
        """Root id of the interval containing ``value`` (1-based)."""
        if not (1 <= value <= self.ell):
            raise InputError(f"value {value} outside [1, {self.ell}]")
        r = value - 1
        while self._parent[r] != r:
            r = self._parent[r]
        x = value - 1
        while self._parent[x] != r:
            self._parent[x], x = r, self._parent[x]
        return r

    def minimum(self, root: int) -> int:
        """Smallest member (1-based) of the interval with the given root."""
        return self._min[root] + 1

    def merge_left(self, root: int) -> int:
        """Merge the interval at ``root`` with its immediate left neighbour."""
        mn = self._min[root]
        if mn == 0:
            raise InputError("leftmost interval has no left neighbour")
        left = self.find(mn)  # interval containing mn-1 (1-based mn)
        if self._size[root] < self._size[left]:
            root, left = left, root
        self._parent[left] = root
        self._size[root] += self._size[left]
        self._min[root] = min(self._min[root], self._min[left])
        return root

    def intervals(self) -> list[tuple[int, int]]:
        """All intervals as 1-based ``(lo, hi)`` pairs, ascending."""
        members: dict[int, list[int]] = {}
        for v in range(1, self.ell + 1):
            members.setdefault(self.find(v), []).append(v)
        out = sorted((min(vs), max(vs)) for vs in members.values())
        return out

    def check(self) -> None:
        """Assert the structural invariant: disjoint consecutive cover of [ell]."""
        ivs = self.intervals()
        expect_lo = 1
        for lo, hi in ivs:
            if lo != expect_lo or hi < lo:
                raise AssertionError(f"intervals {ivs} do not tile [1, {self.ell}]")
            root = self.find(lo)
            if self.minimum(root) != lo:
                raise AssertionError(f"stored minimum of {lo, hi} is stale")
            expect_lo = hi + 1
        if expect_lo != self.ell + 1:
            raise AssertionError(f"intervals {ivs} do not cover [1, {self.ell}]")


def _validated_c(c) -> np.ndarray:
    arr = np.asarray(c)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError("chain must contain at least one discretised p-value")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.all(rounded == arr):
            raise InputError("discretised p-values must be integers")
        arr = rounded
    arr = arr.astype(np.int64)
    if arr.min() < 1:
        bad = int(np.argmax(arr < 1))
        raise InputError(f"discretised p-value {arr[bad]} at chain position {bad} is < 1")
    return arr


def compute_tdn_bounds(c, validate: bool = False) -> np.ndarray:
    """Bounds ``d(V_1), ..., d(V_ell)`` for the prefix chain defined by ``c``.

    Parameters
    ----------
    c : array-like of int
        Discretised p-values of the chain's defining sequence; all >= 1.
        Values exceeding the chain length are legal and simply cannot
        contribute.
    validate : bool
        Use the pure-Python :class:`IntervalPartition` path and assert its
        structural invariant after every step (slow; for debugging).

    Returns
    -------
    ndarray of int64, same length as ``c``, weakly increasing in steps of 0/1.
    """
    arr = _validated_c(c)
    if not validate:
        return chain_bounds_kernel(arr)
    ell = arr.size
    partition = IntervalPartition(ell)
    out = np.empty(ell, dtype=np.int64)
    d = 0
    for i, ci in enumerate(arr):
        if ci <= ell:
            root = partition.find(int(ci))
            if partition.minimum(root) == 1:
                d += 1
            else:
                partition.merge_left(root)
            partition.check()
        out[i] = d
    return out


def naive_chain_bounds(c) -> np.ndarray:
    """Quadratic reference: evaluate ``max_j delta(V_i, j)`` per prefix.

    Builds the full (prefix x j) table of ``|{v in V_i : c(v) <= j}| - j + 1``
    and maximises row-wise; the maximum over ``j in [ell]`` equals the
    maximum over ``j in [|V_i|]`` because extending the range never helps.
    """
    arr = _validated_c(c)
    ell = arr.size
    js = np.arange(1, ell + 1, dtype=np.int64)
    hits = arr[:, None] <= js[None, :]  # hits[i, j-1]: c_{i+1} <= j
    counts = np.cumsum(hits, axis=0)  # counts[i, j-1]: |{v in V_{i+1} : c(v) <= j}|
    return np.max(counts - js[None, :] + 1, axis=1).astype(np.int64)


def chain_bounds_with_cutoff(c, member_ranks, zeta: int) -> np.ndarray:
    """Chain bounds with the rank cutoff applied as a pre-filter.

    Members whose 0-based rank is ``>= zeta`` are dropped from the chain
    before the fast pass; their prefix positions are remembered so the
    output stays aligned with the original sequence.  Output-identical to
    ``compute_tdn_bounds(c)`` whenever ``zeta`` comes from the same
    discretisation.
    """
    arr = _validated_c(c)
    ranks = np.asarray(member_ranks, dtype=np.int64)
    if ranks.shape != arr.shape:
        raise InputError("member_ranks must align with c")
    keep = ranks < zeta
    kept_prefix = np.cumsum(keep)
    if not keep.any():
        return np.zeros(arr.size, dtype=np.int64)
    d_kept = chain_bounds_kernel(arr[keep])
    out = np.zeros(arr.size, dtype=np.int64)
    nonzero = kept_prefix > 0
    out[nonzero] = d_kept[kept_prefix[nonzero] - 1]
    return out
