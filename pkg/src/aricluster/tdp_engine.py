"""Bounds for every cluster, the query index, and output-sensitive queries.

The engine covers the forest with vertex-disjoint heavy paths (one per
leaf), runs the chain-bounds pass over the heavy-first post-order slice of
each path's opening subtree, and thereby obtains the true-discovery bound of
every cluster in total work ``sigma = sum of opening-subtree orders``.
Heavy covers minimise sigma over all minimal vertex-disjoint covers.

Queries ask for all *maximal* supra-threshold clusters whose proportion
bound reaches a threshold ``gamma``.  Only *admissible* representatives --
those whose bound strictly beats every representative ancestor's -- can ever
be an answer, so they are kept sorted by bound; a query walks the qualifying
suffix of that list, skipping entries already marked as covered by an
earlier (necessarily ancestral) output.  Marks live in a per-session scratch
buffer and only touched entries are cleared, keeping query cost proportional
to the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import admissible_kernel, all_bounds_kernel, path_meta_kernel
from .cluster_forest import ClusterForest
from .errors import InputError
from .stats_core import SimesContext

__all__ = [
    "PathCover",
    "ClusterBounds",
    "AdmissibleIndex",
    "QuerySession",
    "ClusterResult",
    "heavy_path_cover",
    "compute_all_bounds",
    "build_admissible_index",
    "query_maximal_clusters",
    "max_gamma_map",
    "size_curve",
]


@dataclass(frozen=True)
class PathCover:
    """Minimal vertex-disjoint heavy path cover of the forest.

    ``starts`` holds the opening rank of each path (every forest root plus
    every non-heavy child); ``path_of`` maps each rank to the start of the
    path covering it; ``label`` maps each rank to the leaf ending its heavy
    path.  ``sigma`` is the total chain-bounds work the cover implies, the
    sum of subtree orders over ``starts``.
    """

    starts: np.ndarray
    path_of: np.ndarray
    label: np.ndarray
    sigma: int

    @property
    def n_paths(self) -> int:
        return int(self.starts.size)

    def path_members(self, start: int, forest: ClusterForest) -> np.ndarray:
        """Ranks along the path opened by ``start`` (parent to leaf order)."""
        out = [start]
        v = forest.heavy[start]
        while v != -1:
            out.append(int(v))
            v = forest.heavy[v]
        return np.asarray(out, dtype=np.int64)


@dataclass(frozen=True)
class ClusterBounds:
    """Per-rank discovery bounds ``d`` and proportion bounds ``q = d / size``.

    Bounds are meaningful for representatives; other ranks inherit their
    cluster identity from the lowest representative ancestor.  ``label``
    carries the heavy-path terminus used to name clusters in reports.
    ``sigma`` repeats the cover's work bound; ``elements_fed`` counts what
    the chain pass actually consumed (less when the rank cutoff is active).
    """

    d: np.ndarray
    q: np.ndarray
    label: np.ndarray
    sigma: int
    elements_fed: int


@dataclass(frozen=True)
class AdmissibleIndex:
    """Admissible representatives sorted by bound, plus query support arrays.

    ``order`` lists admissible ranks ascending by ``q`` (rank-ascending on
    ties), ``q_sorted`` their bounds; ``adm_by_pos``/``pos_of_adm`` list the
    same ranks sorted by post-order position, which lets a query mark the
    admissible vertices inside an output subtree in time proportional to
    their number.
    """

    order: np.ndarray
    q_sorted: np.ndarray
    adm_by_pos: np.ndarray
    pos_of_adm: np.ndarray
    forest: ClusterForest = field(repr=False)
    bounds: ClusterBounds = field(repr=False)

    @property
    def n_admissible(self) -> int:
        return int(self.order.size)

    def new_session(self) -> "QuerySession":
        return QuerySession(self)


@dataclass(frozen=True)
class ClusterResult:
    """One reported cluster: representative rank, size, bounds, label rank."""

    rank: int
    size: int
    d: int
    q: float
    label: int
    _forest: ClusterForest = field(repr=False, compare=False)

    def member_ranks(self) -> np.ndarray:
        """Members in heavy-first post-order (representative last); lazy."""
        lo, hi = self._forest.subtree_slice(self.rank)
        return self._forest.po[lo:hi].copy()


class QuerySession:
    """Private scratch state for one sequence of queries.

    Reusable and cheap: the mark buffer is allocated once and only entries
    touched by a query are cleared afterwards.  Not safe to share between
    threads; create one session per concurrent caller.
    """

    def __init__(self, index: AdmissibleIndex):
        self.index = index
        self._marked = np.zeros(index.forest.m, dtype=bool)
        self._touched: list[tuple[int, int]] = []

    def query(self, gamma: float, sort_by_size: bool = True) -> list[ClusterResult]:
        """All maximal supra-threshold clusters with ``q >= gamma``."""
        try:
            gamma = float(gamma)
        except (TypeError, ValueError):
            raise InputError(f"gamma must be a number, got {gamma!r}") from None
        if not np.isfinite(gamma) or not (0.0 <= gamma <= 1.0):
            raise InputError(f"gamma must lie in [0, 1], got {gamma}")
        idx = self.index
        forest = idx.forest
        bounds = idx.bounds
        first = _first_qualifying(idx.q_sorted, float(gamma))
        out: list[ClusterResult] = []
        marked = self._marked
        try:
            for k in range(first, idx.order.size):
                v = int(idx.order[k])
                if marked[v]:
                    continue
                lo, hi = forest.subtree_slice(v)
                # mark admissible vertices inside this subtree (v included)
                a = int(np.searchsorted(idx.pos_of_adm, lo, side="left"))
                b = int(np.searchsorted(idx.pos_of_adm, hi - 1, side="right"))
                marked[idx.adm_by_pos[a:b]] = True
                self._touched.append((a, b))
                out.append(
                    ClusterResult(
                        rank=v,
                        size=int(forest.size[v]),
                        d=int(bounds.d[v]),
                        q=float(bounds.q[v]),
                        label=int(bounds.label[v]),
                        _forest=forest,
                    )
                )
        finally:
            for a, b in self._touched:
                marked[idx.adm_by_pos[a:b]] = False
            self._touched.clear()
        if sort_by_size:
            out.sort(key=lambda r: (-r.size, r.rank))
        return out


def _first_qualifying(q_sorted: np.ndarray, gamma: float) -> int:
    """First index of the ascending array with value >= gamma.

    Backward linear scan and binary search run in lockstep; whichever
    terminates first decides.  Worthwhile because in practice the qualifying
    suffix is usually short relative to log of the list size.
    """
    n = q_sorted.size
    if n == 0 or q_sorted[n - 1] < gamma:
        return n
    lin = n - 1
    lo, hi = 0, n - 1  # invariant: q_sorted[hi] >= gamma
    while True:
        if lin == 0 or q_sorted[lin - 1] < gamma:
            return lin
        lin -= 1
        if lo < hi:
            mid = (lo + hi) // 2
            if q_sorted[mid] >= gamma:
                hi = mid
            else:
                lo = mid + 1
            if lo == hi:
                return lo


def heavy_path_cover(forest: ClusterForest) -> PathCover:
    """The canonical minimal, vertex-disjoint, heavy path cover.

    A path opens at every root and at every non-heavy child, then follows
    heavy edges to a leaf; the cover therefore has exactly one path per
    leaf, which is the minimum possible.
    """
    path_of, label = path_meta_kernel(forest.po, forest.parent, forest.heavy, forest.m)
    ranks = np.arange(forest.m, dtype=np.int64)
    is_start = (forest.parent == -1) | (forest.heavy[forest.parent] != ranks)
    starts = np.flatnonzero(is_start).astype(np.int64)
    sigma = int(forest.size[starts].sum())
    return PathCover(starts=starts, path_of=path_of, label=label, sigma=sigma)


def compute_all_bounds(
    forest: ClusterForest,
    cover: PathCover,
    ctx: SimesContext,
    use_rank_cutoff: bool = True,
) -> ClusterBounds:
    """Discovery bounds for every cluster via one chain pass per path.

    The heavy-first post-order makes each on-path vertex's subtree a prefix
    of its path's slice, so a single chain-bounds run per path yields the
    bound of every cluster the path touches.  With ``use_rank_cutoff`` the
    ranks that cannot contribute (``>= zeta``) are skipped; results are
    identical either way.
    """
    if ctx.c.shape[0] != forest.m:
        raise InputError("context and forest disagree on vertex count")
    d, fed = all_bounds_kernel(
        forest.po,
        forest.pos,
        forest.size,
        ctx.c,
        cover.path_of,
        cover.starts,
        ctx.zeta,
        use_rank_cutoff,
    )
    q = d / forest.size
    return ClusterBounds(d=d, q=q, label=cover.label, sigma=cover.sigma, elements_fed=int(fed))


def build_admissible_index(forest: ClusterForest, bounds: ClusterBounds) -> AdmissibleIndex:
    """Collect and sort the representatives that can ever answer a query."""
    rep = forest.is_representative.astype(np.uint8)
    _, adm, _ = admissible_kernel(forest.po, forest.parent, rep, bounds.q, forest.m)
    admissible = np.flatnonzero(adm).astype(np.int64)
    order = admissible[np.lexsort((admissible, bounds.q[admissible]))]
    by_pos = admissible[np.argsort(forest.pos[admissible], kind="stable")]
    return AdmissibleIndex(
        order=order,
        q_sorted=bounds.q[order].copy(),
        adm_by_pos=by_pos,
        pos_of_adm=forest.pos[by_pos].copy(),
        forest=forest,
        bounds=bounds,
    )


def query_maximal_clusters(
    index: AdmissibleIndex, gamma: float, session: QuerySession | None = None
) -> list[ClusterResult]:
    """One-shot query; allocates a session unless one is supplied."""
    if session is None:
        session = index.new_session()
    return session.query(gamma)


def max_gamma_map(forest: ClusterForest, bounds: ClusterBounds) -> np.ndarray:
    """Per-rank largest threshold at which the rank is still covered.

    ``gamma_v`` is the maximum bound over the representatives whose cluster
    contains ``v``; a vertex appears in some query output exactly when
    ``gamma <= gamma_v``.  One forest traversal.
    """
    rep = forest.is_representative.astype(np.uint8)
    _, _, gam = admissible_kernel(forest.po, forest.parent, rep, bounds.q, forest.m)
    return gam


def size_curve(
    index: AdmissibleIndex,
    gammas,
    session: QuerySession | None = None,
) -> list[dict]:
    """Cluster sizes across a threshold grid, with split lineage.

    Returns one row per (threshold, cluster) as a dict with keys ``gamma``,
    ``label``, ``size``, ``rep`` and ``parent_label`` -- the label of the
    cluster that contained this one at the previous grid point (equal to
    ``label`` where the cluster persists, empty at the first point or where
    nothing contained it).
    """
    gammas = [float(g) for g in gammas]
    if any(not (0.0 <= g <= 1.0) for g in gammas):
        raise InputError("thresholds must lie in [0, 1]")
    if sorted(gammas) != gammas:
        raise InputError("threshold grid must be ascending")
    if session is None:
        session = index.new_session()
    forest = index.forest
    rows: list[dict] = []
    prev: list[tuple[int, int, int]] = []  # (slice lo, slice hi, label) at previous gamma
    for g in gammas:
        results = session.query(g)
        cur = []
        prev_los = np.asarray([p[0] for p in prev], dtype=np.int64)
        for r in results:
            lo, hi = forest.subtree_slice(r.rank)
            cur.append((lo, hi, r.label))
            parent_label = None
            if prev:
                k = int(np.searchsorted(prev_los, lo, side="right")) - 1
                if k >= 0 and prev[k][0] <= lo and hi <= prev[k][1]:
                    parent_label = prev[k][2]
            rows.append(
                {
                    "gamma": g,
                    "label": r.label,
                    "size": r.size,
                    "rep": r.rank,
                    "parent_label": parent_label,
                }
            )
        prev = sorted(cur)
    return rows
