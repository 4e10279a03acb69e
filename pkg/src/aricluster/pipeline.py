"""End-to-end construction and the query-ready structure facade.

``ARIStructure.build`` runs the full preprocessing pipeline -- rank the
p-values, derive the Simes context, grow the cluster forest, cover it with
heavy paths, compute every bound, and index the admissible representatives
-- recording per-phase wall times along the way.  The result is immutable;
concurrent callers should each use their own :class:`QuerySession` (or the
convenience methods, which keep a default session per structure).
"""

from __future__ import annotations

import time

import numpy as np

from .cluster_forest import ClusterForest, build_forest
from .errors import InputError
from .graph_model import Graph, GridSpec
from .stats_core import SimesContext, SortedPValues, build_simes_context, sort_pvalues
from .tdp_engine import (
    AdmissibleIndex,
    ClusterBounds,
    ClusterResult,
    PathCover,
    QuerySession,
    build_admissible_index,
    compute_all_bounds,
    heavy_path_cover,
    max_gamma_map,
    size_curve,
)

__all__ = ["ARIStructure"]


class ARIStructure:
    """Query-ready adaptive-thresholding structure.

    Attributes of note: ``sp`` (ranked p-values; absent after loading from
    disk), ``ctx`` (h / zeta / discretised values), ``forest``, ``cover``,
    ``bounds``, ``index``, ``timings`` (phase wall times in seconds), and
    optional grid metadata (``grid``, ``voxel_of_vertex``).
    """

    def __init__(
        self,
        *,
        m: int,
        alpha: float,
        h: int,
        zeta: int,
        perm: np.ndarray,
        forest: ClusterForest,
        cover: PathCover,
        bounds: ClusterBounds,
        index: AdmissibleIndex,
        sp: SortedPValues | None = None,
        ctx: SimesContext | None = None,
        grid: GridSpec | None = None,
        voxel_of_vertex: np.ndarray | None = None,
        edge_count: int | None = None,
        timings: dict | None = None,
    ):
        self.m = m
        self.alpha = alpha
        self.h = h
        self.zeta = zeta
        self.perm = perm
        self.forest = forest
        self.cover = cover
        self.bounds = bounds
        self.index = index
        self.sp = sp
        self.ctx = ctx
        self.grid = grid
        self.voxel_of_vertex = voxel_of_vertex
        self.edge_count = edge_count
        self.timings = timings or {}
        self._default_session: QuerySession | None = None

    @classmethod
    def build(
        cls,
        graph: Graph,
        raw_pvalues,
        alpha: float,
        *,
        grid: GridSpec | None = None,
        voxel_of_vertex: np.ndarray | None = None,
        use_rank_cutoff: bool = True,
    ) -> "ARIStructure":
        """Construct from a graph and raw per-vertex p-values."""
        t0 = time.perf_counter()
        sp = sort_pvalues(raw_pvalues, alpha)
        ctx = build_simes_context(sp)
        t1 = time.perf_counter()
        forest = build_forest(graph, sp)
        t2 = time.perf_counter()
        cover = heavy_path_cover(forest)
        bounds = compute_all_bounds(forest, cover, ctx, use_rank_cutoff=use_rank_cutoff)
        t3 = time.perf_counter()
        index = build_admissible_index(forest, bounds)
        t4 = time.perf_counter()
        timings = {
            "sort": t1 - t0,
            "forest": t2 - t1,
            "bounds": t3 - t2,
            "index": t4 - t3,
            "total": t4 - t0,
        }
        return cls(
            m=sp.m,
            alpha=sp.alpha,
            h=ctx.h,
            zeta=ctx.zeta,
            perm=sp.perm,
            forest=forest,
            cover=cover,
            bounds=bounds,
            index=index,
            sp=sp,
            ctx=ctx,
            grid=grid,
            voxel_of_vertex=voxel_of_vertex,
            edge_count=graph.edge_count,
            timings=timings,
        )

    # -- queries ---------------------------------------------------------

    def new_session(self) -> QuerySession:
        return self.index.new_session()

    def _session(self) -> QuerySession:
        if self._default_session is None:
            self._default_session = self.new_session()
        return self._default_session

    def query(self, gamma: float, session: QuerySession | None = None) -> list[ClusterResult]:
        """Maximal clusters with proportion bound >= ``gamma`` (size-descending)."""
        return (session or self._session()).query(gamma)

    def size_curve(self, gammas, session: QuerySession | None = None) -> list[dict]:
        return size_curve(self.index, gammas, session or self._session())

    def gamma_map_by_rank(self) -> np.ndarray:
        return max_gamma_map(self.forest, self.bounds)

    def gamma_map_by_vertex(self) -> np.ndarray:
        """Largest covering threshold per original vertex id."""
        by_rank = self.gamma_map_by_rank()
        out = np.empty(self.m, dtype=np.float64)
        out[self.perm] = by_rank
        return out

    def gamma_map_volume(self) -> np.ndarray:
        """Float32 volume of the threshold map, NaN outside the mask."""
        if self.grid is None or self.voxel_of_vertex is None:
            raise InputError("structure carries no grid metadata")
        volume = np.full(self.grid.n_voxels, np.nan, dtype=np.float32)
        volume[self.voxel_of_vertex] = self.gamma_map_by_vertex().astype(np.float32)
        return volume

    def member_vertices(self, result: ClusterResult) -> np.ndarray:
        """Original vertex ids of a cluster's members."""
        return self.perm[result.member_ranks()]

    # -- reporting -------------------------------------------------------

    def meta(self) -> dict:
        info = {
            "m": self.m,
            "alpha": self.alpha,
            "h": self.h,
            "zeta": self.zeta,
            "edge_count": self.edge_count,
            "n_representatives": int(self.forest.is_representative.sum()),
            "n_admissible": self.index.n_admissible,
            "n_components": int(self.forest.roots.size),
            "sigma": self.bounds.sigma,
            "elements_fed": self.bounds.elements_fed,
            "timings": dict(self.timings),
        }
        if self.grid is not None:
            info["grid"] = {
                "dims": list(self.grid.dims),
                "connectivity": self.grid.connectivity,
            }
        else:
            info["grid"] = None
        return info

    # -- persistence (format lives in persist.py) -------------------------

    def save(self, path) -> None:
        from . import persist

        persist.save_structure(self, path)

    @classmethod
    def load(cls, path) -> "ARIStructure":
        from . import persist

        return persist.load_structure(path)
