"""Adaptive true-discovery-proportion thresholding on sparse graphs.

Given per-vertex p-values and a connectivity graph, this package enumerates
every supra-threshold cluster in a rooted forest, attaches a simultaneous
lower confidence bound on each cluster's true-discovery proportion, and
answers post-hoc queries for all maximal clusters meeting any proportion
threshold in time proportional to the output.
"""

from .chain_bounds import (
    IntervalPartition,
    chain_bounds_with_cutoff,
    compute_tdn_bounds,
    naive_chain_bounds,
)
from .cluster_forest import (
    ClusterForest,
    build_forest,
    forest_from_parents,
    representatives,
    subtree_members,
)
from .errors import InputError, ParseError, PersistError
from .graph_model import (
    Graph,
    GridSpec,
    grid_to_graph,
    load_edge_list,
    load_volume,
    save_edge_list,
    statistic_to_pvalues,
)
from .pipeline import ARIStructure
from .stats_core import (
    SimesContext,
    SortedPValues,
    build_simes_context,
    compute_h,
    compute_zeta,
    discretize,
    naive_d,
    naive_delta,
    naive_q,
    sort_pvalues,
    z_to_p,
    z_to_p_array,
)
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
    query_maximal_clusters,
    size_curve,
)

__version__ = "0.1.0"

__all__ = [
    "ARIStructure",
    "AdmissibleIndex",
    "ClusterBounds",
    "ClusterForest",
    "ClusterResult",
    "Graph",
    "GridSpec",
    "InputError",
    "IntervalPartition",
    "ParseError",
    "PathCover",
    "PersistError",
    "QuerySession",
    "SimesContext",
    "SortedPValues",
    "build_admissible_index",
    "build_forest",
    "build_simes_context",
    "chain_bounds_with_cutoff",
    "compute_all_bounds",
    "compute_h",
    "compute_tdn_bounds",
    "compute_zeta",
    "discretize",
    "forest_from_parents",
    "grid_to_graph",
    "heavy_path_cover",
    "load_edge_list",
    "load_volume",
    "max_gamma_map",
    "naive_chain_bounds",
    "naive_d",
    "naive_delta",
    "naive_q",
    "query_maximal_clusters",
    "representatives",
    "save_edge_list",
    "size_curve",
    "sort_pvalues",
    "statistic_to_pvalues",
    "subtree_members",
    "z_to_p",
    "z_to_p_array",
]
