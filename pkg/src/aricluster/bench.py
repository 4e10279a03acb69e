"""Synthetic instance generators and the timing harness.

Three graph families are supported: voxel cubes (k^3 vertices, face/edge
adjacency by default), perfect binary trees (the adversarial case for the
bound-computation phase), and unbalanced caterpillars (the classic example
of why path covers must be chosen heavy).  P-values are cubes of standard
uniforms from a seeded PCG64 generator, so every scenario is reproducible
bit-for-bit; for trees they are permuted so the grown forest reproduces the
generating tree's shape.

``run_bench`` measures the three construction phases and per-threshold query
times, averaged over repetitions after one discarded warm-up, and returns
rows ready for CSV emission.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph_model import Graph, GridSpec, grid_to_graph
from .pipeline import ARIStructure

__all__ = [
    "BenchScenario",
    "gen_cube",
    "gen_perfect_binary_tree",
    "gen_caterpillar",
    "gen_pvalues",
    "run_bench",
    "write_bench_csv",
    "BENCH_CSV_COLUMNS",
    "DEFAULT_GAMMA_GRID",
]

FAMILIES = ("cube", "perfect_binary_tree", "caterpillar")
DEFAULT_MAX_VERTICES = 2**26
DEFAULT_GAMMA_GRID = [round(0.01 * i, 2) for i in range(101)]
BENCH_CSV_COLUMNS = ["scenario", "family", "m", "phase_or_gamma", "seconds", "output_size", "sigma"]


@dataclass(frozen=True)
class BenchScenario:
    """One benchmark configuration.

    ``size`` means the cube edge length k, the tree depth, or the
    caterpillar order, depending on the family.
    """

    family: str
    size: int
    connectivity: int = 18
    seed: int = 0
    repetitions: int = 3
    alpha: float = 0.05

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.size < 1:
            raise InputError(f"size parameter must be >= 1, got {self.size}")
        if self.repetitions < 1:
            raise InputError("need at least one repetition")

    @property
    def name(self) -> str:
        return f"{self.family}-{self.size}-c{self.connectivity}-s{self.seed}"


def gen_pvalues(m: int, seed: int) -> np.ndarray:
    """Cubed standard uniforms from a seeded PCG64 stream, all in (0, 1)."""
    if m < 1:
        raise InputError(f"need m >= 1, got {m}")
    rng = np.random.default_rng(np.random.PCG64(seed))
    u = rng.random(m)
    while (u == 0.0).any():  # measure-zero, but keep the open interval exact
        zeros = u == 0.0
        u[zeros] = rng.random(int(zeros.sum()))
    return u**3


def gen_cube(k: int, connectivity: int = 18, max_vertices: int = DEFAULT_MAX_VERTICES):
    """Voxel cube of k^3 vertices with a full mask.

    Returns ``(graph, grid_spec, voxel_of_vertex)``.
    """
    if k < 1:
        raise InputError(f"cube edge length must be >= 1, got {k}")
    if k**3 > max_vertices:
        raise InputError(f"cube of {k}^3 = {k**3} vertices exceeds the budget of {max_vertices}")
    spec = GridSpec(dims=(k, k, k), connectivity=connectivity, mask=np.ones(k**3, dtype=bool))
    graph, voxel_of_vertex, _ = grid_to_graph(spec)
    return graph, spec, voxel_of_vertex


def _heap_post_order(m: int) -> np.ndarray:
    """Post-order of the heap-labelled complete binary tree on [0, m)."""
    order = np.empty(m, dtype=np.int64)
    stack_v = np.empty(2 * m + 2, dtype=np.int64)
    stack_state = np.empty(2 * m + 2, dtype=np.int64)
    depth = 0
    stack_v[0] = 0
    stack_state[0] = 0
    k = 0
    while depth >= 0:
        v = stack_v[depth]
        state = stack_state[depth]
        child = 2 * v + 1 + state
        if state < 2 and child < m:
            stack_state[depth] += 1
            depth += 1
            stack_v[depth] = child
            stack_state[depth] = 0
        elif state < 2:
            stack_state[depth] += 1
        else:
            order[k] = v
            k += 1
            depth -= 1
    return order


def gen_perfect_binary_tree(depth: int, seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Perfect binary tree of order 2**depth - 1 with compatible p-values.

    P-values are assigned ascending along a post-order of the tree, so every
    vertex outranks its whole subtree and the grown forest reproduces the
    tree's own shape (up to edge direction).
    """
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    m = 2**depth - 1
    children = np.arange(1, m, dtype=np.int64)
    parents = (children - 1) // 2
    graph = Graph.from_edges(m, parents, children)
    post = _heap_post_order(m)
    raw = np.empty(m, dtype=np.float64)
    raw[post] = _sorted_distinct_pvalues(m, seed)
    return graph, raw


def gen_caterpillar(m: int, seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Unbalanced caterpillar of even order m with compatible p-values.

    The spine holds the top half of the ranks; spine rank ``m-1-j`` carries
    the pendant leaf of rank ``j``.  A cover by spine-to-leaf pairs (built
    only in tests) has quadratic total work, while the heavy cover stays
    linear.
    """
    if m < 2 or m % 2 != 0:
        raise InputError(f"caterpillar order must be even and >= 2, got {m}")
    s = m // 2
    us, vs = [], []
    for k in range(m - 1, s, -1):  # spine chain m-1, m-2, ..., s
        us.append(k)
        vs.append(k - 1)
    for j in range(s - 1):  # pendant leaves along the spine
        us.append(m - 1 - j)
        vs.append(j)
    if s >= 1:  # the spine end picks up the last leaf
        us.append(s)
        vs.append(s - 1)
    graph = Graph.from_edges(m, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64))
    raw = _sorted_distinct_pvalues(m, seed)  # vertex id == rank
    return graph, raw


def _sorted_distinct_pvalues(m: int, seed: int) -> np.ndarray:
    p = np.sort(gen_pvalues(m, seed))
    while (np.diff(p) == 0.0).any():  # ties would merge ranks; regenerate
        seed += 1_000_003
        p = np.sort(gen_pvalues(m, seed))
    return p


def _instance(scenario: BenchScenario):
    if scenario.family == "cube":
        graph, spec, voxel_of_vertex = gen_cube(scenario.size, scenario.connectivity)
        raw = gen_pvalues(graph.m, scenario.seed)
        return graph, raw, spec, voxel_of_vertex
    if scenario.family == "perfect_binary_tree":
        graph, raw = gen_perfect_binary_tree(scenario.size, scenario.seed)
        return graph, raw, None, None
    graph, raw = gen_caterpillar(scenario.size, scenario.seed)
    return graph, raw, None, None


def run_bench(scenario: BenchScenario, gammas=None) -> list[dict]:
    """Time construction phases and queries; one warm-up run is discarded.

    Returns one row per construction phase and one per threshold, with the
    average output size (total vertices over all reported clusters) in the
    threshold rows.
    """
    gammas = DEFAULT_GAMMA_GRID if gammas is None else [float(g) for g in gammas]
    graph, raw, spec, voxel_of_vertex = _instance(scenario)

    ARIStructure.build(graph, raw, scenario.alpha, grid=spec, voxel_of_vertex=voxel_of_vertex)

    phase_sums = {"forest": 0.0, "bounds": 0.0, "index": 0.0}
    query_sums = {g: 0.0 for g in gammas}
    output_sizes = {g: 0 for g in gammas}
    sigma = 0
    for _ in range(scenario.repetitions):
        structure = ARIStructure.build(
            graph, raw, scenario.alpha, grid=spec, voxel_of_vertex=voxel_of_vertex
        )
        sigma = structure.bounds.sigma
        for phase in phase_sums:
            phase_sums[phase] += structure.timings[phase]
        session = structure.new_session()
        for g in gammas:
            t0 = time.perf_counter()
            results = session.query(g)
            query_sums[g] += time.perf_counter() - t0
            output_sizes[g] = sum(r.size for r in results)

    reps = scenario.repetitions
    rows = []
    for phase in ("forest", "bounds", "index"):
        rows.append(
            {
                "scenario": scenario.name,
                "family": scenario.family,
                "m": graph.m,
                "phase_or_gamma": phase,
                "seconds": phase_sums[phase] / reps,
                "output_size": "",
                "sigma": sigma,
            }
        )
    for g in gammas:
        rows.append(
            {
                "scenario": scenario.name,
                "family": scenario.family,
                "m": graph.m,
                "phase_or_gamma": f"{g:g}",
                "seconds": query_sums[g] / reps,
                "output_size": output_sizes[g],
                "sigma": sigma,
            }
        )
    return rows


def write_bench_csv(rows: list[dict], path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
