"""Graph and voxel-grid representations plus file ingestion.

Vertices are dense 0-based integers.  Grids enumerate in-mask voxels in
x-fastest linear order (``index = x + nx * (y + ny * z)``); out-of-mask
voxels are absent from the graph entirely, so ``m`` always counts analysed
voxels only.

File formats (all documented in the README):

* edge list -- text, one ``u v`` pair per line, 0-based ids, ``#`` comments;
* p-value list -- text, one decimal per line, line ``i`` belongs to vertex ``i``;
* volume -- a small JSON header naming raw little-endian binary sidecars.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .stats_core import z_to_p_array

__all__ = [
    "Graph",
    "GridSpec",
    "grid_to_graph",
    "load_edge_list",
    "save_edge_list",
    "load_volume",
    "statistic_to_pvalues",
]

_CONNECTIVITIES = (6, 18, 26)


class Graph:
    """Undirected simple graph over dense vertex ids ``[0, m)``.

    Edges are stored canonically (``u < v``, deduplicated, sorted); adjacency
    lists are materialised lazily.  Instances are immutable once built and
    safe to share across threads.
    """

    def __init__(self, m: int, edges_u: np.ndarray, edges_v: np.ndarray):
        self.m = int(m)
        self.edges_u = edges_u
        self.edges_v = edges_v
        self._indptr: np.ndarray | None = None
        self._adj: np.ndarray | None = None

    @classmethod
    def from_edges(cls, m: int, u, v, canonical: bool = False) -> "Graph":
        """Build from endpoint arrays; symmetrises, deduplicates, validates.

        With ``canonical=True`` the caller asserts the pairs are already
        oriented ``u < v`` and free of duplicates (as the grid construction
        guarantees), which skips the O(E log E) dedup sort.
        """
        if m < 1:
            raise InputError(f"graph needs at least one vertex, got m={m}")
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise InputError("edge endpoint arrays differ in length")
        if u.size:
            if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= m:
                raise InputError(f"edge endpoint outside [0, {m})")
            if canonical:
                if not (u < v).all():
                    raise InputError("canonical edges must satisfy u < v")
                lo, hi = u, v
            else:
                if (u == v).any():
                    bad = int(u[np.argmax(u == v)])
                    raise InputError(f"self-loop at vertex {bad} is not allowed")
                keys = np.unique(np.minimum(u, v) * np.int64(m) + np.maximum(u, v))
                lo = keys // m
                hi = keys % m
        else:
            lo = np.empty(0, dtype=np.int64)
            hi = np.empty(0, dtype=np.int64)
        # int32 keeps the hot edge arrays cache-friendly; m < 2**31 always
        return cls(m, lo.astype(np.int32), hi.astype(np.int32))

    @property
    def edge_count(self) -> int:
        return int(self.edges_u.size)

    def _build_adjacency(self) -> None:
        both_u = np.concatenate([self.edges_u, self.edges_v])
        both_v = np.concatenate([self.edges_v, self.edges_u])
        order = np.argsort(both_u, kind="stable")
        counts = np.bincount(both_u, minlength=self.m)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._adj = both_v[order]

    def neighbors(self, vertex: int) -> np.ndarray:
        """Neighbour ids of ``vertex`` (ascending)."""
        if self._adj is None:
            self._build_adjacency()
        lo, hi = self._indptr[vertex], self._indptr[vertex + 1]
        return np.sort(self._adj[lo:hi])


@dataclass(frozen=True)
class GridSpec:
    """A 3-D voxel grid with an in-analysis mask.

    ``mask`` is flat in x-fastest order and must match ``nx * ny * nz``.
    ``connectivity`` selects the neighbourhood: 6 (shared face), 18 (shared
    face or edge: Chebyshev distance 1 and Manhattan distance <= 2), or 26
    (shared face, edge, or corner: Chebyshev distance 1).
    """

    dims: tuple[int, int, int]
    connectivity: int
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise InputError(f"grid dims must be positive, got {self.dims}")
        if self.connectivity not in _CONNECTIVITIES:
            raise InputError(
                f"connectivity must be one of {_CONNECTIVITIES}, got {self.connectivity}"
            )
        mask = np.asarray(self.mask, dtype=bool).ravel()
        if mask.size != nx * ny * nz:
            raise InputError(
                f"mask has {mask.size} entries, expected nx*ny*nz = {nx * ny * nz}"
            )
        if not mask.any():
            raise InputError("mask excludes every voxel; nothing to analyse")
        object.__setattr__(self, "mask", mask)

    @property
    def n_voxels(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def m(self) -> int:
        return int(np.count_nonzero(self.mask))


def _half_offsets(connectivity: int) -> list[tuple[int, int, int]]:
    offsets = []
    for dz in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if (dz, dy, dx) <= (0, 0, 0):
                    continue  # keep one representative per +/- pair
                manhattan = abs(dx) + abs(dy) + abs(dz)
                if connectivity == 6 and manhattan > 1:
                    continue
                if connectivity == 18 and manhattan > 2:
                    continue
                offsets.append((dx, dy, dz))
    return offsets


def grid_to_graph(spec: GridSpec) -> tuple[Graph, np.ndarray, np.ndarray]:
    """Connectivity graph of the in-mask voxels.

    Returns
    -------
    graph : Graph
        Vertices are in-mask voxels, numbered densely in x-fastest linear
        order.
    voxel_of_vertex : ndarray
        Linear voxel index of each vertex.
    vertex_of_voxel : ndarray
        Dense vertex id per voxel, -1 where out of mask.
    """
    nx, ny, nz = spec.dims
    mask3 = spec.mask.reshape(nz, ny, nx)
    lin3 = np.arange(spec.n_voxels, dtype=np.int64).reshape(nz, ny, nx)
    voxel_of_vertex = np.flatnonzero(spec.mask).astype(np.int64)
    vertex_of_voxel = np.full(spec.n_voxels, -1, dtype=np.int64)
    vertex_of_voxel[voxel_of_vertex] = np.arange(voxel_of_vertex.size, dtype=np.int64)

    full_mask = bool(spec.mask.all())

    def shifted(sl_a, sl_b):
        if full_mask:
            return lin3[sl_a].ravel(), lin3[sl_b].ravel()
        keep = mask3[sl_a] & mask3[sl_b]
        return lin3[sl_a][keep], lin3[sl_b][keep]

    us, vs = [], []
    for dx, dy, dz in _half_offsets(spec.connectivity):
        sl_a, sl_b = [], []
        for d, n in ((dz, nz), (dy, ny), (dx, nx)):
            if d == 1:
                sl_a.append(slice(0, n - 1))
                sl_b.append(slice(1, n))
            elif d == -1:
                sl_a.append(slice(1, n))
                sl_b.append(slice(0, n - 1))
            else:
                sl_a.append(slice(0, n))
                sl_b.append(slice(0, n))
        a, b = shifted(tuple(sl_a), tuple(sl_b))
        if a.size:
            us.append(a)
            vs.append(b)
    if us:
        # every realised offset points to a strictly larger linear index, and
        # distinct offsets yield distinct pairs, so the edges arrive canonical
        eu = vertex_of_voxel[np.concatenate(us)]
        ev = vertex_of_voxel[np.concatenate(vs)]
    else:
        eu = np.empty(0, dtype=np.int64)
        ev = np.empty(0, dtype=np.int64)
    graph = Graph.from_edges(spec.m, eu, ev, canonical=True)
    return graph, voxel_of_vertex, vertex_of_voxel


def load_edge_list(edges_path, pvalues_path) -> tuple[Graph, np.ndarray]:
    """Read an edge-list graph plus its per-vertex p-value file.

    The p-value file fixes the vertex count; every edge endpoint must lie in
    range.  Duplicate and reversed edges collapse; self-loops are rejected.
    """
    pvalues = _read_pvalue_file(pvalues_path)
    m = pvalues.size
    us, vs = [], []
    path = Path(edges_path)
    if not path.exists():
        raise ParseError("edge-list file not found", path=str(path))
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ParseError(
                    f"expected 'u v', got {line.strip()!r}", path=str(path), line=lineno
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(
                    f"non-integer vertex id in {line.strip()!r}",
                    path=str(path),
                    line=lineno,
                ) from None
            if not (0 <= u < m) or not (0 <= v < m):
                raise ParseError(
                    f"vertex id out of range [0, {m}) in {line.strip()!r}",
                    path=str(path),
                    line=lineno,
                )
            if u == v:
                raise ParseError(
                    f"self-loop at vertex {u}", path=str(path), line=lineno
                )
            us.append(u)
            vs.append(v)
    graph = Graph.from_edges(m, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64))
    return graph, pvalues


def _read_pvalue_file(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ParseError("p-value file not found", path=str(path))
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ParseError(
                    f"not a decimal: {text!r}", path=str(path), line=lineno
                ) from None
    if not values:
        raise ParseError("no p-values in file", path=str(path))
    return np.asarray(values, dtype=np.float64)


def save_edge_list(graph: Graph, path) -> None:
    """Write the canonical edge list (one ``u v`` per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in zip(graph.edges_u, graph.edges_v):
            fh.write(f"{u} {v}\n")


_DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}


def load_volume(header_path) -> tuple[GridSpec, np.ndarray, str]:
    """Read a volume header and its binary sidecars.

    The header is a JSON object with keys ``dims`` ([nx, ny, nz]),
    ``connectivity`` (6/18/26), ``dtype`` ("f32"/"f64"), ``statistic``
    ("p"/"z"), ``data`` (raw little-endian values, x-fastest) and optional
    ``mask`` (raw uint8, nonzero = in analysis).  Sidecar paths resolve
    relative to the header location.

    Returns the grid spec, the in-mask statistic values in vertex order, and
    the statistic kind.  NaNs inside the mask are rejected (the voxel is
    named); NaNs outside the mask are ignored.
    """
    header_path = Path(header_path)
    if not header_path.exists():
        raise ParseError("volume header not found", path=str(header_path))
    try:
        header = json.loads(header_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON header: {exc}", path=str(header_path)) from None
    for key in ("dims", "connectivity", "dtype", "statistic", "data"):
        if key not in header:
            raise ParseError(f"header is missing key {key!r}", path=str(header_path))
    dims = tuple(int(d) for d in header["dims"])
    if len(dims) != 3:
        raise ParseError(f"dims must have 3 entries, got {header['dims']}", path=str(header_path))
    if header["dtype"] not in _DTYPES:
        raise ParseError(
            f"dtype must be one of {sorted(_DTYPES)}, got {header['dtype']!r}",
            path=str(header_path),
        )
    statistic = header["statistic"]
    if statistic not in ("p", "z"):
        raise ParseError(
            f"statistic must be 'p' or 'z', got {statistic!r}", path=str(header_path)
        )
    dtype = _DTYPES[header["dtype"]]
    n_voxels = dims[0] * dims[1] * dims[2]

    data_path = header_path.parent / header["data"]
    if not data_path.exists():
        raise ParseError(f"data file not found: {data_path}", path=str(header_path))
    expected = n_voxels * dtype.itemsize
    actual = data_path.stat().st_size
    if actual != expected:
        raise ParseError(
            f"data file {data_path} holds {actual} bytes, expected {expected} "
            f"({n_voxels} voxels x {dtype.itemsize} bytes)",
            path=str(header_path),
        )
    data = np.fromfile(data_path, dtype=dtype).astype(np.float64)

    if header.get("mask"):
        mask_path = header_path.parent / header["mask"]
        if not mask_path.exists():
            raise ParseError(f"mask file not found: {mask_path}", path=str(header_path))
        if mask_path.stat().st_size != n_voxels:
            raise ParseError(
                f"mask file {mask_path} holds {mask_path.stat().st_size} bytes, "
                f"expected {n_voxels}",
                path=str(header_path),
            )
        mask = np.fromfile(mask_path, dtype=np.uint8) != 0
    else:
        mask = np.ones(n_voxels, dtype=bool)

    spec = GridSpec(dims=dims, connectivity=int(header["connectivity"]), mask=mask)
    in_mask = data[spec.mask]
    bad = ~np.isfinite(in_mask)
    if bad.any():
        voxel = int(np.flatnonzero(spec.mask)[np.argmax(bad)])
        nx, ny = dims[0], dims[1]
        x = voxel % nx
        y = (voxel // nx) % ny
        z = voxel // (nx * ny)
        raise ParseError(
            f"non-finite statistic inside mask at voxel {voxel} (x={x}, y={y}, z={z})",
            path=str(header_path),
        )
    return spec, in_mask, statistic


def statistic_to_pvalues(values: np.ndarray, statistic: str) -> np.ndarray:
    """Convert a statistic array to p-values ('p' passes through, 'z' converts)."""
    if statistic == "p":
        return np.asarray(values, dtype=np.float64)
    if statistic == "z":
        return z_to_p_array(values)
    raise InputError(f"unknown statistic kind {statistic!r}")
