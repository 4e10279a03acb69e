"""Binary persistence of a built structure.

Layout (all little-endian, fixed width):

=======  ========================================================
offset   field
=======  ========================================================
0        magic ``ARIF1`` (5 bytes)
5        format version, u8 (currently 1)
6        flags, u16 (bit 0: grid metadata present)
8        m, u64
16       h, u64
24       zeta, u64
32       alpha, f64
40       n_admissible, u64
48       sigma, u64
56       perm, u32[m]               rank -> vertex id
...      parent, i32[m]             -1 at roots
...      size, u32[m]
...      is_representative, u8[m]
...      d, u32[m]                  discovery bound per rank
...      admissible list, u32[n]    ranks, ascending by bound
...      grid block when flagged: dims u32[3], connectivity u32,
         voxel_of_vertex u32[m], mask bitmap u8[ceil(voxels/8)]
=======  ========================================================

Bounds are persisted as integers (``q`` is re-derived as ``d / size`` on
load), so a load/save round trip reproduces every query answer bit-exactly.
The magic and version are checked before any other byte is interpreted.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .cluster_forest import forest_from_parents
from .errors import PersistError
from .graph_model import GridSpec
from .pipeline import ARIStructure
from .tdp_engine import AdmissibleIndex, ClusterBounds, heavy_path_cover

__all__ = ["save_structure", "load_structure", "MAGIC", "VERSION"]

MAGIC = b"ARIF1"
VERSION = 1
_HEADER = struct.Struct("<5sBHQQQdQQ")
_FLAG_GRID = 1


def save_structure(structure: ARIStructure, path) -> None:
    m = structure.m
    if m >= 2**32:
        raise PersistError(f"vertex count {m} exceeds the u32 format limit")
    has_grid = structure.grid is not None and structure.voxel_of_vertex is not None
    flags = _FLAG_GRID if has_grid else 0
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        flags,
        m,
        structure.h,
        structure.zeta,
        structure.alpha,
        structure.index.n_admissible,
        structure.bounds.sigma,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        structure.perm.astype("<u4").tofile(fh)
        structure.forest.parent.astype("<i4").tofile(fh)
        structure.forest.size.astype("<u4").tofile(fh)
        structure.forest.is_representative.astype("<u1").tofile(fh)
        structure.bounds.d.astype("<u4").tofile(fh)
        structure.index.order.astype("<u4").tofile(fh)
        if has_grid:
            np.asarray(structure.grid.dims, dtype="<u4").tofile(fh)
            np.asarray([structure.grid.connectivity], dtype="<u4").tofile(fh)
            structure.voxel_of_vertex.astype("<u4").tofile(fh)
            np.packbits(structure.grid.mask.astype(np.uint8)).tofile(fh)


def _take(buf: memoryview, offset: int, dtype, count: int) -> tuple[np.ndarray, int]:
    dtype = np.dtype(dtype)
    nbytes = dtype.itemsize * count
    if offset + nbytes > len(buf):
        raise PersistError("structure file is truncated")
    arr = np.frombuffer(buf[offset:offset + nbytes], dtype=dtype)
    return arr, offset + nbytes


def load_structure(path) -> ARIStructure:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise PersistError("file too small to hold a structure header")
    magic, version, flags, m, h, zeta, alpha, n_adm, sigma = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise PersistError(f"bad magic {magic!r}; not a structure file")
    if version != VERSION:
        raise PersistError(f"unsupported format version {version} (expected {VERSION})")
    buf = memoryview(raw)
    off = _HEADER.size
    perm, off = _take(buf, off, "<u4", m)
    parent, off = _take(buf, off, "<i4", m)
    size, off = _take(buf, off, "<u4", m)
    rep, off = _take(buf, off, "<u1", m)
    d, off = _take(buf, off, "<u4", m)
    order, off = _take(buf, off, "<u4", n_adm)

    grid = None
    voxel_of_vertex = None
    if flags & _FLAG_GRID:
        dims, off = _take(buf, off, "<u4", 3)
        conn, off = _take(buf, off, "<u4", 1)
        vov, off = _take(buf, off, "<u4", m)
        n_voxels = int(dims[0]) * int(dims[1]) * int(dims[2])
        packed, off = _take(buf, off, "<u1", (n_voxels + 7) // 8)
        mask = np.unpackbits(packed)[:n_voxels].astype(bool)
        grid = GridSpec(
            dims=(int(dims[0]), int(dims[1]), int(dims[2])),
            connectivity=int(conn[0]),
            mask=mask,
        )
        voxel_of_vertex = vov.astype(np.int64)
    if off != len(raw):
        raise PersistError(f"{len(raw) - off} unexpected trailing bytes")

    forest = forest_from_parents(parent.astype(np.int64), rep.astype(bool))
    if not np.array_equal(forest.size, size.astype(np.int64)):
        raise PersistError("stored subtree sizes are inconsistent with the parent array")
    cover = heavy_path_cover(forest)
    d64 = d.astype(np.int64)
    bounds = ClusterBounds(
        d=d64,
        q=d64 / forest.size,
        label=cover.label,
        sigma=int(sigma),
        elements_fed=0,
    )
    order64 = order.astype(np.int64)
    by_pos = order64[np.argsort(forest.pos[order64], kind="stable")]
    index = AdmissibleIndex(
        order=order64,
        q_sorted=bounds.q[order64].copy(),
        adm_by_pos=by_pos,
        pos_of_adm=forest.pos[by_pos].copy(),
        forest=forest,
        bounds=bounds,
    )
    return ARIStructure(
        m=int(m),
        alpha=float(alpha),
        h=int(h),
        zeta=int(zeta),
        perm=perm.astype(np.int64),
        forest=forest,
        cover=cover,
        bounds=bounds,
        index=index,
        grid=grid,
        voxel_of_vertex=voxel_of_vertex,
    )
