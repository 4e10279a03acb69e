"""Statistical primitives for simultaneous true-discovery bounds.

Given per-vertex p-values and a significance level ``alpha``, everything
downstream rests on four quantities computed here:

* ``h`` -- the largest number of hypotheses whose joint Simes test is not
  rejected at level ``alpha``;
* ``zeta`` -- a rank cutoff: only the ``zeta`` smallest p-values can ever
  contribute to a true-discovery bound;
* ``c(v)`` -- an integer discretisation of each p-value chosen so that
  ``h * p_v <= j * alpha`` holds exactly when ``c(v) <= j``;
* the naive, quadratic reference forms of the true-discovery-number bound
  ``d(S)`` and the proportion bound ``q(S) = d(S) / |S|``.

The naive forms are direct transcriptions of the defining formulas and exist
so the fast paths elsewhere in the package can be tested against them.

Conventions: ranks are 0-based everywhere in code; rank ``r`` carries the
``(r+1)``-th smallest p-value.  All comparisons between ``i * p`` and
``j * alpha`` are evaluated directly in double precision with no epsilon
fudging, so pathological near-tie inputs may flip under reordering; the
definitional scans in the test suite use the identical comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._kernels import discretize_kernel, simes_h_kernel, z_to_p_kernel
from .errors import InputError

__all__ = [
    "SortedPValues",
    "SimesContext",
    "sort_pvalues",
    "compute_h",
    "compute_zeta",
    "discretize",
    "build_simes_context",
    "naive_delta",
    "naive_d",
    "naive_q",
    "z_to_p",
    "z_to_p_array",
]


@dataclass(frozen=True)
class SortedPValues:
    """P-values in ascending order, with the permutation back to vertex ids.

    Attributes
    ----------
    m : int
        Number of vertices.
    perm : ndarray of int64
        ``perm[r]`` is the original vertex id holding rank ``r``.  Ties in
        p-values are broken by ascending vertex id (stable sort), so the
        ranking is deterministic.
    ranks : ndarray of int64
        Inverse of ``perm``: ``ranks[vertex_id]`` is the vertex's rank.
    values : ndarray of float64
        P-values in weakly ascending order; ``values[r]`` belongs to rank ``r``.
    alpha : float
        Significance level in (0, 1).  Fixed per structure: ``h``, ``zeta``,
        the discretisation, and every bound depend on it.
    """

    m: int
    perm: np.ndarray
    ranks: np.ndarray
    values: np.ndarray
    alpha: float


@dataclass(frozen=True)
class SimesContext:
    """Everything bound computation needs: ``h``, ``zeta``, ``c``, ``alpha``.

    ``c`` is rank-indexed and weakly ascending; ``zeta == 0`` iff ``h == m``.
    """

    h: int
    zeta: int
    c: np.ndarray
    alpha: float


def sort_pvalues(raw, alpha: float) -> SortedPValues:
    """Validate and rank raw per-vertex p-values.

    Parameters
    ----------
    raw : array-like of float
        One p-value per vertex, indexed by 0-based vertex id.
    alpha : float
        Significance level, strictly between 0 and 1.

    Raises
    ------
    InputError
        On an empty input, an alpha outside (0, 1), or any non-finite or
        out-of-range p-value (the offending vertex is named).
    """
    values = np.asarray(raw, dtype=np.float64)
    if values.ndim != 1:
        raise InputError(f"p-values must be one-dimensional, got shape {values.shape}")
    if values.size == 0:
        raise InputError("empty p-value input: need at least one vertex")
    if not (0.0 < alpha < 1.0):
        raise InputError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    bad = ~(np.isfinite(values) & (values >= 0.0) & (values <= 1.0))
    if bad.any():
        vertex = int(np.argmax(bad))
        raise InputError(
            f"invalid p-value {values[vertex]!r} at vertex {vertex}: "
            "must be finite and in [0, 1]"
        )
    perm = np.argsort(values, kind="stable").astype(np.int64)
    ranks = np.empty_like(perm)
    ranks[perm] = np.arange(values.size, dtype=np.int64)
    return SortedPValues(
        m=int(values.size),
        perm=perm,
        ranks=ranks,
        values=values[perm],
        alpha=float(alpha),
    )


def compute_h(sp: SortedPValues) -> int:
    """Largest ``i`` such that ``i * p[m-i+j] > j * alpha`` for all ``j in [i]``.

    Linear two-pointer scan.  Feasibility of ``i`` is inherited by ``i - 1``
    (cross-multiplication shows each per-vertex constraint relaxes), so the
    candidate ``i`` only ever decreases while the vertex pointer advances.
    """
    return int(simes_h_kernel(sp.values, sp.alpha))


def compute_zeta(sp: SortedPValues, h: int) -> int:
    """Rank cutoff: bounds of any set only depend on its ranks ``<= zeta``.

    Returns 0 when ``h == m``.  Otherwise returns the smallest 1-based rank
    ``v`` in ``{m-h, ..., m}`` with ``h * p_v <= (v - m + h + 1) * alpha``;
    the maximality of ``h`` guarantees such a rank exists.
    """
    m = sp.m
    if h == m:
        return 0
    vs = np.arange(m - h, m + 1, dtype=np.int64)
    ok = h * sp.values[vs - 1] <= (vs - m + h + 1) * sp.alpha
    idx = int(np.argmax(ok))
    if not ok[idx]:
        raise AssertionError("no qualifying rank for zeta; h is not maximal")
    return int(vs[idx])


def discretize(sp: SortedPValues, h: int) -> np.ndarray:
    """Integer discretisation ``c(v) = max(1, ceil(h * p_v / alpha))``.

    The returned array is adjusted so that ``h * p_v <= j * alpha`` and
    ``c(v) <= j`` are equivalent for every positive integer ``j`` under the
    exact float64 comparisons used throughout the package.
    """
    return discretize_kernel(sp.values, h, sp.alpha)


def build_simes_context(sp: SortedPValues) -> SimesContext:
    """Compute ``h``, ``zeta`` and the discretised p-values in one go."""
    h = compute_h(sp)
    return SimesContext(h=h, zeta=compute_zeta(sp, h), c=discretize(sp, h), alpha=sp.alpha)


def _rank_array(members: Iterable[int], m: int) -> np.ndarray:
    ranks = np.asarray(list(members) if not isinstance(members, np.ndarray) else members)
    if ranks.size == 0:
        return ranks.astype(np.int64)
    ranks = ranks.astype(np.int64)
    if ranks.min() < 0 or ranks.max() >= m:
        raise InputError("rank out of range")
    if np.unique(ranks).size != ranks.size:
        raise InputError("duplicate ranks in vertex set")
    return ranks


def naive_delta(members: Iterable[int], j: int, ctx: SimesContext) -> int:
    """``|{v in S : c(v) <= j}| - j + 1`` for a set ``S`` of ranks."""
    if j < 1:
        raise InputError(f"j must be a positive integer, got {j}")
    ranks = _rank_array(members, ctx.c.shape[0])
    count = 0 if ranks.size == 0 else int(np.count_nonzero(ctx.c[ranks] <= j))
    return count - j + 1


def naive_d(members: Iterable[int], ctx: SimesContext) -> int:
    """True-discovery-number bound of a rank set, by direct maximisation.

    ``d(S) = max_{j in [|S|]} delta(S, j)`` and ``d(empty) = 0``.  Extending
    the range of ``j`` beyond ``|S|`` never changes the result.
    """
    ranks = _rank_array(members, ctx.c.shape[0])
    if ranks.size == 0:
        return 0
    cs = np.sort(ctx.c[ranks])
    js = np.arange(1, ranks.size + 1, dtype=np.int64)
    counts = np.searchsorted(cs, js, side="right")
    return int(np.max(counts - js + 1))


def naive_q(members: Iterable[int], ctx: SimesContext) -> float:
    """True-discovery-proportion bound ``d(S) / |S|``; empty sets are errors."""
    ranks = _rank_array(members, ctx.c.shape[0])
    if ranks.size == 0:
        raise InputError("proportion bound of an empty set is undefined")
    return naive_d(ranks, ctx) / ranks.size


_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_TINY = 5e-324  # smallest positive subnormal double


def z_to_p(z: float) -> float:
    """One-sided upper-tail standard normal p-value of a z-score.

    Monotone decreasing in ``z``; clamped into (0, 1] so that extreme
    z-scores never produce an exact zero.
    """
    if not math.isfinite(z):
        raise InputError(f"z-score must be finite, got {z}")
    p = 0.5 * math.erfc(z * _INV_SQRT2)
    return min(1.0, max(_TINY, p))


def z_to_p_array(z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`z_to_p`; input must already be free of non-finite values."""
    return z_to_p_kernel(np.ascontiguousarray(z, dtype=np.float64))
