"""Numba-compiled hot loops.

Kernels operate on plain int64/float64 arrays, allocate nothing inside inner
loops beyond their scratch buffers, and perform no input validation -- the
public wrappers own that.  All of them are deterministic.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def discretize_kernel(values, h, alpha):
    # c[r] = smallest integer j >= 1 with h*values[r] <= j*alpha, where the
    # comparison is the exact float64 comparison used everywhere else.
    m = values.shape[0]
    c = np.empty(m, np.int64)
    for r in range(m):
        hp = h * values[r]
        j = int(math.ceil(hp / alpha))
        if j < 1:
            j = 1
        while hp > j * alpha:
            j += 1
        while j > 1 and hp <= (j - 1) * alpha:
            j -= 1
        c[r] = j
    return c


@njit(cache=True)
def simes_h_kernel(values, alpha):
    # Two-pointer scan for the largest i with i*p[m-i+j] > j*alpha for all
    # j in [i].  Feasibility is inherited downward per vertex, so i only
    # ever decreases while the vertex pointer t advances: O(m) total.
    m = values.shape[0]
    i = m
    t = 0
    while t < i:
        while i > t and not (i * values[m - 1 - t] > (i - t) * alpha):
            i -= 1
        t += 1
    return i


@njit(cache=True)
def z_to_p_kernel(z):
    m = z.shape[0]
    p = np.empty(m, np.float64)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    tiny = 5e-324
    for i in range(m):
        v = 0.5 * math.erfc(z[i] * inv_sqrt2)
        if v > 1.0:
            v = 1.0
        if v < tiny:
            v = tiny
        p[i] = v
    return p


@njit(cache=True)
def group_edges_kernel(lo, hi, m):
    # Counting sort of edges by their larger endpoint; O(E + m) and stable.
    n = lo.shape[0]
    counts = np.zeros(m + 1, np.int64)
    for e in range(n):
        counts[hi[e] + 1] += 1
    for v in range(m):
        counts[v + 1] += counts[v]
    lo_sorted = np.empty_like(lo)
    hi_sorted = np.empty_like(hi)
    fill = counts[:m].copy()
    for e in range(n):
        v = hi[e]
        k = fill[v]
        lo_sorted[k] = lo[e]
        hi_sorted[k] = v
        fill[v] = k + 1
    return lo_sorted, hi_sorted


@njit(cache=True)
def build_forest_kernel(edge_lo, edge_hi, m):
    # Incremental connectivity over ranks.  Edges must be pre-sorted by their
    # larger endpoint `edge_hi` ascending; each edge costs one find and at
    # most one union.  `top` maps a disjoint-set root to the current root of
    # the corresponding subtree (its largest rank).
    parent = np.full(m, -1, np.int64)
    size = np.ones(m, np.int64)
    heavy = np.full(m, -1, np.int64)
    dsu_parent = np.arange(m)
    dsu_size = np.ones(m, np.int64)
    top = np.arange(m)
    n_edges = edge_lo.shape[0]
    i = 0
    while i < n_edges:
        v = edge_hi[i]
        cur = v  # disjoint-set root of v's growing component
        while i < n_edges and edge_hi[i] == v:
            u = edge_lo[i]
            i += 1
            r = u
            while dsu_parent[r] != r:
                r = dsu_parent[r]
            x = u
            while dsu_parent[x] != r:
                nxt = dsu_parent[x]
                dsu_parent[x] = r
                x = nxt
            w = top[r]
            if w == v:
                continue  # endpoints already connected below v
            parent[w] = v
            size[v] += size[w]
            hv = heavy[v]
            if hv == -1 or size[w] > size[hv] or (size[w] == size[hv] and w < hv):
                heavy[v] = w
            if dsu_size[cur] < dsu_size[r]:
                tmp = cur
                cur = r
                r = tmp
            dsu_parent[r] = cur
            dsu_size[cur] += dsu_size[r]
            top[cur] = v
    return parent, size, heavy


@njit(cache=True)
def accumulate_sizes_kernel(parent, m):
    # Subtree sizes plus heavy-child selection for a parent array that
    # already satisfies parent[v] > v for non-roots.
    size = np.ones(m, np.int64)
    heavy = np.full(m, -1, np.int64)
    for v in range(m):
        p = parent[v]
        if p >= 0:
            size[p] += size[v]
            hp = heavy[p]
            if hp == -1 or size[v] > size[hp] or (size[v] == size[hp] and v < hp):
                heavy[p] = v
    return size, heavy


@njit(cache=True)
def children_csr_kernel(parent, heavy, m):
    # Child lists in CSR form: heavy child first, remaining children in
    # ascending rank order (deterministic regardless of edge input order).
    indptr = np.zeros(m + 1, np.int64)
    for v in range(m):
        p = parent[v]
        if p >= 0:
            indptr[p + 1] += 1
    for v in range(m):
        indptr[v + 1] += indptr[v]
    childlist = np.empty(indptr[m], np.int64)
    fill = indptr[:m].copy()
    for v in range(m):
        p = parent[v]
        if p >= 0:
            childlist[fill[p]] = v
            fill[p] += 1
    for v in range(m):
        hv = heavy[v]
        if hv >= 0:
            s = indptr[v]
            e = indptr[v + 1]
            for k in range(s, e):
                if childlist[k] == hv:
                    j = k
                    while j > s:
                        childlist[j] = childlist[j - 1]
                        j -= 1
                    childlist[s] = hv
                    break
    return indptr, childlist


@njit(cache=True)
def post_order_kernel(indptr, childlist, roots, m):
    # Heavy-child-first post-order of the whole forest.  The members of the
    # subtree rooted at v occupy positions [pos[v]-size[v]+1, pos[v]].
    po = np.empty(m, np.int64)
    pos = np.empty(m, np.int64)
    stack_v = np.empty(m, np.int64)
    stack_ci = np.empty(m, np.int64)
    k = 0
    for ri in range(roots.shape[0]):
        depth = 0
        stack_v[0] = roots[ri]
        stack_ci[0] = 0
        while depth >= 0:
            v = stack_v[depth]
            ci = stack_ci[depth]
            if ci < indptr[v + 1] - indptr[v]:
                stack_ci[depth] += 1
                depth += 1
                stack_v[depth] = childlist[indptr[v] + ci]
                stack_ci[depth] = 0
            else:
                po[k] = v
                pos[v] = k
                k += 1
                depth -= 1
    return po, pos


@njit(cache=True)
def path_meta_kernel(po, parent, heavy, m):
    # pathstart[v]: first vertex of the heavy path covering v.
    # label[v]: leaf at the end of the heavy path running through v.
    pathstart = np.empty(m, np.int64)
    label = np.empty(m, np.int64)
    for k in range(m - 1, -1, -1):  # parents before children
        v = po[k]
        p = parent[v]
        if p == -1 or heavy[p] != v:
            pathstart[v] = v
        else:
            pathstart[v] = pathstart[p]
    for k in range(m):  # children before parents
        v = po[k]
        hv = heavy[v]
        if hv == -1:
            label[v] = v
        else:
            label[v] = label[hv]
    return pathstart, label


@njit(cache=True)
def chain_bounds_kernel(c):
    # Interval-merging pass: d_out[i] is the discovery bound of the prefix
    # chain c[0..i].  Intervals over {1..ell} are kept in a disjoint-set
    # structure whose roots track the interval minimum.
    ell = c.shape[0]
    d_out = np.empty(ell, np.int64)
    ipar = np.arange(ell)
    imin = np.arange(ell)
    isize = np.ones(ell, np.int64)
    d = 0
    for i in range(ell):
        ci = c[i]
        if ci <= ell:
            r = ci - 1
            while ipar[r] != r:
                r = ipar[r]
            x = ci - 1
            while ipar[x] != r:
                nxt = ipar[x]
                ipar[x] = r
                x = nxt
            mn = imin[r]
            if mn == 0:
                d += 1
            else:
                r2 = mn - 1
                while ipar[r2] != r2:
                    r2 = ipar[r2]
                x = mn - 1
                while ipar[x] != r2:
                    nxt = ipar[x]
                    ipar[x] = r2
                    x = nxt
                if isize[r] < isize[r2]:
                    ipar[r] = r2
                    isize[r2] += isize[r]
                else:
                    ipar[r2] = r
                    isize[r] += isize[r2]
                    imin[r] = imin[r2]
        d_out[i] = d
    return d_out


@njit(cache=True)
def all_bounds_kernel(po, pos, size, c, pathstart, starts, zeta, use_shrink):
    # One chain-bounds run per covering path; every vertex lies on exactly
    # one path, so d_all ends up defined for all ranks.  Ranks >= zeta are
    # skipped when use_shrink is on (their p-values cannot contribute).
    # Returns (d_all, number of elements fed through the interval structure).
    m = po.shape[0]
    d_all = np.zeros(m, np.int64)
    ipar = np.empty(m, np.int64)
    imin = np.empty(m, np.int64)
    isize = np.empty(m, np.int64)
    fed = 0
    for si in range(starts.shape[0]):
        s = starts[si]
        hi = pos[s]
        lo = hi - size[s] + 1
        if use_shrink:
            ell = 0
            for k in range(lo, hi + 1):
                if po[k] < zeta:
                    ell += 1
        else:
            ell = hi - lo + 1
        for j in range(ell):
            ipar[j] = j
            imin[j] = j
            isize[j] = 1
        d = 0
        for k in range(lo, hi + 1):
            v = po[k]
            if not use_shrink or v < zeta:
                fed += 1
                ci = c[v]
                if ci <= ell:
                    r = ci - 1
                    while ipar[r] != r:
                        r = ipar[r]
                    x = ci - 1
                    while ipar[x] != r:
                        nxt = ipar[x]
                        ipar[x] = r
                        x = nxt
                    mn = imin[r]
                    if mn == 0:
                        d += 1
                    else:
                        r2 = mn - 1
                        while ipar[r2] != r2:
                            r2 = ipar[r2]
                        x = mn - 1
                        while ipar[x] != r2:
                            nxt = ipar[x]
                            ipar[x] = r2
                            x = nxt
                        if isize[r] < isize[r2]:
                            ipar[r] = r2
                            isize[r2] += isize[r]
                        else:
                            ipar[r2] = r
                            isize[r] += isize[r2]
                            imin[r] = imin[r2]
            if pathstart[v] == s:
                d_all[v] = d
    return d_all, fed


@njit(cache=True)
def admissible_kernel(po, parent, rep, q, m):
    # anc[v]: max q over representative strict ancestors of v (-1.0 at roots).
    # adm[v]: v is a representative whose q strictly beats every such ancestor.
    # gam[v]: max q over representative ancestors-or-self, i.e. the largest
    #         threshold at which v is still covered by some reported cluster.
    anc = np.empty(m, np.float64)
    adm = np.zeros(m, np.uint8)
    gam = np.empty(m, np.float64)
    for k in range(m - 1, -1, -1):  # parents before children
        v = po[k]
        p = parent[v]
        if p == -1:
            a = -1.0
        elif rep[p] != 0:
            a = anc[p]
            if q[p] > a:
                a = q[p]
        else:
            a = anc[p]
        anc[v] = a
        if rep[v] != 0:
            if q[v] > a:
                adm[v] = 1
            gam[v] = q[v] if q[v] > a else a
        else:
            gam[v] = a
    return anc, adm, gam
