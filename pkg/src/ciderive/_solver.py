"""Numerical internals of the construction pipeline.

Nothing here is part of the public surface. The pieces:

  * the decorrelation-parameter table and the exact product-measure
    range sums (a digit DP over bit positions, vectorized over a whole
    threshold grid at once);
  * largest-remainder dyadic rounding and the lexicographic cell maps;
  * the frozen-target damped Newton solver for A^T G B = M over strictly
    positive row-stochastic A, B, with correction directions recentred in
    the row-sum-zero tangent space to minimize relative entry movement;
  * the factorizations used by the positive leaves (uniform-mix
    extraction C*Y, the column-augmentation F*S);
  * support-cover machinery: maximal-rectangle chains, rank-1 end
    repair, mixing splits, and the connector grid with balancing sweeps.
"""

from __future__ import annotations

import numpy as np

from .errors import NoConvergence
from .structure import maximal_rectangles

# ---------------------------------------------------------------------------
# decorrelation parameters

_EPS = [0.25]


def eps_value(t):
    """t-th element of the sequence e_0 = 1/4, e_{k+1} = e_k (1 - e_k)."""
    while len(_EPS) <= t:
        e = _EPS[-1]
        _EPS.append(e * (1.0 - e))
    return _EPS[t]


def eps_sequence(n):
    eps_value(n)
    return list(_EPS[: n + 1])


def smallest_t_below(target, t_cap):
    """Smallest t with eps_value(t) <= target, or None within the cap."""
    lo, hi = 0, int(t_cap)
    if eps_value(hi) > target:
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if eps_value(mid) <= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


# ---------------------------------------------------------------------------
# exact range sums of the N-fold product of a 2x2 matrix

def prefix_grid(d, n_bits, xs, ys):
    """Masses of the n_bits-fold product of d over {w < x} x {v < y}.

    Returns the full grid for every pair from xs and ys in one pass.
    Indices are read as n_bits-bit integers, most significant bit first;
    the DP carries four weights per pair (both coordinates still tight,
    one loose, both loose) across bit positions.
    """
    d = np.asarray(d, dtype=np.float64)
    rs = d.sum(axis=1)
    cs = d.sum(axis=0)
    tot = float(d.sum())
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    full = np.int64(1) << n_bits
    loose_x = (xs >= full)[:, None]
    loose_y = (ys >= full)[None, :]
    shape = (xs.shape[0], ys.shape[0])
    w_ll = (loose_x & loose_y).astype(np.float64) * np.ones(shape)
    w_lt = (loose_x & ~loose_y).astype(np.float64) * np.ones(shape)
    w_tl = (~loose_x & loose_y).astype(np.float64) * np.ones(shape)
    w_tt = (~loose_x & ~loose_y).astype(np.float64) * np.ones(shape)
    xc = np.where(loose_x[:, 0], 0, xs)
    yc = np.where(loose_y[0, :], 0, ys)
    for k in range(n_bits):
        a = ((xc >> (n_bits - 1 - k)) & 1)[:, None]
        b = ((yc >> (n_bits - 1 - k)) & 1)[None, :]
        sx = rs[0] * a
        sy = cs[0] * b
        sxy = d[0, 0] * (a & b)
        col_d = a * np.where(b == 1, d[0, 1], d[0, 0])
        row_d = b * np.where(a == 1, d[1, 0], d[0, 0])
        n_ll = w_ll * tot + w_lt * sy + w_tl * sx + w_tt * sxy
        n_lt = w_lt * np.where(b == 1, cs[1], cs[0]) + w_tt * col_d
        n_tl = w_tl * np.where(a == 1, rs[1], rs[0]) + w_tt * row_d
        n_tt = w_tt * d[a, b]
        w_ll, w_lt, w_tl, w_tt = n_ll, n_lt, n_tl, n_tt
    return w_ll


def dyadic_counts(m, n_bits):
    """Largest-remainder rounding of a distribution to counts over 2^n_bits.

    Zero entries stay zero; when the floor step leaves surplus, units are
    added at the largest remainders (ties broken by flat index), and an
    overshoot is taken back from the smallest nonzero remainders.
    """
    m = np.asarray(m, dtype=np.float64)
    total = np.int64(1) << n_bits
    scaled = m * float(total)
    k = np.floor(scaled).astype(np.int64)
    rem = scaled - k
    short = int(total - k.sum())
    flat_rem = rem.ravel()
    if short > 0:
        order = np.argsort(-flat_rem, kind="stable")
        kf = k.ravel()
        for step in range(short):
            kf[order[step % order.size]] += 1
        k = kf.reshape(m.shape)
    elif short < 0:
        order = np.argsort(flat_rem, kind="stable")
        kf = k.ravel()
        taken, idx = 0, 0
        while taken < -short:
            pos = order[idx % order.size]
            if kf[pos] > 0:
                kf[pos] -= 1
                taken += 1
            idx += 1
        k = kf.reshape(m.shape)
    return k


def lattice_cell_maps(counts, n_bits):
    """Row/column index maps of the lexicographic string-to-cell assignment.

    Strings 0..2^n_bits-1 are dealt to cells in row-major order, counts[i,j]
    strings to cell (i, j); the maps send a string to its cell's row and
    column index.
    """
    m, n = counts.shape
    sizes = counts.ravel()
    rows = np.repeat(np.arange(m), n)
    cols = np.tile(np.arange(n), m)
    f = np.repeat(rows, sizes)
    g = np.repeat(cols, sizes)
    return f.astype(np.int64), g.astype(np.int64)


def mapped_product_base(counts, n_bits, t):
    """Exact pushforward of the t-th decorrelation product through the maps.

    Equals the cell-block sums of the n_bits-fold product of the 2x2 joint
    with off-diagonal weight eps_value(t), under the lexicographic
    assignment; computed entirely through prefix sums, no 2^n materialization.
    """
    d = np.array(
        [
            [0.5 - eps_value(t), eps_value(t)],
            [eps_value(t), 0.5 - eps_value(t)],
        ]
    )
    m, n = counts.shape
    cum = np.concatenate([[0], np.cumsum(counts.ravel())])
    starts = cum[:-1].reshape(m, n)
    ends = starts + counts
    row_lo = starts.min(axis=1)
    row_hi = ends.max(axis=1)
    xs = np.unique(np.concatenate([row_lo, row_hi]))
    ys = np.unique(np.concatenate([starts.ravel(), ends.ravel()]))
    grid = prefix_grid(d, n_bits, xs, ys)
    xi = {int(v): i for i, v in enumerate(xs)}
    yi = {int(v): i for i, v in enumerate(ys)}
    g = np.zeros((m, n))
    for i in range(m):
        a1, a2 = xi[int(row_lo[i])], xi[int(row_hi[i])]
        for j in range(n):
            s = 0.0
            for r in range(m):
                if counts[r, j] == 0:
                    continue
                b1, b2 = yi[int(starts[r, j])], yi[int(ends[r, j])]
                s += grid[a2, b2] - grid[a1, b2] - grid[a2, b1] + grid[a1, b1]
            g[i, j] = s
    return g


# ---------------------------------------------------------------------------
# Newton solver for A^T G B = M

def uniform_mix(n, theta):
    """Row-stochastic blend of the identity with the flat matrix."""
    return (1.0 - theta) * np.eye(n) + theta / n


def conjugate_target(m, a, b):
    """(A^T)^{-1} M B^{-1}: what G must hit for A^T G B to equal M."""
    return np.linalg.solve(a.T, m) @ np.linalg.inv(b)


def mix_room(m, iters=40):
    """Largest theta keeping the conjugated target entrywise nonnegative."""
    n = m.shape[0]
    lo, hi = 0.0, 0.95
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        a = uniform_mix(n, mid)
        if conjugate_target(m, a, a).min() >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _row_zero_basis(n):
    """Basis of the row-sum-zero n x n matrices, flattened (n(n-1) columns)."""
    basis = []
    for i in range(n):
        for j in range(n - 1):
            e = np.zeros((n, n))
            e[i, j] = 1.0
            e[i, n - 1] = -1.0
            basis.append(e.ravel())
    return np.array(basis).T


def _recentred_direction(g, rhs, a, b):
    """P, Q with P^T G + G Q = rhs, minimizing relative movement of A and B.

    The constraint is solved by least squares over row-sum-zero P and Q;
    the remaining nullspace freedom is spent making (PA)/A and (QB)/B
    small, which keeps the stochastic iterates away from the boundary.
    """
    n = g.shape[0]
    basis = _row_zero_basis(n)
    nb = basis.shape[1]
    cols = [(basis[:, k].reshape(n, n).T @ g).ravel() for k in range(nb)]
    cols += [(g @ basis[:, k].reshape(n, n)).ravel() for k in range(nb)]
    constraint = np.array(cols).T
    rows_p = [
        ((basis[:, k].reshape(n, n) @ a) / a).ravel() for k in range(nb)
    ]
    rows_q = [
        ((basis[:, k].reshape(n, n) @ b) / b).ravel() for k in range(nb)
    ]
    zero = [np.zeros(n * n)] * nb
    weight = np.vstack([np.array(rows_p + zero).T, np.array(zero + rows_q).T])
    z0, *_ = np.linalg.lstsq(constraint, rhs.ravel(), rcond=None)
    _, sv, vt = np.linalg.svd(constraint)
    rank = int((sv > sv[0] * 1e-12).sum()) if sv.size else 0
    null = vt[rank:].T
    if null.shape[1]:
        c, *_ = np.linalg.lstsq(weight @ null, -(weight @ z0), rcond=None)
        z = z0 + null @ c
    else:
        z = z0
    p = (basis @ z[:nb]).reshape(n, n)
    q = (basis @ z[nb:]).reshape(n, n)
    return p, q


def frozen_newton(m, g, theta, eta, max_iters, damping, floor=1e-12):
    """Damped Newton for A^T G B = M with G frozen, from the theta-mix start.

    Updates move A and B multiplicatively (dA = P A with row-sum-zero P),
    so the iterates stay row-stochastic; a line search keeps them strictly
    positive and demands sufficient residual decrease. Returns
    (converged, A, B, iterations, residual).
    """
    n = m.shape[0]
    a = uniform_mix(n, theta)
    b = a.copy()
    res = float(np.abs(a.T @ g @ b - m).max())
    for it in range(max_iters):
        r = a.T @ g @ b - m
        res = float(np.abs(r).max())
        if res <= eta:
            return True, a, b, it, res
        try:
            rhs = -np.linalg.solve(a.T, r) @ np.linalg.inv(b)
            p, q = _recentred_direction(g, rhs, a, b)
        except np.linalg.LinAlgError:
            return False, a, b, it, res
        da = p @ a
        db = q @ b
        rel = max((np.abs(da) / a).max(), (np.abs(db) / b).max())
        scale = min(1.0, 0.4 / rel) if rel > 0 else 1.0
        ok = False
        for _ in range(60):
            a2 = a + scale * da
            b2 = b + scale * db
            if a2.min() > floor and b2.min() > floor:
                r2 = float(np.abs(a2.T @ g @ b2 - m).max())
                if r2 < res * (1.0 - 0.2 * scale):
                    ok = True
                    break
            scale *= damping
        if not ok:
            return False, a, b, it, res
        a, b = a2, b2
    return False, a, b, max_iters, res


def _t_ladder(n_bits, cells, t_cap):
    """Candidate chain lengths: powers of four under the cap, plus the
    length meeting the dyadic-budget heuristic for this bit depth."""
    ladder = [t for t in (64, 256, 1024, 4096, 16384, 65536, 262144) if t <= t_cap]
    budget = cells / 2 ** (n_bits + 2) / (0.1 * n_bits)
    tb = smallest_t_below(budget, t_cap)
    if tb is not None:
        ladder.append(max(tb, 1))
    if not ladder:
        ladder.append(max(int(t_cap), 1))
    return sorted(set(ladder))


def newton_search(m, newton_cfg, t_cap=65536):
    """Search (N, t, theta) until the frozen Newton converges.

    The anchor G is always built from the clipped, renormalized conjugated
    target, never from M itself; candidates are skipped cheaply when the
    dyadic rounding kills a support cell, when the decorrelation error
    dwarfs the mixing room, or when G is ill-conditioned. Returns
    ((A, B, counts, N, t, residual) or None, best residual seen).
    """
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[0]
    best = float("inf")
    edge = mix_room(m)
    if edge <= 1e-12:
        return None, best
    thetas = []
    if 0.0 < newton_cfg.theta < edge:
        thetas.append(newton_cfg.theta)
    for frac in (0.6, 0.5, 0.45, 0.3, 0.2, 0.12):
        theta = frac * edge
        if theta > 1e-12 and all(abs(theta - t0) > 1e-15 for t0 in thetas):
            thetas.append(theta)
    for n_bits in range(5, 19):
        for t in _t_ladder(n_bits, m.size, t_cap):
            if 2.0 * n_bits * eps_value(t) > 0.25:
                continue
            for theta in thetas:
                a0 = uniform_mix(n, theta)
                target = conjugate_target(m, a0, a0)
                if target.min() < 0.0:
                    continue
                anchor = np.maximum(target, 0.0)
                anchor /= anchor.sum()
                counts = dyadic_counts(anchor, n_bits)
                if (counts[m > 0] == 0).any():
                    continue
                g = mapped_product_base(counts, n_bits, t)
                if np.linalg.cond(g) > 1e13:
                    continue
                converged, a, b, _, res = frozen_newton(
                    m,
                    g,
                    theta,
                    newton_cfg.residual_eta,
                    newton_cfg.max_iters,
                    newton_cfg.damping,
                )
                best = min(best, res)
                if converged:
                    return (a, b, counts, n_bits, t, res), best
    return None, best


# ---------------------------------------------------------------------------
# positive-matrix factorizations

def mix_factor(x):
    """X = C Y with C column-stochastic and Y positive nonsingular.

    Y = diag(s)((1-d) I + d 1 c^T) is a scaled uniform-mix style matrix,
    so its condition number stays bounded regardless of the rank of X;
    d takes 90% of the largest uniform component X dominates.
    """
    x = np.asarray(x, dtype=np.float64)
    rs = x.sum(axis=1)
    cs = x.sum(axis=0) / x.sum()
    cap = float((x / np.outer(rs, cs)).min())
    d = 0.9 * min(cap, 1.0)
    c0 = (x - d * np.outer(rs, cs)) / (1.0 - d)
    s = c0.sum(axis=0)
    c = c0 / s
    y = s[:, None] * ((1.0 - d) * np.eye(x.shape[1]) + d * cs[None, :])
    return c, y


def column_augment(m):
    """F (square positive nonsingular, total 1) and 0/1 row-stochastic S
    with F S = M, for a tall matrix of full column rank.

    The extra columns are small positive bump vectors subtracted from the
    first column; the bump scale is lowered until F is positive with all
    columns independent.
    """
    rows, cols = m.shape
    extra = rows - cols
    first = m[:, 0].astype(np.float64)
    base_cols = [m[:, j].astype(np.float64) for j in range(1, cols)]
    for f in (0.4, 0.15, 0.05, 0.01, 2e-3, 4e-4):
        scale = f * first.min() / max(extra, 1)
        candidates = []
        for i in range(rows):
            u = np.full(rows, scale / (2 * rows))
            u[i] += scale
            candidates.append(u * (scale / u.sum()))
        chosen = []
        for u in candidates:
            if len(chosen) == extra:
                break
            trial = np.column_stack([first] + base_cols + chosen + [u])
            if np.linalg.matrix_rank(trial, tol=1e-13) == trial.shape[1]:
                chosen.append(u)
        if len(chosen) < extra:
            continue
        first_adj = first - sum(chosen) if chosen else first.copy()
        if first_adj.min() <= 0.0:
            continue
        fmat = np.column_stack([first_adj] + base_cols + chosen)
        if np.linalg.cond(fmat) > 1e12:
            continue
        smat = np.zeros((rows, cols))
        smat[:cols, :cols] = np.eye(cols)
        smat[cols:, 0] = 1.0
        if np.abs(fmat @ smat - m).max() < 1e-12:
            return fmat, smat
    return None


# ---------------------------------------------------------------------------
# support covers and connector grids

def _cells_of(m, tol=0.0):
    return frozenset(
        (int(i), int(j)) for i, j in np.argwhere(np.asarray(m) > tol)
    )


def _rect_walk_order(cellsets, start_idx):
    """Walk over the rectangle-intersection graph visiting every rectangle,
    consecutive entries intersecting; depth-first with backtracking."""
    k = len(cellsets)
    adj = {
        i: [j for j in range(k) if j != i and cellsets[i] & cellsets[j]]
        for i in range(k)
    }
    walk = [start_idx]
    seen = {start_idx}
    stack = [(start_idx, iter(sorted(adj[start_idx])))]
    last_new = 0
    while stack:
        _, neighbours = stack[-1]
        for w in neighbours:
            if w not in seen:
                seen.add(w)
                walk.append(w)
                last_new = len(walk) - 1
                stack.append((w, iter(sorted(adj[w]))))
                break
        else:
            stack.pop()
            if stack:
                walk.append(stack[-1][0])
    if len(seen) != k:
        return None
    return walk[: last_new + 1]


def cover_chain_order(support):
    """Ordered maximal rectangles covering the support, consecutive ones
    intersecting. Greedy forward extension; if the greedy chain strands
    uncovered cells, falls back to a walk over a greedy rectangle cover.
    """
    rects = maximal_rectangles(support)
    cellsets = list(rects)
    start_cell = min(support)
    start = max(
        (k for k in range(len(cellsets)) if start_cell in cellsets[k]),
        key=lambda k: (len(cellsets[k]), -k),
    )
    order = [start]
    covered = set(cellsets[start])
    while covered != set(support):
        prev = cellsets[order[-1]]
        gains = [
            (len(cellsets[k] - covered), -k, k)
            for k in range(len(cellsets))
            if cellsets[k] & prev
        ]
        best_gain, _, best = max(gains)
        if best_gain == 0:
            chosen = _greedy_cover(cellsets, support)
            walk = _rect_walk_order([cellsets[k] for k in chosen], 0)
            if walk is None:
                return None
            return [cellsets[chosen[k]] for k in walk]
        order.append(best)
        covered |= cellsets[best]
    return [cellsets[k] for k in order]


def _greedy_cover(cellsets, support):
    remaining = set(support)
    chosen = []
    while remaining:
        best = max(
            range(len(cellsets)),
            key=lambda k: (len(cellsets[k] & remaining), -k),
        )
        if not cellsets[best] & remaining:
            return chosen
        chosen.append(best)
        remaining -= cellsets[best]
    return chosen


def chain_summands(m, repair_margin=0.75):
    """Split a matrix along an ordered rectangle cover.

    Cell masses are shared equally among the covering chain positions.
    When an end rectangle is 2x2 with a single shared corner, it is
    instead completed to an exact rank-1 summand (the corner takes the
    product of its neighbours over the opposite corner), provided the
    completion leaves at least (1 - repair_margin) of the corner for the
    other positions; this keeps end summands whole and the grids small.
    """
    m = np.asarray(m, dtype=np.float64)
    support = _cells_of(m)
    chain = cover_chain_order(support)
    if chain is None:
        return None
    k = len(chain)
    counts = {}
    for cells in chain:
        for c in cells:
            counts[c] = counts.get(c, 0) + 1
    claims = [dict() for _ in range(k)]  # position -> cell -> mass override
    available = {c: float(m[c]) for c in support}
    shares = dict(counts)

    def try_repair(pos):
        cells = chain[pos]
        rows = sorted({i for i, _ in cells})
        cols = sorted({j for _, j in cells})
        if len(rows) != 2 or len(cols) != 2 or len(cells) != 4:
            return
        shared = [c for c in cells if counts[c] > 1]
        if len(shared) != 1:
            return
        corner = shared[0]
        if shares[corner] < 2:
            return  # a second repair here would strand the leftover mass
        others = [c for c in cells if c != corner]
        if any(counts[c] != 1 for c in others):
            return
        opp = (rows[0] + rows[1] - corner[0], cols[0] + cols[1] - corner[1])
        row_n = (corner[0], opp[1])
        col_n = (opp[0], corner[1])
        completion = m[row_n] * m[col_n] / m[opp]
        if completion > repair_margin * available[corner]:
            return
        for c in others:
            claims[pos][c] = float(m[c])
        claims[pos][corner] = float(completion)
        available[corner] -= completion
        shares[corner] -= 1

    if k >= 2:
        try_repair(0)
    if k >= 3:
        try_repair(k - 1)

    summands = []
    for pos in range(k):
        s = np.zeros_like(m)
        for c in chain[pos]:
            if c in claims[pos]:
                s[c] = claims[pos][c]
            else:
                s[c] = available[c] / shares[c]
        summands.append(s)
    return summands


def max_mix_split(s, chi=0.45):
    """Rank-1 parts of an r-matrix, one per support column, heavy mixing.

    Column profiles start at the identity blended with as much of every
    other column as fits under the entry ratios; the blend is backed off
    until the complementary factor is nonnegative. Thin or rank-1 inputs
    come back whole.
    """
    s = np.asarray(s, dtype=np.float64)
    sup_r = np.where(s.sum(axis=1) > 0)[0]
    sup_c = np.where(s.sum(axis=0) > 0)[0]
    sc = s[np.ix_(sup_r, sup_c)]
    m, n = sc.shape
    if (
        n == 1
        or m == 1
        or np.linalg.matrix_rank(sc, tol=1e-12 * sc.max()) == 1
    ):
        return [s.copy()]
    v = np.eye(n)
    for c in range(n):
        for cp in range(n):
            if c != cp:
                v[c, cp] = chi / (n - 1) * min(1.0, (sc[:, cp] / sc[:, c]).min())
    v = v / v.sum(axis=1, keepdims=True)
    u = None
    for _ in range(60):
        u = np.linalg.solve(v.T, sc.T).T
        if u.min() >= -1e-13 * sc.max():
            break
        off = ~np.eye(n, dtype=bool)
        v[off] *= 0.7
        v = v / v.sum(axis=1, keepdims=True)
    u = np.maximum(u, 0.0)
    parts = []
    for c in range(n):
        p = np.outer(u[:, c], v[c, :])
        if p.sum() > 1e-12 * sc.sum():
            full = np.zeros_like(s)
            full[np.ix_(sup_r, sup_c)] = p
            parts.append(full)
    return parts


def connector_grid(parts, group, eta=1.0 / 3.0, sweeps=10):
    """Blocks N[g][h] with row and column sums reproducing the parts.

    Every pair of parts in the same or adjacent groups trades eta of the
    entrywise minimum of what remains, repeated for several sweeps so the
    off-diagonal mass grows as large as the overlaps allow; the leftovers
    sit on the diagonal. Raises NoConvergence when an in-band pair never
    connects (empty overlap).
    """
    count = len(parts)
    rem = [p.copy() for p in parts]
    pairs = [
        (g, h)
        for g in range(count)
        for h in range(g + 1, count)
        if abs(group[g] - group[h]) <= 1
    ]
    conn = {k: np.zeros_like(parts[0]) for k in pairs}
    for _ in range(sweeps):
        moved = 0.0
        for g, h in pairs:
            e = eta * np.minimum(rem[g], rem[h])
            conn[(g, h)] += e
            rem[g] -= e
            rem[h] -= e
            moved += float(e.sum())
        if moved < 1e-7:
            break
    dead = [k for k in pairs if conn[k].sum() <= 0.0]
    if dead:
        raise NoConvergence(f"parts {dead[0]} share no support to connect")
    blocks = [[np.zeros_like(parts[0]) for _ in range(count)] for _ in range(count)]
    for (g, h), e in conn.items():
        blocks[g][h] = e
        blocks[h][g] = e.copy()
    for g in range(count):
        blocks[g][g] = np.maximum(rem[g], 0.0)
    return blocks


def grid_masses(blocks):
    count = len(blocks)
    return np.array(
        [[blocks[i][j].sum() for j in range(len(blocks[i]))] for i in range(count)]
    )
