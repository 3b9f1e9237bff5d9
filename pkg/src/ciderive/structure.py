"""Support-pattern analysis: block detection, r-decomposition, rank-1 splits.

The structural questions all reduce to combinatorics of the support set.
A matrix is "block" when its support splits into two diagonal blocks after
row/column permutations; an r-matrix is one whose support is a Cartesian
product (a combinatorial rectangle). Everything here is exact set logic on
top of a single thresholded support extraction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .distribution import validate_distribution
from .errors import (
    DegeneratePositivity,
    EmptySupport,
    IsBlock,
    NotRMatrix,
    TooLarge,
)

EXACT_ORACLE_CELLS = 12


@dataclass(frozen=True)
class SupportPattern:
    """Positions of above-threshold entries of an m x n matrix."""

    rows: int
    cols: int
    cells: frozenset

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(sorted(self.cells))

    def __contains__(self, pos):
        return tuple(pos) in self.cells

    def row_set(self):
        return frozenset(i for i, _ in self.cells)

    def col_set(self):
        return frozenset(j for _, j in self.cells)

    def is_rectangle(self):
        return len(self.cells) == len(self.row_set()) * len(self.col_set())


@dataclass(frozen=True)
class BlockSplit:
    """Row/column bipartition (i1, j1) x (i2, j2) with no mass off-diagonal.

    i1 and i2 partition the rows, j1 and j2 the columns; all support sits
    inside i1 x j1 and i2 x j2, and both of those blocks are nonempty.
    """

    i1: tuple
    i2: tuple
    j1: tuple
    j2: tuple


def support_pattern(m, zero_tol=0.0):
    """Cells with entry strictly above zero_tol.

    The default threshold 0 treats every positive float as support; pass a
    tolerance when the matrix went through lossy arithmetic.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise NotRMatrix("support is defined for 2-D matrices")
    cells = frozenset((int(i), int(j)) for i, j in np.argwhere(a > zero_tol))
    return SupportPattern(a.shape[0], a.shape[1], cells)


def _split_from_support(pattern):
    """BlockSplit or None from a SupportPattern, via bipartite connectivity.

    Rows and columns that carry support are graph vertices, every support
    cell an edge. The matrix is non-block exactly when that graph is
    connected; otherwise i1/j1 is the component holding the smallest
    supported row and all zero rows/columns fall to the second block.
    """
    if not pattern.cells:
        raise EmptySupport("matrix has no support")
    row_cells = {}
    col_cells = {}
    for i, j in pattern.cells:
        row_cells.setdefault(i, []).append(j)
        col_cells.setdefault(j, []).append(i)
    start = min(row_cells)
    seen_rows = {start}
    seen_cols = set()
    queue = deque([("r", start)])
    while queue:
        side, v = queue.popleft()
        if side == "r":
            for j in row_cells[v]:
                if j not in seen_cols:
                    seen_cols.add(j)
                    queue.append(("c", j))
        else:
            for i in col_cells[v]:
                if i not in seen_rows:
                    seen_rows.add(i)
                    queue.append(("r", i))
    if len(seen_rows) == len(row_cells) and len(seen_cols) == len(col_cells):
        return None
    i1 = tuple(sorted(seen_rows))
    j1 = tuple(sorted(seen_cols))
    i2 = tuple(i for i in range(pattern.rows) if i not in seen_rows)
    j2 = tuple(j for j in range(pattern.cols) if j not in seen_cols)
    return BlockSplit(i1, i2, j1, j2)


def block_split(j, zero_tol=0.0):
    """Detect block structure in a joint distribution.

    Returns a BlockSplit certificate, or None when the matrix is non-block
    (the support's row/column graph is connected).
    """
    a = validate_distribution(j)
    if a.ndim != 2:
        raise NotRMatrix("block structure is defined for 2-D joints")
    return _split_from_support(support_pattern(a, zero_tol))


def is_r_matrix(m, zero_tol=0.0):
    """True when the support is a full Cartesian product of rows x columns."""
    pattern = support_pattern(m, zero_tol)
    return bool(pattern.cells) and pattern.is_rectangle()


def _cell_graph_walk(cells):
    """Walk visiting every support cell, moving along shared rows/columns.

    Depth-first tree traversal with backtracking recorded, so consecutive
    walk entries always share a row or a column; the pure-return tail after
    the last new cell is cut off. Starts from a degree-1 cell when one
    exists (it must be a walk endpoint anyway); ties broken lexicographically.
    """
    order = sorted(cells)
    adj = {c: [] for c in order}
    for idx, a in enumerate(order):
        for b in order[idx + 1 :]:
            if a[0] == b[0] or a[1] == b[1]:
                adj[a].append(b)
                adj[b].append(a)
    ends = [c for c in order if len(adj[c]) == 1]
    start = min(ends) if ends else order[0]

    walk = [start]
    seen = {start}
    stack = [(start, iter(adj[start]))]
    last_new = 0
    while stack:
        _, neighbours = stack[-1]
        for w in neighbours:
            if w not in seen:
                seen.add(w)
                walk.append(w)
                last_new = len(walk) - 1
                stack.append((w, iter(adj[w])))
                break
        else:
            stack.pop()
            if stack:
                walk.append(stack[-1][0])
    return walk[: last_new + 1]


def r_decomposition(j, zero_tol=0.0):
    """Write a non-block joint as a chain of two-cell rank-1 mass matrices.

    Each walk edge becomes one summand supported on the edge's two cells,
    and every cell's mass is split equally over its (occurrence, edge)
    slots in the walk, so the summands reconstruct the input exactly.
    Consecutive summands share a cell by construction. A matrix whose
    support is already a rectangle is returned as the single summand.
    """
    a = validate_distribution(j)
    if a.ndim != 2:
        raise NotRMatrix("r-decomposition is defined for 2-D joints")
    pattern = support_pattern(a, zero_tol)
    split = _split_from_support(pattern)
    if split is not None:
        raise IsBlock(split)
    if pattern.is_rectangle():
        return [a.copy()]

    walk = _cell_graph_walk(pattern.cells)
    n_edges = len(walk) - 1
    slots = {c: 0 for c in pattern.cells}
    for pos, cell in enumerate(walk):
        if pos > 0:
            slots[cell] += 1
        if pos < n_edges:
            slots[cell] += 1
    parts = [np.zeros_like(a) for _ in range(n_edges)]
    for pos, cell in enumerate(walk):
        share = a[cell] / slots[cell]
        if pos > 0:
            parts[pos - 1][cell] += share
        if pos < n_edges:
            parts[pos][cell] += share
    return parts


def _is_rect_set(cells):
    rows = {i for i, _ in cells}
    cols = {j for _, j in cells}
    return len(cells) == len(rows) * len(cols)


def r_complexity_bound(j, zero_tol=0.0):
    """Upper bound on r-complexity: walk decomposition, then greedy merging.

    Adjacent summands are merged left to right while the union of their
    supports stays a rectangle (the merged summand is then still an
    r-matrix). The result is an upper bound only; exact_r_complexity is the
    oracle on small instances.
    """
    parts = r_decomposition(j, zero_tol)
    count = 0
    current = set()
    for p in parts:
        s = set(support_pattern(p, zero_tol).cells)
        if count and _is_rect_set(current | s):
            current |= s
        else:
            count += 1
            current = s
    return count


def maximal_rectangles(cells):
    """All maximal combinatorial rectangles inside a support set.

    Enumerates row subsets, maps each to the common column set of its rows,
    then closes back to the full row set supporting those columns. Every
    maximal rectangle arises this way.
    """
    row_support = {}
    for i, j in cells:
        row_support.setdefault(i, set()).add(j)
    rows = sorted(row_support)
    found = set()
    for mask in range(1, 1 << len(rows)):
        chosen = [rows[t] for t in range(len(rows)) if mask >> t & 1]
        common = set.intersection(*(row_support[i] for i in chosen))
        if not common:
            continue
        closed = frozenset(i for i in rows if common <= row_support[i])
        found.add((closed, frozenset(common)))
    return [
        frozenset((i, j) for i in rset for j in cset)
        for rset, cset in sorted(found, key=lambda rc: (sorted(rc[0]), sorted(rc[1])))
    ]


def exact_r_complexity(j, limit=8, zero_tol=0.0):
    """Minimal r-decomposition length by exhaustive search, or None.

    Searches sequences of maximal rectangles only: enlarging any summand's
    support keeps consecutive intersections and coverage, so a shortest
    decomposition using maximal rectangles always exists (masses can be
    assigned by splitting each cell across the rectangles that contain it).
    Breadth-first over (covered cells, last rectangle) states; None means
    no decomposition of length <= limit was found.
    """
    a = validate_distribution(j)
    if a.ndim != 2:
        raise NotRMatrix("r-complexity is defined for 2-D joints")
    if a.size > EXACT_ORACLE_CELLS:
        raise TooLarge(f"{a.shape[0]}x{a.shape[1]} exceeds {EXACT_ORACLE_CELLS} cells")
    pattern = support_pattern(a, zero_tol)
    split = _split_from_support(pattern)
    if split is not None:
        raise IsBlock(split)

    target = pattern.cells
    rects = maximal_rectangles(target)
    frontier = {(rect, idx) for idx, rect in enumerate(rects)}
    length = 1
    seen = set(frontier)
    while frontier and length <= limit:
        for covered, idx in frontier:
            if covered == target:
                return length
        next_frontier = set()
        for covered, idx in frontier:
            last = rects[idx]
            for nidx, rect in enumerate(rects):
                if rect & last:
                    state = (covered | rect, nidx)
                    if state not in seen:
                        seen.add(state)
                        next_frontier.add(state)
        frontier = next_frontier
        length += 1
    return None


def rank1_split(r, zero_tol=0.0, max_halvings=60):
    """Split an r-matrix into rank-1 r-matrices with the same support.

    Uses the perturbed basis (e_i + eps * sum_A e_k)(e_j + eps * sum_B e_l)^T
    on the support rectangle A x B: the input's coordinates in that basis
    tend to its (positive) entries as eps -> 0, so halving eps from 1/4
    eventually makes every coefficient positive. Each coefficient times its
    basis matrix is one rank-1 part with full A x B support.
    """
    a = np.asarray(r, dtype=np.float64)
    if a.ndim != 2:
        raise NotRMatrix("expected a 2-D mass matrix")
    if a.min() < 0.0:
        raise NotRMatrix("mass matrices are nonnegative")
    pattern = support_pattern(a, zero_tol)
    if not pattern.cells:
        raise EmptySupport("matrix has no support")
    if not pattern.is_rectangle():
        raise NotRMatrix("support is not a Cartesian product")
    rows = sorted(pattern.row_set())
    cols = sorted(pattern.col_set())
    if len(rows) == 1 or len(cols) == 1:
        return [a.copy()]
    sub = a[np.ix_(rows, cols)]
    sv = np.linalg.svd(sub, compute_uv=False)
    if sv[1] <= 1e-12 * sv[0]:
        return [a.copy()]

    ka, kb = len(rows), len(cols)
    eps = 0.25
    for _ in range(max_halvings + 1):
        u = np.eye(ka) + eps
        v = np.eye(kb) + eps
        coeff = np.linalg.solve(u, sub)
        coeff = np.linalg.solve(v, coeff.T).T
        if coeff.min() > 0.0:
            parts = []
            for i in range(ka):
                for j in range(kb):
                    part = np.zeros_like(a)
                    part[np.ix_(rows, cols)] = coeff[i, j] * np.outer(u[i], v[j])
                    parts.append(part)
            return parts
        eps *= 0.5
    raise DegeneratePositivity(
        f"no positive coordinates after {max_halvings} halvings from eps=1/4"
    )
