"""Constructing derivation witnesses for target joint distributions.

The centerpiece is `derive_nonblock`, which takes a connected-support
joint matrix and produces a witness certifying that the pair can be
reached, from an independent pair, by a chain of steps each of which is
conditionally independent given a fresh pair. Supporting operations are
exposed on their own: the decorrelation chain on two symbols, dyadic
approximation and its string encoding, stochastic lifts, the linearized
correction solve, witnesses for strictly positive targets, and the
grid-composition step that glues part-derivations together.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, log2

import numpy as np

from . import _solver
from .distribution import (
    mutual_information,
    total_variation,
    validate_distribution,
)
from .errors import (
    IsBlock,
    MassMismatch,
    NegativeEntry,
    NoConvergence,
    NotDyadic,
    NonzeroSum,
    OrderCapExceeded,
    OutOfRange,
    RowColNotRank1,
    ShapeMismatch,
    SingularM,
    TooLarge,
    ZeroEntry,
)
from .structure import block_split
from .witness import (
    ChainWitness,
    LiftedWitness,
    MappedWitness,
    PowerWitness,
    PrefixedWitness,
    ValidationReport,
    independent_witness,
    transpose_witness,
    validate_witness,
)

# Seam tolerance scored against pipeline-built witnesses. Junction seams
# carry the Newton residual summed over a grid's cells; grids stay well
# under 14x14, so residual_eta = 1e-8 keeps them below this comfortably.
PIPELINE_MARG_TOL = 1e-6

# Encodings are refused beyond this many strings.
MAX_ENCODING_BITS = 24

_RANK_COND_LIMIT = 1e12
_MAX_DEPTH = 12


@dataclass(frozen=True)
class NewtonConfig:
    """Knobs of the frozen-target Newton solver.

    theta is the first mixing weight tried for the stochastic factors
    (the search widens it toward the feasibility edge on its own);
    damping is the line-search backoff; residual_eta is the uniform
    residual at which a solve counts as converged.
    """

    theta: float = 0.05
    damping: float = 0.5
    max_iters: int = 100
    residual_eta: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise OutOfRange(f"theta must lie in (0, 1), got {self.theta}")
        if self.max_iters < 1:
            raise OutOfRange(f"max_iters must be at least 1, got {self.max_iters}")


@dataclass(frozen=True)
class ConstructionConfig:
    delta: float = 1e-2
    step_tol: float = 1e-9
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    max_order: int = 200_000
    eps_schedule_halvings: int = 60

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise OutOfRange(f"delta must lie in (0, 1], got {self.delta}")
        if self.step_tol <= 0.0:
            raise OutOfRange(f"step_tol must be positive, got {self.step_tol}")


@dataclass(frozen=True)
class ConstructionResult:
    """A built witness together with how well it hit the target.

    achieved_tv is the total variation between the witness's base and the
    requested joint; report is the witness's own validation.
    """

    witness: object
    achieved_tv: float
    report: ValidationReport


def d_epsilon(eps):
    """The symmetric two-symbol joint with off-diagonal weight eps."""
    if not 0.0 <= eps <= 0.5:
        raise OutOfRange(f"eps must lie in [0, 1/2], got {eps}")
    return np.array([[0.5 - eps, eps], [eps, 0.5 - eps]])


def eps_sequence(n):
    """eps_0 = 1/4 followed by n applications of e -> e(1 - e)."""
    if n < 0:
        raise OutOfRange("n must be nonnegative")
    return _solver.eps_sequence(n)


def _chain_for(t):
    seq = _solver.eps_sequence(t)
    return ChainWitness(list(reversed(seq[:-1])), seq[-1])


def d_epsilon_chain(n):
    """Order-n witness for the two-symbol joint with weight eps_n.

    Each step's fresh pair carries the next weight up the sequence toward
    1/4; at weight 1/4 the pair is uniform and independent, so the chain
    ends with zero mutual information.
    """
    if n < 0:
        raise OutOfRange("n must be nonnegative")
    return _chain_for(n)


def dyadic_approx(j, n_bits):
    """Nearest matrix with entries l / 2^n_bits, preserving zeros.

    Largest-remainder rounding: total variation from the input is at most
    (number of cells) / 2^(n_bits + 1).
    """
    a = validate_distribution(j)
    if a.ndim != 2:
        raise ShapeMismatch("expected a 2-D joint")
    if not 1 <= n_bits <= 60:
        raise OutOfRange("n_bits must lie in [1, 60]")
    counts = _solver.dyadic_counts(a, n_bits)
    return counts / float(np.int64(1) << n_bits)


def bernoulli_encoding(d, n_bits):
    """Index maps (f, g) pulling a dyadic joint back to 2^n_bits strings.

    Strings are dealt to cells in row-major order, 2^n_bits * d[i, j] of
    them to cell (i, j); pushing the uniform independent pair of strings
    through (f, g) reproduces d exactly.
    """
    a = validate_distribution(d)
    if a.ndim != 2:
        raise ShapeMismatch("expected a 2-D joint")
    if not 1 <= n_bits <= MAX_ENCODING_BITS:
        raise TooLarge(f"n_bits must lie in [1, {MAX_ENCODING_BITS}]")
    total = np.int64(1) << n_bits
    scaled = a * float(total)
    counts = np.rint(scaled).astype(np.int64)
    if np.abs(scaled - counts).max() > 1e-9:
        raise NotDyadic(f"entries are not multiples of 2^-{n_bits}")
    if counts.sum() != total:
        raise NotDyadic("entries do not sum to 1 at this resolution")
    return _solver.lattice_cell_maps(counts, n_bits)


def approximate_good(j, delta):
    """Witness whose base is within delta of j in total variation.

    The budget is split evenly: half for dyadic rounding of the target,
    half for the residual correlation of the decorrelation chain pushed
    through the rounding's string encoding. The witness's base is the
    exact pushforward, computed by range sums rather than by
    materializing the product space.
    """
    a = validate_distribution(j)
    if a.ndim != 2:
        raise ShapeMismatch("expected a 2-D joint")
    if not 0.0 < delta <= 1.0:
        raise OutOfRange("delta must lie in (0, 1]")
    if mutual_information(a) <= 1e-12:
        w = independent_witness(a, tol=1e-9)
        return ConstructionResult(w, 0.0, validate_witness(w))
    cells = a.size
    n_bits = max(1, ceil(log2(cells / delta)) + 1)
    if n_bits > MAX_ENCODING_BITS:
        raise TooLarge("delta requires too fine a dyadic resolution")
    counts = _solver.dyadic_counts(a, n_bits)
    t = _solver.smallest_t_below(delta / (4.0 * n_bits), 2_000_000)
    if t is None:
        raise TooLarge("delta requires too long a decorrelation chain")
    t = max(t, 1)
    f, g = _solver.lattice_cell_maps(counts, n_bits)
    base = _solver.mapped_product_base(counts, n_bits, t)
    w = MappedWitness(PowerWitness(_chain_for(t), n_bits), f, g, base=base)
    achieved = total_variation(base, a)
    return ConstructionResult(w, achieved, validate_witness(w))


def stochastic_lift(w, a, b):
    """Witness for A^T M B given one for M, via row-stochastic A and B."""
    return LiftedWitness(w, a, b)


def solve_correction(m, r, sign=1):
    """Row-sum-zero P, Q with P^T M + M Q = R (or = -R when sign < 0).

    The split takes Q' as the rows-of-column-means part of R and P' as
    the transposed remainder, then conjugates both through M. R must sum
    to zero for such a correction to exist.
    """
    mm = np.asarray(m, dtype=np.float64)
    rr = np.asarray(r, dtype=np.float64)
    if mm.ndim != 2 or mm.shape[0] != mm.shape[1]:
        raise ShapeMismatch("M must be square")
    if rr.shape != mm.shape:
        raise ShapeMismatch("R must match M")
    if abs(float(rr.sum())) > 1e-10:
        raise NonzeroSum(f"R sums to {rr.sum():.3e}")
    if not np.isfinite(mm).all() or np.linalg.cond(mm) > 1e12:
        raise SingularM("M is singular or too ill-conditioned")
    if sign < 0:
        rr = -rr
    n = mm.shape[0]
    q_prime = np.tile(rr.sum(axis=0) / n, (n, 1))
    p_prime = (rr - q_prime).T
    m_inv = np.linalg.inv(mm)
    p = m_inv.T @ p_prime
    q = m_inv @ q_prime
    if np.abs(p.T @ mm + mm @ q - rr).max() > 1e-9:
        raise SingularM("correction residual exceeds tolerance")
    return p, q


def _t_cap(cfg):
    return max(min(262_144, cfg.max_order - _MAX_DEPTH), 1)


def _newton_leaf(m, cfg):
    """Witness for a strictly positive square target via the chain leaf.

    Searches the (bit depth, chain length, mixing weight) ladder; the
    returned witness is the decorrelation chain, powered and encoded to
    the dyadic anchor, lifted through the solved stochastic factors.
    """
    sol, best = _solver.newton_search(m, cfg.newton, t_cap=_t_cap(cfg))
    if sol is None:
        raise NoConvergence(
            "Newton search exhausted its schedule", residual=best
        )
    a, b, counts, n_bits, t, _ = sol
    f, g = _solver.lattice_cell_maps(counts, n_bits)
    base = _solver.mapped_product_base(counts, n_bits, t)
    encoded = MappedWitness(
        PowerWitness(_chain_for(t), n_bits), f, g, base=base
    )
    return LiftedWitness(encoded, a, b)


def _finish(witness, target, cfg):
    witness.declared_tol = max(cfg.step_tol, 1e-12)
    witness.declared_marg_tol = PIPELINE_MARG_TOL
    achieved = total_variation(witness.base, np.asarray(target, dtype=np.float64))
    report = validate_witness(witness)
    if not report.verdict:
        raise NoConvergence(
            "constructed witness failed validation", residual=report.worst()
        )
    if achieved > cfg.delta:
        raise NoConvergence(
            f"achieved total variation {achieved:.3e} exceeds delta",
            residual=achieved,
        )
    return ConstructionResult(witness, achieved, report)


def positive_nonsingular_witness(m, cfg=None):
    """Derivation witness for a strictly positive nonsingular square joint."""
    cfg = cfg or ConstructionConfig()
    a = validate_distribution(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch("expected a square 2-D joint")
    if a.min() <= 0.0:
        raise ZeroEntry("target has a nonpositive entry")
    if np.linalg.cond(a) > _RANK_COND_LIMIT:
        raise SingularM("target is singular or too ill-conditioned")
    return _finish(_newton_leaf(a, cfg), a, cfg)


def _mix_route(a, cfg):
    """Leaf for positive targets of any rank: factor through C Y.

    Y is a scaled uniform-mix matrix (always nonsingular, bounded
    condition number), C is column-stochastic, and C Y = target exactly;
    the witness for Y is lifted through C.
    """
    rows, cols = a.shape
    if rows < cols:
        return transpose_witness(_mix_route(a.T, cfg))
    c, y = _solver.mix_factor(a)
    inner = _newton_leaf(y, cfg)
    return LiftedWitness(inner, c.T, np.eye(cols))


def positive_witness(m, cfg=None):
    """Derivation witness for any strictly positive joint matrix.

    Square nonsingular targets go to the Newton leaf directly. Tall
    full-column-rank targets are factored as F S with F square positive
    nonsingular and S a 0/1 row-stochastic column-selector, wide ones by
    transposition; rank-deficient targets factor through the uniform-mix
    extraction instead.
    """
    cfg = cfg or ConstructionConfig()
    a = validate_distribution(m)
    if a.ndim != 2:
        raise ShapeMismatch("expected a 2-D joint")
    if a.min() <= 0.0:
        raise ZeroEntry("target has a nonpositive entry")
    rows, cols = a.shape
    rank = np.linalg.matrix_rank(a, tol=1e-11 * np.linalg.norm(a, 2))
    if rows == cols and rank == cols and np.linalg.cond(a) <= _RANK_COND_LIMIT:
        try:
            return positive_nonsingular_witness(a, cfg)
        except NoConvergence:
            return _finish(_mix_route(a, cfg), a, cfg)
    if rows > cols and rank == cols:
        fs = _solver.column_augment(a)
        if fs is not None:
            f_mat, s_mat = fs
            inner = _newton_leaf(f_mat, cfg)
            lifted = LiftedWitness(inner, np.eye(rows), s_mat)
            return _finish(lifted, a, cfg)
        return _finish(_mix_route(a, cfg), a, cfg)
    if rows < cols and rank == rows:
        inner = positive_witness(a.T, cfg)
        return _finish(transpose_witness(inner.witness), a, cfg)
    return _finish(_mix_route(a, cfg), a, cfg)


def block_compose(blocks, p_witness, tol=1e-9):
    """One composition step: a grid of nonnegative parts over a witness
    for the part-mass joint.

    Every row and column of blocks must sum to a rank-1 matrix (that is
    what makes the composed step conditionally independent given the
    part-index pair), and the grid's masses must match the inner
    witness's base within tol. The result's first step sends the pair to
    the part-index pair; derivation continues with the inner witness.
    """
    grid = [[np.asarray(b, dtype=np.float64) for b in row] for row in blocks]
    n_rows = len(grid)
    n_cols = len(grid[0]) if n_rows else 0
    if n_rows == 0 or any(len(row) != n_cols for row in grid):
        raise ShapeMismatch("blocks must form a rectangular grid")
    cell = grid[0][0].shape
    for row in grid:
        for b in row:
            if b.shape != cell:
                raise ShapeMismatch("grid entries must share one shape")
            if b.size and b.min() < 0.0:
                raise NegativeEntry("grid entries must be nonnegative")
    for i in range(n_rows):
        _require_rank1(sum(grid[i][j] for j in range(n_cols)), f"row {i}")
    for j in range(n_cols):
        _require_rank1(sum(grid[i][j] for i in range(n_rows)), f"column {j}")
    masses = np.array(
        [[grid[i][j].sum() for j in range(n_cols)] for i in range(n_rows)]
    )
    if masses.shape != tuple(p_witness.base_shape):
        raise ShapeMismatch("grid shape does not match the inner witness")
    gap = float(np.abs(masses - p_witness.base).max())
    if gap > tol:
        raise MassMismatch(
            f"grid masses differ from the inner base by {gap:.3e}"
        )
    first = np.empty(cell + (n_rows, n_cols))
    for i in range(n_rows):
        for j in range(n_cols):
            first[:, :, i, j] = grid[i][j]
    base = first.sum(axis=(2, 3))
    return PrefixedWitness(base, first, p_witness)


def _require_rank1(s, label):
    sv = np.linalg.svd(np.asarray(s, dtype=np.float64), compute_uv=False)
    if sv.size > 1 and sv[1] > 1e-10 * max(sv[0], 1e-300):
        raise RowColNotRank1(f"block {label} does not sum to a rank-1 matrix")


def _injection(indices, size):
    inj = np.zeros((len(indices), size))
    inj[np.arange(len(indices)), indices] = 1.0
    return inj


def _derive(a, cfg, depth):
    if depth > _MAX_DEPTH:
        raise NoConvergence("composition recursion exceeded its depth cap")
    if mutual_information(a) <= cfg.step_tol:
        return independent_witness(a, tol=max(cfg.step_tol, 1e-9))
    rows = np.where(a.sum(axis=1) > 0)[0]
    cols = np.where(a.sum(axis=0) > 0)[0]
    core = a[np.ix_(rows, cols)]
    if (core > 0).all():
        w = positive_witness(core, cfg).witness
        if len(rows) < a.shape[0] or len(cols) < a.shape[1]:
            w = LiftedWitness(
                w, _injection(rows, a.shape[0]), _injection(cols, a.shape[1])
            )
        return w
    split = block_split(core)
    if split is not None:
        if depth == 0:
            raise IsBlock(split)
        raise NoConvergence("an inner grid decomposed into blocks")
    summands = _solver.chain_summands(core)
    if summands is None:
        raise NoConvergence("no rectangle chain covers the support")
    parts, group = [], []
    for gi, s in enumerate(summands):
        for p in _solver.max_mix_split(s):
            parts.append(p)
            group.append(gi)
    blocks = _solver.connector_grid(parts, group)
    p_hat = _solver.grid_masses(blocks)
    inner = _derive(p_hat, cfg, depth + 1)
    composed = block_compose(blocks, inner, tol=PIPELINE_MARG_TOL)
    if len(rows) < a.shape[0] or len(cols) < a.shape[1]:
        composed = LiftedWitness(
            composed,
            _injection(rows, a.shape[0]),
            _injection(cols, a.shape[1]),
        )
    return composed


def derive_nonblock(m, cfg=None):
    """Derivation witness for a joint whose support is connected.

    Independent targets come back at order 0, strictly positive ones go
    through the Newton leaves, and zero-bearing connected supports are
    decomposed along a rectangle chain into rank-1 parts whose connector
    grid is derived recursively and composed back. Block-decomposable
    targets are refused (they cannot be reached: the block index would be
    a common deterministic function of both sides).
    """
    cfg = cfg or ConstructionConfig()
    a = validate_distribution(m)
    if a.ndim != 2:
        raise ShapeMismatch("expected a 2-D joint")
    w = _derive(a, cfg, 0)
    if w.order > cfg.max_order:
        raise OrderCapExceeded(
            f"order {w.order} exceeds the cap {cfg.max_order}"
        )
    return _finish(w, a, cfg)
