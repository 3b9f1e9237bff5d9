"""Core probability values and the entropy calculus.

Distributions are plain numpy arrays (float64). Validators return the
array they were given (as float64) so call sites can chain them; nothing
here normalizes silently, use normalize() when ingesting raw weights.
All entropies are in bits and 0 log 0 counts as 0.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import (
    BadAxis,
    InvalidCoupling,
    InvalidDistribution,
    NegativeEntry,
    ShapeMismatch,
    SumNotOne,
)

SUM_TOL = 1e-12
CLAMP_TOL = 1e-10


def _as_float_array(grid, ndim=None):
    try:
        a = np.asarray(grid, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidDistribution(f"not a rectangular numeric array: {exc}") from exc
    if ndim is not None and a.ndim != ndim:
        raise InvalidDistribution(f"expected {ndim} axes, got {a.ndim}")
    if a.size == 0:
        raise InvalidDistribution("empty array")
    if not np.all(np.isfinite(a)):
        raise InvalidDistribution("non-finite entry")
    return a


def validate_distribution(grid):
    """Check a raw matrix for joint-distribution invariants.

    Entries must be nonnegative and sum to 1 within 1e-12. Returns the
    validated float64 array; raises NegativeEntry or SumNotOne otherwise.
    Works for any number of axes (a 3-way joint is validated the same way).
    """
    a = _as_float_array(grid)
    if a.min() < 0.0:
        pos = np.unravel_index(int(np.argmin(a)), a.shape)
        raise NegativeEntry(f"negative entry {a[pos]!r} at {tuple(int(i) for i in pos)}")
    total = float(a.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise SumNotOne(total)
    return a


def normalize(grid):
    """Scale nonnegative weights to sum 1. The explicit ingestion helper."""
    a = _as_float_array(grid)
    if a.min() < 0.0:
        raise NegativeEntry("negative entry")
    total = a.sum()
    if total <= 0.0:
        raise InvalidDistribution("total mass is zero")
    return a / total


def marginal(joint, keep):
    """Sum a joint over all axes not listed in `keep`.

    keep is an axis index or an ordered tuple of axis indices; the result's
    axes follow that order. marginal(t, (0, 1)) of a 3-way joint over
    (a, b, g) is the (a, b) joint.
    """
    a = np.asarray(joint, dtype=np.float64)
    if isinstance(keep, (int, np.integer)):
        keep = (int(keep),)
    else:
        keep = tuple(int(k) for k in keep)
    if len(set(keep)) != len(keep):
        raise BadAxis(f"repeated axis in {keep}")
    for k in keep:
        if not 0 <= k < a.ndim:
            raise BadAxis(f"axis {k} out of range for {a.ndim} axes")
    drop = tuple(i for i in range(a.ndim) if i not in keep)
    out = a.sum(axis=drop) if drop else a
    # axes of `out` are the kept ones in increasing order; reorder as asked
    order = [sorted(keep).index(k) for k in keep]
    return np.transpose(out, order)


def entropy(d):
    """H(d) = -sum p log2 p over all entries, any shape."""
    return kernels.entropy_bits(np.asarray(d, dtype=np.float64).ravel())


def clamp_information(x, tol=CLAMP_TOL):
    """Snap tiny negative float noise (within tol) in an information
    quantity to exactly 0; genuinely negative values pass through so that
    verdicts downstream can fail loudly."""
    if -tol <= x < 0.0:
        return 0.0
    return x


def conditional_entropy(joint, given=1):
    """H(X|Y) of a joint array, in bits.

    `given` names the conditioning axis (or axes, as a tuple); the default
    `given=1` on a 2-D joint is H(row|col). Computed as H(joint) minus the
    entropy of the conditioning marginal.
    """
    a = np.asarray(joint, dtype=np.float64)
    if isinstance(given, (int, np.integer)):
        given = (int(given),)
    h_joint = entropy(a)
    h_given = entropy(marginal(a, tuple(given)))
    return clamp_information(h_joint - h_given)


def mutual_information(joint, axes=(0, 1)):
    """I(X:Y) between two axis groups of a joint, in bits.

    With the default axes=(0,1) on a 2-D joint this is the plain mutual
    information of the matrix; it is 0 exactly when the matrix has rank 1.
    axes may be (axis, axis) or a pair of tuples grouping several axes.
    """
    a = np.asarray(joint, dtype=np.float64)
    ax, bx = axes
    if isinstance(ax, (int, np.integer)):
        ax = (int(ax),)
    if isinstance(bx, (int, np.integer)):
        bx = (int(bx),)
    h_a = entropy(marginal(a, tuple(ax)))
    h_b = entropy(marginal(a, tuple(bx)))
    h_ab = entropy(marginal(a, tuple(ax) + tuple(bx)))
    return clamp_information(h_a + h_b - h_ab)


def conditional_mutual_information(joint, a_axis=0, b_axis=1, z_axes=2):
    """I(X:Y|Z) of a joint array, in bits.

    Z may be one axis or a tuple of axes. Computed through entropies,
    H(XZ) + H(YZ) - H(XYZ) - H(Z); the direct per-z summation
    sum_z p(z) I(X:Y|Z=z) lives in the test suite as an oracle.
    """
    t = np.asarray(joint, dtype=np.float64)
    if isinstance(z_axes, (int, np.integer)):
        z_axes = (int(z_axes),)
    z_axes = tuple(z_axes)
    h_az = entropy(marginal(t, (a_axis,) + z_axes))
    h_bz = entropy(marginal(t, (b_axis,) + z_axes))
    h_abz = entropy(marginal(t, (a_axis, b_axis) + z_axes))
    h_z = entropy(marginal(t, z_axes))
    return clamp_information(h_az + h_bz - h_abz - h_z)


def total_variation(d1, d2):
    """Total variation distance (1/2) sum |p - q| between same-shape arrays."""
    a = np.asarray(d1, dtype=np.float64)
    b = np.asarray(d2, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def validate_coupling(q, rows, cols):
    """Check a gamma coupling: an (m, n, r) array of conditional rows.

    Each q[i, j, :] must be a distribution over the gamma range: entries
    nonnegative, sum 1 within 1e-12.
    """
    a = _as_float_array(q, ndim=3)
    if a.shape[0] != rows or a.shape[1] != cols:
        raise ShapeMismatch(f"coupling shaped {a.shape[:2]} for a {rows}x{cols} joint")
    if a.min() < 0.0:
        raise InvalidCoupling("negative conditional probability")
    sums = a.sum(axis=2)
    bad = np.abs(sums - 1.0) > SUM_TOL
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidCoupling(f"conditional row at ({i}, {j}) sums to {sums[i, j]!r}")
    return a


def couple_gamma(joint, q):
    """Joint 3-way distribution over (a, b, gamma) from a matrix and a coupling.

    p(a, b, g) = joint[a, b] * q[g | a, b]. The (a, b) marginal of the
    result reproduces `joint` bit-exactly because each conditional row sums
    to 1.
    """
    j = validate_distribution(joint)
    if j.ndim != 2:
        raise ShapeMismatch("couple_gamma expects a 2-D joint")
    qa = validate_coupling(q, j.shape[0], j.shape[1])
    return j[:, :, None] * qa


def gamma_from_map(cell_map, gamma_range):
    """One-hot coupling for a deterministic gamma = f(a, b).

    cell_map is an (m, n) integer array with values in range(gamma_range).
    """
    cm = np.asarray(cell_map)
    if cm.ndim != 2:
        raise ShapeMismatch("cell map must be 2-D")
    if cm.min() < 0 or cm.max() >= gamma_range:
        raise BadAxis(f"map values outside range({gamma_range})")
    q = np.zeros(cm.shape + (int(gamma_range),))
    m, n = cm.shape
    q[np.repeat(np.arange(m), n), np.tile(np.arange(n), m), cm.ravel()] = 1.0
    return q
