"""Derivation witnesses: representation, validation, and the closure algebra.

A witness for a joint ⟨a,b⟩ is a chain of quadruple joints over
(a_t, b_t, a_{t+1}, b_{t+1}): each step makes the current pair
conditionally independent given either successor variable, adjacent steps
agree on the shared pair's marginal, and the last pair is independent.

Witnesses come in several node kinds. DenseWitness stores explicit step
tensors. The other kinds (chain, power, mapped, lifted, appended,
prefixed, product) represent structured constructions whose materialized
steps can be astronomically large; they validate through exact algebraic
rules instead:

  * products multiply step tensors cellwise across independent axes, so
    conditional mutual informations and the final mutual information add,
    and seam total variations are subadditive;
  * mapping or lifting pushes the first step's (a,b) axes through
    per-axis channels, which cannot increase any of the conditional
    mutual informations (the channels act independently given the rest)
    and cannot increase seam distances;
  * appended padding steps condition on constants, so their conditional
    mutual informations equal the inner witness's final mutual
    information exactly.

Quantities reported for structured nodes are therefore certified upper
bounds; a true verdict is sound for the materialized semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .distribution import (
    clamp_information,
    entropy,
    mutual_information,
    total_variation,
    validate_distribution,
)
from .errors import (
    BadMap,
    BadN,
    NotIndependent,
    OrderDecrease,
    ShapeMismatch,
    TooLarge,
)

DEFAULT_TOL = 1e-9
DEFAULT_MARG_TOL = 1e-12

#: refuse to materialize any single tensor with more cells than this
MATERIALIZE_CELL_LIMIT = 4_000_000


def _guard_cells(shape, what):
    cells = 1
    for s in shape:
        cells *= int(s)
        if cells > MATERIALIZE_CELL_LIMIT:
            raise TooLarge(f"{what} would hold {shape} cells")
    return cells


def validate_quad(t):
    """Check a 4-axis step tensor: nonnegative, total mass 1 within 1e-12."""
    a = validate_distribution(t)
    if a.ndim != 4:
        raise ShapeMismatch(f"step tensor has {a.ndim} axes, expected 4")
    return a


def _clamp_array(vals, tol=1e-10):
    """Vector form of clamp_information: noise in [-tol, 0) snaps to 0."""
    return np.where((vals >= -tol) & (vals < 0.0), 0.0, vals)


def _no_steps():
    return np.zeros(0), np.zeros(0), np.zeros(0)


def _step_cmis(t):
    """(I(a:b|a*), I(a:b|b*)) of one materialized step tensor."""

    def cmi(m):
        # m has axes (a, b, z)
        h_az = entropy(m.sum(axis=1))
        h_bz = entropy(m.sum(axis=0))
        h_abz = entropy(m)
        h_z = entropy(m.sum(axis=(0, 1)))
        return clamp_information(h_az + h_bz - h_abz - h_z)

    return cmi(t.sum(axis=3)), cmi(t.sum(axis=2))


def _stack_cmis(stack):
    """Vectorized step CMIs for a (k, m, n, ms, ns) stack of step tensors."""
    k = stack.shape[0]
    m, n, ms, ns = stack.shape[1:]

    def batch_h(x, shape):
        return kernels.batch_entropy_rows(np.ascontiguousarray(x).reshape(k, shape))

    def cmi_given(axis):
        # axis 3 = a*, axis 4 = b* in stack coordinates
        other = 7 - axis
        mm = stack.sum(axis=other)  # (k, m, n, z)
        z = mm.shape[3]
        h_abz = batch_h(mm, m * n * z)
        h_az = batch_h(mm.sum(axis=2), m * z)
        h_bz = batch_h(mm.sum(axis=1), n * z)
        h_z = batch_h(mm.sum(axis=(1, 2)), z)
        return _clamp_array(h_az + h_bz - h_abz - h_z)

    return cmi_given(3), cmi_given(4)


@dataclass
class StepReport:
    cmi_a: float
    cmi_b: float
    marginal_tv: float


class ValidationReport:
    """Scored witness invariants: per-step quantities, final MI, verdict.

    The per-step quantities are held as flat arrays; `per_step` builds the
    list of StepReport rows on first access. Chains run to hundreds of
    thousands of steps and most callers only look at the verdict, so
    materializing a quarter-million row objects up front would dominate
    validation time.
    """

    def __init__(self, step_arrays, final_mi, verdict, tol, marg_tol):
        self.cmi_a, self.cmi_b, self.marginal_tv = (
            np.asarray(a, dtype=np.float64) for a in step_arrays
        )
        self.final_mi = float(final_mi)
        self.verdict = bool(verdict)
        self.tol = float(tol)
        self.marg_tol = float(marg_tol)
        self._per_step = None

    @property
    def per_step(self):
        if self._per_step is None:
            self._per_step = [
                StepReport(float(a), float(b), float(t))
                for a, b, t in zip(self.cmi_a, self.cmi_b, self.marginal_tv)
            ]
        return self._per_step

    def worst(self):
        vals = [self.final_mi]
        if self.cmi_a.size:
            vals.extend((self.cmi_a.max(), self.cmi_b.max()))
        return float(max(vals))

    def __repr__(self):
        return (
            f"ValidationReport(order={self.cmi_a.size},"
            f" final_mi={self.final_mi!r}, verdict={self.verdict},"
            f" tol={self.tol!r}, marg_tol={self.marg_tol!r})"
        )


class DerivationWitness:
    """Common behaviour for every witness node kind.

    Subclasses implement `order`, `base`, `step_shape`, `step_tensor`,
    `quantities` and `transposed`. `quantities` returns a pair
    ((cmi_a, cmi_b, marginal_tv) arrays of length `order`, final mutual
    information) with values that are exact for dense nodes and certified
    upper bounds for structured ones.
    """

    declared_tol = None
    declared_marg_tol = None

    @property
    def order(self):
        raise NotImplementedError

    @property
    def base(self):
        raise NotImplementedError

    @property
    def base_shape(self):
        raise NotImplementedError

    def step_shape(self, t):
        raise NotImplementedError

    def step_tensor(self, t):
        raise NotImplementedError

    def quantities(self):
        raise NotImplementedError

    def transposed(self):
        raise NotImplementedError

    def final_shape(self):
        if self.order == 0:
            return self.base_shape
        return self.step_shape(self.order - 1)[2:]

    def _check_step_index(self, t):
        if not 0 <= t < self.order:
            raise ShapeMismatch(f"step {t} out of range for order {self.order}")


def _dense_quantities(base, tensors):
    cas, cbs, tvs = [], [], []
    prev = base
    for t in tensors:
        ab = t.sum(axis=(2, 3))
        if ab.shape != prev.shape:
            raise ShapeMismatch(
                f"step pair marginal {ab.shape} does not match {prev.shape}"
            )
        ca, cb = _step_cmis(t)
        cas.append(ca)
        cbs.append(cb)
        tvs.append(total_variation(ab, prev))
        prev = t.sum(axis=(0, 1))
    arrays = (np.array(cas), np.array(cbs), np.array(tvs))
    return arrays, clamp_information(mutual_information(prev))


class DenseWitness(DerivationWitness):
    """Witness with explicitly stored step tensors."""

    def __init__(self, base, steps=(), validate=True):
        self._base = np.asarray(base, dtype=np.float64)
        self._steps = [np.asarray(t, dtype=np.float64) for t in steps]
        if validate:
            validate_distribution(self._base)
            if self._base.ndim != 2:
                raise ShapeMismatch("base must be a 2-D joint")
            shape = self._base.shape
            for t in self._steps:
                q = validate_quad(t)
                if q.shape[:2] != shape:
                    raise ShapeMismatch(
                        f"step pair axes {q.shape[:2]} after pair sized {shape}"
                    )
                shape = q.shape[2:]

    @property
    def order(self):
        return len(self._steps)

    @property
    def base(self):
        return self._base

    @property
    def base_shape(self):
        return self._base.shape

    @property
    def steps(self):
        return self._steps

    def step_shape(self, t):
        self._check_step_index(t)
        return self._steps[t].shape

    def step_tensor(self, t):
        self._check_step_index(t)
        return self._steps[t]

    def quantities(self):
        return _dense_quantities(self._base, self._steps)

    def transposed(self):
        w = DenseWitness(
            self._base.T,
            [np.transpose(t, (1, 0, 3, 2)) for t in self._steps],
            validate=False,
        )
        w.declared_tol = self.declared_tol
        w.declared_marg_tol = self.declared_marg_tol
        return w


def _pair_matrix(eps):
    e = float(eps)
    return np.array([[0.5 - e, e], [e, 0.5 - e]])


def _chain_stack(path):
    e = np.asarray(path, dtype=np.float64)
    k = e.shape[0]
    t = np.zeros((k, 2, 2, 2, 2))
    half = 0.5 * e * (1.0 - e)
    sq = 0.5 * e * e
    t[:, 0, 0, 0, 0] = 0.5 - e
    t[:, 1, 1, 1, 1] = 0.5 - e
    for star in ((0, 1), (1, 0)):
        t[:, 0, 0, star[0], star[1]] = sq
        t[:, 1, 1, star[0], star[1]] = sq
        t[:, 0, 1, star[0], star[1]] = half
        t[:, 1, 0, star[0], star[1]] = half
    return t


class ChainWitness(DerivationWitness):
    """Uniform 2x2 decorrelation chain driven by an epsilon path.

    Step t conditions the current pair on a fresh pair distributed as the
    two-letter joint with off-diagonal weight path[t]; the current pair
    then has off-diagonal weight path[t]*(1-path[t]). The path must rise
    to 1/4 at the end so the chain finishes at the uniform (independent)
    pair. Step tensors live in `step_stack`, one (2,2,2,2) slab per step.
    """

    def __init__(self, path, base_eps):
        self.path = np.asarray(path, dtype=np.float64)
        self.base_eps = float(base_eps)
        self._stack = None

    @property
    def step_stack(self):
        if self._stack is None:
            self._stack = _chain_stack(self.path)
        return self._stack

    @property
    def order(self):
        return int(self.path.shape[0])

    @property
    def base(self):
        return _pair_matrix(self.base_eps)

    @property
    def base_shape(self):
        return (2, 2)

    def step_shape(self, t):
        self._check_step_index(t)
        return (2, 2, 2, 2)

    def step_tensor(self, t):
        self._check_step_index(t)
        return self.step_stack[t]

    def quantities(self):
        if self.order == 0:
            return _no_steps(), clamp_information(mutual_information(self.base))
        stack = self.step_stack
        k = stack.shape[0]
        ca, cb = _stack_cmis(stack)
        pair_marg = stack.sum(axis=(3, 4)).reshape(k, 4)
        star_marg = stack.sum(axis=(1, 2)).reshape(k, 4)
        prev = np.vstack([self.base.reshape(1, 4), star_marg[:-1]])
        tvs = 0.5 * np.abs(pair_marg - prev).sum(axis=1)
        final = clamp_information(mutual_information(star_marg[-1].reshape(2, 2)))
        return (ca, cb, tvs), final

    def transposed(self):
        return self  # every slab is symmetric under (a,b)->(b,a)


class PowerWitness(DerivationWitness):
    """n independent copies of one witness, axes flattened per variable."""

    def __init__(self, inner, n):
        if n < 1:
            raise BadN("power requires n >= 1")
        self.inner = inner
        self.n = int(n)

    @property
    def order(self):
        return self.inner.order

    @property
    def base_shape(self):
        m, n_ = self.inner.base_shape
        return (m**self.n, n_**self.n)

    @property
    def base(self):
        _guard_cells(self.base_shape, "power base")
        out = self.inner.base
        for _ in range(self.n - 1):
            out = np.kron(out, self.inner.base)
        return out

    def step_shape(self, t):
        return tuple(int(s) ** self.n for s in self.inner.step_shape(t))

    def step_tensor(self, t):
        _guard_cells(self.step_shape(t), "power step")
        out = self.inner.step_tensor(t)
        for _ in range(self.n - 1):
            out = _tensor_product_step(out, self.inner.step_tensor(t))
        return out

    def quantities(self):
        (ca, cb, tv), final = self.inner.quantities()
        return (self.n * ca, self.n * cb, self.n * tv), self.n * final

    def transposed(self):
        return PowerWitness(self.inner.transposed(), self.n)


def _push_matrix(mapping, size):
    """0/1 channel matrix of a deterministic map given as an index array."""
    m = np.zeros((len(mapping), size))
    m[np.arange(len(mapping)), mapping] = 1.0
    return m


def _apply_channels_step(t, a_chan, b_chan):
    return np.einsum("wxcd,wa,xb->abcd", t, a_chan, b_chan, optimize=True)


class MappedWitness(DerivationWitness):
    """Witness for (f(a), g(b)) built on a witness for (a, b).

    Only the first step's pair axes change; the starred axes and all later
    steps are shared with the inner witness, so the seam to step 1 is
    untouched. `base` may be supplied by the caller when the pushforward
    is computed by exact means elsewhere (the inner base being too large
    to materialize); otherwise it is the pushforward of the inner base.
    """

    def __init__(self, inner, f, g, base=None):
        self.inner = inner
        m, n = inner.base_shape
        self.f = _check_index_map(f, m)
        self.g = _check_index_map(g, n)
        self.f_size = int(self.f.max()) + 1
        self.g_size = int(self.g.max()) + 1
        self._base = None if base is None else np.asarray(base, dtype=np.float64)
        if self._base is not None:
            if (
                self._base.ndim != 2
                or self._base.shape[0] < self.f_size
                or self._base.shape[1] < self.g_size
            ):
                raise ShapeMismatch("supplied base does not cover the map ranges")
            # The base may be wider than the maps reach when some of its
            # rows or columns carry no mass.
            self.f_size, self.g_size = self._base.shape

    @property
    def order(self):
        return self.inner.order

    @property
    def base_shape(self):
        return (self.f_size, self.g_size)

    @property
    def base(self):
        if self._base is None:
            inner_base = self.inner.base
            out = np.zeros(self.base_shape)
            np.add.at(out, (self.f[:, None], self.g[None, :]), inner_base)
            self._base = out
        return self._base

    def step_shape(self, t):
        self._check_step_index(t)
        if t > 0:
            return self.inner.step_shape(t)
        return (self.f_size, self.g_size) + tuple(self.inner.step_shape(0)[2:])

    def step_tensor(self, t):
        self._check_step_index(t)
        if t > 0:
            return self.inner.step_tensor(t)
        _guard_cells(self.step_shape(0), "mapped step")
        inner_t = self.inner.step_tensor(0)
        out = np.zeros(self.step_shape(0))
        np.add.at(out, (self.f[:, None], self.g[None, :]), inner_t)
        return out

    def quantities(self):
        if self.order == 0:
            return _no_steps(), clamp_information(mutual_information(self.base))
        return self.inner.quantities()

    def transposed(self):
        base = None if self._base is None else self._base.T
        return MappedWitness(self.inner.transposed(), self.g, self.f, base=base)


class LiftedWitness(DerivationWitness):
    """Witness for the pair pushed through row-stochastic channels A, B.

    The first step's pair axes are transformed by the channels
    (T'[a,b,c,d] = sum_wx T[w,x,c,d] A[w,a] B[x,b]); everything else is
    shared with the inner witness. Base equals A^T (inner base) B.
    """

    def __init__(self, inner, a_chan, b_chan):
        self.inner = inner
        self.a_chan = _check_stochastic(a_chan, inner.base_shape[0])
        self.b_chan = _check_stochastic(b_chan, inner.base_shape[1])
        self._base = None

    @property
    def order(self):
        return self.inner.order

    @property
    def base_shape(self):
        return (self.a_chan.shape[1], self.b_chan.shape[1])

    @property
    def base(self):
        if self._base is None:
            self._base = self.a_chan.T @ self.inner.base @ self.b_chan
        return self._base

    def step_shape(self, t):
        self._check_step_index(t)
        if t > 0:
            return self.inner.step_shape(t)
        return self.base_shape + tuple(self.inner.step_shape(0)[2:])

    def step_tensor(self, t):
        self._check_step_index(t)
        if t > 0:
            return self.inner.step_tensor(t)
        _guard_cells(self.step_shape(0), "lifted step")
        return _apply_channels_step(
            self.inner.step_tensor(0), self.a_chan, self.b_chan
        )

    def quantities(self):
        if self.order == 0:
            return _no_steps(), clamp_information(mutual_information(self.base))
        return self.inner.quantities()

    def transposed(self):
        return LiftedWitness(self.inner.transposed(), self.b_chan, self.a_chan)


class AppendedWitness(DerivationWitness):
    """Witness padded with steps whose fresh pair is a constant.

    The first padding step carries the inner witness's final pair joint
    against a single-valued fresh pair; later padding steps are joints of
    constants. Conditioning on a constant leaves plain mutual information,
    so the padding steps' CMIs equal the inner final MI exactly, and the
    padded witness's final MI is 0.
    """

    def __init__(self, inner, extra):
        if extra < 1:
            raise OrderDecrease("padding must add at least one step")
        self.inner = inner
        self.extra = int(extra)

    @property
    def order(self):
        return self.inner.order + self.extra

    @property
    def base(self):
        return self.inner.base

    @property
    def base_shape(self):
        return self.inner.base_shape

    def step_shape(self, t):
        self._check_step_index(t)
        k = self.inner.order
        if t < k:
            return self.inner.step_shape(t)
        if t == k:
            return tuple(self.inner.final_shape()) + (1, 1)
        return (1, 1, 1, 1)

    def _final_marginal(self):
        if self.inner.order == 0:
            return self.inner.base
        last = self.inner.step_tensor(self.inner.order - 1)
        return last.sum(axis=(0, 1))

    def step_tensor(self, t):
        self._check_step_index(t)
        k = self.inner.order
        if t < k:
            return self.inner.step_tensor(t)
        if t == k:
            _guard_cells(self.step_shape(t), "padding step")
            return self._final_marginal()[:, :, None, None]
        return np.ones((1, 1, 1, 1))

    def quantities(self):
        (ca, cb, tv), final = self.inner.quantities()
        pad = np.zeros(self.extra)
        pad_first = pad.copy()
        pad_first[0] = final
        return (
            (
                np.concatenate((ca, pad_first)),
                np.concatenate((cb, pad_first)),
                np.concatenate((tv, pad)),
            ),
            0.0,
        )

    def transposed(self):
        return AppendedWitness(self.inner.transposed(), self.extra)


class PrefixedWitness(DerivationWitness):
    """Witness whose first step is explicit and whose tail is another witness.

    Used when a joint is decomposed into weighted parts: the first step
    maps the pair onto a part-index pair whose joint is the inner
    witness's base, so the inner derivation continues from step 1 on.
    """

    def __init__(self, base, first_step, inner):
        self._base = validate_distribution(base)
        if self._base.ndim != 2:
            raise ShapeMismatch("base must be a 2-D joint")
        self.first_step = validate_quad(first_step)
        if self.first_step.shape[:2] != self._base.shape:
            raise ShapeMismatch("first step pair axes do not match base")
        if self.first_step.shape[2:] != inner.base_shape:
            raise ShapeMismatch("first step star axes do not match inner base")
        self.inner = inner

    @property
    def order(self):
        return self.inner.order + 1

    @property
    def base(self):
        return self._base

    @property
    def base_shape(self):
        return self._base.shape

    def step_shape(self, t):
        self._check_step_index(t)
        if t == 0:
            return self.first_step.shape
        return self.inner.step_shape(t - 1)

    def step_tensor(self, t):
        self._check_step_index(t)
        if t == 0:
            return self.first_step
        return self.inner.step_tensor(t - 1)

    def quantities(self):
        ca0, cb0 = _step_cmis(self.first_step)
        seam_in = total_variation(self.first_step.sum(axis=(2, 3)), self._base)
        star = self.first_step.sum(axis=(0, 1))
        junction = total_variation(star, self.inner.base)
        if self.inner.order == 0:
            arrays = (np.array([ca0]), np.array([cb0]), np.array([seam_in]))
            return arrays, clamp_information(mutual_information(star))
        (ca, cb, tv), final = self.inner.quantities()
        tv = np.concatenate(([seam_in], tv))
        tv[1] = tv[1] + junction  # the inner base is only reached through the star
        arrays = (
            np.concatenate(([ca0], ca)),
            np.concatenate(([cb0], cb)),
            tv,
        )
        return arrays, final

    def transposed(self):
        return PrefixedWitness(
            self._base.T,
            np.transpose(self.first_step, (1, 0, 3, 2)),
            self.inner.transposed(),
        )


def _tensor_product_step(t1, t2):
    out = np.einsum("abcd,wxyz->awbxcydz", t1, t2, optimize=True)
    s1, s2 = t1.shape, t2.shape
    return out.reshape(
        s1[0] * s2[0], s1[1] * s2[1], s1[2] * s2[2], s1[3] * s2[3]
    )


class ProductWitness(DerivationWitness):
    """Independent pairing of two witnesses on the product sample space.

    Orders are equalized with constant padding before pairing. All
    information quantities add across independent factors and seam
    distances are subadditive, which is what `quantities` reports.
    """

    def __init__(self, w1, w2):
        k = max(w1.order, w2.order)
        self.w1 = pad_witness(w1, k)
        self.w2 = pad_witness(w2, k)

    @property
    def order(self):
        return self.w1.order

    @property
    def base_shape(self):
        (m1, n1), (m2, n2) = self.w1.base_shape, self.w2.base_shape
        return (m1 * m2, n1 * n2)

    @property
    def base(self):
        _guard_cells(self.base_shape, "product base")
        return np.kron(self.w1.base, self.w2.base)

    def step_shape(self, t):
        s1 = self.w1.step_shape(t)
        s2 = self.w2.step_shape(t)
        return tuple(a * b for a, b in zip(s1, s2))

    def step_tensor(self, t):
        _guard_cells(self.step_shape(t), "product step")
        return _tensor_product_step(self.w1.step_tensor(t), self.w2.step_tensor(t))

    def quantities(self):
        (ca1, cb1, tv1), f1 = self.w1.quantities()
        (ca2, cb2, tv2), f2 = self.w2.quantities()
        return (ca1 + ca2, cb1 + cb2, tv1 + tv2), f1 + f2

    def transposed(self):
        return ProductWitness(self.w1.transposed(), self.w2.transposed())


def _check_index_map(f, domain):
    try:
        arr = np.asarray(list(f) if not isinstance(f, np.ndarray) else f)
    except (TypeError, ValueError) as exc:
        raise BadMap(f"not an index sequence: {exc}") from exc
    if arr.ndim != 1 or arr.shape[0] != domain:
        raise BadMap(f"map covers {arr.shape} values, domain has {domain}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == arr.astype(np.int64)):
            raise BadMap("map values must be integers")
        arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise BadMap("map values must be nonnegative")
    return arr.astype(np.int64)


def _check_stochastic(a, rows):
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != rows:
        raise ShapeMismatch(f"channel shaped {m.shape}, expected {rows} rows")
    if m.min() < 0:
        raise ShapeMismatch("channel entries must be nonnegative")
    if np.abs(m.sum(axis=1) - 1.0).max() > 1e-12:
        raise ShapeMismatch("channel rows must sum to 1")
    return m


def validate_witness(w, tol=None, marg_tol=None):
    """Score a witness against the derivation invariants.

    tol bounds every step's two conditional mutual informations and the
    final mutual information; marg_tol bounds the seam total variations
    (base against step 0's pair marginal, and each starred marginal
    against the next step's pair marginal). Defaults are the witness's
    declared tolerances when present, else 1e-9 / 1e-12.
    """
    if tol is None:
        tol = w.declared_tol if w.declared_tol is not None else DEFAULT_TOL
    if marg_tol is None:
        marg_tol = (
            w.declared_marg_tol
            if w.declared_marg_tol is not None
            else DEFAULT_MARG_TOL
        )
    (ca, cb, tv), final = w.quantities()
    ok = (
        final <= tol
        and bool(np.all(ca <= tol))
        and bool(np.all(cb <= tol))
        and bool(np.all(tv <= marg_tol))
    )
    return ValidationReport((ca, cb, tv), final, ok, tol, marg_tol)


def independent_witness(j, tol=DEFAULT_TOL):
    """Order-0 witness for an already independent joint."""
    base = validate_distribution(j)
    mi = mutual_information(base)
    if mi > tol:
        raise NotIndependent(f"mutual information {mi:.3e} exceeds {tol:.1e}")
    return DenseWitness(base, [])


def map_witness(w, f, g):
    """Witness for (f(a), g(b)) from a witness for (a, b)."""
    return MappedWitness(w, f, g)


def pad_witness(w, target_order):
    """Raise a witness's order by appending constant-pair steps."""
    if target_order < w.order:
        raise OrderDecrease(f"cannot shrink order {w.order} to {target_order}")
    if target_order == w.order:
        return w
    return AppendedWitness(w, target_order - w.order)


def product_witness(w1, w2):
    """Witness for the independent product of two witnessed pairs."""
    return ProductWitness(w1, w2)


def power_witness(w, n):
    """Witness for n independent copies of a witnessed pair."""
    if n < 1:
        raise BadN(f"power {n} not allowed, need n >= 1")
    if n == 1:
        return w
    return PowerWitness(w, n)


def transpose_witness(w):
    """Witness for (b, a) from a witness for (a, b)."""
    return w.transposed()


def witness_kind(w):
    """Short tag naming a witness node's kind (used by serialization)."""
    return {
        DenseWitness: "dense",
        ChainWitness: "chain",
        PowerWitness: "power",
        MappedWitness: "mapped",
        LiftedWitness: "lifted",
        AppendedWitness: "appended",
        PrefixedWitness: "prefixed",
        ProductWitness: "product",
    }[type(w)]
