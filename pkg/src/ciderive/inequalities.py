"""Entropy-inequality checkers for extracted common information.

A variable gamma coupled to a pair (a, b) cannot carry much more
information than it leaks to each side: when the pair was derived in k
conditionally independent steps, H(gamma) is bounded by 2^k times the sum
of the one-sided conditional entropies, with a sharper variant
subtracting the jointly conditioned remainder. Block joints break the
bound (their block index is known to both sides yet random), which is the
counterexample built here; the ratio the bounds control also yields a
lower bound on the order any witness must have.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, log2

import numpy as np

from . import kernels
from .distribution import (
    clamp_information,
    conditional_entropy,
    couple_gamma,
    entropy,
    gamma_from_map,
    marginal,
    validate_distribution,
)
from .errors import EpsOutOfRange, NegativeRate, NotBlock, OutOfRange, TooLarge
from .structure import block_split
from .witness import power_witness

HOLD_TOL = 1e-9
SWEEP_TOL = 1e-6
FORM_AGREEMENT_TOL = 1e-10


@dataclass(frozen=True)
class BoundVerdict:
    """Outcome of one inequality evaluation, in bits."""

    lhs: float
    rhs: float
    holds: bool
    slack: float


@dataclass(frozen=True)
class InfoReport:
    """Entropies of a coupled gamma variable, in bits."""

    h_gamma: float
    h_gamma_given_a: float
    h_gamma_given_b: float
    h_gamma_given_pair: float


@dataclass(frozen=True)
class RatePoint:
    """Per-symbol rates of the three channels in the two-source scheme."""

    u: float
    v: float
    w: float

    def __post_init__(self):
        if self.u < 0 or self.v < 0 or self.w < 0:
            raise NegativeRate(f"rates must be nonnegative, got {self}")


@dataclass(frozen=True)
class SweepResult:
    """Worst deterministic gamma found by a sweep.

    ratio is H(gamma) / (H(gamma|a) + H(gamma|b)) at the worst map, with
    +inf reported when the denominator vanishes while H(gamma) > 0.
    """

    coupling: np.ndarray
    verdict: BoundVerdict
    ratio: float


def _verdict(lhs, rhs, tol=HOLD_TOL):
    slack = rhs - lhs
    return BoundVerdict(float(lhs), float(rhs), bool(slack >= -tol), float(slack))


def _gamma_entropies(j, g):
    """H(gamma), H(gamma|a), H(gamma|b), H(gamma|a,b) of the coupled triple."""
    triple = couple_gamma(j, g)
    hg = entropy(marginal(triple, 2))
    hga = clamp_information(conditional_entropy(marginal(triple, (0, 2)), given=0))
    hgb = clamp_information(conditional_entropy(marginal(triple, (1, 2)), given=0))
    hgab = clamp_information(
        entropy(triple) - entropy(marginal(triple, (0, 1)))
    )
    return triple, hg, hga, hgb, hgab


def check_theorem1(j, g, k):
    """H(gamma) against 2^k (H(gamma|a) + H(gamma|b))."""
    if k < 0:
        raise OutOfRange("k must be nonnegative")
    _, hg, hga, hgb, _ = _gamma_entropies(j, g)
    return _verdict(hg, (2.0**k) * (hga + hgb))


def check_theorem3(j, g, k):
    """The sharper bound subtracting the jointly conditioned entropy.

    Evaluates H(gamma) <= 2^k H(gamma|a) + 2^k H(gamma|b)
    - (2^{k+1} - 1) H(gamma|a,b), and cross-checks the equivalent
    mutual-information form I(gamma:ab) <= 2^k I(gamma:a|b)
    + 2^k I(gamma:b|a), whose slack is identical.
    """
    if k < 0:
        raise OutOfRange("k must be nonnegative")
    _, hg, hga, hgb, hgab = _gamma_entropies(j, g)
    scale = 2.0**k
    rhs = scale * hga + scale * hgb - (2.0 * scale - 1.0) * hgab
    verdict = _verdict(hg, rhs)

    # Mutual-information form: subtract H(gamma|a,b) from both sides.
    i_g_ab = clamp_information(hg - hgab)
    i_g_a_given_b = clamp_information(hgb - hgab)
    i_g_b_given_a = clamp_information(hga - hgab)
    mi_slack = scale * (i_g_a_given_b + i_g_b_given_a) - i_g_ab
    assert abs(mi_slack - verdict.slack) <= FORM_AGREEMENT_TOL, (
        f"entropy and mutual-information forms disagree: "
        f"{verdict.slack!r} vs {mi_slack!r}"
    )
    return verdict


def _all_maps(cells, r):
    """All r^cells deterministic maps as a (r^cells, cells) integer array."""
    count = r**cells
    idx = np.arange(count)
    out = np.empty((count, cells), dtype=np.int64)
    for c in range(cells):
        out[:, c] = idx % r
        idx = idx // r
    return out


def gamma_sweep(j, k, max_range=4):
    """Exhaust deterministic gammas, reporting the one worst for the bound.

    Worst means maximizing H(gamma) - 2^k (H(gamma|a) + H(gamma|b)); the
    verdict holds iff even that map stays within tolerance.
    """
    a = validate_distribution(j)
    if a.ndim != 2:
        raise TooLarge("sweep expects a 2-D joint")
    m, n = a.shape
    if m * n > 9:
        raise TooLarge(f"{m}x{n} joint has more than 9 cells")
    if max_range > 4:
        raise TooLarge("gamma ranges beyond 4 are not swept")
    if max_range < 1 or k < 0:
        raise OutOfRange("max_range must be >= 1 and k >= 0")
    maps = _all_maps(m * n, max_range)
    hg, hga, hgb = kernels.gamma_scores(a, maps, max_range)
    scale = 2.0**k
    deficit = hg - scale * (hga + hgb)
    worst = int(np.argmax(deficit))
    denom = hga + hgb
    ratios = np.where(
        denom > 1e-12,
        hg / np.maximum(denom, 1e-300),
        np.where(hg > 1e-12, inf, 0.0),
    )
    coupling = gamma_from_map(maps[worst].reshape(m, n), max_range)
    verdict = _verdict(hg[worst], scale * (hga[worst] + hgb[worst]))
    return SweepResult(coupling, verdict, float(np.max(ratios)))


def block_counterexample(j):
    """The two-valued gamma that witnesses failure of the bounds on blocks.

    gamma is the block index: a deterministic function of a alone and of
    b alone, so both conditional entropies vanish while H(gamma) > 0 and
    the Theorem-1 style bound fails for every k.
    """
    a = validate_distribution(j)
    if a.ndim != 2:
        raise NotBlock("expected a 2-D joint")
    split = block_split(a)
    if split is None:
        raise NotBlock("joint is not a block matrix")
    cell_map = np.zeros(a.shape, dtype=np.int64)
    for i in split.i2:
        cell_map[i, :] = 1
    coupling = gamma_from_map(cell_map, 2)
    _, hg, hga, hgb, hgab = _gamma_entropies(a, coupling)
    return coupling, InfoReport(hg, hga, hgb, hgab)


def order_lower_bound(j, max_range=4):
    """log2 of the worst sweep ratio: a floor on any witness's order.

    A valid order-k derivation forces H(gamma) <= 2^k (H(gamma|a)
    + H(gamma|b)) for every gamma, so 2^k must dominate the ratio.
    Returns 0 for independent joints and +inf for block joints.
    """
    sweep = gamma_sweep(j, 0, max_range)
    if sweep.ratio == inf:
        return inf
    if sweep.ratio <= 1.0:
        return 0.0
    return max(0.0, log2(sweep.ratio))


def rate_bound(r, k, h_alpha, h_beta):
    """Theorem-4 style rate constraint H(a) + H(b) <= v + w + (2 - 2^{-k}) u.

    Also evaluates the generic two-channel bound v + w + 2u and checks the
    sharper rhs never exceeds it.
    """
    if not isinstance(r, RatePoint):
        r = RatePoint(*r)
    if k < 0:
        raise OutOfRange("k must be nonnegative")
    if h_alpha < 0 or h_beta < 0:
        raise NegativeRate("entropies must be nonnegative")
    rhs = r.v + r.w + (2.0 - 2.0 ** (-k)) * r.u
    generic = r.v + r.w + 2.0 * r.u
    assert rhs <= generic + 1e-12, "sharpened rhs exceeded the generic bound"
    return _verdict(h_alpha + h_beta, rhs)


def generic_rate_bound(r, h_alpha, h_beta):
    """The k-free form of the rate constraint: H(a) + H(b) <= v + w + 2u."""
    if not isinstance(r, RatePoint):
        r = RatePoint(*r)
    if h_alpha < 0 or h_beta < 0:
        raise NegativeRate("entropies must be nonnegative")
    return _verdict(h_alpha + h_beta, r.v + r.w + 2.0 * r.u)


def lemma12_bound(h_mu, eps, m):
    """Entropy growth cap under eps-rare resampling over m outcomes."""
    if not 0.0 <= eps < 0.5:
        raise EpsOutOfRange(f"eps must lie in [0, 1/2), got {eps}")
    if m < 1:
        raise OutOfRange("m must be at least 1")
    return float(h_mu) + 1.0 + float(eps) * log2(m)


def common_information_bound(w, n, g):
    """check_theorem1 on the n-fold power of a witness's base.

    The witness's order plays k: information extractable from any number
    of independent copies of the pair is still bounded through the same
    derivation chain.
    """
    if n < 1:
        raise OutOfRange("n must be at least 1")
    m_, n_ = w.base_shape
    if (m_**n) * (n_**n) > 4096:
        raise TooLarge("power base too large to couple")
    base = power_witness(w, n).base
    return check_theorem1(base, g, w.order)
