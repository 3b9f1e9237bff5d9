"""Pure numpy implementations of the hot kernels.

ciderive.kernels picks between this module and the compiled twin in
_ckernels.pyx; both expose the same three functions with identical
semantics. Keep them in sync.
"""

from __future__ import annotations

import numpy as np

IMPL = "python"


def entropy_bits(p):
    """Shannon entropy in bits of a flat nonnegative weight vector.

    Zeros contribute nothing (0 log 0 = 0). The input does not have to be
    normalized; this is the raw -sum(p log2 p) used by callers that handle
    normalization themselves.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    pos = p[p > 0.0]
    if pos.size == 0:
        return 0.0
    return float(-np.dot(pos, np.log2(pos)))


def batch_entropy_rows(mat):
    """Per-row -sum(p log2 p) for a 2-D nonnegative array, in bits."""
    mat = np.asarray(mat, dtype=np.float64)
    out = np.zeros(mat.shape[0], dtype=np.float64)
    np.subtract(out, np.sum(np.where(mat > 0.0, mat * np.log2(np.where(mat > 0.0, mat, 1.0)), 0.0), axis=1), out=out)
    return out


def gamma_scores(p, maps, r):
    """Score a batch of deterministic gamma maps against a joint matrix.

    p is an (m, n) joint distribution; maps is a (K, m*n) integer array,
    row-major over cells, with values in range(r); each row defines
    gamma = maps[k][i*n + j] on the event (a=i, b=j).

    Returns three length-K float arrays: H(gamma), H(gamma|a), H(gamma|b).
    """
    p = np.asarray(p, dtype=np.float64)
    m, n = p.shape
    maps = np.asarray(maps)
    K = maps.shape[0]
    flat = p.ravel()
    rows = np.repeat(np.arange(m), n)
    cols = np.tile(np.arange(n), m)
    krange = np.arange(K)[:, None]

    pg = np.zeros((K, r))
    np.add.at(pg, (krange, maps), flat)
    pga = np.zeros((K, m, r))
    np.add.at(pga, (krange, rows, maps), flat)
    pgb = np.zeros((K, n, r))
    np.add.at(pgb, (krange, cols, maps), flat)

    def ent(x):
        return -np.sum(np.where(x > 0.0, x * np.log2(np.where(x > 0.0, x, 1.0)), 0.0), axis=-1)

    hg = ent(pg)
    ha = entropy_bits(p.sum(axis=1))
    hb = entropy_bits(p.sum(axis=0))
    hga = ent(pga.reshape(K, m * r)) - ha
    hgb = ent(pgb.reshape(K, n * r)) - hb
    return hg, np.maximum(hga, 0.0), np.maximum(hgb, 0.0)
