"""Reading and writing matrices, couplings, and derivation witnesses.

Matrices travel as JSON objects ``{"rows": m, "cols": n, "p": [[...]]}``
or as plain CSV rows. Witnesses travel as JSON in one of two shapes: a
dense form holding the base and every step tensor explicitly, and a
structured form mirroring the witness combinators so that chain powers
with hundreds of thousands of steps stay a few hundred bytes on disk.
All floats use Python's shortest round-tripping decimal form, so a
serialize/parse cycle is entrywise exact.
"""

import csv
import io as _io
import json

import numpy as np

from . import _solver
from .distribution import gamma_from_map, validate_coupling
from .errors import ParseError
from .witness import (
    AppendedWitness,
    ChainWitness,
    DenseWitness,
    LiftedWitness,
    MappedWitness,
    PowerWitness,
    PrefixedWitness,
    ProductWitness,
)


def _fail(msg):
    raise ParseError(msg)


def _float_grid(rows, what):
    try:
        a = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: {exc}") from None
    if a.ndim != 2 or a.size == 0:
        _fail(f"{what} must be a non-empty 2-D array of numbers")
    return a


# ---------------------------------------------------------------------------
# matrices


def loads_matrix(text):
    """Parse a joint matrix from JSON or CSV text."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from None
        if not isinstance(obj, dict):
            _fail("matrix JSON must be an object")
        for key in ("rows", "cols", "p"):
            if key not in obj:
                _fail(f"matrix JSON missing key {key!r}")
        p = _float_grid(obj["p"], "matrix entries")
        if p.shape != (obj["rows"], obj["cols"]):
            _fail(
                f"matrix declares {obj['rows']}x{obj['cols']} "
                f"but p is {p.shape[0]}x{p.shape[1]}"
            )
        return p
    rows = []
    for record in csv.reader(_io.StringIO(text)):
        cells = [c.strip() for c in record if c.strip()]
        if not cells:
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"bad CSV number: {exc}") from None
    if not rows:
        _fail("empty matrix input")
    if len({len(r) for r in rows}) != 1:
        _fail("CSV rows have uneven lengths")
    return _float_grid(rows, "matrix entries")


def dumps_matrix(m):
    a = np.asarray(m, dtype=np.float64)
    obj = {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "p": a.tolist()}
    return json.dumps(obj, sort_keys=True)


def load_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return loads_matrix(fh.read())


def save_matrix(m, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_matrix(m) + "\n")


# ---------------------------------------------------------------------------
# gamma couplings


def loads_gamma(text, rows, cols):
    """Parse a gamma coupling for a `rows` x `cols` joint.

    Accepts ``{"map": [[...]], "range": r}`` for a deterministic gamma
    (range defaults to one past the largest value) or ``{"q": [[[...]]]}``
    with explicit conditional rows.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}") from None
    if not isinstance(obj, dict):
        _fail("gamma JSON must be an object")
    if "map" in obj:
        cm = np.asarray(obj["map"])
        if cm.ndim != 2 or cm.shape != (rows, cols):
            _fail(f"gamma map must be {rows}x{cols}")
        if not np.issubdtype(cm.dtype, np.integer):
            _fail("gamma map entries must be integers")
        r = obj.get("range", int(cm.max()) + 1)
        return gamma_from_map(cm, int(r))
    if "q" in obj:
        try:
            q = np.asarray(obj["q"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"gamma conditionals: {exc}") from None
        if q.ndim != 3:
            _fail("gamma q must have three axes")
        return validate_coupling(q, rows, cols)
    _fail("gamma JSON needs a 'map' or 'q' key")


def load_gamma(path, rows, cols):
    with open(path, encoding="utf-8") as fh:
        return loads_gamma(fh.read(), rows, cols)


# ---------------------------------------------------------------------------
# witnesses

_RUN_KEYS = ("values", "counts")


def _encode_runs(arr):
    a = np.asarray(arr)
    if a.size == 0:
        return {"values": [], "counts": []}
    edges = np.flatnonzero(np.diff(a)) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [a.size]))
    return {
        "values": [int(v) for v in a[starts]],
        "counts": [int(c) for c in ends - starts],
    }


def _decode_runs(obj):
    if not isinstance(obj, dict) or any(k not in obj for k in _RUN_KEYS):
        _fail("run-length map needs 'values' and 'counts'")
    values = np.asarray(obj["values"], dtype=np.int64)
    counts = np.asarray(obj["counts"], dtype=np.int64)
    if values.shape != counts.shape or values.ndim != 1:
        _fail("run-length values/counts must be 1-D and equal length")
    if counts.size and counts.min() < 1:
        _fail("run-length counts must be positive")
    return np.repeat(values, counts)


def _step_obj(t):
    a = np.asarray(t, dtype=np.float64)
    return {"dims": [int(d) for d in a.shape], "t": a.ravel().tolist()}


def _step_from_obj(obj, pair_shape):
    if not isinstance(obj, dict) or "dims" not in obj or "t" not in obj:
        _fail("step needs 'dims' and 't'")
    dims = obj["dims"]
    if len(dims) != 4 or any(int(d) < 1 for d in dims):
        _fail(f"step dims {dims!r} are not four positive sizes")
    dims = tuple(int(d) for d in dims)
    flat = np.asarray(obj["t"], dtype=np.float64)
    if flat.ndim != 1 or flat.size != int(np.prod(dims)):
        _fail(f"step tensor length {flat.size} does not match dims {dims}")
    if pair_shape is not None and dims[:2] != pair_shape:
        _fail(f"step pair axes {dims[:2]} after pair sized {pair_shape}")
    return flat.reshape(dims)


def _canonical_chain_order(w):
    seq = _solver.eps_sequence(w.order)
    path = np.asarray(list(reversed(seq[:-1])), dtype=np.float64)
    if w.path.shape == path.shape and np.array_equal(w.path, path):
        if float(w.base_eps) == float(seq[-1]):
            return w.order
    return None


def _node_obj(w):
    if isinstance(w, ChainWitness):
        t = _canonical_chain_order(w)
        if t is not None:
            return {"kind": "chain", "order": t}
        return {
            "kind": "chain",
            "path": w.path.tolist(),
            "base_eps": float(w.base_eps),
        }
    if isinstance(w, PowerWitness):
        return {"kind": "power", "n": int(w.n), "inner": _node_obj(w.inner)}
    if isinstance(w, MappedWitness):
        return {
            "kind": "mapped",
            "f": _encode_runs(w.f),
            "g": _encode_runs(w.g),
            "base": np.asarray(w.base).tolist(),
            "inner": _node_obj(w.inner),
        }
    if isinstance(w, LiftedWitness):
        return {
            "kind": "lifted",
            "a": np.asarray(w.a_chan).tolist(),
            "b": np.asarray(w.b_chan).tolist(),
            "inner": _node_obj(w.inner),
        }
    if isinstance(w, AppendedWitness):
        return {"kind": "appended", "extra": int(w.extra), "inner": _node_obj(w.inner)}
    if isinstance(w, PrefixedWitness):
        return {
            "kind": "prefixed",
            "base": np.asarray(w.base).tolist(),
            "step": _step_obj(w.first_step),
            "inner": _node_obj(w.inner),
        }
    if isinstance(w, ProductWitness):
        return {"kind": "product", "w1": _node_obj(w.w1), "w2": _node_obj(w.w2)}
    if isinstance(w, DenseWitness):
        return {
            "kind": "dense",
            "base": np.asarray(w.base).tolist(),
            "steps": [_step_obj(t) for t in w.steps],
        }
    raise ParseError(f"cannot serialize witness type {type(w).__name__}")


def _dense_from_obj(obj):
    base = _float_grid(obj.get("base"), "witness base")
    steps = []
    shape = base.shape
    for s in obj.get("steps", ()):
        t = _step_from_obj(s, shape)
        shape = t.shape[2:]
        steps.append(t)
    return DenseWitness(base, steps, validate=False)


def _node_from_obj(obj):
    if not isinstance(obj, dict):
        _fail("witness node must be a JSON object")
    kind = obj.get("kind")
    try:
        if kind == "chain":
            if "order" in obj:
                seq = _solver.eps_sequence(int(obj["order"]))
                return ChainWitness(list(reversed(seq[:-1])), seq[-1])
            path = np.asarray(obj["path"], dtype=np.float64)
            return ChainWitness(path, float(obj["base_eps"]))
        if kind == "power":
            return PowerWitness(_node_from_obj(obj["inner"]), int(obj["n"]))
        if kind == "mapped":
            return MappedWitness(
                _node_from_obj(obj["inner"]),
                _decode_runs(obj["f"]),
                _decode_runs(obj["g"]),
                base=_float_grid(obj["base"], "mapped base"),
            )
        if kind == "lifted":
            return LiftedWitness(
                _node_from_obj(obj["inner"]),
                _float_grid(obj["a"], "left channel"),
                _float_grid(obj["b"], "right channel"),
            )
        if kind == "appended":
            return AppendedWitness(_node_from_obj(obj["inner"]), int(obj["extra"]))
        if kind == "prefixed":
            base = _float_grid(obj["base"], "prefixed base")
            inner = _node_from_obj(obj["inner"])
            return PrefixedWitness(base, _step_from_obj(obj["step"], base.shape), inner)
        if kind == "product":
            return ProductWitness(_node_from_obj(obj["w1"]), _node_from_obj(obj["w2"]))
        if kind == "dense":
            return _dense_from_obj(obj)
    except ParseError:
        raise
    except KeyError as exc:
        raise ParseError(f"witness node {kind!r} missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad witness node {kind!r}: {exc}") from None
    _fail(f"unknown witness kind {kind!r}")


def loads_witness(text):
    """Parse a witness from JSON text, dense or structured.

    Dense files are validated only structurally here; semantic checks
    (masses, conditional informations, seams) belong to
    :func:`ciderive.witness.validate_witness` so that a corrupted tensor
    is reported as an invalid witness rather than unreadable input.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}") from None
    if not isinstance(obj, dict):
        _fail("witness JSON must be an object")
    if "kind" in obj:
        w = _node_from_obj(obj)
    elif "base" in obj:
        w = _dense_from_obj(obj)
    else:
        _fail("witness JSON needs 'base' (dense) or 'kind' (structured)")
    if obj.get("tol") is not None:
        w.declared_tol = float(obj["tol"])
    if obj.get("marg_tol") is not None:
        w.declared_marg_tol = float(obj["marg_tol"])
    return w


def dumps_witness(w):
    """Serialize a witness to JSON text.

    A plain :class:`DenseWitness` becomes the flat base-plus-steps form;
    combinator stacks keep their structure under a ``kind`` key, which
    holds a canonical epsilon chain of order t as the single integer t.
    """
    if isinstance(w, DenseWitness):
        obj = {
            "base": np.asarray(w.base).tolist(),
            "steps": [_step_obj(t) for t in w.steps],
        }
    else:
        obj = _node_obj(w)
    if w.declared_tol is not None:
        obj["tol"] = float(w.declared_tol)
    if w.declared_marg_tol is not None:
        obj["marg_tol"] = float(w.declared_marg_tol)
    return json.dumps(obj, sort_keys=True)


def load_witness(path):
    with open(path, encoding="utf-8") as fh:
        return loads_witness(fh.read())


def save_witness(w, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_witness(w) + "\n")
