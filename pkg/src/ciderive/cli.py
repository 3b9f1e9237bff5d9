"""Command-line front end for batch analysis of joint matrices.

Five subcommands: ``analyze`` (block structure and entropy summary),
``derive`` (build and save a derivation witness), ``verify`` (score a
witness file), ``check`` (entropy inequalities for a gamma, supplied or
swept), and ``rate`` (compression rate bounds). Reports are plain text
with six decimals; ``--json`` switches to full-precision JSON. Identical
inputs produce byte-identical output.

Exit codes: 0 success/bound holds, 1 parse or input error, 2 block
matrix, 3 derivation did not converge, 4 invalid witness, 5 inequality
violated.
"""

import argparse
import json
import sys

import numpy as np

from . import io as cio
from .construction import ConstructionConfig, derive_nonblock
from .distribution import entropy, marginal, mutual_information, validate_distribution
from .errors import CideriveError, IsBlock, NoConvergence, OrderCapExceeded, ParseError
from .inequalities import (
    RatePoint,
    check_theorem1,
    check_theorem3,
    gamma_sweep,
    generic_rate_bound,
    rate_bound,
)
from .structure import block_split, r_complexity_bound, support_pattern
from .witness import validate_witness

_STEP_ROW_CAP = 50


def _fmt(x):
    return f"{float(x):.6f}"


def _say(*parts):
    print(" ".join(str(p) for p in parts))


def _split_lines(split):
    return [
        "block split",
        f"  rows {list(split.i1)} | {list(split.i2)}",
        f"  cols {list(split.j1)} | {list(split.j2)}",
    ]


def _split_obj(split):
    return {
        "i1": list(split.i1),
        "i2": list(split.i2),
        "j1": list(split.j1),
        "j2": list(split.j2),
    }


def _emit_json(obj):
    print(json.dumps(obj, sort_keys=True))


def cmd_analyze(args):
    j = validate_distribution(cio.load_matrix(args.matrix))
    if j.ndim != 2:
        raise ParseError("analyze expects a 2-D matrix")
    split = block_split(j)
    ent = {
        "pair": entropy(j),
        "row": entropy(marginal(j, 0)),
        "col": entropy(marginal(j, 1)),
        "mutual": mutual_information(j),
    }
    bound = None if split else r_complexity_bound(j)
    if args.json:
        _emit_json(
            {
                "rows": j.shape[0],
                "cols": j.shape[1],
                "support": len(support_pattern(j)),
                "entropy": ent,
                "block": split is not None,
                "split": _split_obj(split) if split else None,
                "rComplexityBound": bound,
            }
        )
    else:
        _say(f"matrix {j.shape[0]}x{j.shape[1]},", len(support_pattern(j)), "support cells")
        _say(
            "entropy pair", _fmt(ent["pair"]),
            " row", _fmt(ent["row"]),
            " col", _fmt(ent["col"]),
            " mutual", _fmt(ent["mutual"]),
        )
        if split:
            for line in _split_lines(split):
                _say(line)
        else:
            _say("non-block; r-complexity bound", bound)
    return 2 if split else 0


def cmd_derive(args):
    m = cio.load_matrix(args.matrix)
    cfg = ConstructionConfig(
        delta=args.delta, step_tol=args.tol, max_order=args.max_order
    )
    res = derive_nonblock(m, cfg)
    rep = res.report
    worst_cmi = max(rep.cmi_a.max(), rep.cmi_b.max()) if rep.cmi_a.size else 0.0
    text = cio.dumps_witness(res.witness)
    summary = (
        f"order {res.witness.order}"
        f" achievedTV {_fmt(res.achieved_tv)}"
        f" maxStepCMI {_fmt(worst_cmi)}"
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _say(summary)
    else:
        print(text)
        print(summary, file=sys.stderr)
    return 0


def _first_failure(rep):
    bad = (
        (rep.cmi_a > rep.tol)
        | (rep.cmi_b > rep.tol)
        | (rep.marginal_tv > rep.marg_tol)
    )
    hits = np.flatnonzero(bad)
    return int(hits[0]) if hits.size else None


def cmd_verify(args):
    w = cio.load_witness(args.witness)
    rep = validate_witness(w, tol=args.tol)
    order = rep.cmi_a.size
    if args.json:
        _emit_json(
            {
                "order": int(order),
                "perStep": np.column_stack(
                    (rep.cmi_a, rep.cmi_b, rep.marginal_tv)
                ).tolist()
                if order
                else [],
                "finalMI": rep.final_mi,
                "verdict": rep.verdict,
                "tol": rep.tol,
                "margTol": rep.marg_tol,
            }
        )
        return 0 if rep.verdict else 4
    _say("step  cmi-a     cmi-b     marginal-tv")
    for i in range(min(order, _STEP_ROW_CAP)):
        _say(
            f"{i:<5d} {_fmt(rep.cmi_a[i])}  {_fmt(rep.cmi_b[i])}"
            f"  {_fmt(rep.marginal_tv[i])}"
        )
    hidden = order - _STEP_ROW_CAP
    if hidden > 0:
        _say(f"...   {hidden} more steps, worst quantity {_fmt(rep.worst())}")
    _say("final mutual information", _fmt(rep.final_mi))
    if rep.verdict:
        _say(f"verdict ok (tol {rep.tol:g}, marg-tol {rep.marg_tol:g})")
        return 0
    i = _first_failure(rep)
    if i is not None:
        _say(
            f"step {i} fails:"
            f" cmi-a {_fmt(rep.cmi_a[i])} cmi-b {_fmt(rep.cmi_b[i])}"
            f" marginal-tv {_fmt(rep.marginal_tv[i])}"
        )
    else:
        _say(f"final mutual information exceeds tol {rep.tol:g}")
    _say(f"verdict invalid (tol {rep.tol:g}, marg-tol {rep.marg_tol:g})")
    return 4


def cmd_check(args):
    j = validate_distribution(cio.load_matrix(args.matrix))
    ratio = None
    if args.sweep:
        swept = gamma_sweep(j, args.k)
        q = swept.coupling
        ratio = swept.ratio
    else:
        q = cio.load_gamma(args.gamma, j.shape[0], j.shape[1])
    check = check_theorem3 if args.thm == 3 else check_theorem1
    v = check(j, q, args.k)
    if args.json:
        obj = {
            "theorem": args.thm,
            "k": args.k,
            "lhs": v.lhs,
            "rhs": v.rhs,
            "slack": v.slack,
            "holds": v.holds,
        }
        if ratio is not None:
            obj["sweepRatio"] = ratio
        _emit_json(obj)
    else:
        if ratio is not None:
            _say("sweep worst ratio", _fmt(ratio))
        word = "holds" if v.holds else "violated"
        _say(
            f"theorem {args.thm} (k={args.k}):"
            f" lhs {_fmt(v.lhs)} rhs {_fmt(v.rhs)} slack {_fmt(v.slack)} -> {word}"
        )
    return 0 if v.holds else 5


def cmd_rate(args):
    point = RatePoint(args.u, args.v, args.w)
    main_v = rate_bound(point, args.k, args.h_alpha, args.h_beta)
    generic_v = generic_rate_bound(point, args.h_alpha, args.h_beta)
    if args.json:
        _emit_json(
            {
                "k": args.k,
                "bound": {"lhs": main_v.lhs, "rhs": main_v.rhs, "holds": main_v.holds},
                "generic": {
                    "lhs": generic_v.lhs,
                    "rhs": generic_v.rhs,
                    "holds": generic_v.holds,
                },
            }
        )
    else:
        for name, v in (("depth-aware", main_v), ("generic", generic_v)):
            word = "holds" if v.holds else "violated"
            _say(
                f"{name} bound:"
                f" lhs {_fmt(v.lhs)} rhs {_fmt(v.rhs)} slack {_fmt(v.slack)} -> {word}"
            )
    return 0 if main_v.holds else 5


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits 1 on usage errors (2 means block here)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser():
    parser = _Parser(prog="ciderive", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="block structure and entropy summary")
    p.add_argument("matrix", help="matrix file (JSON or CSV)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("derive", help="derive a witness for a non-block matrix")
    p.add_argument("matrix", help="matrix file (JSON or CSV)")
    p.add_argument("--delta", type=float, default=1e-2, help="target total variation")
    p.add_argument("--tol", type=float, default=1e-9, help="per-step information tolerance")
    p.add_argument("--max-order", type=int, default=200_000, help="step budget")
    p.add_argument("-o", "--output", help="witness file (default: stdout)")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("verify", help="validate a witness file")
    p.add_argument("witness", help="witness JSON file")
    p.add_argument("--tol", type=float, default=None, help="override information tolerance")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check", help="entropy inequality for a gamma variable")
    p.add_argument("matrix", help="matrix file (JSON or CSV)")
    how = p.add_mutually_exclusive_group(required=True)
    how.add_argument("--gamma", help="gamma coupling file")
    how.add_argument("--sweep", action="store_true", help="search deterministic gammas")
    p.add_argument("--k", type=int, default=0, help="conditional independence order")
    p.add_argument("--thm", type=int, choices=(1, 3), default=1, help="bound variant")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("rate", help="compression rate bounds")
    p.add_argument("--u", type=float, required=True, help="common rate")
    p.add_argument("--v", type=float, required=True, help="left private rate")
    p.add_argument("--w", type=float, required=True, help="right private rate")
    p.add_argument("--k", type=int, default=0, help="conditional independence order")
    p.add_argument("--h-alpha", type=float, required=True, help="left source entropy")
    p.add_argument("--h-beta", type=float, required=True, help="right source entropy")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_rate)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IsBlock as exc:
        print("block matrix", file=sys.stderr)
        for line in _split_lines(exc.split):
            print(line, file=sys.stderr)
        return 2
    except OrderCapExceeded as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return 3
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        if exc.residual is not None:
            print(f"best residual {exc.residual:.6e}", file=sys.stderr)
        return 3
    except CideriveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
