"""Command-line surface: load structures or the symbolic order, run ranks,
pattern searches, multi-order operations, and dimension computations, and
emit deterministic reports.

Exit codes: 0 success, 2 input error, 3 budget overflow.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

from . import dlo, multiorder, patterns, ranks
from .contexts import BudgetExceededError, FiniteContext
from .logic import (
    DLO_SIGNATURE, FiniteStructure, LogicError, load_structure,
    parse_formula, parse_partitioned, print_formula,
)
from .multiorder import MultiOrderError
from .ranks import InconsistentTypeError, RankQuery

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3

_INPUT_ERRORS = (LogicError, MultiOrderError, dlo.DloError,
                 patterns.PatternError, InconsistentTypeError,
                 OSError, json.JSONDecodeError, ValueError, KeyError)


class CliInputError(Exception):
    pass


def _max_universe():
    raw = os.environ.get("OPDIM_MAX_UNIVERSE")
    if raw is None:
        return 4096
    try:
        return int(raw)
    except ValueError:
        raise CliInputError(f"OPDIM_MAX_UNIVERSE={raw!r} is not an integer")


def _load_context(name, num_vars):
    """'dlo' selects the symbolic engine; anything else is a structure file."""
    if name == "dlo":
        return dlo.DloContext(num_vars), DLO_SIGNATURE, None
    structure = load_structure(name)
    if len(structure.universe) > _max_universe():
        raise CliInputError(
            f"universe of {len(structure.universe)} exceeds OPDIM_MAX_UNIVERSE")
    return FiniteContext(structure), structure.signature, structure


def _parse_value(text, structure):
    """A witness value: a rational for the symbolic engine, an element name
    otherwise."""
    if structure is None:
        return Fraction(text)
    for e in structure.universe:
        if str(e) == str(text):
            return e
    raise CliInputError(f"element {text!r} not in the universe")


def _parse_grid(spec, structure):
    if spec is None:
        return None
    return [( _parse_value(v.strip(), structure),) for v in spec.split(",") if v.strip()]


def _partitioned(texts, sig):
    return [parse_partitioned(t, sig) for t in texts]


def _base_set(context, args, sig):
    if getattr(args, "subset", None):
        return context.to_set(_subset_from_formula(context, args.subset, sig))
    arity = getattr(context, "arity", None)
    if arity is not None:
        return context.top()
    return context.top(args.arity)


def _subset_from_formula(context, text, sig):
    phi = parse_partitioned(text, sig)
    if phi.param_vars:
        raise CliInputError("the subset formula takes no parameters")
    s = context.top() if hasattr(context, "obj_vars") else context.top(len(phi.obj_vars))
    return context.restrict(s, phi, (), 1)


# ---------------------------------------------------------------------------
# Report plumbing


def make_report(command, config, result, elapsed):
    payload = {"command": command, "config": config, "result": result}
    digest = hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return {**payload, "timing": {"seconds": round(elapsed, 6)}, "hash": digest}


def emit(report, fmt, out=None):
    out = out or sys.stdout
    if fmt == "json":
        json.dump(report, out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        for key, value in sorted(report["result"].items()):
            out.write(f"{key}: {json.dumps(value, sort_keys=True)}\n")
        out.write(f"hash: {report['hash']}\n")


def _config(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


# ---------------------------------------------------------------------------
# Subcommands


def cmd_rank(args):
    deltas = args.delta or []
    if not deltas:
        raise CliInputError("at least one --delta formula is required")
    num_vars = len(parse_partitioned(deltas[0], DLO_SIGNATURE).obj_vars) \
        if args.context == "dlo" else None
    context, sig, structure = _load_context(args.context, num_vars)
    delta = _partitioned(deltas, sig)
    args.arity = len(delta[0].obj_vars)
    subset = _base_set(context, args, sig)
    query = RankQuery(context, subset, delta, n=args.n, cap=args.cap)
    value = ranks.shelah_rank2(query) if args.shelah else ranks.op_rank(query)
    return {"rank": value.to_json(), "kind": "shelah2" if args.shelah else f"op{args.n}"}


def cmd_opdim(args):
    deltas = args.delta or []
    if not deltas:
        raise CliInputError("at least one --delta formula is required")
    num_vars = len(parse_partitioned(deltas[0], DLO_SIGNATURE).obj_vars) \
        if args.context == "dlo" else None
    context, sig, structure = _load_context(args.context, num_vars)
    delta = _partitioned(deltas, sig)
    args.arity = len(delta[0].obj_vars)
    subset = _base_set(context, args, sig)
    value = ranks.localized_opd(context, subset, delta, cap=args.cap,
                                max_n=args.max_n)
    return {"opdim": value}


def cmd_dprank(args):
    pool_texts = args.pool or []
    if not pool_texts:
        raise CliInputError("at least one --pool formula is required")
    num_vars = len(parse_partitioned(pool_texts[0], DLO_SIGNATURE).obj_vars) \
        if args.context == "dlo" else None
    context, sig, structure = _load_context(args.context, num_vars)
    pool = _partitioned(pool_texts, sig)
    args.arity = len(pool[0].obj_vars)
    subset = _base_set(context, args, sig)
    value = patterns.dp_rank_lower(context, subset, pool, args.cap,
                                   length=args.length,
                                   witness_grid=_parse_grid(args.grid, structure),
                                   budget=args.budget)
    return {"dp_rank_lower": value}


def _cmd_pattern(args, searcher, checker, cls):
    if args.check:
        with open(args.check) as fh:
            doc = json.load(fh)
        num_vars = None
        if args.context == "dlo":
            first = parse_partitioned(doc["formulas"][0], DLO_SIGNATURE)
            num_vars = len(first.obj_vars)
        context, sig, structure = _load_context(args.context, num_vars)
        args.arity = num_vars if num_vars is not None else \
            len(parse_partitioned(doc["formulas"][0], sig).obj_vars)
        base = _base_set(context, args, sig)
        pattern = patterns.pattern_from_json(
            doc, context, sig, base, lambda v: _parse_value(v, structure), cls)
        ok, failing = checker(pattern)
        return {"verified": ok,
                "failing_selector": list(failing) if failing else None,
                "depth": pattern.depth, "length": pattern.length}
    pool_texts = args.pool or []
    if not pool_texts:
        raise CliInputError("at least one --pool formula is required")
    num_vars = len(parse_partitioned(pool_texts[0], DLO_SIGNATURE).obj_vars) \
        if args.context == "dlo" else None
    context, sig, structure = _load_context(args.context, num_vars)
    pool = _partitioned(pool_texts, sig)
    args.arity = len(pool[0].obj_vars)
    base = _base_set(context, args, sig)
    result = searcher(context, base, pool, args.depth, length=args.length,
                      witness_grid=_parse_grid(args.grid, structure),
                      budget=args.budget)
    out = {"status": result.status, "checks_used": result.checks_used}
    if result.found:
        out["pattern"] = result.pattern.to_json()
    return out


def cmd_ird(args):
    return _cmd_pattern(args, patterns.search_ird, patterns.check_ird,
                        patterns.IRDPattern)


def cmd_ict(args):
    return _cmd_pattern(args, patterns.search_ict, patterns.check_ict,
                        patterns.ICTPattern)


def cmd_mo(args):
    sub = args.mo_command
    if sub == "gen":
        if args.size > _max_universe():
            raise BudgetExceededError(f"size {args.size} exceeds OPDIM_MAX_UNIVERSE")
        mo = multiorder.generate_generic(args.n, args.size, args.seed,
                                         size_cap=_max_universe())
        return {"multiorder": multiorder.multiorder_to_dict(mo)}
    mo = multiorder.load_multiorder(args.file)
    if mo.size > _max_universe():
        raise CliInputError(f"multi-order of {mo.size} exceeds OPDIM_MAX_UNIVERSE")
    if sub == "cuts":
        cuts = multiorder.enumerate_multicuts(mo)
        return {"count": len(cuts), "expected": (mo.size + 1) ** mo.n}
    if sub == "embed":
        emb = multiorder.grid_embed(mo)
        ok, why = multiorder.check_embedding(emb)
        return {"map": {str(a): list(img) for a, img in emb.point_map},
                "verified": ok, "reason": why}
    if sub == "amalgamate":
        B = multiorder.load_multiorder(args.file)
        C = multiorder.load_multiorder(args.other)
        shared = tuple(b for b in B.universe if b in set(C.universe))
        A = B.restrict(shared)
        ident = lambda T: multiorder.Embedding(A, T, tuple((x, x) for x in shared))
        am = multiorder.amalgamate(A, B, C, ident(B), ident(C))
        return {"shared": list(shared),
                "multiorder": multiorder.multiorder_to_dict(am.result)}
    if sub == "extcheck":
        return {"level": args.k,
                "satisfied": multiorder.extension_property_level(mo, args.k)}
    if sub == "moptest":
        context, sig, structure = _load_context(args.host, 1)
        phi = parse_partitioned(args.phi, sig)
        pos = mo.positions(0)
        point_map = tuple(
            (a, (Fraction(pos[a]),) if structure is None else (mo.orders[0][pos[a]],))
            for a in mo.universe)
        witness = multiorder.PictureWitness(mo, context, point_map, phi)
        report = multiorder.check_mop_witness(witness, budget=args.budget)
        return report.to_json()
    raise CliInputError(f"unknown mo subcommand {sub!r}")


def cmd_omin(args):
    sub = args.omin_command
    f = parse_formula(args.formula, DLO_SIGNATURE)
    if sub == "qe":
        return {"formula": print_formula(dlo.qe_dlo(f))}
    if sub == "cells":
        diagrams = dlo.order_diagrams(dlo.qe_dlo(f))
        return {"count": len(diagrams),
                "cells": [print_formula(d.to_formula()) for d in diagrams]}
    if sub == "dim":
        report = dlo.dimension(f, args.m, method=args.method)
        return report.to_json()
    if sub == "irdwitness":
        pattern = dlo.ird_witness_from_dim(f, args.m, length=args.length)
        if pattern is None:
            return {"pattern": None, "reason": "dimension 0 or empty"}
        ok, _ = patterns.check_ird(pattern)
        return {"pattern": pattern.to_json(), "verified": ok}
    if sub == "prodcheck":
        g = parse_formula(args.other, DLO_SIGNATURE)
        dim_f = dlo.dimension(f, args.m).dimension
        dim_g = dlo.dimension(g, args.m1).dimension
        prod = dlo.product(f, args.m, g, args.m1)
        dim_p = dlo.dimension(prod, args.m + args.m1).dimension
        additive = None
        if dim_f is not None and dim_g is not None:
            additive = dim_p == dim_f + dim_g
        return {"dim_left": dim_f, "dim_right": dim_g, "dim_product": dim_p,
                "additive": additive}
    raise CliInputError(f"unknown omin subcommand {sub!r}")


# ---------------------------------------------------------------------------
# Argument wiring


def _add_common(p, *, cap=True, grid=False, budget=False, length=False):
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, default=0)
    if cap:
        p.add_argument("--cap", type=int, default=6)
    if grid:
        p.add_argument("--grid", default=None,
                       help="comma-separated witness values")
    if budget:
        p.add_argument("--budget", type=int, default=None)
    if length:
        p.add_argument("--length", type=int, default=3)


def build_parser():
    parser = argparse.ArgumentParser(prog="opdim")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="op-rank or Shelah 2-rank of a subset")
    p.add_argument("context", help="structure file, or 'dlo'")
    p.add_argument("--delta", action="append", required=True,
                   help="partitioned formula 'x ; y : body' (repeatable)")
    p.add_argument("-n", type=int, default=1)
    p.add_argument("--subset", default=None)
    p.add_argument("--shelah", action="store_true")
    _add_common(p)
    p.set_defaults(run=cmd_rank, config_keys=("cap", "n", "delta", "subset", "shelah"))

    p = sub.add_parser("opdim", help="localized op-dimension")
    p.add_argument("context")
    p.add_argument("--delta", action="append", required=True)
    p.add_argument("--subset", default=None)
    p.add_argument("--max-n", dest="max_n", type=int, default=8)
    _add_common(p)
    p.set_defaults(run=cmd_opdim, config_keys=("cap", "delta", "subset", "max_n"))

    p = sub.add_parser("dprank", help="dp-rank lower bound by pattern search")
    p.add_argument("context")
    p.add_argument("--pool", action="append", required=True)
    p.add_argument("--subset", default=None)
    _add_common(p, grid=True, budget=True, length=True)
    p.set_defaults(run=cmd_dprank,
                   config_keys=("cap", "pool", "subset", "length", "grid", "budget"))

    for name, fn in (("ird", cmd_ird), ("ict", cmd_ict)):
        p = sub.add_parser(name, help=f"{name} pattern search or verification")
        p.add_argument("context")
        p.add_argument("--pool", action="append")
        p.add_argument("--depth", type=int, default=1)
        p.add_argument("--subset", default=None)
        p.add_argument("--check", default=None, help="verify a pattern JSON file")
        _add_common(p, cap=False, grid=True, budget=True, length=True)
        p.set_defaults(run=fn, config_keys=("pool", "depth", "subset", "length",
                                            "grid", "budget", "check"))

    p = sub.add_parser("mo", help="multi-order operations")
    mo_sub = p.add_subparsers(dest="mo_command", required=True)
    q = mo_sub.add_parser("gen")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("--size", type=int, required=True)
    _add_common(q, cap=False)
    q.set_defaults(run=cmd_mo, config_keys=("n", "size", "seed"))
    for name in ("cuts", "embed", "extcheck"):
        q = mo_sub.add_parser(name)
        q.add_argument("file")
        if name == "extcheck":
            q.add_argument("-k", type=int, default=1)
        _add_common(q, cap=False)
        q.set_defaults(run=cmd_mo,
                       config_keys=("file", "k") if name == "extcheck" else ("file",))
    q = mo_sub.add_parser("amalgamate")
    q.add_argument("file", help="multi-order B")
    q.add_argument("other", help="multi-order C; shared element names form A")
    _add_common(q, cap=False)
    q.set_defaults(run=cmd_mo, config_keys=("file", "other"))
    q = mo_sub.add_parser("moptest")
    q.add_argument("file")
    q.add_argument("--host", default="dlo")
    q.add_argument("--phi", default="x0 ; y : x0 < y")
    _add_common(q, cap=False, budget=True)
    q.set_defaults(run=cmd_mo, config_keys=("file", "host", "phi", "budget"))

    p = sub.add_parser("omin", help="symbolic dense-order operations")
    omin_sub = p.add_subparsers(dest="omin_command", required=True)
    for name in ("qe", "cells"):
        q = omin_sub.add_parser(name)
        q.add_argument("formula")
        _add_common(q, cap=False)
        q.set_defaults(run=cmd_omin, config_keys=("formula",))
    q = omin_sub.add_parser("dim")
    q.add_argument("formula")
    q.add_argument("-m", type=int, required=True)
    q.add_argument("--method", choices=("diagram", "projection", "both"),
                   default="both")
    _add_common(q, cap=False)
    q.set_defaults(run=cmd_omin, config_keys=("formula", "m", "method"))
    q = omin_sub.add_parser("irdwitness")
    q.add_argument("formula")
    q.add_argument("-m", type=int, required=True)
    _add_common(q, cap=False, length=True)
    q.set_defaults(run=cmd_omin, config_keys=("formula", "m", "length"))
    q = omin_sub.add_parser("prodcheck")
    q.add_argument("formula")
    q.add_argument("other")
    q.add_argument("-m", type=int, required=True, help="variable count of the left factor")
    q.add_argument("-m1", type=int, required=True, help="variable count of the right factor")
    _add_common(q, cap=False)
    q.set_defaults(run=cmd_omin, config_keys=("formula", "other", "m", "m1"))

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        result = args.run(args)
    except BudgetExceededError as exc:
        _emit_error(args, "budget", str(exc))
        return EXIT_BUDGET
    except CliInputError as exc:
        _emit_error(args, "input", str(exc))
        return EXIT_INPUT
    except _INPUT_ERRORS as exc:
        _emit_error(args, "input", f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT
    elapsed = time.monotonic() - started
    command = [args.command] + [getattr(args, k) for k in
                                ("mo_command", "omin_command")
                                if getattr(args, k, None)]
    report = make_report(command, _config(args, args.config_keys), result, elapsed)
    emit(report, args.format)
    return EXIT_OK


def _emit_error(args, kind, message):
    if getattr(args, "format", "text") == "json":
        json.dump({"error": {"kind": kind, "message": message}}, sys.stderr)
        sys.stderr.write("\n")
    else:
        sys.stderr.write(f"error ({kind}): {message}\n")


if __name__ == "__main__":
    sys.exit(main())
