"""Command-line entry point: ``mixmorrey <subcommand> [options]``.

Every subcommand prints a JSON object on stdout.  Functions and grids come
from ``--config`` (see :mod:`mixmorrey.verify.config`) or from the inline
options ``--box``, ``--resolution``, ``--function`` and ``--param``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np
import yaml

from ..errors import MixMorreyError
from ..gridfn import as_exponents, save
from ..norms import bmo_mixed_norm, bmo_norm, bmo_q_norm, gen_morrey_norm, mixed_morrey_norm, mixed_norm
from ..operators import KINDS, OperatorSpec, apply
from ..phicond import PhiFamily, zygmund_condition
from . import config as cfg
from .report import _clean

log = logging.getLogger("mixmorrey")


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, yaml.safe_load(value)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML/JSON configuration file")
    p.add_argument("--box", type=float, nargs=2, action="append", metavar=("A", "B"),
                   help="box side (repeat once per axis)")
    p.add_argument("--resolution", type=int, nargs="+", help="cells per axis")
    p.add_argument("--function", help="generator kind, e.g. indicator_ball")
    p.add_argument("--param", type=_param, action="append", default=[], help="generator parameter key=value")
    p.add_argument("--file", help="load the function from a saved grid file")


def _config(args) -> dict:
    return cfg.load_config(args.config) if args.config else {}


def _grid(args, data):
    box, res = cfg.parse_grid(data.get("grid"))
    if args.box:
        box = tuple(tuple(ab) for ab in args.box)
    if args.resolution:
        res = args.resolution[0] if len(args.resolution) == 1 else args.resolution
    return box, res


def _function(args, data):
    box, res = _grid(args, data)
    if args.file:
        spec = {"file": args.file}
    elif args.function:
        spec = {"kind": args.function, **dict(args.param)}
    elif "function" in data:
        spec = data["function"]
    else:
        raise MixMorreyError("no function given: use --function, --file or a config 'function' key")
    return cfg.parse_function(spec, box, res), box, res


def _exponents(text, data, key="q"):
    if text is not None:
        return [float(v) for v in text]
    return data.get("exponents", {}).get(key)


def _emit(obj) -> None:
    print(json.dumps(_clean(obj), sort_keys=True, indent=2))


def cmd_norm(args) -> None:
    data = _config(args)
    f, _, _ = _function(args, data)
    q = _exponents(args.q, data) or [2.0] * f.dim
    if args.type == "lebesgue":
        _emit({"norm": "lebesgue", "q": q, "value": mixed_norm(f, q)})
        return
    if args.type == "morrey":
        res = mixed_morrey_norm(f, args.p, q)
    else:
        phi = PhiFamily("power" if args.log_exponent == 0 else "power_log", args.lam, args.log_exponent)
        res = gen_morrey_norm(f, q[0], phi)
    _emit({"norm": args.type, "q": q, **res.record()})


def cmd_op(args) -> None:
    data = _config(args)
    f, box, res = _function(args, data)
    op = data.get("operator", {})
    kind = args.kind or op.get("kind", "maximal")
    alpha = args.alpha if args.alpha is not None else float(op.get("alpha", 0.0))
    symbol = cfg.parse_symbol({"kind": args.symbol} if args.symbol else op.get("symbol"), box, res)
    spec = OperatorSpec(kind, alpha, symbol, None)
    Tf = apply(spec, f)
    out = {"operator": spec.to_dict(), "sup_abs": float(np.max(np.abs(Tf.values)))}
    if args.at:
        out["at"] = args.at
        pts = np.asarray(args.at, dtype=float).reshape(-1, f.dim)
        out["values"] = [float(v) for v in np.atleast_1d(apply(spec, f, at=pts if f.dim > 1 else pts[:, 0]))]
    if args.q:
        out["q"] = args.q
        out["lebesgue_norm"] = mixed_norm(Tf, args.q)
    if args.save:
        save(Tf, args.save)
        out["saved"] = args.save
    _emit(out)


def cmd_bmo(args) -> None:
    data = _config(args)
    f, _, _ = _function(args, data)
    if args.variant == "bmo":
        res = bmo_norm(f)
    elif args.variant == "q":
        res = bmo_q_norm(f, args.q[0])
    else:
        res = bmo_mixed_norm(f, as_exponents(args.q, f.dim))
    _emit({"variant": args.variant, **res.record()})


def cmd_phicond(args) -> None:
    phi1 = PhiFamily("power" if args.log1 == 0 else "power_log", args.lambda1, args.log1)
    phi2 = PhiFamily("power" if args.log2 == 0 else "power_log", args.lambda2, args.log2)
    res = zygmund_condition(phi1, phi2, args.q, p=args.p, log_factor=args.log_factor)
    _emit({"phi1": phi1.to_dict(), "phi2": phi2.to_dict(), "q": args.q, "p": args.p, **res.to_dict()})


def cmd_weight(args) -> None:
    from ..weights import a1_characteristic, ap_characteristic, aqp_check, make_weight, rubio_iteration

    data = _config(args)
    box, res = _grid(args, data)
    params = dict(args.param)
    w = make_weight(args.family, box, res, **params)
    if args.characteristic == "ap":
        out = ap_characteristic(w, args.p).record()
    elif args.characteristic == "a1":
        out = a1_characteristic(w).record()
    elif args.characteristic == "aqp":
        out = aqp_check(w, args.q, args.p).record()
    else:
        out = rubio_iteration(w.w, args.q, K=args.K).to_dict()
    _emit({"family": args.family, "params": params, "characteristic": args.characteristic, **out})


def cmd_hardy(args) -> None:
    from ..hardy import condition_A, condition_A_star, power_function, verify_hardy_equivalence

    v1, v2, w = (power_function(e) for e in (args.v1, args.v2, args.w))
    out = {"v1": args.v1, "v2": args.v2, "w": args.w,
           "A": condition_A(v1, v2, w), "A_star": condition_A_star(v1, v2, w)}
    if args.corpus:
        corpus = [power_function(-mu) for mu in args.corpus]
        rep = verify_hardy_equivalence(v1, v2, w, corpus, log_factor=args.log_factor)
        out["report"] = rep.to_dict()
    _emit(out)


def _run_config(rc: cfg.RunConfig):
    from .harness import OperatorConfig, run_domination_check, run_lebesgue_check, run_lemma_check, run_theorem_check
    from .theorems import run_theorem

    if rc.check == "registry":
        return run_theorem(rc.theorem_id, rc.corpus, rc.negative)
    symbol = cfg.parse_symbol(rc.operator.get("symbol"), rc.corpus.box, rc.corpus.resolution)
    op = OperatorConfig(rc.operator.get("kind", "maximal"), float(rc.operator.get("alpha", 0.0)), symbol)
    if rc.check == "theorem":
        return [run_theorem_check(rc.theorem_id, op, rc.q, rc.phi1, rc.phi2, rc.corpus)]
    if rc.check == "lemma":
        return [run_lemma_check(rc.theorem_id, op, rc.q, rc.corpus)]
    if rc.check == "lebesgue":
        return [run_lebesgue_check(rc.theorem_id, op, rc.q, rc.corpus)]
    return [run_domination_check(rc.theorem_id, op.alpha, rc.corpus)]


def _report_path(base: str, index: int, count: int) -> str:
    if count == 1:
        return base
    stem, dot, ext = base.rpartition(".")
    return f"{stem}.{index}.{ext}" if dot else f"{base}.{index}"


def cmd_verify(args) -> None:
    from .report import emit_report

    data = _config(args)
    if args.theorem:
        data.update({"check": "registry", "theorem_id": args.theorem, "negative": args.negative})
    if args.resolution:
        corpus = dict(data.get("corpus", {}))
        corpus["resolution"] = args.resolution[0] if len(args.resolution) == 1 else args.resolution
        data["corpus"] = corpus
    rc = cfg.RunConfig.from_dict(data)
    reports = _run_config(rc)
    out_path = args.out or rc.output_path
    fmt = args.format or rc.output_format
    summary = []
    for i, rep in enumerate(reports):
        entry = {"theorem_id": rep.theorem_id, "verdict": rep.verdict,
                 "fitted_constant": rep.fitted_constant, "spread": rep.spread}
        if out_path:
            entry["path"] = str(emit_report(rep, _report_path(out_path, i, len(reports)), fmt))
        summary.append(entry)
    _emit({"reports": summary})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixmorrey", description="Mixed Morrey norms, operators and boundedness checks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="mixed Lebesgue / Morrey / generalized Morrey norm")
    _common(p)
    p.add_argument("--type", choices=("lebesgue", "morrey", "gen_morrey"), default="lebesgue")
    p.add_argument("--q", type=float, nargs="+")
    p.add_argument("--p", type=float, default=2.0, help="Morrey exponent p")
    p.add_argument("--lam", type=float, default=0.5, help="phi decay exponent")
    p.add_argument("--log-exponent", type=float, default=0.0)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("op", help="apply an operator")
    _common(p)
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--symbol", choices=("log_abs", "heaviside"))
    p.add_argument("--at", type=float, nargs="+", help="evaluation points (2-D: x1 y1 x2 y2 ...)")
    p.add_argument("--q", type=float, nargs="+", help="also report ||Tf||_q")
    p.add_argument("--save", help="save Tf to this file")
    p.set_defaults(func=cmd_op)

    p = sub.add_parser("bmo", help="BMO norm variants")
    _common(p)
    p.add_argument("--variant", choices=("bmo", "q", "mixed"), default="bmo")
    p.add_argument("--q", type=float, nargs="+", default=[2.0])
    p.set_defaults(func=cmd_bmo)

    p = sub.add_parser("weight", help="A_p, A_1, A_{q,p} characteristics and the Rubio iteration")
    _common(p)
    p.add_argument("--family", choices=("constant", "power", "exponential", "file"), default="power")
    p.add_argument("--characteristic", choices=("ap", "a1", "aqp", "rubio"), default="ap")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=1.5)
    p.add_argument("--K", type=int, default=20)
    p.set_defaults(func=cmd_weight)

    p = sub.add_parser("hardy", help="Hardy supremum conditions for power-law weights")
    p.add_argument("--v1", type=float, default=-1.0, help="exponent of v1")
    p.add_argument("--v2", type=float, default=1.0, help="exponent of v2")
    p.add_argument("--w", type=float, default=-3.0, help="exponent of w")
    p.add_argument("--corpus", type=float, nargs="*", help="decay exponents mu of g = s^-mu")
    p.add_argument("--log-factor", action="store_true")
    p.set_defaults(func=cmd_hardy)

    p = sub.add_parser("phicond", help="integral condition for a (phi1, phi2) pair")
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.add_argument("--log1", type=float, default=0.0)
    p.add_argument("--log2", type=float, default=0.0)
    p.add_argument("--q", type=float, nargs="+", required=True)
    p.add_argument("--p", type=float, nargs="+")
    p.add_argument("--log-factor", action="store_true")
    p.set_defaults(func=cmd_phicond)

    p = sub.add_parser("verify", help="run a boundedness check and write reports")
    p.add_argument("--config")
    p.add_argument("--theorem", help="registry id, e.g. maximal_and_cz")
    p.add_argument("--negative", action="store_true", help="run the violated-phi control")
    p.add_argument("--resolution", type=int, nargs="+")
    p.add_argument("--out", help="report path (numbered when several reports)")
    p.add_argument("--format", choices=("json", "csv"))
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except MixMorreyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
