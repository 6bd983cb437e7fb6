"""The ``lacuna`` command line.

Every command prints a JSON report (sorted keys, no timestamps) and, with
``--out PREFIX``, also writes ``PREFIX.json`` and ``PREFIX.csv``.

Exit codes: 0 success, 1 input error, 2 search or comparison came up empty
(NotFound, HorizonExhausted, Unbounded).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .equivalence import distribution_compare, make_family, strong_mult_criterion
from .errors import HorizonExhausted, LacunaError, NotFound, Unbounded
from .exact import exact_str, to_exact
from .extension import check_extension_condition, extend_with_plan, plan_extension, verify_multiplicative
from .kfunctional import CoefficientVector, holmstedt, k_exact, kappa
from .qnorm import q_norm_exact, q_norm_heuristic, sandwich_check
from .selection import EpsilonSchedule, greedy_select, kashin_select, moment_band
from .steps import dump_functions, load_functions
from .systems import parse_system, polynomial, system_from_json, tail_table
from .tails import build_envelope

COMMANDS = ("kfunc", "qnorm", "tails", "select-kashin", "select-greedy", "extend",
            "verify-equiv", "check-mult", "moment-band")


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# argument helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc


def _ints(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _system(text: str):
    text = text.strip()
    if text.startswith("{"):
        return system_from_json(json.loads(text))
    return parse_system(text)


def family_from_args(args, m: int | None = None) -> list[CoefficientVector]:
    """Inline ``--a``, a JSON file ``--a-file``, or ``--family random:m=6,count=50``."""
    if getattr(args, "a", None):
        return [CoefficientVector(_floats(args.a))]
    if getattr(args, "a_file", None):
        obj = _read_json(args.a_file)
        items = obj["family"] if isinstance(obj, dict) else obj
        if items and not isinstance(items[0], list):
            items = [items]
        return [CoefficientVector(x) for x in items]
    gen = getattr(args, "family", None)
    if gen:
        kind, _, params = gen.partition(":")
        if kind != "random":
            raise InputError(f"unknown family generator {kind!r}")
        kv = dict(p.split("=") for p in params.split(",") if p)
        mm = int(kv.get("m", m or 0))
        if mm < 1:
            raise InputError("family generator needs m")
        return make_family(mm, int(kv.get("count", 10)), args.seed)
    raise InputError("supply coefficients with --a, --a-file or --family")


def _clean(obj):
    """JSON-safe copy: Fractions to strings, numpy to Python, inf to a string."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if obj is None or isinstance(obj, (str, int, float, bool)):
        return obj
    return exact_str(obj)


# --------------------------------------------------------------------------
# command handlers: each returns (report, csv rows, exit code)


def cmd_kfunc(args):
    fam = family_from_args(args)
    ts = _floats(args.t)
    rows = [["a", "t", "K", "kappa", "holmstedt", "threshold"]]
    results = []
    for a in fam:
        for t in ts:
            sp = k_exact(a, t)
            h = holmstedt(a, t)
            results.append({"a": a.entries.tolist(), "t": t, "K": sp.value, "kappa": kappa(a, t),
                            "holmstedt": h, "threshold": sp.threshold,
                            "l1_part": sp.l1_part.entries.tolist(),
                            "l2_part": sp.l2_part.entries.tolist()})
            rows.append([_vec(a), t, sp.value, kappa(a, t), h, sp.threshold])
    return {"results": results}, rows, 0


def _vec(a) -> str:
    return " ".join(repr(float(x)) for x in a.entries)


def cmd_qnorm(args):
    fam = family_from_args(args)
    t = int(args.t)
    rows = [["a", "t", "value", "blocks", "method"]]
    results = []
    for a in fam:
        res = q_norm_heuristic(a, t) if args.heuristic else q_norm_exact(a, t)
        item = {"a": a.entries.tolist(), "t": t, "value": res.value,
                "blocks": [list(b) for b in res.blocks],
                "method": "heuristic" if args.heuristic else "exact"}
        r = math.isqrt(t)
        if not args.heuristic and r * r == t:
            sw = sandwich_check(a, r)
            item["sandwich"] = {"k_at_sqrt_t": sw.k, "lower_ok": sw.lower_ok, "upper_ok": sw.upper_ok}
        results.append(item)
        rows.append([_vec(a), t, res.value, ";".join(",".join(map(str, b)) for b in res.blocks),
                     item["method"]])
    return {"results": results}, rows, 0


def cmd_tails(args):
    fam = family_from_args(args)
    system = _system(args.system) if args.system else None
    rows = [["a", "z", "lower", "exact", "upper", "chain_ok"]]
    results = []
    for a in fam:
        env = build_envelope(a, args.beta, args.alpha, args.beta_prime)
        sysx = system or parse_system(f"rademacher:{a.n}")
        poly = polynomial(sysx, range(1, a.n + 1), a.entries)
        table = tail_table(poly) if sysx.is_step else None
        if args.z_grid:
            zs = _floats(args.z_grid)
        else:
            zs = np.linspace(0, env.upper_cutoff * 1.05, 65)[1:].tolist()
        pts = []
        for z in zs:
            ch = env.chain(z)
            ex = float(table(z)) if table is not None else None
            pts.append({"z": z, "lower": env.lower(z), "exact": ex, "upper": env.upper(z),
                        "chain_kappa_ok": ch.kappa_ok, "chain_f_ok": ch.f_ok})
            rows.append([_vec(a), z, env.lower(z), ex, env.upper(z), ch.kappa_ok and ch.f_ok])
        results.append({"envelope": env.to_json(), "points": pts})
    return {"results": results}, rows, 0


def cmd_select_kashin(args):
    system = _system(args.system)
    N = args.N or system.size
    D = to_exact(args.D) if args.D else None
    rows = [["status", "indices", "condition_sum", "threshold", "evaluations"]]
    try:
        cert = kashin_select(system, N, args.s, D, budget=args.budget, seed=args.seed)
        code = 0
    except NotFound as exc:
        cert, code = exc.best, 2
    c = cert.to_json()
    rows.append([c["status"], " ".join(map(str, c["indices"])), c["condition_sum"], c["threshold"],
                 c["search_stats"]["evaluations"]])
    return {"certificate": c}, rows, code


def cmd_select_greedy(args):
    system = _system(args.system)
    D = to_exact(args.D) if args.D else system.bound
    sched = EpsilonSchedule.geometric(args.count, D, ratio=args.eps_ratio)
    rows = [["step", "index", "sum", "threshold", "exact_zero"]]
    try:
        cert = greedy_select(system, args.horizon, sched, h=to_exact(args.h), D=D)
        code = 0
    except HorizonExhausted as exc:
        cert, code = exc.certificate, 2
    c = cert.to_json()
    for st in c["steps"]:
        rows.append([st["step"], st["index"], st["sum"], st["threshold"], st["exact_zero"]])
    return {"certificate": c}, rows, code


def cmd_extend(args):
    g = load_functions(_text(args.input))
    D = to_exact(args.D)
    cond = check_extension_condition(g, D)
    plan = plan_extension(g, D)
    h = extend_with_plan(g, plan)
    ver = verify_multiplicative(h)
    out_path = args.output or "h.json"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_functions(h, D=exact_str(D)) + "\n")
    report = {"condition": {"max_abs": str(cond.max_abs), "threshold": str(cond.threshold), "ok": cond.ok},
              "plan": plan.to_json(), "output": out_path,
              "verification": {"ok": ver.ok, "checked": ver.checked}}
    rows = [["k", "theta", "alpha", "target"]]
    for st in plan.stages:
        rows.append([st.k, "".join(map(str, st.theta)), str(st.alpha), str(st.target)])
    return report, rows, 0


def _text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except FileNotFoundError as exc:
        raise InputError(f"file not found: {path}") from exc


def cmd_check_mult(args):
    try:
        h = load_functions(_text(args.path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    rep = verify_multiplicative(h)
    report = {"ok": rep.ok, "checked": rep.checked,
              "worst_subset": list(rep.worst_subset) if rep.worst_subset else None,
              "worst_value": str(rep.worst_value)}
    rows = [["ok", "checked", "worst_subset", "worst_value"],
            [rep.ok, rep.checked, " ".join(map(str, rep.worst_subset or ())), str(rep.worst_value)]]
    return report, rows, 0


def cmd_verify_equiv(args):
    sf, sg = _system(args.sysF), _system(args.sysG)
    m = min(sf.size, sg.size)
    iF = _ints(args.indicesF) if args.indicesF else list(range(1, m + 1))
    iG = _ints(args.indicesG) if args.indicesG else list(range(1, len(iF) + 1))
    if not args.a and not args.a_file and not args.family:
        args.family = f"random:m={len(iF)},count=20"
    fam = family_from_args(args, m=len(iF))
    zs = _floats(args.z_grid) if args.z_grid else None
    try:
        rep = distribution_compare(sf, sg, iF, iG, fam, zs)
        code = 0
    except Unbounded as exc:
        rep, code = exc.report, 2
    report = rep.to_json()
    report["strong_multiplicativity_G"] = None
    if len(iG) <= 12:
        sm = strong_mult_criterion(sg, iG)
        report["strong_multiplicativity_G"] = {"is_strong": sm.is_strong, "D": sm.D_witness,
                                               "d": sm.d_witness}
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    return report, rows, code


def cmd_moment_band(args):
    system = _system(args.system)
    idx = _ints(args.indices) if args.indices else list(range(1, system.size + 1))
    if not args.a and not args.a_file and not args.family:
        args.family = f"random:m={len(idx)},count=20"
    fam = family_from_args(args, m=len(idx))
    ts = _floats(args.t_grid)
    band = moment_band(system, idx, fam, ts)
    rows = [["a"] + [f"t={t:g}" for t in ts]]
    for a, r in zip(fam, band.ratios):
        rows.append([_vec(a)] + r.tolist())
    return {"band": band.to_json()}, rows, 0


HANDLERS = {
    "kfunc": cmd_kfunc, "qnorm": cmd_qnorm, "tails": cmd_tails,
    "select-kashin": cmd_select_kashin, "select-greedy": cmd_select_greedy,
    "extend": cmd_extend, "verify-equiv": cmd_verify_equiv,
    "check-mult": cmd_check_mult, "moment-band": cmd_moment_band,
}


# --------------------------------------------------------------------------
# parser


def _coef_args(p):
    p.add_argument("--a", help="inline coefficients, comma separated")
    p.add_argument("--a-file", help="JSON list of coefficients or {'family': [[...], ...]}")
    p.add_argument("--family", help="generator, e.g. random:m=6,count=50")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lacuna", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lacuna {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write PREFIX.json and PREFIX.csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kfunc", parents=[common], help="K-functional, kappa and Holmstedt")
    _coef_args(p)
    p.add_argument("--t", required=True, help="one or more t values")

    p = sub.add_parser("qnorm", parents=[common], help="partition norm Q(t)")
    _coef_args(p)
    p.add_argument("--t", required=True, type=int)
    p.add_argument("--heuristic", action="store_true")

    p = sub.add_parser("tails", parents=[common], help="tail envelope against exact tails")
    _coef_args(p)
    p.add_argument("--system")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta-prime", type=float, default=None)
    p.add_argument("--z-grid")

    p = sub.add_parser("select-kashin", parents=[common], help="pattern-sum subset search")
    p.add_argument("--system", required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--D")
    p.add_argument("--budget", type=int, default=100_000)

    p = sub.add_parser("select-greedy", parents=[common], help="schedule-driven greedy selection")
    p.add_argument("--system", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--eps-ratio", type=float, default=0.25)
    p.add_argument("--h", default="1")
    p.add_argument("--D")

    p = sub.add_parser("extend", parents=[common], help="multiplicative extension to [0,2]")
    p.add_argument("--input", required=True)
    p.add_argument("--D", required=True)
    p.add_argument("--output")

    p = sub.add_parser("check-mult", parents=[common], help="exhaustive multiplicativity check")
    p.add_argument("path")

    p = sub.add_parser("verify-equiv", parents=[common], help="equivalence in distribution")
    p.add_argument("--sysF", required=True)
    p.add_argument("--sysG", required=True)
    p.add_argument("--indicesF")
    p.add_argument("--indicesG")
    p.add_argument("--z-grid")
    _coef_args(p)

    p = sub.add_parser("moment-band", parents=[common], help="moment ratios against kappa")
    p.add_argument("--system", required=True)
    p.add_argument("--indices")
    p.add_argument("--t-grid", default="1,2,4,8,16,32")
    _coef_args(p)

    p = sub.add_parser("run", help="run a JSON job config")
    p.add_argument("config")
    return parser


def _config_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}


def _write_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def execute(args) -> int:
    env_seed = os.environ.get("LACUNA_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed)
        except ValueError as exc:
            raise InputError(f"LACUNA_SEED must be an integer, got {env_seed!r}") from exc
    if getattr(args, "beta_prime", "absent") is None:
        args.beta_prime = args.beta
    report, rows, code = HANDLERS[args.command](args)
    full = {"command": args.command, "config": _clean(_config_dict(args)), "seed": args.seed,
            "version": __version__, "report": _clean(report), "exit_code": code}
    text = json.dumps(full, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if args.out:
        with open(args.out + ".json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        with open(args.out + ".csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_write_csv(rows))
    sys.stdout.write(text)
    return code


def run(config: dict) -> int:
    """Execute a job described as a dict with ``command`` plus flag values."""
    if "command" not in config:
        raise InputError("config: missing field 'command'")
    cmd = config["command"]
    if cmd not in COMMANDS:
        raise InputError(f"config: field 'command' must be one of {', '.join(COMMANDS)}")
    argv = [cmd]
    for key, val in config.items():
        if key == "command":
            continue
        if key == "path":
            argv.append(str(val))
            continue
        flag = "--" + key.replace("_", "-") if key not in ("N", "D", "sysF", "sysG", "indicesF", "indicesG") else "--" + key
        if val is True:
            argv.append(flag)
        elif val is False or val is None:
            continue
        else:
            argv.extend([flag, str(val)])
    args = build_parser().parse_args(argv)
    return execute(args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return run(_read_json(args.config))
        return execute(args)
    except (InputError, LacunaError, ValueError, KeyError, IndexError) as exc:
        sys.stderr.write(f"lacuna: error: {exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
