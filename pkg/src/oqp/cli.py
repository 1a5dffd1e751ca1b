"""Command-line front end.

Subcommands: ``rate``, ``optimize``, ``simulate``, ``classify`` and
``validate``. Numeric CSV fields use 9 significant digits. Exit codes: 0 ok,
2 domain error, 3 no crossing or no admissible duration, 4 simulation
unresolved.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import jsonschema

from . import schema
from .dmt_models import CoopOAF, MimoQuasiStatic, PiecewiseLinear, SisoFastFading, describe
from .errors import DomainError, OqpError, SimulationUnresolved
from .optimizer import classify_and_bound, optimize_case1
from .queue_sim import SimConfig, SimReport, _fmt, exact_discrete_oracle, simulate
from .rate_models import CPE, ScalingRegime

SWEEP_PARAMS = {
    "optimize": ("lambda", "mu", "D", "T", "v", "gamma"),
    "classify": ("lambda", "mu", "D", "v"),
    "simulate": ("lambda", "mu", "D", "r", "T", "N"),
}
INT_PARAMS = {"D", "T", "v"}

OPT_HEADER = ["lambda", "mu", "gamma", "D", "channel", "d_star", "r_star", "t_star",
              "v_star", "d_ir", "r_ir", "t_ir", "v_ir"]
TABLE_HEADER = ["lambda", "mu", "gamma", "D", "channel", "T", "v", "r_star_of_T",
                "gamma_I", "d_ch", "bracket_lo", "bracket_hi"]
CLASSIFY_HEADER = ["lambda", "mu", "D", "channel", "regime", "bound", "t_star"]


class _Fail(Exception):
    """Carries an error message across a process pool."""


def _pair(text, kind=float, n=2):
    try:
        vals = [kind(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}") from exc
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
    return tuple(vals)


def _int_like(text):
    """Accept ``1e7`` style integers."""
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text}")
    return int(value)


def _sweep(text):
    name, _, values = text.partition("=")
    if not values:
        raise argparse.ArgumentTypeError("sweep must look like name=v1,v2,...")
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sweep values in {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("sweep needs at least one value")
    return name.strip(), vals


def _pmf(text):
    pmf = {}
    try:
        for item in text.split(","):
            a, p = item.split(":")
            pmf[int(a)] = pmf.get(int(a), 0.0) + float(p)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"pmf must look like 0:0.75,2:0.25, got {text!r}") from exc
    return pmf


def _add_model(p, required=True):
    p.add_argument("--cpe", type=_pair, required=required, metavar="LAMBDA,MU",
                   help="compound Poisson source with exponential packets")


def _add_channel(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--siso", action="store_true", help="SISO fast fading")
    g.add_argument("--mimo", type=lambda s: _pair(s, int), metavar="NT,NR",
                   help="quasi-static MIMO channel")
    g.add_argument("--coop", type=int, metavar="VMAX",
                   help="amplify-and-forward relaying with up to VMAX relays")
    g.add_argument("--pwl", metavar="FILE", help="piecewise-linear tradeoff from JSON")


def _add_output(p, default_format):
    p.add_argument("--format", choices=("csv", "json"), default=default_format,
                   help=f"default: {default_format or 'json, or csv with --oracle'}")
    p.add_argument("--output", "-o", help="write here instead of stdout")
    p.add_argument("--jobs", type=int, default=int(os.environ.get("OQP_JOBS", "1")),
                   help="worker processes for sweeps (default: $OQP_JOBS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oqp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="log-MGF, rate function and delta_r of a source")
    _add_model(p)
    p.add_argument("--theta", type=float, action="append", default=[], help="evaluate Lambda(theta)")
    p.add_argument("--x", type=float, action="append", default=[], help="evaluate Lambda*(x)")
    p.add_argument("--delta-r", type=float, action="append", default=[], metavar="R",
                   help="largest theta with Lambda(theta) < theta*R")
    p.add_argument("--burstiness", type=float, action="append", default=[], metavar="G",
                   help="std/mean of slot arrivals for g(N)=G")
    p.add_argument("--digits", type=int, default=6, help="significant digits printed")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o")

    p = sub.add_parser("optimize", help="rate and coding duration balancing both error types")
    _add_model(p)
    _add_channel(p)
    p.add_argument("--gamma", type=float, default=1.0, help="lim g(N)/N")
    p.add_argument("--D", type=int, required=True, help="delay bound in slots")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="relaxed_I", action="store_false",
                      help="use the exact delay exponent (default)")
    mode.add_argument("--relaxed", dest="relaxed_I", action="store_true",
                      help="use the relaxed lower bound on the delay exponent")
    p.set_defaults(relaxed_I=False)
    p.add_argument("--fixed-T", type=int, help="restrict to one coding duration")
    p.add_argument("--table", action="store_true", help="CSV: emit per-duration rows")
    p.add_argument("--sweep", type=_sweep, metavar="NAME=V1,V2,...",
                   help="one of " + ", ".join(SWEEP_PARAMS["optimize"]))
    _add_output(p, "csv")

    p = sub.add_parser("classify", help="exponent or bound under a scaling regime")
    _add_model(p)
    _add_channel(p)
    p.add_argument("--regime", type=ScalingRegime.parse, required=True,
                   help="linear:GAMMA, sublinear or superlinear")
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--sweep", type=_sweep, metavar="NAME=V1,V2,...")
    _add_output(p, "csv")

    p = sub.add_parser("simulate", help="Monte Carlo delay-violation probability")
    _add_model(p, required=False)
    p.add_argument("--N", type=float, help="log SNR")
    p.add_argument("--g", default="linear",
                   help="g(N): 'linear' (g=N), 'linear:GAMMA' (g=GAMMA*N) or a number")
    p.add_argument("--r", type=float, help="multiplexing gain")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--slots", type=_int_like, default=10**6,
                   help="measured slots in total, split evenly over replications")
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--warmup", type=_int_like, help="warm-up slots per replication")
    p.add_argument("--seed", type=_int_like, default=0)
    p.add_argument("--oracle", action="store_true",
                   help="exact probability for an integer arrival pmf instead")
    p.add_argument("--pmf", type=_pmf, help="with --oracle: 'a:p,a:p,...'")
    p.add_argument("--R", type=int, help="with --oracle: service bits per slot")
    p.add_argument("--q-cap", type=int, default=5000, help="with --oracle: state-space size")
    p.add_argument("--sweep", type=_sweep, metavar="NAME=V1,V2,...")
    _add_output(p, None)

    p = sub.add_parser("validate", help="check a JSON file written by this tool")
    p.add_argument("path")
    return parser


def _channel(args):
    if args.siso:
        return SisoFastFading()
    if args.mimo:
        return MimoQuasiStatic(*args.mimo)
    if args.coop is not None:
        return CoopOAF(args.coop)
    return PiecewiseLinear.load(args.pwl)


def _points(args, command, base):
    """Expand ``--sweep`` into a list of parameter dicts."""
    if not args.sweep:
        return [base]
    name, values = args.sweep
    if name not in SWEEP_PARAMS[command]:
        raise DomainError(f"cannot sweep {name!r} for {command}; use one of {SWEEP_PARAMS[command]}")
    out = []
    for v in values:
        if name in INT_PARAMS:
            if v != int(v):
                raise DomainError(f"{name} must be an integer, got {v}")
            v = int(v)
        out.append({**base, name: v})
    return out


def _with_v(channel, v):
    if v is None:
        return channel
    if not isinstance(channel, CoopOAF):
        raise DomainError("v only applies to --coop")
    return CoopOAF(int(v))


def _guard(fn, params):
    try:
        return fn(params)
    except OqpError as exc:
        raise _Fail(type(exc).__name__, exc.exit_code, str(exc)) from None


def _run_all(fn, points, jobs):
    # results come back in sweep order regardless of completion order
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_guard, [fn] * len(points), points))
    return [_guard(fn, p) for p in points]


def _opt_task(p):
    model = CPE(p["lambda"], p["mu"])
    channel = _with_v(p["channel"], p.get("v"))
    return optimize_case1(model, channel, p["gamma"], p["D"], use_relaxed_I=p["relaxed_I"],
                          fixed_T=p.get("T"))


def _classify_task(p):
    model = CPE(p["lambda"], p["mu"])
    channel = _with_v(p["channel"], p.get("v"))
    return classify_and_bound(model, channel, p["regime"], p["D"])


def _g_of_N(text, N):
    name, _, arg = text.partition(":")
    if name == "linear":
        return (float(arg) if arg else 1.0) * N
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"--g must be 'linear', 'linear:GAMMA' or a number, got {text!r}") from None


def _sim_task(p):
    T, reps = p["T"], p["replications"]
    per_rep = p["slots"] // reps // T * T
    if per_rep <= 0:
        raise DomainError("--slots too small for the number of replications and T")
    cfg = SimConfig(CPE(p["lambda"], p["mu"]), p["N"], _g_of_N(p["g"], p["N"]), p["r"], T, p["D"],
                    per_rep, seed=p["seed"], replications=reps, warmup_slots=p["warmup"])
    return simulate(cfg)


def _inputs(p):
    out = {}
    for k, v in p.items():
        if k == "channel":
            out[k] = describe(_with_v(v, p.get("v")))
        elif k == "regime":
            out[k] = v.kind if v.gamma is None else f"{v.kind}:{v.gamma:g}"
        elif v is not None:
            out[k] = v
    return out


def _csv(rows, header):
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else _fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _opt_csv(points, results, table):
    rows = []
    for p, res in zip(points, results):
        head = [p["lambda"], p["mu"], p["gamma"], p["D"], _inputs(p)["channel"]]
        if table:
            for row in res.per_t_table:
                rows.append(head + [row.T, row.v, row.r_star_of_T, row.gamma_I, row.d_ch, *row.bracket])
        else:
            rx = res.relaxed
            rows.append(head + [res.d_star, res.r_star, res.t_star, res.v_star,
                                rx.d_ir, rx.r_ir, rx.t_ir, rx.v_ir])
    return _csv(rows, TABLE_HEADER if table else OPT_HEADER)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_rate(args):
    model = CPE(*args.cpe)
    values = {}
    for th in args.theta:
        values[f"log_mgf({th:g})"] = model.log_mgf(th)
    for x in args.x:
        values[f"conjugate({x:g})"] = model.conjugate(x)
    for r in args.delta_r:
        values[f"delta_r({r:g})"] = model.delta_r(r)
    for g in args.burstiness:
        values[f"burstiness({g:g})"] = model.burstiness(g)
    if not values:
        raise DomainError("give at least one of --theta, --x, --delta-r, --burstiness")
    if args.format == "json":
        text = schema.dumps("rate", [({"lambda": model.lam, "mu": model.mu}, values)]) + "\n"
    else:
        text = "".join(f"{v:.{args.digits}g}\n" for v in values.values())
    _emit(text, args.output)
    return 0


def cmd_optimize(args):
    base = {"lambda": args.cpe[0], "mu": args.cpe[1], "gamma": args.gamma, "D": args.D,
            "channel": _channel(args), "relaxed_I": args.relaxed_I, "T": args.fixed_T}
    points = _points(args, "optimize", base)
    results = _run_all(_opt_task, points, args.jobs)
    if args.format == "json":
        text = schema.dumps("optimize", [(_inputs(p), r) for p, r in zip(points, results)]) + "\n"
    else:
        text = _opt_csv(points, results, args.table)
    _emit(text, args.output)
    return 0


def cmd_classify(args):
    base = {"lambda": args.cpe[0], "mu": args.cpe[1], "D": args.D,
            "channel": _channel(args), "regime": args.regime}
    points = _points(args, "classify", base)
    results = _run_all(_classify_task, points, args.jobs)
    if args.format == "json":
        text = schema.dumps("classify", [(_inputs(p), r) for p, r in zip(points, results)]) + "\n"
    elif args.regime.kind == "linear":
        for p in points:
            p["gamma"] = args.regime.gamma
        text = _opt_csv(points, results, table=False)
    else:
        rows = [[p["lambda"], p["mu"], p["D"], _inputs(p)["channel"], r.regime, r.case_bound, r.t_star]
                for p, r in zip(points, results)]
        text = _csv(rows, CLASSIFY_HEADER)
    _emit(text, args.output)
    return 0


def cmd_oracle(args):
    if args.pmf is None or args.R is None:
        raise DomainError("--oracle needs --pmf and --R")
    p = exact_discrete_oracle(args.pmf, args.R, args.T, args.D, args.q_cap)
    if args.format == "json":
        inputs = {"pmf": {str(a): q for a, q in args.pmf.items()}, "R": args.R, "T": args.T, "D": args.D}
        text = schema.dumps("oracle", [(inputs, {"p_exact": p})]) + "\n"
    else:
        text = f"p_exact,{_fmt(p)}\n"
    _emit(text, args.output)
    return 0


def cmd_simulate(args):
    if args.oracle:
        args.format = args.format or "csv"
        return cmd_oracle(args)
    args.format = args.format or "json"
    if args.cpe is None or args.N is None or args.r is None:
        raise DomainError("simulate needs --cpe, --N and --r")
    base = {"lambda": args.cpe[0], "mu": args.cpe[1], "N": args.N, "g": args.g, "r": args.r,
            "T": args.T, "D": args.D, "slots": args.slots, "replications": args.replications,
            "warmup": args.warmup, "seed": args.seed}
    points = _points(args, "simulate", base)
    results = _run_all(_sim_task, points, args.jobs)
    if args.format == "json":
        text = schema.dumps("simulate", [(_inputs(p), r) for p, r in zip(points, results)]) + "\n"
    else:
        rows = [r.csv_row(p["N"], p["r"], p["T"], p["D"]) for p, r in zip(points, results)]
        text = SimReport.CSV_HEADER + "\n" + "\n".join(rows) + "\n"
    _emit(text, args.output)
    if any(r.p_delay_hat == 0 for r in results):
        raise SimulationUnresolved("no violations observed; probability below simulation resolution")
    return 0


def cmd_validate(args):
    with open(args.path, encoding="utf-8") as fh:
        command, records = schema.loads(fh.read())
    print(f"ok: {command}, {len(records)} record(s)")
    return 0


COMMANDS = {
    "rate": cmd_rate,
    "optimize": cmd_optimize,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Fail as exc:
        name, code, msg = exc.args
        print(f"oqp: {name}: {msg}", file=sys.stderr)
        return code
    except OqpError as exc:
        print(f"oqp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, jsonschema.ValidationError) as exc:
        # unreadable files, malformed JSON, schema violations
        print(f"oqp: error: {exc}".splitlines()[0], file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
