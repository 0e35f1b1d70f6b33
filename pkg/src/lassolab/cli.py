"""Command-line front end: ``lassolab {verify,simulate,rates,instance,risk}``.

Exit codes: 0 success, 1 failed check or runtime error, 2 usage error.
Any flag may also come from ``--config file.json`` (keys are flag names with
dashes or underscores); explicit flags win over the file.
"""

import argparse
import csv
import io
import json
import sys
import warnings
from datetime import datetime, timezone

import numpy as np

from lassolab import __version__, _accel, gauss, mc, theory, verify
from lassolab.designs import DiagonalDesign, make_alpha_instance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _str_list(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _params(p, n, d=None, sigma=1.0, B=1.0, R=None, s=None):
    d = n if d is None else d
    try:
        if p == 0:
            if s is None:
                raise UsageError("p = 0 needs --s")
            return theory.ProblemParams(p=0, n=n, d=d, sigma=sigma, B=B, s=int(s))
        if R is None:
            raise UsageError("p > 0 needs --R")
        return theory.ProblemParams(p=p, n=n, d=d, sigma=sigma, B=B, R=R)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# --- subcommands -------------------------------------------------------------

def cmd_verify(args):
    if not args.grid_step > 0 or args.grid_step > 1:
        raise UsageError("--grid-step must lie in (0, 1]")
    fault = verify.FAULTS[0] if args.self_test else None
    results = verify.run_checks(grid_step=args.grid_step, fault=fault)
    print(verify.format_table(results))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed (backend: {_accel.backend_name()})")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_simulate(args):
    if not 0 <= args.p <= 1:
        raise UsageError("--p must lie in [0, 1]")
    if any(n < 2 for n in args.n):
        raise UsageError("--n values must be >= 2")
    if args.trials is not None and args.trials < 2:
        raise UsageError("--trials must be >= 2")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    for n in args.n:
        params = _params(args.p, n, B=n**0.5, R=1.0, s=1)
        if not params.lower_bound_regime_ok():
            raise UsageError(f"n={n} violates n <= (sigma^2 B / R^2) d^2")
    try:
        rows = mc.sweep(args.n, args.p, estimators=args.estimators, trials=args.trials,
                        master_seed=args.seed, workers=args.workers)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if args.timestamp else None
    _emit(mc.rows_to_csv(rows, timestamp=stamp), args.out)
    if args.plot:
        mc.write_svg(rows, args.plot, title=f"p = {args.p:g}")
    return EXIT_OK


RATE_COLUMNS = ["p", "n", "d", "sigma", "B", "R_or_s", "rate_core", "lower_const", "upper_const", "regime_ok"]


def cmd_rates(args):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RATE_COLUMNS)
    for p in args.p:
        for n in args.n:
            params = _params(p, n, args.d, args.sigma, args.B, args.R, args.s)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", theory.RegimeWarning)
                try:
                    rep = theory.minimax_rate(params)
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
            w.writerow([f"{p:g}", n, params.d, repr(float(params.sigma)), repr(float(params.B)),
                        params.R_or_s, repr(rep.value), repr(rep.detail["lower_const"]),
                        repr(rep.detail["upper_const"]), str(rep.regime_ok).lower()])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_instance(args):
    params = _params(args.p, args.n, args.d, args.sigma, args.B, args.R, args.s)
    try:
        if args.data_dependent:
            if args.alpha is not None:
                raise UsageError("--alpha and --data-dependent are exclusive")
            inst, theta = theory.data_dependent_instance(params)
        else:
            alpha = theory.alpha_star(params) if args.alpha is None else args.alpha
            inst = make_alpha_instance(params.n, params.d, params.B, alpha)
            theta = theory.worst_theta(params, alpha, inst.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = inst.to_json()
    doc["theta"] = [float(v) for v in theta]
    doc["p"] = args.p
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_risk(args):
    if args.nu <= 0 or args.lam < 0:
        raise UsageError("need --nu > 0 and --lambda >= 0")
    env = gauss.johnstone_envelope(args.nu, args.lam, args.mu)
    doc = {
        "lambda": args.lam,
        "mu": args.mu,
        "nu": args.nu,
        "risk": float(gauss.risk_soft_scaled(args.nu, args.lam, args.mu)),
        "risk_at_zero": float(gauss.risk_soft_scaled(args.nu, args.lam, 0.0)),
        "envelope": {"lower": env.lower, "upper": env.upper},
    }
    if args.s is not None:
        if args.n is None or args.tau is None:
            raise UsageError("the Lasso lower bound needs --n, --s and --tau")
        theta = np.zeros(len(args.s)) if args.theta is None else np.asarray(args.theta)
        if theta.shape != (len(args.s),):
            raise UsageError("--theta and --s must have equal length")
        try:
            design = DiagonalDesign(n=args.n, d=len(args.s), s=args.s)
            doc["lasso_lower"] = theory.lasso_risk_lower_diag(design, theta, args.sigma, args.tau)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    print(json.dumps(doc, indent=2))
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def _common():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", metavar="JSON", help="read flag values from a JSON object")
    return parent


def _problem_flags(sp, n_list=False, p_list=False):
    sp.add_argument("--p", type=_float_list if p_list else float, required=True, help="sparsity exponent in [0, 1]")
    sp.add_argument("--n", type=_int_list if n_list else int, required=True, help="sample size")
    sp.add_argument("--d", type=int, help="dimension (default n)")
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--B", type=float, default=1.0, help="inverse minimum Gram eigenvalue level")
    sp.add_argument("--R", type=float, help="l_p radius (p > 0)")
    sp.add_argument("--s", type=int, help="sparsity level (p = 0)")
    sp.add_argument("--out", help="output file (default stdout)")


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="lassolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lassolab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    sp = sub.add_parser("verify", parents=[common], help="run the analytic check suite")
    sp.add_argument("--grid-step", type=float, default=1e-3, help="t-grid spacing on (0, 10]")
    sp.add_argument("--self-test", action="store_true", help="inject a known fault; must exit nonzero")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", parents=[common], help="Monte Carlo sweep on the lower-bound instance")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=_int_list, required=True, help="comma-separated sample sizes")
    sp.add_argument("--trials", type=int, help="trials per n (default 1000, or 300 for n >= 1024)")
    sp.add_argument("--seed", type=int, default=0, help="master seed")
    sp.add_argument("--estimators", type=_str_list, default=["lasso:oracle", "stols:auto"])
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.add_argument("--plot", metavar="SVG", help="also write a log-log SVG plot")
    sp.add_argument("--timestamp", action="store_true", help="prepend a generation-time comment")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("rates", parents=[common], help="minimax rate table as CSV")
    _problem_flags(sp, n_list=True, p_list=True)
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("instance", parents=[common], help="export a hard instance as JSON")
    _problem_flags(sp)
    sp.add_argument("--alpha", type=float, help="condition number (default alpha*)")
    sp.add_argument("--data-dependent", action="store_true", help="alpha = n R^2 / (sigma^2 B), theta = R e_{k+1}")
    sp.set_defaults(func=cmd_instance)

    sp = sub.add_parser("risk", parents=[common], help="soft-threshold risk functionals as JSON")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--nu", type=float, default=1.0, help="noise standard deviation")
    sp.add_argument("--n", type=int, help="sample size for the Lasso lower bound")
    sp.add_argument("--s", type=_float_list, help="diagonal scales s_i for the Lasso lower bound")
    sp.add_argument("--theta", type=_float_list, help="parameter for the Lasso lower bound (default 0)")
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--tau", type=float, help="lambda = tau sqrt(sigma^2 / n) for the Lasso lower bound")
    sp.set_defaults(func=cmd_risk)
    return parser


def _apply_config(parser, argv):
    """Load ``--config`` into the chosen subparser's defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(cfg, dict):
        parser.error("config must be a JSON object")
    command = next((a for a in argv if not a.startswith("-")), None)
    subparsers = parser._subparsers._group_actions[0].choices
    if command not in subparsers:
        parser.error("config needs a subcommand on the command line")
    sp = subparsers[command]
    actions = {a.dest: a for a in sp._actions}
    aliases = {s.lstrip("-").replace("-", "_"): a.dest for a in sp._actions for s in a.option_strings}
    values = {}
    for key, val in cfg.items():
        dest = aliases.get(str(key).replace("-", "_"))
        if dest is None or dest in ("help", "config"):
            sp.error(f"unknown config key {key!r}")
        action = actions[dest]
        if action.type is not None and not isinstance(val, bool):
            val = action.type(",".join(map(str, val)) if isinstance(val, list) else str(val))
        values[dest] = val
        action.required = False
    sp.set_defaults(**values)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except argparse.ArgumentTypeError as exc:
        print(f"lassolab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lassolab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lassolab {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
