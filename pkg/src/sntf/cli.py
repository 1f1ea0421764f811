"""Command-line entry point: ``sntf {gen,solve,sweep,bound}``.

Exit status is 0 on success, 1 for usage errors and 2 for runtime or
numeric failures (including unreadable input files).
"""

import argparse
import sys

from . import io
from .admm_solver import SolverConfig, relative_error, solve
from .harness import ExperimentSpec, generate_instance, mean_re_by_axis, run_sweep, write_csv
from .observation_model import make_noise, sample_mask, synthesize
from .theory_bounds import BoundInputs, bound_table

DESK_N = 50
FULL_N = 100


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(float(v)) for v in text.replace(",", " ").split())


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def parse_config(path):
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _noise_from(tag, sigma, tau):
    tag = tag.lower()
    if tag == "gaussian":
        return make_noise(tag, sigma)
    if tag == "laplace":
        return make_noise(tag, tau)
    return make_noise(tag)


def _add_noise_args(p):
    p.add_argument("--noise", choices=("gaussian", "laplace", "poisson"), default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)


def _add_solver_args(p):
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)


def build_parser():
    parser = _Parser(prog="sntf", description="Sparse nonnegative t-product tensor completion.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gen", help="write a synthetic ground truth (NT3) and its observations (OBS)")
    for name in ("n1", "n2", "n3"):
        p.add_argument(f"--{name}", type=int, default=DESK_N)
    p.add_argument("--r", type=int, default=10)
    p.add_argument("--s", type=float, default=0.3)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--sr", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    _add_noise_args(p)
    p.add_argument("--out", required=True, help="output prefix")

    p = sub.add_parser("solve", help="run ADMM on an OBS file")
    p.add_argument("--obs", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_solver_args(p)
    p.add_argument("--out", required=True, help="solution NT3 path")
    p.add_argument("--trace", default=None, help="per-iteration CSV trace path")
    p.add_argument("--xstar", default=None, help="ground-truth NT3 for reporting RE")

    p = sub.add_parser("sweep", help="run an experiment sweep from a config file")
    p.add_argument("--config", default=None)
    _add_noise_args(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--sr", type=float, default=None)
    p.add_argument("--sr-list", default=None)
    p.add_argument("--r-list", default=None)
    p.add_argument("--n-list", default=None)
    p.add_argument("--seeds", default=None)
    _add_solver_args(p)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--full", action="store_const", const="true", default=None,
                   help=f"use {FULL_N}^3 tensors instead of {DESK_N}^3")
    p.add_argument("--timing", action="store_const", const="true", default=None,
                   help="fill the ms column (makes output run-dependent)")

    p = sub.add_parser("bound", help="print the theoretical bound quantities")
    _add_noise_args(p)
    for name in ("n1", "n2", "n3", "r", "m"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--b0", type=int, required=True, help="nonzeros of the sparse factor")
    p.add_argument("--s", type=int, default=None, help="sparsity budget for the lower bound")
    p.add_argument("--zeta", type=float, default=None)
    p.add_argument("--beta", type=float, default=None, help="override beta")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--beta-c", type=float, default=1.0)
    return parser


def _solver_config(opts, r, b, c=None, seed=0):
    kw = {"r": r, "b": b, "c": c, "seed": seed}
    for key in ("rho", "lam", "max_iters", "tol"):
        val = opts.get(key)
        if val is not None:
            kw[key] = val
    return SolverConfig(**kw)


def cmd_gen(args):
    noise = _noise_from(args.noise or "gaussian", args.sigma or 0.1, args.tau or 0.1)
    dims = (args.n1, args.n2, args.n3)
    inst = generate_instance(dims, args.r, args.s, args.b, args.seed)
    idx = sample_mask(dims, args.sr, args.seed)
    obs = synthesize(inst.X, idx, noise, args.seed, gamma=args.sr)
    io.write_nt3(f"{args.out}_xstar.nt3", inst.X)
    io.write_obs(f"{args.out}.obs", obs)
    print(f"wrote {args.out}.obs (m={obs.m}) and {args.out}_xstar.nt3 (c={inst.c:.17g})")
    return 0


def cmd_solve(args):
    obs = io.read_obs(args.obs)
    xstar = io.read_nt3(args.xstar) if args.xstar else None
    cfg = _solver_config(vars(args), args.r, args.b, args.c, args.seed)
    rep = solve(obs, cfg, trace=args.trace)
    io.write_nt3(args.out, rep.estimate)
    msg = f"iters={rep.iters_run} converged={rep.converged} eta_max={rep.eta_history[-1, -1]:.3e}" \
        if rep.iters_run else "iters=0 converged=False"
    if xstar is not None:
        msg += f" re={relative_error(rep.estimate, xstar):.6g}"
    print(msg)
    return 0


_SWEEP_KEYS = ("noise", "sigma", "tau", "n", "r", "s", "b", "sr", "sr_list", "r_list", "n_list",
               "seeds", "rho", "lam", "max_iters", "tol", "workers", "output", "full", "timing")


def sweep_spec(settings):
    """Build an :class:`ExperimentSpec` from merged config-file/flag settings."""
    get = settings.get
    full = _bool(get("full", "false"))
    n = int(get("n", FULL_N if full else DESK_N))
    noise = _noise_from(get("noise", "gaussian"), float(get("sigma", 0.1)), float(get("tau", 0.1)))
    opts = {
        "rho": float(get("rho")) if get("rho") is not None else None,
        "lam": float(get("lam")) if get("lam") is not None else None,
        "max_iters": int(get("max_iters")) if get("max_iters") is not None else None,
        "tol": float(get("tol")) if get("tol") is not None else None,
    }
    return ExperimentSpec(
        dims=(n, n, n),
        r_true=int(get("r", 10)),
        s=float(get("s", 0.3)),
        b=float(get("b", 2.0)),
        noise=noise,
        sr=float(get("sr", 0.5)),
        sr_list=_floats(get("sr_list", "")),
        r_list=_ints(get("r_list", "")),
        n_list=_ints(get("n_list", "")),
        seeds=_ints(get("seeds", "0 1 2")),
        solver=_solver_config(opts, 1, 1.0),
        output_path=None,
    )


def cmd_sweep(args):
    settings = parse_config(args.config) if args.config else {}
    if "lambda" in settings:
        settings["lam"] = settings.pop("lambda")
    unknown = set(settings) - set(_SWEEP_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in _SWEEP_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = str(val)
    spec = sweep_spec(settings)
    rows = run_sweep(spec, workers=int(settings.get("workers", 1)))
    output = settings.get("output")
    timing = _bool(settings.get("timing", "false"))
    write_csv(rows, output or sys.stdout, timing=timing)
    for value, re in mean_re_by_axis(rows).items():
        print(f"mean re @ {value:g}: {re:.6g}", file=sys.stderr)
    for row in rows:
        if row.error:
            print(f"run ({row.axis_value:g}, {row.seed}) failed: {row.error}", file=sys.stderr)
    return 0


def cmd_bound(args):
    noise = _noise_from(args.noise or "gaussian", args.sigma, args.tau)
    inputs = BoundInputs(
        n1=args.n1, n2=args.n2, n3=args.n3, r=args.r, m=args.m, b=args.b, c=args.c,
        noise=noise, b0_norm=args.b0, s=args.s, zeta=args.zeta, beta_override=args.beta,
    )
    for label, value in bound_table(inputs, beta_c=args.beta_c, C=args.C):
        text = str(value) if isinstance(value, int) else f"{value:.12g}"
        print(f"{label:<9} {text}")
    return 0


_COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "sweep": cmd_sweep, "bound": cmd_bound}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sntf: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        where = f": {exc.filename}" if getattr(exc, "filename", None) else ""
        print(f"sntf: {exc.strerror or exc}{where}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, ArithmeticError) as exc:
        print(f"sntf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
