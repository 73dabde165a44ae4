"""Command-line interface.

    cvples run <config> [--key=value ...]
    cvples sigma-eq --filter=<kind> [--int6] [--alpha=A]
    cvples overhead <configA> <configB> ... [--steps=N] [--repeats=R]

Exit codes: 0 success, 2 configuration error, 3 solver blow-up. The output
directory of ``run`` can be redirected with the ``CVPLES_OUTPUT_DIR``
environment variable.
"""
import argparse
import logging
from pathlib import Path
import sys

from .config import parse_config
from .errors import ConfigError
from .runner import EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, OUTPUT_ENV, format_overhead, measure_overhead, run


def _split_overrides(extra):
    """``['--cs=0.2', '--model', 'vreman']`` -> ``{'cs': '0.2', 'model': 'vreman'}``."""
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(tok, f"unexpected argument {tok!r}; overrides are --key=value")
        body = tok[2:]
        if "=" in body:
            k, v = body.split("=", 1)
        elif i + 1 < len(extra) and not extra[i + 1].startswith("--"):
            k, v = body, extra[i + 1]
            i += 1
        else:
            raise ConfigError(body, f"override --{body} needs a value")
        out[k] = v
        i += 1
    return out


def _load(path, overrides=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror or exc}") from None
    return parse_config(text, overrides)


def _cmd_run(args, extra):
    cfg = _load(args.config, _split_overrides(extra))
    result = run(cfg, progress_every=args.progress)
    rec = result.records[-1] if result.records else None
    where = result.output_dir if result.output_dir is not None else "-"
    if result.blew_up:
        print(f"blow-up: {result.reason}", file=sys.stderr)
    else:
        print(f"finished {result.steps} steps, t={result.t:.6g}, E={rec.E:.9g} "
              f"({result.wall_time:.1f} s) -> {where}")
    return EXIT_BLOWUP if result.blew_up else EXIT_OK


def _cmd_sigma_eq(args, extra):
    if extra:
        raise ConfigError(extra[0], f"unexpected argument {extra[0]!r}")
    from .cvp import sigma_eq_quadrature
    from .filters import TestFilterSpec
    try:
        spec = TestFilterSpec(args.filter, args.alpha if args.alpha is not None else -0.4)
    except ValueError as exc:
        raise ConfigError("filter", str(exc)) from None
    value = sigma_eq_quadrature(spec, "int6" if args.int6 else "identity")
    print(f"{value:.6f}")
    return EXIT_OK


def _cmd_overhead(args, extra):
    overrides = _split_overrides(extra)
    configs = [_load(p, overrides) for p in args.configs]
    try:
        rows = measure_overhead(configs, steps=args.steps, repeats=args.repeats)
    except ValueError as exc:
        raise ConfigError("configs", str(exc)) from None
    print(format_overhead(rows))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="cvples", description="Compressible LES with the CvP eddy-viscosity sensor.",
                                epilog=f"Set {OUTPUT_ENV} to redirect run outputs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a case from a key=value config file")
    r.add_argument("config")
    r.add_argument("--progress", type=int, default=0, metavar="N", help="log every N steps (with -v)")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sigma-eq", help="equilibrium enstrophy ratio of a test filter")
    s.add_argument("--filter", required=True, type=str.upper, choices=("IMPL6", "EXPL4", "GAUSS"))
    s.add_argument("--int6", action="store_true", help="weight by the INT6 interpolant transfer function")
    s.add_argument("--alpha", type=float, default=None, help="IMPL6 parameter (default -0.4)")
    s.set_defaults(func=_cmd_sigma_eq)

    o = sub.add_parser("overhead", help="per-step cost relative to a no-model run")
    o.add_argument("configs", nargs="+")
    o.add_argument("--steps", type=int, default=10)
    o.add_argument("--repeats", type=int, default=3)
    o.set_defaults(func=_cmd_overhead)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args, extra)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
