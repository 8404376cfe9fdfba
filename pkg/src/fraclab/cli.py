"""Command-line interface.

Exit codes: 0 success, 2 domain error, 3 resource error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction

from . import __version__
from .errors import DomainError, FraclabError, ResourceError

EXIT_OK, EXIT_DOMAIN, EXIT_RESOURCE, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("range must satisfy lo <= hi")
    return lo, hi


def _frange(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dry-run", action="store_true", help="validate inputs and print the plan only")
    p.add_argument("--threads", type=int, help="worker threads (default: FRACLAB_THREADS or all cores)")
    p.add_argument("--seed", type=int, help="random seed where sampling is involved")


def _add_system(p):
    p.add_argument("--preset", choices=["bernoulli_comb", "affine_companion", "extended_comb", "sphere"])
    p.add_argument("--lambda", dest="lam", help="lambda as a decimal or a fraction such as 1/2")
    p.add_argument("--lambda-poly", help="integer polynomial for 1/lambda, largest real root")
    p.add_argument("--epsilon", help="extra map scale for extended_comb")
    p.add_argument("--c", type=float, help="scale for the sphere preset")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fraclab", description="Inhomogeneous self-similar sets and their dimensions.")
    parser.add_argument("--version", action="version", version=f"fraclab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("classify", help="classify 1/lambda as Garsia, Pisot or neither")
    _add_common(p)
    p.add_argument("--poly", help="polynomial for 1/lambda, e.g. x^2-2")
    p.add_argument("--lambda", dest="lam", help="plain lambda (always unclassified)")
    p.add_argument("--precision", type=float, default=1e-14)

    p = sub.add_parser("render", help="write an SVG of the orbital set")
    _add_common(p)
    _add_system(p)
    p.add_argument("--m", type=int, default=9, help="resolution delta = 2^-m")
    p.add_argument("--level", type=int, help="render only the level-k slice")
    p.add_argument("--out", required=True)

    p = sub.add_parser("boxdim", help="box counts and a dimension estimate")
    _add_common(p)
    _add_system(p)
    p.add_argument("--m", type=_range, default=(6, 15), help="mesh exponents lo:hi")
    p.add_argument("--window", type=_range, help="regression window lo:hi")
    p.add_argument("--delta-matching", action="store_true", help="regenerate the set at every scale")
    p.add_argument("--csv")

    p = sub.add_parser("bounds", help="max-min dimension bound and closed forms")
    _add_common(p)
    for name in ("s", "alpha", "beta", "gamma"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--json", dest="json_out")

    p = sub.add_parser("separation", help="gaps and well-separated counts of sum sets")
    _add_common(p)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--lambda-poly")
    p.add_argument("--n", type=_range, default=(1, 16))
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--csv")

    for name, helptext in (("overlaps", "exact overlaps of composed maps"), ("wsp", "weak-separation margins")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        _add_system(p)
        p.add_argument("--max-len", type=int, default=6)
        p.add_argument("--mode", choices=["exact", "float"])
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--json" if name == "overlaps" else "--csv", dest="out")

    p = sub.add_parser("sphere", help="rotation orbit counts and the sphere attractor")
    _add_common(p)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--commuting", action="store_true", help="use two rotations about one axis")
    p.add_argument("--c", type=float, help="also build the attractor with this scale")
    p.add_argument("--attractor-m", type=int, default=7)
    p.add_argument("--csv")

    p = sub.add_parser("scan", help="seeded scan of random lambda")
    _add_common(p)
    p.add_argument("--interval", type=_frange, default=(0.5, 0.668))
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--n-min", type=int, default=6)
    p.add_argument("--n-max", type=int, default=14)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--boxdim-samples", type=int, default=0)
    p.add_argument("--csv")
    return parser


# ---------------------------------------------------------------- helpers


def _check_writable(*paths):
    for path in paths:
        if not path:
            continue
        folder = os.path.dirname(os.path.abspath(path)) or "."
        if not os.path.isdir(folder) or not os.access(folder, os.W_OK):
            raise DomainError(f"output path {path!r} is not writable")


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _lambda_arg(args):
    """Lambda from --lambda-poly (exact), a fraction (exact) or a decimal (float)."""
    from .algebraic import AlgebraicNumber, IntPolynomial

    poly = getattr(args, "lambda_poly", None)
    if poly:
        return AlgebraicNumber.largest_real(IntPolynomial.parse(poly))
    lam = getattr(args, "lam", None)
    if lam is None:
        return None
    if "/" in lam:
        return Fraction(lam)
    return float(lam)


def _system(args):
    from .ifs import load_config, preset, system_from_config

    if args.config:
        cfg = load_config(args.config)
        if "preset" in cfg or "maps" in cfg:
            return system_from_config(cfg)
    if not args.preset:
        raise DomainError("give --preset or --config")
    params = {}
    lam = _lambda_arg(args)
    if lam is not None:
        params["lam"] = lam
    if args.epsilon is not None:
        params["epsilon"] = Fraction(args.epsilon) if "/" in args.epsilon else float(args.epsilon)
    if args.c is not None:
        params["c"] = args.c
    return preset(args.preset, **params)


def _float_warning(system, mode):
    if mode == "float":
        print("warning: float mode; near-coincident maps may be misclassified", file=sys.stderr)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------- commands


def cmd_classify(args):
    from .algebraic import AlgebraicNumber, IntPolynomial, classify_lambda

    if args.poly:
        theta = AlgebraicNumber.largest_real(IntPolynomial.parse(args.poly), precision=args.precision)
        lam = theta.reciprocal()
        subject = theta
    elif args.lam:
        lam = float(Fraction(args.lam))
        subject = lam
    else:
        raise DomainError("give --poly or --lambda")
    if args.dry_run:
        print(f"plan: classify lambda={lam:.5f}")
        return
    print(f"{classify_lambda(subject).value} lambda≈{lam:.5f}")


def cmd_render(args):
    from .ifs import level_slice, orbital_cloud
    from .render import render_svg

    system = _system(args)
    _check_writable(args.out)
    delta = 2.0**-args.m
    what = f"level {args.level}" if args.level is not None else "orbital set"
    if args.dry_run:
        print(f"plan: render {what} of {system.name} at delta=2^-{args.m} -> {args.out}")
        return
    if args.level is not None:
        cloud = level_slice(system, args.level, delta)
    else:
        cloud = orbital_cloud(system, delta)
    _write(args.out, render_svg(cloud, system.bounding_box(), title=f"{system.name} {what}"))
    print(f"points={len(cloud)} svg={args.out}")


def cmd_boxdim(args):
    from .boxcount import count_curve, default_window, estimate_dimension, CountCurve

    system = _system(args)
    _check_writable(args.csv)
    lo, hi = args.m
    if args.dry_run:
        win = args.window or (default_window(CountCurve({m: 1 for m in range(lo, hi + 1)})))
        gen = "every scale" if args.delta_matching else f"delta=2^-{hi}"
        print(f"plan: boxdim {system.name} m={lo}:{hi} window={win[0]}:{win[1]} generation at {gen}")
        return
    curve = count_curve(system, range(lo, hi + 1), args.delta_matching, threads=args.threads)
    est = estimate_dimension(curve, args.window)
    if args.csv:
        curve.to_csv(args.csv)
    flag = " truncated" if curve.truncated else ""
    print(f"dim_est≈{est.slope:.4f} window={est.window[0]}:{est.window[1]} residual_max={est.residual_max:.3g}{flag}")


def cmd_bounds(args):
    from .bounds import BoundInputs, bound_report_json, thm1_bound

    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    vals = {}
    for name in ("s", "alpha", "beta", "gamma", "d"):
        v = getattr(args, name)
        vals[name] = v if v is not None else cfg.get(name)
        if vals[name] is None:
            raise DomainError(f"missing --{name}")
    inp = BoundInputs(vals["s"], vals["alpha"], vals["beta"], vals["gamma"], int(vals["d"]))
    _check_writable(args.json_out)
    if args.dry_run:
        print(f"plan: bounds for {inp}")
        return
    res = thm1_bound(inp)
    if args.json_out:
        _write(args.json_out, bound_report_json(inp) + "\n")
    print(f"thm1_bound={_fmt(res.value)} x*={_fmt(res.argmax_x)}")


def cmd_separation(args):
    from .separation import gap_report, separation_table

    lam = _lambda_arg(args)
    if lam is None:
        raise DomainError("give --lambda or --lambda-poly")
    _check_writable(args.csv)
    lo, hi = args.n
    if args.dry_run:
        print(f"plan: separation n={lo}:{hi} kappa={args.kappa}")
        return
    text = separation_table(lam, range(lo, hi + 1), args.kappa)
    if args.csv:
        _write(args.csv, text)
    reports = [gap_report(lam, n) for n in range(lo, hi + 1)]
    worst = min(reports, key=lambda r: r.scaled_gap)
    print(f"min_scaled_gap={_fmt(worst.scaled_gap)} at n={worst.n} collision={'yes' if worst.collision else 'no'}")


def _mode(args, system):
    mode = args.mode or ("exact" if system.is_exact else "float")
    _float_warning(system, mode)
    return mode


def cmd_overlaps(args):
    from .overlap import exact_overlaps

    system = _system(args)
    _check_writable(args.out)
    mode = _mode(args, system)
    if args.dry_run:
        print(f"plan: overlaps of {system.name} up to length {args.max_len} in {mode} mode")
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pairs = exact_overlaps(system, args.max_len, mode, args.tol)
    if args.out:
        doc = {"mode": mode, "tolerance": args.tol if mode == "float" else 0,
               "pairs": [[list(p.word_a), list(p.word_b)] for p in pairs]}
        _write(args.out, json.dumps(doc, indent=2) + "\n")
    shown = " ".join(f"{''.join(map(str, p.word_a))}~{''.join(map(str, p.word_b))}" for p in pairs[:5])
    print(f"overlap_pairs={len(pairs)} {shown}".rstrip())


def cmd_wsp(args):
    from .overlap import wsp_margin

    system = _system(args)
    _check_writable(args.out)
    mode = _mode(args, system)
    if args.dry_run:
        print(f"plan: wsp margin of {system.name} up to length {args.max_len} in {mode} mode")
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        margin = wsp_margin(system, args.max_len, mode, args.tol)
    if args.out:
        _write(args.out, margin.to_csv())
    overall = "none" if margin.overall is None else _fmt(margin.overall)
    print(f"wsp_min={overall} lengths={len(margin.per_length)}")


def cmd_sphere(args):
    from .ifs import load_config
    from .sphere import commuting_generators, default_generators, orbit_counts, sg_attractor

    rot, x = (commuting_generators() if args.commuting else default_generators()), None
    if args.config:
        from .ifs import preset

        cfg = load_config(args.config)
        params = cfg.get("preset", {}).get("params", cfg)
        sysd = preset("sphere", **{k: v for k, v in params.items() if k in ("generators", "x", "c", "include_inverses")})
        from .sphere import RotationSet

        # recover the generator set from the alphabet the preset built
        rot = RotationSet(tuple(s.orthogonal for s in sysd.maps), include_inverses=False)
        x = sysd.condensation.data[0]
    _check_writable(args.csv)
    if args.dry_run:
        extra = f", attractor c={args.c} m=1:{args.attractor_m}" if args.c else ""
        print(f"plan: orbit counts n=0:{args.n_max} at m={args.m}{extra}")
        return
    oc = orbit_counts(rot, x, args.n_max, args.m)
    if args.csv:
        _write(args.csv, oc.to_csv())
    print(f"epsilon_hat={oc.epsilon_hat:.4f} counts={','.join(str(c) for c in oc.counts.values())}")
    if args.c:
        res = sg_attractor(args.c, rot, x, args.attractor_m, eps_hat=oc.epsilon_hat)
        print(f"sg_dim_est≈{res.estimate.slope:.4f} target={res.target:.4f}")


def cmd_scan(args):
    from .separation import DEFAULT_SEED, monte_carlo_scan

    _check_writable(args.csv)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    if args.dry_run:
        print(f"plan: scan {args.samples} samples in {args.interval} n={args.n_min}:{args.n_max} seed={seed}")
        return
    rep = monte_carlo_scan(args.interval, args.samples, args.n_max, seed, n_min=args.n_min, kappa=args.kappa,
                           boxdim_samples=args.boxdim_samples)
    if args.csv:
        _write(args.csv, rep.to_csv())
    print(f"passing={rep.n_passing}/{len(rep.rows)}")


COMMANDS = {
    "classify": cmd_classify,
    "render": cmd_render,
    "boxdim": cmd_boxdim,
    "bounds": cmd_bounds,
    "separation": cmd_separation,
    "overlaps": cmd_overlaps,
    "wsp": cmd_wsp,
    "sphere": cmd_sphere,
    "scan": cmd_scan,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr, end="")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.threads is not None:
        os.environ["FRACLAB_THREADS"] = str(args.threads)
    try:
        COMMANDS[args.command](args)
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, FraclabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
