"""Command-line front end.

Subcommands: ``exact``, ``simulate``, ``sweep``, ``histogram``, ``verify``.
Prevalence is given as exactly one of ``--q``, ``--p`` or ``--a/--beta``.
``--config FILE`` reads flat ``key = value`` lines (keys are option names
without dashes); command-line flags take precedence over the file.

Exit codes: 0 success, 1 invalid arguments, 2 computation/resource/I-O
error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import __version__
from .asymptotics import RegimeSpec, convergence_table
from .exact import (
    MAX_PMF_N,
    mean_closed_form_pow2,
    pmf_exact,
    variance_closed_form_pow2,
    variance_exact,
)
from .montecarlo import SimConfig, histogram_T_over_logN, simulate
from .scheme import Variant
from .verification import run_all

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_VERIFY = 0, 1, 2, 3

SWEEP_FIELDS = (
    "n", "N", "p", "mean_exact", "mean_pred", "mean_ratio", "prop1a_residual",
    "var_exact", "var_pred", "var_ratio",
)
PREVALENCE_KEYS = ("q", "p", "a", "beta")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """17 significant digits so CSV/JSON text round-trips to the same float."""
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_prevalence(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("prevalence (exactly one form)")
    g.add_argument("--q", type=float, help="probability an item is clean")
    g.add_argument("--p", type=float, help="probability an item is contaminated")
    g.add_argument("--a", type=float, help="regime p = a * N**-beta")
    g.add_argument("--beta", type=float, help="regime exponent (with --a)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bsgt", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"bsgt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ex = sub.add_parser("exact", help="exact mean/variance (and PMF) of T(N)")
    ex.add_argument("--N", type=int, required=False)
    _add_prevalence(ex)
    ex.add_argument("--pmf", action="store_true", help=f"also print the PMF (N <= {MAX_PMF_N})")
    ex.add_argument("--pow2-closed-form", action="store_true", help="compare with closed forms when N = 2**n")

    sim = sub.add_parser("simulate", help="Monte Carlo estimate of E[T(N)] and Var[T(N)]")
    sim.add_argument("--N", type=int)
    _add_prevalence(sim)
    sim.add_argument("--reps", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--sampler", choices=("auto", "dense", "sparse"), default="auto")

    sw = sub.add_parser("sweep", help="exact vs predicted moments along N = 2**n")
    sw.add_argument("--a", type=float)
    sw.add_argument("--beta", type=float)
    sw.add_argument("--n-min", type=int)
    sw.add_argument("--n-max", type=int)
    sw.add_argument("--outputs", default="mean,variance", help="comma list from mean,variance,pmf")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--delta", type=float, default=0.1)
    sw.add_argument("--out", help="output path (default: stdout)")

    hi = sub.add_parser("histogram", help="exploratory histogram of T(N)/ln N at p = a/N")
    hi.add_argument("--a", type=float)
    hi.add_argument("--N", type=int)
    hi.add_argument("--reps", type=int, default=100_000)
    hi.add_argument("--seed", type=int, default=0)
    hi.add_argument("--bins", type=int, default=40)
    hi.add_argument("--workers", type=int, default=1)
    hi.add_argument("--out", help="write bin edges and counts as CSV")

    ve = sub.add_parser("verify", help="run the oracle / identity self-checks")
    ve.add_argument("--max-oracle-n", type=int, default=12)
    ve.add_argument("--closed-form-variant", choices=[v.value for v in Variant], default=Variant.PAPER_LAZY.value,
                    help="scheme the closed-form mean is checked against (naive = negative control)")

    for p in sub.choices.values():
        p.add_argument("--config", help="flat key = value file merged under the flags")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    known = {a.dest: a for a in sub._actions}  # noqa: SLF001
    cli_prevalence = any(getattr(args, k, None) is not None for k in PREVALENCE_KEYS if k in known)
    defaults = {}
    for key, raw in values.items():
        if key not in known or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if cli_prevalence and key in PREVALENCE_KEYS:
            continue
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):  # noqa: SLF001
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = action.type(raw) if action.type else raw
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _prevalence(args, N: int | None) -> tuple[float, str]:
    """Resolve (p, description) from the one prevalence form given."""
    forms = [k for k in ("q", "p") if getattr(args, k, None) is not None]
    regime = args.a is not None or args.beta is not None
    if len(forms) + regime != 1:
        raise UsageError("give exactly one of --q, --p, or --a with --beta")
    if regime:
        if args.a is None or args.beta is None:
            raise UsageError("--a and --beta go together")
        try:
            spec = RegimeSpec(args.a, args.beta)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        p, clamped = spec.prevalence(N)
        return p, f"a={args.a!r} beta={args.beta!r}" + (" (clamped to p=1)" if clamped else "")
    if forms == ["q"]:
        if not 0 <= args.q <= 1:
            raise UsageError("--q must lie in [0, 1]")
        return 1.0 - args.q, f"q={args.q!r}"
    if not 0 <= args.p <= 1:
        raise UsageError("--p must lie in [0, 1]")
    return args.p, f"p={args.p!r}"


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


def cmd_exact(args, out) -> int:
    _need(args, "N")
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    p, desc = _prevalence(args, args.N)
    s = variance_exact(args.N, p=p)
    print(f"N = {args.N}", file=out)
    print(f"prevalence: {desc} (p = {fmt(p)})", file=out)
    print(f"mean = {fmt(s.mean)}", file=out)
    print(f"second_moment = {fmt(s.second_moment)}", file=out)
    print(f"variance = {fmt(s.variance)}", file=out)
    if args.pow2_closed_form:
        n = args.N.bit_length() - 1
        if 2**n != args.N:
            print("closed form: N is not a power of two, skipped", file=out)
        else:
            cf_mean = mean_closed_form_pow2(n, p=p)
            cf_var = variance_closed_form_pow2(n, p=p).variance
            print(f"closed_form_mean = {fmt(cf_mean)}  diff = {fmt(cf_mean - s.mean)}", file=out)
            print(f"closed_form_variance = {fmt(cf_var)}  diff = {fmt(cf_var - s.variance)}", file=out)
    if args.pmf:
        pmf = pmf_exact(args.N, p=p)
        print("t,probability", file=out)
        for t in sorted(pmf.probabilities):
            print(f"{t},{fmt(pmf.probabilities[t])}", file=out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    _need(args, "N")
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    p, desc = _prevalence(args, args.N)
    try:
        cfg = SimConfig(N=args.N, q=1.0 - p, reps=args.reps, seed=args.seed, workers=args.workers,
                        sampler=args.sampler)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    est = simulate(cfg)
    exact = variance_exact(args.N, p=p)
    print(f"N = {args.N}", file=out)
    print(f"prevalence: {desc} (p = {fmt(p)})", file=out)
    print(f"reps = {est.reps}  seed = {args.seed}  sampler = {cfg.resolved_sampler()}", file=out)
    print(f"mean = {fmt(est.mean)}", file=out)
    print(f"variance = {fmt(est.variance)}", file=out)
    print(f"std_error = {fmt(est.std_error)}", file=out)
    print(f"ci95 = [{fmt(est.ci95[0])}, {fmt(est.ci95[1])}]", file=out)
    print(f"exact_mean = {fmt(exact.mean)}", file=out)
    print(f"exact_variance = {fmt(exact.variance)}", file=out)
    print(f"z = {fmt(est.z_score(exact.mean))}", file=out)
    return EXIT_OK


def sweep_rows(spec: RegimeSpec, n_range: range, outputs: set[str], delta: float = 0.1) -> list[dict]:
    rows = []
    for r in convergence_table(spec, n_range, delta):
        row = {
            "n": r.n, "N": r.N, "p": r.p,
            "mean_exact": None, "mean_pred": None, "mean_ratio": None, "prop1a_residual": None,
            "var_exact": None, "var_pred": None, "var_ratio": None,
        }
        if "mean" in outputs:
            row.update(mean_exact=r.mean.exact_value, mean_pred=r.mean.predicted, mean_ratio=r.mean.ratio,
                       prop1a_residual=r.mean_residual)
        if "variance" in outputs and r.variance is not None:
            row.update(var_exact=r.variance.exact_value, var_pred=r.variance.predicted, var_ratio=r.variance.ratio)
        rows.append(row)
    return rows


def cmd_sweep(args, out) -> int:
    _need(args, "a", "beta", "n_min", "n_max")
    outputs = {s.strip() for s in args.outputs.split(",") if s.strip()}
    if not outputs or not outputs <= {"mean", "variance", "pmf"}:
        raise UsageError("--outputs must be a nonempty subset of mean,variance,pmf")
    if args.n_min > args.n_max:
        raise UsageError("empty exponent range")
    if args.n_min < 1 or args.n_max > 50:
        raise UsageError("exponents must lie in [1, 50]")
    try:
        spec = RegimeSpec(args.a, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    n_range = range(args.n_min, args.n_max + 1)
    rows = sweep_rows(spec, n_range, outputs, args.delta)

    target = open(args.out, "w", encoding="utf-8", newline="") if args.out else out
    try:
        if args.format == "csv":
            w = csv.writer(target, lineterminator="\n")
            w.writerow(SWEEP_FIELDS)
            for row in rows:
                w.writerow([fmt(row[k]) for k in SWEEP_FIELDS])
        else:
            doc = {
                "meta": {"regime": {"a": spec.a, "beta": spec.beta}, "seed": None, "version": __version__,
                         "delta": args.delta},
                "rows": rows,
            }
            json.dump(doc, target, indent=1)
            target.write("\n")
    finally:
        if args.out:
            target.close()

    if "pmf" in outputs:
        if not args.out:
            raise UsageError("pmf output needs --out")
        pmf_path = Path(args.out).with_suffix(".pmf.csv")
        with open(pmf_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("n", "N", "t", "probability"))
            for row in rows:
                if row["N"] > MAX_PMF_N:
                    continue
                pmf = pmf_exact(row["N"], p=row["p"])
                for t in sorted(pmf.probabilities):
                    w.writerow((row["n"], row["N"], t, fmt(pmf.probabilities[t])))
    return EXIT_OK


def cmd_histogram(args, out) -> int:
    _need(args, "a", "N")
    if args.a <= 0 or args.N < 2 or args.reps < 1 or args.bins < 1:
        raise UsageError("need a > 0, N >= 2, reps >= 1, bins >= 1")
    h = histogram_T_over_logN(args.a, args.N, args.reps, seed=args.seed, bins=args.bins, workers=args.workers)
    print(f"N = {h.N}  p = {fmt(h.p)}  reps = {h.reps}  seed = {args.seed}", file=out)
    print(f"mean(T/ln N) = {fmt(h.sample_mean)}  reference 1.5/ln 2 = {fmt(1.5 / math.log(2))}", file=out)
    print(f"min(T/ln N) = {fmt(h.min_value)}", file=out)
    rows = [(fmt(lo), fmt(hi_), int(c)) for lo, hi_, c in zip(h.edges[:-1], h.edges[1:], h.counts)]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("lower", "upper", "count"))
            w.writerows(rows)
    else:
        print("lower,upper,count", file=out)
        for r in rows:
            print(",".join(map(str, r)), file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if args.max_oracle_n < 1 or args.max_oracle_n > 20:
        raise UsageError("--max-oracle-n must lie in [1, 20]")
    results = run_all(args.max_oracle_n, Variant(args.closed_form_variant))
    for r in results:
        print(r.line(), file=out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: " + "; ".join(failed), file=out)
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed", file=out)
    return EXIT_OK


COMMANDS = {
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "histogram": cmd_histogram,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse: --help, --version, bad flags
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"bsgt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bsgt: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"bsgt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bsgt: I/O error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ArithmeticError, ValueError) as exc:
        print(f"bsgt: computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
