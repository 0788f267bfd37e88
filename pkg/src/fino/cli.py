"""
Command-line entry point.

    fino run    [--scenario FILE] [--seed S] [--scheme ...] [--n N] [--f F] [--gst T] [--delta D]
    fino bench  [--k K] [--n N] [--iters M] [--group-bits B]
    fino sweep  [--seeds A..B] [--adversaries LIST] [--n N] [--self-test]

Exit codes: 0 pass, 1 a violation (or failed benchmark check), 2 usage or
configuration error. FINO_SEED sets the default seed.
"""

from __future__ import annotations

import argparse
import os
import random
import sys

from .errors import ConfigInvalid
from .group import SchnorrGroup
from .sim import KINDS, Config, random_adversary, run
from .sim import scenario as scenario_mod
from .sim.adversary import Adversary
from .sim.config import SCHEMES
from .sim.monitors import FAULTS
from .sim.sweep import run_case, sweep

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _env_seed() -> int | None:
    raw = os.environ.get("FINO_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigInvalid(f"FINO_SEED must be an integer, got {raw!r}") from None


def parse_seed_range(text: str) -> range:
    """``A..B`` is the half-open range [A, B); a single number is one seed."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return range(int(lo), int(hi))
        seed = int(text)
        return range(seed, seed + 1)
    except ValueError:
        raise ConfigInvalid(f"bad seed range {text!r}; expected A..B") from None


def _emit(args, text_fn, json_fn, csv_fn) -> None:
    if args.json:
        out = json_fn()
    elif args.csv:
        out = csv_fn()
    else:
        out = text_fn()
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out if out.endswith("\n") else out + "\n")
    else:
        print(out)


# -- run ------------------------------------------------------------------------

def cmd_run(args) -> int:
    if args.scenario:
        config, adversary = scenario_mod.load(args.scenario)
        seed_given = "seed" in scenario_mod.parse_lines(open(args.scenario, encoding="utf-8").read())
    else:
        config, adversary, seed_given = Config(), Adversary(), False
    seed = args.seed
    if seed is None and not seed_given:
        seed = _env_seed()
    config = scenario_mod.with_overrides(
        config, seed=seed, scheme=args.scheme, n=args.n, f=args.f, gst=args.gst, delta=args.delta,
        tx_load=args.tx_load,
    )
    if args.adversary is not None:
        rng = random.Random(f"fino-cli/{config.seed}/{args.adversary}")
        adversary = random_adversary(args.adversary, config.resolved(), rng)
    report = run(config, adversary, fault=args.fault)
    _emit(args, report.to_table, lambda: report.to_json(indent=2), report.to_csv)
    if not report.passed:
        names = ", ".join(k for k, v in sorted(report.violations.items()) if v)
        print(f"violation: {names}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# -- bench ----------------------------------------------------------------------

def cmd_bench(args) -> int:
    from .bench import SCHEMES as BENCH_SCHEMES, run_bench

    if not 1 <= args.k <= args.n:
        raise ConfigInvalid(f"need 1 <= k <= n, got k={args.k}, n={args.n}")
    if args.iters < 1:
        raise ConfigInvalid("iterations must be positive")
    schemes = BENCH_SCHEMES if args.schemes is None else tuple(s.strip() for s in args.schemes.split(","))
    unknown = [s for s in schemes if s not in BENCH_SCHEMES]
    if unknown:
        raise ConfigInvalid(f"unknown bench schemes {unknown}; choose from {BENCH_SCHEMES}")
    try:
        group = SchnorrGroup.with_bits(args.group_bits)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    report = run_bench(args.k, args.n, args.iters, group, schemes=schemes, seed=args.seed or 0)
    _emit(args, report.to_table, lambda: report.to_json(indent=2), report.to_csv)
    if set(schemes) == set(BENCH_SCHEMES) and not report.passed:
        print("benchmark ratio check failed", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# -- sweep ----------------------------------------------------------------------

def _self_test(args) -> int:
    """Inject each monitor fault into a clean run and report what the monitors saw."""
    fired = []
    for fault in FAULTS:
        report, _ = run_case(0, "none", n=args.n, fault=fault)
        ok = report.violations.get(fault, False)
        fired.append(ok)
        print(f"injected {fault:<11} -> {'reported' if ok else 'NOT reported'}")
    if not all(fired):
        print("monitor self-test failed: an injected violation went unreported", file=sys.stderr)
        return EXIT_VIOLATION
    print("monitor self-test: every injected violation was reported")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.self_test:
        return _self_test(args)
    if args.seeds is None:
        start = _env_seed() or 0
        seeds = range(start, start + 100)
    else:
        seeds = parse_seed_range(args.seeds)
    kinds = KINDS if args.adversaries is None else tuple(k.strip() for k in args.adversaries.split(","))
    unknown = [k for k in kinds if k not in KINDS]
    if unknown:
        raise ConfigInvalid(f"unknown adversaries {unknown}; choose from {KINDS}")
    if len(seeds) == 0:
        print("warning: empty seed range, nothing to run", file=sys.stderr)
    Config(n=args.n, f=(args.n - 1) // 3 if args.f is None else args.f).validate()

    def progress(s):
        if args.verbose:
            print(f"seed={s.seed} kind={s.kind} n={s.n} scheme={s.scheme} {'ok' if s.ok else 'FAIL'}")

    result = sweep(seeds, kinds, n=args.n, f=args.f, cycle=args.cycle, progress=progress)

    def table():
        lines = [f"{'adversary':<20} {'runs':>6} {'failed':>7}"]
        for kind, (runs, failed) in result.by_kind().items():
            lines.append(f"{kind:<20} {runs:>6} {failed:>7}")
        lines.append(f"total {result.total} runs, {len(result.failures)} failed")
        lines.append("PASS" if result.passed else "FAIL")
        return "\n".join(lines)

    def as_json():
        import json
        return json.dumps({
            "runs": result.total,
            "failed": len(result.failures),
            "by_kind": {k: {"runs": r, "failed": f} for k, (r, f) in result.by_kind().items()},
            "failures": [vars(r) for r in result.failures],
            "passed": result.passed,
        }, sort_keys=True, indent=2)

    def as_csv():
        rows = ["seed,kind,n,scheme,passed,identical_outcomes,violations"]
        rows += [f"{r.seed},{r.kind},{r.n},{r.scheme},{r.passed},{r.identical_outcomes},{'|'.join(r.violations)}"
                 for r in result.runs]
        return "\n".join(rows)

    _emit(args, table, as_json, as_csv)
    if not result.passed:
        first = result.failures[0]
        print(f"first failure: seed={first.seed} adversary={first.kind} n={first.n} "
              f"violations={','.join(first.violations) or 'divergent outcomes'}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def _add_output(p: argparse.ArgumentParser) -> None:
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="emit JSON")
    fmt.add_argument("--csv", action="store_true", help="emit CSV")
    p.add_argument("--out", help="write the report to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fino", description="Blind-ordering BFT simulator and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("--scenario", help="key = value scenario file")
    p.add_argument("--seed", type=int)
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--n", type=int)
    p.add_argument("--f", type=int)
    p.add_argument("--gst", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--tx-load", type=int)
    p.add_argument("--adversary", choices=KINDS, help="seeded random instance of this adversary kind")
    p.add_argument("--fault", choices=FAULTS, help="inject a monitor fault (self-test)")
    _add_output(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="per-phase microbenchmarks of the commit-reveal schemes")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--group-bits", type=int, default=2048)
    p.add_argument("--schemes", help="comma-separated subset of Threshold,AvidM,HybridOptimistic,HybridPessimistic")
    p.add_argument("--seed", type=int)
    _add_output(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="many seeded adversarial runs")
    p.add_argument("--seeds", help="half-open seed range A..B (default FINO_SEED..FINO_SEED+100)")
    p.add_argument("--adversaries", help=f"comma-separated kinds from {','.join(KINDS)}")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--f", type=int)
    p.add_argument("--cycle", action="store_true", help="one adversary kind per seed, in rotation")
    p.add_argument("--self-test", action="store_true", help="inject monitor faults and check they are reported")
    p.add_argument("-v", "--verbose", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigInvalid, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
