"""pimring command-line entry point."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from .bench.scenario import PLATFORM_NAMES, PRESET_NAMES, Scenario
from .bench.selfcheck import verify
from .bench.sweep import SweepAxis, run_sweep, write_csv, write_svg
from .errors import (
    CapacityError,
    ConfigError,
    DomainError,
    PlanningError,
    PrimeExhaustionError,
)
from .pim.model import KernelKind
from .pim.planner import Strategy
from .ring.modarith import is_power_of_two
from .ring.ntt import Threading
from .ring.rns import base_to_config, build_base, default_coefficient_bits

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

DPUS_PER_RANK = 64


def _setup_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _power_of_two(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from e
    if not is_power_of_two(value) or value < 2:
        raise argparse.ArgumentTypeError(f"{value} is not a power of two")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list") from e


def _phases(text: str) -> tuple[KernelKind, ...]:
    try:
        return tuple(KernelKind.parse_phases(text))
    except DomainError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _bits_for(args: argparse.Namespace) -> int:
    return args.bits if args.bits is not None else default_coefficient_bits(args.n)


def cmd_params(args: argparse.Namespace) -> int:
    """Print the RNS base, Barrett factors and roots for (n, bits)."""
    bits = _bits_for(args)
    base = build_base(args.n, bits)
    text = base_to_config(base, args.n, bits)
    print(f"n={args.n}, {bits}-bit coefficients -> {base}")
    print(text, end="")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        logger.info(f"Wrote base config to {args.output}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the randomized correctness suites."""
    if args.trials < 0:
        raise DomainError("trials cannot be negative")
    report = verify(
        args.n, _bits_for(args), args.trials, seed=args.seed, corrupt_twiddles=args.corrupt_twiddles
    )
    for result in report.results:
        status = "PASS" if result.passed else "FAIL"
        line = f"[{status}] {result.name} ({result.trials} trial(s))"
        if not result.passed:
            line += f": {result.detail}; reproduce with --seed {result.failing_seed} --trials 1"
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_sweep(args: argparse.Namespace) -> int:
    """Simulate a sweep and write CSV (and optionally SVG)."""
    dpus = args.dpus
    if dpus is None and args.ranks is not None:
        dpus = args.ranks * DPUS_PER_RANK
    template = Scenario(
        n=args.n,
        bits=args.bits,
        num_ciphertexts=args.ciphertexts,
        phases=args.phases,
        config_path=args.config,
        preset=args.preset,
        platform=args.platform,
        strategy=Strategy.from_name(args.strategy),
        dpus=dpus,
        threading=Threading.from_name(args.threading),
    )
    template.load_config()
    axis = SweepAxis.from_name(args.axis)
    results = asyncio.run(run_sweep(template, axis, args.values))
    if args.csv:
        write_csv(results, args.csv)
    else:
        write_csv(results, sys.stdout)
    if args.svg:
        write_svg(results, args.svg)
    if results and not any(r.ok for r in results):
        logger.error("Every sweep point is infeasible")
        return EXIT_INFEASIBLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pimring",
        description="RNS/NTT ring arithmetic and a UPMEM PIM cost-model simulator",
    )
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="Log debug detail")
    noise.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    def ring_args(p: argparse.ArgumentParser, default_n: int) -> None:
        p.add_argument("--n", type=_power_of_two, default=default_n, help="Polynomial length")
        p.add_argument("--bits", type=int, help="Coefficient modulus bits (default per n)")

    params = sub.add_parser("params", help="Generate the RNS base and precomputed values")
    ring_args(params, 4096)
    params.add_argument("--output", help="Also write the base config to this file")
    params.add_argument(
        "--seed", type=int, default=0, help="Accepted for symmetry; the base is deterministic"
    )
    params.set_defaults(handler=cmd_params)

    check = sub.add_parser("verify", help="Run randomized correctness suites")
    ring_args(check, 1024)
    check.add_argument("--trials", type=int, default=10, help="Trials per suite")
    check.add_argument("--seed", type=int, default=0, help="First random seed")
    check.add_argument(
        "--corrupt-twiddles",
        action="store_true",
        help="Break one twiddle factor on purpose (the suites must fail)",
    )
    check.set_defaults(handler=cmd_verify)

    sweep = sub.add_parser("sweep", help="Simulate a parameter sweep")
    ring_args(sweep, 2048)
    sweep.add_argument(
        "--axis", choices=[a.value for a in SweepAxis], default=SweepAxis.CIPHERTEXTS.value
    )
    sweep.add_argument("--values", type=_int_list, help="Comma-separated sweep points")
    sweep.add_argument("--ciphertexts", type=int, default=1, help="Ciphertexts per point")
    sweep.add_argument("--dpus", type=int, help="Usable DPUs")
    sweep.add_argument("--ranks", type=int, help="Whole ranks of 64 DPUs (if --dpus is not given)")
    sweep.add_argument(
        "--strategy", choices=[s.value for s in Strategy], default=Strategy.AUTO.value
    )
    sweep.add_argument("--preset", choices=PRESET_NAMES, default="default")
    sweep.add_argument(
        "--platform",
        choices=PLATFORM_NAMES,
        default="upmem",
        help="Host link model: upmem (runtime copies) or direct (host writes DPU memory)",
    )
    sweep.add_argument(
        "--phases",
        type=_phases,
        default=(KernelKind.NTT,),
        help="Comma-separated kernels: ntt, intt, pmul, padd, bgv",
    )
    sweep.add_argument(
        "--threading", choices=[t.value for t in Threading], default=Threading.COARSE_GRAINED.value
    )
    sweep.add_argument("--seed", type=int, default=0, help="Accepted for symmetry; sweeps are deterministic")
    sweep.add_argument("--csv", help="Write CSV here instead of stdout")
    sweep.add_argument("--svg", help="Also draw an SVG chart (needs matplotlib)")
    sweep.add_argument("--config", help="key=value DPU/cost/platform config file")
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose, args.quiet)
    try:
        return args.handler(args)
    except (PlanningError, CapacityError) as e:
        logger.error(str(e))
        return EXIT_INFEASIBLE
    except (ConfigError, DomainError, PrimeExhaustionError) as e:
        logger.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
