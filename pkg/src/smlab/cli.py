"""Command-line entry point (``smlab``).

Exit status: 0 on success, 1 when ``--assert`` sees a false verdict or
``verify`` finds a violation, 2 for usage and input errors, 3 when an
instance exceeds a search ceiling.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import reports
from .census import CensusMode, CensusState, advance, finalize, new_state
from .conditions import DEFAULT_NCC_CEILING, Condition, check, classify
from .core import Side
from .da import run_da
from .errors import InstanceTooLarge, ParseError, ProfileError, UnknownFixture
from .generators import FIXTURES, fixture_text, gen_extremal
from .profile_io import read_profile, render_profile
from .stability import enumerate_stable

EXIT_FALSE, EXIT_USAGE, EXIT_TOO_LARGE = 1, 2, 3


class UsageError(Exception):
    pass


def _cmd_check(args, out) -> int:
    profile = read_profile(args.file)
    if args.condition == "all":
        reps = [check(profile, c, args.ncc_max_n) for c in Condition]
        out.write(reports.dumps({r.condition.value: reports.condition_report_json(r) for r in reps}))
    else:
        reps = [check(profile, args.condition, args.ncc_max_n)]
        out.write(reports.dumps(reports.condition_report_json(reps[0])))
    if args.assert_ and not all(r.verdict for r in reps):
        return EXIT_FALSE
    return 0


def _cmd_da(args, out) -> int:
    outcome = run_da(read_profile(args.file), Side.parse(args.proposing))
    if args.text:
        out.write(reports.da_outcome_text(outcome, args.trace))
    else:
        out.write(reports.dumps(reports.da_outcome_json(outcome, args.trace)))
    return 0


def _cmd_stable(args, out) -> int:
    stable = enumerate_stable(read_profile(args.file), args.max_n)
    out.write(reports.dumps(reports.stable_set_json(stable)))
    return 0


def _cmd_classify(args, out) -> int:
    out.write(reports.dumps(reports.region_json(classify(read_profile(args.file), args.ncc_max_n))))
    return 0


def _census_state(args) -> CensusState:
    if args.resume:
        state = CensusState.load(args.resume)
        if args.n is not None and args.n != state.n:
            raise UsageError(f"--n {args.n} does not match the checkpoint (n={state.n})")
        return state
    if args.n is None:
        raise UsageError("census needs --n (or --resume)")
    if args.sample is not None:
        mode = CensusMode.sampled(args.sample, args.seed)
    elif args.exhaustive:
        mode = CensusMode.exhaustive()
    else:
        raise UsageError("choose --exhaustive or --sample K")
    return new_state(args.n, mode, ncc=args.ncc, stable=args.stable, allow_large=args.allow_large)


def _cmd_census(args, out) -> int:
    state = _census_state(args)
    advance(state, stop_after=args.stop_after, workers=args.workers, checkpoint=args.checkpoint)
    if not state.done:
        if not args.checkpoint:
            raise UsageError("--stop-after needs --checkpoint to be resumable")
        sys.stderr.write(f"stopped at {state.position} of {state.target}; resume with --resume {args.checkpoint}\n")
        return 0
    table = finalize(state)
    text = table.render_csv() if args.format == "csv" else table.render_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


def _cmd_verify(args, out) -> int:
    if args.sample is not None or args.n > 3:
        mode = CensusMode.sampled(args.sample or 10_000, args.seed)
    else:
        mode = CensusMode.exhaustive()
    state = new_state(args.n, mode, ncc=args.ncc)
    table = finalize(advance(state, workers=args.workers))
    width = max(map(len, table.theorem_flags))
    for name, flag in table.theorem_flags.items():
        status = "holds" if flag["status"] == "holds" else f"VIOLATED ({flag['violations']})"
        out.write(f"{name:<{width}}  {status:<12}  instances={flag['instances']}\n")
    out.write(f"{table.total} profiles, n={table.n}, {mode.kind}\n")
    return 0 if table.all_hold else EXIT_FALSE


def _cmd_gen(args, out) -> int:
    if args.family == "extremal":
        if args.n is None:
            raise UsageError("gen --family extremal needs --n")
        out.write(render_profile(gen_extremal(args.n), f"extremal family, n={args.n}"))
    else:
        if args.name is None:
            raise UsageError("gen --family fixture needs --name")
        out.write(fixture_text(args.name))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smlab", description="Deferred acceptance, unique-stable-matching conditions and profile census."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate one condition (or all) on a profile file")
    p.add_argument("file")
    p.add_argument("--condition", default="all", choices=[c.value for c in Condition] + ["all"])
    p.add_argument("--assert", dest="assert_", action="store_true", help="exit 1 if any verdict is false")
    p.add_argument("--ncc-max-n", type=int, default=DEFAULT_NCC_CEILING)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("da", help="run deferred acceptance")
    p.add_argument("file")
    p.add_argument("--proposing", choices=["men", "women"], default="men")
    p.add_argument("--trace", action="store_true")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (the default)")
    fmt.add_argument("--text", action="store_true", help="human-readable output")
    p.set_defaults(func=_cmd_da)

    p = sub.add_parser("stable", help="enumerate all stable matchings by brute force")
    p.add_argument("file")
    p.add_argument("--max-n", type=int, default=None)
    p.set_defaults(func=_cmd_stable)

    p = sub.add_parser("classify", help="region of the profile among the seven conditions")
    p.add_argument("file")
    p.add_argument("--ncc-max-n", type=int, default=DEFAULT_NCC_CEILING)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("census", help="classify a profile space and check the theorem list")
    p.add_argument("--n", type=int, help="market size")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="every profile (n <= 3 unless --allow-large)")
    mode.add_argument("--sample", type=int, metavar="K", help="K uniformly random profiles")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint file")
    p.add_argument("--checkpoint", metavar="PATH", help="write progress here after every block")
    p.add_argument("--stop-after", type=int, metavar="K", help="process at most K profiles, then stop")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--ncc", action=argparse.BooleanOptionalAction, default=None, help="NCC search (default: n <= 3)")
    p.add_argument(
        "--stable", action=argparse.BooleanOptionalAction, default=None,
        help="brute-force stable-set enumeration (default: n <= 6)",
    )
    p.add_argument("--allow-large", action="store_true", help="permit exhaustive runs above n=3")
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("verify", help="run the theorem suite; exit 1 on any violation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sample", type=int, metavar="K")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--ncc", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("gen", help="print a generated or shipped profile")
    p.add_argument("--family", choices=["extremal", "fixture"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--name", choices=FIXTURES)
    p.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except InstanceTooLarge as exc:
        sys.stderr.write(f"smlab: {exc}\n")
        return EXIT_TOO_LARGE
    except (ParseError, ProfileError, UnknownFixture, UsageError, OSError, ValueError) as exc:
        sys.stderr.write(f"smlab: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
