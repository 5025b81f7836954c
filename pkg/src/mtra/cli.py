"""Command-line surface.

Commands: run, check, compare, decompose, replay-paper.
Exit codes: 0 success / all-pass, 1 property failure or fixture
divergence, 2 input error, 3 guard violation (query too large for the
exact procedures).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, is_dataclass
from fractions import Fraction

from . import io, spaces
from .axioms import (
    PropertyReport,
    SdVerdict,
    check_decomposability,
    check_envy,
    check_ete,
    check_ex_post_efficiency,
    check_ordinal_fairness,
    check_sd_efficiency,
    check_strategyproofness,
    check_upper_invariance,
    sd_compare,
)
from .errors import GuardViolation, MtraError, ParseError
from .fixtures import REPLAY_CHECKS, fixture_names
from .mechanisms import MrpExact, MrpMonteCarlo, MrpSingle, mgd, mgd_decompose, mps, mrp
from .model import Instance

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_GUARD = 3

ASSIGNMENT_PROPERTIES = (
    "sd-efficiency",
    "ex-post-efficiency",
    "sd-envy-freeness",
    "weak-sd-envy-freeness",
    "equal-treatment-of-equals",
    "ordinal-fairness",
    "decomposability",
)
MECHANISM_PROPERTIES = (
    "sd-strategyproofness",
    "weak-sd-strategyproofness",
    "upper-invariance",
)


def _default_seed() -> int:
    raw = os.environ.get("MTRA_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"MTRA_SEED must be an integer, got {raw!r}") from None


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _load_instance(path: str) -> tuple[Instance, object]:
    return io.parse_instance(_read(path))


def _tiebreak_for(args, instance: Instance, file_tiebreak):
    flag = getattr(args, "tiebreak", None)
    if flag is None:
        return file_tiebreak
    if flag == "default":
        return None  # canonical bundle order, overriding any file tiebreak
    return io.parse_tiebreak(_read(flag), instance)


def cmd_run(args) -> int:
    instance, file_tb = _load_instance(args.instance)
    tiebreak = _tiebreak_for(args, instance, file_tb)
    seed = args.seed if args.seed is not None else _default_seed()
    meta = {
        "mechanism": args.mechanism,
        "mode": args.mode,
        "seed": seed,
        "tiebreak": "explicit" if tiebreak is not None else "canonical",
    }
    if args.mechanism == "mps":
        assignment, _ = mps(instance, tiebreak)
    elif args.mechanism == "mgd":
        assignment = mgd(instance, tiebreak)
    else:
        mode = _mrp_mode(args.mode, seed, instance)
        assignment = mrp(instance, mode, tiebreak).assignment
    sys.stdout.write(io.serialize_assignment(instance, assignment, meta))
    return EXIT_OK


def _mrp_mode(mode: str, seed: int, instance: Instance):
    if mode == "exact":
        return MrpExact()
    if mode == "sample":
        import random

        priority = list(range(instance.n))
        random.Random(seed).shuffle(priority)
        return MrpSingle(tuple(priority))
    if mode.startswith("mc:"):
        try:
            samples = int(mode.split(":", 1)[1])
        except ValueError:
            raise ParseError(f"bad monte-carlo mode {mode!r}") from None
        return MrpMonteCarlo(samples, seed)
    raise ParseError(f"unknown mode {mode!r}")


def _misreport_space(kind: str, seed: int):
    if kind == "linear":
        return spaces.LinearOrderMisreports()
    if kind == "cpnet":
        return spaces.CpNetMisreports()
    if kind == "independent":
        return spaces.IndependentCpNetMisreports()
    if kind.startswith("sampled:"):
        return spaces.SampledLinearOrderMisreports(int(kind.split(":", 1)[1]), seed)
    raise ParseError(f"unknown misreport space {kind!r}")


def cmd_check(args) -> int:
    instance, file_tb = _load_instance(args.instance)
    assignment = io.parse_assignment(_read(args.assignment), instance)
    wanted = (
        list(ASSIGNMENT_PROPERTIES)
        if args.property == "all"
        else [p.strip() for p in args.property.split(",") if p.strip()]
    )
    seed = args.seed if args.seed is not None else _default_seed()
    tiebreaks = [file_tb] if file_tb is not None else [None]
    reports: list[PropertyReport] = []
    for prop in wanted:
        if prop in MECHANISM_PROPERTIES:
            if not args.mechanism:
                raise ParseError(f"property {prop} needs --mechanism")
            space = _misreport_space(args.misreports, seed)
            if prop == "upper-invariance":
                reports.append(
                    check_upper_invariance(
                        args.mechanism,
                        instance,
                        spaces.CpNetTransforms()
                        if args.misreports in ("cpnet", "independent")
                        else spaces.DeletionTransforms(),
                        tiebreaks=tiebreaks,
                    )
                )
            else:
                strength = "sd" if prop == "sd-strategyproofness" else "weak"
                reports.append(
                    check_strategyproofness(
                        args.mechanism, instance, space, strength, tiebreaks=tiebreaks
                    )
                )
        elif prop == "sd-efficiency":
            reports.append(check_sd_efficiency(instance, assignment))
        elif prop == "ex-post-efficiency":
            reports.append(check_ex_post_efficiency(instance, assignment))
        elif prop == "sd-envy-freeness":
            reports.append(check_envy(instance, assignment, "strong"))
        elif prop == "weak-sd-envy-freeness":
            reports.append(check_envy(instance, assignment, "weak"))
        elif prop == "equal-treatment-of-equals":
            reports.append(check_ete(instance, assignment))
        elif prop == "ordinal-fairness":
            reports.append(check_ordinal_fairness(instance, assignment))
        elif prop == "decomposability":
            reports.append(check_decomposability(instance, assignment))
        else:
            raise ParseError(f"unknown property {prop!r}")
    for r in reports:
        line = f"{'PASS' if r.passed else 'FAIL'} {r.prop}"
        if r.detail:
            line += f" ({r.detail})"
        print(line)
    print("report-json: " + _report_json(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _report_json(reports) -> str:
    import json

    return json.dumps(
        [
            {
                "property": r.prop,
                "passed": r.passed,
                "detail": r.detail,
                "witness": _jsonable(r.witness),
            }
            for r in reports
        ],
        sort_keys=True,
    )


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, Fraction):
        return io.frac_str(obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted((_jsonable(v) for v in obj), key=repr)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if is_dataclass(obj) and not isinstance(obj, type):
        try:
            return {k: _jsonable(v) for k, v in asdict(obj).items()}
        except TypeError:
            return repr(obj)
    return repr(obj)


def cmd_compare(args) -> int:
    instance, _ = _load_instance(args.instance)
    a = io.parse_assignment(_read(args.first), instance)
    b = io.parse_assignment(_read(args.second), instance)
    agents = [args.agent] if args.agent is not None else list(range(instance.n))
    for j in agents:
        if not 0 <= j < instance.n:
            raise ParseError(f"agent {j} out of range")
        verdict: SdVerdict = sd_compare(instance.orders[j], a.row(j), b.row(j))
        if verdict.p_dominates_q and verdict.q_dominates_p:
            word = "A and B mutually dominate (equal upper-contour sums)"
        elif verdict.p_dominates_q:
            word = "A sd B, not conversely"
        elif verdict.q_dominates_p:
            word = "B sd A, not conversely"
        else:
            word = "incomparable"
        print(f"agent {j}: {word}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    instance, file_tb = _load_instance(args.instance)
    tiebreak = _tiebreak_for(args, instance, file_tb)
    lottery = mgd_decompose(instance, tiebreak)
    expected = mgd(instance, tiebreak)
    assert lottery.expectation(instance) == expected
    sys.stdout.write(
        io.serialize_lottery(instance, lottery, {"mechanism": "mgd", "orders": len(lottery.entries)})
    )
    return EXIT_OK


def cmd_replay_paper(args) -> int:
    if args.list:
        for name in fixture_names():
            print(name)
        return EXIT_OK
    for name, fn in REPLAY_CHECKS:
        result = fn()
        line = f"{'PASS' if result.passed else 'FAIL'} {name}"
        if result.detail:
            line += f" ({result.detail})"
        print(line)
        if not result.passed:
            print(f"first divergence: {name}", file=sys.stderr)
            return EXIT_FAIL
    print(f"{len(REPLAY_CHECKS)} fixtures reproduced")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtra",
        description="Multi-type fractional allocation mechanisms and axiom oracles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a mechanism on an instance file")
    run.add_argument("instance")
    run.add_argument("--mechanism", choices=["mrp", "mps", "mgd"], required=True)
    run.add_argument("--mode", default="exact", help="mrp only: sample | exact | mc:K")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--tiebreak", default=None, help="tiebreak file or 'default'")
    run.set_defaults(fn=cmd_run)

    check = sub.add_parser("check", help="verify axioms of an assignment")
    check.add_argument("instance")
    check.add_argument("assignment")
    check.add_argument("--property", default="all")
    check.add_argument("--mechanism", choices=["mrp", "mps", "mgd"], default=None)
    check.add_argument(
        "--misreports",
        default="linear",
        help="linear | cpnet | independent | sampled:K",
    )
    check.add_argument("--seed", type=int, default=None)
    check.set_defaults(fn=cmd_check)

    compare = sub.add_parser("compare", help="stochastic-dominance comparison")
    compare.add_argument("instance")
    compare.add_argument("first")
    compare.add_argument("second")
    compare.add_argument("--agent", type=int, default=None)
    compare.set_defaults(fn=cmd_compare)

    decomp = sub.add_parser("decompose", help="emit the MGD lottery witness")
    decomp.add_argument("instance")
    decomp.add_argument("--tiebreak", default=None)
    decomp.set_defaults(fn=cmd_decompose)

    replay = sub.add_parser("replay-paper", help="re-derive the embedded fixtures")
    replay.add_argument("--list", action="store_true")
    replay.set_defaults(fn=cmd_replay_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except GuardViolation as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except MtraError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
