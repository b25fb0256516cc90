"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 usage/config error,
3 input-format error. Artifacts go to stdout or ``--out``; logs and
reports that accompany an artifact go to stderr.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ConfigError, InputFormatError
from .geometry import load_primitives
from .kinematics import IKProvider, NullProvider, load_arm_model
from .planner import PlannerConfig, compile_program, format_program, parse_program
from .replay import simulate, validate
from .score import PitchMode, ir_dump, load_score, parse_bowing_override
from .trace import read_csv, stats, write_csv

log = logging.getLogger("bowmotion")

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_INPUT = 0, 1, 2, 3


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _load_sequence(path, args):
    override = None
    if args.bowings:
        override = parse_bowing_override(_read_bytes(args.bowings).decode("utf-8"))
    try:
        return load_score(_read_bytes(path), args.map, override)
    except InputFormatError as exc:
        raise InputFormatError(f"{path}: {exc}") from None


def _planner_config(args) -> PlannerConfig:
    try:
        return PlannerConfig(args.tolerance, args.stroke_cap, args.phase, args.speed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _emit(data: bytes | str, out):
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out:
        try:
            Path(out).write_bytes(data)
        except OSError as exc:
            raise ConfigError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def cmd_inspect(args) -> int:
    _emit(ir_dump(_load_sequence(args.midi, args)), args.out)
    return EXIT_OK


def _compile_one(midi, args, prims, cfg) -> str:
    return format_program(compile_program(_load_sequence(midi, args), prims, cfg))


def _compile_job(job):
    midi, args, out = job
    prims = load_primitives(args.primitives)
    Path(out).write_text(_compile_one(midi, args, prims, _planner_config(args)), encoding="utf-8")
    return str(out)


def cmd_compile(args) -> int:
    prims = load_primitives(args.primitives)
    cfg = _planner_config(args)
    if len(args.midi) == 1:
        _emit(_compile_one(args.midi[0], args, prims, cfg), args.out)
        return EXIT_OK
    if not args.out:
        raise ConfigError("--out DIR is required when compiling several scores")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [(m, args, outdir / (Path(m).stem + ".prog")) for m in args.midi]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            done = list(pool.map(_compile_job, jobs))
    else:
        done = [_compile_job(j) for j in jobs]
    for path in done:
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_simulate(args) -> int:
    data = _read_bytes(args.input)
    prims = load_primitives(args.primitives) if args.primitives else None
    if data[:4] == b"MThd":
        if prims is None:
            raise ConfigError("--primitives is required to simulate a MIDI file")
        program = compile_program(_load_sequence(args.input, args), prims, _planner_config(args))
    else:
        try:
            program = parse_program(data.decode("utf-8"))
        except UnicodeDecodeError:
            raise InputFormatError(f"{args.input}: neither a MIDI file nor a motion program") from None
    if not args.dt > 0:
        raise ConfigError("--dt must be positive")
    kin = IKProvider(load_arm_model(args.arm)) if args.arm else NullProvider()
    samples = simulate(program, args.dt, kin)
    _emit(write_csv(samples), args.out)
    for index, reason in kin.failures[:10]:
        log.warning("IK fallback to zero joints at sample %d: %s", index, reason)
    if args.validate:
        if prims is None:
            raise ConfigError("--validate needs --primitives")
        report = validate(samples, prims, program=program)
        if kin.failures:
            report.notes.append(f"{len(kin.failures)} samples fell back to zero joints (IK)")
        sys.stderr.write(report.format())
        if not report.passed:
            return EXIT_INVALID
    return EXIT_OK


def cmd_validate(args) -> int:
    prims = load_primitives(args.primitives)
    trace = read_csv(_read_bytes(args.trace))
    program = parse_program(_read_bytes(args.program).decode("utf-8")) if args.program else None
    report = validate(trace.rows, prims, program=program)
    _emit(report.format(), args.out)
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_stats(args) -> int:
    _emit(stats(read_csv(_read_bytes(args.trace))).format(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bowmotion", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def score_flags(sp):
        sp.add_argument("--map", choices=[m.value for m in PitchMode], default="strict",
                        help="pitch to string mapping (default: strict)")
        sp.add_argument("--bowings", metavar="PATH", help="bowing override file (D/U tokens)")

    def planner_flags(sp):
        d = PlannerConfig()
        sp.add_argument("--tolerance", type=float, default=d.endpoint_tolerance_m, metavar="M")
        sp.add_argument("--stroke-cap", type=float, default=d.stroke_cap_sec, metavar="SEC")
        sp.add_argument("--phase", type=float, default=d.crossing_phase_sec, metavar="SEC",
                        help="minimum duration of each crossing phase / reposition")
        sp.add_argument("--speed", type=float, default=d.reposition_speed_mps, metavar="M/S",
                        help="speed cap for crossings and repositions")

    sp = sub.add_parser("inspect", help="print the note-sequence IR")
    sp.add_argument("midi")
    score_flags(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_inspect)

    sp = sub.add_parser("compile", help="compile MIDI to a motion program")
    sp.add_argument("midi", nargs="+")
    sp.add_argument("--primitives", required=True, metavar="PATH")
    score_flags(sp)
    planner_flags(sp)
    sp.add_argument("--out", help="output file, or directory for several inputs")
    sp.add_argument("--jobs", type=int, default=1, metavar="N")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("simulate", help="sample a program (or MIDI) into a telemetry CSV")
    sp.add_argument("input", help="motion program file or MIDI file")
    sp.add_argument("--primitives", metavar="PATH")
    sp.add_argument("--dt", type=float, default=0.01, metavar="SECONDS")
    sp.add_argument("--arm", metavar="PATH", help="arm model; joints are zero without it")
    sp.add_argument("--validate", action="store_true")
    score_flags(sp)
    planner_flags(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="check a telemetry CSV")
    sp.add_argument("trace")
    sp.add_argument("--primitives", required=True, metavar="PATH")
    sp.add_argument("--program", metavar="PATH", help="program the trace was sampled from")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("stats", help="summarise a telemetry CSV")
    sp.add_argument("trace")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"bowmotion: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputFormatError as exc:
        print(f"bowmotion: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
