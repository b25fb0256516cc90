"""Compile a note sequence into a timed chain of linear moves.

Each note becomes one bow stroke whose length follows a raised-cosine map
of its duration. When the bow runs out in the requested direction the
planner either snaps to the endpoint (small shortfall), flips the bowing,
or repositions to the frog/tip first. String changes go through a retreat,
travel and reseat sequence offset from the strings.
"""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import asdict, dataclass, field, replace

from .errors import InputFormatError, NegativeDuration, TargetUnreachable
from .geometry import (Pose, StringPrimitives, apply_out_offset, bow_length,
                       bow_pose, fraction_from_frog, project_crossing)
from .score import Bowing, NoteSequence, NoteSpec, StringId

PROGRAM_MAGIC = "bowmotion-program"


class CommandKind(str, enum.Enum):
    STROKE = "Stroke"
    CROSS_OUT = "CrossOut"
    CROSS_TRAVEL = "CrossTravel"
    CROSS_SEAT = "CrossSeat"
    REPOSITION = "Reposition"
    HOLD = "Hold"

    def __str__(self):
        return self.value


CROSSING_KINDS = (CommandKind.CROSS_OUT, CommandKind.CROSS_TRAVEL, CommandKind.CROSS_SEAT)


@dataclass(frozen=True)
class PlannerConfig:
    endpoint_tolerance_m: float = 0.025
    stroke_cap_sec: float = 3.0
    crossing_phase_sec: float = 0.25
    reposition_speed_mps: float = 0.5

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")

    def non_playing_duration(self, distance: float) -> float:
        """Time for a move that does not sound a note: a phase minimum, slowed to the speed cap."""
        return max(self.crossing_phase_sec, distance / self.reposition_speed_mps)


@dataclass(frozen=True)
class BowState:
    string: StringId
    pose: Pose
    bowing: Bowing


@dataclass(frozen=True)
class MotionCommand:
    kind: CommandKind
    target: Pose
    duration_sec: float
    note_index: int = -1
    note_name: str = "-"
    string: str = "-"
    bowing: str = "-"
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", CommandKind(self.kind))
        object.__setattr__(self, "target", Pose(*map(float, self.target)))
        object.__setattr__(self, "string", str(self.string))
        object.__setattr__(self, "bowing", str(self.bowing))
        if not self.duration_sec > 0:
            raise ValueError(f"{self.kind} command needs a positive duration")
        if not self.label:
            object.__setattr__(self, "label", self.kind.value.lower())
        if any(c.isspace() for c in self.label):
            raise ValueError("labels may not contain whitespace")


@dataclass(frozen=True)
class MotionProgram:
    start_pose: Pose
    commands: tuple[MotionCommand, ...]
    source_hash: str = ""
    config: PlannerConfig = field(default_factory=PlannerConfig)

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        object.__setattr__(self, "start_pose", Pose(*map(float, self.start_pose)))
        if not self.commands:
            raise ValueError("a motion program needs at least one command")

    @property
    def total_duration_sec(self) -> float:
        return math.fsum(c.duration_sec for c in self.commands)

    @property
    def stroke_duration_sec(self) -> float:
        return math.fsum(c.duration_sec for c in self.commands if c.kind is CommandKind.STROKE)

    def segments(self):
        """Yield ``(start_pose, command)`` pairs; each start is the previous target."""
        start = self.start_pose
        for cmd in self.commands:
            yield start, cmd
            start = cmd.target


def stroke_alpha(d: float, cap: float = 3.0) -> float:
    """Fraction of the full bow used by a note of ``d`` seconds.

    Raised cosine from 0 at ``d = 0`` to 1 at ``d = cap``, flat beyond.
    """
    if d < 0:
        raise NegativeDuration(f"negative note duration {d}")
    return (1.0 - math.cos(math.pi * min(d, cap) / cap)) / 2.0


def target_length(prims: StringPrimitives, s: StringId, d: float, cap: float = 3.0) -> float:
    return stroke_alpha(d, cap) * bow_length(prims, s)


def _annotate(kind, target, duration, note_index, note, bowing, label):
    return MotionCommand(kind, target, duration, note_index, note.note_name,
                         note.string.value, Bowing(bowing).value, label)


def plan_note(state: BowState, note: NoteSpec, prims: StringPrimitives,
              cfg: PlannerConfig = PlannerConfig(), note_index: int = 0
              ) -> tuple[list[MotionCommand], BowState]:
    """Emit the commands that play ``note`` starting from ``state``.

    Case order: fits as bowed; shortfall within tolerance snaps to the
    endpoint; otherwise flip if the reversed direction fits; otherwise
    reposition to the stroke's starting end and bow from there.
    """
    s = note.string
    if state.string is not s:
        raise ValueError(f"bow is on {state.string}, note needs {s}; plan the crossing first")
    length = bow_length(prims, s)
    frog, tip = prims.frog[s], prims.tip[s]
    start = fraction_from_frog(prims, s, state.pose)
    needed = target_length(prims, s, note.duration_sec, cfg.stroke_cap_sec)
    if needed > length * (1.0 + 1e-12):
        raise TargetUnreachable(f"stroke of {needed} m exceeds the {length} m bow")
    step = needed / length

    def on_line(frac):
        return bow_pose(prims, s, min(max(frac, 0.0), 1.0), Bowing.DOWN)

    def toward(frac, b):
        return frac + step if b is Bowing.DOWN else frac - step

    b = note.bowing
    pose = state.pose
    cmds = []
    end_pose = tip if b is Bowing.DOWN else frog
    available = math.dist(pose[:3], end_pose[:3])
    if available >= needed:
        target, label = on_line(toward(start, b)), "stroke"
    elif needed - available <= cfg.endpoint_tolerance_m:
        target, label = end_pose, "stroke_snap"
    else:
        reverse_end = frog if b is Bowing.DOWN else tip
        if math.dist(pose[:3], reverse_end[:3]) >= needed:
            b = b.flipped
            target, label = on_line(toward(start, b)), "stroke_flip"
        else:
            reset = frog if b is Bowing.DOWN else tip
            dist = math.dist(pose[:3], reset[:3])
            cmds.append(_annotate(CommandKind.REPOSITION, reset, cfg.non_playing_duration(dist),
                                  note_index, note, b, "reposition"))
            reset_frac = 0.0 if b is Bowing.DOWN else 1.0
            target, label = on_line(toward(reset_frac, b)), "stroke_reset"
    cmds.append(_annotate(CommandKind.STROKE, target, note.duration_sec, note_index, note, b, label))
    return cmds, BowState(s, target, b)


def plan_crossing(state: BowState, to: StringId, prims: StringPrimitives,
                  cfg: PlannerConfig = PlannerConfig()) -> tuple[list[MotionCommand], BowState]:
    """Retreat by the out offset, travel to the projected pose on ``to``, reseat."""
    to = StringId(to)
    if to is state.string:
        raise ValueError("crossing to the string the bow is already on")
    off = prims.out_offset
    seat = project_crossing(prims, state.string, to, state.pose)
    out = apply_out_offset(state.pose, off)
    above = apply_out_offset(seat, off)
    tag = f"{state.string.value}-{to.value}"
    cmds = []
    prev = state.pose
    for kind, target, name in ((CommandKind.CROSS_OUT, out, "cross_out"),
                               (CommandKind.CROSS_TRAVEL, above, "cross_travel"),
                               (CommandKind.CROSS_SEAT, seat, "cross_seat")):
        dist = math.dist(prev[:3], target[:3])
        cmds.append(MotionCommand(kind, target, cfg.non_playing_duration(dist), label=f"{name}:{tag}"))
        prev = target
    return cmds, BowState(to, seat, state.bowing)


def ir_digest(seq: NoteSequence) -> str:
    h = hashlib.sha256()
    h.update(b"overridden" if seq.bowings_overridden else b"alternating")
    for n in seq.notes:
        h.update(f"|{n.string.value},{n.duration_sec!r},{n.bowing.value},{n.pitch},{n.rest_before_sec!r}".encode())
    return h.hexdigest()


def compile_program(seq: NoteSequence, prims: StringPrimitives,
                    cfg: PlannerConfig = PlannerConfig()) -> MotionProgram:
    """Plan every note of ``seq`` starting at the frog of the first string.

    Without a bowing override, each note's bowing is the opposite of the
    previous note's realised bowing, so a flip re-anchors the alternation.
    """
    if not len(seq):
        raise ValueError("empty note sequence")
    first = seq[0]
    state = BowState(first.string, prims.frog[first.string], first.bowing)
    start_pose = state.pose
    cmds: list[MotionCommand] = []
    for i, note in enumerate(seq):
        if note.rest_before_sec > 0:
            cmds.append(MotionCommand(CommandKind.HOLD, state.pose, note.rest_before_sec,
                                      label="hold"))
        if note.string is not state.string:
            crossing, state = plan_crossing(state, note.string, prims, cfg)
            cmds.extend(crossing)
        if i > 0 and not seq.bowings_overridden:
            note = replace(note, bowing=state.bowing.flipped)
        played, state = plan_note(state, note, prims, cfg, note_index=i)
        cmds.extend(played)
    return MotionProgram(start_pose, tuple(cmds), ir_digest(seq), cfg)


# -- text serialisation ------------------------------------------------------

def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def format_program(program: MotionProgram) -> str:
    """Line-oriented text form; floats use shortest round-trip repr."""
    cfg = " ".join(f"{k}={v!r}" for k, v in asdict(program.config).items())
    lines = [f"{PROGRAM_MAGIC} source_hash={program.source_hash or '-'} {cfg}",
             f"start {_floats(program.start_pose)}"]
    for c in program.commands:
        lines.append(f"{c.kind.value} {_floats(c.target)} {c.duration_sec!r} {c.note_index} "
                     f"{c.note_name} {c.string} {c.bowing} {c.label}")
    return "\n".join(lines) + "\n"


def parse_program(text: str) -> MotionProgram:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(PROGRAM_MAGIC):
        raise InputFormatError("line 1: not a motion program file")
    try:
        header = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
        source_hash = header.pop("source_hash")
        cfg = PlannerConfig(**{k: float(v) for k, v in header.items()})
    except (ValueError, TypeError, KeyError) as exc:
        raise InputFormatError(f"line 1: bad program header ({exc})") from None
    if len(lines) < 2 or not lines[1].startswith("start "):
        raise InputFormatError("line 2: expected start pose")
    try:
        start = Pose(*map(float, lines[1].split()[1:]))
    except (TypeError, ValueError):
        raise InputFormatError("line 2: bad start pose") from None
    cmds = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 13:
            raise InputFormatError(f"line {lineno}: expected 13 fields, got {len(parts)}")
        try:
            cmds.append(MotionCommand(
                CommandKind(parts[0]), Pose(*map(float, parts[1:7])), float(parts[7]),
                int(parts[8]), parts[9], parts[10], parts[11], parts[12]))
        except ValueError as exc:
            raise InputFormatError(f"line {lineno}: {exc}") from None
    return MotionProgram(start, tuple(cmds), "" if source_hash == "-" else source_hash, cfg)
