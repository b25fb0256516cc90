"""Fixed-timestep replay of a motion program and trajectory checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, StringPrimitives, distance_to_bow_line
from .kinematics import JointVector, NullProvider
from .planner import CommandKind, MotionProgram
from .score import StringId

# synthetic robot clock origin (2025-01-01T00:00:00Z); rows are reproducible
EPOCH = 1_735_689_600.0
DEFAULT_DT = 0.01


@dataclass(slots=True)
class TrajectorySample:
    timestamp_robot: float
    time_elapsed_sec: float
    event_flag: int
    event_label: str
    current_event_type: str
    current_note_number: int
    current_note_name: str
    current_string: str
    current_bowing: str
    remaining_duration_sec: float
    tcp_x: float
    tcp_y: float
    tcp_z: float
    tcp_rx: float
    tcp_ry: float
    tcp_rz: float
    q_base: float = 0.0
    q_shoulder: float = 0.0
    q_elbow: float = 0.0
    q_wrist1: float = 0.0
    q_wrist2: float = 0.0
    q_wrist3: float = 0.0

    @property
    def pose(self) -> Pose:
        return Pose(self.tcp_x, self.tcp_y, self.tcp_z, self.tcp_rx, self.tcp_ry, self.tcp_rz)

    @property
    def joints(self) -> JointVector:
        return JointVector(self.q_base, self.q_shoulder, self.q_elbow,
                           self.q_wrist1, self.q_wrist2, self.q_wrist3)


def sample_count(total: float, dt: float) -> int:
    """``ceil(total / dt) + 1``, treating ratios within 1e-9 of an integer as exact."""
    ratio = total / dt
    nearest = round(ratio)
    intervals = nearest if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio) else math.ceil(ratio)
    return int(intervals) + 1


def simulate(program: MotionProgram, dt: float = DEFAULT_DT, kin=None) -> list[TrajectorySample]:
    """Sample ``program`` every ``dt`` seconds, plus a final sample at its end.

    Poses are interpolated linearly (position and rotation-vector components)
    between each command's start and target. ``kin`` maps a pose to joint
    angles; it is reset before use and defaults to all-zero joints.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    kin = kin if kin is not None else NullProvider()
    if hasattr(kin, "reset"):
        kin.reset()
    cmds = program.commands
    durations = np.array([c.duration_sec for c in cmds])
    starts = np.empty(len(cmds))
    acc = 0.0
    for i, d in enumerate(durations):
        starts[i] = acc
        acc += d
    ends = np.append(starts[1:], program.total_duration_sec)
    a = np.array([start for start, _ in program.segments()], dtype=float)
    b = np.array([c.target for c in cmds], dtype=float)

    total = program.total_duration_sec
    n = sample_count(total, dt)
    t = np.arange(n) * dt
    t[-1] = total
    idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(cmds) - 1)
    frac = np.clip((t - starts[idx]) / durations[idx], 0.0, 1.0)[:, None]
    poses = (1.0 - frac) * a[idx] + frac * b[idx]
    remaining = np.clip(ends[idx] - t, 0.0, durations[idx])
    flags = np.ones(n, dtype=int)
    flags[1:] = idx[1:] != idx[:-1]

    samples = []
    null = isinstance(kin, NullProvider)
    for k in range(n):
        c = cmds[idx[k]]
        pose = Pose(*poses[k].tolist())
        joints = kin(pose) if not null else JointVector()
        samples.append(TrajectorySample(
            EPOCH + float(t[k]), float(t[k]), int(flags[k]), c.label, c.kind.value,
            c.note_index, c.note_name, c.string, c.bowing, float(remaining[k]),
            *pose, *(float(q) for q in joints)))
    return samples


@dataclass(frozen=True)
class ValidationLimits:
    max_speed_mps: float = 1.0
    clearance_ratio: float = 0.9
    # slack for positions read back from 6-decimal CSV
    line_tolerance_m: float = 1e-5


@dataclass
class ValidationReport:
    continuity_violations: list[int] = field(default_factory=list)
    clearance_violations: list[int] = field(default_factory=list)
    fraction_violations: list[int] = field(default_factory=list)
    event_violations: list[int] = field(default_factory=list)
    max_discontinuity_m: float = 0.0
    max_speed_mps: float = 0.0
    min_crossing_clearance_m: float = math.inf
    required_clearance_m: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def continuity_ok(self) -> bool:
        return not self.continuity_violations

    @property
    def clearance_ok(self) -> bool:
        return not self.clearance_violations

    @property
    def fraction_ok(self) -> bool:
        return not self.fraction_violations

    @property
    def events_ok(self) -> bool:
        return not self.event_violations

    @property
    def passed(self) -> bool:
        return self.continuity_ok and self.clearance_ok and self.fraction_ok and self.events_ok

    def format(self) -> str:
        def check(name, violations):
            status = "PASS" if not violations else f"FAIL ({len(violations)}, first at sample {violations[0]})"
            return f"{name:<12}{status}"

        lines = [
            check("continuity", self.continuity_violations),
            check("clearance", self.clearance_violations),
            check("fraction", self.fraction_violations),
            check("events", self.event_violations),
            f"max_discontinuity_m {self.max_discontinuity_m:.6f}",
            f"max_speed_mps {self.max_speed_mps:.6f}",
            f"min_crossing_clearance_m {self.min_crossing_clearance_m:.6f} "
            f"(required {self.required_clearance_m:.6f})",
        ]
        lines += [f"note: {n}" for n in self.notes]
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines) + "\n"


def _crossing_strings(label: str):
    try:
        src, dst = label.split(":", 1)[1].split("-")
        return StringId(src), StringId(dst)
    except (IndexError, ValueError):
        return None


def validate(samples, prims: StringPrimitives, limits: ValidationLimits = ValidationLimits(),
             program: MotionProgram | None = None) -> ValidationReport:
    """Check a sample stream; failures are collected, never raised.

    (a) consecutive positions move no faster than ``max_speed_mps``;
    (b) crossing-travel samples stay ``clearance_ratio * |out offset|`` from
    both strings' bow segments; (c) stroke samples lie on their string's bow
    segment; (d) event flags mark exactly the sample where the active command
    changes, time increases strictly, and remaining time never grows within a
    command. With ``program`` given, command blocks must also follow the
    program's command order.
    """
    if not samples:
        raise ValueError("no samples to validate")
    rep = ValidationReport()
    rep.required_clearance_m = limits.clearance_ratio * prims.out_offset.norm
    pos = np.array([[s.tcp_x, s.tcp_y, s.tcp_z] for s in samples])
    t = np.array([s.time_elapsed_sec for s in samples])

    # (a)
    if len(samples) > 1:
        jumps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
        gaps = np.diff(t)
        allowed = limits.max_speed_mps * gaps + 1e-9
        rep.continuity_violations = (np.nonzero(jumps > allowed)[0] + 1).tolist()
        rep.max_discontinuity_m = float(jumps.max())
        with np.errstate(divide="ignore", invalid="ignore"):
            speeds = np.where(gaps > 0, jumps / gaps, np.inf)
        rep.max_speed_mps = float(speeds.max())

    # (b), (c)
    for k, s in enumerate(samples):
        if s.current_event_type == CommandKind.CROSS_TRAVEL.value:
            pair = _crossing_strings(s.event_label)
            if pair is None:
                rep.clearance_violations.append(k)
                continue
            clearance = min(distance_to_bow_line(prims, string, pos[k]) for string in pair)
            rep.min_crossing_clearance_m = min(rep.min_crossing_clearance_m, clearance)
            if clearance < rep.required_clearance_m:
                rep.clearance_violations.append(k)
        elif s.current_event_type == CommandKind.STROKE.value:
            try:
                off = distance_to_bow_line(prims, StringId(s.current_string), pos[k])
            except ValueError:
                off = math.inf
            if off > limits.line_tolerance_m:
                rep.fraction_violations.append(k)

    # (d)
    blocks = []
    prev_key = None
    for k, s in enumerate(samples):
        key = (s.current_event_type, s.current_note_number, s.event_label)
        changed = key != prev_key
        bad = s.event_flag != int(changed) or s.remaining_duration_sec < 0
        if k > 0:
            bad = bad or t[k] <= t[k - 1]
            if not changed and s.remaining_duration_sec > samples[k - 1].remaining_duration_sec:
                bad = True
        if bad:
            rep.event_violations.append(k)
        if changed:
            blocks.append((k, s.current_event_type, s.event_label))
        prev_key = key
    if program is not None:
        expected = iter((c.kind.value, c.label) for c in program.commands)
        for k, kind, label in blocks:
            if not any(e == (kind, label) for e in expected):
                rep.event_violations.append(k)
                break
    return rep
