"""Bow primitives and pose algebra.

Poses are ``[x, y, z, rx, ry, rz]`` in the robot base frame: metres for
position, an axis-angle rotation vector in radians for orientation. Each
string has a frog and a tip waypoint sharing one orientation, and the bow
moves along the straight line between them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

from .errors import ConfigError, FractionOutOfRange, OffBowLine
from .score import Bowing, StringId

LINE_TOLERANCE = 1e-6  # metres
FRACTION_SLACK = 1e-9
MIN_BOW_LENGTH = 0.05  # metres


class Pose(NamedTuple):
    x: float
    y: float
    z: float
    rx: float
    ry: float
    rz: float

    @property
    def position(self) -> np.ndarray:
        return np.array(self[:3], dtype=float)

    @property
    def rotation(self) -> tuple[float, float, float]:
        return self[3:]

    @classmethod
    def from_parts(cls, position, rotation) -> "Pose":
        return cls(*(float(v) for v in position), *(float(v) for v in rotation))


@dataclass(frozen=True)
class OutOffset:
    """Base-frame retreat used while crossing strings."""

    delta: Pose = Pose(0.1, 0.0, 0.5, 0.0, 0.0, 0.0)

    def __post_init__(self):
        delta = Pose(*(float(v) for v in self.delta))
        object.__setattr__(self, "delta", delta)
        if any(delta.rotation):
            raise ValueError("out offset must not rotate")
        if not all(math.isfinite(v) for v in delta) or self.norm <= 0:
            raise ValueError("out offset must have a positive, finite length")

    @property
    def norm(self) -> float:
        return math.hypot(*self.delta[:3])


@dataclass(frozen=True)
class StringPrimitives:
    """Frog and tip waypoints for each of the four strings."""

    frog: Mapping[StringId, Pose]
    tip: Mapping[StringId, Pose]
    out_offset: OutOffset = field(default_factory=OutOffset)

    def __post_init__(self):
        frog = {StringId(s): Pose(*map(float, p)) for s, p in self.frog.items()}
        tip = {StringId(s): Pose(*map(float, p)) for s, p in self.tip.items()}
        if set(frog) != set(StringId) or set(tip) != set(StringId):
            raise ValueError("primitives need a frog and a tip pose for each of A, D, G, C")
        for s in StringId:
            f, t = frog[s], tip[s]
            if not all(math.isfinite(v) for v in (*f, *t)):
                raise ValueError(f"string {s}: non-finite pose component")
            if f.rotation != t.rotation:
                raise ValueError(f"string {s}: frog and tip rotations differ")
            if math.dist(f[:3], t[:3]) <= MIN_BOW_LENGTH:
                raise ValueError(f"string {s}: frog and tip closer than {MIN_BOW_LENGTH} m")
        object.__setattr__(self, "frog", frog)
        object.__setattr__(self, "tip", tip)

    def rotation(self, s: StringId) -> tuple[float, float, float]:
        return self.frog[StringId(s)].rotation


def _lerp(a: Pose, b: Pose, u: float) -> tuple[float, float, float]:
    return tuple((1.0 - u) * pa + u * pb for pa, pb in zip(a[:3], b[:3]))


def bow_pose(prims: StringPrimitives, s: StringId, u: float, b: Bowing) -> Pose:
    """Pose at bow fraction ``u`` of a stroke on string ``s`` in direction ``b``.

    A down bow runs frog to tip, an up bow tip to frog. The rotation is the
    string's constant orientation.
    """
    if not -FRACTION_SLACK <= u <= 1.0 + FRACTION_SLACK:
        raise FractionOutOfRange(f"bow fraction {u} outside [0, 1]")
    u = min(max(u, 0.0), 1.0)
    s = StringId(s)
    f, t = prims.frog[s], prims.tip[s]
    if Bowing(b) is Bowing.DOWN:
        pos = _lerp(f, t, u)
    else:
        pos = _lerp(t, f, u)
    return Pose(*pos, *f.rotation)


def bow_length(prims: StringPrimitives, s: StringId) -> float:
    s = StringId(s)
    return math.dist(prims.frog[s][:3], prims.tip[s][:3])


def distance_to_bow_line(prims: StringPrimitives, s: StringId, pose) -> float:
    """Positional distance from ``pose`` to the frog-tip segment of ``s``."""
    s = StringId(s)
    f = np.asarray(prims.frog[s][:3])
    ab = np.asarray(prims.tip[s][:3]) - f
    p = np.asarray(pose[:3], dtype=float)
    t = min(max(float(np.dot(p - f, ab) / np.dot(ab, ab)), 0.0), 1.0)
    return float(np.linalg.norm(p - (f + t * ab)))


def fraction_from_frog(prims: StringPrimitives, s: StringId, pose, tol: float = LINE_TOLERANCE) -> float:
    """Fraction of the bow between the frog of ``s`` and ``pose``.

    Raises ``OffBowLine`` when ``pose`` is more than ``tol`` from the string's
    frog-tip segment.
    """
    s = StringId(s)
    off = distance_to_bow_line(prims, s, pose)
    if off > tol:
        raise OffBowLine(f"pose is {off:.3g} m from the {s} bow line")
    frac = math.dist(pose[:3], prims.frog[s][:3]) / bow_length(prims, s)
    return min(frac, 1.0)


def project_crossing(prims: StringPrimitives, src: StringId, dst: StringId, curr) -> Pose:
    """Seat pose on ``dst`` at the same frog fraction as ``curr`` on ``src``.

    The projected distance along the target line is the source fraction times
    the target bow length; written as a convex combination of the target
    frog and tip so the two endpoints map exactly.
    """
    src, dst = StringId(src), StringId(dst)
    if src is dst:
        raise ValueError("crossing needs two different strings")
    frac = fraction_from_frog(prims, src, curr)
    return Pose(*_lerp(prims.frog[dst], prims.tip[dst], frac), *prims.rotation(dst))


def apply_out_offset(pose, off: OutOffset) -> Pose:
    d = off.delta
    return Pose(pose[0] + d[0], pose[1] + d[1], pose[2] + d[2], *pose[3:])


def remove_out_offset(pose, off: OutOffset) -> Pose:
    d = off.delta
    return Pose(pose[0] - d[0], pose[1] - d[1], pose[2] - d[2], *pose[3:])


# -- config file ------------------------------------------------------------

def parse_primitives(text: str, source: str = "<string>") -> StringPrimitives:
    """Parse the plain-text primitives table.

    Format, one entry per line with ``#`` comments::

        <A|D|G|C> <frog|tip> x y z rx ry rz
        out_offset x y z          # optional
    """
    frog: dict[StringId, Pose] = {}
    tip: dict[StringId, Pose] = {}
    offset = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        where = f"{source}:{lineno}"
        try:
            if parts[0] == "out_offset":
                if len(parts) != 4:
                    raise ConfigError(f"{where}: out_offset needs 3 values")
                offset = OutOffset(Pose(*map(float, parts[1:]), 0.0, 0.0, 0.0))
                continue
            if len(parts) != 8:
                raise ConfigError(f"{where}: expected '<string> <frog|tip> x y z rx ry rz'")
            s = StringId(parts[0].upper())
            end = parts[1].lower()
            if end not in ("frog", "tip"):
                raise ConfigError(f"{where}: expected frog or tip, got {parts[1]!r}")
            table = frog if end == "frog" else tip
            if s in table:
                raise ConfigError(f"{where}: duplicate {s} {end}")
            table[s] = Pose(*map(float, parts[2:]))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    if len(frog) + len(tip) != 8:
        raise ConfigError(f"{source}: expected 8 waypoints, found {len(frog) + len(tip)}")
    try:
        return StringPrimitives(frog, tip, offset or OutOffset())
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_primitives(path) -> StringPrimitives:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read primitives file {path}: {exc.strerror}") from None
    return parse_primitives(text, str(path))


def format_primitives(prims: StringPrimitives) -> str:
    lines = []
    for s in StringId:
        for end, table in (("frog", prims.frog), ("tip", prims.tip)):
            lines.append(f"{s.value} {end} " + " ".join(repr(v) for v in table[s]))
    d = prims.out_offset.delta
    lines.append(f"out_offset {d[0]!r} {d[1]!r} {d[2]!r}")
    return "\n".join(lines) + "\n"
