"""Telemetry CSV in the 22-column motion-log layout."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ParseFailure, SchemaMismatch
from .planner import CommandKind
from .replay import TrajectorySample
from .score import StringId

HEADER = (
    "timestamp-robot", "time-elapsed-sec", "event-flag", "event-label",
    "current-event-type", "current-note-number", "current-note-name",
    "current-string", "current-bowing", "remaining-duration-sec",
    "TCP-pose-x", "TCP-pose-y", "TCP-pose-z", "TCP-pose-rx", "TCP-pose-ry", "TCP-pose-rz",
    "q-base", "q-shoulder", "q-elbow", "q-wrist1", "q-wrist2", "q-wrist3",
)
HEADER_LINE = ",".join(HEADER) + "\n"

_FIELDS = [f.name for f in fields(TrajectorySample)]
_INT = {"event_flag", "current_note_number"}
_STR = {"event_label", "current_event_type", "current_note_name", "current_string", "current_bowing"}
_KINDS = ["f" if n not in _INT | _STR else ("i" if n in _INT else "s") for n in _FIELDS]
assert len(_FIELDS) == len(HEADER)


@dataclass
class TraceFile:
    header: tuple[str, ...] = HEADER
    rows: list[TrajectorySample] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)


def _quote(text: str) -> str:
    if any(c in text for c in ',"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _format_row(s: TrajectorySample) -> str:
    out = []
    for name, kind in zip(_FIELDS, _KINDS):
        v = getattr(s, name)
        if kind == "f":
            out.append(f"{v:.6f}")
        elif kind == "i":
            out.append(str(int(v)))
        else:
            out.append(_quote(str(v)))
    return ",".join(out) + "\n"


def write_csv(samples, stream=None) -> bytes | None:
    """Serialise samples: UTF-8, LF endings, six-decimal floats.

    Returns the bytes, or writes them to the binary ``stream`` if given.
    """
    text = HEADER_LINE + "".join(_format_row(s) for s in samples)
    data = text.encode("utf-8")
    if stream is None:
        return data
    stream.write(data)
    return None


def read_csv(data: bytes) -> TraceFile:
    """Parse and strictly validate a trace; errors carry 1-based line numbers."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseFailure(1, f"not UTF-8 ({exc.reason})") from None
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatch(1, "empty file") from None
    if tuple(header) != HEADER:
        bad = next((f"column {i + 1} is {got!r}, expected {want!r}"
                    for i, (got, want) in enumerate(zip(header, HEADER)) if got != want),
                   f"{len(header)} columns, expected {len(HEADER)}")
        raise SchemaMismatch(1, bad)
    rows = []
    for values in reader:
        line = reader.line_num
        if len(values) != len(HEADER):
            raise ParseFailure(line, f"expected {len(HEADER)} fields, got {len(values)}")
        parsed = []
        for v, kind, name in zip(values, _KINDS, _FIELDS):
            if kind == "s":
                parsed.append(v)
                continue
            try:
                parsed.append(float(v) if kind == "f" else int(v))
            except ValueError:
                raise ParseFailure(line, f"{name}: {v!r} is not numeric") from None
        rows.append(TrajectorySample(*parsed))
    return TraceFile(HEADER, rows)


@dataclass
class TraceStats:
    duration_sec: float
    rows: int
    mean_spacing_sec: float
    string_share: dict[str, float]
    crossing_count: int
    bow_distance_m: float

    def format(self) -> str:
        shares = " ".join(f"{s}={v:.4f}" for s, v in self.string_share.items())
        return (f"duration_sec {self.duration_sec:.6f}\nrows {self.rows}\n"
                f"mean_spacing_sec {self.mean_spacing_sec:.9f}\nstring_share {shares}\n"
                f"crossing_count {self.crossing_count}\nbow_distance_m {self.bow_distance_m:.6f}\n")


def _stroke_blocks(rows):
    """Yield ``(first, last)`` index ranges of consecutive samples of one stroke."""
    first = None
    for k, s in enumerate(rows):
        is_stroke = s.current_event_type == CommandKind.STROKE.value
        new_block = k == 0 or s.event_flag == 1
        if first is not None and (new_block or not is_stroke):
            yield first, k - 1
            first = None
        if is_stroke and first is None:
            first = k
    if first is not None:
        yield first, len(rows) - 1


def stats(trace) -> TraceStats:
    """Duration, spacing, per-string time share, crossings and stroke travel.

    Mean spacing leaves out the final interval when there are more than two
    rows: the last sample is pinned to the program end and is usually closer
    than one step. Bow distance is reconstructed per stroke from its constant velocity and
    full duration (elapsed plus remaining time), so it does not depend on
    where samples fall relative to command boundaries. Strokes covered by a
    single sample are not counted.
    """
    rows = trace.rows if isinstance(trace, TraceFile) else list(trace)
    if not rows:
        raise ValueError("empty trace")
    t = np.array([s.time_elapsed_sec for s in rows])
    n = len(rows)
    duration = float(t[-1] - t[0])
    strings = [s.current_string for s in rows]
    share = {s.value: strings.count(s.value) / n for s in StringId}
    crossings = sum(1 for s in rows
                    if s.event_flag == 1 and s.current_event_type == CommandKind.CROSS_OUT.value)
    distance = 0.0
    for a, b in _stroke_blocks(rows):
        if b == a:
            continue
        pa, pb = rows[a].pose[:3], rows[b].pose[:3]
        speed = math.dist(pa, pb) / (t[b] - t[a])
        start = 0.0 if a == 0 else t[a - 1] + rows[a - 1].remaining_duration_sec
        full = t[a] - start + rows[a].remaining_duration_sec
        distance += speed * full
    if n > 2:
        spacing = float(t[-2] - t[0]) / (n - 2)
    else:
        spacing = duration / (n - 1) if n > 1 else 0.0
    return TraceStats(duration, n, spacing, share, crossings, float(distance))
