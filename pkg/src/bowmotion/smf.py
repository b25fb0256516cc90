"""Standard MIDI File reader.

Only what the score front end needs is decoded: note on/off pairs and the
tempo map. Everything else (controllers, sysex, text meta events) is parsed
for framing and discarded.
"""
from __future__ import annotations

import logging
import struct
from bisect import bisect_right
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MalformedFile, UnpairedNoteOn

log = logging.getLogger(__name__)

DEFAULT_TEMPO = 500000  # microseconds per quarter note
PERCUSSION_CHANNEL = 9

# data-byte counts for channel voice messages, keyed by status high nibble
_CHANNEL_DATA_LEN = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


@dataclass(frozen=True)
class RawNoteEvent:
    pitch: int
    onset_ticks: int
    duration_ticks: int
    track: int
    channel: int = 0

    def __post_init__(self):
        if self.duration_ticks <= 0:
            raise ValueError("duration_ticks must be positive")
        if self.onset_ticks < 0:
            raise ValueError("onset_ticks must be non-negative")

    @property
    def offset_ticks(self) -> int:
        return self.onset_ticks + self.duration_ticks


@dataclass(frozen=True)
class TempoMap:
    """Piecewise-constant tempo as ``(tick, microseconds_per_quarter)`` pairs.

    Entries are normalised on construction: sorted by tick, duplicates at the
    same tick collapse to the last one given, and a default-tempo entry is
    inserted at tick 0 when none is present.
    """

    entries: tuple[tuple[int, int], ...] = ((0, DEFAULT_TEMPO),)
    ticks_per_quarter: int = 480
    _ticks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.ticks_per_quarter <= 0:
            raise ValueError("ticks_per_quarter must be positive")
        merged: dict[int, int] = {}
        for tick, tempo in self.entries:
            if tick < 0 or tempo <= 0:
                raise ValueError(f"invalid tempo entry ({tick}, {tempo})")
            merged[int(tick)] = int(tempo)
        merged.setdefault(0, DEFAULT_TEMPO)
        entries = tuple(sorted(merged.items()))
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_ticks", tuple(t for t, _ in entries))

    def tempo_at(self, tick: int) -> int:
        return self.entries[bisect_right(self._ticks, tick) - 1][1]

    def seconds_exact(self, ticks: int, at_tick: int = 0) -> Fraction:
        """Exact duration of ``ticks`` starting at ``at_tick``."""
        if ticks < 0:
            raise ValueError("ticks must be non-negative")
        end = at_tick + ticks
        i = bisect_right(self._ticks, at_tick) - 1
        total = Fraction(0)
        pos = at_tick
        while pos < end:
            nxt = self._ticks[i + 1] if i + 1 < len(self._ticks) else end
            seg_end = min(nxt, end)
            total += Fraction((seg_end - pos) * self.entries[i][1], 1_000_000)
            pos = seg_end
            i += 1
        return total / self.ticks_per_quarter


def ticks_to_seconds(ticks: int, at_tick: int, tempo: TempoMap) -> float:
    """Convert a tick interval starting at ``at_tick`` to seconds.

    Every tempo change inside ``[at_tick, at_tick + ticks)`` is honoured.
    The result is the correctly rounded float of the exact rational value.
    """
    return float(tempo.seconds_exact(ticks, at_tick))


class _Reader:
    def __init__(self, data: bytes, start: int, end: int):
        self.data = data
        self.pos = start
        self.end = end

    def byte(self) -> int:
        if self.pos >= self.end:
            raise MalformedFile("unexpected end of track data")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def take(self, n: int) -> bytes:
        if self.pos + n > self.end:
            raise MalformedFile("unexpected end of track data")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MalformedFile("variable-length quantity longer than 4 bytes")


def _iter_chunks(data: bytes):
    pos = 0
    while pos < len(data):
        if pos + 8 > len(data):
            raise MalformedFile(f"truncated chunk header at byte {pos}")
        kind, length = struct.unpack(">4sI", data[pos:pos + 8])
        body = pos + 8
        if body + length > len(data):
            raise MalformedFile(f"chunk {kind!r} at byte {pos} overruns the file")
        yield kind, body, body + length
        pos = body + length


def _parse_track(data, start, end, track, notes, tempos):
    rd = _Reader(data, start, end)
    tick = 0
    running = None
    pending: dict[tuple[int, int], deque] = defaultdict(deque)
    while rd.pos < rd.end:
        tick += rd.varlen()
        status = rd.byte()
        if status == 0xFF:
            meta = rd.byte()
            payload = rd.take(rd.varlen())
            if meta == 0x51:
                if len(payload) != 3:
                    raise MalformedFile(f"set-tempo event with {len(payload)} bytes in track {track}")
                tempos.append((tick, int.from_bytes(payload, "big")))
            elif meta == 0x2F:
                break
            continue
        if status in (0xF0, 0xF7):
            rd.take(rd.varlen())
            running = None
            continue
        if status & 0x80:
            if status >= 0xF0:
                raise MalformedFile(f"unsupported system message 0x{status:02X} in track {track}")
            running = status
            first = rd.byte()
        else:
            if running is None:
                raise MalformedFile(f"data byte without running status in track {track}")
            first = status
        kind = running & 0xF0
        channel = running & 0x0F
        args = [first]
        if _CHANNEL_DATA_LEN[kind] == 2:
            args.append(rd.byte())
        if any(a & 0x80 for a in args):
            raise MalformedFile(f"status byte inside message data in track {track}")
        if kind not in (0x80, 0x90):
            continue
        pitch = args[0]
        key = (channel, pitch)
        if kind == 0x90 and args[1] > 0:
            pending[key].append(tick)
            continue
        # note-off, or note-on with velocity 0
        if not pending[key]:
            log.warning("note-off without note-on: pitch %d tick %d track %d", pitch, tick, track)
            continue
        onset = pending[key].popleft()
        if tick == onset:
            log.warning("dropping zero-length note: pitch %d tick %d track %d", pitch, tick, track)
            continue
        if channel == PERCUSSION_CHANNEL:
            continue
        notes.append(RawNoteEvent(pitch, onset, tick - onset, track, channel))
    for (channel, pitch), onsets in sorted(pending.items()):
        if onsets:
            raise UnpairedNoteOn(pitch, track, onsets[0])


def parse_midi(data: bytes) -> tuple[list[RawNoteEvent], TempoMap]:
    """Parse SMF bytes into note events from all tracks and the tempo map.

    Events are merged across tracks and sorted by ``(onset, pitch, track)``.
    Percussion-channel notes are ignored.
    """
    data = bytes(data)
    if len(data) < 14 or data[:4] != b"MThd":
        raise MalformedFile("missing MThd header chunk")
    chunks = _iter_chunks(data)
    _, hstart, hend = next(chunks)
    if hend - hstart < 6:
        raise MalformedFile("MThd chunk shorter than 6 bytes")
    fmt, ntracks, division = struct.unpack(">HHH", data[hstart:hstart + 6])
    if fmt not in (0, 1):
        raise MalformedFile(f"unsupported MIDI format {fmt}")
    if division & 0x8000:
        raise MalformedFile("SMPTE time division is not supported")
    if division == 0:
        raise MalformedFile("ticks per quarter note is zero")

    notes: list[RawNoteEvent] = []
    tempos: list[tuple[int, int]] = []
    n_found = 0
    for kind, start, end in chunks:
        if kind != b"MTrk":
            continue
        _parse_track(data, start, end, n_found, notes, tempos)
        n_found += 1
    if n_found == 0:
        raise MalformedFile("no MTrk chunks after header")
    if n_found < ntracks:
        raise MalformedFile(f"header declares {ntracks} tracks, found {n_found}")

    # stable sort keeps file order for tempo events sharing a tick
    tempos.sort(key=lambda e: e[0])
    notes.sort(key=lambda e: (e.onset_ticks, e.pitch, e.track))
    return notes, TempoMap(tuple(tempos), division)
