"""Score front end: MIDI notes to the (string, duration, bowing) note sequence."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import (BelowRange, InputFormatError, NotOpenString,
                     OverrideLengthMismatch, ParseFailure)
from .smf import RawNoteEvent, TempoMap, parse_midi, ticks_to_seconds

log = logging.getLogger(__name__)

NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


class StringId(str, enum.Enum):
    A = "A"
    D = "D"
    G = "G"
    C = "C"

    @property
    def open_pitch(self) -> int:
        return OPEN_PITCHES[self]

    def __str__(self):
        return self.value


OPEN_PITCHES = {StringId.C: 36, StringId.G: 43, StringId.D: 50, StringId.A: 57}
_BY_PITCH = sorted((p, s) for s, p in OPEN_PITCHES.items())


class Bowing(str, enum.Enum):
    DOWN = "D"
    UP = "U"

    @property
    def flipped(self) -> "Bowing":
        return Bowing.UP if self is Bowing.DOWN else Bowing.DOWN

    def __str__(self):
        return self.value


class PitchMode(str, enum.Enum):
    STRICT = "strict"
    NEAREST = "nearest"


def note_name(pitch: int) -> str:
    """Scientific pitch name with MIDI 60 = C4, e.g. ``note_name(57) == "A3"``."""
    return f"{NOTE_NAMES[pitch % 12]}{pitch // 12 - 1}"


@dataclass(frozen=True)
class NoteSpec:
    string: StringId
    duration_sec: float
    bowing: Bowing
    pitch: int
    note_name: str = ""
    # silence between the previous note's release and this onset
    rest_before_sec: float = 0.0

    def __post_init__(self):
        if not self.duration_sec > 0:
            raise ValueError(f"duration_sec must be positive, got {self.duration_sec}")
        if self.rest_before_sec < 0:
            raise ValueError("rest_before_sec must be non-negative")
        object.__setattr__(self, "string", StringId(self.string))
        object.__setattr__(self, "bowing", Bowing(self.bowing))
        expected = note_name(self.pitch)
        if not self.note_name:
            object.__setattr__(self, "note_name", expected)
        elif self.note_name != expected:
            raise ValueError(f"note_name {self.note_name!r} does not match pitch {self.pitch}")


@dataclass(frozen=True)
class NoteSequence:
    notes: tuple[NoteSpec, ...]
    bowings_overridden: bool = False

    def __post_init__(self):
        object.__setattr__(self, "notes", tuple(self.notes))
        if not self.notes:
            raise ValueError("a note sequence must contain at least one note")

    def __len__(self):
        return len(self.notes)

    def __iter__(self):
        return iter(self.notes)

    def __getitem__(self, i):
        return self.notes[i]

    @property
    def score_duration_sec(self) -> float:
        return math.fsum(n.duration_sec for n in self.notes)


def map_pitch_to_string(pitch: int, mode: PitchMode | str = PitchMode.STRICT) -> StringId:
    """Pick the string that sounds ``pitch``.

    ``strict`` accepts only the four open-string pitches; ``nearest`` takes
    the highest open string whose pitch does not exceed ``pitch``.
    """
    if not 0 <= pitch <= 127:
        raise ValueError(f"pitch {pitch} outside MIDI range")
    mode = PitchMode(mode)
    if mode is PitchMode.STRICT:
        for p, s in _BY_PITCH:
            if p == pitch:
                return s
        raise NotOpenString(pitch)
    best = None
    for p, s in _BY_PITCH:
        if p <= pitch:
            best = s
    if best is None:
        raise BelowRange(pitch)
    return best


def monophonic(events: Sequence[RawNoteEvent]) -> list[tuple[int, int, int]]:
    """Reduce overlapping notes to a single voice.

    Returns ``(pitch, onset, end)`` tuples. A note still sounding when the
    next one starts is cut at that onset; notes cut to zero length are
    dropped with a warning.
    """
    ordered = sorted(events, key=lambda e: (e.onset_ticks, e.pitch, e.track))
    out = []
    for i, ev in enumerate(ordered):
        end = ev.offset_ticks
        if i + 1 < len(ordered):
            end = min(end, ordered[i + 1].onset_ticks)
        if end <= ev.onset_ticks:
            log.warning("dropping pitch %d at tick %d: overlapped by a simultaneous note",
                        ev.pitch, ev.onset_ticks)
            continue
        out.append((ev.pitch, ev.onset_ticks, end))
    return out


def parse_bowing_override(text: str) -> list[Bowing]:
    """Read whitespace-separated ``D``/``U`` tokens; ``#`` starts a comment."""
    bowings = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split("#", 1)[0].split():
            try:
                bowings.append(Bowing(tok.upper()))
            except ValueError:
                raise ParseFailure(lineno, f"bad bowing token {tok!r}, expected D or U") from None
    return bowings


def assign_bowings(notes: Sequence[NoteSpec], override: Sequence[Bowing | str] | None = None) -> NoteSequence:
    """Attach bowings: alternate starting with a down bow, or copy ``override``."""
    if not notes:
        raise ValueError("no notes to bow")
    if override is not None:
        if len(override) != len(notes):
            raise OverrideLengthMismatch(len(notes), len(override))
        bowed = [replace(n, bowing=Bowing(b)) for n, b in zip(notes, override)]
        return NoteSequence(tuple(bowed), bowings_overridden=True)
    bowed = []
    b = Bowing.DOWN
    for n in notes:
        bowed.append(replace(n, bowing=b))
        b = b.flipped
    return NoteSequence(tuple(bowed))


def build_notes(events: Iterable[RawNoteEvent], tempo: TempoMap,
                mode: PitchMode | str = PitchMode.STRICT) -> list[NoteSpec]:
    """Tempo-convert and string-map a monophonic reduction of ``events``.

    Bowings are left as down bows; run the result through ``assign_bowings``.
    """
    notes = []
    prev_end = None
    for pitch, onset, end in monophonic(list(events)):
        try:
            string = map_pitch_to_string(pitch, mode)
        except NotOpenString:
            raise NotOpenString(pitch, onset) from None
        except BelowRange:
            raise BelowRange(pitch, onset) from None
        rest = 0.0
        if prev_end is not None and onset > prev_end:
            rest = ticks_to_seconds(onset - prev_end, prev_end, tempo)
        notes.append(NoteSpec(
            string=string,
            duration_sec=ticks_to_seconds(end - onset, onset, tempo),
            bowing=Bowing.DOWN,
            pitch=pitch,
            rest_before_sec=rest,
        ))
        prev_end = end
    return notes


def load_score(data: bytes, mode: PitchMode | str = PitchMode.STRICT,
               override: Sequence[Bowing | str] | None = None) -> NoteSequence:
    events, tempo = parse_midi(data)
    notes = build_notes(events, tempo, mode)
    if not notes:
        raise InputFormatError("the MIDI file contains no playable notes")
    return assign_bowings(notes, override)


def ir_dump(seq: NoteSequence) -> str:
    """Tab-separated listing: index, note name, string, duration, bowing."""
    return "".join(
        f"{i}\t{n.note_name}\t{n.string.value}\t{n.duration_sec:.6f}\t{n.bowing.value}\n"
        for i, n in enumerate(seq.notes))
