import io
import math

import mido
import numpy as np
import pytest

from bowmotion.geometry import OutOffset, Pose, StringPrimitives, load_primitives
from bowmotion.resources import DEFAULT_PRIMITIVES
from bowmotion.score import StringId

# reference A-string frog and tip waypoints (the default config carries them verbatim)
REF_FROG_A = Pose(0.3007, 0.7936, 0.0997, -1.5440, -2.3550, 1.3470)
REF_TIP_A = Pose(0.4342, 0.3790, 0.2700, -1.5440, -2.3550, 1.3470)


def write_midi(notes, tempos=((0, 500000),), tpq=480, fmt=0):
    """Test-only SMF writer built on mido.

    ``notes`` are ``(pitch, onset_ticks, duration_ticks)``; overlapping
    notes are allowed. Returns the file bytes.
    """
    events = [(t, 0, mido.MetaMessage("set_tempo", tempo=us)) for t, us in tempos]
    for pitch, onset, dur in notes:
        events.append((onset, 2, mido.Message("note_on", note=pitch, velocity=80)))
        events.append((onset + dur, 1, mido.Message("note_off", note=pitch, velocity=0)))
    mid = mido.MidiFile(type=fmt, ticks_per_beat=tpq)
    if fmt == 0:
        groups = [events]
    else:
        groups = [[e for e in events if e[1] == 0], [e for e in events if e[1] != 0]]
    for group in groups:
        track = mido.MidiTrack()
        last = 0
        for tick, _, msg in sorted(group, key=lambda e: (e[0], e[1])):
            track.append(msg.copy(time=tick - last))
            last = tick
        track.append(mido.MetaMessage("end_of_track", time=0))
        mid.tracks.append(track)
    buf = io.BytesIO()
    mid.save(file=buf)
    return buf.getvalue()


def sequential(pitches_durs, gap=0):
    """``(pitch, duration_ticks)`` list to back-to-back ``(pitch, onset, dur)``."""
    out, tick = [], 0
    for pitch, dur in pitches_durs:
        out.append((pitch, tick, dur))
        tick += dur + gap
    return out


def synthetic_primitives(spacing=0.04, length=0.5):
    """Four parallel, well separated bow lines with distinct rotations."""
    frog, tip = {}, {}
    for i, s in enumerate(StringId):
        rot = (0.1 * i, -0.2, 0.3 + 0.05 * i)
        base = np.array([0.4, 0.2 + spacing * i, 0.1 + 0.01 * i])
        direction = np.array([0.6, -0.8, 0.0]) * length
        frog[s] = Pose(*base, *rot)
        tip[s] = Pose(*(base + direction), *rot)
    return StringPrimitives(frog, tip, OutOffset())


@pytest.fixture(scope="session")
def prims():
    return load_primitives(DEFAULT_PRIMITIVES)


@pytest.fixture(scope="session")
def synth():
    return synthetic_primitives()


def bow_length_oracle(f, t):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(f[:3], t[:3])))
