"""Regenerate the bundled open-string demo corpus.

The five pieces are synthetic stand-ins: open-string rhythm patterns shaped
like beginner cello repertoire (fast détaché, many string crossings, slow
long bows, a longer minuet with a tempo change). They are not
transcriptions of any published score.

Requires ``mido`` (dev dependency). Usage::

    python scripts/make_corpus.py [OUTDIR]
"""
import sys
from pathlib import Path

import mido

TPQ = 480
A, D, G, C = 57, 50, 43, 36
Q, E, S, H, W = TPQ, TPQ // 2, TPQ // 4, TPQ * 2, TPQ * 4
REST = None


def allegro():
    # quick eighths, mostly on one string per phrase
    phrase = [(A, E)] * 6 + [(A, Q)] + [(D, E)] * 6 + [(D, Q)]
    notes = phrase * 2 + [(A, E)] * 4 + [(D, E)] * 4 + [(A, H)]
    return notes, [(0, 500000)]


def perpetual_motion():
    # running eighths with frequent string changes (>= 22 crossings)
    bar = [(A, E), (A, E), (D, E), (D, E)]
    notes = []
    for _ in range(6):
        notes += bar
        notes += [(G, E), (G, E), (D, E), (D, E)]
    notes += [(A, Q), (REST, E), (D, E), (G, Q), (C, H)]
    return notes, [(0, 500000)]


def twinkle():
    # the "ta-ka-ta-ka-ta" pattern on A and D
    motif = [(A, S), (A, S), (A, E), (A, E)]
    notes = (motif + [(D, S), (D, S), (D, E), (D, E)]) * 4 + [(A, Q), (REST, Q), (D, H)]
    return notes, [(0, 600000)]


def minuet():
    bars = [
        [(D, Q), (G, E), (A, E), (D, Q)],
        [(A, Q), (REST, Q), (A, Q)],
        [(G, E), (G, E), (D, Q), (C, Q)],
        [(D, Q + E), (A, E), (D, Q)],
        [(C, H), (G, Q)],
        [(D, E), (A, E), (A, E), (D, E), (G, Q)],
    ]
    notes = [n for bar in bars * 3 for n in bar] + [(G, H + Q)]
    # slight ritardando in the last pass
    tempo_change_tick = sum(d for bar in bars * 2 for _, d in bar)
    return notes, [(0, 500000), (tempo_change_tick, 600000)]


def long_long_ago():
    notes = [(D, H), (D, Q), (G, Q), (G, W), (C, H + Q), (REST, Q),
             (G, H), (D, H), (D, W), (G, H), (C, H), (C, W)]
    return notes, [(0, 750000)]


PIECES = {
    "allegro": (allegro, 1),
    "perpetual_motion": (perpetual_motion, 1),
    "twinkle": (twinkle, 0),
    "minuet": (minuet, 1),
    "long_long_ago": (long_long_ago, 0),
}


def build(notes, tempos, fmt):
    mid = mido.MidiFile(type=fmt, ticks_per_beat=TPQ)
    meta = mido.MidiTrack()
    melody = mido.MidiTrack() if fmt == 1 else meta
    events = []  # (abs tick, order, message)
    for tick, tempo in tempos:
        events.append((tick, 0, mido.MetaMessage("set_tempo", tempo=tempo)))
    tick = 0
    for pitch, dur in notes:
        if pitch is not REST:
            events.append((tick, 2, mido.Message("note_on", note=pitch, velocity=80)))
            events.append((tick + dur, 1, mido.Message("note_off", note=pitch, velocity=0)))
        tick += dur
    if fmt == 1:
        meta_events = [e for e in events if e[1] == 0]
        note_events = [e for e in events if e[1] != 0]
        _emit(meta, meta_events)
        _emit(melody, note_events)
        mid.tracks += [meta, melody]
    else:
        _emit(meta, events)
        mid.tracks.append(meta)
    return mid


def _emit(track, events):
    last = 0
    for tick, _, msg in sorted(events, key=lambda e: (e[0], e[1])):
        track.append(msg.copy(time=tick - last))
        last = tick
    track.append(mido.MetaMessage("end_of_track", time=0))


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, (fn, fmt) in PIECES.items():
        notes, tempos = fn()
        build(notes, tempos, fmt).save(outdir / f"{name}.mid")
        print(f"{name}: {sum(1 for p, _ in notes if p is not REST)} notes")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else
         Path(__file__).resolve().parents[1] / "src" / "bowmotion" / "data" / "corpus")
