import struct
from fractions import Fraction

import mido
import pytest
from hypothesis import given, settings, strategies as st

from bowmotion.errors import MalformedFile, UnpairedNoteOn
from bowmotion.resources import corpus
from bowmotion.smf import RawNoteEvent, TempoMap, parse_midi, ticks_to_seconds

from conftest import write_midi


def chunk(kind, body):
    return kind + struct.pack(">I", len(body)) + body


def header(fmt=0, ntracks=1, tpq=480):
    return chunk(b"MThd", struct.pack(">HHH", fmt, ntracks, tpq))


def vlq(n):
    out = [n & 0x7F]
    n >>= 7
    while n:
        out.insert(0, (n & 0x7F) | 0x80)
        n >>= 7
    return bytes(out)


EOT = b"\x00\xff\x2f\x00"


def test_minimal_file_one_note():
    track = b"\x00\x90\x39\x50" + vlq(480) + b"\x80\x39\x00" + EOT
    events, tempo = parse_midi(header() + chunk(b"MTrk", track))
    assert events == [RawNoteEvent(57, 0, 480, 0)]
    assert tempo.ticks_per_quarter == 480
    assert tempo.entries == ((0, 500000),)


def test_empty_track_list_is_malformed():
    with pytest.raises(MalformedFile):
        parse_midi(header(ntracks=0))


@pytest.mark.parametrize("data", [
    b"",
    b"RIFF" + b"\x00" * 20,
    header()[:10],
    header() + b"MTrk\x00\x00\x00\x10\x00\x90",  # chunk overruns file
    header() + chunk(b"MTrk", b"\x00\x90\x39"),  # truncated message
    header() + chunk(b"MTrk", b"\x00\x39\x50" + EOT),  # data without running status
    header(fmt=2) + chunk(b"MTrk", EOT),
    chunk(b"MThd", struct.pack(">HHH", 0, 1, 0x8000 | 25 << 8 | 40)) + chunk(b"MTrk", EOT),
])
def test_malformed_inputs(data):
    with pytest.raises(MalformedFile):
        parse_midi(data)


def test_unpaired_note_on_rejected():
    track = b"\x00\x90\x39\x50" + vlq(480) + b"\x90\x32\x50" + vlq(10) + b"\x80\x32\x00" + EOT
    with pytest.raises(UnpairedNoteOn) as exc:
        parse_midi(header() + chunk(b"MTrk", track))
    assert exc.value.pitch == 57 and exc.value.onset_ticks == 0


def test_velocity_zero_is_note_off_and_running_status():
    # second note uses running status; offs are note-on with velocity 0
    track = (b"\x00\x90\x39\x50" + vlq(240) + b"\x39\x00"
             + b"\x00\x32\x50" + vlq(240) + b"\x32\x00" + EOT)
    events, _ = parse_midi(header() + chunk(b"MTrk", track))
    assert events == [RawNoteEvent(57, 0, 240, 0), RawNoteEvent(50, 240, 240, 0)]


def test_meta_and_sysex_skipped():
    track = (b"\x00\xff\x03\x04cell" + b"\x00\xf0\x03\x7e\x7f\xf7" + b"\x00\xb0\x07\x64"
             + b"\x00\xc0\x2a" + b"\x00\x90\x24\x40" + vlq(960) + b"\x80\x24\x40" + EOT)
    events, _ = parse_midi(header() + chunk(b"MTrk", track))
    assert events == [RawNoteEvent(36, 0, 960, 0)]


def test_unknown_chunks_ignored_and_percussion_dropped():
    track = (b"\x00\x99\x24\x40" + vlq(10) + b"\x89\x24\x40"
             + b"\x00\x90\x2b\x40" + vlq(10) + b"\x80\x2b\x40" + EOT)
    data = header() + chunk(b"XFIH", b"junk") + chunk(b"MTrk", track)
    events, _ = parse_midi(data)
    assert [e.pitch for e in events] == [43]


def test_overlapping_notes_both_emitted():
    data = write_midi([(57, 0, 480), (50, 240, 480)])
    events, _ = parse_midi(data)
    assert [(e.pitch, e.onset_ticks, e.duration_ticks) for e in events] == [(57, 0, 480), (50, 240, 480)]


def test_format1_merges_tracks_and_collects_tempo():
    data = write_midi([(57, 0, 480), (50, 480, 480)], tempos=((0, 400000), (480, 800000)), fmt=1)
    events, tempo = parse_midi(data)
    assert [e.track for e in events] == [1, 1]
    assert tempo.entries == ((0, 400000), (480, 800000))


# -- ticks_to_seconds ---------------------------------------------------------

def test_one_quarter_default_tempo():
    assert ticks_to_seconds(480, 0, TempoMap(ticks_per_quarter=480)) == 0.5


def test_zero_ticks():
    assert ticks_to_seconds(0, 123, TempoMap()) == 0.0


def test_interval_spanning_tempo_change():
    tempo = TempoMap(((0, 500000), (480, 250000)), 480)
    assert ticks_to_seconds(960, 0, tempo) == pytest.approx(0.75, abs=1e-12)
    assert ticks_to_seconds(240, 360, tempo) == pytest.approx(0.125 + 0.0625, abs=1e-12)


def test_default_tempo_inserted():
    assert TempoMap(((960, 250000),), 96).entries == ((0, 500000), (960, 250000))


tempo_maps = st.builds(
    lambda changes, tpq: TempoMap(tuple(changes), tpq),
    st.lists(st.tuples(st.integers(0, 5000), st.integers(100000, 2000000)), max_size=6),
    st.integers(24, 960),
)


@given(tempo_maps, st.integers(0, 6000), st.integers(0, 6000), st.integers(0, 6000))
def test_conversion_is_additive(tempo, at, a, b):
    whole = ticks_to_seconds(a + b, at, tempo)
    parts = ticks_to_seconds(a, at, tempo) + ticks_to_seconds(b, at + a, tempo)
    assert whole == pytest.approx(parts, abs=1e-9)


@given(tempo_maps, st.integers(0, 6000), st.integers(0, 6000))
def test_conversion_matches_tick_by_tick_sum(tempo, at, n):
    # brute-force oracle: add the tempo in force at each individual tick
    n = n % 800
    expected = sum(Fraction(tempo.tempo_at(k), 10**6 * tempo.ticks_per_quarter) for k in range(at, at + n))
    assert ticks_to_seconds(n, at, tempo) == pytest.approx(float(expected), abs=1e-12)


# -- cross-check against mido's own decoder ------------------------------------

def mido_notes(path):
    mid = mido.MidiFile(path)
    out = []
    for ti, track in enumerate(mid.tracks):
        tick, on = 0, {}
        for msg in track:
            tick += msg.time
            if msg.type == "note_on" and msg.velocity > 0:
                on[msg.note] = tick
            elif msg.type in ("note_off", "note_on"):
                start = on.pop(msg.note)
                out.append((start, msg.note, tick - start, ti))
    return sorted(out)


@pytest.mark.parametrize("name", sorted(corpus()))
def test_corpus_matches_mido(name):
    path = corpus()[name]
    events, _ = parse_midi(path.read_bytes())
    assert [(e.onset_ticks, e.pitch, e.duration_ticks, e.track) for e in events] == mido_notes(path)


@pytest.mark.parametrize("name", sorted(corpus()))
def test_corpus_length_matches_mido(name):
    path = corpus()[name]
    events, tempo = parse_midi(path.read_bytes())
    end = max(e.offset_ticks for e in events)
    assert ticks_to_seconds(end, 0, tempo) == pytest.approx(mido.MidiFile(path).length, abs=1e-9)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 127), st.integers(0, 2000), st.integers(1, 1000)),
                min_size=1, max_size=20))
def test_random_files_round_trip(notes):
    # keep one sounding note per pitch so pairing is unambiguous
    seen, unique = set(), []
    for p, on, d in notes:
        if p not in seen:
            seen.add(p)
            unique.append((p, on, d))
    events, _ = parse_midi(write_midi(unique, fmt=1))
    assert sorted((e.pitch, e.onset_ticks, e.duration_ticks) for e in events) == sorted(unique)
