import subprocess
import sys

import pytest

from bowmotion.cli import main
from bowmotion.kinematics import fk, load_arm_model, pose_error
from bowmotion.planner import parse_program
from bowmotion.resources import DEFAULT_ARM, DEFAULT_PRIMITIVES, corpus
from bowmotion.trace import read_csv

from conftest import sequential, write_midi

PRIMS = str(DEFAULT_PRIMITIVES)


@pytest.fixture
def four_notes(tmp_path):
    path = tmp_path / "four.mid"
    path.write_bytes(write_midi(sequential([(57, 480), (57, 480), (50, 960), (43, 480)])))
    return path


@pytest.fixture
def fingered(tmp_path):
    path = tmp_path / "fingered.mid"
    path.write_bytes(write_midi(sequential([(57, 480), (55, 480), (50, 480)])))
    return path


@pytest.fixture
def minute_score(tmp_path):
    # twenty whole bows of 3 s on the A string: exactly 60 s of program
    path = tmp_path / "minute.mid"
    path.write_bytes(write_midi(sequential([(57, 2880)] * 20)))
    return path


def run(argv, capsysbinary):
    code = main([str(a) for a in argv])
    out, err = capsysbinary.readouterr()
    return code, out, err.decode()


def test_inspect(four_notes, capsysbinary):
    code, out, _ = run(["inspect", four_notes], capsysbinary)
    lines = out.decode().splitlines()
    assert code == 0 and len(lines) == 4
    assert [ln.split("\t")[-1] for ln in lines] == ["D", "U", "D", "U"]


def test_inspect_strict_error(fingered, capsysbinary):
    code, out, err = run(["inspect", fingered], capsysbinary)
    assert code == 3 and out == b""
    assert "55" in err and "480" in err


def test_inspect_nearest(fingered, capsysbinary):
    code, out, _ = run(["inspect", fingered, "--map", "nearest"], capsysbinary)
    assert code == 0
    assert [ln.split("\t")[2] for ln in out.decode().splitlines()] == ["A", "D", "D"]


def test_compile_and_validate_chain(four_notes, tmp_path, capsysbinary):
    prog_path = tmp_path / "four.prog"
    assert run(["compile", four_notes, "--primitives", PRIMS, "--out", prog_path], capsysbinary)[0] == 0
    program = parse_program(prog_path.read_text())
    assert sum(c.kind.value == "Stroke" for c in program.commands) == 4
    trace = tmp_path / "four.csv"
    assert run(["simulate", prog_path, "--out", trace], capsysbinary)[0] == 0
    code, out, _ = run(["validate", trace, "--primitives", PRIMS, "--program", prog_path], capsysbinary)
    assert code == 0 and out.decode().rstrip().endswith("PASS")


def test_compile_missing_primitives(four_notes, tmp_path, capsysbinary):
    missing = tmp_path / "nowhere" / "prims.txt"
    code, _, err = run(["compile", four_notes, "--primitives", missing], capsysbinary)
    assert code == 2 and str(missing) in err


def test_compile_requires_primitives(four_notes):
    with pytest.raises(SystemExit) as exc:
        main(["compile", str(four_notes)])
    assert exc.value.code == 2


def test_compile_bowings_wrong_length(four_notes, tmp_path, capsysbinary):
    bowings = tmp_path / "bowings.txt"
    bowings.write_text("D U D\n")
    code, _, err = run(["compile", four_notes, "--primitives", PRIMS, "--bowings", bowings], capsysbinary)
    assert code == 3
    assert "4" in err and "3" in err


def test_compile_with_bowings(four_notes, tmp_path, capsysbinary):
    bowings = tmp_path / "bowings.txt"
    bowings.write_text("D D U U\n")
    code, out, _ = run(["compile", four_notes, "--primitives", PRIMS, "--bowings", bowings], capsysbinary)
    assert code == 0
    strokes = [c for c in parse_program(out.decode()).commands if c.kind.value == "Stroke"]
    assert strokes[3].bowing == "U"


def test_simulate_sixty_seconds(minute_score, capsysbinary):
    code, out, err = run(["simulate", minute_score, "--primitives", PRIMS, "--validate"], capsysbinary)
    assert code == 0, err
    assert len(read_csv(out)) == 6001
    assert "continuity  PASS" in err and err.rstrip().endswith("PASS")


def test_simulate_validate_failure(minute_score, tmp_path, capsysbinary):
    # a speed cap far above the validator limit makes crossings too fast
    path = tmp_path / "cross.mid"
    path.write_bytes(write_midi(sequential([(57, 480), (50, 480)])))
    code, _, err = run(["simulate", path, "--primitives", PRIMS, "--validate", "--speed", "50"],
                       capsysbinary)
    assert code == 1 and "continuity  FAIL" in err


def test_simulate_with_arm(four_notes, capsysbinary):
    code, out, _ = run(["simulate", four_notes, "--primitives", PRIMS, "--arm", DEFAULT_ARM, "--dt", "0.05"],
                       capsysbinary)
    assert code == 0
    model = load_arm_model(DEFAULT_ARM)
    rows = read_csv(out).rows
    assert all(any(abs(q) > 1e-3 for q in r.joints) for r in rows)
    # the CSV keeps 6 decimals, so compare at that precision
    worst = max(pose_error(r.pose, fk(r.joints, model))[0] for r in rows)
    assert worst <= 1e-4


def test_simulate_midi_needs_primitives(four_notes, capsysbinary):
    assert run(["simulate", four_notes], capsysbinary)[0] == 2


def test_simulate_bad_dt(four_notes, capsysbinary):
    assert run(["simulate", four_notes, "--primitives", PRIMS, "--dt", "0"], capsysbinary)[0] == 2


def test_simulate_garbage_input(tmp_path, capsysbinary):
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"\x00\xff\xfe nonsense")
    assert run(["simulate", junk], capsysbinary)[0] == 3


def test_validate_detects_fault(four_notes, tmp_path, capsysbinary):
    trace = tmp_path / "t.csv"
    run(["simulate", four_notes, "--primitives", PRIMS, "--out", trace], capsysbinary)
    lines = trace.read_text().splitlines()
    fields = lines[40].split(",")
    fields[12] = f"{float(fields[12]) + 0.05:.6f}"
    lines[40] = ",".join(fields)
    trace.write_text("\n".join(lines) + "\n")
    code, out, _ = run(["validate", trace, "--primitives", PRIMS], capsysbinary)
    assert code == 1 and "sample 39" in out.decode()


def test_validate_bad_schema(tmp_path, capsysbinary):
    trace = tmp_path / "bad.csv"
    trace.write_text("a,b,c\n")
    code, _, err = run(["validate", trace, "--primitives", PRIMS], capsysbinary)
    assert code == 3 and "line 1" in err


def test_stats(minute_score, tmp_path, capsysbinary):
    trace = tmp_path / "m.csv"
    run(["simulate", minute_score, "--primitives", PRIMS, "--out", trace], capsysbinary)
    code, out, _ = run(["stats", trace], capsysbinary)
    text = out.decode()
    assert code == 0 and "rows 6001" in text and "crossing_count 0" in text


@pytest.mark.parametrize("jobs", [1, 2])
def test_batch_compile(tmp_path, jobs, capsysbinary):
    outdir = tmp_path / f"out{jobs}"
    pieces = sorted(corpus().values())
    code, _, _ = run(["compile", *pieces, "--primitives", PRIMS, "--out", outdir, "--jobs", jobs],
                     capsysbinary)
    assert code == 0
    assert sorted(p.name for p in outdir.iterdir()) == sorted(p.stem + ".prog" for p in pieces)


def test_batch_matches_single(tmp_path, capsysbinary):
    piece = corpus()["minuet"]
    outdir = tmp_path / "batch"
    run(["compile", piece, corpus()["twinkle"], "--primitives", PRIMS, "--out", outdir, "--jobs", 2],
        capsysbinary)
    _, single, _ = run(["compile", piece, "--primitives", PRIMS], capsysbinary)
    assert (outdir / "minuet.prog").read_bytes() == single


def test_batch_needs_out_dir(capsysbinary):
    pieces = sorted(corpus().values())[:2]
    assert run(["compile", *pieces, "--primitives", PRIMS], capsysbinary)[0] == 2


def test_module_entry_point(four_notes):
    proc = subprocess.run([sys.executable, "-m", "bowmotion", "inspect", str(four_notes)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and len(proc.stdout.splitlines()) == 4
    assert proc.stderr == ""
