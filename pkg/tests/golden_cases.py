"""Programs whose traces are pinned byte-for-byte under tests/golden."""
from pathlib import Path

from bowmotion.geometry import load_primitives
from bowmotion.kinematics import IKProvider, load_arm_model
from bowmotion.planner import CommandKind, MotionCommand, MotionProgram, compile_program
from bowmotion.replay import simulate
from bowmotion.resources import DEFAULT_ARM, DEFAULT_PRIMITIVES
from bowmotion.score import Bowing, NoteSpec, StringId, assign_bowings
from bowmotion.trace import write_csv

GOLDEN_DIR = Path(__file__).parent / "golden"


def _notes(*spec):
    return assign_bowings([NoteSpec(s, d, Bowing.DOWN, StringId(s).open_pitch) for s, d in spec])


def single_stroke():
    prims = load_primitives(DEFAULT_PRIMITIVES)
    return simulate(compile_program(_notes(("A", 1.0)), prims))


def crossing_a_d():
    prims = load_primitives(DEFAULT_PRIMITIVES)
    return simulate(compile_program(_notes(("A", 0.5), ("D", 0.5), ("A", 0.25)), prims))


def quoted_label():
    prims = load_primitives(DEFAULT_PRIMITIVES)
    a = StringId.A
    cmds = (
        MotionCommand(CommandKind.STROKE, prims.tip[a], 0.05, 0, "A3", "A", "D", 'bow,"legato"'),
        MotionCommand(CommandKind.HOLD, prims.tip[a], 0.03, label="hold"),
    )
    return simulate(MotionProgram(prims.frog[a], cmds))


def with_arm():
    prims = load_primitives(DEFAULT_PRIMITIVES)
    prog = compile_program(_notes(("A", 0.3), ("D", 0.3)), prims)
    return simulate(prog, 0.05, IKProvider(load_arm_model(DEFAULT_ARM)))


CASES = {f.__name__: f for f in (single_stroke, crossing_a_d, quoted_label, with_arm)}


def render(name) -> bytes:
    return write_csv(CASES[name]())


def regenerate():
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name in CASES:
        (GOLDEN_DIR / f"{name}.csv").write_bytes(render(name))
