"""MIDI score to cello bowing motion compiler, replay simulator and telemetry writer."""
from .errors import BowMotionError, ConfigError, InputFormatError
from .geometry import (OutOffset, Pose, StringPrimitives, apply_out_offset, bow_length,
                       bow_pose, fraction_from_frog, load_primitives, project_crossing)
from .kinematics import ArmModel, IKProvider, JointVector, NullProvider, fk, ik, load_arm_model
from .planner import (CommandKind, MotionCommand, MotionProgram, PlannerConfig,
                      compile_program, plan_crossing, plan_note, stroke_alpha, target_length)
from .replay import TrajectorySample, ValidationReport, simulate, validate
from .score import (Bowing, NoteSequence, NoteSpec, StringId, assign_bowings, load_score,
                    map_pitch_to_string)
from .smf import TempoMap, parse_midi, ticks_to_seconds
from .trace import read_csv, stats, write_csv

__version__ = "0.1.0"

__all__ = [
    "apply_out_offset",
    "ArmModel",
    "assign_bowings",
    "bow_length",
    "bow_pose",
    "Bowing",
    "BowMotionError",
    "CommandKind",
    "compile_program",
    "ConfigError",
    "fk",
    "fraction_from_frog",
    "ik",
    "IKProvider",
    "InputFormatError",
    "JointVector",
    "load_arm_model",
    "load_primitives",
    "load_score",
    "map_pitch_to_string",
    "MotionCommand",
    "MotionProgram",
    "NoteSequence",
    "NoteSpec",
    "NullProvider",
    "OutOffset",
    "parse_midi",
    "plan_crossing",
    "plan_note",
    "PlannerConfig",
    "Pose",
    "project_crossing",
    "read_csv",
    "simulate",
    "stats",
    "StringId",
    "StringPrimitives",
    "stroke_alpha",
    "target_length",
    "TempoMap",
    "ticks_to_seconds",
    "TrajectorySample",
    "validate",
    "ValidationReport",
    "write_csv",
]
