"""Forward/inverse kinematics for a six-joint serial arm.

Links follow the standard Denavit-Hartenberg convention,
``A_i = Rz(q_i + offset_i) Tz(d_i) Tx(a_i) Rx(alpha_i)``, with an optional
fixed tool transform after the last link. Inverse kinematics is damped
least squares on the 6-D pose error.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, JointLimitViolation, NoConvergence
from .geometry import Pose

log = logging.getLogger(__name__)

SMALL_ANGLE = 1e-7
POS_TOL = 1e-4  # metres
ROT_TOL = 1e-3  # radians


class JointVector(NamedTuple):
    q_base: float = 0.0
    q_shoulder: float = 0.0
    q_elbow: float = 0.0
    q_wrist1: float = 0.0
    q_wrist2: float = 0.0
    q_wrist3: float = 0.0


ZERO_JOINTS = JointVector()


# -- rotations ----------------------------------------------------------------

def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotvec_to_matrix(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    theta = float(np.linalg.norm(v))
    K = skew(v)
    if theta < SMALL_ANGLE:
        return np.eye(3) + K + 0.5 * K @ K
    return (np.eye(3) + (math.sin(theta) / theta) * K
            + ((1.0 - math.cos(theta)) / theta ** 2) * K @ K)


def matrix_to_rotvec(R) -> np.ndarray:
    """Rotation vector with norm in ``[0, pi]``, stable near 0 and pi."""
    R = np.asarray(R, dtype=float)
    # Shepperd: build the quaternion from its largest component
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    i = int(np.argmax([tr, R[0, 0], R[1, 1], R[2, 2]]))
    if i == 0:
        w = math.sqrt(1.0 + tr) / 2.0
        x = (R[2, 1] - R[1, 2]) / (4 * w)
        y = (R[0, 2] - R[2, 0]) / (4 * w)
        z = (R[1, 0] - R[0, 1]) / (4 * w)
    elif i == 1:
        x = math.sqrt(max(1.0 + 2 * R[0, 0] - tr, 0.0)) / 2.0
        w = (R[2, 1] - R[1, 2]) / (4 * x)
        y = (R[0, 1] + R[1, 0]) / (4 * x)
        z = (R[0, 2] + R[2, 0]) / (4 * x)
    elif i == 2:
        y = math.sqrt(max(1.0 + 2 * R[1, 1] - tr, 0.0)) / 2.0
        w = (R[0, 2] - R[2, 0]) / (4 * y)
        x = (R[0, 1] + R[1, 0]) / (4 * y)
        z = (R[1, 2] + R[2, 1]) / (4 * y)
    else:
        z = math.sqrt(max(1.0 + 2 * R[2, 2] - tr, 0.0)) / 2.0
        w = (R[1, 0] - R[0, 1]) / (4 * z)
        x = (R[0, 2] + R[2, 0]) / (4 * z)
        y = (R[1, 2] + R[2, 1]) / (4 * z)
    if w < 0:
        w, x, y, z = -w, -x, -y, -z
    s = math.sqrt(x * x + y * y + z * z)
    if s < SMALL_ANGLE / 2:
        # theta = 2*atan2(s, w) ~ 2*s/w for tiny s
        return np.array([x, y, z]) * (2.0 / w)
    theta = 2.0 * math.atan2(s, w)
    return np.array([x, y, z]) * (theta / s)


def rotation_angle_between(Ra, Rb) -> float:
    return float(np.linalg.norm(matrix_to_rotvec(np.asarray(Ra).T @ np.asarray(Rb))))


def pose_to_matrix(pose) -> np.ndarray:
    T = np.eye(4)
    T[:3, :3] = rotvec_to_matrix(pose[3:6])
    T[:3, 3] = pose[:3]
    return T


def matrix_to_pose(T) -> Pose:
    return Pose.from_parts(T[:3, 3], matrix_to_rotvec(T[:3, :3]))


def pose_error(target, actual) -> tuple[float, float]:
    """Positional distance and rotation angle between two poses."""
    Ta, Tb = pose_to_matrix(target), pose_to_matrix(actual)
    return (float(np.linalg.norm(Ta[:3, 3] - Tb[:3, 3])),
            rotation_angle_between(Ta[:3, :3], Tb[:3, :3]))


# -- arm model ----------------------------------------------------------------

@dataclass(frozen=True)
class ArmModel:
    """Six DH rows ``(alpha, a, d, theta_offset)`` plus joint limits."""

    dh: tuple[tuple[float, float, float, float], ...]
    limits: tuple[tuple[float, float], ...] = ((-2 * math.pi, 2 * math.pi),) * 6
    tool: Pose = Pose(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    _tool_T: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dh = tuple(tuple(float(v) for v in row) for row in self.dh)
        limits = tuple((float(lo), float(hi)) for lo, hi in self.limits)
        if len(dh) != 6 or any(len(row) != 4 for row in dh):
            raise ValueError("arm model needs exactly six rows of four DH parameters")
        if len(limits) != 6 or any(not lo < hi for lo, hi in limits):
            raise ValueError("joint limits must be six ordered (low, high) pairs")
        object.__setattr__(self, "dh", dh)
        object.__setattr__(self, "limits", limits)
        object.__setattr__(self, "tool", Pose(*map(float, self.tool)))
        object.__setattr__(self, "_tool_T", pose_to_matrix(self.tool))

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.limits])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.limits])

    def within_limits(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.lower) and np.all(q <= self.upper))


# Universal Robots UR5e nominal DH parameters (flange, no tool).
UR5E = ArmModel(dh=(
    (math.pi / 2, 0.0, 0.1625, 0.0),
    (0.0, -0.425, 0.0, 0.0),
    (0.0, -0.3922, 0.0, 0.0),
    (math.pi / 2, 0.0, 0.1333, 0.0),
    (-math.pi / 2, 0.0, 0.0997, 0.0),
    (0.0, 0.0, 0.0996, 0.0),
))


def _link(alpha, a, d, theta) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def _frames(q, model: ArmModel) -> list[np.ndarray]:
    T = np.eye(4)
    frames = [T]
    for qi, (alpha, a, d, off) in zip(q, model.dh):
        T = T @ _link(alpha, a, d, qi + off)
        frames.append(T)
    return frames


def _check_limits(q, model):
    q = np.asarray(q, dtype=float)
    if q.shape != (6,):
        raise ValueError("expected six joint values")
    if not model.within_limits(q):
        raise JointLimitViolation(f"joint vector {np.round(q, 6).tolist()} outside limits")
    return q


def fk_matrix(q, model: ArmModel) -> np.ndarray:
    q = _check_limits(q, model)
    return _frames(q, model)[-1] @ model._tool_T


def fk(q, model: ArmModel) -> Pose:
    """Tool pose for joint vector ``q``; rotation as an axis-angle vector."""
    return matrix_to_pose(fk_matrix(q, model))


def jacobian(q, model: ArmModel) -> np.ndarray:
    """Geometric Jacobian (rows: linear velocity, angular velocity) at the tool."""
    q = _check_limits(q, model)
    frames = _frames(q, model)
    p_tool = (frames[-1] @ model._tool_T)[:3, 3]
    J = np.empty((6, 6))
    for i in range(6):
        z = frames[i][:3, 2]
        J[:3, i] = np.cross(z, p_tool - frames[i][:3, 3])
        J[3:, i] = z
    return J


def ik(target, seed, model: ArmModel, damping: float = 0.01, step_cap: float = 0.2,
       max_iter: int = 200, pos_tol: float = POS_TOL, rot_tol: float = ROT_TOL) -> JointVector:
    """Damped least-squares IK seeded at ``seed``.

    Iterates until the error is far inside the tolerances (or stops
    improving) and raises ``NoConvergence`` if the iteration cap is reached
    without meeting ``pos_tol``/``rot_tol``.
    """
    if not all(math.isfinite(v) for v in target):
        raise ValueError("target pose must be finite")
    q = _check_limits(seed, model).copy()
    T_goal = pose_to_matrix(target)
    lo, hi = model.lower, model.upper
    lam2 = damping ** 2
    fine_pos, fine_rot = pos_tol * 1e-3, rot_tol * 1e-3
    for _ in range(max_iter):
        T = _frames(q, model)[-1] @ model._tool_T
        e_pos = T_goal[:3, 3] - T[:3, 3]
        e_rot = matrix_to_rotvec(T_goal[:3, :3] @ T[:3, :3].T)
        if np.linalg.norm(e_pos) <= fine_pos and np.linalg.norm(e_rot) <= fine_rot:
            return JointVector(*q)
        J = jacobian(q, model)
        err = np.concatenate([e_pos, e_rot])
        dq = J.T @ np.linalg.solve(J @ J.T + lam2 * np.eye(6), err)
        biggest = float(np.max(np.abs(dq)))
        if biggest > step_cap:
            dq *= step_cap / biggest
        q = np.clip(q + dq, lo, hi)
    p_err, r_err = pose_error(target, matrix_to_pose(fk_matrix(q, model)))
    if p_err <= pos_tol and r_err <= rot_tol:
        return JointVector(*q)
    raise NoConvergence(f"IK stopped after {max_iter} iterations "
                        f"({p_err:.3g} m, {r_err:.3g} rad from target)")


def null_provider(target=None) -> JointVector:
    return ZERO_JOINTS


# -- providers used by the replay simulator --------------------------------------

class NullProvider:
    """Zero joints for every pose; keeps telemetry rows schema-complete."""

    def __init__(self):
        self.failures: list[tuple[int, str]] = []

    def reset(self):
        self.failures.clear()

    def __call__(self, pose) -> JointVector:
        return null_provider(pose)


class IKProvider:
    """Sequential IK chain seeded from the previous solution.

    The first solve also tries a fixed set of pseudo-random restarts. A pose
    that does not converge yields zero joints and is recorded in
    ``failures``; the chain seed is left unchanged.
    """

    def __init__(self, model: ArmModel, seed: Sequence[float] | None = None,
                 restarts: int = 64, **ik_options):
        self.model = model
        self.initial_seed = np.clip(np.zeros(6) if seed is None else np.asarray(seed, float),
                                    model.lower, model.upper)
        self.restarts = restarts
        self.ik_options = ik_options
        self.reset()

    def reset(self):
        self._seed = None
        self._calls = 0
        self.failures: list[tuple[int, str]] = []

    def _candidates(self):
        yield self.initial_seed
        rng = np.random.default_rng(0)
        lo = np.maximum(self.model.lower, -math.pi)
        hi = np.minimum(self.model.upper, math.pi)
        for _ in range(self.restarts):
            yield rng.uniform(lo, hi)

    def __call__(self, pose) -> JointVector:
        index = self._calls
        self._calls += 1
        seeds = [self._seed] if self._seed is not None else self._candidates()
        last = None
        for seed in seeds:
            try:
                q = ik(pose, seed, self.model, **self.ik_options)
            except NoConvergence as exc:
                last = exc
                continue
            self._seed = np.asarray(q)
            return q
        self.failures.append((index, str(last)))
        log.debug("IK fallback at call %d: %s", index, last)
        return ZERO_JOINTS


# -- config file ---------------------------------------------------------------

def parse_arm_model(text: str, source: str = "<string>") -> ArmModel:
    """Six lines ``alpha a d theta_offset q_low q_high``, plus an optional
    ``tool x y z rx ry rz`` line; ``#`` starts a comment."""
    rows, limits, tool = [], [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "tool":
                if len(parts) != 7:
                    raise ConfigError(f"{source}:{lineno}: tool needs 6 values")
                tool = Pose(*map(float, parts[1:]))
                continue
            if len(parts) != 6:
                raise ConfigError(f"{source}:{lineno}: expected 6 columns, got {len(parts)}")
            values = [float(v) for v in parts]
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
        rows.append(tuple(values[:4]))
        limits.append(tuple(values[4:]))
    try:
        return ArmModel(tuple(rows), tuple(limits), tool or Pose(0, 0, 0, 0, 0, 0))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_arm_model(path) -> ArmModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read arm model {path}: {exc.strerror}") from None
    return parse_arm_model(text, str(path))
