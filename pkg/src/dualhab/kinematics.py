"""Dual-arm kinematics: serial chains, IK solver modes, spline trajectories.

The robot base frame has x forward (along the heading), y to the robot's
left, z up.  Profile X1 solves each arm independently against a rotation +
translation target; profile H1 solves both arms from homogeneous targets with
velocity damping and a lateral balance bound on the end-effector midpoint.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import least_squares
from scipy.spatial.transform import Rotation

from .errors import (
    BalanceViolation,
    DimensionMismatch,
    LimitViolation,
    Unreachable,
)
from .world import PROFILES, ObjectInstance, RobotState, heading_vector

MAX_ITERS = 200
POS_TOL = 1e-4
ROT_TOL = 1e-3
SEED_PULL = 1e-8  # tiny pull regularizing redundant (position-only) solves
REFERENCE_PULL = 1e-3  # weight of the pull toward current+velocities (H1 mode)
BALANCE_BOUND = 0.3

TORSO_HEIGHT = {"Stand": 0.8, "Crouch": 0.45}
BAND_HEIGHT = {"low": 0.2, "counter": 0.6, "high": 1.1}

# Arm sectors: bearing measured counterclockwise from the heading, degrees.
LEFT_SECTOR = (-45.0, 135.0)
RIGHT_SECTOR = (-135.0, 45.0)


@dataclass(frozen=True)
class Pose:
    """Rotation (3x3 orthonormal) + translation in the robot base frame."""

    rotation: tuple
    translation: tuple

    @classmethod
    def from_matrices(cls, rotation, translation) -> "Pose":
        R = np.asarray(rotation, dtype=float)
        t = np.asarray(translation, dtype=float)
        if R.shape != (3, 3) or t.shape != (3,):
            raise DimensionMismatch("rotation must be 3x3 and translation length 3")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9) or abs(np.linalg.det(R) - 1) > 1e-9:
            raise ValueError("rotation is not orthonormal with det 1")
        return cls(tuple(map(tuple, R)), tuple(t))

    @property
    def R(self) -> np.ndarray:
        return np.asarray(self.rotation)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.translation)

    def homogeneous(self) -> np.ndarray:
        H = np.eye(4)
        H[:3, :3] = self.R
        H[:3, 3] = self.t
        return H

    @classmethod
    def from_homogeneous(cls, H) -> "Pose":
        H = np.asarray(H, dtype=float)
        if H.shape != (4, 4) or not np.allclose(H[3], [0, 0, 0, 1], atol=1e-9):
            raise DimensionMismatch("expected a 4x4 homogeneous matrix")
        return cls.from_matrices(H[:3, :3], H[:3, 3])


@dataclass(frozen=True)
class KinematicChain:
    axes: tuple  # per-joint rotation axis, unit 3-vectors in the local frame
    link_lengths: tuple
    joint_limits: tuple  # per-joint (lo, hi) radians
    base_offset: tuple  # torso frame -> shoulder translation

    @property
    def n_joints(self) -> int:
        return len(self.axes)

    @property
    def max_reach(self) -> float:
        return float(sum(self.link_lengths))

    def mirrored(self) -> "KinematicChain":
        """Reflection across the torso's xz-plane (left <-> right arm)."""
        M = np.diag([1.0, -1.0, 1.0])
        axes = tuple(tuple(M @ np.asarray(a)) for a in self.axes)
        base = tuple(M @ np.asarray(self.base_offset))
        return KinematicChain(axes, self.link_lengths, self.joint_limits, base)


def mirror_joints(joints) -> np.ndarray:
    """Joint mapping matching ``KinematicChain.mirrored``: all angles negate."""
    return -np.asarray(joints, dtype=float)


# Anthropomorphic 6R arm: shoulder yaw/pitch/roll, elbow pitch, wrist yaw/pitch.
_DEFAULT_AXES = ((0, 0, 1), (0, 1, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 0))
_DEFAULT_RATIOS = (0.10, 0.10, 0.25, 0.25, 0.15, 0.15)
_DEFAULT_LIMIT = np.pi


def default_chain(profile: str, side: str) -> KinematicChain:
    reach = PROFILES[profile]["reach_radius"]
    lengths = tuple(r * reach for r in _DEFAULT_RATIOS)
    limits = tuple((-_DEFAULT_LIMIT, _DEFAULT_LIMIT) for _ in _DEFAULT_AXES)
    right = KinematicChain(
        axes=_DEFAULT_AXES, link_lengths=lengths, joint_limits=limits,
        base_offset=(0.0, -0.15, 0.25),
    )
    return right.mirrored() if side == "Left" else right


def _check_limits(chain: KinematicChain, joints: np.ndarray) -> None:
    for i, (lo, hi) in enumerate(chain.joint_limits):
        if not (lo - 1e-12 <= joints[i] <= hi + 1e-12):
            raise LimitViolation(f"joint {i} = {joints[i]:.4f} outside [{lo}, {hi}]")


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    # Rodrigues' formula; axis is unit length by construction.
    x, y, z = axis
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def _log_rotation(R: np.ndarray) -> np.ndarray:
    """Rotation-vector logarithm (inverse of Rodrigues)."""
    cos = (np.trace(R) - 1.0) / 2.0
    cos = min(1.0, max(-1.0, cos))
    angle = float(np.arccos(cos))
    if angle < 1e-12:
        return np.zeros(3)
    if np.pi - angle < 1e-6:
        return Rotation.from_matrix(R).as_rotvec()
    axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return axis * (angle / (2.0 * np.sin(angle)))


@lru_cache(maxsize=32)
def _chain_arrays(chain: KinematicChain):
    """Precomputed per-joint arrays: local axes, skew matrices, link vectors."""
    axes = np.asarray(chain.axes, dtype=float)
    x, y, z = axes[:, 0], axes[:, 1], axes[:, 2]
    zero = np.zeros(len(axes))
    K = np.stack([
        np.stack([zero, -z, y], axis=-1),
        np.stack([z, zero, -x], axis=-1),
        np.stack([-y, x, zero], axis=-1),
    ], axis=1)
    K2 = K @ K
    links = np.zeros((chain.n_joints, 3))
    links[:, 0] = chain.link_lengths
    lo = np.array([l for l, _ in chain.joint_limits])
    hi = np.array([h for _, h in chain.joint_limits])
    base = np.asarray(chain.base_offset, dtype=float)
    return axes, K, K2, links, lo, hi, base


def _fk_frames(chain: KinematicChain, joints: np.ndarray):
    """World-frame joint origins, world-frame axes, and the end pose."""
    local_axes, K, K2, links, _, _, base = _chain_arrays(chain)
    rots = (np.eye(3)
            + np.sin(joints)[:, None, None] * K
            + (1.0 - np.cos(joints))[:, None, None] * K2)
    n = chain.n_joints
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    R = np.eye(3)
    p = base.copy()
    for i in range(n):
        origins[i] = p
        R = R @ rots[i]
        axes[i] = R @ local_axes[i]
        p = p + R @ links[i]
    return origins, axes, R, p


def forward_kinematics(chain: KinematicChain, joints) -> Pose:
    joints = np.asarray(joints, dtype=float)
    if joints.shape != (chain.n_joints,):
        raise DimensionMismatch(f"expected {chain.n_joints} joint angles")
    _check_limits(chain, joints)
    _, _, R, p = _fk_frames(chain, joints)
    return Pose.from_matrices(R, p)


def _jacobian(chain: KinematicChain, joints: np.ndarray) -> np.ndarray:
    origins, axes, _, p_end = _fk_frames(chain, joints)
    J = np.zeros((6, chain.n_joints))
    for i in range(chain.n_joints):
        J[:3, i] = np.cross(axes[i], p_end - origins[i])
        J[3:, i] = axes[i]
    return J


def _pose_error(chain, joints, target: Pose, position_only: bool):
    _, _, R, p = _fk_frames(chain, joints)
    e_p = target.t - p
    if position_only:
        return e_p, np.zeros(3)
    e_r = _log_rotation(target.R @ R.T)
    return e_p, e_r


def _wrap_toward(chain, q, q_ref):
    """Shift each angle by multiples of 2*pi toward q_ref, kept inside limits.

    A rotation about a fixed axis is 2*pi-periodic, so any in-limits
    representative of the same angle gives an identical pose.
    """
    _, _, _, _, lo, hi, _ = _chain_arrays(chain)
    wrapped = q - 2.0 * np.pi * np.round((q - q_ref) / (2.0 * np.pi))
    out_lo = wrapped < lo
    out_hi = wrapped > hi
    wrapped = np.where(out_lo, wrapped + 2.0 * np.pi, wrapped)
    wrapped = np.where(out_hi, wrapped - 2.0 * np.pi, wrapped)
    return wrapped


def _ik_residuals(chain, target: Pose, q, position_only: bool):
    _, _, R, p = _fk_frames(chain, q)
    e_p = p - target.t
    if position_only:
        return e_p, np.zeros(3)
    return e_p, _log_rotation(R @ target.R.T)


def _solve_arm(chain, target: Pose, q0, *, position_only=False, q_ref=None):
    """One Levenberg-Marquardt run from q0; returns (converged, joints).

    The solve runs unbounded and the answer is wrapped back into the joint
    limits afterwards, which is exact whenever each limit interval spans a
    full turn (the default chains do).  The pull rows keep the system
    overdetermined and bias redundant solutions toward ``q_ref``.
    """
    target_t = target.t
    target_R = target.R
    n = chain.n_joints

    def run(start, pull_to, pull_w):
        def fun(q):
            _, _, R, p = _fk_frames(chain, q)
            parts = [p - target_t]
            if not position_only:
                parts.append(_log_rotation(R @ target_R.T))
            parts.append(pull_w * (q - pull_to))
            return np.concatenate(parts)

        def jac(q):
            origins, axes, R, p_end = _fk_frames(chain, q)
            m = (3 if position_only else 6) + n
            J = np.zeros((m, n))
            J[:3] = np.cross(axes, p_end - origins).T
            if not position_only:
                J[3:6] = axes.T
            J[-n:] = pull_w * np.eye(n)
            return J

        return least_squares(fun, np.asarray(start, dtype=float), jac=jac,
                             method="lm", xtol=1e-12, ftol=1e-12, gtol=1e-12,
                             max_nfev=MAX_ITERS).x

    q0 = np.asarray(q0, dtype=float)
    anchor = np.asarray(q_ref, dtype=float) if q_ref is not None else q0
    if q_ref is not None:
        # Biased pass first: selects the solution branch nearest q_ref.
        q0 = run(q0, anchor, np.sqrt(REFERENCE_PULL))
    # Polish pass: the pull is weak enough to leave the pose residual far
    # below tolerance while keeping the system overdetermined.
    q = run(q0, anchor, np.sqrt(SEED_PULL))
    q = _wrap_toward(chain, q, anchor)
    _, _, _, _, lo, hi, _ = _chain_arrays(chain)
    e_p, e_r = _ik_residuals(chain, target, q, position_only)
    ok = (np.linalg.norm(e_p) <= POS_TOL
          and np.linalg.norm(e_r) <= ROT_TOL
          and bool(np.all(q >= lo - 1e-12)) and bool(np.all(q <= hi + 1e-12)))
    return ok, q


def _restart_seeds(chain: KinematicChain, target: Pose, count=30):
    """Deterministic fallback seeds derived from the target bytes (lazy)."""
    digest = hashlib.sha256(np.ascontiguousarray(target.homogeneous()).tobytes()).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    _, _, _, _, lo, hi, _ = _chain_arrays(chain)
    yield np.zeros(chain.n_joints)
    yield (lo + hi) / 2.0
    for _ in range(count):
        yield lo + rng.random(chain.n_joints) * (hi - lo)


def _check_reach_annulus(chain: KinematicChain, target: Pose) -> None:
    shoulder = np.asarray(chain.base_offset, dtype=float)
    if np.linalg.norm(target.t - shoulder) > chain.max_reach + 1e-9:
        raise Unreachable("target beyond total link length")


def solve_ik_decoupled(chain: KinematicChain, target: Pose, seed,
                       *, position_only: bool = False) -> np.ndarray:
    """X1-style single-arm IK against a rotation+translation target."""
    _check_reach_annulus(chain, target)
    seed = np.asarray(seed, dtype=float)
    for q0 in [seed, *_restart_seeds(chain, target)]:
        ok, q = _solve_arm(chain, target, q0, position_only=position_only)
        if ok:
            return q
    raise Unreachable("IK did not converge within the iteration budget")


def solve_ik_wholebody(left: KinematicChain, right: KinematicChain, targets,
                       current, velocities=None, *,
                       balance_bound: float = BALANCE_BOUND,
                       position_only: bool = False):
    """H1-style coupled solve from 4x4 homogeneous targets.

    ``targets`` and ``current`` are (left, right) pairs; the solution is
    damped toward current + velocities.
    """
    poses = []
    for tgt in targets:
        poses.append(tgt if isinstance(tgt, Pose) else Pose.from_homogeneous(tgt))
    for chain, pose in zip((left, right), poses):
        _check_reach_annulus(chain, pose)
    midpoint_y = (poses[0].t[1] + poses[1].t[1]) / 2.0
    if abs(midpoint_y) > balance_bound + 1e-12:
        raise BalanceViolation(
            f"end-effector midpoint lateral offset {midpoint_y:.3f} exceeds "
            f"{balance_bound}")
    if velocities is None:
        velocities = (np.zeros(left.n_joints), np.zeros(right.n_joints))
    solutions = []
    for chain, pose, q, dq in zip((left, right), poses, current, velocities):
        q = np.asarray(q, dtype=float)
        q_ref = q + np.asarray(dq, dtype=float)
        for q0 in [q, *_restart_seeds(chain, pose)]:
            ok, sol = _solve_arm(chain, pose, q0, position_only=position_only,
                                 q_ref=q_ref)
            if ok:
                solutions.append(sol)
                break
        else:
            raise Unreachable("IK did not converge within the iteration budget")
    return tuple(solutions)


# ---------------------------------------------------------------------------
# Trajectories


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple  # (n, n_joints) joint vectors
    knots: tuple  # interpolation times of the underlying spline knots

    def __len__(self):
        return len(self.waypoints)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.waypoints)


def interpolate_trajectory(start, goal, n: int, *, clamped: bool = False,
                           via=()) -> Trajectory:
    """Cubic-spline joint interpolation with n uniformly sampled waypoints.

    Natural boundary (zero second derivative) by default; ``clamped`` selects
    zero boundary velocity instead.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if start.shape != goal.shape:
        raise DimensionMismatch("start and goal joint vectors differ in length")
    if n < 2:
        raise ValueError("need at least 2 waypoints")
    configs = np.vstack([start, *[np.asarray(v, dtype=float) for v in via], goal])
    knots = np.linspace(0.0, 1.0, len(configs))
    zero = np.zeros(start.shape)
    bc = ((1, zero), (1, zero)) if clamped else "natural"
    if np.allclose(configs, configs[0]):
        waypoints = np.tile(start, (n, 1))
    else:
        spline = CubicSpline(knots, configs, axis=0, bc_type=bc)
        waypoints = spline(np.linspace(0.0, 1.0, n))
        waypoints[0] = start
        waypoints[-1] = goal
    return Trajectory(tuple(map(tuple, waypoints)), tuple(knots))


# ---------------------------------------------------------------------------
# Reachability predicate


def bearing_degrees(robot: RobotState, x: int, y: int) -> float:
    """Bearing of a cell relative to the robot heading, CCW-positive."""
    hx, hy = heading_vector(robot.heading)
    lx, ly = -hy, hx  # left-hand direction
    dx, dy = x - robot.x, y - robot.y
    if dx == 0 and dy == 0:
        return 0.0
    forward = hx * dx + hy * dy
    left = lx * dx + ly * dy
    return float(np.degrees(np.arctan2(left, forward)))


def check_reachable(robot: RobotState, side: str, obj: ObjectInstance) -> bool:
    dist = float(np.hypot(obj.x - robot.x, obj.y - robot.y))
    if dist > robot.reach_radius + 1e-12:
        return False
    beta = bearing_degrees(robot, obj.x, obj.y)
    lo, hi = LEFT_SECTOR if side == "Left" else RIGHT_SECTOR
    if not (lo - 1e-9 <= beta <= hi + 1e-9):
        return False
    if obj.band == "low" and robot.posture != "Crouch":
        return False
    if obj.band == "high" and robot.posture != "Stand":
        return False
    return True


def interaction_point(robot: RobotState, obj: ObjectInstance,
                      chain: KinematicChain) -> Pose:
    """Approach target for an object, clamped inside the chain's workspace.

    The contingency draw happens at a distance threshold, so the commanded
    point is the graspable approach point along the bearing to the object,
    not the object anchor itself.
    """
    hx, hy = heading_vector(robot.heading)
    lx, ly = -hy, hx
    dx, dy = obj.x - robot.x, obj.y - robot.y
    forward = hx * dx + hy * dy
    left = lx * dx + ly * dy
    z = BAND_HEIGHT[obj.band] - TORSO_HEIGHT[robot.posture]
    p = np.array([float(forward), float(left), z])
    shoulder = np.asarray(chain.base_offset, dtype=float)
    v = p - shoulder
    norm = np.linalg.norm(v)
    hi = 0.85 * chain.max_reach
    lo = 0.25 * chain.max_reach
    if norm > hi:
        v = v * (hi / norm)
    elif norm < lo:
        v = v * (lo / max(norm, 1e-9)) if norm > 0 else np.array([lo, 0.0, 0.0])
    return Pose.from_matrices(np.eye(3), shoulder + v)
