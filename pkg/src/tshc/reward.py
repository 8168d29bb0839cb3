"""Sparse-reward machinery: goal flag, per-step reward, success integral,
pathlength score, virtual velocity constraints and the optional rich
squared-error reward.

Crashes are represented by a dedicated flag carried next to the finite
score, never by an IEEE infinity, so comparisons stay total and files
stay portable.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import wrap_angle

VVC_OFF = "off"
VVC_SPATIAL = "spatial"
VVC_CONSTANT = "constant-margin"


@dataclass(frozen=True)
class Tolerances:
    eps_d: float
    eps_psi: float
    eps_v: float

    def __post_init__(self):
        if min(self.eps_d, self.eps_psi, self.eps_v) <= 0.0:
            raise ValueError("tolerances must be strictly positive")


@dataclass(frozen=True)
class VvcConfig:
    mode: str = VVC_OFF
    r_thresh: float = 5.0
    margin: float = 5.0 / 3.6  # 5 km/h

    def __post_init__(self):
        if self.mode not in (VVC_OFF, VVC_SPATIAL, VVC_CONSTANT):
            raise ValueError(f"unknown VVC mode {self.mode!r}")
        if self.r_thresh <= 0.0:
            raise ValueError("r_thresh must be positive")
        if self.margin < 0.0:
            raise ValueError("margin must be non-negative")


@dataclass(frozen=True)
class Reward:
    value: float
    crashed: bool = False


def goal_errors(x, y, psi, v, goal):
    """Position, wrapped heading and velocity errors w.r.t. a (x, y, psi, v) goal."""
    e_d = np.hypot(goal[0] - x, goal[1] - y)
    e_psi = np.abs(wrap_angle(goal[2] - psi))
    e_v = np.abs(goal[3] - v)
    return e_d, e_psi, e_v


def goal_flag(state, goal, tol: Tolerances) -> int:
    """1 iff all three errors are strictly below tolerance (vehicle states)."""
    e_d, e_psi, e_v = goal_errors(state.x, state.y, state.psi, state.v_prev, goal)
    return int((e_d < tol.eps_d) and (e_psi < tol.eps_psi) and (e_v < tol.eps_v))


def sparse_reward(crash_flag) -> Reward:
    return Reward(-1.0, bool(crash_flag))


def success_integral(goal_flag_history, t_goal: int) -> int:
    """1 iff the last t_goal flags exist and are all 1."""
    if t_goal < 1:
        raise ValueError("t_goal must be >= 1")
    flags = list(goal_flag_history)
    if len(flags) < t_goal:
        return 0
    return int(all(f == 1 for f in flags[-t_goal:]))


def pathlength_delta(state_t, state_t1) -> float:
    """Negative Euclidean step length between consecutive poses."""
    return -float(np.hypot(state_t1.x - state_t.x, state_t1.y - state_t.y))


def vvc_bounds(e_d, v_goal, v_min, v_max, cfg: VvcConfig):
    """Velocity box valid at distance e_d from the goal; elementwise on arrays."""
    if cfg.mode == VVC_OFF:
        shape = np.shape(e_d)
        if shape:
            return np.full(shape, float(v_min)), np.full(shape, float(v_max))
        return float(v_min), float(v_max)
    if cfg.mode == VVC_SPATIAL:
        frac = np.minimum(e_d, cfg.r_thresh) / cfg.r_thresh
        lo = v_goal + (v_min - v_goal) * frac
        hi = v_goal + (v_max - v_goal) * frac
        lo = np.where(e_d >= cfg.r_thresh, v_min, lo)
        hi = np.where(e_d >= cfg.r_thresh, v_max, hi)
        return lo, hi
    # constant margin inside r_thresh, global bounds outside
    lo_in = np.maximum(v_goal - cfg.margin, v_min)
    hi_in = np.minimum(v_goal + cfg.margin, v_max)
    empty = lo_in > hi_in  # goal speed outside the global box: collapse
    if np.any(empty):
        point = np.clip(v_goal, v_min, v_max)
        lo_in = np.where(empty, point, lo_in)
        hi_in = np.where(empty, point, hi_in)
    far = e_d >= cfg.r_thresh
    return np.where(far, v_min, lo_in), np.where(far, v_max, hi_in)


def rich_reward(state_vec, ref_vec, weights, crash_flag) -> Reward:
    """Negated weighted sum of squared errors between state and reference."""
    z = np.asarray(state_vec, dtype=float)
    ref = np.asarray(ref_vec, dtype=float)
    alpha = np.asarray(weights, dtype=float)
    if np.any(alpha < 0.0):
        raise ValueError("rich-reward weights must be non-negative")
    return Reward(-float(np.sum(alpha * (z - ref) ** 2)), bool(crash_flag))
