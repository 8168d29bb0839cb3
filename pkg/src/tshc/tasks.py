"""Task definitions and generators, feature recipes, control mirroring and
the trained-goal tuple store with nearest-setpoint lookup."""

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import wrap_angle
from .reward import Tolerances

VEHICLE = "vehicle"
PENDULUM = "pendulum"

# feature recipes
GOAL4 = "goal4"          # normalized goal differences (x, y, psi, v)
GOAL5 = "goal5"          # goal4 plus the previous raw steering output
PENDULUM4 = "pendulum4"  # normalized (p, p_dot, theta, theta_dot)

RECIPE_DIMS = {GOAL4: 4, GOAL5: 5, PENDULUM4: 4}

# only tolerance set published for vehicle tasks: 0.25 m, 1 deg, 5 km/h
DEFAULT_VEHICLE_TOL = Tolerances(0.25, math.radians(1.0), 5.0 / 3.6)
# pendulum success is angle-only: upright within 12 deg
DEFAULT_PENDULUM_TOL = Tolerances(1.0, math.radians(12.0), 1.0)

UPRIGHT = (0.0, 0.0, 0.0, 0.0)
HANGING = (0.0, 0.0, math.pi, 0.0)


@dataclass(frozen=True)
class Task:
    id: str
    env_kind: str
    z0: tuple
    z_goal: tuple
    tol: Tolerances
    feature_recipe: str
    t_max: int | None = None   # optional per-task horizon override
    t_goal: int | None = None  # optional per-task success-window override

    def __post_init__(self):
        if self.env_kind not in (VEHICLE, PENDULUM):
            raise ValueError(f"unknown env kind {self.env_kind!r}")
        if self.feature_recipe not in RECIPE_DIMS:
            raise ValueError(f"unknown feature recipe {self.feature_recipe!r}")
        z0 = tuple(float(v) for v in self.z0)
        z_goal = tuple(float(v) for v in self.z_goal)
        if len(z0) != 4 or len(z_goal) != 4:
            raise ValueError("z0 and z_goal must have 4 entries")
        if not (np.all(np.isfinite(z0)) and np.all(np.isfinite(z_goal))):
            raise ValueError("task states must be finite")
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "z_goal", z_goal)


@dataclass(frozen=True)
class GoalTuple:
    z_hat_goal: tuple  # achieved terminal state at training time
    z_goal: tuple      # commanded goal
    task_id: str = ""


@dataclass(frozen=True)
class VehicleNorm:
    dx: float = 20.0
    dy: float = 20.0
    dpsi: float = math.pi
    dv: float = 10.0


@dataclass(frozen=True)
class PendulumNorm:
    dp: float = 2.4
    dp_dot: float = 3.0
    dtheta: float = math.pi
    dtheta_dot: float = 4.0 * math.pi


def vehicle_features(x, y, psi, v, task: Task, norm: VehicleNorm, last_raw_steer=None):
    """Normalized goal-difference features; stacks arrays along the last axis."""
    gx, gy, gpsi, gv = task.z_goal
    cols = [(gx - x) / norm.dx,
            (gy - y) / norm.dy,
            wrap_angle(gpsi - psi) / norm.dpsi,
            (gv - v) / norm.dv]
    if task.feature_recipe == GOAL5:
        cols.append(last_raw_steer)
    return np.stack(np.broadcast_arrays(*cols), axis=-1)


def pendulum_features(p, p_dot, theta, theta_dot, norm: PendulumNorm):
    cols = [p / norm.dp, p_dot / norm.dp_dot, theta / norm.dtheta,
            theta_dot / norm.dtheta_dot]
    return np.stack(np.broadcast_arrays(*cols), axis=-1)


def feature_vector(state, task: Task, last_raw_steer: float = 0.0,
                   norm=None) -> np.ndarray:
    """Feature vector for a single state; recipe chosen by the task."""
    if task.env_kind == VEHICLE:
        norm = norm or VehicleNorm()
        return np.asarray(vehicle_features(state.x, state.y, state.psi, state.v_prev,
                                           task, norm, last_raw_steer), dtype=float)
    norm = norm or PendulumNorm()
    return np.asarray(pendulum_features(state.p, state.p_dot, state.theta,
                                        state.theta_dot, norm), dtype=float)


def mirror_features(features, recipe: str):
    """Reflect vehicle features about the x-axis: negate the y and heading
    differences and, for the 5-feature recipe, the previous raw steering."""
    out = np.array(features, dtype=float, copy=True)
    out[..., 1] = -out[..., 1]
    out[..., 2] = -out[..., 2]
    if recipe == GOAL5:
        out[..., 4] = -out[..., 4]
    return out


def mirror_control(control_raw):
    """Negate the raw steering channel; velocity channel unchanged."""
    out = np.array(control_raw, dtype=float, copy=True)
    out[..., 1] = -out[..., 1]
    return out


def mirror_goal(z_goal):
    x, y, psi, v = z_goal
    return (x, -y, float(wrap_angle(-psi)), v)


def mirror_task(task: Task) -> Task:
    """The x-axis reflection of a vehicle task."""
    if task.env_kind != VEHICLE:
        raise ValueError("mirroring applies to vehicle tasks only")
    x0, y0, psi0, v0 = task.z0
    return replace(task,
                   id=task.id + "~mirror",
                   z0=(x0, -y0, float(wrap_angle(-psi0)), v0),
                   z_goal=mirror_goal(task.z_goal))


def freeform_task(z0, z_goal, tol: Tolerances = DEFAULT_VEHICLE_TOL,
                  feature_recipe: str = GOAL4, task_id: str = "freeform") -> Task:
    return Task(task_id, VEHICLE, tuple(z0), tuple(z_goal), tol, feature_recipe)


def heading_grid(step_deg: float, max_deg: float,
                 tol: Tolerances = DEFAULT_VEHICLE_TOL) -> list:
    """Heading-change tasks from the origin: goal [0, 0, psi_goal, 0] for
    psi_goal in {0, step, 2*step, ..., max} degrees."""
    if not 0.0 < step_deg <= max_deg <= 180.0:
        raise ValueError("need 0 < step <= max <= 180 degrees")
    tasks = []
    n = int(math.floor(max_deg / step_deg + 1e-9))
    for k in range(n + 1):
        deg = k * step_deg
        tasks.append(Task(f"heading{deg:g}", VEHICLE,
                          (0.0, 0.0, 0.0, 0.0),
                          (0.0, 0.0, math.radians(deg), 0.0),
                          tol, GOAL5))
    return tasks


def pendulum_tasks(kind: str, tol: Tolerances = DEFAULT_PENDULUM_TOL,
                   t_goal: int | None = None) -> list:
    """Upright stabilization and/or swing-up tasks for the cart-pole."""
    stabilize = Task("stabilize", PENDULUM, UPRIGHT, UPRIGHT, tol, PENDULUM4,
                     t_goal=t_goal)
    swingup = Task("swingup", PENDULUM, HANGING, UPRIGHT, tol, PENDULUM4,
                   t_goal=t_goal)
    if kind == "stabilize":
        return [stabilize]
    if kind == "swingup":
        return [swingup]
    if kind == "both":
        return [stabilize, swingup]
    raise ValueError(f"unknown pendulum task kind {kind!r}")


# weighted distance used by the setpoint lookup: 1 per metre, 0.1 per degree
# of heading error, 1 per m/s
DEFAULT_LOOKUP_WEIGHTS = (1.0, 0.1 * 180.0 / math.pi, 1.0)


def nearest_goal_lookup(setpoint, store, weights=DEFAULT_LOOKUP_WEIGHTS) -> GoalTuple:
    """Stored tuple whose achieved goal is closest to the setpoint.

    Distance is w_d * e_d + w_psi * e_psi + w_v * e_v; ties resolve to the
    lowest index.
    """
    if not store:
        raise ValueError("goal-tuple store is empty")
    sx, sy, spsi, sv = (float(v) for v in setpoint)
    w_d, w_psi, w_v = weights
    best = None
    best_dist = math.inf
    for tup in store:
        hx, hy, hpsi, hv = tup.z_hat_goal
        dist = (w_d * math.hypot(hx - sx, hy - sy)
                + w_psi * abs(float(wrap_angle(hpsi - spsi)))
                + w_v * abs(hv - sv))
        if dist < best_dist:
            best, best_dist = tup, dist
    return best
