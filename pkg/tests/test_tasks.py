import math

import numpy as np
import pytest

from tshc.dynamics import VehicleState, wrap_angle
from tshc.reward import Tolerances
from tshc.tasks import (GOAL4, GOAL5, PENDULUM4, GoalTuple, PendulumNorm, Task,
                        VEHICLE, VehicleNorm, feature_vector, freeform_task,
                        heading_grid, mirror_control, mirror_features,
                        mirror_goal, mirror_task, nearest_goal_lookup,
                        pendulum_tasks)

TOL = Tolerances(0.25, math.radians(1.0), 5.0 / 3.6)


# ----------------------------------------------------------------- Task type

def test_task_validation():
    with pytest.raises(ValueError):
        Task("t", "boat", (0,) * 4, (0,) * 4, TOL, GOAL4)
    with pytest.raises(ValueError):
        Task("t", VEHICLE, (0,) * 3, (0,) * 4, TOL, GOAL4)
    with pytest.raises(ValueError):
        Task("t", VEHICLE, (0, 0, 0, math.inf), (0,) * 4, TOL, GOAL4)
    with pytest.raises(ValueError):
        Task("t", VEHICLE, (0,) * 4, (0,) * 4, TOL, "bogus")


def test_freeform_task_defaults():
    t = freeform_task((0, 0, 0, 0), (20, 0, math.pi / 4, 0))
    assert t.env_kind == VEHICLE and t.feature_recipe == GOAL4
    assert t.z_goal[2] == pytest.approx(math.pi / 4)


# ------------------------------------------------------------------ features

def test_goal4_features_hand_value():
    t = freeform_task((0, 0, 0, 0), (20.0, 10.0, math.pi / 2, 5.0))
    s = VehicleState(10.0, 5.0, 0.0, 2.5)
    f = feature_vector(s, t, norm=VehicleNorm())
    assert np.allclose(f, [0.5, 0.25, 0.5, 0.25], atol=1e-15)


def test_goal5_features_append_last_raw_steer():
    t = heading_grid(10, 90)[3]
    s = VehicleState(0.0, 0.0, 0.0, 0.0)
    f = feature_vector(s, t, last_raw_steer=0.7)
    assert f.shape == (5,)
    assert f[4] == 0.7
    assert f[2] == pytest.approx(math.radians(30) / math.pi)


def test_feature_heading_difference_wraps():
    t = freeform_task((0, 0, 0, 0), (0.0, 0.0, math.radians(170), 0.0))
    s = VehicleState(0.0, 0.0, math.radians(-170), 0.0)
    f = feature_vector(s, t)
    # shortest signed difference is -20 deg, not +340 deg
    assert f[2] == pytest.approx(math.radians(-20) / math.pi)


def test_pendulum_features_hand_value():
    t = pendulum_tasks("stabilize")[0]
    from tshc.dynamics import PendulumState
    s = PendulumState(1.2, 1.5, math.pi / 2, 2.0 * math.pi)
    f = feature_vector(s, t, norm=PendulumNorm())
    assert np.allclose(f, [0.5, 0.5, 0.5, 0.5], atol=1e-15)


# ----------------------------------------------------------------- mirroring

def test_mirror_features_negates_lateral_terms():
    f = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    m = mirror_features(f, GOAL5)
    assert np.allclose(m, [0.1, -0.2, -0.3, 0.4, -0.5])
    m4 = mirror_features(np.array([0.1, 0.2, 0.3, 0.4]), GOAL4)
    assert np.allclose(m4, [0.1, -0.2, -0.3, 0.4])


def test_mirror_features_is_involution():
    f = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    assert np.array_equal(mirror_features(mirror_features(f, GOAL5), GOAL5), f)


def test_mirror_control_negates_steering_only():
    raw = np.array([0.3, -0.8])
    m = mirror_control(raw)
    assert m[0] == 0.3 and m[1] == 0.8
    assert np.array_equal(mirror_control(m), raw)


def test_mirror_goal_and_task():
    g = mirror_goal((1.0, 2.0, 0.5, 3.0))
    assert g == (1.0, -2.0, -0.5, 3.0)
    # pi maps to itself under wrapping
    assert mirror_goal((0.0, 0.0, math.pi, 0.0))[2] == math.pi
    t = heading_grid(10, 90)[4]
    m = mirror_task(t)
    assert m.z_goal[2] == pytest.approx(-t.z_goal[2])
    assert m.id.endswith("~mirror")
    with pytest.raises(ValueError):
        mirror_task(pendulum_tasks("stabilize")[0])


# -------------------------------------------------------------- heading_grid

def test_heading_grid_layout():
    tasks = heading_grid(10, 90)
    assert len(tasks) == 10
    assert [t.id for t in tasks][:3] == ["heading0", "heading10", "heading20"]
    assert tasks[-1].z_goal == (0.0, 0.0, math.pi / 2, 0.0)
    for t in tasks:
        assert t.z0 == (0.0, 0.0, 0.0, 0.0)
        assert t.feature_recipe == GOAL5


def test_heading_grid_validation():
    with pytest.raises(ValueError):
        heading_grid(0, 90)
    with pytest.raises(ValueError):
        heading_grid(10, 200)


# ------------------------------------------------------------ pendulum tasks

def test_pendulum_task_sets():
    both = pendulum_tasks("both")
    assert [t.id for t in both] == ["stabilize", "swingup"]
    swing = pendulum_tasks("swingup", t_goal=50)[0]
    assert swing.z0[2] == math.pi and swing.z_goal[2] == 0.0
    assert swing.t_goal == 50
    assert swing.feature_recipe == PENDULUM4
    with pytest.raises(ValueError):
        pendulum_tasks("sideways")


# ------------------------------------------------------- nearest_goal_lookup

STORE = [
    GoalTuple((0.0, 0.0, 0.0, 0.0), (0.0, 0.0, 0.0, 0.0), "a"),
    GoalTuple((0.0, 0.0, math.radians(30), 0.0), (0.0, 0.0, math.radians(30), 0.0), "b"),
    GoalTuple((5.0, 0.0, 0.0, 0.0), (5.0, 0.0, 0.0, 0.0), "c"),
]


def test_lookup_exact_and_nearest():
    assert nearest_goal_lookup((0, 0, math.radians(30), 0), STORE).task_id == "b"
    assert nearest_goal_lookup((0, 0, math.radians(20), 0), STORE).task_id == "b"
    assert nearest_goal_lookup((4.0, 0, 0, 0), STORE).task_id == "c"


def test_lookup_weighted_tradeoff():
    # heading error costs 0.1 per degree, position 1 per metre; between
    # b = (0,0,30deg) and c = (5,0,0deg) the balance tips with the setpoint
    near_b = (2.0, 0.0, math.radians(28), 0.0)   # b: 2+0.2  c: 3+2.8
    near_c = (2.6, 0.0, 0.0, 0.0)                # b: 2.6+3  c: 2.4
    assert nearest_goal_lookup(near_b, STORE[1:]).task_id == "b"
    assert nearest_goal_lookup(near_c, STORE[1:]).task_id == "c"


def test_lookup_tie_resolves_to_lowest_index():
    store = [GoalTuple((1.0, 0, 0, 0), (1.0, 0, 0, 0), "first"),
             GoalTuple((-1.0, 0, 0, 0), (-1.0, 0, 0, 0), "second")]
    assert nearest_goal_lookup((0, 0, 0, 0), store).task_id == "first"


def test_lookup_empty_store_raises():
    with pytest.raises(ValueError):
        nearest_goal_lookup((0, 0, 0, 0), [])


def test_lookup_wraps_heading():
    store = [GoalTuple((0, 0, math.radians(350), 0), (0, 0, math.radians(350), 0), "wrap"),
             GoalTuple((0, 0, math.radians(90), 0), (0, 0, math.radians(90), 0), "far")]
    assert nearest_goal_lookup((0, 0, math.radians(-5), 0), store).task_id == "wrap"
