"""Task-separated hill climbing: encode deterministic motion tasks into
small neural-network controllers without gradients."""

from .dynamics import (ActuatorLimits, Control, PendulumParams, PendulumState,
                       VehicleParams, VehicleState, clamp_controls, crash_check,
                       step_bicycle, step_pendulum, wrap_angle)
from .policy import MlpSpec, forward, init_params, param_count, perturb, scale_outputs
from .reward import (Reward, Tolerances, VvcConfig, goal_flag, pathlength_delta,
                     rich_reward, sparse_reward, success_integral, vvc_bounds)
from .tasks import (GoalTuple, Task, feature_vector, heading_grid, mirror_control,
                    mirror_task, nearest_goal_lookup, pendulum_tasks)
from .trainer import (BestSolution, CandidateScore, RolloutResult, TshcConfig,
                      adapt_sigma, draw_sigma, evaluate_candidate, rollout,
                      select_best, tshc_run)

__version__ = "0.1.0"
