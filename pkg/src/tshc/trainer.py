"""Hill-climbing trainer: restart loop, Gaussian perturbation fan-out,
per-task rollouts, candidate selection, perturbation-scale adaptation and
the greedy parameter move.

All candidates of one iteration are evaluated in lockstep with batched
numpy; every batch lane is independent, so splitting the fan-out across
worker processes cannot change the result.  Candidate noise is derived
from a counter-based sub-seed (seed, restart, iteration, candidate),
which makes runs reproducible for any worker count.
"""

import time
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import tasks as tasklib
from .policy import MlpSpec, forward_layers, init_params, param_count, unflatten

SIGMA_CONSTANT = "constant"
SIGMA_RANDOM_RESTART = "random-per-restart"
SIGMA_RANDOM_ITER = "random-per-iter"
SIGMA_ADAPTIVE = "adaptive"
SIGMA_MODES = (SIGMA_CONSTANT, SIGMA_RANDOM_RESTART, SIGMA_RANDOM_ITER, SIGMA_ADAPTIVE)

# namespaces for the counter-based seed streams
_SEED_INIT = 0
_SEED_SIGMA = 1
_SEED_PERTURB = 2


@dataclass(frozen=True)
class TshcConfig:
    n_restarts: int
    n_iter_max: int
    n_candidates: int
    t_max: int
    t_goal: int = 1
    beta: float = 2.0
    sigma_min: float = 0.01
    sigma_max: float = 10.0
    sigma_mode: str = SIGMA_ADAPTIVE
    refine: bool = False
    seed: int = 0
    workers: int = 1
    rich_weights: tuple | None = None

    def __post_init__(self):
        if min(self.n_restarts, self.n_iter_max, self.n_candidates, self.t_max) < 1:
            raise ValueError("iteration counts and horizon must be positive")
        if self.t_goal < 1:
            raise ValueError("t_goal must be >= 1")
        if self.beta <= 1.0:
            raise ValueError("beta must be > 1")
        if not 0.0 < self.sigma_min <= self.sigma_max:
            raise ValueError("need 0 < sigma_min <= sigma_max")
        if self.sigma_mode not in SIGMA_MODES:
            raise ValueError(f"unknown sigma mode {self.sigma_mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class RolloutResult:
    success: int
    pathlength: float
    reward: float
    crashed: bool
    steps: int
    trajectory: list | None = None
    terminal: tuple | None = None


@dataclass(frozen=True)
class CandidateScore:
    n_solved: int
    pathlength: float
    reward: float
    crashed: bool


@dataclass
class BestSolution:
    theta: np.ndarray | None = None
    n_solved: int = 0
    pathlength: float | None = None  # set only once all tasks are solved
    reward: float = float("-inf")  # unset; any finite candidate improves on it
    restart: int | None = None
    iteration: int | None = None


@dataclass(frozen=True)
class IterationRecord:
    restart: int
    iteration: int
    sigma: float
    n_solved: int
    pathlength: float
    reward: float
    crashed: bool
    improved: bool
    wall_time: float


def batch_rollout(thetas, spec: MlpSpec, task, env, t_max, t_goal,
                  rich_weights=None, record=False, mirror=False):
    """Simulate one task for a batch of parameter vectors in lockstep.

    Returns (success, pathlength, reward, crashed, steps, trajectory,
    terminal states dict).  ``record`` collects the lane-0 trajectory and
    requires a batch of one.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    n = thetas.shape[0]
    if record and n != 1:
        raise ValueError("trajectory recording needs a batch of one")
    layers = unflatten(thetas, spec)
    S = env.init_arrays(task, n)
    last_raw = np.zeros(n)
    run = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    success = np.zeros(n, dtype=np.int64)
    P = np.zeros(n)
    J = np.zeros(n)
    crashed = np.zeros(n, dtype=bool)
    steps = np.zeros(n, dtype=np.int64)
    trajectory = [] if record else None
    for t in range(t_max):
        goal = env.goal_mask(S, task)
        run = np.where(goal, run + 1, 0)
        if rich_weights is None:
            r_now = -1.0
        else:
            r_now = env.rich_values(S, task, rich_weights)
        done = active & (run >= t_goal)
        if done.any():
            # the success-step reward is collected before the break
            J = np.where(done, J + r_now, J)
            success = np.where(done, 1, success)
            active &= ~done
            if not active.any():
                break
        feats = env.features_arrays(S, task, last_raw)
        if mirror:
            feats = tasklib.mirror_features(feats, task.feature_recipe)
        raw = forward_layers(layers, feats)
        if mirror:
            raw = tasklib.mirror_control(raw)
        S_next, controls, dp, crash = env.apply_arrays(S, raw, task)
        P = np.where(active, P + dp, P)
        J = np.where(active, J + r_now, J)
        crashed |= active & crash
        steps = np.where(active, t + 1, steps)
        if record and bool(active[0]):
            # pose before the step plus the control applied when leaving it
            state_part = env.terminal_state(S, 0)[:5 - env.control_dim]
            trajectory.append((t,) + state_part
                              + tuple(float(c) for c in np.atleast_2d(controls)[0]))
        for k in S:
            S[k] = np.where(active, S_next[k], S[k])
        last_raw = np.where(active, raw[..., -1], last_raw)
        active &= ~crash
        if not active.any():
            break
    return success, P, J, crashed, steps, trajectory, S


def rollout(theta, task, env, spec: MlpSpec, t_max, t_goal=1,
            rich_weights=None, record=False, mirror=False) -> RolloutResult:
    """Single-candidate rollout; optionally records the trajectory."""
    t_max = task.t_max or t_max
    t_goal = task.t_goal or t_goal
    success, P, J, crashed, steps, trajectory, S = batch_rollout(
        theta, spec, task, env, t_max, t_goal,
        rich_weights=rich_weights, record=record, mirror=mirror)
    terminal = env.terminal_state(S, 0)
    if record:
        trajectory = list(trajectory)
        pad = (trajectory[-1][-env.control_dim:] if trajectory
               else (0.0,) * env.control_dim)
        trajectory.append((int(steps[0]),) + terminal[:5 - env.control_dim] + tuple(pad))
    return RolloutResult(int(success[0]), float(P[0]), float(J[0]),
                         bool(crashed[0]), int(steps[0]),
                         trajectory if record else None, terminal)


def evaluate_batch(thetas, task_list, env, spec, t_max, t_goal,
                   rich_weights=None):
    """CandidateScore per batch row, summed over all tasks."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    n = thetas.shape[0]
    n_solved = np.zeros(n, dtype=np.int64)
    P = np.zeros(n)
    J = np.zeros(n)
    crashed = np.zeros(n, dtype=bool)
    for task in task_list:
        s, p, j, c, _, _, _ = batch_rollout(
            thetas, spec, task, env, task.t_max or t_max, task.t_goal or t_goal,
            rich_weights=rich_weights)
        n_solved += s
        P += p
        J += j
        crashed |= c
    return [CandidateScore(int(n_solved[i]), float(P[i]), float(J[i]),
                           bool(crashed[i])) for i in range(n)]


def evaluate_candidate(theta, task_list, env, spec, t_max, t_goal=1,
                       rich_weights=None) -> CandidateScore:
    return evaluate_batch(theta, task_list, env, spec, t_max, t_goal,
                          rich_weights=rich_weights)[0]


def _subseed(seed, *key):
    return np.random.SeedSequence(entropy=seed, spawn_key=key)


def candidate_theta(theta, sigma, seed, restart, iteration, index):
    """Reconstruct candidate ``index`` of one fan-out from its counter seed."""
    rng = np.random.default_rng(_subseed(seed, _SEED_PERTURB, restart, iteration, index))
    return theta + sigma * rng.standard_normal(theta.shape[0])


def _eval_chunk(theta, sigma, seed, restart, iteration, lo, hi,
                task_list, env, spec, t_max, t_goal, rich_weights):
    thetas = np.empty((hi - lo, theta.shape[0]))
    for j, i in enumerate(range(lo, hi)):
        thetas[j] = candidate_theta(theta, sigma, seed, restart, iteration, i)
    return evaluate_batch(thetas, task_list, env, spec, t_max, t_goal,
                          rich_weights=rich_weights)


def _j_key(n_solved, pathlength, reward, crashed):
    # crash sentinel orders below every finite value; among crashed
    # candidates compare task count, then pathlength
    if crashed:
        return (0, n_solved, pathlength)
    return (1, reward, 0.0)


def select_best(scores, current_best: BestSolution, n_tasks, thetas=None):
    """Candidate choice and global-best update of one fan-out.

    Returns (i_star, updated best, n_tasks_star).  If any candidate solves
    all tasks the winner maximizes pathlength among full solvers and the
    global best improves on a strictly better pathlength; otherwise the
    winner maximizes accumulated reward and the global best improves only
    while no full solution has ever been recorded.  Ties keep the lowest
    candidate index.
    """
    if not scores:
        raise ValueError("scores must be non-empty")
    best = current_best
    full = [i for i, s in enumerate(scores) if s.n_solved == n_tasks]
    if full:
        i_star = full[0]
        for i in full[1:]:
            if scores[i].pathlength > scores[i_star].pathlength:
                i_star = i
        s = scores[i_star]
        if best.pathlength is None or s.pathlength > best.pathlength:
            best = BestSolution(
                theta=None if thetas is None else np.array(thetas[i_star]),
                n_solved=n_tasks, pathlength=s.pathlength, reward=s.reward)
    else:
        i_star = 0
        for i in range(1, len(scores)):
            a, b = scores[i], scores[i_star]
            if _j_key(a.n_solved, a.pathlength, a.reward, a.crashed) > \
               _j_key(b.n_solved, b.pathlength, b.reward, b.crashed):
                i_star = i
        s = scores[i_star]
        if best.pathlength is None and \
           _j_key(s.n_solved, s.pathlength, s.reward, s.crashed) > \
           _j_key(best.n_solved, 0.0, best.reward, False):
            best = BestSolution(
                theta=None if thetas is None else np.array(thetas[i_star]),
                n_solved=s.n_solved, pathlength=None, reward=s.reward)
    return i_star, best, scores[i_star].n_solved


def adapt_sigma(sigma, n_new, n_old, beta, sigma_min, sigma_max):
    """Shrink on progress, grow on regression, clamp to [min, max]."""
    if n_new > n_old:
        return max(sigma / beta, sigma_min)
    if n_new < n_old:
        return min(sigma * beta, sigma_max)
    return sigma


def draw_sigma(mode, rng, sigma_min, sigma_max):
    if mode == SIGMA_CONSTANT:
        return sigma_max
    if mode in (SIGMA_RANDOM_RESTART, SIGMA_RANDOM_ITER):
        return float(rng.uniform(sigma_min, sigma_max))
    return sigma_max  # adaptive starts from the top of the range


def tshc_run(cfg: TshcConfig, task_list, env, policy_spec: MlpSpec,
             on_iteration=None, on_improved=None):
    """Full training run; returns (BestSolution, list of IterationRecord)."""
    if not task_list:
        raise ValueError("at least one training task is required")
    for task in task_list:
        if env.feature_dim(task) != policy_spec.input_dim:
            raise ValueError(
                f"task {task.id!r} produces {env.feature_dim(task)} features, "
                f"policy expects {policy_spec.input_dim}")
    if policy_spec.output_dim != env.control_dim:
        raise ValueError(
            f"policy outputs {policy_spec.output_dim} channels, "
            f"environment needs {env.control_dim}")
    n_tasks = len(task_list)
    best = BestSolution()
    history = []
    pool = None
    ctx = get_context("fork")
    if cfg.workers > 1:
        pool = ctx.Pool(cfg.workers)
    t0 = time.monotonic()
    try:
        for restart in range(1, cfg.n_restarts + 1):
            theta = init_params(policy_spec,
                                np.random.default_rng(_subseed(cfg.seed, _SEED_INIT, restart)))
            sigma = draw_sigma(cfg.sigma_mode,
                               np.random.default_rng(_subseed(cfg.seed, _SEED_SIGMA, restart)),
                               cfg.sigma_min, cfg.sigma_max)
            n_old = 0
            for iteration in range(1, cfg.n_iter_max + 1):
                if cfg.sigma_mode == SIGMA_RANDOM_ITER:
                    sigma = draw_sigma(
                        cfg.sigma_mode,
                        np.random.default_rng(_subseed(cfg.seed, _SEED_SIGMA, restart, iteration)),
                        cfg.sigma_min, cfg.sigma_max)
                scores = _fan_out(pool, cfg, theta, sigma, restart, iteration,
                                  task_list, env, policy_spec)
                prev_best = best
                i_star, best, n_star = select_best(scores, best, n_tasks)
                improved = best is not prev_best
                theta = candidate_theta(theta, sigma, cfg.seed, restart, iteration, i_star)
                if improved:
                    best.theta = theta.copy()
                    best.restart = restart
                    best.iteration = iteration
                    if on_improved is not None:
                        on_improved(best)
                record = IterationRecord(
                    restart, iteration, float(sigma), n_star,
                    scores[i_star].pathlength, scores[i_star].reward,
                    scores[i_star].crashed, improved,
                    time.monotonic() - t0)
                history.append(record)
                if on_iteration is not None:
                    on_iteration(record)
                if cfg.sigma_mode == SIGMA_ADAPTIVE:
                    sigma = adapt_sigma(sigma, n_star, n_old, cfg.beta,
                                        cfg.sigma_min, cfg.sigma_max)
                n_old = n_star
                if not cfg.refine and n_star == n_tasks:
                    break  # no refinement step
            if not cfg.refine and best.n_solved == n_tasks:
                break  # terminate on the first full solution, no extra restart
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return best, history


def _fan_out(pool, cfg, theta, sigma, restart, iteration, task_list, env, spec):
    args = (theta, sigma, cfg.seed, restart, iteration)
    static = (task_list, env, spec, cfg.t_max, cfg.t_goal, cfg.rich_weights)
    n = cfg.n_candidates
    if pool is None:
        return _eval_chunk(*args, 0, n, *static)
    bounds = np.linspace(0, n, min(cfg.workers, n) + 1, dtype=int)
    jobs = [args + (int(lo), int(hi)) + static
            for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    scores = []
    for chunk in pool.starmap(_eval_chunk, jobs):
        scores.extend(chunk)
    return scores
