"""Fully-connected tanh policy over a flat parameter vector.

The canonical flat ordering is layer by layer: the weight matrix in
row-major order, then the bias vector.  No autograd; parameters are only
ever sampled, perturbed and evaluated.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import ActuatorLimits, Control, intersect_interval, rate_limited_interval


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise ValueError("need at least input and output layer sizes")
        if any(n <= 0 for n in sizes):
            raise ValueError("layer sizes must be positive")

    @property
    def input_dim(self):
        return self.layer_sizes[0]

    @property
    def output_dim(self):
        return self.layer_sizes[-1]


def param_count(spec: MlpSpec) -> int:
    sizes = spec.layer_sizes
    return sum(n_in * n_out + n_out for n_in, n_out in zip(sizes[:-1], sizes[1:]))


def init_params(spec: MlpSpec, rng: np.random.Generator, std: float = 0.001) -> np.ndarray:
    return rng.normal(0.0, std, size=param_count(spec))


def perturb(theta: np.ndarray, sigma_pert: float, rng: np.random.Generator) -> np.ndarray:
    if sigma_pert < 0.0:
        raise ValueError("sigma_pert must be non-negative")
    return theta + sigma_pert * rng.standard_normal(theta.shape[-1])


def unflatten(theta: np.ndarray, spec: MlpSpec):
    """Views of the flat vector as (W, b) pairs.

    Accepts a (D,) vector or an (n, D) batch; weight views are then
    (n_out, n_in) or (n, n_out, n_in) respectively.
    """
    if theta.shape[-1] != param_count(spec):
        raise ValueError(f"parameter vector has length {theta.shape[-1]}, "
                         f"spec {spec.layer_sizes} needs {param_count(spec)}")
    lead = theta.shape[:-1]
    layers = []
    offset = 0
    sizes = spec.layer_sizes
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        w = theta[..., offset:offset + n_in * n_out].reshape(lead + (n_out, n_in))
        offset += n_in * n_out
        b = theta[..., offset:offset + n_out]
        offset += n_out
        layers.append((w, b))
    return layers


def flatten(layers) -> np.ndarray:
    parts = []
    for w, b in layers:
        parts.append(np.asarray(w).reshape(-1))
        parts.append(np.asarray(b).reshape(-1))
    return np.concatenate(parts)


def forward_layers(layers, s):
    """Tanh MLP evaluation from unflattened layers.

    ``s`` is (k,) with (W, b) pairs, or (n, k) with batched pairs.
    """
    x = s
    for w, b in layers:
        x = np.tanh(np.matmul(w, x[..., None])[..., 0] + b)
    return x


def forward(theta: np.ndarray, spec: MlpSpec, s_norm) -> np.ndarray:
    s = np.asarray(s_norm, dtype=float)
    if s.shape[-1] != spec.input_dim:
        raise ValueError(f"feature vector has length {s.shape[-1]}, "
                         f"spec {spec.layer_sizes} expects {spec.input_dim}")
    if not np.all(np.isfinite(s)):
        raise ValueError("feature vector must be finite")
    return forward_layers(unflatten(theta, spec), s)


def control_intervals(prev_v, prev_delta, lim: ActuatorLimits, Ts,
                      vvc_box=None):
    """Admissible [lo, hi] per channel: absolute, rate and optional VVC bounds."""
    v_lo, v_hi = rate_limited_interval(prev_v, lim.v_min, lim.v_max,
                                       lim.vdot_min, lim.vdot_max, Ts)
    if vvc_box is not None:
        v_lo, v_hi = intersect_interval(v_lo, v_hi, vvc_box[0], vvc_box[1])
    d_lo, d_hi = rate_limited_interval(prev_delta, lim.delta_min, lim.delta_max,
                                       lim.deltadot_min, lim.deltadot_max, Ts)
    return (v_lo, v_hi), (d_lo, d_hi)


def affine_scale(raw, lo, hi):
    """Map raw in [-1, 1] onto [lo, hi]; endpoints map exactly."""
    u = (raw + 1.0) * 0.5
    return lo * (1.0 - u) + hi * u


def scale_outputs(raw, prev: Control, lim: ActuatorLimits, vvc_box, Ts) -> Control:
    """Affinely scale the network output into the admissible control box."""
    (v_lo, v_hi), (d_lo, d_hi) = control_intervals(prev.v, prev.delta, lim, Ts, vvc_box)
    return Control(float(affine_scale(raw[0], v_lo, v_hi)),
                   float(affine_scale(raw[1], d_lo, d_hi)))
