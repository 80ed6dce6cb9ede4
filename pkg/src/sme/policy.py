"""The ground-truth optimal policy: a stack of uniform layers.

Each layer computes y = Phi(Wx + b) where W is semi-orthogonal and scaled by
sqrt(12) and b = -0.5 * W @ 1.  For a U(0,1) input the pre-activation is then
centered with unit variance, so Phi (the standard normal CDF) maps it back to
an approximately uniform output: the layer preserves the uniform measure up
to a CLT approximation that sharpens as the input dimension grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .config import EnvConfig
from .errors import DimensionError
from .rng import RandomStream

_SQRT12 = float(np.sqrt(12.0))


def std_normal_cdf(z):
    """Phi(z) = 0.5 * (1 + erf(z / sqrt(2))). Accepts scalars or arrays."""
    arr = np.asarray(z, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("std_normal_cdf: NaN input")
    out = ndtr(arr)
    if np.isscalar(z) or arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class UniformLayer:
    weights: np.ndarray  # (n_out, n_in)
    bias: np.ndarray  # (n_out,), always -0.5 * row sums of weights

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise DimensionError("layer weights/bias shapes are inconsistent")
        self.weights.setflags(write=False)
        self.bias.setflags(write=False)

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class DUNPolicy:
    layers: tuple[UniformLayer, ...]
    input_dim: int
    output_dim: int

    @property
    def depth(self) -> int:
        return len(self.layers)


def _semi_orthogonal(stream: RandomStream, n_out: int, n_in: int) -> np.ndarray:
    """One layer's weight matrix.

    The Gaussian draw is QR-orthonormalized in its taller orientation, signs
    are fixed so the R diagonal is positive (making the factor unique), and
    the result is scaled by sqrt(12).  Expanding layers cannot have orthogonal
    rows, so each row is instead rescaled to norm sqrt(12) exactly: unit
    pre-activation variance is the property the activation relies on.
    """
    if n_out <= n_in:
        g = stream.gaussians(n_in * n_out).reshape(n_in, n_out)
        q, r = np.linalg.qr(g)
        d = np.sign(np.diag(r))
        d[d == 0.0] = 1.0
        return _SQRT12 * (q * d).T
    g = stream.gaussians(n_out * n_in).reshape(n_out, n_in)
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0.0] = 1.0
    w = _SQRT12 * (q * d)
    return w * (_SQRT12 / np.linalg.norm(w, axis=1))[:, None]


def _layer_dims(cfg: EnvConfig) -> list[tuple[int, int]]:
    """(n_out, n_in) per layer; interior width is max(n_state, n_action)."""
    n_s, n_a, depth = cfg.n_state, cfg.n_action, cfg.policy_complexity
    if depth == 1:
        return [(n_a, n_s)]
    width = max(n_s, n_a)
    return [(width, n_s)] + [(width, width)] * (depth - 2) + [(n_a, width)]


def build_policy(cfg: EnvConfig, stream: RandomStream) -> DUNPolicy:
    layers = []
    for n_out, n_in in _layer_dims(cfg):
        w = _semi_orthogonal(stream, n_out, n_in)
        b = -0.5 * w.sum(axis=1)
        layers.append(UniformLayer(weights=w, bias=b))
    return DUNPolicy(layers=tuple(layers), input_dim=cfg.n_state,
                     output_dim=cfg.n_action)


def layer_forward(layer: UniformLayer, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.n_in,):
        raise DimensionError(
            f"layer input has shape {x.shape}, expected ({layer.n_in},)")
    return ndtr(layer.weights @ x + layer.bias)


def optimal_action(policy: DUNPolicy, s: np.ndarray,
                   clip_input: bool = False) -> np.ndarray:
    """pi*(s).  States outside the unit hypercube are legal inputs; pass
    clip_input=True to fold them onto the boundary first."""
    x = np.asarray(s, dtype=np.float64)
    if x.shape != (policy.input_dim,):
        raise DimensionError(
            f"state has shape {x.shape}, policy expects ({policy.input_dim},)")
    if np.isnan(x).any():
        raise ValueError("optimal_action: NaN state component")
    if clip_input:
        x = np.clip(x, 0.0, 1.0)
    for layer in policy.layers:
        x = ndtr(layer.weights @ x + layer.bias)
    return x


def optimal_actions(policy: DUNPolicy, states: np.ndarray) -> np.ndarray:
    """Batched pi* over (n, input_dim) states; no per-call validation."""
    x = states
    for layer in policy.layers:
        x = ndtr(x @ layer.weights.T + layer.bias)
    return x
