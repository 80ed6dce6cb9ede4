"""State dynamics: s' = psi(s + aW + b) with a row-stochastic W.

The activation psi is a normalized triangle wave.  It folds the real line
onto [0,1] by reflection, which preserves the uniform measure exactly: the
affine shift s + aW + b translates mass, the fold maps it back without
compressing any interval.  Row-stochastic W makes the action's L1 mass carry
over unchanged into the shift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import EnvConfig
from .errors import DimensionError
from .rng import RandomStream


@dataclass(frozen=True)
class TransitionKernel:
    weights: np.ndarray  # (n_action, n_state), rows nonnegative, summing to 1
    bias: np.ndarray  # (n_state,), entries in [0, 1)

    def __post_init__(self):
        w, b = self.weights, self.bias
        if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
            raise DimensionError("kernel weights/bias shapes are inconsistent")
        w.setflags(write=False)
        b.setflags(write=False)


def init_kernel(cfg: EnvConfig, w_stream: RandomStream,
                b_stream: RandomStream) -> TransitionKernel:
    """Draw W entrywise from U(0,1) and normalize each row to sum 1.

    A row drawn as all zeros (probability zero, but cheap to guard) is
    redrawn rather than divided by zero.
    """
    rows = []
    for _ in range(cfg.n_action):
        row = w_stream.uniforms(cfg.n_state)
        while row.sum() == 0.0:
            row = w_stream.uniforms(cfg.n_state)
        rows.append(row / row.sum())
    weights = np.array(rows, dtype=np.float64)
    bias = b_stream.uniforms(cfg.n_state)
    return TransitionKernel(weights=weights, bias=bias)


def triangle_wave(x):
    """Normalized triangle wave: fold x into [0,1] by mod-then-reflect.

    With y = x mod 1 (floored, so y is in [0,1) for any sign of x) the value
    is 2y for y <= 0.5 and 2(1-y) otherwise.  Equals (1/pi)*arccos(cos(2*pi*x))
    analytically; the piecewise form avoids the precision loss of arccos near
    the cosine extrema.  Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("triangle_wave: NaN input")
    y = np.mod(arr, 1.0)
    out = np.where(y <= 0.5, 2.0 * y, 2.0 * (1.0 - y))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def step_transition(kernel: TransitionKernel, s: np.ndarray,
                    a: np.ndarray) -> np.ndarray:
    """One dynamics step: psi(s + aW + b)."""
    s = np.asarray(s, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    n_action, n_state = kernel.weights.shape
    if s.shape != (n_state,):
        raise DimensionError(
            f"state has shape {s.shape}, kernel expects ({n_state},)")
    if a.shape != (n_action,):
        raise DimensionError(
            f"action has shape {a.shape}, kernel expects ({n_action},)")
    if np.isnan(s).any() or np.isnan(a).any():
        raise ValueError("step_transition: NaN component")
    return triangle_wave(s + a @ kernel.weights + kernel.bias)


def step_transition_batch(kernel: TransitionKernel, s: np.ndarray,
                          a: np.ndarray) -> np.ndarray:
    """Vectorized dynamics for (n, n_state) states and (n, n_action) actions.

    No per-call validation; callers own the shapes.  Row i of the result is
    the same map as step_transition applied to (s[i], a[i]).
    """
    return triangle_wave(s + a @ kernel.weights + kernel.bias)
