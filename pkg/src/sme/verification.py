"""Statistical verification battery for a concrete environment instance.

Six checks, one per analytic claim the construction rests on:

1. transition-uniformity  - pushing uniform states through the dynamics under
   a fixed action leaves every marginal uniform (KS test, alpha = 0.01,
   Bonferroni-corrected across dimensions);
2. action-mass            - ||a W||_1 == ||a||_1 for row-stochastic W;
3. frobenius-variance     - the injected variance (1/12)||W||_F^2 sits inside
   its analytic band [N_a/(12 N_s), N_a/12];
4. lipschitz              - the empirical expansion ratio of the dynamics
   never exceeds 2 * max(1, ||W||_2);
5. policy-uniformity      - optimal-action marginals stay near uniform (the
   CLT bound is calibrated for n_state >= 8; below that the check reports
   the statistic against the vacuous threshold 1.0);
6. policy-collapse        - per-dimension action spread stays above 0.2
   across a grid of state dimensions and depths.

Failures are reported, never thrown; the battery is itself exercised with
deliberately corrupted instances to prove the checks can fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Callable, Optional

import numpy as np

from . import rng
from .config import EnvConfig
from .environment import create_environment
from .kernel import TransitionKernel, triangle_wave
from .policy import build_policy, optimal_actions

COLLAPSE_STATE_DIMS = (1, 2, 4, 8, 16)
COLLAPSE_DEPTHS = (1, 5, 10, 50)


@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    n: int
    seed: int


@dataclass(frozen=True)
class VerificationBudget:
    uniformity_n: int = 100_000
    action_mass_n: int = 10_000
    lipschitz_pairs: int = 100_000
    policy_ks_n: int = 100_000
    collapse_n: int = 10_000


def ks_statistic(samples) -> float:
    """One-sample Kolmogorov-Smirnov distance against U(0,1).

    Out-of-range samples are not an error; they simply push the empirical
    CDF away from the diagonal and count toward the statistic.
    """
    arr = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(arr)
    if n < 10:
        raise ValueError("need at least 10 samples")
    positions = np.arange(1, n + 1, dtype=np.float64)
    d_plus = (positions / n - arr).max()
    d_minus = (arr - (positions - 1.0) / n).max()
    return float(max(d_plus, d_minus))


def ks_critical_value(n: int, alpha: float) -> float:
    """Asymptotic one-sample critical distance sqrt(-ln(alpha/2)/2) / sqrt(n)."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def spectral_norm(w: np.ndarray, rel_tol: float = 1e-10,
                  max_iterations: int = 100_000) -> float:
    """||W||_2 by power iteration on W^T W; no eigen solver needed."""
    n = w.shape[1]
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iterations):
        u = w @ v
        v_next = w.T @ u
        norm = np.linalg.norm(v_next)
        if norm == 0.0:
            return 0.0
        v = v_next / norm
        sigma_next = float(np.linalg.norm(w @ v))
        if abs(sigma_next - sigma) <= rel_tol * max(sigma_next, 1.0):
            return sigma_next
        sigma = sigma_next
    return sigma


def _check_transition_uniformity(kernel: TransitionKernel, n: int, seed: int,
                                 stream: rng.RandomStream,
                                 activation: Callable) -> CheckResult:
    n_action, n_state = kernel.weights.shape
    action = stream.uniforms(n_action)
    states = stream.uniforms(n * n_state).reshape(n, n_state)
    shift = action @ kernel.weights + kernel.bias
    outputs = activation(states + shift)
    statistic = max(ks_statistic(outputs[:, j]) for j in range(n_state))
    threshold = ks_critical_value(n, 0.01 / n_state)
    return CheckResult("transition-uniformity", statistic, threshold,
                       statistic < threshold, n, seed)


def _check_action_mass(kernel: TransitionKernel, n: int, seed: int,
                       stream: rng.RandomStream) -> CheckResult:
    n_action = kernel.weights.shape[0]
    actions = stream.uniforms(n * n_action).reshape(n, n_action)
    projected = actions @ kernel.weights
    statistic = float(np.abs(np.abs(projected).sum(axis=1)
                             - actions.sum(axis=1)).max())
    return CheckResult("action-mass", statistic, 1e-10, statistic <= 1e-10,
                       n, seed)


def _check_frobenius(kernel: TransitionKernel, seed: int) -> CheckResult:
    n_action, n_state = kernel.weights.shape
    statistic = float((kernel.weights ** 2).sum() / 12.0)
    lower = n_action / (12.0 * n_state)
    upper = n_action / 12.0
    # threshold records the upper bound; the pass criterion is the band
    return CheckResult("frobenius-variance", statistic, upper,
                       lower <= statistic <= upper, 1, seed)


def _check_lipschitz(kernel: TransitionKernel, n: int, seed: int,
                     stream: rng.RandomStream) -> CheckResult:
    n_action, n_state = kernel.weights.shape
    s1 = stream.uniforms(n * n_state).reshape(n, n_state)
    a1 = stream.uniforms(n * n_action).reshape(n, n_action)
    s2 = stream.uniforms(n * n_state).reshape(n, n_state)
    a2 = stream.uniforms(n * n_action).reshape(n, n_action)
    out1 = triangle_wave(s1 + a1 @ kernel.weights + kernel.bias)
    out2 = triangle_wave(s2 + a2 @ kernel.weights + kernel.bias)
    num = np.linalg.norm(out1 - out2, axis=1)
    # additive product metric: the state path contributes identity (1) and
    # the action path contributes the induced norm of W, so the composed
    # constant 2*max(1, ||W||_2) bounds the ratio against ||ds|| + ||da||
    den = (np.linalg.norm(s1 - s2, axis=1)
           + np.linalg.norm(a1 - a2, axis=1))
    ratios = num / np.where(den == 0.0, np.inf, den)
    statistic = float(ratios.max())
    threshold = 2.0 * max(1.0, spectral_norm(kernel.weights)) + 1e-9
    return CheckResult("lipschitz", statistic, threshold,
                       statistic <= threshold, n, seed)


def _check_policy_uniformity(cfg: EnvConfig, policy, n: int, seed: int,
                             stream: rng.RandomStream) -> CheckResult:
    states = stream.uniforms(n * cfg.n_state).reshape(n, cfg.n_state)
    actions = optimal_actions(policy, states)
    statistic = max(ks_statistic(actions[:, j])
                    for j in range(cfg.n_action))
    threshold = 0.02 if cfg.n_state >= 8 else 1.0
    return CheckResult("policy-uniformity", statistic, threshold,
                       statistic < threshold, n, seed)


def _check_policy_collapse(cfg: EnvConfig, n: int, seed: int,
                           stream: rng.RandomStream) -> CheckResult:
    worst = math.inf
    for dim_index, n_state in enumerate(COLLAPSE_STATE_DIMS):
        states = stream.child(dim_index).uniforms(
            n * n_state).reshape(n, n_state)
        for depth in COLLAPSE_DEPTHS:
            grid_cfg = replace(cfg, n_state=n_state, policy_complexity=depth)
            policy = build_policy(
                grid_cfg, rng.derive_stream(cfg.master_seed,
                                            rng.STREAM_POLICY))
            spread = optimal_actions(policy, states).std(axis=0).min()
            worst = min(worst, float(spread))
    return CheckResult("policy-collapse", worst, 0.2, worst > 0.2,
                       n * len(COLLAPSE_STATE_DIMS) * len(COLLAPSE_DEPTHS),
                       seed)


def verify_environment(cfg: EnvConfig,
                       budget: Optional[VerificationBudget] = None,
                       corrupt_kernel_row: bool = False,
                       activation_override: Optional[Callable] = None
                       ) -> list[CheckResult]:
    """Run the full battery against the environment cfg describes.

    The two corruption hooks exist so the battery's sensitivity is testable:
    corrupt_kernel_row rescales one kernel row (breaking row-stochasticity),
    activation_override substitutes the dynamics activation in the
    uniformity check (a sigmoid there must make it fail).
    """
    budget = budget or VerificationBudget()
    seed = cfg.master_seed
    env = create_environment(cfg)
    kernel = env.kernel
    if corrupt_kernel_row:
        weights = kernel.weights.copy()
        weights[0] *= 1.5
        kernel = TransitionKernel(weights=weights, bias=kernel.bias)
    activation = activation_override or triangle_wave
    root = rng.derive_stream(seed, rng.STREAM_EVAL)
    return [
        _check_transition_uniformity(kernel, budget.uniformity_n, seed,
                                     root.child(1000), activation),
        _check_action_mass(kernel, budget.action_mass_n, seed,
                           root.child(1001)),
        _check_frobenius(kernel, seed),
        _check_lipschitz(kernel, budget.lipschitz_pairs, seed,
                         root.child(1003)),
        _check_policy_uniformity(cfg, env.policy, budget.policy_ks_n, seed,
                                 root.child(1004)),
        _check_policy_collapse(cfg, budget.collapse_n, seed,
                               root.child(1005)),
    ]


def check_report_doc(results: list[CheckResult]) -> dict[str, Any]:
    return {
        "format_version": 1,
        "all_passed": all(r.passed for r in results),
        "checks": [vars(r) for r in results],
    }


def format_check_table(results: list[CheckResult]) -> str:
    lines = [f"{'check':<24} {'statistic':>14} {'threshold':>14} "
             f"{'n':>8}  status"]
    for r in results:
        lines.append(f"{r.name:<24} {r.statistic:>14.6g} "
                     f"{r.threshold:>14.6g} {r.n:>8}  "
                     f"{'pass' if r.passed else 'FAIL'}")
    return "\n".join(lines)
