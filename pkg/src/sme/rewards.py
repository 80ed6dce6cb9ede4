"""Step rewards, interval payouts, termination, and observation augmentation.

The per-step signal is the complement of the mean absolute error against the
optimal action, rescaled so that the 0.75 achievable by constant center
actions maps to zero.  Rewards accrue in a ledger and are paid out every k-th
step or when the episode ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass
class RewardLedger:
    """Per-episode accumulator; single-owner mutable."""

    cumulative: float = 0.0
    step_index: int = 0  # 1-based after the first accumulate
    payout_on_termination: bool = True


@dataclass(frozen=True)
class StepOutcome:
    tilde_r: float
    hat_r: float
    r: float
    R: float
    terminated: bool
    truncated: bool


def step_reward(a: np.ndarray, a_star: np.ndarray,
                r_min: float) -> tuple[float, float, float]:
    """(tilde_r, hat_r, r) for one executed action.

    tilde_r = 1 - mean|a - a*|; hat_r clamps 4*(tilde_r - 0.75) at zero;
    r additionally gates hat_r to zero unless it exceeds r_min.
    """
    a = np.asarray(a, dtype=np.float64)
    a_star = np.asarray(a_star, dtype=np.float64)
    if a.shape != a_star.shape or a.ndim != 1:
        raise DimensionError(
            f"action shapes differ: {a.shape} vs {a_star.shape}")
    tilde = 1.0 - float(np.abs(a - a_star).mean())
    hat = max(0.0, 4.0 * (tilde - 0.75))
    r = hat if hat > r_min else 0.0
    return tilde, hat, r


def accumulate_and_payout(ledger: RewardLedger, r: float, k: int,
                          episode_ending: bool) -> tuple[float, RewardLedger]:
    """Add r to the ledger and pay out on k-boundaries or episode end.

    The step index is 1-based, so k=1 pays every step and k=horizon pays once
    at the horizon.  The accumulator resets after any payout.
    """
    ledger.step_index += 1
    ledger.cumulative += r
    if ledger.step_index % k == 0 or episode_ending:
        payout = ledger.cumulative
        ledger.cumulative = 0.0
        return payout, ledger
    return 0.0, ledger


def check_termination(r: float, difficulty: float) -> bool:
    """Strictly below the survival threshold ends the episode, so the
    default difficulty 0 never terminates."""
    return r < difficulty


def augment_observation(s: np.ndarray, t: int, horizon: int, r_cum: float,
                        k: int) -> np.ndarray:
    """[s, t/T, r_cum/k]: the state plus normalized progress and accrual."""
    out = np.empty(len(s) + 2, dtype=np.float64)
    out[:-2] = s
    out[-2] = t / horizon
    out[-1] = r_cum / k
    return out


def compute_regret(a: np.ndarray,
                   a_star: np.ndarray) -> tuple[float, float]:
    """(1 - tilde_r, 1 - hat_r): the per-step shortfall from the optimum,
    in raw-similarity and clamped forms."""
    tilde, hat, _ = step_reward(a, a_star, 0.0)
    return 1.0 - tilde, 1.0 - hat
