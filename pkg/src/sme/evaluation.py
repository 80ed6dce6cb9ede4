"""Within-distribution / out-of-distribution evaluation over hypercube shells.

A state's expansion level E(s) = 2*max|s - 0.5| - 1 is the signed distance
classifier: E <= 0 is the training cube (WD), and ascending expansion bounds
carve the exterior into nested shells (eps_low, eps_high].  Policies are
scored per shell by the raw similarity tilde_r against the optimal action.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .environment import Environment
from .errors import DimensionError, ShellSamplingError
from .policy import optimal_actions
from .rewards import augment_observation
from .rng import RandomStream

DEFAULT_EXPANSIONS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


@dataclass(frozen=True)
class ShellPartition:
    """Ascending expansion bounds starting at 0; the implied center is 0.5."""

    expansions: tuple[float, ...] = DEFAULT_EXPANSIONS

    def __post_init__(self):
        eps = self.expansions
        if len(eps) < 1 or eps[0] != 0.0:
            raise ValueError("expansions must start at 0")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ValueError("expansions must be strictly ascending")

    def categories(self) -> list[tuple[str, float, float]]:
        """(label, eps_low, eps_high) rows: the unit cube, then each shell."""
        rows = [("WD", 0.0, 0.0)]
        for low, high in zip(self.expansions, self.expansions[1:]):
            rows.append((f"OOD({low!r},{high!r}]", low, high))
        return rows

    def categorize(self, s: np.ndarray) -> int:
        """Index of the unique category containing s (0 = WD)."""
        level = expansion_level(s)
        if level <= 0.0:
            return 0
        for index, high in enumerate(self.expansions[1:], start=1):
            if level <= high:
                return index
        raise ValueError(
            f"state at expansion level {level} lies outside the partition")


@dataclass(frozen=True)
class CategoryResult:
    category_label: str
    eps_low: float
    eps_high: float
    n: int
    mean_tilde_r: float
    std_tilde_r: float
    mean_regret: float
    clip_fraction: float


@dataclass(frozen=True)
class EvalReport:
    categories: tuple[CategoryResult, ...]
    metadata: dict[str, Any]


def expansion_level(s: np.ndarray) -> float:
    """E(s) = 2*max|s - 0.5| - 1; nonpositive inside the unit cube."""
    s = np.asarray(s, dtype=np.float64)
    return 2.0 * float(np.abs(s - 0.5).max()) - 1.0


def sample_shell(stream: RandomStream, eps_low: float, eps_high: float,
                 n_state: int, n: int) -> np.ndarray:
    """n states uniform on the shell (eps_low, eps_high] around the cube.

    The WD region is requested as eps_low = eps_high = 0 and needs no
    rejection.  Shells are sampled by rejection from the enclosing cube
    [-eps_high/2, 1 + eps_high/2]^n_state; the acceptance probability is
    1 - ((1+eps_low)/(1+eps_high))^n_state, and a retry cap of 10^4 candidate
    draws per requested state makes pathological shells fail loudly.
    """
    if n < 1:
        raise ValueError("n must be ≥ 1")
    if eps_low == 0.0 and eps_high == 0.0:
        return stream.uniforms(n * n_state).reshape(n, n_state)
    if not 0.0 <= eps_low < eps_high:
        raise ValueError("need 0 ≤ eps_low < eps_high")
    side = 1.0 + eps_high
    origin = -eps_high / 2.0
    accepted: list[np.ndarray] = []
    have = 0
    budget = 10_000 * n
    drawn = 0
    acceptance = 1.0 - ((1.0 + eps_low) / (1.0 + eps_high)) ** n_state
    while have < n:
        want = n - have
        block = max(64, int(want / max(acceptance, 1e-12) * 1.25) + 1)
        block = min(block, budget - drawn)
        if block <= 0:
            raise ShellSamplingError(
                f"shell ({eps_low}, {eps_high}] rejected {drawn} candidates "
                f"for {n} states; acceptance ≈ {acceptance:.3g}")
        states = origin + side * stream.uniforms(
            block * n_state).reshape(block, n_state)
        drawn += block
        level = 2.0 * np.abs(states - 0.5).max(axis=1) - 1.0
        mask = (level > eps_low) & (level <= eps_high)
        good = states[mask]
        if len(good):
            accepted.append(good[:want])
            have += min(len(good), want)
    return np.concatenate(accepted, axis=0)


def _category_stats(label: str, low: float, high: float, env: Environment,
                    policy_fn: Callable, n: int,
                    stream: RandomStream) -> CategoryResult:
    n_state = env.config.n_state
    states = sample_shell(stream, low, high, n_state, n)
    a_star = optimal_actions(env.policy, states)
    if getattr(policy_fn, "supports_batch", False):
        observations = np.concatenate(
            [states, np.zeros((n, 2))], axis=1)
        actions = np.asarray(policy_fn(observations), dtype=np.float64)
    else:
        rows = []
        for state in states:
            obs = augment_observation(state, 0, env.config.horizon, 0.0,
                                      env.config.reward_interval)
            try:
                rows.append(np.asarray(policy_fn(obs), dtype=np.float64))
            except Exception as exc:
                raise RuntimeError(
                    f"policy callback failed on state {state.tolist()}"
                ) from exc
        actions = np.stack(rows)
    if actions.shape != (n, env.config.n_action):
        raise DimensionError(
            f"policy callback returned shape {actions.shape}, expected "
            f"({n}, {env.config.n_action})")
    clipped = np.clip(actions, 0.0, 1.0)
    clip_fraction = float(np.mean(actions != clipped))
    tilde = 1.0 - np.abs(clipped - a_star).mean(axis=1)
    return CategoryResult(
        category_label=label, eps_low=low, eps_high=high, n=n,
        mean_tilde_r=float(tilde.mean()),
        std_tilde_r=float(tilde.std()),
        mean_regret=float((1.0 - tilde).mean()),
        clip_fraction=clip_fraction)


def evaluate_policy(policy_fn: Callable[[np.ndarray], np.ndarray],
                    env: Environment, partition: ShellPartition,
                    n_per_category: int, stream: RandomStream,
                    threads: Optional[int] = None) -> EvalReport:
    """Score a policy callback per category.

    The callback receives fresh-step observations ([state, 0, 0]); the
    optimal policy sees the raw state.  Agent actions are clipped to [0,1]
    before scoring and the clip fraction is reported per category.  Category
    i draws from substream i of the supplied stream, so the report does not
    depend on the thread count (SME_THREADS or the threads argument).
    Callbacks with a truthy .supports_batch attribute are called once per
    category with an (n, n_state+2) observation matrix.
    """
    if n_per_category < 1:
        raise ValueError("n_per_category must be ≥ 1")
    if threads is None:
        threads = int(os.environ.get("SME_THREADS", "1") or "1")
    categories = partition.categories()
    jobs = [(label, low, high, env, policy_fn, n_per_category,
             stream.child(index))
            for index, (label, low, high) in enumerate(categories)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: _category_stats(*j), jobs))
    else:
        results = [_category_stats(*job) for job in jobs]
    metadata = {
        "config": env.config.to_json_dict(),
        "master_seed": env.config.master_seed,
        "n_per_category": n_per_category,
        "n_states": n_per_category * len(categories),
        "expansions": list(partition.expansions),
    }
    return EvalReport(categories=tuple(results), metadata=metadata)


def report_csv_bytes(report: EvalReport) -> bytes:
    """One CSV row per category; floats use repr for exact round-trips.
    Labels contain commas, so rows go through the csv writer."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["category_label", "eps_low", "eps_high", "n",
                     "mean_tilde_r", "std_tilde_r", "mean_regret",
                     "clip_fraction"])
    for c in report.categories:
        writer.writerow([
            c.category_label, repr(c.eps_low), repr(c.eps_high), str(c.n),
            repr(c.mean_tilde_r), repr(c.std_tilde_r), repr(c.mean_regret),
            repr(c.clip_fraction)])
    return buffer.getvalue().encode("utf-8")


def report_json_doc(report: EvalReport) -> dict[str, Any]:
    return {
        "format_version": 1,
        "metadata": report.metadata,
        "categories": [vars(c) for c in report.categories],
    }
