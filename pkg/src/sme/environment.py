"""The assembled environment: reset/step episode loop plus manifest I/O.

All randomness is addressed through the master seed: kernel weights and bias
come from streams 0 and 1, policy weights from stream 2, initial states from
stream 3.  Two environments built from the same config are identical down to
the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from . import rng
from ._serial import checksum_hex, decode_floats, encode_floats, float_bytes
from .config import EnvConfig, FORMAT_VERSION, validate_config
from .errors import DimensionError, EpisodeError, ManifestError
from .kernel import TransitionKernel, init_kernel, step_transition
from .policy import DUNPolicy, UniformLayer, _layer_dims, build_policy, optimal_action
from .rewards import (RewardLedger, StepOutcome, accumulate_and_payout,
                      augment_observation, check_termination, compute_regret,
                      step_reward)


@dataclass
class EpisodeState:
    s: np.ndarray
    ledger: RewardLedger
    terminated: bool = False
    truncated: bool = False

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


class Environment:
    """One SME instance.  Single-threaded within an episode; the kernel and
    policy are immutable and may be shared across instances."""

    def __init__(self, config: EnvConfig, kernel: TransitionKernel,
                 policy: DUNPolicy,
                 payout_on_termination: bool = True):
        self.config = config
        self.kernel = kernel
        self.policy = policy
        self.payout_on_termination = payout_on_termination
        self._reset_stream = rng.derive_stream(config.master_seed,
                                               rng.STREAM_INIT_STATES)
        self._episode: Optional[EpisodeState] = None

    @property
    def episode(self) -> Optional[EpisodeState]:
        return self._episode

    @property
    def observation_dim(self) -> int:
        return self.config.n_state + 2

    @property
    def action_dim(self) -> int:
        return self.config.n_action


def create_environment(cfg: EnvConfig,
                       payout_on_termination: bool = True) -> Environment:
    kernel = init_kernel(
        cfg,
        rng.derive_stream(cfg.master_seed, rng.STREAM_KERNEL_WEIGHTS),
        rng.derive_stream(cfg.master_seed, rng.STREAM_KERNEL_BIAS))
    policy = build_policy(
        cfg, rng.derive_stream(cfg.master_seed, rng.STREAM_POLICY))
    return Environment(cfg, kernel, policy, payout_on_termination)


def reset(env: Environment, episode_seed: Optional[int] = None) -> np.ndarray:
    """Start an episode; returns the augmented observation.

    Without an episode_seed the environment's own initial-state stream
    advances, so successive resets walk through fresh starting states.  With
    a seed, the state comes from an indexed substream: the same seed always
    reproduces the same start, regardless of history.
    """
    if episode_seed is None:
        s0 = env._reset_stream.uniforms(env.config.n_state)
    else:
        stream = rng.derive_stream(env.config.master_seed,
                                   rng.STREAM_INIT_STATES).child(episode_seed)
        s0 = stream.uniforms(env.config.n_state)
    ledger = RewardLedger(payout_on_termination=env.payout_on_termination)
    env._episode = EpisodeState(s=s0, ledger=ledger)
    return augment_observation(s0, 0, env.config.horizon, 0.0,
                               env.config.reward_interval)


def step(env: Environment, action: np.ndarray
         ) -> tuple[np.ndarray, float, bool, bool, dict[str, Any]]:
    """Advance one step.

    The action is clipped to [0,1] componentwise (the executed action); the
    reward is computed on the clipped action so logs match the transition.
    Returns (observation, payout R, terminated, truncated, info) where info
    carries a_star, tilde_r, hat_r, r, regret, and the clip fraction.
    """
    ep = env._episode
    if ep is None:
        raise EpisodeError("step() called before reset()")
    if ep.done:
        raise EpisodeError("episode already finished; call reset()")
    cfg = env.config
    a = np.asarray(action, dtype=np.float64)
    if a.shape != (cfg.n_action,):
        raise DimensionError(
            f"action has shape {a.shape}, expected ({cfg.n_action},)")
    if np.isnan(a).any():
        raise ValueError("step: NaN action component")
    clipped = np.clip(a, 0.0, 1.0)
    clip_fraction = float(np.mean(a != clipped))

    a_star = optimal_action(env.policy, ep.s)
    tilde, hat, r = step_reward(clipped, a_star, cfg.min_reward)
    terminated = check_termination(r, cfg.survival_difficulty)
    t = ep.ledger.step_index + 1
    truncated = t == cfg.horizon
    ending = truncated or (terminated and ep.ledger.payout_on_termination)
    payout, _ = accumulate_and_payout(ep.ledger, r, cfg.reward_interval,
                                      ending)
    outcome = StepOutcome(tilde_r=tilde, hat_r=hat, r=r, R=payout,
                          terminated=terminated, truncated=truncated)

    ep.s = step_transition(env.kernel, ep.s, clipped)
    ep.terminated, ep.truncated = terminated, truncated
    obs = augment_observation(ep.s, ep.ledger.step_index, cfg.horizon,
                              ep.ledger.cumulative, cfg.reward_interval)
    info = {
        "a_star": a_star,
        "tilde_r": outcome.tilde_r,
        "hat_r": outcome.hat_r,
        "r": outcome.r,
        "regret": compute_regret(clipped, a_star),
        "clip_fraction": clip_fraction,
    }
    return obs, outcome.R, outcome.terminated, outcome.truncated, info


@dataclass(frozen=True)
class EpisodeStats:
    episode: int
    episode_return: float
    length: int
    mean_tilde_r: float


@dataclass(frozen=True)
class RolloutSummary:
    episodes: tuple[EpisodeStats, ...]
    mean_return: float
    mean_length: float
    mean_tilde_r: float  # pooled over all steps
    mean_step_reward: float  # total payout over total steps


def rollout(env: Environment, policy_fn: Callable[[np.ndarray], np.ndarray],
            n_episodes: int,
            observer: Optional[Callable[[int, int, np.ndarray, float],
                                        None]] = None) -> RolloutSummary:
    """Run n episodes under a callback mapping observations to actions.

    Episode i is seeded with episode_seed=i, so a rollout is a pure function
    of (environment config, callback, n_episodes).  An optional observer
    receives (episode, t, state, payout) after every transition, plus a
    t=0 entry carrying the initial state.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be ≥ 1")
    stats = []
    total_r, total_tilde, total_steps = 0.0, 0.0, 0
    for index in range(n_episodes):
        obs = reset(env, episode_seed=index)
        if observer is not None:
            observer(index, 0, env._episode.s, 0.0)
        ep_return, ep_tilde, length = 0.0, 0.0, 0
        while True:
            obs, payout, terminated, truncated, info = step(
                env, policy_fn(obs))
            ep_return += payout
            ep_tilde += info["tilde_r"]
            length += 1
            if observer is not None:
                observer(index, length, env._episode.s, payout)
            if terminated or truncated:
                break
        stats.append(EpisodeStats(index, ep_return, length,
                                  ep_tilde / length))
        total_r += ep_return
        total_tilde += ep_tilde
        total_steps += length
    return RolloutSummary(
        episodes=tuple(stats),
        mean_return=total_r / n_episodes,
        mean_length=total_steps / n_episodes,
        mean_tilde_r=total_tilde / total_steps,
        mean_step_reward=total_r / total_steps,
    )


def _checksums(env: Environment) -> dict[str, str]:
    policy_bytes = b"".join(
        float_bytes(layer.weights) for layer in env.policy.layers)
    return {
        "kernel_weights": checksum_hex(float_bytes(env.kernel.weights)),
        "kernel_bias": checksum_hex(float_bytes(env.kernel.bias)),
        "policy": checksum_hex(policy_bytes),
    }


def save_manifest(env: Environment, embed_weights: bool = False) -> dict:
    """The environment as a flat JSON document: config fields, checksums,
    and (optionally) the exact weights as base64 float64 blocks."""
    doc = env.config.to_json_dict()
    doc["checksums"] = _checksums(env)
    if embed_weights:
        doc["weights"] = {
            "kernel_weights": encode_floats(env.kernel.weights),
            "kernel_bias": encode_floats(env.kernel.bias),
            "policy": [encode_floats(layer.weights)
                       for layer in env.policy.layers],
        }
    return doc


def load_manifest(doc: dict) -> Environment:
    """Rebuild an environment from a manifest document.

    With embedded weights the arrays are decoded directly; otherwise they are
    regenerated from the master seed.  Either way the result must match the
    stored checksums.
    """
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    data = dict(doc)
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ManifestError(f"unsupported manifest format_version {version!r}")
    stored_sums = data.pop("checksums", None)
    weights = data.pop("weights", None)
    if not isinstance(stored_sums, dict):
        raise ManifestError("manifest lacks a checksums block")
    try:
        cfg = validate_config(data)
    except ValueError as exc:
        raise ManifestError(str(exc)) from exc

    if weights is None:
        env = create_environment(cfg)
    else:
        try:
            kernel = TransitionKernel(
                weights=decode_floats(weights["kernel_weights"],
                                      (cfg.n_action, cfg.n_state)),
                bias=decode_floats(weights["kernel_bias"], (cfg.n_state,)))
            dims = _layer_dims(cfg)
            blocks = weights["policy"]
            if len(blocks) != len(dims):
                raise ValueError(
                    f"policy holds {len(blocks)} layers, expected {len(dims)}")
            layers = []
            for block, (n_out, n_in) in zip(blocks, dims):
                w = decode_floats(block, (n_out, n_in))
                layers.append(UniformLayer(weights=w, bias=-0.5 * w.sum(axis=1)))
        except (KeyError, ValueError, TypeError) as exc:
            raise ManifestError(f"bad embedded weights: {exc}") from exc
        policy = DUNPolicy(layers=tuple(layers), input_dim=cfg.n_state,
                           output_dim=cfg.n_action)
        env = Environment(cfg, kernel, policy)

    actual = _checksums(env)
    for name, expected in actual.items():
        stored = stored_sums.get(name)
        if stored != expected:
            raise ManifestError(
                f"checksum mismatch for {name}: manifest has {stored!r}, "
                f"environment gives {expected!r}")
    return env
