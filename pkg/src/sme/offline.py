"""Offline dataset generation: a blended behavior policy and a binary format.

The behavior policy interpolates between the optimal action and the action of
an independent noise network: a = (1 - alpha) * a_star + alpha * a_noise with
alpha ~ U(0, nu) drawn fresh per step.  nu = 0 reproduces the optimal policy
exactly; nu = 1 mixes in up to a full noise action.

Files come in pairs: <prefix>.bin holds packed little-endian records behind
an 8-byte magic and a u32 count; <prefix>.json is the manifest with the
config echo, nu, counts, the mean similarity, and an FNV-1a checksum of the
record bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from . import rng
from ._serial import atomic_write_bytes, canonical_json_bytes, checksum_hex
from .config import EnvConfig, validate_config
from .environment import Environment
from .errors import DatasetFormatError
from .kernel import step_transition_batch
from .policy import DUNPolicy, build_policy, optimal_action, optimal_actions
from .rng import RandomStream

MAGIC = b"SMEDATA1"
FLAG_TERMINATED = 0x01
FLAG_TRUNCATED = 0x02


@dataclass
class BehaviorPolicy:
    optimal: DUNPolicy
    noise: DUNPolicy
    max_noise: float  # nu
    alpha_stream: RandomStream

    def __post_init__(self):
        if not 0.0 <= self.max_noise <= 1.0:
            raise ValueError("max_noise must lie in [0,1]")


def behavior_policy(env: Environment, max_noise: float) -> BehaviorPolicy:
    """The standard behavior policy for an environment: noise network from
    stream 5, interpolation weights from stream 6."""
    seed = env.config.master_seed
    noise = build_policy(env.config,
                         rng.derive_stream(seed, rng.STREAM_NOISE_POLICY))
    alpha = rng.derive_stream(seed, rng.STREAM_ALPHA)
    return BehaviorPolicy(optimal=env.policy, noise=noise,
                          max_noise=max_noise, alpha_stream=alpha)


def behavior_action(bp: BehaviorPolicy, s: np.ndarray) -> np.ndarray:
    """One blended action; consumes one alpha draw from the policy's own
    stream."""
    alpha = bp.max_noise * bp.alpha_stream.uniform()
    a_star = optimal_action(bp.optimal, s)
    a_noise = optimal_action(bp.noise, s)
    return (1.0 - alpha) * a_star + alpha * a_noise


def record_dtype(n_state: int, n_action: int) -> np.dtype:
    """The packed per-transition layout; itemsize is 8*(2*n_state +
    2*n_action + 3) + 1 bytes."""
    return np.dtype([
        ("s", "<f8", (n_state,)),
        ("a", "<f8", (n_action,)),
        ("a_star", "<f8", (n_action,)),
        ("R", "<f8"),
        ("r_step", "<f8"),
        ("tilde_r", "<f8"),
        ("s_next", "<f8", (n_state,)),
        ("flags", "u1"),
    ])


@dataclass(frozen=True)
class DatasetSummary:
    n_transitions: int
    n_episodes: int
    nu: float
    mean_tilde_r: float
    config: EnvConfig


class DatasetWriter:
    """Accumulates records and writes the <prefix>.bin / <prefix>.json pair
    atomically on finalize."""

    def __init__(self, path_prefix: str):
        self.path_prefix = str(path_prefix)
        self._chunks: list[np.ndarray] = []

    def append(self, records: np.ndarray) -> None:
        self._chunks.append(records)

    def finalize(self, summary: DatasetSummary) -> tuple[str, str]:
        records = (np.concatenate(self._chunks) if self._chunks
                   else np.empty(0, record_dtype(summary.config.n_state,
                                                 summary.config.n_action)))
        return write_dataset(self.path_prefix, records, summary)


def collect_dataset(env: Environment, bp: BehaviorPolicy,
                    n_transitions: int, sink: Optional[DatasetWriter] = None,
                    batch_episodes: int = 512) -> DatasetSummary:
    """Roll behavior episodes (reset on done) until n_transitions are logged.

    Episodes run in seed-indexed lockstep batches: episode e starts from
    substream e of the initial-state stream and draws its interpolation
    weights from substream e of the alpha stream.  All randomness is
    addressed by episode index, so a re-run with the same arguments
    reproduces the file byte for byte.
    Payouts are logged at interval 1 regardless of the configured
    reward_interval (r_step carries the same value; coarser schedules can be
    reconstructed from it).  The last logged episode may be cut mid-flight by
    the transition budget.
    """
    if n_transitions < 1:
        raise ValueError("n_transitions must be ≥ 1")
    cfg = env.config
    dtype = record_dtype(cfg.n_state, cfg.n_action)
    reset_root = rng.derive_stream(cfg.master_seed, rng.STREAM_INIT_STATES)
    per_episode: list[np.ndarray] = []
    episode_index = 0
    total = 0
    while total < n_transitions:
        # full-horizon episodes are the common case; never simulate far past
        # the remaining budget
        remaining = n_transitions - total
        batch = min(batch_episodes, -(-remaining // cfg.horizon) + 1)
        block = np.zeros((batch, cfg.horizon), dtype=dtype)
        lengths = np.zeros(batch, dtype=np.int64)
        states = np.stack([
            reset_root.child(episode_index + e).uniforms(cfg.n_state)
            for e in range(batch)])
        alpha_streams = [bp.alpha_stream.child(episode_index + e)
                         for e in range(batch)]
        active = np.ones(batch, dtype=bool)
        for t in range(1, cfg.horizon + 1):
            idx = np.flatnonzero(active)
            if len(idx) == 0:
                break
            s_t = states[idx]
            a_star = optimal_actions(bp.optimal, s_t)
            a_noise = optimal_actions(bp.noise, s_t)
            alpha = np.array([bp.max_noise * alpha_streams[e].uniform()
                              for e in idx])
            a = (1.0 - alpha)[:, None] * a_star + alpha[:, None] * a_noise
            tilde = 1.0 - np.abs(a - a_star).mean(axis=1)
            hat = np.maximum(0.0, 4.0 * (tilde - 0.75))
            r = np.where(hat > cfg.min_reward, hat, 0.0)
            terminated = r < cfg.survival_difficulty
            truncated = t == cfg.horizon
            s_next = step_transition_batch(env.kernel, s_t, a)
            rows = block[idx, t - 1]
            rows["s"] = s_t
            rows["a"] = a
            rows["a_star"] = a_star
            rows["R"] = r  # interval-1 payout
            rows["r_step"] = r
            rows["tilde_r"] = tilde
            rows["s_next"] = s_next
            rows["flags"] = (terminated * FLAG_TERMINATED
                             | (FLAG_TRUNCATED if truncated else 0))
            block[idx, t - 1] = rows
            lengths[idx] = t
            states[idx] = s_next
            active[idx] = ~terminated & ~truncated
        for e in range(batch):
            if total >= n_transitions:
                break
            take = min(int(lengths[e]), n_transitions - total)
            if take > 0:
                per_episode.append(block[e, :take])
                total += take
                episode_index += 1
    records = np.concatenate(per_episode)
    summary = DatasetSummary(
        n_transitions=int(len(records)),
        n_episodes=episode_index,
        nu=bp.max_noise,
        mean_tilde_r=float(records["tilde_r"].mean()),
        config=cfg)
    if sink is not None:
        sink.append(records)
        sink.finalize(summary)
    return summary


def write_dataset(path_prefix: str, records: np.ndarray,
                  summary: DatasetSummary) -> tuple[str, str]:
    payload = records.tobytes()
    bin_path = path_prefix + ".bin"
    json_path = path_prefix + ".json"
    atomic_write_bytes(
        bin_path, MAGIC + struct.pack("<I", len(records)) + payload)
    manifest = {
        "format_version": 1,
        "config": summary.config.to_json_dict(),
        "nu": summary.nu,
        "n_transitions": summary.n_transitions,
        "n_episodes": summary.n_episodes,
        "mean_tilde_r": summary.mean_tilde_r,
        "checksums": {"records": checksum_hex(payload)},
    }
    atomic_write_bytes(json_path, canonical_json_bytes(manifest))
    return bin_path, json_path


@dataclass(frozen=True)
class Dataset:
    records: np.ndarray
    manifest: dict[str, Any]

    @property
    def config(self) -> EnvConfig:
        return validate_config(self.manifest["config"])


def read_dataset(path_prefix: str) -> Dataset:
    """Load and validate a dataset pair; every failure names what broke."""
    json_path = path_prefix + ".json"
    bin_path = path_prefix + ".bin"
    with open(json_path, "rb") as handle:
        manifest = json.loads(handle.read().decode("utf-8"))
    if manifest.get("format_version") != 1:
        raise DatasetFormatError(
            f"unsupported dataset format_version "
            f"{manifest.get('format_version')!r}")
    cfg = validate_config(manifest["config"])
    dtype = record_dtype(cfg.n_state, cfg.n_action)
    with open(bin_path, "rb") as handle:
        blob = handle.read()
    if blob[:8] != MAGIC:
        raise DatasetFormatError(f"bad magic {blob[:8]!r}")
    if len(blob) < 12:
        raise DatasetFormatError("file too short for a record count")
    (count,) = struct.unpack("<I", blob[8:12])
    payload = blob[12:]
    if count != manifest["n_transitions"]:
        raise DatasetFormatError(
            f"record count {count} disagrees with manifest "
            f"n_transitions {manifest['n_transitions']}")
    if len(payload) != count * dtype.itemsize:
        raise DatasetFormatError(
            f"truncated file: payload ends inside record "
            f"{len(payload) // dtype.itemsize}")
    if checksum_hex(payload) != manifest["checksums"]["records"]:
        raise DatasetFormatError("record checksum mismatch")
    records = np.frombuffer(payload, dtype=dtype)
    return Dataset(records=records, manifest=manifest)


def merge_datasets(path_prefixes: Sequence[str],
                   out_prefix: str) -> DatasetSummary:
    """Concatenate datasets collected in parallel for the same environment.

    Manifests must agree on config and nu; counts and the mean are
    recomputed."""
    if not path_prefixes:
        raise ValueError("nothing to merge")
    parts = [read_dataset(p) for p in path_prefixes]
    head = parts[0].manifest
    for part in parts[1:]:
        if part.manifest["config"] != head["config"]:
            raise DatasetFormatError("merge: config mismatch between parts")
        if part.manifest["nu"] != head["nu"]:
            raise DatasetFormatError("merge: nu mismatch between parts")
    records = np.concatenate([part.records for part in parts])
    summary = DatasetSummary(
        n_transitions=int(len(records)),
        n_episodes=sum(part.manifest["n_episodes"] for part in parts),
        nu=head["nu"],
        mean_tilde_r=float(records["tilde_r"].mean()),
        config=validate_config(head["config"]))
    write_dataset(out_prefix, records, summary)
    return summary
