import json

import numpy as np
import pytest

from sme import (DatasetFormatError, DatasetWriter, EnvConfig,
                 behavior_action, behavior_policy, collect_dataset,
                 create_environment, derive_stream, merge_datasets,
                 optimal_action, read_dataset, record_dtype, reset)
from sme.offline import FLAG_TERMINATED, FLAG_TRUNCATED, MAGIC


def _collect(tmp_path, name, nu=0.5, n=500, cfg=None):
    env = create_environment(cfg or EnvConfig())
    bp = behavior_policy(env, nu)
    prefix = str(tmp_path / name)
    summary = collect_dataset(env, bp, n, sink=DatasetWriter(prefix))
    return prefix, summary


def test_record_layout_is_packed():
    dt = record_dtype(8, 4)
    assert dt.itemsize == 8 * (8 + 4 + 4 + 3 + 8) + 1
    assert set(dt.names) == {"s", "a", "a_star", "R", "r_step", "tilde_r",
                             "s_next", "flags"}


def test_noise_level_validated(default_env):
    with pytest.raises(ValueError):
        behavior_policy(default_env, -0.1)
    with pytest.raises(ValueError):
        behavior_policy(default_env, 1.0001)


def test_zero_noise_reproduces_optimal(default_env):
    bp = behavior_policy(default_env, 0.0)
    s = reset(default_env, episode_seed=0)[:8]
    assert np.array_equal(behavior_action(bp, s),
                          optimal_action(default_env.policy, s))


def test_full_noise_moves_actions(default_env):
    bp = behavior_policy(default_env, 1.0)
    s = reset(default_env, episode_seed=0)[:8]
    assert not np.array_equal(behavior_action(bp, s),
                              optimal_action(default_env.policy, s))


def test_collect_counts_and_flags(tmp_path):
    prefix, summary = _collect(tmp_path, "d", nu=0.3, n=250)
    ds = read_dataset(prefix)
    assert summary.n_transitions == 250
    assert len(ds.records) == 250
    # horizon 100, difficulty 0: episodes only truncate
    flags = ds.records["flags"]
    assert (flags & FLAG_TERMINATED).sum() == 0
    truncated_at = np.flatnonzero(flags & FLAG_TRUNCATED)
    assert list(truncated_at) == [99, 199]
    assert summary.n_episodes == 3


def test_collect_links_transitions(tmp_path):
    prefix, _ = _collect(tmp_path, "d", nu=0.2, n=150)
    rec = read_dataset(prefix).records
    # s_next of one row is s of the next, except across episode boundaries
    assert np.array_equal(rec["s_next"][:99], rec["s"][1:100])
    assert not np.array_equal(rec["s_next"][99], rec["s"][100])


def test_episodes_start_on_indexed_substreams(tmp_path):
    prefix, _ = _collect(tmp_path, "d", nu=0.1, n=150)
    rec = read_dataset(prefix).records
    reset_root = derive_stream(1, 3)
    assert np.array_equal(rec["s"][0], reset_root.child(0).uniforms(8))
    assert np.array_equal(rec["s"][100], reset_root.child(1).uniforms(8))


def test_reward_fields_consistent(tmp_path):
    prefix, _ = _collect(tmp_path, "d", nu=0.8, n=200)
    rec = read_dataset(prefix).records
    hat = np.maximum(0.0, 4.0 * (rec["tilde_r"] - 0.75))
    assert np.allclose(rec["r_step"], hat, atol=1e-12)
    assert np.array_equal(rec["R"], rec["r_step"])
    tilde = 1.0 - np.abs(rec["a"] - rec["a_star"]).mean(axis=1)
    assert np.allclose(rec["tilde_r"], tilde, atol=1e-12)


def test_collect_is_deterministic(tmp_path):
    p1, _ = _collect(tmp_path, "a", nu=0.5, n=300)
    p2, _ = _collect(tmp_path, "b", nu=0.5, n=300)
    assert (tmp_path / "a.bin").read_bytes() == (
        tmp_path / "b.bin").read_bytes()
    assert json.loads((tmp_path / "a.json").read_text()) == json.loads(
        (tmp_path / "b.json").read_text())


def test_mean_matches_noise_oracle(tmp_path):
    _, summary = _collect(tmp_path, "d", nu=0.6, n=5_000)
    assert summary.mean_tilde_r == pytest.approx(1.0 - 0.6 / 6.0, abs=0.02)


def test_manifest_contents(tmp_path):
    prefix, summary = _collect(tmp_path, "d", nu=0.25, n=120)
    doc = json.loads((tmp_path / "d.json").read_text())
    assert doc["format_version"] == 1
    assert doc["nu"] == 0.25
    assert doc["n_transitions"] == 120
    assert doc["mean_tilde_r"] == summary.mean_tilde_r
    assert doc["config"]["n_state"] == 8
    assert "records" in doc["checksums"]


def test_round_trip_preserves_bits(tmp_path):
    prefix, _ = _collect(tmp_path, "d", nu=0.4, n=128)
    ds = read_dataset(prefix)
    out = str(tmp_path / "copy")
    from sme import write_dataset, DatasetSummary
    write_dataset(out, ds.records, DatasetSummary(
        n_transitions=len(ds.records),
        n_episodes=ds.manifest["n_episodes"],
        nu=ds.manifest["nu"],
        mean_tilde_r=ds.manifest["mean_tilde_r"],
        config=ds.config))
    assert (tmp_path / "copy.bin").read_bytes() == (
        tmp_path / "d.bin").read_bytes()


def test_read_rejects_bad_magic(tmp_path):
    prefix, _ = _collect(tmp_path, "d", n=30)
    raw = (tmp_path / "d.bin").read_bytes()
    (tmp_path / "d.bin").write_bytes(b"NOTMAGIC" + raw[8:])
    with pytest.raises(DatasetFormatError, match="magic"):
        read_dataset(prefix)


def test_read_rejects_truncated_payload(tmp_path):
    prefix, _ = _collect(tmp_path, "d", n=30)
    raw = (tmp_path / "d.bin").read_bytes()
    (tmp_path / "d.bin").write_bytes(raw[:-10])
    with pytest.raises(DatasetFormatError, match="truncated"):
        read_dataset(prefix)


def test_read_rejects_checksum_mismatch(tmp_path):
    prefix, _ = _collect(tmp_path, "d", n=30)
    raw = bytearray((tmp_path / "d.bin").read_bytes())
    raw[40] ^= 0xFF
    (tmp_path / "d.bin").write_bytes(bytes(raw))
    with pytest.raises(DatasetFormatError, match="checksum"):
        read_dataset(prefix)


def test_read_rejects_count_disagreement(tmp_path):
    prefix, _ = _collect(tmp_path, "d", n=30)
    doc = json.loads((tmp_path / "d.json").read_text())
    doc["n_transitions"] = 29
    (tmp_path / "d.json").write_text(json.dumps(doc))
    with pytest.raises(DatasetFormatError, match="count"):
        read_dataset(prefix)


def test_merge_datasets(tmp_path):
    p1, s1 = _collect(tmp_path, "a", nu=0.5, n=100)
    p2, s2 = _collect(tmp_path, "b", nu=0.5, n=60)
    merged = merge_datasets([p1, p2], str(tmp_path / "m"))
    assert merged.n_transitions == 160
    ds = read_dataset(str(tmp_path / "m"))
    assert len(ds.records) == 160
    expected = (s1.mean_tilde_r * 100 + s2.mean_tilde_r * 60) / 160
    assert merged.mean_tilde_r == pytest.approx(expected, abs=1e-12)


def test_merge_rejects_mixed_noise(tmp_path):
    p1, _ = _collect(tmp_path, "a", nu=0.5, n=50)
    p2, _ = _collect(tmp_path, "b", nu=0.25, n=50)
    with pytest.raises(DatasetFormatError):
        merge_datasets([p1, p2], str(tmp_path / "m"))


def test_magic_prefix_on_disk(tmp_path):
    _collect(tmp_path, "d", n=20)
    assert (tmp_path / "d.bin").read_bytes()[:8] == MAGIC
