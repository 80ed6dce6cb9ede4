import csv
import io

import numpy as np
import pytest

from sme import (DEFAULT_EXPANSIONS, ShellPartition, ShellSamplingError,
                 derive_stream, evaluate_policy, expansion_level,
                 optimal_actions, report_csv_bytes, report_json_doc,
                 sample_shell)


def _optimal_batch(env):
    def fn(observations):
        return optimal_actions(env.policy,
                               np.asarray(observations)[:, :8])
    fn.supports_batch = True
    return fn


def _center_batch(env):
    def fn(observations):
        return np.full((len(observations), 4), 0.5)
    fn.supports_batch = True
    return fn


# --- expansion level and partition -----------------------------------------

def test_expansion_level_landmarks():
    assert expansion_level(np.full(8, 0.5)) == -1.0
    assert expansion_level(np.ones(8)) == 0.0
    assert expansion_level(np.zeros(8)) == 0.0
    assert expansion_level(np.array([1.1] + [0.5] * 7)) == pytest.approx(0.2)
    assert expansion_level(np.array([-0.2] + [0.5] * 7)) == pytest.approx(0.4)


def test_partition_categories():
    p = ShellPartition(DEFAULT_EXPANSIONS)
    cats = p.categories()
    assert len(cats) == 6
    assert cats[0] == ("WD", 0.0, 0.0)
    assert cats[1][0] == "OOD(0.0,0.2]"
    assert cats[-1] == ("OOD(0.8,1.0]", 0.8, 1.0)


def test_partition_validation():
    with pytest.raises(ValueError):
        ShellPartition((0.2, 0.4))  # must start at zero
    with pytest.raises(ValueError):
        ShellPartition((0.0, 0.4, 0.2))  # must ascend
    assert ShellPartition((0.0,)).categories() == [("WD", 0.0, 0.0)]


def test_categorize_covers_expanded_cube():
    p = ShellPartition(DEFAULT_EXPANSIONS)
    states = -0.5 + 2.0 * derive_stream(51, 4).uniforms(8_000).reshape(
        1_000, 8)
    for s in states:
        index = p.categorize(s)
        low, high = p.categories()[index][1:]
        level = expansion_level(s)
        if index == 0:
            assert level <= 0.0
        else:
            assert low < level <= high
    with pytest.raises(ValueError):
        p.categorize(np.full(8, 2.0))


# --- shell sampling ----------------------------------------------------------

def test_wd_samples_fill_the_unit_cube():
    s = sample_shell(derive_stream(1, 4), 0.0, 0.0, 8, 500)
    assert s.shape == (500, 8)
    assert ((s >= 0.0) & (s < 1.0)).all()


def test_shell_samples_live_in_their_band():
    stream = derive_stream(2, 4)
    for low, high in [(0.0, 0.2), (0.4, 0.6), (0.8, 1.0)]:
        states = sample_shell(stream, low, high, 8, 400)
        levels = 2.0 * np.abs(states - 0.5).max(axis=1) - 1.0
        assert (levels > low).all() and (levels <= high).all()


def test_shell_sampler_validates_bounds():
    stream = derive_stream(3, 4)
    with pytest.raises(ValueError):
        sample_shell(stream, 0.4, 0.2, 8, 10)
    with pytest.raises(ValueError):
        sample_shell(stream, 0.0, 0.2, 8, 0)


def test_vanishing_shell_exhausts_its_budget():
    with pytest.raises(ShellSamplingError, match="rejected"):
        sample_shell(derive_stream(4, 4), 0.0, 1e-9, 8, 10)


def test_shell_sampling_deterministic():
    a = sample_shell(derive_stream(5, 4), 0.2, 0.4, 8, 200)
    b = sample_shell(derive_stream(5, 4), 0.2, 0.4, 8, 200)
    assert np.array_equal(a, b)


# --- evaluation ---------------------------------------------------------------

def test_optimal_policy_scores_one_everywhere(default_env):
    report = evaluate_policy(_optimal_batch(default_env), default_env,
                             ShellPartition(DEFAULT_EXPANSIONS), 300,
                             derive_stream(1, 4))
    assert len(report.categories) == 6
    for cat in report.categories:
        assert cat.mean_tilde_r == pytest.approx(1.0, abs=1e-12)
        assert cat.mean_regret == pytest.approx(0.0, abs=1e-12)
        assert cat.clip_fraction == 0.0
        assert cat.n == 300


def test_loop_and_batch_paths_agree(default_env):
    partition = ShellPartition((0.0, 0.3))

    def loop_fn(obs):
        return np.full(4, 0.5)

    batched = evaluate_policy(_center_batch(default_env), default_env,
                              partition, 200, derive_stream(7, 4))
    looped = evaluate_policy(loop_fn, default_env, partition, 200,
                             derive_stream(7, 4))
    assert batched.categories == looped.categories


def test_thread_count_does_not_change_results(default_env):
    partition = ShellPartition(DEFAULT_EXPANSIONS)
    fn = _center_batch(default_env)
    one = evaluate_policy(fn, default_env, partition, 150,
                          derive_stream(9, 4), threads=1)
    four = evaluate_policy(fn, default_env, partition, 150,
                           derive_stream(9, 4), threads=4)
    assert one.categories == four.categories


def test_threads_default_reads_environment(default_env, monkeypatch):
    monkeypatch.setenv("SME_THREADS", "2")
    report = evaluate_policy(_center_batch(default_env), default_env,
                             ShellPartition((0.0, 0.2)), 100,
                             derive_stream(10, 4))
    assert len(report.categories) == 2


def test_clip_fraction_reported(default_env):
    def wild(observations):
        return np.full((len(observations), 4), 1.5)
    wild.supports_batch = True
    report = evaluate_policy(wild, default_env, ShellPartition((0.0, 0.2)),
                             100, derive_stream(11, 4))
    assert all(c.clip_fraction == 1.0 for c in report.categories)


def test_policy_error_is_identified(default_env):
    def broken(obs):
        raise RuntimeError("boom")
    with pytest.raises(RuntimeError, match="policy callback failed"):
        evaluate_policy(broken, default_env, ShellPartition((0.0, 0.2)), 20,
                        derive_stream(12, 4))


def test_ood_scores_decay_with_expansion(default_env):
    report = evaluate_policy(_center_batch(default_env), default_env,
                             ShellPartition(DEFAULT_EXPANSIONS), 800,
                             derive_stream(13, 4))
    means = [c.mean_tilde_r for c in report.categories]
    assert means[0] == max(means)
    assert means[-1] == min(means)


# --- report serialization ----------------------------------------------------

def test_csv_report_parses_back(default_env):
    report = evaluate_policy(_center_batch(default_env), default_env,
                             ShellPartition(DEFAULT_EXPANSIONS), 120,
                             derive_stream(14, 4))
    rows = list(csv.reader(io.StringIO(
        report_csv_bytes(report).decode("utf-8"))))
    assert rows[0] == ["category_label", "eps_low", "eps_high", "n",
                       "mean_tilde_r", "std_tilde_r", "mean_regret",
                       "clip_fraction"]
    assert len(rows) == 7
    assert rows[1][0] == "WD"
    assert rows[2][0] == "OOD(0.0,0.2]"  # commas in labels survive quoting
    for row, cat in zip(rows[1:], report.categories):
        assert float(row[4]) == cat.mean_tilde_r


def test_json_report_structure(default_env):
    report = evaluate_policy(_center_batch(default_env), default_env,
                             ShellPartition((0.0, 0.2)), 50,
                             derive_stream(15, 4))
    doc = report_json_doc(report)
    assert doc["format_version"] == 1
    assert doc["metadata"]["n_per_category"] == 50
    assert [c["category_label"] for c in doc["categories"]] == [
        "WD", "OOD(0.0,0.2]"]
