import math

import numpy as np
import pytest

from sme import EnvConfig, derive_stream, ks_critical_value, ks_statistic, spectral_norm
from sme.verification import (COLLAPSE_DEPTHS, COLLAPSE_STATE_DIMS,
                              VerificationBudget, check_report_doc,
                              format_check_table, verify_environment)

QUICK = VerificationBudget(uniformity_n=20_000, action_mass_n=2_000,
                           lipschitz_pairs=20_000, policy_ks_n=20_000,
                           collapse_n=500)


def test_ks_statistic_equally_spaced_grid():
    # D for the centered n-point grid is exactly 1/(2n)
    samples = (np.arange(10) + 0.5) / 10.0
    assert ks_statistic(samples) == pytest.approx(0.05)


def test_ks_statistic_detects_shift():
    stream = derive_stream(1, 4)
    u = stream.uniforms(5_000)
    assert ks_statistic(u) < ks_critical_value(5_000, 0.01)
    assert ks_statistic(u * 0.9) > ks_critical_value(5_000, 0.01)
    assert ks_statistic(u ** 2) > 0.2


def test_ks_statistic_needs_ten_samples():
    with pytest.raises(ValueError):
        ks_statistic(np.linspace(0, 1, 9))


def test_ks_statistic_tolerates_out_of_range_values():
    # values outside [0, 1] are legal input and show up as a huge distance
    assert ks_statistic(np.full(100, 3.0)) >= 1.0


def test_ks_critical_value_magnitudes():
    # the alpha = 0.01 constant is the classical 1.63
    assert ks_critical_value(10_000, 0.01) == pytest.approx(
        1.6276 / math.sqrt(10_000), rel=1e-3)
    assert ks_critical_value(10_000, 0.01 / 8) == pytest.approx(
        1.9207 / math.sqrt(10_000), rel=1e-3)


@pytest.mark.parametrize("shape,seed", [((4, 8), 0), ((8, 4), 1),
                                        ((1, 1), 2), ((6, 6), 3)])
def test_spectral_norm_matches_svd(shape, seed):
    g = derive_stream(seed, 4).gaussians(shape[0] * shape[1]).reshape(shape)
    assert spectral_norm(g) == pytest.approx(np.linalg.svd(g)[1][0],
                                             abs=1e-8)


def test_spectral_norm_zero_matrix():
    assert spectral_norm(np.zeros((3, 5))) == 0.0


# --- the battery ------------------------------------------------------------

def test_battery_names_and_order(default_cfg):
    results = verify_environment(default_cfg, QUICK)
    assert [r.name for r in results] == [
        "transition-uniformity", "action-mass", "frobenius-variance",
        "lipschitz", "policy-uniformity", "policy-collapse"]
    assert all(r.seed == 1 for r in results)


def test_healthy_instance_passes_analytic_checks(default_cfg):
    results = {r.name: r for r in verify_environment(default_cfg, QUICK)}
    assert results["transition-uniformity"].passed
    assert results["action-mass"].passed
    assert results["frobenius-variance"].passed
    assert results["lipschitz"].passed


def test_uniformity_check_fails_for_sigmoid_dynamics(default_cfg):
    def sigmoid(x):
        return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))
    results = {r.name: r for r in verify_environment(
        default_cfg, QUICK, activation_override=sigmoid)}
    assert not results["transition-uniformity"].passed
    assert results["action-mass"].passed


def test_mass_check_fails_for_corrupted_kernel_row(default_cfg):
    results = {r.name: r for r in verify_environment(
        default_cfg, QUICK, corrupt_kernel_row=True)}
    assert not results["action-mass"].passed
    assert results["action-mass"].statistic > 0.1
    # a constant shift cannot disturb folded marginals
    assert results["transition-uniformity"].passed


def test_collapse_grid_dimensions(default_cfg):
    assert COLLAPSE_STATE_DIMS == (1, 2, 4, 8, 16)
    assert COLLAPSE_DEPTHS == (1, 5, 10, 50)
    results = {r.name: r for r in verify_environment(default_cfg, QUICK)}
    collapse = results["policy-collapse"]
    assert collapse.n == 500 * 20


def test_report_doc_round_trips(default_cfg):
    results = verify_environment(default_cfg, QUICK)
    doc = check_report_doc(results)
    assert doc["format_version"] == 1
    assert len(doc["checks"]) == 6
    assert doc["all_passed"] == all(r.passed for r in results)
    table = format_check_table(results)
    assert "transition-uniformity" in table
    assert len(table.splitlines()) == 7
