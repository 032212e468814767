"""Smoke tests for the python module: exact values, determinism, and the
experiment surface.  The compiled extension is found via PYTHONPATH (set by
the test harness) or a regular install."""

import os
import subprocess

import pytest

import operc


def test_version_is_exposed():
    assert operc.__version__ == operc.version()
    assert operc.__version__.count(".") == 2


def test_exact_survival_matches_closed_forms():
    # Survival to level 1 is certain; the first possible death is at level 2
    # and from a single site has probability eps^2.
    for eps in (0.2, 0.3, 0.5):
        assert operc.exact_survival(eps, n=1) == pytest.approx(1.0, abs=1e-15)
        assert operc.exact_survival(eps, n=2) == pytest.approx(1.0 - eps * eps, abs=1e-12)
    # Frozen transfer-matrix value, independently confirmed by brute-force
    # enumeration over all designations.
    assert operc.exact_survival(0.3, n=3) == pytest.approx(0.858970, abs=1e-12)


def test_exact_survival_monotone_in_radius():
    a = operc.exact_survival(0.4, n=3, k=0)
    b = operc.exact_survival(0.4, n=3, k=1)
    assert b > a


def test_exact_intersection_pmf_is_a_distribution():
    pmf = operc.exact_intersection_pmf(0.3, n=3, sites=[-1, 1])
    assert len(pmf) == 3
    assert sum(pmf) == pytest.approx(1.0, abs=1e-12)
    assert all(v >= 0 for v in pmf)


def test_exact_duality_exchange():
    d = operc.exact_duality(0.2, p=0.5, k=1, n=2)
    assert d["sup_distance"] <= 1e-12
    assert sum(d["count_from_product"]) == pytest.approx(1.0, abs=1e-12)
    assert sum(d["count_from_interval"]) == pytest.approx(1.0, abs=1e-12)


def test_run_trial_deterministic_and_structured():
    opts = {
        "mode": "site",
        "eps": 0.2,
        "init": "interval:1",
        "horizon": 12,
        "checkpoints": [0, 6, 12],
        "seed": 42,
        "stream": 7,
    }
    a = operc.run_trial(opts)
    b = operc.run_trial(opts)
    assert a == b
    assert a["horizon"] == 12
    assert len(a["r"]) == 13
    assert 0 in a["snapshots"]
    assert a["snapshots"][0] == [-2, 0, 2]
    # the cone bounds every level: |site| <= 2k + level
    for level, sites in a["snapshots"].items():
        for y in sites:
            assert abs(y) <= 2 + level


def test_run_trial_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown option"):
        operc.run_trial({"horizon": 4, "mystery_knob": 1})


def test_experiment_rows_and_worker_invariance():
    opts = dict(eps=0.3, n_trunc=32, trials=4000, seed=5)
    one = operc.theta(workers=1, **opts)
    four = operc.theta(workers=4, **opts)
    assert one == four
    (row,) = [r for r in one["rows"] if r["experiment"] == "theta"]
    assert 0.0 <= row["ci_lo"] <= row["estimate"] <= row["ci_hi"] <= 1.0
    assert row["trials"] == 4000
    assert one["summary"]["theta"]["estimate"] == row["estimate"]


def test_experiment_unknown_name_and_option():
    with pytest.raises(ValueError, match="unknown experiment"):
        operc.run_experiment("nonsense", {})
    with pytest.raises(ValueError, match="unknown option"):
        operc.eq2(trials=100, bogus=1)


def test_duality_experiment_reports_ks_and_oracle():
    res = operc.duality(eps=0.2, p=0.5, k=1, n=2, trials=2000, permutations=200, seed=3)
    assert res["summary"]["ks"]["p_value"] > 0.001
    oracle = res["summary"]["oracle"]
    assert oracle is not None
    assert oracle["sup_distance"] <= 1e-12


def test_selftest_passes_at_small_scale():
    reports = operc.run_selftest(
        {"trials": 60, "horizon": 16, "oracle_trials": 2000, "seed": 11}
    )
    assert {r["name"] for r in reports} >= {
        "interval_identity",
        "halfline_edge",
        "initial_monotone",
        "coupling_containment",
    }
    for r in reports:
        assert r["pass"], f"{r['name']}: {r['first_failure']}"


@pytest.mark.skipif("OPERC_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_binary_agrees_with_module():
    out = subprocess.run(
        [os.environ["OPERC_CLI"], "oracle", "survival", "--epsilon", "0.5", "--n", "2"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "0.750000000000000"
    assert operc.exact_survival(0.5, n=2) == pytest.approx(0.75, abs=1e-15)
