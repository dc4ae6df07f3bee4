import math
from fractions import Fraction

import numpy as np
import pytest

from frmcs_sim import (RealizationMetrics, STANDARD_SCENARIOS,
                       ScenarioRequirement, evaluate_scenarios,
                       latency_percentile, normalized_outage, pool_latencies,
                       reliability, summarize_point)


# --- brute-force oracles (independent re-implementations) ---------------------

def brute_reliability(latencies, bound):
    count = sum(1 for l in latencies if l <= bound)
    return count / len(latencies) * 100.0


def brute_percentile(latencies, p):
    ordered = sorted(latencies)
    k = math.ceil(Fraction(str(p)) * len(ordered) / 100)
    return ordered[k - 1]


def brute_normalized_outage(outage_sum, t, k, r):
    return outage_sum / (t * k * r) * 100.0


# --- reliability ---------------------------------------------------------------

def test_reliability_two_of_three():
    r = reliability(np.array([0.010, 0.020, 0.600]), 0.5)
    assert r == pytest.approx(200.0 / 3.0, rel=1e-12)
    assert r == brute_reliability([0.010, 0.020, 0.600], 0.5)


def test_reliability_all_within():
    assert reliability(np.array([0.1, 0.2]), 0.5) == 100.0


def test_reliability_constructed_exceedance():
    # 10^6 samples with exactly 1000 exceeding the bound -> 99.9%
    lat = np.concatenate([np.full(999_000, 0.05), np.full(1000, 0.9)])
    r = reliability(lat, 0.5)
    assert r == brute_reliability(lat.tolist(), 0.5)
    assert r == pytest.approx(99.9, abs=1e-9)


def test_reliability_empty_rejected():
    with pytest.raises(ValueError):
        reliability(np.array([]), 0.5)


def test_reliability_matches_oracle_randomized():
    rng = np.random.default_rng(0)
    for _ in range(200):
        lat = rng.exponential(0.2, size=rng.integers(1, 50))
        bound = float(rng.uniform(0.0, 1.0))
        assert reliability(lat, bound) == brute_reliability(lat.tolist(), bound)


# --- percentile -----------------------------------------------------------------

def test_percentile_999_of_1000():
    lat = np.arange(1, 1001) / 1e3  # 1..1000 ms
    assert latency_percentile(lat, 99.9) == pytest.approx(0.999, abs=1e-12)


def test_percentile_single_element():
    assert latency_percentile(np.array([0.123]), 7.0) == 0.123


def test_percentile_100_is_max():
    lat = np.array([0.4, 0.1, 0.9, 0.2])
    assert latency_percentile(lat, 100.0) == 0.9


def test_percentile_rank_never_rounds_across_boundary():
    # the binary-float trap: 99.9/100 * 10^6 > 999000 in double arithmetic,
    # but the nearest-rank index must still be 999000
    lat = np.arange(1, 1_000_001, dtype=float)
    assert latency_percentile(lat, 99.9) == 999_000.0


def test_percentile_domain_checks():
    with pytest.raises(ValueError):
        latency_percentile(np.array([]), 50.0)
    with pytest.raises(ValueError):
        latency_percentile(np.array([1.0]), 0.0)
    with pytest.raises(ValueError):
        latency_percentile(np.array([1.0]), 100.1)


def test_percentile_matches_oracle_randomized():
    rng = np.random.default_rng(1)
    for _ in range(200):
        lat = rng.exponential(0.2, size=rng.integers(1, 400))
        p = float(rng.choice([0.1, 25.0, 50.0, 90.0, 99.0, 99.9, 100.0]))
        assert latency_percentile(lat, p) == brute_percentile(lat.tolist(), p)


# --- normalized outage -----------------------------------------------------------

def test_normalized_outage_example():
    # two 50 ms outages over 115.14 s x 2 UEs x 1 realization
    out = normalized_outage(0.1, 115.14, 2, 1)
    assert out == pytest.approx(0.04342539517109606, rel=1e-12)
    assert out == brute_normalized_outage(0.1, 115.14, 2, 1)


def test_normalized_outage_zero_and_full():
    assert normalized_outage(0.0, 10.0, 2, 3) == 0.0
    assert normalized_outage(10.0 * 2 * 3, 10.0, 2, 3) == 100.0


def test_normalized_outage_rejects_zero_denominator():
    with pytest.raises(ValueError):
        normalized_outage(1.0, 0.0, 2, 1)


# --- scenario evaluation ----------------------------------------------------------

def test_standard_scenario_table():
    by_name = {s.name: s for s in STANDARD_SCENARIOS}
    std = by_name["Standard Data Communication"]
    assert std.latency_bound_ms == 500.0 and std.reliability_target_pct == 99.9
    vcrit = by_name["Very Critical Data Communication"]
    assert vcrit.latency_bound_ms == 100.0 and vcrit.reliability_target_pct == 99.9999
    assert by_name["Messaging"].latency_bound_ms is None


def test_everything_passes_on_instant_packets():
    results = evaluate_scenarios(np.full(10_000, 0.001))
    for res in results:
        if res.latency_bound_ms is None:
            assert res.reliability_pct is None and res.passes is None
        else:
            assert res.passes


def test_messaging_not_evaluable():
    res = [r for r in evaluate_scenarios(np.array([0.001]))
           if r.name == "Messaging"][0]
    assert res.reliability_pct is None
    assert res.passes is None


def test_load_mismatch_flagged_not_raised():
    req = ScenarioRequirement("Standard Data Communication", 500.0, 99.9, 10e6)
    res = evaluate_scenarios(np.array([0.01]), [req], run_load_bps=1e6)[0]
    assert res.load_matches is False
    assert res.reliability_pct == 100.0


def test_requirement_validation():
    with pytest.raises(ValueError):
        ScenarioRequirement("x", 500.0, 95.0, 1e6)
    with pytest.raises(ValueError):
        ScenarioRequirement("x", 250.0, 99.9, 1e6)


# --- cross-metric invariants -------------------------------------------------------

def test_reliability_monotone_in_bound():
    rng = np.random.default_rng(2)
    lat = rng.exponential(0.2, size=5000)
    bounds = np.linspace(0.01, 2.0, 40)
    values = [reliability(lat, b) for b in bounds]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert reliability(lat, np.inf) == 100.0


def test_reliability_consistent_with_percentile():
    rng = np.random.default_rng(3)
    lat = rng.lognormal(-2.0, 0.8, size=20_000)
    assert reliability(lat, latency_percentile(lat, 99.9)) >= 99.9


def _metrics(latencies, handovers=2, pingpongs=1, outage=0.1):
    return RealizationMetrics(latencies_s=np.asarray(latencies),
                              flushed=np.zeros(len(latencies), dtype=bool),
                              n_handovers=handovers, n_pingpongs=pingpongs,
                              total_outage_s=outage, sim_duration_s=115.14,
                              n_ues=2)


def test_aggregation_associativity():
    rng = np.random.default_rng(4)
    parts = [rng.exponential(0.2, size=500) for _ in range(4)]
    split = [_metrics(p) for p in parts]
    merged = [_metrics(np.concatenate(parts), handovers=8, pingpongs=4, outage=0.4)]
    a = summarize_point(4.0, 160.0, split)
    b = summarize_point(4.0, 160.0, merged)
    assert a.p999_latency_ms == b.p999_latency_ms
    assert a.r_500ms_pct == b.r_500ms_pct
    assert a.n_handovers == b.n_handovers
    assert a.n_pingpongs == b.n_pingpongs
    # normalization differs only through R, by construction
    assert a.normalized_outage_pct * 4 == pytest.approx(b.normalized_outage_pct)


def test_pingpongs_cannot_exceed_handovers():
    with pytest.raises(ValueError):
        _metrics([0.1], handovers=1, pingpongs=2)


def test_pool_latencies_excludes_flushed_on_request():
    m = RealizationMetrics(latencies_s=np.array([0.1, 0.2, 0.3]),
                           flushed=np.array([False, True, False]),
                           n_handovers=0, n_pingpongs=0, total_outage_s=0.0,
                           sim_duration_s=10.0, n_ues=1)
    assert pool_latencies([m]).size == 3
    assert pool_latencies([m], include_flushed=False).tolist() == [0.1, 0.3]
