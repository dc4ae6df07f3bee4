import numpy as np
import pytest

from frmcs_sim import (HandoverRecord, HandoverTimingConfig, MeasurementReport,
                       classify_pingpong, execute_handover, sample_d_handover)

TIMING = HandoverTimingConfig()


class _FixedUniformRng:
    """Stands in for a Generator when a test needs a pinned t_iu draw."""

    def __init__(self, value: float):
        self.value = value

    def uniform(self, low, high):
        return self.value


def _report(t=10.0, ue=0, source=0, target=1):
    return MeasurementReport(t_s=t, ue_id=ue, serving_cell_id=source,
                             target_cell_id=target, m_p_dbm=-95.0, m_n_dbm=-85.0)


def test_fixed_components_sum():
    # 20 + 2 + 5 ms of deterministic processing before the PRACH wait
    assert TIMING.fixed_components_ms == 27.0
    _, comps = sample_d_handover(np.random.default_rng(0), TIMING)
    assert comps["t_processing_ms"] == 20.0
    assert comps["t_margin_ms"] == 2.0
    assert comps["t_delta_ms"] == 5.0


def test_detach_to_rach_bounds():
    rng = np.random.default_rng(42)
    draws = np.array([sample_d_handover(rng, TIMING)[0] for _ in range(20_000)])
    total = TIMING.fixed_components_ms + draws
    assert np.all(total > 27.0)
    assert np.all(total <= 47.0)


def test_t_iu_uniform_mean():
    rng = np.random.default_rng(7)
    draws = np.array([sample_d_handover(rng, TIMING)[0] for _ in range(20_000)])
    assert draws.mean() == pytest.approx(10.0, abs=0.2)


def test_t_iu_upper_bound_follows_association_period():
    timing = HandoverTimingConfig(association_period_ms=30.0)
    rng = np.random.default_rng(1)
    draws = [sample_d_handover(rng, timing)[0] for _ in range(5000)]
    assert max(draws) <= 40.0
    assert max(draws) > 20.0


def test_execute_handover_hand_trace():
    # report at 10 s, defaults, t_iu pinned to its 20 ms maximum:
    # command 10.010, detach 10.020, rach 10.067, complete 10.072
    record, outage = execute_handover(_report(10.0), TIMING, _FixedUniformRng(0.0))
    assert record.t_iu_ms == 20.0
    assert record.t_command == pytest.approx(10.010, abs=1e-12)
    assert record.t_detach == pytest.approx(10.020, abs=1e-12)
    assert record.t_rach_start == pytest.approx(10.067, abs=1e-12)
    assert record.t_complete == pytest.approx(10.072, abs=1e-12)
    assert outage.start_s == record.t_detach
    assert outage.end_s == record.t_complete


def test_interruption_within_bounds():
    # detach-to-complete = 27 + t_iu + 5 ms in (32, 52]
    rng = np.random.default_rng(3)
    for _ in range(200):
        record, outage = execute_handover(_report(), TIMING, rng)
        assert 0.032 < outage.duration_s <= 0.052 + 1e-12
        assert outage.duration_s == pytest.approx(record.interruption_s)


def test_zero_rach_duration_degenerate():
    timing = HandoverTimingConfig(rach_duration_ms=0.0)
    record, _ = execute_handover(_report(), timing, np.random.default_rng(0))
    assert record.t_complete == record.t_rach_start


def test_record_time_ordering():
    rng = np.random.default_rng(9)
    for _ in range(200):
        rec, _ = execute_handover(_report(t=1.5), TIMING, rng)
        assert rec.t_report < rec.t_command < rec.t_detach < rec.t_rach_start <= rec.t_complete
        assert rec.t_detach - rec.t_command == pytest.approx(TIMING.t_rrc_ms / 1e3)
        gap_ms = (rec.t_rach_start - rec.t_detach) * 1e3
        assert gap_ms == pytest.approx(TIMING.fixed_components_ms + rec.t_iu_ms)


def _rec(ue, source, target, t_complete):
    return HandoverRecord(ue_id=ue, source_cell=source, target_cell=target,
                          t_report=t_complete - 0.072, t_command=t_complete - 0.062,
                          t_detach=t_complete - 0.052, t_rach_start=t_complete - 0.005,
                          t_complete=t_complete, t_iu_ms=10.0)


def test_pingpong_within_one_second():
    history = [_rec(0, 0, 1, 10.0)]
    assert classify_pingpong(history, _rec(0, 1, 0, 10.8)) is True


def test_pingpong_window_exceeded():
    history = [_rec(0, 0, 1, 10.0)]
    assert classify_pingpong(history, _rec(0, 1, 0, 11.5)) is False


def test_first_handover_never_pingpong():
    assert classify_pingpong([], _rec(0, 0, 1, 5.0)) is False


def test_pingpong_requires_return_to_prior_source():
    history = [_rec(0, 0, 1, 10.0)]
    assert classify_pingpong(history, _rec(0, 1, 2, 10.5)) is False


def test_pingpong_ignores_other_ues():
    history = [_rec(1, 0, 1, 10.0)]
    assert classify_pingpong(history, _rec(0, 1, 0, 10.5)) is False


def test_pingpong_uses_most_recent_of_same_ue():
    history = [_rec(0, 0, 1, 9.0), _rec(0, 1, 2, 10.0)]
    # returning to cell 1 (source of the latest hop) within the window
    assert classify_pingpong(history, _rec(0, 2, 1, 10.6)) is True
    # returning to cell 0 is older history, not a ping-pong
    assert classify_pingpong(history, _rec(0, 2, 0, 10.6)) is False


def test_negative_timing_rejected():
    with pytest.raises(ValueError):
        HandoverTimingConfig(t_rrc_ms=-1.0)
