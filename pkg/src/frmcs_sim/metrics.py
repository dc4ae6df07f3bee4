"""Reliability, latency percentiles, normalized outage, and the per-use-case
evaluation against the railway communication requirements (3GPP TS 22.289).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class ScenarioRequirement:
    """One railway use case: latency bound, reliability target, traffic load.

    ``latency_bound_ms=None`` marks a use case without a latency requirement
    (Messaging), for which packet reliability is not computable.
    """

    name: str
    latency_bound_ms: float | None
    reliability_target_pct: float
    load_bps: float

    def __post_init__(self):
        if self.reliability_target_pct not in (99.9, 99.9999):
            raise ValueError("reliability target must be 99.9 or 99.9999")
        if self.latency_bound_ms is not None and self.latency_bound_ms not in (100.0, 500.0):
            raise ValueError("latency bound must be 100 or 500 ms")


# In-scope rows of the requirement table for trains at up to 500 km/h; the
# low-speed (<= 40 km/h) sub-cases are excluded.
STANDARD_SCENARIOS: tuple[ScenarioRequirement, ...] = (
    ScenarioRequirement("Voice Communication", 100.0, 99.9, 300e3),
    ScenarioRequirement("Critical Video Communication", 100.0, 99.9, 10e6),
    ScenarioRequirement("Very Critical Video Communication", 100.0, 99.9, 10e6),
    ScenarioRequirement("Standard Data Communication", 500.0, 99.9, 10e6),
    ScenarioRequirement("Critical Data Communication", 500.0, 99.9999, 500e3),
    ScenarioRequirement("Very Critical Data Communication", 100.0, 99.9999, 1e6),
    ScenarioRequirement("Messaging", None, 99.9, 100e3),
)


@dataclass
class RealizationMetrics:
    """Per-realization counters plus the packet latency sample set."""

    latencies_s: np.ndarray
    flushed: np.ndarray
    n_handovers: int
    n_pingpongs: int
    total_outage_s: float
    sim_duration_s: float
    n_ues: int

    def __post_init__(self):
        self.latencies_s = np.asarray(self.latencies_s, dtype=float)
        self.flushed = np.asarray(self.flushed, dtype=bool)
        if self.n_pingpongs > self.n_handovers:
            raise ValueError("ping-pong count cannot exceed handover count")


def reliability(latencies_s, bound_s: float) -> float:
    """Percentage of packets delivered within the latency bound."""
    lat = np.asarray(latencies_s, dtype=float)
    if lat.size == 0:
        raise ValueError("reliability of an empty sample set is undefined")
    count = int(np.count_nonzero(lat <= bound_s))
    return count / lat.size * 100.0


def latency_percentile(latencies_s, p: float) -> float:
    """Nearest-rank percentile: the sorted value at 1-based index ceil(p/100*N).

    The rank is computed in exact rational arithmetic so decimal percentiles
    like 99.9 never round across an index boundary.
    """
    lat = np.asarray(latencies_s, dtype=float)
    if lat.size == 0:
        raise ValueError("percentile of an empty sample set is undefined")
    if not 0.0 < p <= 100.0:
        raise ValueError("percentile must be in (0, 100]")
    k = int(math.ceil(Fraction(str(p)) * lat.size / 100))
    return float(np.sort(lat)[k - 1])


def normalized_outage(outage_sum_s: float, sim_duration_s: float,
                      n_ues: int, n_realizations: int) -> float:
    """Total outage time as a percentage of total UE-time."""
    if sim_duration_s <= 0 or n_ues <= 0 or n_realizations <= 0:
        raise ValueError("duration, UE count and realization count must be positive")
    return outage_sum_s / (sim_duration_s * n_ues * n_realizations) * 100.0


@dataclass
class ScenarioResult:
    name: str
    load_bps: float
    latency_bound_ms: float | None
    reliability_target_pct: float
    reliability_pct: float | None
    passes: bool | None
    load_matches: bool


def evaluate_scenarios(latencies_s, requirements=STANDARD_SCENARIOS,
                       run_load_bps: float | None = None) -> list[ScenarioResult]:
    """Evaluate r(L) against each requirement's target.

    Requirements without a latency bound come back non-evaluable
    (``reliability_pct`` and ``passes`` are None). A mismatch between the
    run's configured load and a requirement's load is flagged, not raised.
    """
    results = []
    for req in requirements:
        matches = run_load_bps is None or run_load_bps == req.load_bps
        if req.latency_bound_ms is None:
            results.append(ScenarioResult(req.name, req.load_bps, None,
                                          req.reliability_target_pct,
                                          None, None, matches))
            continue
        r = reliability(latencies_s, req.latency_bound_ms / 1e3)
        results.append(ScenarioResult(req.name, req.load_bps,
                                      req.latency_bound_ms,
                                      req.reliability_target_pct,
                                      r, r >= req.reliability_target_pct,
                                      matches))
    return results


@dataclass
class SweepPointSummary:
    """Pooled metrics of one (offset, TTT) sweep point across realizations."""

    a3_offset_db: float
    ttt_ms: float
    n_realizations: int
    n_packets: int
    p999_latency_ms: float
    n_handovers: int
    n_pingpongs: int
    normalized_outage_pct: float
    r_100ms_pct: float
    r_500ms_pct: float


def pool_latencies(realizations: list[RealizationMetrics],
                   include_flushed: bool = True) -> np.ndarray:
    parts = []
    for m in realizations:
        parts.append(m.latencies_s if include_flushed
                     else m.latencies_s[~m.flushed])
    return np.concatenate(parts) if parts else np.array([])


def summarize_point(a3_offset_db: float, ttt_ms: float,
                    realizations: list[RealizationMetrics]) -> SweepPointSummary:
    if not realizations:
        raise ValueError("cannot summarize an empty realization list")
    lat = pool_latencies(realizations)
    outage_sum = sum(m.total_outage_s for m in realizations)
    t = realizations[0].sim_duration_s
    k = realizations[0].n_ues
    return SweepPointSummary(
        a3_offset_db=a3_offset_db,
        ttt_ms=ttt_ms,
        n_realizations=len(realizations),
        n_packets=int(lat.size),
        p999_latency_ms=latency_percentile(lat, 99.9) * 1e3,
        n_handovers=sum(m.n_handovers for m in realizations),
        n_pingpongs=sum(m.n_pingpongs for m in realizations),
        normalized_outage_pct=normalized_outage(outage_sum, t, k, len(realizations)),
        r_100ms_pct=reliability(lat, 0.100),
        r_500ms_pct=reliability(lat, 0.500),
    )
