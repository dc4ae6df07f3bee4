"""L3 measurement filtering and the A3 event state machine with
time-to-trigger, producing measurement reports.

With all cell- and band-specific offsets pinned to zero, the A3 entering
condition reduces to ``m_n - m_p > offset + hysteresis`` and the leaving
condition to ``m_n - m_p < offset - hysteresis`` (both strict).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

_TIME_EPS_S = 1e-9  # guards float noise in deadline comparisons


@dataclass(frozen=True)
class A3Config:
    """A3 event parameters plus the L1/L3 measurement settings."""

    offset_db: float = 4.0
    hysteresis_db: float = 0.0
    ttt_ms: float = 160.0
    # cell- and frequency-band-specific offsets; pinned to zero
    ocn_db: float = 0.0
    ocp_db: float = 0.0
    ofn_db: float = 0.0
    ofp_db: float = 0.0
    l3_filter_k: float = 4.0
    l1_period_ms: float = 20.0

    def __post_init__(self):
        if self.hysteresis_db < 0:
            raise ValueError("hysteresis_db must be >= 0")
        if self.ttt_ms <= 0:
            raise ValueError("ttt_ms must be positive")
        if any((self.ocn_db, self.ocp_db, self.ofn_db, self.ofp_db)):
            raise ValueError("cell/band-specific offsets are fixed to zero")
        if self.l3_filter_k < 0:
            raise ValueError("l3_filter_k must be >= 0")
        if self.l1_period_ms <= 0:
            raise ValueError("l1_period_ms must be positive")

    def filter_coefficient(self) -> float:
        """a = 1/2^(k/4); the weight of the newest L1 sample."""
        return 1.0 / 2.0 ** (self.l3_filter_k / 4.0)


class L3Filter:
    """Exponential smoothing of L1 samples, one value per cell.

    The first sample initializes the filter; afterwards
    F <- (1 - a) * F + a * M with a = 1/2^(k/4).
    """

    def __init__(self, n_cells: int, k: float):
        self.a = 1.0 / 2.0 ** (k / 4.0)
        self.values = np.full(n_cells, np.nan)
        self.initialized = False

    def update(self, samples: np.ndarray) -> np.ndarray:
        samples = np.asarray(samples, dtype=float)
        if not self.initialized:
            self.values = samples.copy()
            self.initialized = True
        else:
            self.values = (1.0 - self.a) * self.values + self.a * samples
        return self.values


def l3_filter_update(previous_dbm: float | None, sample_dbm: float, k: float) -> float:
    """Single-cell filter step; ``previous_dbm=None`` initializes to the sample."""
    if not np.isfinite(sample_dbm):
        raise ValueError("measurement sample must be finite")
    if previous_dbm is None:
        return float(sample_dbm)
    a = 1.0 / 2.0 ** (k / 4.0)
    return float((1.0 - a) * previous_dbm + a * sample_dbm)


def a3_entering(m_n_dbm: float, m_p_dbm: float, cfg: A3Config) -> bool:
    return m_n_dbm - m_p_dbm > cfg.offset_db + cfg.hysteresis_db


def a3_leaving(m_n_dbm: float, m_p_dbm: float, cfg: A3Config) -> bool:
    return m_n_dbm - m_p_dbm < cfg.offset_db - cfg.hysteresis_db


class EventPhase(Enum):
    IDLE = "idle"
    ENTERED_COUNTING = "entered_counting"
    REPORTED = "reported"


@dataclass
class MeasurementReport:
    t_s: float
    ue_id: int
    serving_cell_id: int
    target_cell_id: int
    m_p_dbm: float
    m_n_dbm: float


@dataclass
class A3EventState:
    """Per-UE A3 event state.

    While ENTERED_COUNTING the TTT runs against ``candidate_cell_id``; the
    leaving condition on that cell aborts the episode. REPORTED freezes the
    machine until the handover outcome is signalled back.
    """

    phase: EventPhase = EventPhase.IDLE
    candidate_cell_id: int | None = None
    ttt_deadline_s: float | None = None
    last_t_s: float = float("-inf")

    def reset(self) -> None:
        self.phase = EventPhase.IDLE
        self.candidate_cell_id = None
        self.ttt_deadline_s = None


def best_neighbor(filtered_dbm: np.ndarray, serving_cell_id: int) -> int:
    """Strongest non-serving cell by filtered RSRP; ties break to the lowest id."""
    masked = np.array(filtered_dbm, dtype=float)
    masked[serving_cell_id] = -np.inf
    return int(np.argmax(masked))


def step_event_fsm(state: A3EventState, t_s: float, filtered_dbm: np.ndarray,
                   serving_cell_id: int, ue_id: int,
                   cfg: A3Config) -> MeasurementReport | None:
    """Advance the A3 event machine by one L1 sample.

    Transitions: IDLE enters counting when the entering condition holds for
    the best neighbor; a leaving hit during TTT aborts back to IDLE; TTT
    expiry emits exactly one report and freezes in REPORTED until
    ``state.reset()`` (handover completed or abandoned). Time must be
    strictly increasing across calls.
    """
    if t_s <= state.last_t_s:
        raise ValueError(f"non-monotone FSM time: {t_s} after {state.last_t_s}")
    state.last_t_s = t_s

    if state.phase is EventPhase.REPORTED:
        return None

    m_p = float(filtered_dbm[serving_cell_id])
    if state.phase is EventPhase.IDLE:
        neighbor = best_neighbor(filtered_dbm, serving_cell_id)
        if a3_entering(float(filtered_dbm[neighbor]), m_p, cfg):
            state.phase = EventPhase.ENTERED_COUNTING
            state.candidate_cell_id = neighbor
            state.ttt_deadline_s = t_s + cfg.ttt_ms / 1e3
        return None

    # ENTERED_COUNTING: leaving aborts, TTT expiry reports
    m_n = float(filtered_dbm[state.candidate_cell_id])
    if a3_leaving(m_n, m_p, cfg):
        state.reset()
        return None
    if t_s >= state.ttt_deadline_s - _TIME_EPS_S:
        report = MeasurementReport(t_s=t_s, ue_id=ue_id,
                                   serving_cell_id=serving_cell_id,
                                   target_cell_id=state.candidate_cell_id,
                                   m_p_dbm=m_p, m_n_dbm=m_n)
        state.phase = EventPhase.REPORTED
        return report
    return None


def run_measurement_trace(rows, cfg: A3Config,
                          reset_after_report: bool = True) -> list[float]:
    """Drive the event FSM with a two-cell measurement trace.

    ``rows`` iterates (t_ms, m_p_dbm, m_n_dbm) L1 samples; both series pass
    through the L3 filter configured by ``cfg`` (set ``l3_filter_k=0`` for
    pass-through). Returns the report times in ms. With
    ``reset_after_report`` the machine re-arms at the next sample, modelling
    an instantaneous handover turnaround; otherwise at most one report is
    produced.
    """
    state = A3EventState()
    filt = L3Filter(2, cfg.l3_filter_k)
    reports_ms: list[float] = []
    for t_ms, m_p, m_n in rows:
        if state.phase is EventPhase.REPORTED and reset_after_report:
            state.reset()
        filtered = filt.update(np.array([m_p, m_n], dtype=float))
        report = step_event_fsm(state, float(t_ms) / 1e3, filtered,
                                serving_cell_id=0, ue_id=0, cfg=cfg)
        if report is not None:
            reports_ms.append(float(t_ms))
    return reports_ms


def read_trace_csv(path) -> list[tuple[float, float, float]]:
    """Parse a (t_ms, m_p_dbm, m_n_dbm) CSV trace, header optional."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or not rec[0].strip():
                continue
            try:
                rows.append((float(rec[0]), float(rec[1]), float(rec[2])))
            except ValueError:
                continue  # header line
    return rows


def write_report_csv(path, reports_ms: list[float]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["report_t_ms"])
        for t in reports_ms:
            writer.writerow([repr(float(t))])


def run_trace_file(in_path, out_path, cfg: A3Config,
                   reset_after_report: bool = True) -> list[float]:
    reports = run_measurement_trace(read_trace_csv(in_path), cfg,
                                    reset_after_report=reset_after_report)
    write_report_csv(out_path, reports)
    return reports
