"""Baseline handover execution: preparation delay, RRC procedure, the
detach-to-RACH gap and its decomposition, outage intervals, and ping-pong
classification.

Between the Handover Command and the first random-access preamble the UE
spends a fixed processing budget (target-cell configuration 20 ms, SSB
post-processing 2 ms, fine time tracking 5 ms) plus a random wait for the
next PRACH occasion, bounded by the SSB-to-PRACH association period plus
10 ms. The UE has no serving cell from detach until handover completion;
that window is the handover interruption.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurements import MeasurementReport


@dataclass(frozen=True)
class HandoverTimingConfig:
    t_rrc_ms: float = 10.0          # RRC reconfiguration procedure delay
    t_processing_ms: float = 20.0   # applying the target cell configuration
    t_margin_ms: float = 2.0        # SSB post-processing
    t_delta_ms: float = 5.0         # fine time tracking (no SMTC configured)
    association_period_ms: float = 10.0
    prep_delay_ms: float = 10.0     # Handover Request / Ack round trip
    rach_duration_ms: float = 5.0
    pingpong_window_s: float = 1.0

    def __post_init__(self):
        for name in ("t_rrc_ms", "t_processing_ms", "t_margin_ms", "t_delta_ms",
                     "association_period_ms", "prep_delay_ms", "rach_duration_ms",
                     "pingpong_window_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def t_iu_max_ms(self) -> float:
        return self.association_period_ms + 10.0

    @property
    def fixed_components_ms(self) -> float:
        return self.t_processing_ms + self.t_margin_ms + self.t_delta_ms


@dataclass
class HandoverRecord:
    """One executed handover with its full timing decomposition (seconds)."""

    ue_id: int
    source_cell: int
    target_cell: int
    t_report: float
    t_command: float
    t_detach: float
    t_rach_start: float
    t_complete: float
    t_iu_ms: float
    is_pingpong: bool = False

    @property
    def interruption_s(self) -> float:
        return self.t_complete - self.t_detach


@dataclass
class OutageInterval:
    ue_id: int
    start_s: float
    end_s: float
    cause: str = "handover_interruption"

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def sample_d_handover(rng: np.random.Generator,
                      timing: HandoverTimingConfig | None = None) -> tuple[float, dict]:
    """Draw the detach-to-RACH delay; returns (t_iu_ms, full decomposition).

    t_iu is uniform on (0, association_period + 10] ms; the remaining
    components are deterministic.
    """
    timing = timing or HandoverTimingConfig()
    # uniform on (0, max]: Generator.uniform covers [0, max), so mirror it
    t_iu_ms = float(timing.t_iu_max_ms - rng.uniform(0.0, timing.t_iu_max_ms))
    components = {
        "t_processing_ms": timing.t_processing_ms,
        "t_margin_ms": timing.t_margin_ms,
        "t_delta_ms": timing.t_delta_ms,
        "t_iu_ms": t_iu_ms,
    }
    return t_iu_ms, components


def execute_handover(report: MeasurementReport, timing: HandoverTimingConfig,
                     rng: np.random.Generator) -> tuple[HandoverRecord, OutageInterval]:
    """Schedule the full handover sequence triggered by a measurement report.

    All times are derived analytically from the report time; the serving
    cell switches to the target at ``t_complete`` and the UE is off the air
    during [t_detach, t_complete].
    """
    t_iu_ms, _ = sample_d_handover(rng, timing)
    t_command = report.t_s + timing.prep_delay_ms / 1e3
    t_detach = t_command + timing.t_rrc_ms / 1e3
    t_rach_start = t_detach + (timing.fixed_components_ms + t_iu_ms) / 1e3
    t_complete = t_rach_start + timing.rach_duration_ms / 1e3
    record = HandoverRecord(ue_id=report.ue_id,
                            source_cell=report.serving_cell_id,
                            target_cell=report.target_cell_id,
                            t_report=report.t_s,
                            t_command=t_command,
                            t_detach=t_detach,
                            t_rach_start=t_rach_start,
                            t_complete=t_complete,
                            t_iu_ms=t_iu_ms)
    outage = OutageInterval(ue_id=report.ue_id, start_s=t_detach, end_s=t_complete)
    return record, outage


def classify_pingpong(history: list[HandoverRecord], new: HandoverRecord,
                      window_s: float = 1.0) -> bool:
    """True when the new handover returns to the cell left by the UE's most
    recent handover and completes within the ping-pong window of it."""
    prior = None
    for rec in reversed(history):
        if rec.ue_id == new.ue_id:
            prior = rec
            break
    if prior is None:
        return False
    return (new.target_cell == prior.source_cell
            and new.t_complete - prior.t_complete < window_s)
