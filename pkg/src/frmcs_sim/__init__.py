"""System-level simulator for baseline handover parameter tuning in 5G
railway (FRMCS) networks: A3/TTT measurement events over a TR 38.901 rural
macro channel, the handover interruption sequence, FTP Model 3 traffic
through outage-gated queues, and tail-latency reliability evaluation."""

from ._version import __version__
from .scenario import (ScenarioConfig, SweepGrid, Layout, Site, TrainTrajectory,
                       ConfigError, ConfigParseError, ConfigValidationError,
                       build_layout, train_position, make_trajectories,
                       load_config, save_config, config_from_dict, config_to_dict)
from .radio import (RadioParams, LinkState, ShadowFading, los_probability,
                    pathloss_db, breakpoint_distance_m, sample_los_states,
                    measure_rsrp, sinr_db, link_rate_bps, thermal_noise_dbm)
from .measurements import (A3Config, A3EventState, EventPhase, L3Filter,
                           MeasurementReport, a3_entering, a3_leaving,
                           l3_filter_update, step_event_fsm,
                           run_measurement_trace, run_trace_file)
from .handover import (HandoverTimingConfig, HandoverRecord, OutageInterval,
                       sample_d_handover, execute_handover, classify_pingpong)
from .traffic import (TrafficConfig, PacketRecord, generate_arrivals,
                      serve_queue, arrival_rate_for_load)
from .metrics import (ScenarioRequirement, ScenarioResult, RealizationMetrics,
                      SweepPointSummary, STANDARD_SCENARIOS, reliability,
                      latency_percentile, normalized_outage, evaluate_scenarios,
                      pool_latencies, summarize_point)
from .harness import (RngStreams, SweepPoint, RunReport, RealizationResult,
                      run_realization, run_sweep, write_run_outputs,
                      regenerate_reports)

__all__ = [
    "__version__",
    "ScenarioConfig", "SweepGrid", "Layout", "Site", "TrainTrajectory",
    "ConfigError", "ConfigParseError", "ConfigValidationError",
    "build_layout", "train_position", "make_trajectories",
    "load_config", "save_config", "config_from_dict", "config_to_dict",
    "RadioParams", "LinkState", "ShadowFading", "los_probability",
    "pathloss_db", "breakpoint_distance_m", "sample_los_states",
    "measure_rsrp", "sinr_db", "link_rate_bps", "thermal_noise_dbm",
    "A3Config", "A3EventState", "EventPhase", "L3Filter", "MeasurementReport",
    "a3_entering", "a3_leaving", "l3_filter_update", "step_event_fsm",
    "run_measurement_trace", "run_trace_file",
    "HandoverTimingConfig", "HandoverRecord", "OutageInterval",
    "sample_d_handover", "execute_handover", "classify_pingpong",
    "TrafficConfig", "PacketRecord", "generate_arrivals", "serve_queue",
    "arrival_rate_for_load",
    "ScenarioRequirement", "ScenarioResult", "RealizationMetrics",
    "SweepPointSummary", "STANDARD_SCENARIOS", "reliability",
    "latency_percentile", "normalized_outage", "evaluate_scenarios",
    "pool_latencies", "summarize_point",
    "RngStreams", "SweepPoint", "RunReport", "RealizationResult",
    "run_realization", "run_sweep", "write_run_outputs", "regenerate_reports",
]
