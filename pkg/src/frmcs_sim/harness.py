"""Per-realization event loop, sweep fan-out, aggregation, and report files.

A realization advances in fixed 1 ms steps (sub-millisecond handover timing
is applied as exact real-valued offsets on top of the grid): positions,
channel and achievable rate are synthesized vectorized over the whole run,
the measurement/handover state machines advance at the L1 sampling period,
and the traffic queues are then solved exactly against the resulting rate
timeline and outage windows.

Randomness is split into named substreams keyed by (base seed, realization,
subsystem, entity), never by sweep-point position, so every sweep point of
one realization index sees the same channel and traffic sample paths and
adding grid points never perturbs existing results.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__ as _version
from .handover import HandoverRecord, OutageInterval, classify_pingpong, execute_handover
from .measurements import A3EventState, L3Filter, step_event_fsm
from .metrics import (RealizationMetrics, STANDARD_SCENARIOS, ScenarioResult,
                      SweepPointSummary, evaluate_scenarios, pool_latencies,
                      summarize_point)
from .radio import (ShadowFading, link_rate_bps, measure_rsrp, pathloss_db,
                    sample_los_states, sinr_db, thermal_noise_dbm)
from .scenario import (Layout, ScenarioConfig, TrainTrajectory, build_layout,
                       config_to_dict, make_trajectories, train_position)
from .traffic import DIRECTIONS, generate_arrivals, serve_queue

# substream identifiers
_S_TRAJECTORY = 0
_S_LOS = 1
_S_SHADOW = 2
_S_TIU = 3
_S_ARRIVALS = 4
_S_RESERVOIR = 5


class RngStreams:
    """Named, value-keyed random substreams for one realization."""

    def __init__(self, base_seed: int, realization: int):
        self.base_seed = int(base_seed)
        self.realization = int(realization)

    def generator(self, *key: int) -> np.random.Generator:
        entropy = (self.base_seed, self.realization) + tuple(int(k) for k in key)
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def trajectory(self) -> np.random.Generator:
        return self.generator(_S_TRAJECTORY)

    def los(self, ue: int, site: int) -> np.random.Generator:
        return self.generator(_S_LOS, ue, site)

    def shadow(self, ue: int, site: int) -> np.random.Generator:
        return self.generator(_S_SHADOW, ue, site)

    def t_iu(self, ue: int) -> np.random.Generator:
        return self.generator(_S_TIU, ue)

    def arrivals(self, ue: int, direction_idx: int) -> np.random.Generator:
        return self.generator(_S_ARRIVALS, ue, direction_idx)


@dataclass
class ChannelRealization:
    """Vectorized large-scale channel over the full run."""

    t_s: np.ndarray                # (n_steps,)
    los: np.ndarray                # (n_steps, n_ues, n_sites) bool
    pathloss_db: np.ndarray        # (n_steps, n_ues, n_sites)
    shadow_db: np.ndarray          # (n_steps, n_ues, n_sites)
    rsrp_dbm: np.ndarray           # (n_steps, n_ues, n_sites)


@dataclass
class UeState:
    """Mutable per-train simulation state."""

    ue_id: int
    trajectory: TrainTrajectory
    serving_cell: int
    l3_filter: L3Filter
    event_state: A3EventState = field(default_factory=A3EventState)
    pending: HandoverRecord | None = None


@dataclass
class RealizationResult:
    metrics: RealizationMetrics
    handovers: list[HandoverRecord]
    outages: list[OutageInterval]
    packets: list | None = None
    channel: ChannelRealization | None = None
    serving_cell_per_step: np.ndarray | None = None


def _n_steps(cfg: ScenarioConfig) -> int:
    return int(round(cfg.sim_duration_s / (cfg.step_ms / 1e3)))


def build_channel(cfg: ScenarioConfig, layout: Layout,
                  trajectories: list[TrainTrajectory],
                  streams: RngStreams) -> ChannelRealization:
    step_s = cfg.step_ms / 1e3
    n_steps = _n_steps(cfg)
    t = np.arange(n_steps, dtype=float) * step_s
    n_ues = len(trajectories)
    n_sites = len(layout.sites)
    site_x = np.array([s.x_m for s in layout.sites])
    site_y = np.array([s.y_m for s in layout.sites])

    pos_x = np.empty((n_steps, n_ues))
    arc = np.empty((n_steps, n_ues))  # travelled distance incl. wrap teleports
    for ue, traj in enumerate(trajectories):
        x, _ = train_position(traj, t, cfg.track_length_m, cfg.sim_duration_s)
        pos_x[:, ue] = x
        raw = traj.start_offset_m + traj.direction * traj.speed_mps * t
        wraps = np.abs(np.floor(raw / cfg.track_length_m))
        arc[:, ue] = traj.speed_mps * t + wraps * cfg.track_length_m

    d2d = np.hypot(pos_x[:, :, None] - site_x[None, None, :],
                   site_y[None, None, :])
    d3d = np.hypot(d2d, cfg.gnb_height_m - cfg.ue_height_m)

    # LOS re-draw boundaries: every persistence distance of travel, i.e.
    # every persistence/speed seconds, with the draw-point geometry evaluated
    # exactly at the boundary times (step-size independent)
    seg_period_s = cfg.radio.los_persistence_distance_m / cfg.train_speed_mps
    seg_idx = (t / seg_period_s).astype(np.int64)
    n_seg = int(seg_idx[-1]) + 1
    t_seg = np.minimum(np.arange(n_seg) * seg_period_s, cfg.sim_duration_s)

    los = np.empty((n_steps, n_ues, n_sites), dtype=bool)
    shadow = np.empty((n_steps, n_ues, n_sites))
    for ue in range(n_ues):
        x_seg, _ = train_position(trajectories[ue], t_seg, cfg.track_length_m,
                                  cfg.sim_duration_s)
        for site in range(n_sites):
            d2d_seg = np.hypot(x_seg - site_x[site], site_y[site])
            los_seg = sample_los_states(d2d_seg, streams.los(ue, site))
            los[:, ue, site] = los_seg[seg_idx]
            process = ShadowFading(cfg.radio.sf_sigma_los_db,
                                   cfg.radio.sf_sigma_nlos_db,
                                   cfg.radio.sf_correlation_distance_m,
                                   streams.shadow(ue, site))
            shadow[:, ue, site] = process.series(arc[:, ue], los[:, ue, site])

    pl = pathloss_db(d3d, los, cfg.radio, cfg.carrier_frequency_hz,
                     cfg.gnb_height_m, cfg.ue_height_m)
    rsrp = measure_rsrp(cfg.eirp_dbm, cfg.radio.n_subcarriers, pl, shadow)
    return ChannelRealization(t_s=t, los=los, pathloss_db=pl,
                              shadow_db=shadow, rsrp_dbm=rsrp)


def _run_mobility(cfg: ScenarioConfig, channel: ChannelRealization,
                  ues: list[UeState], streams: RngStreams):
    """Advance L3 filtering, the A3 event machines and the handover sequence
    over the L1 sampling grid. Returns (records, outages) per completion
    order; UE serving cells are updated in place."""
    stride = int(round(cfg.measurement.l1_period_ms / cfg.step_ms))
    sample_steps = range(0, channel.t_s.size, stride)
    a3 = cfg.measurement
    tiu_rngs = {ue.ue_id: streams.t_iu(ue.ue_id) for ue in ues}
    records: list[HandoverRecord] = []
    outages: list[OutageInterval] = []
    history: list[HandoverRecord] = []

    for step in sample_steps:
        t_s = float(channel.t_s[step])
        for ue in ues:
            pending = ue.pending
            if pending is not None and t_s >= pending.t_complete:
                ue.serving_cell = pending.target_cell
                ue.pending = None
                ue.event_state.reset()
                pending = None
            in_outage = pending is not None and t_s >= pending.t_detach
            if not in_outage:  # detached UEs cannot measure
                ue.l3_filter.update(channel.rsrp_dbm[step, ue.ue_id, :])
            if pending is not None:
                continue  # event machine frozen while a handover is in flight
            report = step_event_fsm(ue.event_state, t_s, ue.l3_filter.values,
                                    ue.serving_cell, ue.ue_id, a3)
            if report is not None:
                record, outage = execute_handover(report, cfg.handover,
                                                  tiu_rngs[ue.ue_id])
                record.is_pingpong = classify_pingpong(
                    history, record, cfg.handover.pingpong_window_s)
                history.append(record)
                records.append(record)
                outages.append(outage)
                ue.pending = record
    return records, outages


def _serving_per_step(cfg: ScenarioConfig, n_steps: int, initial: list[int],
                      records: list[HandoverRecord]) -> np.ndarray:
    """Site index per step per UE; the switch takes effect at the first step
    boundary at or after detach (the gap up to completion is zeroed exactly
    by the outage intervals during queue service)."""
    step_s = cfg.step_ms / 1e3
    serving = np.empty((n_steps, len(initial)), dtype=np.int64)
    for ue, cell in enumerate(initial):
        serving[:, ue] = cell
    for rec in sorted(records, key=lambda r: r.t_detach):
        cut = int(np.ceil(rec.t_detach / step_s - 1e-9))
        if cut < n_steps:
            serving[cut:, rec.ue_id] = rec.target_cell
    return serving


def _rate_timeline(cfg: ScenarioConfig, channel: ChannelRealization,
                   serving: np.ndarray) -> np.ndarray:
    """Achievable rate in bps per (step, ue) at the serving cell."""
    noise = thermal_noise_dbm(cfg.subcarrier_spacing_hz, cfg.ue_noise_figure_db)
    rsrp = channel.rsrp_dbm
    n_steps, n_ues, n_sites = rsrp.shape
    serving_rsrp = np.take_along_axis(rsrp, serving[:, :, None], axis=2)[:, :, 0]
    if cfg.radio.interference_mode == "full_buffer_neighbors":
        total_mw = np.sum(10.0 ** (rsrp / 10.0), axis=2)
        serving_mw = 10.0 ** (serving_rsrp / 10.0)
        interference_mw = np.maximum(total_mw - serving_mw, 0.0)
        snr = 10.0 * np.log10(serving_mw / (10.0 ** (noise / 10.0) + interference_mw))
    else:
        snr = sinr_db(serving_rsrp, None, noise, "noise_only")
    return link_rate_bps(snr, cfg.bandwidth_hz,
                         cfg.radio.max_spectral_efficiency_bps_hz)


def run_realization(cfg: ScenarioConfig, a3_offset_db: float, ttt_ms: float,
                    realization: int, emit_packets: bool = False,
                    keep_channel: bool = False) -> RealizationResult:
    """Simulate one seeded realization at one (offset, TTT) sweep point."""
    cfg = dataclasses.replace(
        cfg, measurement=dataclasses.replace(cfg.measurement,
                                             offset_db=float(a3_offset_db),
                                             ttt_ms=float(ttt_ms)))
    streams = RngStreams(cfg.base_seed, realization)
    layout = build_layout(cfg)
    trajectories = make_trajectories(cfg, streams.trajectory())
    channel = build_channel(cfg, layout, trajectories, streams)
    n_steps = channel.t_s.size
    n_sites = len(layout.sites)

    ues = []
    for ue_id, traj in enumerate(trajectories):
        filt = L3Filter(n_sites, cfg.measurement.l3_filter_k)
        initial = int(np.argmax(channel.rsrp_dbm[0, ue_id, :]))
        ues.append(UeState(ue_id=ue_id, trajectory=traj, serving_cell=initial,
                           l3_filter=filt))
    initial_cells = [ue.serving_cell for ue in ues]

    records, outages = _run_mobility(cfg, channel, ues, streams)
    serving = _serving_per_step(cfg, n_steps, initial_cells, records)
    rate = _rate_timeline(cfg, channel, serving)

    step_s = cfg.step_ms / 1e3
    packets_all = []
    for ue_id in range(cfg.n_ues):
        ue_rate = rate[:, ue_id]

        def rate_fn(t, _r=ue_rate):
            idx = np.clip((np.asarray(t) / step_s).astype(np.int64), 0, n_steps - 1)
            return _r[idx]

        ue_outages = [o for o in outages if o.ue_id == ue_id]
        for d_idx, direction in enumerate(DIRECTIONS):
            if direction not in cfg.traffic.directions:
                continue
            arrivals = generate_arrivals(streams.arrivals(ue_id, d_idx),
                                         cfg.traffic.arrival_rate_pps,
                                         cfg.sim_duration_s)
            packets_all.extend(serve_queue(arrivals, cfg.traffic.packet_size_bits,
                                           rate_fn, ue_outages, cfg.sim_duration_s,
                                           step_s=step_s, ue_id=ue_id,
                                           direction=direction))

    metrics = RealizationMetrics(
        latencies_s=np.array([p.latency_s for p in packets_all]),
        flushed=np.array([p.flushed for p in packets_all], dtype=bool),
        n_handovers=len(records),
        n_pingpongs=sum(1 for r in records if r.is_pingpong),
        total_outage_s=float(sum(o.duration_s for o in outages)),
        sim_duration_s=cfg.sim_duration_s,
        n_ues=cfg.n_ues,
    )
    return RealizationResult(metrics=metrics, handovers=records, outages=outages,
                             packets=packets_all if emit_packets else None,
                             channel=channel if keep_channel else None,
                             serving_cell_per_step=serving if keep_channel else None)


# --- sweep ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    a3_offset_db: float
    ttt_ms: float
    seeds: tuple[int, ...]


@dataclass
class RunReport:
    config: dict
    summaries: list[SweepPointSummary]
    scenario_results: list[ScenarioResult]
    best_point: tuple[float, float]  # (a3_offset_db, ttt_ms)
    realization_indices: tuple[int, ...]
    version: str
    wall_clock_s: float


def _run_task(args) -> tuple:
    cfg, offset, ttt, realization, emit_packets = args
    result = run_realization(cfg, offset, ttt, realization,
                             emit_packets=emit_packets)
    return offset, ttt, realization, result


def run_sweep(cfg: ScenarioConfig, n_realizations: int | None = None,
              n_workers: int = 1, evaluate_scenario_loads: bool = True,
              emit_packets: bool = False,
              progress: bool = False) -> tuple[RunReport, dict]:
    """Evaluate the full (offset, TTT) grid.

    Returns the report plus a raw-data dict used by the file writers:
    per-point realization results and per-load pooled latencies for the
    use-case evaluation at the best grid point.
    """
    t0 = time.perf_counter()
    n_real = n_realizations if n_realizations is not None else cfg.n_realizations
    seeds = tuple(range(n_real))
    grid = [SweepPoint(offset, ttt, seeds) for offset, ttt in cfg.sweep.points()]
    points = [(p.a3_offset_db, p.ttt_ms) for p in grid]
    tasks = [(cfg, p.a3_offset_db, p.ttt_ms, r, emit_packets)
             for p in grid for r in p.seeds]

    results: dict[tuple, RealizationResult] = {}
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for offset, ttt, r, res in pool.map(_run_task, tasks, chunksize=1):
                results[(offset, ttt, r)] = res
    else:
        for task in tasks:
            offset, ttt, r, res = _run_task(task)
            results[(offset, ttt, r)] = res
            if progress:
                print(f"  point O={offset:g} dB TTT={ttt:g} ms "
                      f"realization {r + 1}/{n_real}", flush=True)

    by_point = {p: [results[(p[0], p[1], r)] for r in seeds] for p in points}
    summaries = [summarize_point(offset, ttt,
                                 [res.metrics for res in by_point[(offset, ttt)]])
                 for offset, ttt in points]
    best = min(summaries, key=lambda s: (s.p999_latency_ms, s.ttt_ms, s.a3_offset_db))
    best_point = (best.a3_offset_db, best.ttt_ms)

    scenario_results: list[ScenarioResult] = []
    lat_by_load: dict[float, np.ndarray] = {}
    if evaluate_scenario_loads:
        base_load = cfg.traffic.load_bps
        lat_by_load[base_load] = pool_latencies(
            [res.metrics for res in by_point[best_point]])
        for req in STANDARD_SCENARIOS:
            if req.latency_bound_ms is None:
                scenario_results.extend(evaluate_scenarios(np.array([]), [req], None))
                continue
            if req.load_bps not in lat_by_load:
                rate = req.load_bps / cfg.traffic.packet_size_bits
                cfg_load = dataclasses.replace(
                    cfg, traffic=dataclasses.replace(cfg.traffic,
                                                     arrival_rate_pps=rate))
                runs = [run_realization(cfg_load, best_point[0], best_point[1], r).metrics
                        for r in seeds]
                lat_by_load[req.load_bps] = pool_latencies(runs)
            scenario_results.extend(
                evaluate_scenarios(lat_by_load[req.load_bps], [req], req.load_bps))

    report = RunReport(config=config_to_dict(cfg), summaries=summaries,
                       scenario_results=scenario_results, best_point=best_point,
                       realization_indices=seeds, version=_version,
                       wall_clock_s=time.perf_counter() - t0)
    raw = {"by_point": by_point, "lat_by_load": lat_by_load}
    return report, raw


# --- report files -----------------------------------------------------------

SUMMARY_COLUMNS = ["a3_offset_db", "ttt_ms", "n_realizations", "n_packets",
                   "p999_latency_ms", "n_handovers", "n_pingpongs",
                   "normalized_outage_pct", "r_100ms", "r_500ms"]

SCENARIO_COLUMNS = ["scenario", "load_bps", "latency_bound_ms",
                    "reliability_target_pct", "reliability_pct", "pass",
                    "load_matches"]

HANDOVER_COLUMNS = ["a3_offset_db", "ttt_ms", "realization", "ue", "source",
                    "target", "t_report", "t_detach", "t_complete", "t_iu_ms",
                    "pingpong"]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def write_summary_csv(path, summaries: list[SweepPointSummary]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            w.writerow(map(_fmt, [s.a3_offset_db, s.ttt_ms, s.n_realizations,
                                  s.n_packets, s.p999_latency_ms, s.n_handovers,
                                  s.n_pingpongs, s.normalized_outage_pct,
                                  s.r_100ms_pct, s.r_500ms_pct]))


def write_scenarios_csv(path, results: list[ScenarioResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCENARIO_COLUMNS)
        for r in results:
            w.writerow(map(_fmt, [r.name, r.load_bps, r.latency_bound_ms,
                                  r.reliability_target_pct, r.reliability_pct,
                                  r.passes, r.load_matches]))


def write_handovers_csv(path, by_point: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HANDOVER_COLUMNS)
        for (offset, ttt), runs in sorted(by_point.items(),
                                          key=lambda kv: (kv[0][1], kv[0][0])):
            for r_idx, res in enumerate(runs):
                for rec in res.handovers:
                    w.writerow(map(_fmt, [offset, ttt, r_idx, rec.ue_id,
                                          rec.source_cell, rec.target_cell,
                                          rec.t_report, rec.t_detach,
                                          rec.t_complete, rec.t_iu_ms,
                                          rec.is_pingpong]))


def write_packets_csv(path, by_point: dict, reservoir: int | None = None,
                      base_seed: int = 0) -> None:
    """Per-packet dump; optionally a deterministic reservoir per sweep point."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a3_offset_db", "ttt_ms", "realization", "ue", "direction",
                    "arrival_s", "latency_ms", "flushed"])
        for (offset, ttt), runs in sorted(by_point.items(),
                                          key=lambda kv: (kv[0][1], kv[0][0])):
            rows = []
            for r_idx, res in enumerate(runs):
                if res.packets is None:
                    continue
                rows.extend([offset, ttt, r_idx, p.ue_id, p.direction,
                             p.arrival_s, p.latency_s * 1e3, p.flushed]
                            for p in res.packets)
            if reservoir is not None and len(rows) > reservoir:
                rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(
                    (base_seed, _S_RESERVOIR, int(offset * 1000), int(ttt)))))
                keep = rng.choice(len(rows), size=reservoir, replace=False)
                rows = [rows[i] for i in sorted(keep)]
            for row in rows:
                w.writerow(map(_fmt, row))


def write_channel_trace_csv(path, result: RealizationResult) -> None:
    if result.channel is None:
        raise ValueError("realization was run without keep_channel")
    ch = result.channel
    n_steps, n_ues, n_sites = ch.rsrp_dbm.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "ue", "site", "los", "pl_db", "sf_db", "rsrp_dbm"])
        for ue in range(n_ues):
            for site in range(n_sites):
                for k in range(n_steps):
                    w.writerow(map(_fmt, [ch.t_s[k], ue, site,
                                          bool(ch.los[k, ue, site]),
                                          ch.pathloss_db[k, ue, site],
                                          ch.shadow_db[k, ue, site],
                                          ch.rsrp_dbm[k, ue, site]]))


def _npz_key(load_or_point) -> str:
    if isinstance(load_or_point, tuple):
        return f"lat_o{load_or_point[0]:g}_t{load_or_point[1]:g}"
    return f"lat_load{load_or_point:g}"


def write_run_outputs(out_dir, report: RunReport, raw: dict,
                      emit_packets: bool = False,
                      packets_reservoir: int | None = None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_summary_csv(out / "summary.csv", report.summaries)
    write_scenarios_csv(out / "scenarios.csv", report.scenario_results)
    write_handovers_csv(out / "handovers.csv", raw["by_point"])
    if emit_packets:
        write_packets_csv(out / "packets.csv", raw["by_point"],
                          reservoir=packets_reservoir,
                          base_seed=report.config["base_seed"])

    arrays = {}
    for (offset, ttt), runs in raw["by_point"].items():
        arrays[_npz_key((offset, ttt))] = pool_latencies([r.metrics for r in runs])
    for load, lat in raw["lat_by_load"].items():
        arrays[_npz_key(load)] = lat
    np.savez_compressed(out / "raw_latencies.npz", **arrays)

    meta = {
        "version": report.version,
        "best_point": list(report.best_point),
        "realization_indices": list(report.realization_indices),
        "config": report.config,
        "wall_clock_s": report.wall_clock_s,
        "points": [{
            "a3_offset_db": s.a3_offset_db, "ttt_ms": s.ttt_ms,
            "n_realizations": s.n_realizations, "n_packets": s.n_packets,
            "n_handovers": s.n_handovers, "n_pingpongs": s.n_pingpongs,
            "normalized_outage_pct": s.normalized_outage_pct,
            "p999_latency_ms": s.p999_latency_ms,
            "r_100ms": s.r_100ms_pct, "r_500ms": s.r_500ms_pct,
        } for s in report.summaries],
        "scenario_results": [dataclasses.asdict(r) for r in report.scenario_results],
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def regenerate_reports(in_dir) -> None:
    """Rebuild summary.csv and scenarios.csv from the stored raw data."""
    src = Path(in_dir)
    meta = json.loads((src / "run_meta.json").read_text())
    summaries = [SweepPointSummary(
        a3_offset_db=p["a3_offset_db"], ttt_ms=p["ttt_ms"],
        n_realizations=p["n_realizations"], n_packets=p["n_packets"],
        p999_latency_ms=p["p999_latency_ms"], n_handovers=p["n_handovers"],
        n_pingpongs=p["n_pingpongs"],
        normalized_outage_pct=p["normalized_outage_pct"],
        r_100ms_pct=p["r_100ms"], r_500ms_pct=p["r_500ms"],
    ) for p in meta["points"]]
    write_summary_csv(src / "summary.csv", summaries)
    results = [ScenarioResult(**r) for r in meta["scenario_results"]]
    write_scenarios_csv(src / "scenarios.csv", results)
