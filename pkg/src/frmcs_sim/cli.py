"""Command-line front end: single realizations, full parameter sweeps, and
report regeneration from stored raw data."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__
from .harness import (regenerate_reports, run_realization, run_sweep,
                      write_channel_trace_csv, write_handovers_csv,
                      write_packets_csv, write_run_outputs)
from .metrics import latency_percentile, reliability
from .scenario import ConfigError, ScenarioConfig, load_config


def _load(args) -> ScenarioConfig:
    if args.config is None:
        return ScenarioConfig()
    try:
        return load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _cmd_simulate(args) -> int:
    import dataclasses

    cfg = _load(args)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    offset = args.offset_db if args.offset_db is not None else cfg.measurement.offset_db
    ttt = args.ttt_ms if args.ttt_ms is not None else cfg.measurement.ttt_ms
    result = run_realization(cfg, offset, ttt, realization=0,
                             emit_packets=True,
                             keep_channel=args.emit_channel_trace)
    m = result.metrics
    print(f"offset={offset:g} dB ttt={ttt:g} ms seed={cfg.base_seed}")
    print(f"packets={m.latencies_s.size} handovers={m.n_handovers} "
          f"pingpongs={m.n_pingpongs} outage={m.total_outage_s:.3f} s")
    if m.latencies_s.size:
        print(f"p99.9 latency = {latency_percentile(m.latencies_s, 99.9) * 1e3:.1f} ms, "
              f"r(100ms) = {reliability(m.latencies_s, 0.1):.4f}%, "
              f"r(500ms) = {reliability(m.latencies_s, 0.5):.4f}%")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        by_point = {(offset, ttt): [result]}
        write_handovers_csv(out / "handovers.csv", by_point)
        if args.emit_packets:
            write_packets_csv(out / "packets.csv", by_point)
        if args.emit_channel_trace:
            write_channel_trace_csv(out / "channel_trace.csv", result)
        meta = {"version": __version__, "base_seed": cfg.base_seed,
                "a3_offset_db": offset, "ttt_ms": ttt,
                "n_packets": int(m.latencies_s.size),
                "n_handovers": m.n_handovers, "n_pingpongs": m.n_pingpongs,
                "total_outage_s": m.total_outage_s}
        (out / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        print(f"outputs written to {out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    report, raw = run_sweep(cfg, n_realizations=args.realizations,
                            n_workers=args.workers,
                            evaluate_scenario_loads=not args.no_scenarios,
                            emit_packets=args.emit_packets,
                            progress=args.progress)
    out = Path(args.out)
    write_run_outputs(out, report, raw, emit_packets=args.emit_packets,
                      packets_reservoir=args.packets_reservoir)
    best_o, best_t = report.best_point
    print(f"{len(report.summaries)} sweep points, "
          f"{len(report.realization_indices)} realizations each, "
          f"{report.wall_clock_s:.1f} s wall clock")
    print(f"best point: O={best_o:g} dB, TTT={best_t:g} ms")
    print(f"outputs written to {out}")
    return 0


def _cmd_report(args) -> int:
    regenerate_reports(args.in_dir)
    print(f"reports regenerated in {args.in_dir}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="frmcs-sim",
        description="Handover parameter tuning simulator for 5G railway networks")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one seeded realization")
    p_sim.add_argument("--config", help="scenario config JSON (defaults apply if omitted)")
    p_sim.add_argument("--seed", type=int, help="override base_seed")
    p_sim.add_argument("--offset-db", type=float, help="A3 offset override")
    p_sim.add_argument("--ttt-ms", type=float, help="time-to-trigger override")
    p_sim.add_argument("--out", help="output directory")
    p_sim.add_argument("--emit-packets", action="store_true")
    p_sim.add_argument("--emit-channel-trace", action="store_true")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run the (offset, TTT) grid")
    p_sweep.add_argument("--config", help="scenario config JSON")
    p_sweep.add_argument("--realizations", type=int,
                         help="override config n_realizations")
    p_sweep.add_argument("--out", default="sweep_out", help="output directory")
    p_sweep.add_argument("--workers", type=int, default=1,
                         help="parallel realization workers")
    p_sweep.add_argument("--emit-packets", action="store_true")
    p_sweep.add_argument("--packets-reservoir", type=int,
                         help="cap packets.csv rows per sweep point")
    p_sweep.add_argument("--no-scenarios", action="store_true",
                         help="skip the per-use-case load runs")
    p_sweep.add_argument("--progress", action="store_true")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_rep = sub.add_parser("report", help="regenerate CSVs from a sweep directory")
    p_rep.add_argument("--in", dest="in_dir", required=True)
    p_rep.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
