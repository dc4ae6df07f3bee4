"""FTP Model 3 traffic generation and fluid FIFO queueing.

Packets of a fixed size arrive as a Poisson process and are served in
order through a rate-limited pipe whose instantaneous rate follows the
radio link; service halts entirely inside outage intervals. The queue is
solved exactly on a piecewise-linear cumulative-service curve, so packet
departures are analytic rather than time-stepped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .handover import OutageInterval

DIRECTIONS = ("dl", "ul")


@dataclass(frozen=True)
class TrafficConfig:
    packet_size_bits: float = 4e6   # 0.5 MB with 1 MB = 1e6 bytes
    arrival_rate_pps: float = 2.5
    directions: tuple[str, ...] = DIRECTIONS

    def __post_init__(self):
        if self.packet_size_bits <= 0:
            raise ValueError("packet_size_bits must be positive")
        if self.arrival_rate_pps < 0:
            raise ValueError("arrival_rate_pps must be >= 0")
        for d in self.directions:
            if d not in DIRECTIONS:
                raise ValueError(f"unknown direction {d!r}")

    @property
    def load_bps(self) -> float:
        return self.packet_size_bits * self.arrival_rate_pps


def arrival_rate_for_load(load_bps: float, packet_size_bits: float = 4e6) -> float:
    """Invert load = size * rate for the per-scenario traffic loads."""
    return load_bps / packet_size_bits


@dataclass
class PacketRecord:
    ue_id: int
    direction: str
    arrival_s: float
    size_bits: float
    departure_s: float
    latency_s: float
    flushed: bool = False  # departed only in the post-horizon drain


def generate_arrivals(rng: np.random.Generator, rate_pps: float,
                      duration_s: float) -> np.ndarray:
    """Homogeneous Poisson arrival times on [0, duration)."""
    if rate_pps < 0:
        raise ValueError("rate must be >= 0")
    if rate_pps == 0 or duration_s <= 0:
        return np.array([])
    arrivals = []
    t = 0.0
    # draw in chunks to keep the generator call count low
    chunk = max(16, int(rate_pps * duration_s * 1.2))
    while True:
        gaps = rng.exponential(1.0 / rate_pps, size=chunk)
        times = t + np.cumsum(gaps)
        inside = times < duration_s
        arrivals.append(times[inside])
        if not inside.all():
            break
        t = times[-1]
    return np.concatenate(arrivals)


def _service_curve(rate_fn, outages: list[OutageInterval], duration_s: float,
                   step_s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Piecewise-linear cumulative service S(t) in bits over [0, horizon].

    The rate is sampled at the left edge of every segment (piecewise
    constant between step boundaries) and forced to zero inside outages,
    whose sub-step boundaries become extra breakpoints.
    """
    horizon = duration_s
    for o in outages:
        if o.end_s > horizon:
            horizon = o.end_s
    n_steps = int(math.ceil(horizon / step_s - 1e-9))
    bounds = np.arange(n_steps + 1, dtype=float) * step_s
    if bounds[-1] < horizon:
        bounds = np.append(bounds, horizon)
    cuts = []
    for o in outages:
        if o.end_s <= o.start_s:
            raise ValueError("outage interval must have positive duration")
        cuts.extend((o.start_s, o.end_s))
    if cuts:
        bounds = np.unique(np.concatenate([bounds, np.array(cuts)]))
        bounds = bounds[(bounds >= 0.0) & (bounds <= bounds[-1])]
    lefts = bounds[:-1]
    rates = np.asarray(rate_fn(lefts), dtype=float)
    if rates.shape != lefts.shape:  # scalar-only rate function
        rates = np.array([float(rate_fn(t)) for t in lefts])
    if np.any(rates < 0):
        raise ValueError("rate function must be non-negative")
    for o in outages:
        rates[(lefts >= o.start_s - 1e-15) & (lefts < o.end_s - 1e-15)] = 0.0
    cum = np.concatenate(([0.0], np.cumsum(rates * np.diff(bounds))))
    return bounds, rates, cum


def serve_queue(arrivals_s, size_bits: float, rate_fn,
                outages: list[OutageInterval], duration_s: float,
                step_s: float = 1e-3, ue_id: int = 0,
                direction: str = "dl") -> list[PacketRecord]:
    """FIFO fluid service of fixed-size packets.

    Each packet departs once its ``size_bits`` of service, integrated over
    ``rate_fn`` (zeroed inside ``outages``), completes behind all earlier
    packets. Packets still queued at ``duration_s`` are drained at the final
    rate and flagged ``flushed``.
    """
    arrivals = np.asarray(arrivals_s, dtype=float)
    if arrivals.size == 0:
        return []
    if np.any(np.diff(arrivals) < 0):
        raise ValueError("arrivals must be sorted")
    if size_bits <= 0:
        raise ValueError("size_bits must be positive")
    ordered = sorted(outages, key=lambda o: o.start_s)
    for a, b in zip(ordered, ordered[1:]):
        if b.start_s < a.end_s:
            raise ValueError("outage intervals must not overlap")

    bounds, rates, cum = _service_curve(rate_fn, ordered, duration_s, step_s)
    arrival_levels = np.interp(arrivals, bounds, cum)
    flush_rate = None  # lazily resolved positive rate for the drain phase

    records = []
    level = 0.0
    for arrival, start_level in zip(arrivals, arrival_levels):
        level = max(level, float(start_level)) + size_bits
        if level <= cum[-1]:
            j = int(np.searchsorted(cum, level, side="left"))
            departure = bounds[j - 1] + (level - cum[j - 1]) / rates[j - 1]
        else:
            if flush_rate is None:
                flush_rate = float(rate_fn(bounds[-1]))
                if flush_rate <= 0:
                    positive = rates[rates > 0]
                    if positive.size == 0:
                        raise ValueError("cannot flush queue: rate is never positive")
                    flush_rate = float(positive[-1])
            departure = float(bounds[-1]) + (level - float(cum[-1])) / flush_rate
        records.append(PacketRecord(ue_id=ue_id, direction=direction,
                                    arrival_s=float(arrival), size_bits=size_bits,
                                    departure_s=float(departure),
                                    latency_s=float(departure - arrival),
                                    flushed=bool(departure > duration_s)))
    return records
