"""Cycle-accounting model of the STAR write datapath.

Three hardware stages (LFSR, group error estimator, bit flipper) process one
group at a time.  Zig-zag scheduling makes every page bit of a group arrive
together, so a group is ready once ``group_size * m / io_width`` cycles of
beats have streamed in.  Each stage is described by a latency (cycles from
accepting a group to handing it on) and a service interval (cycles before it
can accept the next group).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError

STAGES = ("lfsr", "estimator", "flipper")


@dataclass(frozen=True)
class DatapathConfig:
    clock_ns: float = 1.0
    io_width_bits: int = 64
    # lfsr, estimator, flipper; the estimator figure covers the LUT read,
    # the adder tree across one beat and the 16-way compare
    stage_latencies: tuple = (4, 16, 4)
    group_size: int = 128
    m: int = 4
    pee_units: int | None = None
    cycles_per_cell: int = 1

    def __post_init__(self):
        if self.io_width_bits not in (32, 64):
            raise ConfigError("io_width_bits must be 32 or 64")
        if self.units < 1:
            raise ConfigError("pee_units must be >= 1")
        if len(self.stage_latencies) != 3 or min(self.stage_latencies) < 1:
            raise ConfigError("need three stage latencies of at least one cycle")
        if self.clock_ns <= 0 or self.group_size < 1 or self.cycles_per_cell < 1:
            raise ConfigError("clock, group size and per-cell cost must be positive")

    @property
    def units(self):
        return (1 << self.m) if self.pee_units is None else self.pee_units

    @property
    def group_bits(self):
        return self.group_size * self.m

    @property
    def cells_per_beat(self):
        return max(1, self.io_width_bits // self.m)

    @property
    def arrival_cycles(self):
        """Cycles for one group's bits to stream in at the IO width."""
        return math.ceil(self.group_bits / self.io_width_bits)


def estimate_pee_time(cfg: DatapathConfig, group_size=None):
    """Serial work of the parallel estimator for one group, in cycles: each
    unit scans the group once per mask it owns."""
    g = cfg.group_size if group_size is None else group_size
    return math.ceil((1 << cfg.m) / cfg.units) * g * cfg.cycles_per_cell


def stage_service_cycles(cfg: DatapathConfig):
    """Per-group service interval of each stage.

    LFSR and flipper keep up with the IO beats.  Estimator units consume a
    whole beat of cells per step, so a single pass over the group takes as
    many steps as there are beats; fewer units than masks means extra passes.
    """
    beats = cfg.arrival_cycles
    passes = math.ceil((1 << cfg.m) / cfg.units)
    est = passes * math.ceil(cfg.group_size / cfg.cells_per_beat) * cfg.cycles_per_cell
    return (beats, est, beats)


@dataclass
class PipelineReport:
    initial_latency_ns: float
    sustained_throughput_bits_per_cycle: float
    stall_cycles_per_group: int
    bottleneck_stage: str
    total_cycles: int
    n_groups: int
    completions: list = field(default_factory=list, repr=False)


def _report(cfg, n_groups, total):
    service = stage_service_cycles(cfg)
    a = cfg.arrival_cycles
    slowest = max(service)
    stall = max(0, slowest - a)
    bottleneck = STAGES[service.index(slowest)] if slowest > a else "none"
    throughput = cfg.group_bits / max(a, slowest)
    return PipelineReport(
        initial_latency_ns=sum(cfg.stage_latencies) * cfg.clock_ns,
        sustained_throughput_bits_per_cycle=min(float(cfg.io_width_bits), throughput),
        stall_cycles_per_group=stall,
        bottleneck_stage=bottleneck,
        total_cycles=total,
        n_groups=n_groups,
    )


def simulate_pipeline(cfg: DatapathConfig, n_groups) -> PipelineReport:
    """Closed-form fill/drain accounting.

    The last group leaves after the first group's arrival, the summed stage
    latencies and one bottleneck interval per further group.
    """
    if n_groups < 1:
        raise ConfigError("n_groups must be >= 1")
    a = cfg.arrival_cycles
    interval = max(a, max(stage_service_cycles(cfg)))
    total = a + sum(cfg.stage_latencies) + (n_groups - 1) * interval
    return _report(cfg, n_groups, total)


def enumerate_pipeline(cfg: DatapathConfig, n_groups) -> PipelineReport:
    """Group-by-group event enumeration of the same pipeline (reference)."""
    if n_groups < 1:
        raise ConfigError("n_groups must be >= 1")
    a = cfg.arrival_cycles
    service = stage_service_cycles(cfg)
    free = [0] * len(STAGES)
    done = []
    for g in range(n_groups):
        t = (g + 1) * a
        for s, (lat, svc) in enumerate(zip(cfg.stage_latencies, service)):
            start = max(t, free[s])
            free[s] = start + svc
            t = start + lat
        done.append(t)
    rep = _report(cfg, n_groups, done[-1])
    rep.completions = done
    return rep


def schedule_zigzag(pages, group_size, io_width_bits=64):
    """Reorder m page bit-vectors into IO beats, group by group.

    Within a group the pages follow LSB, CSB, MSB, TSB order.  Returns a
    ``(beats, io_width_bits)`` array; the tail beat is zero padded when the
    bit count is not a multiple of the width.
    """
    pages = np.asarray(pages, dtype=np.uint8)
    if pages.ndim != 2:
        raise DimensionError("pages must be a (m, cells) bit matrix")
    m, n = pages.shape
    stream = zigzag_order(m, n, group_size)
    flat = pages.ravel()[stream]
    n_beats = -(-flat.size // io_width_bits)
    out = np.zeros(n_beats * io_width_bits, dtype=np.uint8)
    out[: flat.size] = flat
    return out.reshape(n_beats, io_width_bits)


def zigzag_order(m, n_cells, group_size):
    """Flat page-major bit indices in zig-zag transfer order."""
    idx = []
    for start in range(0, n_cells, group_size):
        stop = min(start + group_size, n_cells)
        for j in range(m):
            idx.append(np.arange(j * n_cells + start, j * n_cells + stop))
    return np.concatenate(idx) if idx else np.zeros(0, dtype=np.intp)


def unschedule_zigzag(beats, m, n_cells, group_size):
    """Inverse of :func:`schedule_zigzag`."""
    flat = np.asarray(beats, dtype=np.uint8).ravel()[: m * n_cells]
    out = np.empty(m * n_cells, dtype=np.uint8)
    out[zigzag_order(m, n_cells, group_size)] = flat
    return out.reshape(m, n_cells)


REPORT_HEADER = ["config_id", "initial_latency_ns", "throughput", "stall_cycles", "bottleneck"]


def report_csv(rows):
    """``rows`` is an iterable of ``(config_id, PipelineReport)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for cid, rep in rows:
        w.writerow([cid, f"{rep.initial_latency_ns:g}", f"{rep.sustained_throughput_bits_per_cycle:g}",
                    rep.stall_cycles_per_group, rep.bottleneck_stage])
    return buf.getvalue()
