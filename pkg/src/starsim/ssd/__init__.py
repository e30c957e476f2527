"""Trace-driven SSD emulator with read-retry, lifetime and workload tooling."""

from .config import RetryLadder, SSDConfig, load_ssd_config, ssd_config_from_dict
from .device import (
    BlockSample,
    Condition,
    LifetimeReport,
    ReadRetryModel,
    RetryStats,
    measure_read_retry,
    sweep_lifetime,
)
from .emulator import LatencyReport, RetrySampler, retry_sampler_for, run_trace
from .ftl import PageFTL
from .workload import PRESETS, Trace, WorkloadSpec, read_trace_csv, synthesize_workload, workload_spec

__all__ = [
    "RetryLadder", "SSDConfig", "load_ssd_config", "ssd_config_from_dict", "BlockSample",
    "Condition", "LifetimeReport", "ReadRetryModel", "RetryStats", "measure_read_retry",
    "sweep_lifetime", "LatencyReport", "RetrySampler", "retry_sampler_for", "run_trace",
    "PageFTL", "PRESETS", "Trace", "WorkloadSpec", "read_trace_csv", "synthesize_workload",
    "workload_spec",
]
