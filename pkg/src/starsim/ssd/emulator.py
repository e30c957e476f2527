"""Trace replay over per-plane FIFO queues with read-retry service times."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..errors import AddressError
from .config import SSDConfig
from .device import BlockSample, Condition, measure_read_retry
from .ftl import PageFTL
from .workload import READ, SECTOR, Trace


class RetrySampler:
    """Draws per-read retry counts from a measured distribution."""

    def __init__(self, probabilities, seed=0):
        p = np.asarray(probabilities, dtype=float)
        self.p = p / p.sum()
        self.cdf = np.cumsum(self.p)
        self.rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x4E7]))

    @classmethod
    def constant(cls, r=0):
        p = np.zeros(r + 1)
        p[r] = 1.0
        return cls(p)

    @property
    def mean(self):
        return float(np.dot(np.arange(self.p.size), self.p))

    def draw(self, n):
        u = self.rng.random(n)
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), self.p.size - 1)


@dataclass
class LatencyReport:
    """Per-request latency with its additive decomposition (all in us)."""

    op: np.ndarray
    latency: np.ndarray
    queueing: np.ndarray
    media: np.ndarray
    transfer: np.ndarray
    retries: np.ndarray       # total retries across the request's page reads
    pages: np.ndarray
    gc_runs: int = 0

    def _sel(self, op):
        return self.op == op

    @property
    def mean_read_latency(self):
        sel = self._sel(READ)
        return float(self.latency[sel].mean()) if sel.any() else 0.0

    @property
    def mean_write_latency(self):
        sel = ~self._sel(READ)
        return float(self.latency[sel].mean()) if sel.any() else 0.0

    @property
    def mean_read_service(self):
        """Mean read latency without the queueing component."""
        sel = self._sel(READ)
        return float((self.media[sel] + self.transfer[sel]).mean()) if sel.any() else 0.0

    def read_percentile(self, q):
        sel = self._sel(READ)
        return float(np.percentile(self.latency[sel], q)) if sel.any() else 0.0

    @property
    def retries_per_page_read(self):
        sel = self._sel(READ)
        pages = self.pages[sel].sum()
        return float(self.retries[sel].sum() / pages) if pages else 0.0

    def retry_histogram(self):
        sel = self._sel(READ)
        return np.bincount(self.retries[sel]) if sel.any() else np.zeros(1, dtype=np.int64)

    def decomposition_error(self):
        return float(np.abs(self.latency - (self.queueing + self.media + self.transfer)).max(initial=0.0))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["request", "op", "latency_us", "queueing_us", "media_us", "transfer_us", "retries"])
        for i in range(self.op.size):
            w.writerow([i, "read" if self.op[i] == READ else "write", f"{self.latency[i]:.3f}",
                        f"{self.queueing[i]:.3f}", f"{self.media[i]:.3f}", f"{self.transfer[i]:.3f}",
                        int(self.retries[i])])
        return buf.getvalue()


def retry_sampler_for(ssd: SSDConfig, profile, cond: Condition, n_blocks=4, seed=0,
                      sample: BlockSample | None = None) -> RetrySampler:
    stats = measure_read_retry(ssd, profile, cond, n_blocks, seed, sample)
    return RetrySampler(stats.distribution(), seed)


def run_trace(ssd: SSDConfig, trace: Trace, retries: RetrySampler, prefill=True) -> LatencyReport:
    """Replay ``trace``; each request splits into page operations on planes.

    Planes serve their operations first come first served.  A read page costs
    ``(1 + r) * tR`` with ``r`` drawn from ``retries``; a write page costs
    ``tPROG``.  Host transfer precedes writes and follows reads.  Garbage
    collection triggered by a write occupies its plane right after it.
    """
    ftl = PageFTL(ssd)
    ratio = ssd.page_bytes // SECTOR if ssd.page_bytes >= SECTOR else 1
    first = trace.lba // ratio
    last = (trace.lba + trace.size_bytes // SECTOR - 1) // ratio
    if len(trace) and last.max() >= ftl.l2p.size:
        raise AddressError(f"trace touches logical page {int(last.max())}, drive has {ftl.l2p.size}")
    if prefill and len(trace):
        touched = np.unique(np.concatenate([np.arange(a, b + 1) for a, b in zip(first, last)]))
        ftl.prefill(touched)
    gc_runs_before = ftl.gc_runs

    n = len(trace)
    free_at = np.zeros(ssd.planes)
    out = {k: np.zeros(n) for k in ("latency", "queueing", "media", "transfer")}
    total_retries = np.zeros(n, dtype=np.int64)
    n_pages = np.zeros(n, dtype=np.int64)
    copy_cost = ssd.tR_us + ssd.tPROG_us

    for i in range(n):
        t = trace.timestamp_us[i]
        lpns = np.arange(first[i], last[i] + 1)
        xfer = ssd.transfer_us(int(trace.size_bytes[i]))
        n_pages[i] = lpns.size
        if trace.op[i] == READ:
            planes = np.empty(lpns.size, dtype=np.int64)
            for j, lpn in enumerate(lpns):
                p = ftl.lookup(int(lpn))
                if p is None:
                    p, _ = ftl.write(int(lpn))
                planes[j] = p
            r = retries.draw(lpns.size)
            total_retries[i] = int(r.sum())
            service = (1 + r) * ssd.tR_us
            ready = t
        else:
            planes = np.empty(lpns.size, dtype=np.int64)
            gc_work = []
            for j, lpn in enumerate(lpns):
                planes[j], gc = ftl.write(int(lpn))
                gc_work.extend(gc)
            service = np.full(lpns.size, ssd.tPROG_us)
            ready = t + xfer
        # per-plane FIFO: this request's pages on one plane run back to back
        busy = np.bincount(planes, weights=service, minlength=ssd.planes)
        used = np.flatnonzero(busy)
        start = np.maximum(ready, free_at[used])
        end = start + busy[used]
        free_at[used] = end
        k = int(np.argmax(end))
        finish = end[k]
        media = busy[used][k]
        if trace.op[i] == READ:
            finish += xfer
        else:
            for plane, copies, erases in gc_work:
                free_at[plane] += copies * copy_cost + erases * ssd.tBERS_us
        out["latency"][i] = finish - t
        out["transfer"][i] = xfer
        out["media"][i] = media
        out["queueing"][i] = out["latency"][i] - media - xfer
    return LatencyReport(trace.op.copy(), out["latency"], out["queueing"], out["media"],
                         out["transfer"], total_retries, n_pages, ftl.gc_runs - gc_runs_before)
