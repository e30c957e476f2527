"""Filebench-like synthetic workloads and the trace file format."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import AddressError, ConfigError

SECTOR = 4096
KiB, MiB, GiB = 1 << 10, 1 << 20, 1 << 30

READ, WRITE = 0, 1
OP_NAMES = ("read", "write")


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    file_size: int
    file_count: int
    threads: int
    read_parts: int
    write_parts: int
    # per-request transfer cap; None moves whole files
    io_size: int | None = None

    def __post_init__(self):
        if min(self.file_size, self.file_count, self.threads) < 1:
            raise ConfigError("file size, file count and threads must be positive")
        if self.read_parts < 0 or self.write_parts < 0 or self.read_parts + self.write_parts == 0:
            raise ConfigError("read/write ratio needs a positive total")

    @property
    def read_fraction(self):
        return self.read_parts / (self.read_parts + self.write_parts)


PRESETS = {
    "web": WorkloadSpec("web", 32 * KiB, 20_000, 100, 10, 1),
    "file": WorkloadSpec("file", 256 * KiB, 50_000, 100, 1, 2),
    "mail": WorkloadSpec("mail", 16 * KiB, 50_000, 100, 1, 1),
    "db": WorkloadSpec("db", 512 * MiB, 10, 210, 20, 1, io_size=8 * KiB),
    "proxy": WorkloadSpec("proxy", 1 * MiB, 10_000, 100, 5, 1),
}


def workload_spec(name) -> WorkloadSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown workload {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass
class Trace:
    timestamp_us: np.ndarray
    op: np.ndarray
    lba: np.ndarray          # in SECTOR units
    size_bytes: np.ndarray

    def __post_init__(self):
        self.timestamp_us = np.asarray(self.timestamp_us, dtype=float)
        self.op = np.asarray(self.op, dtype=np.uint8)
        self.lba = np.asarray(self.lba, dtype=np.int64)
        self.size_bytes = np.asarray(self.size_bytes, dtype=np.int64)
        n = self.timestamp_us.size
        if not (self.op.size == self.lba.size == self.size_bytes.size == n):
            raise ConfigError("trace columns differ in length")
        if n and np.any(np.diff(self.timestamp_us) < 0):
            raise ConfigError("trace timestamps must be non-decreasing")
        if np.any(self.size_bytes <= 0) or np.any(self.size_bytes % SECTOR):
            raise ConfigError(f"request sizes must be positive multiples of {SECTOR}")
        if np.any(self.lba < 0):
            raise AddressError("negative LBA in trace")
        if np.any(self.op > WRITE):
            raise ConfigError("unknown op code in trace")

    def __len__(self):
        return int(self.timestamp_us.size)

    @property
    def n_reads(self):
        return int((self.op == READ).sum())

    @property
    def n_writes(self):
        return int((self.op == WRITE).sum())

    @property
    def end_sector(self):
        """One past the highest sector touched."""
        if not len(self):
            return 0
        return int((self.lba + self.size_bytes // SECTOR).max())

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp_us", "op", "lba", "size_bytes"])
        for t, o, a, s in zip(self.timestamp_us, self.op, self.lba, self.size_bytes):
            w.writerow([f"{t:.3f}", OP_NAMES[o], int(a), int(s)])


def read_trace_csv(fh) -> Trace:
    reader = csv.reader(line for line in fh if not line.startswith("#"))
    header = next(reader, None)
    if header != ["timestamp_us", "op", "lba", "size_bytes"]:
        raise ConfigError(f"bad trace header {header}")
    ts, ops, lbas, sizes = [], [], [], []
    for lineno, row in enumerate(reader, start=2):
        try:
            ts.append(float(row[0]))
            ops.append(OP_NAMES.index(row[1].strip().lower()))
            lbas.append(int(row[2]))
            sizes.append(int(row[3]))
        except (ValueError, IndexError):
            raise ConfigError(f"trace line {lineno}: cannot parse {row}") from None
    return Trace(ts, ops, lbas, sizes)


def deflate(spec: WorkloadSpec, capacity_bytes, fill=0.5):
    """File count and size shrunk so the file set covers at most ``fill`` of
    the drive; returns ``(file_count, file_size)``."""
    budget = int(capacity_bytes * fill)
    size = -(-spec.file_size // SECTOR) * SECTOR
    count = spec.file_count
    if count * size > budget:
        count = max(1, budget // size)
    if count * size > budget:
        size = max(SECTOR, budget // SECTOR * SECTOR)
    return count, size


def synthesize_workload(spec: WorkloadSpec, duration_us, seed, capacity_bytes=1 * GiB,
                        iops=2000.0, fill=0.5) -> Trace:
    """Open-loop trace of ``spec`` over ``duration_us``.

    Each thread issues Poisson arrivals at ``iops / threads``; merged they form
    the trace.  Reads and writes are an exact shuffle of the spec's ratio, and
    each request moves a whole file or one ``io_size`` chunk of it.
    """
    if duration_us <= 0:
        raise ConfigError("duration must be positive")
    if iops <= 0:
        raise ConfigError("iops must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x57A7]))
    n_files, fsize = deflate(spec, capacity_bytes, fill)
    file_sectors = fsize // SECTOR

    rate = iops / spec.threads / 1e6
    stamps = []
    for _ in range(spec.threads):
        expected = duration_us * rate
        k = int(expected + 6 * np.sqrt(expected) + 10)
        t = np.cumsum(rng.exponential(1.0 / rate, size=k))
        stamps.append(t[t < duration_us])
    ts = np.sort(np.concatenate(stamps))
    n = ts.size
    if n == 0:
        raise ConfigError("duration too short for any request")

    n_reads = int(round(n * spec.read_fraction))
    ops = np.full(n, WRITE, dtype=np.uint8)
    ops[:n_reads] = READ
    ops = ops[rng.permutation(n)]

    files = rng.integers(0, n_files, size=n)
    if spec.io_size is None or spec.io_size >= fsize:
        chunk = file_sectors
        offset = np.zeros(n, dtype=np.int64)
    else:
        chunk = -(-spec.io_size // SECTOR)
        offset = rng.integers(0, file_sectors - chunk + 1, size=n)
    lba = files.astype(np.int64) * file_sectors + offset
    sizes = np.full(n, chunk * SECTOR, dtype=np.int64)
    return Trace(ts, ops, lba, sizes)
