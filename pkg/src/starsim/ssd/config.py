"""SSD configuration mirroring the target-device table, deflated for desk runs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..errors import ConfigError, UnsupportedModeError
from ..randomizer.modes import Mode

CELL_BITS = {"tlc": 3, "qlc": 4}
T_R_US = {"tlc": 45.0, "qlc": 110.0}
T_PROG_US = {"tlc": 390.0, "qlc": 2000.0}
# erase time is not in the device table; a typical 3D NAND figure
T_BERS_US = {"tlc": 3500.0, "qlc": 10000.0}

# ladders fitted to the shipped default profiles
RETRY_DEFAULTS = {"tlc": (38.0, 1.0), "qlc": (40.0, 2.0)}

GiB = 1 << 30
# desk-scale default: 1 GiB of QLC, 768 MiB of TLC
DEFAULT_BLOCKS_PER_PLANE = 64


@dataclass(frozen=True)
class RetryLadder:
    """``r = ceil(max(0, E - t0) / dt)``, capped at ``max_retries``; ``E`` is
    the worst codeword error count of the page being read."""

    t0: float = 38.0
    dt: float = 1.0
    max_retries: int = 20

    def __post_init__(self):
        if self.dt <= 0 or self.t0 < 0 or self.max_retries < 0:
            raise ConfigError("retry ladder needs t0 >= 0, dt > 0, max_retries >= 0")


@dataclass(frozen=True)
class SSDConfig:
    cell_type: str = "qlc"
    capacity: int | None = None
    channels: int = 8
    chips_per_channel: int = 1
    planes_per_die: int = 2
    interface_GBps: float = 8.0
    tR_us: float | None = None
    tPROG_us: float | None = None
    tBERS_us: float | None = None
    ecc_bits_per_kib: int = 72
    page_bytes: int = 4096
    wordlines_per_block: int = 64
    gc_free_threshold: float = 0.10
    overprovision: float = 0.15
    mode: str = "baseline"
    retry: RetryLadder | None = None

    def __post_init__(self):
        if self.cell_type not in CELL_BITS:
            raise ConfigError(f"cell_type must be one of {sorted(CELL_BITS)}")
        mode = Mode.parse(self.mode)
        object.__setattr__(self, "mode", mode.value)
        if mode is Mode.TAILCUT and self.cell_type != "tlc":
            raise UnsupportedModeError("TailCut only supports TLC")
        for name, table in (("tR_us", T_R_US), ("tPROG_us", T_PROG_US), ("tBERS_us", T_BERS_US)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, table[self.cell_type])
        if self.retry is None:
            t0, dt = RETRY_DEFAULTS[self.cell_type]
            object.__setattr__(self, "retry", RetryLadder(t0, dt))
        elif isinstance(self.retry, dict):
            object.__setattr__(self, "retry", RetryLadder(**self.retry))
        for name in ("tR_us", "tPROG_us", "tBERS_us", "interface_GBps"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if min(self.channels, self.chips_per_channel, self.planes_per_die, self.page_bytes,
               self.wordlines_per_block) < 1:
            raise ConfigError("geometry entries must be positive")
        if self.capacity is None:
            object.__setattr__(self, "capacity", DEFAULT_BLOCKS_PER_PLANE * self.block_bytes * self.planes)
        if self.capacity <= 0 or self.capacity % (self.block_bytes * self.planes):
            raise ConfigError("capacity must be a whole number of blocks on every plane")
        if not 0 < self.gc_free_threshold < 1:
            raise ConfigError("gc_free_threshold must be in (0, 1)")
        if not self.gc_free_threshold < self.overprovision < 1:
            raise ConfigError("overprovision must exceed the GC free threshold")

    @property
    def m(self):
        return CELL_BITS[self.cell_type]

    @property
    def chips(self):
        return self.channels * self.chips_per_channel

    @property
    def planes(self):
        return self.chips * self.planes_per_die

    @property
    def pages_per_block(self):
        return self.wordlines_per_block * self.m

    @property
    def block_bytes(self):
        return self.pages_per_block * self.page_bytes

    @property
    def blocks_per_plane(self):
        return self.capacity // (self.block_bytes * self.planes)

    @property
    def total_pages(self):
        return self.capacity // self.page_bytes

    @property
    def logical_pages(self):
        """Host-visible pages; the rest is spare room for garbage collection."""
        return int(self.total_pages * (1.0 - self.overprovision))

    @property
    def ecc_capability(self):
        """Correctable bits per 1 KiB codeword."""
        return self.ecc_bits_per_kib

    def transfer_us(self, nbytes):
        return nbytes / (self.interface_GBps * 1e3)

    def with_mode(self, mode):
        return replace(self, mode=Mode.parse(mode).value)

    def to_dict(self):
        d = asdict(self)
        d["retry"] = asdict(self.retry)
        return d


def ssd_config_from_dict(d) -> SSDConfig:
    known = {f.name for f in fields(SSDConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown SSD config keys: {sorted(unknown)}")
    d = dict(d)
    if "retry" in d and isinstance(d["retry"], dict):
        d["retry"] = RetryLadder(**d["retry"])
    return SSDConfig(**d)


def load_ssd_config(path) -> SSDConfig:
    try:
        return ssd_config_from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
