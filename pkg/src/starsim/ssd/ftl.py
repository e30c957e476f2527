"""Page-mapping FTL with round-robin plane striping and greedy garbage collection."""

from __future__ import annotations

from collections import deque

import numpy as np

from ..errors import AddressError, ConfigError
from .config import SSDConfig

UNMAPPED = -1


class PageFTL:
    """Logical page -> physical page map over ``cfg.planes`` planes.

    Writes rotate over planes channel-first so consecutive pages land on
    different channels.  When a plane's free-block pool drops below the GC
    threshold, the full block with the fewest valid pages is relocated and
    erased.  Returned GC work is a list of ``(plane, copies, erases)``.
    """

    def __init__(self, cfg: SSDConfig):
        self.cfg = cfg
        self.n_planes = cfg.planes
        self.bpp = cfg.blocks_per_plane
        self.ppb = cfg.pages_per_block
        n_blocks = self.n_planes * self.bpp
        if self.bpp < 3:
            raise ConfigError("need at least three blocks per plane for GC")
        self.l2p = np.full(cfg.logical_pages, UNMAPPED, dtype=np.int64)
        self.p2l = np.full(n_blocks * self.ppb, UNMAPPED, dtype=np.int64)
        self.valid = np.zeros(n_blocks, dtype=np.int64)
        self.erase_count = np.zeros(n_blocks, dtype=np.int64)
        self.free = [deque(range(p * self.bpp + 1, (p + 1) * self.bpp)) for p in range(self.n_planes)]
        self.active = [p * self.bpp for p in range(self.n_planes)]
        self.next_page = [0] * self.n_planes
        self.gc_floor = max(1, int(np.ceil(cfg.gc_free_threshold * self.bpp)))
        chips, dies = cfg.chips, cfg.planes_per_die
        # channel-first rotation: unit k -> chip k % chips, plane-in-die k // chips
        self.rotation = [(k % chips) * dies + (k // chips) % dies for k in range(self.n_planes)]
        self._rr = 0
        self.gc_runs = 0

    def plane_of_block(self, block):
        return block // self.bpp

    def chip_of_plane(self, plane):
        return plane // self.cfg.planes_per_die

    def _check(self, lpn):
        if not 0 <= lpn < self.l2p.size:
            raise AddressError(f"logical page {lpn} outside 0..{self.l2p.size - 1}")

    def lookup(self, lpn):
        """Plane holding ``lpn``, or None if it was never written."""
        self._check(lpn)
        ppn = self.l2p[lpn]
        return None if ppn == UNMAPPED else int(ppn // (self.bpp * self.ppb))

    def _program(self, plane, lpn):
        if self.next_page[plane] == self.ppb:
            if not self.free[plane]:
                raise AddressError(f"plane {plane} out of free blocks")
            self.active[plane] = self.free[plane].popleft()
            self.next_page[plane] = 0
        block = self.active[plane]
        ppn = block * self.ppb + self.next_page[plane]
        self.next_page[plane] += 1
        self.p2l[ppn] = lpn
        self.l2p[lpn] = ppn
        self.valid[block] += 1

    def _invalidate(self, lpn):
        old = self.l2p[lpn]
        if old != UNMAPPED:
            self.p2l[old] = UNMAPPED
            self.valid[old // self.ppb] -= 1

    def write(self, lpn):
        """Map ``lpn`` to a fresh page; returns ``(plane, gc_work)``."""
        self._check(lpn)
        plane = self.rotation[self._rr]
        self._rr = (self._rr + 1) % self.n_planes
        self._invalidate(lpn)
        self._program(plane, lpn)
        gc = []
        while len(self.free[plane]) < self.gc_floor:
            copies = self._collect(plane)
            if copies is None:
                break
            gc.append((plane, copies, 1))
        return plane, gc

    def _collect(self, plane):
        lo = plane * self.bpp
        blocks = np.arange(lo, lo + self.bpp)
        candidates = [b for b in blocks if b != self.active[plane] and b not in self.free[plane]]
        if not candidates:
            return None
        victim = min(candidates, key=lambda b: (self.valid[b], b))
        if self.valid[victim] >= self.ppb:
            return None
        pages = self.p2l[victim * self.ppb:(victim + 1) * self.ppb]
        moved = [int(lpn) for lpn in pages if lpn != UNMAPPED]
        for lpn in moved:
            self._invalidate(lpn)
            self._program(plane, lpn)
        self.p2l[victim * self.ppb:(victim + 1) * self.ppb] = UNMAPPED
        self.valid[victim] = 0
        self.erase_count[victim] += 1
        self.free[plane].append(victim)
        self.gc_runs += 1
        return len(moved)

    def prefill(self, lpns):
        """Map pages without timing (drive preconditioning)."""
        for lpn in lpns:
            self.write(int(lpn))
