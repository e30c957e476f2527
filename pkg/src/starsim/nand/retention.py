"""Retention and program-time error injection.

Retention flips a cell one state with probability
``base(k) * (1 + c_pec*PEC/1000) * (t/12)**delta * (1 + lcs(up, k, down))``
where ``lcs`` grows with the charge distance to the two bitline neighbours.
An optional pair term couples the two distances, so a victim squeezed by
two distant neighbours (E-P7-E) is worse than the sum of its halves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class LcsModel:
    beta: float
    gamma: float
    erase_gap: float = 0.0
    n_states: int = 16
    beta_pair: float = 0.0

    @classmethod
    def from_profile(cls, profile):
        return cls(profile.beta, profile.gamma, profile.erase_gap, profile.n_states, profile.beta_pair)

    def charge_levels(self):
        q = np.arange(self.n_states, dtype=float)
        q[0] -= self.erase_gap
        return q

    def factor_table(self):
        """``table[up, k, down]`` of the LCS multiplier term."""
        q = self.charge_levels()
        dist = np.abs(q[:, None] - q[None, :]) ** self.gamma  # [victim, nbr]
        up = dist.T[:, :, None]
        down = dist[None, :, :]
        return self.beta * (up + down) + self.beta_pair * up * down

    def lcs_factor(self, k_up, k, k_down):
        return float(self.factor_table()[k_up, k, k_down])

    def direction_table(self):
        """Shift direction (+1/-1) per triple: toward the gradient-weighted
        neighbour mean; isolated cells lose charge, erased cells gain."""
        n = self.n_states
        q = self.charge_levels()
        w = np.abs(q[:, None] - q[None, :]) ** max(self.gamma, 1e-9)
        w_up = w.T[:, :, None]
        w_down = w[None, :, :]
        q_up = q[:, None, None]
        q_down = q[None, None, :]
        q_k = q[None, :, None]
        total = w_up + w_down
        with np.errstate(invalid="ignore", divide="ignore"):
            target = np.where(total > 0, (w_up * q_up + w_down * q_down) / total, q_k)
        direction = np.where(target > q_k, 1, -1).astype(np.int8)
        direction = np.broadcast_to(direction, (n, n, n)).copy()
        direction[:, 0, :] = 1
        direction[:, n - 1, :] = -1
        return direction


def aging_factor(pec, months, c_pec, delta):
    if months < 0:
        raise DomainError("retention time must be non-negative")
    if pec < 0:
        raise DomainError("PEC must be non-negative")
    if months == 0:
        return 0.0
    return (1.0 + c_pec * pec / 1000.0) * (months / 12.0) ** delta


def flip_probability_table(profile, pec, months, lcs: LcsModel | None = None):
    """``p[up, k, down]`` for one (PEC, retention) condition."""
    lcs = lcs or LcsModel.from_profile(profile)
    scale = aging_factor(pec, months, profile.c_pec, profile.delta)
    base = np.asarray(profile.retention_base, dtype=float)[None, :, None]
    return np.minimum(1.0, base * scale * (1.0 + lcs.factor_table()))


def block_rng(seed, chip, block, stream=0):
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream, chip, block]))


def _neighbors(states):
    up = np.empty_like(states)
    down = np.empty_like(states)
    up[1:] = states[:-1]
    up[0] = states[0]
    down[:-1] = states[1:]
    down[-1] = states[-1]
    return up, down


def _blocks(array, blocks):
    if blocks is None:
        g = array.geometry
        return [(c, b) for c in range(g.chips) for b in range(g.blocks)]
    return list(blocks)


def apply_retention(array, months, profile, lcs: LcsModel | None = None, rng_seed=0,
                    blocks=None, pec=None):
    """Shift cells of every programmed wordline by one state with LCS-scaled odds.

    Uses the current states as the starting point.  The same seed draws the
    same uniforms, so from fixed starting states the set of flipped cells only
    grows with PEC and retention time.
    """
    if months < 0:
        raise DomainError("retention time must be non-negative")
    if months == 0:
        return
    lcs = lcs or LcsModel.from_profile(profile)
    n = profile.n_states
    direction = lcs.direction_table().ravel()
    for chip, block in _blocks(array, blocks):
        mask = array.wl_programmed[chip, block]
        if not mask.any():
            continue
        block_pec = array.pec[chip, block] if pec is None else pec
        p = flip_probability_table(profile, block_pec, months, lcs).ravel()
        cur = array.current[chip, block]
        up, down = _neighbors(cur)
        idx = (up.astype(np.uint16) * n + cur) * n + down
        u = block_rng(rng_seed, chip, block).random(cur.shape, dtype=np.float32)
        flip = (u < p.astype(np.float32)[idx]) & mask[:, None]
        shifted = cur.astype(np.int8) + direction[idx] * flip
        array.current[chip, block] = shifted.astype(np.uint8)


def apply_program_noise(array, profile, rng_seed=0, blocks=None, pec=None):
    """Initial and endurance errors: one-state shifts with probability
    ``program_noise[k] * (1 + c_pec*PEC/1000)``, present before any retention."""
    noise = np.asarray(profile.program_noise, dtype=float)
    if not noise.any():
        return
    n = profile.n_states
    # edge states can only move inward; 0 means a coin flip decides
    forced = np.zeros(n, dtype=np.int8)
    forced[0], forced[n - 1] = 1, -1
    for chip, block in _blocks(array, blocks):
        mask = array.wl_programmed[chip, block]
        block_pec = array.pec[chip, block] if pec is None else pec
        if not mask.any():
            continue
        cur = array.current[chip, block]
        rng = block_rng(rng_seed, chip, block, stream=1)
        u = rng.random(cur.size, dtype=np.float32)
        # one coin per cell, packed eight to a byte
        coins = rng.integers(0, 256, size=(cur.size + 7) // 8, dtype=np.uint8)
        p = np.minimum(1.0, noise * (1.0 + profile.c_pec * block_pec / 1000.0)).astype(np.float32)
        flat = cur.reshape(-1)
        hit = np.flatnonzero(u < p[flat])
        hit = hit[mask[hit // cur.shape[1]]]
        coin = ((coins[hit >> 3] >> (hit & 7).astype(np.uint8)) & 1).astype(np.int8) * 2 - 1
        step = forced[flat[hit]]
        step = np.where(step == 0, coin, step)
        flat[hit] = (flat[hit].astype(np.int8) + step).astype(np.uint8)
        array.current[chip, block] = flat.reshape(cur.shape)


def age_block(array, chip, block, profile, pec, months, rng_seed=0, lcs=None):
    """Reset a block to its programmed data, then apply wear and retention."""
    array.reset_current(chip, block)
    apply_program_noise(array, profile, rng_seed, blocks=[(chip, block)], pec=pec)
    apply_retention(array, months, profile, lcs, rng_seed, blocks=[(chip, block)], pec=pec)
