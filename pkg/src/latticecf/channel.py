"""Two-phase Gaussian two-way relay channel.

Two terminals exchange data through a relay in half duplex: an uplink
slot where both transmit at once (the relay sees the superposition plus
noise) and a downlink slot where the relay broadcasts.  There is no
direct terminal-to-terminal path.  Channel gains are real amplitudes
and the same gain applies in both directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (float(x_db) / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(float(x))


@dataclass(frozen=True)
class ChannelConfig:
    """Powers, gains and noise variances, all in linear units.

    h1 and h2 are amplitudes (their squares are the power gains used in
    figure captions).  Zero powers or noise variances are accepted so
    exact noiseless and silent-terminal limits can be exercised; the
    closed-form rate engine requires strictly positive noise.
    """

    h1: float
    h2: float
    P1: float
    P2: float
    PR: float
    sigma_R2: float
    sigma_1_2: float
    sigma_2_2: float

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError("channel gains must be positive real amplitudes")
        for name in ("P1", "P2", "PR", "sigma_R2", "sigma_1_2", "sigma_2_2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def sigma2_u1(self) -> float:
        """Variance per dimension of the part of the uplink unknown to terminal 1."""
        return self.h2 ** 2 * self.P2 + self.sigma_R2

    @property
    def sigma2_u2(self) -> float:
        """Variance per dimension of the part of the uplink unknown to terminal 2."""
        return self.h1 ** 2 * self.P1 + self.sigma_R2


def config_from_db(p1_db, p2_db, pr_db, h1_sq, h2_sq,
                   sigma_r2=1.0, sigma_1_2=1.0, sigma_2_2=1.0) -> ChannelConfig:
    """Build a config from caption conventions: dB powers, squared gains."""
    if not (h1_sq > 0 and h2_sq > 0):
        raise ValueError("squared gains must be positive")
    return ChannelConfig(
        h1=math.sqrt(h1_sq),
        h2=math.sqrt(h2_sq),
        P1=db_to_linear(p1_db),
        P2=db_to_linear(p2_db),
        PR=db_to_linear(pr_db),
        sigma_R2=float(sigma_r2),
        sigma_1_2=float(sigma_1_2),
        sigma_2_2=float(sigma_2_2),
    )


class SignalBlock(NamedTuple):
    """A block of real samples with its nominal per-dimension power."""

    samples: np.ndarray
    per_dimension_power: float


@dataclass(frozen=True)
class MessageIndex:
    """An integer message together with its bit budget."""

    value: int
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bit budget must be positive")
        if not 0 <= self.value < 2 ** self.bits:
            raise ValueError(f"value {self.value} does not fit in {self.bits} bits")


def block_samples(block: Union[SignalBlock, np.ndarray]) -> np.ndarray:
    """Samples of a SignalBlock, or the array itself."""
    if isinstance(block, SignalBlock):
        return np.asarray(block.samples, dtype=float)
    return np.asarray(block, dtype=float)


def generate_source(power: float, n: int, seed) -> SignalBlock:
    """i.i.d. zero-mean Gaussian samples with the given per-dimension power."""
    if not power > 0:
        raise ValueError("source power must be positive")
    if n < 1:
        raise ValueError("block length must be at least 1")
    rng = np.random.default_rng(seed)
    return SignalBlock(
        samples=rng.normal(0.0, math.sqrt(power), int(n)),
        per_dimension_power=float(power),
    )


def _noise(variance: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if variance == 0.0:
        return np.zeros(n)
    return rng.normal(0.0, math.sqrt(variance), n)


def mac_phase(cfg: ChannelConfig, x1, x2, seed) -> SignalBlock:
    """Uplink slot: the relay observes h1*x1 + h2*x2 plus its own noise."""
    a = block_samples(x1)
    b = block_samples(x2)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    rng = np.random.default_rng(seed)
    y = cfg.h1 * a + cfg.h2 * b + _noise(cfg.sigma_R2, a.size, rng)
    power = cfg.h1 ** 2 * cfg.P1 + cfg.h2 ** 2 * cfg.P2 + cfg.sigma_R2
    return SignalBlock(samples=y, per_dimension_power=power)


def bc_phase(cfg: ChannelConfig, x_r, seed) -> tuple[SignalBlock, SignalBlock]:
    """Downlink slot: each terminal hears the relay through its own gain and noise."""
    x = block_samples(x_r)
    rng = np.random.default_rng(seed)
    y1 = cfg.h1 * x + _noise(cfg.sigma_1_2, x.size, rng)
    y2 = cfg.h2 * x + _noise(cfg.sigma_2_2, x.size, rng)
    return (
        SignalBlock(y1, cfg.h1 ** 2 * cfg.PR + cfg.sigma_1_2),
        SignalBlock(y2, cfg.h2 ** 2 * cfg.PR + cfg.sigma_2_2),
    )


def decompose(cfg: ChannelConfig, y_r, x1, x2, terminal: int) -> tuple[SignalBlock, SignalBlock]:
    """Split the uplink observation into a terminal's known and unknown parts.

    Terminal i already knows its own contribution S_i = h_i * x_i, so
    the remainder U_i = y_R - S_i (the other terminal's signal plus
    relay noise) is all it needs the relay to describe.
    """
    y = block_samples(y_r)
    a = block_samples(x1)
    b = block_samples(x2)
    if not (y.shape == a.shape == b.shape):
        raise ValueError("signal lengths must agree")
    if terminal == 1:
        s = cfg.h1 * a
        u_power = cfg.sigma2_u1
    elif terminal == 2:
        s = cfg.h2 * b
        u_power = cfg.sigma2_u2
    else:
        raise ValueError("terminal must be 1 or 2")
    s_power = (cfg.h1 ** 2 * cfg.P1) if terminal == 1 else (cfg.h2 ** 2 * cfg.P2)
    return SignalBlock(s, s_power), SignalBlock(y - s, u_power)
