"""Deployment geometry: service area, waveguides, user and antenna placement.

The service area is a ``d_l`` x ``d_w`` rectangle on the floor (z = 0),
covered by ``num_users`` parallel waveguides at height ``height``. Waveguide m
runs along the x-axis at the center line of strip m, and serves the single
user dropped uniformly inside that strip. One pinching antenna per waveguide
is activated at the in-waveguide position closest to its user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s, exact SI value


class BlockageModel(Enum):
    """Distance law for the probability that a link keeps line of sight."""

    MODEL_A = "MODEL_A"  # P(unblocked) = exp(-phi * distance), phi in 1/m
    MODEL_B = "MODEL_B"  # P(unblocked) = exp(-phi * distance^2), phi in 1/m^2


class LossCase(Enum):
    """Whether in-waveguide propagation loss is applied to the channel."""

    CASE_I = "CASE_I"    # lossless waveguide
    CASE_II = "CASE_II"  # dB/m amplitude loss between feed point and antenna


def dbm_to_watt(dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    """Convert a power in watts to dBm."""
    if watt <= 0:
        raise ValueError("power must be > 0 to express in dBm")
    return 10.0 * math.log10(watt) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """All physical and deployment parameters, validated eagerly.

    Powers are linear watts; frequencies in Hz; lengths in meters. Derived
    quantities (wavelengths, free-space gain constant) are pure functions of
    the fields, exposed as properties so they can never drift.
    """

    num_users: int
    d_w: float
    d_l: float
    tx_power: float
    phi: float
    blockage_model: BlockageModel
    height: float = 3.0
    carrier_freq: float = 28e9
    noise_power: float = 1e-12
    loss_case: LossCase = LossCase.CASE_I
    waveguide_loss_db_per_m: float = 0.08
    n_eff: float = 1.4
    light_speed: float = SPEED_OF_LIGHT
    constrain_under_waveguide: bool = False

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        for name in ("d_w", "d_l", "height", "carrier_freq", "noise_power",
                     "tx_power", "light_speed", "n_eff"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.phi < 0:
            raise ValueError("phi must be >= 0")
        if self.waveguide_loss_db_per_m < 0:
            raise ValueError("waveguide_loss_db_per_m must be >= 0")
        if not isinstance(self.blockage_model, BlockageModel):
            raise TypeError("blockage_model must be a BlockageModel")
        if not isinstance(self.loss_case, LossCase):
            raise TypeError("loss_case must be a LossCase")

    @property
    def wavelength(self) -> float:
        """Carrier wavelength in meters."""
        return self.light_speed / self.carrier_freq

    @property
    def guided_wavelength(self) -> float:
        """In-waveguide wavelength: carrier wavelength over n_eff."""
        return self.wavelength / self.n_eff

    @property
    def path_gain_factor(self) -> float:
        """Free-space power gain at 1 m, (wavelength / 4 pi)^2.

        The received power at distance r is tx_power * path_gain_factor / r^2.
        """
        return self.light_speed ** 2 / (16.0 * math.pi ** 2 * self.carrier_freq ** 2)

    @property
    def strip_width(self) -> float:
        """Width d_w / num_users of the strip served by one waveguide."""
        return self.d_w / self.num_users


@dataclass(frozen=True)
class Placement:
    """One realization of user, pinching-antenna, array and feed positions.

    All arrays are (M, 3) and read-only after construction.
    """

    user_positions: np.ndarray
    pinch_positions: np.ndarray
    conv_positions: np.ndarray
    feed_positions: np.ndarray

    def __post_init__(self) -> None:
        for name in ("user_positions", "pinch_positions",
                     "conv_positions", "feed_positions"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValueError(f"{name} must have shape (M, 3)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_users(self) -> int:
        return self.user_positions.shape[0]


def waveguide_y_offset(m: int, cfg: SystemConfig) -> float:
    """Center-line y coordinate of waveguide m (1-based index).

    Offsets are equally spaced by d_w / num_users and symmetric about y = 0.
    """
    if not 1 <= m <= cfg.num_users:
        raise ValueError(f"waveguide index {m} out of range 1..{cfg.num_users}")
    return (-cfg.d_w / 2.0 + (m - 1) * cfg.d_w / cfg.num_users
            + cfg.d_w / (2.0 * cfg.num_users))


def waveguide_y_offsets(cfg: SystemConfig) -> np.ndarray:
    """All waveguide center-line y coordinates as an (M,) array."""
    return np.array([waveguide_y_offset(m, cfg) for m in range(1, cfg.num_users + 1)])


def conventional_array_positions(cfg: SystemConfig) -> np.ndarray:
    """Positions of the fixed half-wavelength-spaced array, (M, 3).

    The array sits at the area center at waveguide height, spaced along x,
    and is centered so the mean x coordinate is exactly zero.
    """
    m = cfg.num_users
    xs = (np.arange(m) - (m - 1) / 2.0) * (cfg.wavelength / 2.0)
    pos = np.zeros((m, 3))
    pos[:, 0] = xs
    pos[:, 2] = cfg.height
    return pos


def sample_placement(cfg: SystemConfig, rng: np.random.Generator) -> Placement:
    """Draw one random deployment realization.

    User m gets x ~ U(-d_l/2, d_l/2) and y uniform in its strip, unless
    ``constrain_under_waveguide`` is set, in which case y is pinned to the
    waveguide center line. The pinching antenna on waveguide m copies the
    user's x coordinate (closest-point rule); feeds sit at the near edge
    x = -d_l/2 of each waveguide.
    """
    m = cfg.num_users
    beta = waveguide_y_offsets(cfg)
    x = rng.uniform(-cfg.d_l / 2.0, cfg.d_l / 2.0, size=m)
    if cfg.constrain_under_waveguide:
        y = beta.copy()
    else:
        half = cfg.strip_width / 2.0
        y = rng.uniform(beta - half, beta + half, size=m)

    users = np.column_stack([x, y, np.zeros(m)])
    pinch = np.column_stack([x, beta, np.full(m, cfg.height)])
    feeds = np.column_stack([np.full(m, -cfg.d_l / 2.0), beta, np.full(m, cfg.height)])
    return Placement(
        user_positions=users,
        pinch_positions=pinch,
        conv_positions=conventional_array_positions(cfg),
        feed_positions=feeds,
    )
