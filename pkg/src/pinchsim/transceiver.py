"""Per-realization rate computation for the three transmission designs.

Design I inverts the channel matrix (zero forcing with per-user power
normalization) and falls back to Design II when blockage makes the matrix
rank-deficient. Design II assigns each transmit element to its own user with
an equal 1/sqrt(M) power split and treats cross links as interference. The
conventional baseline applies the Design II power split to the fixed
half-wavelength array.

All rate helpers also accept stacked (..., M, M) inputs so the Monte-Carlo
engine can evaluate many realizations at once through the same code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import BlockageState, ChannelMatrix, SystemKind, build_channel_matrix
from .scenario import Placement, SystemConfig

LN2 = np.log(2.0)

# Relative condition number beyond which zero forcing is treated as
# rank-deficient. Blockage produces exact zero rows/columns, so this mostly
# guards near-singular partially blocked matrices.
COND_LIMIT = 1e12


class SchemeUsed(Enum):
    ZF = "ZF"
    DESIGN2 = "DESIGN2"
    DESIGN2_FALLBACK = "DESIGN2_FALLBACK"
    CONVENTIONAL = "CONVENTIONAL"


@dataclass(frozen=True)
class RateVector:
    """Per-user instantaneous rates in bits/s/Hz plus the path that made them."""

    rates: np.ndarray
    scheme_used: SchemeUsed

    def __post_init__(self) -> None:
        arr = np.array(self.rates, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "rates", arr)


@dataclass(frozen=True)
class ZfGains:
    """Effective per-user power gains after zero forcing."""

    g: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.g, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "g", arr)


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, ChannelMatrix):
        return np.asarray(h.h, dtype=complex)
    return np.asarray(h, dtype=complex)


def zf_gains_batch(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Zero-forcing gains for stacked channel matrices.

    Args:
        h: (..., M, M) complex matrices, rows = users.

    Returns:
        (gains, ok): gains has shape (..., M) and is NaN where ``ok`` is
        False, i.e. where the matrix is rank-deficient (zero row/column or
        relative condition number above COND_LIMIT).
    """
    h = np.asarray(h, dtype=complex)
    m = h.shape[-1]
    s = np.linalg.svd(h, compute_uv=False)
    smax = s[..., 0]
    smin = s[..., -1]
    zero_row = np.all(h == 0, axis=-1).any(axis=-1)
    zero_col = np.all(h == 0, axis=-2).any(axis=-1)
    ok = (smin > 0) & (smax <= COND_LIMIT * smin) & ~zero_row & ~zero_col

    eye = np.eye(m, dtype=complex)
    safe = np.where(ok[..., None, None], h, eye)
    gram_inv = np.linalg.inv(safe @ np.conj(np.swapaxes(safe, -1, -2)))
    diag = np.real(np.diagonal(gram_inv, axis1=-2, axis2=-1))
    gains = 1.0 / (m * diag)
    gains = np.where(ok[..., None], gains, np.nan)
    return gains, ok


def zero_forcing_gains(h, m: int):
    """Per-user gains g_m = 1 / (M [inv(H H^H)]_mm), or None if rank-deficient.

    Rank deficiency is an expected outcome under blockage, so it is signalled
    by returning None rather than raising.
    """
    mat = _as_matrix(h)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("channel matrix must be square")
    if mat.shape[0] != m:
        raise ValueError(f"matrix is {mat.shape[0]}x{mat.shape[0]}, expected M={m}")
    gains, ok = zf_gains_batch(mat)
    if not bool(ok):
        return None
    return ZfGains(g=gains)


def zero_forcing_precoder(h):
    """Explicit precoding matrix inv(H) diag(sqrt(g)), or None if rank-deficient.

    Each column has squared norm 1/M, so the total transmit power across the
    M users equals the configured budget.
    """
    mat = _as_matrix(h)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("channel matrix must be square")
    m = mat.shape[0]
    gains = zero_forcing_gains(mat, m)
    if gains is None:
        return None
    return np.linalg.solve(mat, np.diag(np.sqrt(gains.g)).astype(complex))


def design2_rates_from_power(s_eff: np.ndarray, tx_power: float,
                             noise_power: float, m: int) -> np.ndarray:
    """Design II rates from effective squared channel magnitudes.

    Args:
        s_eff: (..., M, M) array of alpha * |h|^2 (zero where blocked).

    Returns:
        (..., M) rates log2(1 + S P / (I P + M sigma^2)).
    """
    s_eff = np.asarray(s_eff, dtype=float)
    own = np.diagonal(s_eff, axis1=-2, axis2=-1)
    interference = np.maximum(s_eff.sum(axis=-1) - own, 0.0)
    sinr = own * tx_power / (interference * tx_power + m * noise_power)
    return np.log1p(sinr) / LN2


def design2_rates(chan: ChannelMatrix, cfg: SystemConfig) -> RateVector:
    """Low-complexity per-waveguide transmission (equal 1/sqrt(M) power split)."""
    mat = _as_matrix(chan)
    s_eff = np.abs(mat) ** 2
    rates = design2_rates_from_power(s_eff, cfg.tx_power, cfg.noise_power,
                                     mat.shape[0])
    return RateVector(rates=rates, scheme_used=SchemeUsed.DESIGN2)


def design1_rates(chan: ChannelMatrix, cfg: SystemConfig) -> RateVector:
    """Zero forcing when the channel is invertible, Design II otherwise."""
    mat = _as_matrix(chan)
    m = mat.shape[0]
    gains, ok = zf_gains_batch(mat)
    if not bool(ok):
        fallback = design2_rates(chan, cfg)
        return RateVector(rates=fallback.rates,
                          scheme_used=SchemeUsed.DESIGN2_FALLBACK)
    rates = np.log1p(gains * cfg.tx_power / cfg.noise_power) / LN2
    return RateVector(rates=rates, scheme_used=SchemeUsed.ZF)


def conventional_rates(placement: Placement, blockage: BlockageState,
                       cfg: SystemConfig) -> RateVector:
    """Rates for the fixed half-wavelength array baseline.

    Element m serves user m with power P/M; all elements seen by one user
    share that user's blockage state. For M = 1 this reduces to the single
    fixed antenna with the full power budget.
    """
    chan = build_channel_matrix(placement, blockage, cfg, SystemKind.CONVENTIONAL)
    s_eff = np.abs(chan.h) ** 2
    rates = design2_rates_from_power(s_eff, cfg.tx_power, cfg.noise_power,
                                     chan.num_users)
    return RateVector(rates=rates, scheme_used=SchemeUsed.CONVENTIONAL)
