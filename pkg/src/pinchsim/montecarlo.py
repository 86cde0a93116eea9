"""Monte-Carlo estimation of outage and ergodic rates.

Trials are evaluated in fixed-size chunks. Each chunk owns an independent
counter-based random stream derived from (master_seed, axis_index, chunk),
and chunk results are reduced in chunk order with exact summation, so an
estimate is bit-identical for any worker count. Rates inside a chunk are
computed with the vectorized transceiver helpers, i.e. through the same
formulas as the single-realization API.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .analytics import OutageParams
from .channel import unblocked_probability_sq
from .scenario import LossCase, SystemConfig, dbm_to_watt, waveguide_y_offsets
from .transceiver import LN2, design2_rates_from_power, zf_gains_batch

# Trials per random-stream chunk. Fixed so that the set of random draws, and
# therefore every estimate, is independent of how chunks are scheduled.
CHUNK_TRIALS = 8192

# Reserved chunk index for the shared-placement stream of the
# variance-reduction mode; ordinary chunk indices stay far below it.
_PLACEMENT_STREAM = 1 << 62


class Scheme(Enum):
    PIN_D1 = "PIN_D1"
    PIN_D2 = "PIN_D2"
    CONV = "CONV"


class MetricKind(Enum):
    OUTAGE = "OUTAGE"
    ERGODIC_PER_USER = "ERGODIC_PER_USER"
    ERGODIC_SUM = "ERGODIC_SUM"


class Provenance(Enum):
    SIMULATED = "SIMULATED"
    CLOSED_FORM = "CLOSED_FORM"


class SweepAxis(Enum):
    TX_POWER_DBM = "TX_POWER_DBM"
    D_L = "D_L"
    R_TARGET = "R_TARGET"


@dataclass(frozen=True)
class MetricEstimate:
    """A single metric value with a 99.7% (3-sigma) confidence half-width."""

    value: float
    ci_half_width: float
    n_trials: int
    metric_kind: MetricKind
    provenance: Provenance


@dataclass(frozen=True)
class SweepPoint:
    """Estimates at one axis value; several entries only for per-user metrics."""

    axis_value: float
    estimates: tuple[MetricEstimate, ...]


def chunk_generator(master_seed: int, axis_index: int,
                    chunk_index: int) -> np.random.Generator:
    """Independent counter-based stream for one chunk of trials."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(axis_index, chunk_index))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_sizes(n_trials: int) -> list[int]:
    n_chunks = (n_trials + CHUNK_TRIALS - 1) // CHUNK_TRIALS
    return [min(CHUNK_TRIALS, n_trials - i * CHUNK_TRIALS) for i in range(n_chunks)]


def _map_ordered(fn, n_chunks: int, workers: int) -> list:
    if workers <= 1 or n_chunks == 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_chunks)))


def _sample_user_xy(cfg: SystemConfig, n: int,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized user drop: (n, M) x and y coordinates."""
    m = cfg.num_users
    beta = waveguide_y_offsets(cfg)
    x = rng.uniform(-cfg.d_l / 2.0, cfg.d_l / 2.0, size=(n, m))
    if cfg.constrain_under_waveguide:
        y = np.broadcast_to(beta, (n, m)).copy()
    else:
        half = cfg.strip_width / 2.0
        y = rng.uniform(beta - half, beta + half, size=(n, m))
    return x, y


def _pin_distances_sq(x: np.ndarray, y: np.ndarray, beta: np.ndarray,
                      height: float) -> np.ndarray:
    """Squared user-to-antenna distances, (n, M, M) indexed [trial, user, wg]."""
    dx = x[:, :, None] - x[:, None, :]
    dy = y[:, :, None] - beta[None, None, :]
    return dx * dx + dy * dy + height * height


def _waveguide_amplitude(cfg: SystemConfig, x: np.ndarray) -> np.ndarray:
    """Per-antenna in-waveguide amplitude factor (ones for CASE_I)."""
    if cfg.loss_case is LossCase.CASE_II:
        length = x + cfg.d_l / 2.0
        return 10.0 ** (-cfg.waveguide_loss_db_per_m * length / 20.0)
    return np.ones_like(x)


def _chunk_xy(cfg: SystemConfig, n: int, rng: np.random.Generator,
              fixed_xy) -> tuple[np.ndarray, np.ndarray]:
    if fixed_xy is None:
        return _sample_user_xy(cfg, n, rng)
    x0, y0 = fixed_xy
    m = cfg.num_users
    return (np.broadcast_to(x0, (n, m)), np.broadcast_to(y0, (n, m)))


def _pin_rates_chunk(cfg: SystemConfig, n: int, rng: np.random.Generator,
                     zero_force: bool, fixed_xy=None) -> np.ndarray:
    m = cfg.num_users
    beta = waveguide_y_offsets(cfg)
    x, y = _chunk_xy(cfg, n, rng, fixed_xy)
    dist_sq = _pin_distances_sq(x, y, beta, cfg.height)
    p_los = unblocked_probability_sq(dist_sq, cfg)
    alpha = rng.random(dist_sq.shape) < p_los

    amp = _waveguide_amplitude(cfg, x)
    s = cfg.path_gain_factor / dist_sq * (amp * amp)[:, None, :]
    s_eff = np.where(alpha, s, 0.0)

    if not zero_force:
        return design2_rates_from_power(s_eff, cfg.tx_power, cfg.noise_power, m)

    dist = np.sqrt(dist_sq)
    wav_len = x + cfg.d_l / 2.0
    phase = -2.0 * np.pi * (dist / cfg.wavelength
                            + wav_len[:, None, :] / cfg.guided_wavelength)
    h = np.where(alpha, np.sqrt(s), 0.0) * np.exp(1j * phase)
    gains, ok = zf_gains_batch(h)

    rates = np.empty((n, m))
    if np.any(ok):
        snr = gains[ok] * cfg.tx_power / cfg.noise_power
        rates[ok] = np.log1p(snr) / LN2
    if not np.all(ok):
        bad = ~ok
        rates[bad] = design2_rates_from_power(s_eff[bad], cfg.tx_power,
                                              cfg.noise_power, m)
    return rates


def _conv_rates_chunk(cfg: SystemConfig, n: int, rng: np.random.Generator,
                      fixed_xy=None) -> np.ndarray:
    m = cfg.num_users
    x, y = _chunk_xy(cfg, n, rng, fixed_xy)
    center_sq = x * x + y * y + cfg.height ** 2
    alpha = rng.random(center_sq.shape) < unblocked_probability_sq(center_sq, cfg)

    spacing = cfg.wavelength / 2.0
    offsets = (np.arange(m) - (m - 1) / 2.0) * spacing
    dx = x[:, :, None] - offsets[None, None, :]
    dist_sq = dx * dx + (y * y + cfg.height ** 2)[:, :, None]
    s = cfg.path_gain_factor / dist_sq
    s_eff = np.where(alpha[:, :, None], s, 0.0)
    return design2_rates_from_power(s_eff, cfg.tx_power, cfg.noise_power, m)


def _rates_chunk(scheme: Scheme, cfg: SystemConfig, n: int,
                 rng: np.random.Generator, fixed_xy=None) -> np.ndarray:
    if scheme is Scheme.PIN_D1:
        return _pin_rates_chunk(cfg, n, rng, zero_force=True, fixed_xy=fixed_xy)
    if scheme is Scheme.PIN_D2:
        return _pin_rates_chunk(cfg, n, rng, zero_force=False, fixed_xy=fixed_xy)
    return _conv_rates_chunk(cfg, n, rng, fixed_xy=fixed_xy)


def _maybe_fixed_xy(cfg: SystemConfig, master_seed: int, axis_index: int,
                    fix_placement: bool):
    """One shared placement for the variance-reduction mode (non-default)."""
    if not fix_placement:
        return None
    rng = chunk_generator(master_seed, axis_index, _PLACEMENT_STREAM)
    return _sample_user_xy(cfg, 1, rng)


def estimate_outage(scheme: Scheme, params: OutageParams, n_trials: int,
                    master_seed: int, *, workers: int = 1, axis_index: int = 0,
                    fix_placement: bool = False) -> MetricEstimate:
    """Fraction of trials in which user 1's rate falls at or below the target.

    The confidence half-width is the 3-sigma binomial normal approximation.
    By default each trial redraws both placement and blockage;
    ``fix_placement`` freezes one placement and varies blockage only.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    cfg = params.cfg
    sizes = _chunk_sizes(n_trials)
    fixed_xy = _maybe_fixed_xy(cfg, master_seed, axis_index, fix_placement)

    def one(chunk: int) -> int:
        rng = chunk_generator(master_seed, axis_index, chunk)
        rates = _rates_chunk(scheme, cfg, sizes[chunk], rng, fixed_xy)
        return int(np.count_nonzero(rates[:, 0] <= params.r_target))

    counts = _map_ordered(one, len(sizes), workers)
    hits = sum(counts)
    value = hits / n_trials
    sigma = math.sqrt(value * (1.0 - value) / n_trials)
    return MetricEstimate(value=value, ci_half_width=3.0 * sigma,
                          n_trials=n_trials, metric_kind=MetricKind.OUTAGE,
                          provenance=Provenance.SIMULATED)


def _mean_ci(total: float, total_sq: float, n: int) -> tuple[float, float]:
    mean = total / n
    if n < 2:
        return mean, 0.0
    var = max((total_sq - n * mean * mean) / (n - 1), 0.0)
    return mean, 3.0 * math.sqrt(var / n)


def estimate_ergodic(scheme: Scheme, cfg: SystemConfig, n_trials: int,
                     master_seed: int, *, workers: int = 1, axis_index: int = 0,
                     fix_placement: bool = False) -> list[MetricEstimate]:
    """Per-user ergodic rates followed by the sum rate, each with 3-sigma CIs.

    Every trial resamples both the placement and the blockage state unless
    ``fix_placement`` requests the blockage-only variance-reduction mode.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    m = cfg.num_users
    sizes = _chunk_sizes(n_trials)
    fixed_xy = _maybe_fixed_xy(cfg, master_seed, axis_index, fix_placement)

    def one(chunk: int) -> tuple[np.ndarray, np.ndarray, float, float]:
        rng = chunk_generator(master_seed, axis_index, chunk)
        rates = _rates_chunk(scheme, cfg, sizes[chunk], rng, fixed_xy)
        per_sum = rates.sum(axis=0)
        per_sq = (rates * rates).sum(axis=0)
        totals = rates.sum(axis=1)
        return per_sum, per_sq, float(totals.sum()), float((totals * totals).sum())

    parts = _map_ordered(one, len(sizes), workers)

    estimates = []
    for u in range(m):
        total = math.fsum(p[0][u] for p in parts)
        total_sq = math.fsum(p[1][u] for p in parts)
        mean, ci = _mean_ci(total, total_sq, n_trials)
        estimates.append(MetricEstimate(value=mean, ci_half_width=ci,
                                        n_trials=n_trials,
                                        metric_kind=MetricKind.ERGODIC_PER_USER,
                                        provenance=Provenance.SIMULATED))
    total = math.fsum(p[2] for p in parts)
    total_sq = math.fsum(p[3] for p in parts)
    mean, ci = _mean_ci(total, total_sq, n_trials)
    estimates.append(MetricEstimate(value=mean, ci_half_width=ci,
                                    n_trials=n_trials,
                                    metric_kind=MetricKind.ERGODIC_SUM,
                                    provenance=Provenance.SIMULATED))
    return estimates


def estimate_conv_rate_bound(cfg: SystemConfig, n_trials: int, master_seed: int,
                             *, workers: int = 1,
                             axis_index: int = 0) -> list[MetricEstimate]:
    """High-SNR limit of the conventional rates: E[log2(1 + S/I)].

    This is the bounded ceiling the conventional baseline saturates to when
    the power budget grows; unlike the finite-SNR expectation it ignores
    blockage (the indicator cancels between signal and interference).
    """
    if cfg.num_users < 2:
        raise ValueError("the conventional rate bound needs num_users >= 2")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    m = cfg.num_users
    sizes = _chunk_sizes(n_trials)
    spacing = cfg.wavelength / 2.0
    offsets = (np.arange(m) - (m - 1) / 2.0) * spacing

    def one(chunk: int) -> tuple[np.ndarray, np.ndarray, float, float]:
        rng = chunk_generator(master_seed, axis_index, chunk)
        n = sizes[chunk]
        x, y = _sample_user_xy(cfg, n, rng)
        dx = x[:, :, None] - offsets[None, None, :]
        dist_sq = dx * dx + (y * y + cfg.height ** 2)[:, :, None]
        s = cfg.path_gain_factor / dist_sq
        own = np.diagonal(s, axis1=-2, axis2=-1)
        interference = s.sum(axis=-1) - own
        rates = np.log1p(own / interference) / LN2
        per_sum = rates.sum(axis=0)
        per_sq = (rates * rates).sum(axis=0)
        totals = rates.sum(axis=1)
        return per_sum, per_sq, float(totals.sum()), float((totals * totals).sum())

    parts = _map_ordered(one, len(sizes), workers)
    estimates = []
    for u in range(m):
        total = math.fsum(p[0][u] for p in parts)
        total_sq = math.fsum(p[1][u] for p in parts)
        mean, ci = _mean_ci(total, total_sq, n_trials)
        estimates.append(MetricEstimate(value=mean, ci_half_width=ci,
                                        n_trials=n_trials,
                                        metric_kind=MetricKind.ERGODIC_PER_USER,
                                        provenance=Provenance.SIMULATED))
    total = math.fsum(p[2] for p in parts)
    total_sq = math.fsum(p[3] for p in parts)
    mean, ci = _mean_ci(total, total_sq, n_trials)
    estimates.append(MetricEstimate(value=mean, ci_half_width=ci,
                                    n_trials=n_trials,
                                    metric_kind=MetricKind.ERGODIC_SUM,
                                    provenance=Provenance.SIMULATED))
    return estimates


def apply_axis(cfg: SystemConfig, axis: SweepAxis, value: float,
               r_target: float | None) -> tuple[SystemConfig, float | None]:
    """Return the config and target rate for one sweep point."""
    if axis is SweepAxis.TX_POWER_DBM:
        return replace(cfg, tx_power=dbm_to_watt(value)), r_target
    if axis is SweepAxis.D_L:
        return replace(cfg, d_l=value), r_target
    return cfg, value


def sweep(cfg: SystemConfig, scheme: Scheme, sweep_axis: SweepAxis,
          axis_values, metric: MetricKind, n_trials: int, master_seed: int,
          *, r_target: float | None = None, workers: int = 1) -> list[SweepPoint]:
    """One estimate per axis value with per-point deterministic seeding.

    Point i uses streams derived from (master_seed, i, chunk); a single-value
    sweep is therefore bit-identical to a direct estimate call.
    """
    values = [float(v) for v in axis_values]
    if not values:
        raise ValueError("axis_values must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("axis_values must be strictly increasing")
    if metric is not MetricKind.OUTAGE and sweep_axis is SweepAxis.R_TARGET:
        raise ValueError("R_TARGET sweeps only apply to the OUTAGE metric")

    points = []
    for i, v in enumerate(values):
        cfg_i, rt_i = apply_axis(cfg, sweep_axis, v, r_target)
        if metric is MetricKind.OUTAGE:
            if rt_i is None:
                raise ValueError("OUTAGE sweeps need r_target (or an R_TARGET axis)")
            est = estimate_outage(scheme, OutageParams(cfg=cfg_i, r_target=rt_i),
                                  n_trials, master_seed, workers=workers,
                                  axis_index=i)
            chosen = (est,)
        else:
            ests = estimate_ergodic(scheme, cfg_i, n_trials, master_seed,
                                    workers=workers, axis_index=i)
            if metric is MetricKind.ERGODIC_SUM:
                chosen = (ests[-1],)
            else:
                chosen = tuple(ests[:-1])
        points.append(SweepPoint(axis_value=v, estimates=chosen))
    return points
