"""Saturation-MAC throughput and power accounting.

The contention channel alternates i.i.d. idle / collision / success
periods.  Throughput and network power share one renewal denominator,

    cycle = p_idle*t_idle + p_collision*t_collision + p_success*(t_overhead + t_txop)

so the aggregate bit rate is linear in the mean per-transmission rate
and the drawn power is linear in the mean transmit power.  This module
also houses the single-cell motivation: with K simultaneous
transmissions in a confined area the aggregate rate is capped
independently of transmit power, so spatial reuse stops paying once the
shrinking reach outweighs it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BudgetExhausted, ValidationError

PROB_SUM_TOL = 1e-12
LN2 = math.log(2.0)


@dataclass(frozen=True)
class MacProfile:
    """Contention probabilities plus time and energy overheads.

    Times in seconds, energies in joules, bandwidth in hertz.  ``t_txop``
    is the fixed transmission time T reserved per successful contention.
    """

    p_idle: float
    p_collision: float
    p_success: float
    t_idle: float
    t_collision: float
    t_overhead: float
    t_txop: float
    bandwidth: float
    e_idle: float = 0.0
    e_collision: float = 0.0
    e_overhead: float = 0.0

    def __post_init__(self):
        probs = (self.p_idle, self.p_collision, self.p_success)
        if any(p < 0 for p in probs):
            raise ValidationError("contention probabilities must be >= 0")
        if abs(sum(probs) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"contention probabilities sum to {sum(probs)!r}, expected 1")
        if self.p_success <= 0:
            raise ValidationError("p_success must be > 0")
        if self.t_txop <= 0:
            raise ValidationError("t_txop must be > 0")
        if self.bandwidth <= 0:
            raise ValidationError("bandwidth must be > 0")
        for name in ("t_idle", "t_collision", "t_overhead", "e_idle", "e_collision", "e_overhead"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")

    @property
    def cycle_time(self) -> float:
        """Mean contention-period duration (the shared denominator), seconds."""
        return (
            self.p_idle * self.t_idle
            + self.p_collision * self.t_collision
            + self.p_success * (self.t_overhead + self.t_txop)
        )

    @property
    def overhead_power(self) -> float:
        """Time-average power drawn by overheads alone, watts."""
        return (
            self.p_idle * self.e_idle
            + self.p_collision * self.e_collision
            + self.p_success * self.e_overhead
        ) / self.cycle_time


def throughput(profile: MacProfile, mean_rate_nats: float) -> float:
    """Aggregate saturation bit rate (bits/s) for a mean spectral efficiency.

    ``mean_rate_nats`` is the per-transmission expected rate in nats per
    unit bandwidth (the water-fill value Gamma); the nats-to-bits
    conversion happens here, once.
    """
    if mean_rate_nats < 0:
        raise ValidationError("mean rate must be >= 0")
    bits_per_txop = profile.bandwidth * profile.t_txop * mean_rate_nats / LN2
    return profile.p_success * bits_per_txop / profile.cycle_time


def network_power(profile: MacProfile, mean_tx_power: float) -> float:
    """Network average power (watts) for a mean per-transmission power."""
    if mean_tx_power < 0:
        raise ValidationError("mean transmit power must be >= 0")
    energy_per_cycle = (
        profile.p_idle * profile.e_idle
        + profile.p_collision * profile.e_collision
        + profile.p_success * (profile.e_overhead + profile.t_txop * mean_tx_power)
    )
    return energy_per_cycle / profile.cycle_time


def pt_prime(profile: MacProfile, p_bar: float) -> float:
    """Convert a network power budget into the per-transmission budget.

    Subtracts the overhead power, then re-averages over transmission
    periods only.  Raises when the budget cannot cover the overheads.
    """
    p_overhead = profile.overhead_power
    if p_bar <= p_overhead:
        raise BudgetExhausted(
            f"network budget {p_bar} W does not exceed overhead power {p_overhead} W"
        )
    p_t = p_bar - p_overhead
    return profile.cycle_time / (profile.p_success * profile.t_txop) * p_t


def spatial_reuse_bound(k: int, power: float, noise: float, area: float, eta: float):
    """Aggregate-rate cap with K simultaneous transmissions in area A.

    Returns (C(K), power-free bound); the second is the P -> inf limit
    K * log(1 + (2A)**(eta/2) / (K-1)) and always dominates the first.
    Rates are in nats per channel use.
    """
    if k < 2:
        raise ValidationError(f"spatial reuse needs K >= 2, got {k}")
    if min(power, noise, area, eta) <= 0:
        raise ValidationError("power, noise, area and eta must all be > 0")
    interference = (k - 1) * power / (2.0 * area) ** (eta / 2.0)
    c_k = k * math.log1p(power / (noise + interference))
    bound = k * math.log1p((2.0 * area) ** (eta / 2.0) / (k - 1))
    return c_k, bound


def spatial_reuse_sweep(ks, area: float, eta: float, power: float, noise: float):
    """Rows (K, C(K), bound(K), reach(K), bound*reach) over a reuse grid.

    ``reach = sqrt(2A/K)`` models the shrinking transmitter-receiver
    separation as the area is split K ways (illustrative; the analysis
    only needs reach -> 0).
    """
    rows = []
    for k in ks:
        c_k, bound = spatial_reuse_bound(int(k), power, noise, area, eta)
        reach = math.sqrt(2.0 * area / k)
        rows.append((int(k), c_k, bound, reach, bound * reach))
    return rows


def example_profile(bandwidth: float = 1e6) -> MacProfile:
    """Illustrative DCF-flavoured numbers; not calibrated to any standard."""
    return MacProfile(
        p_idle=0.6,
        p_collision=0.1,
        p_success=0.3,
        t_idle=2e-5,
        t_collision=3e-4,
        t_overhead=2e-4,
        t_txop=2e-3,
        bandwidth=bandwidth,
        e_idle=1e-6,
        e_collision=3e-5,
        e_overhead=5e-5,
    )
