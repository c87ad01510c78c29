"""Monte Carlo validation of the saturation-MAC renewal formulas.

Contention periods are drawn i.i.d. (idle / collision / success); a
success reserves the channel for the fixed transmission time, draws a
fade, applies the power policy and ships rate*T bits.  Estimates of the
aggregate bit rate and the network power are ratio estimators, so the
95% confidence intervals use the delta method over periods.

The generator is numpy's PCG64, seeded from the config: identical seeds
reproduce reports byte for byte (draw order: period types first, then
fades for the successful periods, in sequence order).

The fixed-transmission-time vs fixed-packet-size comparison works on
two channel samples: the fixed-packet totals define a time and energy
budget, and the fixed-time scheme water-fills that budget over the same
two states; its bit count never falls short.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import OrderingViolation, ValidationError
from .fading import FadingModel
from .macmodel import LN2, MacProfile
from .waterfill import WaterfillSolution

_CI_FACTOR = 1.959963984540054  # two-sided 95% normal quantile
MIN_HORIZON_FOR_CI = 10_000


class SmallHorizonWarning(UserWarning):
    """Horizon below the size where the normal CI is trustworthy."""


@dataclass(frozen=True)
class ConstantPowerPolicy:
    """Transmit with the same power in every fading state."""

    power_w: float

    def power(self, h):
        return np.full_like(np.asarray(h, dtype=float), self.power_w)


@dataclass(frozen=True)
class WaterfillPolicy:
    """Transmit P(h) = d**eta * xi(c*h) from a solved water-fill."""

    solution: WaterfillSolution
    d: float
    eta: float

    def power(self, h):
        c = self.solution.model.alpha_over_sigma2
        return self.d**self.eta * self.solution.allocation(c * np.asarray(h, dtype=float))


@dataclass(frozen=True, eq=False)
class SimConfig:
    profile: MacProfile
    model: FadingModel
    policy: ConstantPowerPolicy | WaterfillPolicy
    d: float
    eta: float
    horizon: int
    seed: int
    relinquish_overhead: float | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValidationError(f"horizon must be >= 1, got {self.horizon}")
        if self.d <= 0 or self.eta <= 0:
            raise ValidationError("hop distance and eta must be > 0")
        if self.relinquish_overhead is not None and not (
            0 <= self.relinquish_overhead <= self.profile.t_txop
        ):
            raise ValidationError("relinquish overhead must lie in [0, t_txop]")
        if self.horizon < MIN_HORIZON_FOR_CI:
            warnings.warn(
                f"horizon {self.horizon} < {MIN_HORIZON_FOR_CI}: confidence "
                "intervals may be unreliable",
                SmallHorizonWarning,
                stacklevel=2,
            )


@dataclass(frozen=True)
class SimReport:
    theta_hat: float
    theta_ci95: float
    power_hat: float
    power_ci95: float
    n_idle: int
    n_collision: int
    n_success: int
    horizon: int
    seed: int
    elapsed_time: float
    total_bits: float
    total_energy: float

    def to_json(self) -> str:
        """Deterministic serialization; byte-identical for identical seeds."""
        return json.dumps(
            {
                "theta_hat_bps": self.theta_hat,
                "theta_ci95_bps": self.theta_ci95,
                "power_hat_w": self.power_hat,
                "power_ci95_w": self.power_ci95,
                "periods": {
                    "idle": self.n_idle,
                    "collision": self.n_collision,
                    "success": self.n_success,
                },
                "horizon": self.horizon,
                "seed": self.seed,
                "elapsed_time_s": self.elapsed_time,
                "total_bits": self.total_bits,
                "total_energy_j": self.total_energy,
            },
            sort_keys=True,
        )


def run(config: SimConfig, trace_path=None) -> SimReport:
    """Simulate ``horizon`` contention periods and estimate rate and power."""
    prof = config.profile
    rng = np.random.Generator(np.random.PCG64(config.seed))
    kinds = rng.choice(
        3, size=config.horizon, p=[prof.p_idle, prof.p_collision, prof.p_success]
    )
    success = kinds == 2
    n_success = int(success.sum())

    durations = np.where(
        kinds == 0, prof.t_idle, np.where(kinds == 1, prof.t_collision, 0.0)
    )
    energies = np.where(
        kinds == 0, prof.e_idle, np.where(kinds == 1, prof.e_collision, 0.0)
    )
    bits = np.zeros(config.horizon)

    if n_success:
        h = config.model.sample_h(rng, n_success)
        p = config.policy.power(h)
        x = config.model.alpha_over_sigma2 * h
        rate_nats = np.log1p(x * p / config.d**config.eta)
        tx_bits = prof.t_txop * prof.bandwidth * rate_nats / LN2
        occupancy = np.full(n_success, prof.t_overhead + prof.t_txop)
        if config.relinquish_overhead is not None:
            idle_tx = p == 0.0
            occupancy[idle_tx] = prof.t_overhead + config.relinquish_overhead
        durations[success] = occupancy
        energies[success] = prof.e_overhead + prof.t_txop * p
        bits[success] = tx_bits

    total_time = float(durations.sum())
    theta_hat, theta_se = _ratio_estimate(bits, durations)
    power_hat, power_se = _ratio_estimate(energies, durations)

    if trace_path is not None:
        _write_trace(trace_path, kinds, durations, energies, bits)

    return SimReport(
        theta_hat=theta_hat,
        theta_ci95=_CI_FACTOR * theta_se,
        power_hat=power_hat,
        power_ci95=_CI_FACTOR * power_se,
        n_idle=int((kinds == 0).sum()),
        n_collision=int((kinds == 1).sum()),
        n_success=n_success,
        horizon=config.horizon,
        seed=config.seed,
        elapsed_time=total_time,
        total_bits=float(bits.sum()),
        total_energy=float(energies.sum()),
    )


def _ratio_estimate(numerators, durations):
    """Mean-per-time ratio with its delta-method standard error."""
    n = numerators.size
    ratio = float(numerators.sum() / durations.sum())
    if n < 2:
        return ratio, 0.0
    centred = numerators - ratio * durations
    var = float(np.dot(centred, centred)) / (n - 1)
    se = math.sqrt(var / n) / float(durations.mean())
    return ratio, se


def _write_trace(path, kinds, durations, energies, bits):
    names = np.array(["idle", "collision", "success"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["period_type", "duration_s", "energy_J", "bits"])
        for k, t, e, b in zip(kinds, durations, energies, bits):
            writer.writerow([names[k], f"{t:.17g}", f"{e:.17g}", f"{b:.17g}"])


# -- fixed transmission time vs fixed packet size -------------------------


@dataclass(frozen=True)
class FttFpComparison:
    """Bit totals of the two schemes over one pair of channel samples."""

    bits_fp: float
    bits_ftt: float
    energy: float
    duration: float


@dataclass(frozen=True)
class SwapComparison:
    """Energy effect of exchanging rates between two channel states."""

    energy_original: float
    energy_swapped: float
    p1_swapped: float
    p2_swapped: float
    duration: float


def compare_ftt_fp(
    h1: float,
    h2: float,
    p1: float,
    p2: float,
    packet_bits: float = 1000.0,
    bandwidth: float = 1e6,
) -> FttFpComparison:
    """Compare fixed-packet and fixed-time transmission on two samples.

    The fixed-packet scheme ships ``packet_bits`` in each state, taking
    total time T_P and energy E_P.  The fixed-time scheme splits T_P
    into two equal slots over the same states and water-fills the energy
    budget E_P; the returned bit counts satisfy bits_ftt >= bits_fp.
    Requires h1*p1 >= h2*p2 (better state carries the higher rate);
    apply `swap_comparison` first otherwise.
    """
    if not (h1 >= h2 > 0):
        raise ValidationError(f"need h1 >= h2 > 0, got h1={h1}, h2={h2}")
    if min(p1, p2) <= 0:
        raise ValidationError("powers must be > 0")
    if h1 * p1 < h2 * p2:
        raise OrderingViolation(
            f"h1*p1={h1 * p1} < h2*p2={h2 * p2}: swap the rates first"
        )
    r1 = bandwidth * math.log2(1.0 + h1 * p1)
    r2 = bandwidth * math.log2(1.0 + h2 * p2)
    t1, t2 = packet_bits / r1, packet_bits / r2
    duration = t1 + t2
    energy = p1 * t1 + p2 * t2
    bits_fp = 2.0 * packet_bits

    slot = duration / 2.0
    q1, q2 = _two_state_waterfill(h1, h2, energy / slot)
    bits_ftt = slot * bandwidth * (math.log2(1.0 + h1 * q1) + math.log2(1.0 + h2 * q2))
    assert bits_ftt >= bits_fp * (1.0 - 1e-9)
    return FttFpComparison(bits_fp=bits_fp, bits_ftt=bits_ftt, energy=energy, duration=duration)


def swap_comparison(
    h1: float,
    h2: float,
    p1: float,
    p2: float,
    packet_bits: float = 1000.0,
    bandwidth: float = 1e6,
) -> SwapComparison:
    """Exchange the two rates (h1*p1 <-> h2*p2) and compare energies.

    When h1 > h2 and h1*p1 < h2*p2, moving the higher rate onto the
    better state keeps the total time fixed and strictly lowers the
    energy, which is why the ordering precondition of `compare_ftt_fp`
    loses no generality.
    """
    if not (h1 >= h2 > 0) or min(p1, p2) <= 0:
        raise ValidationError("need h1 >= h2 > 0 and positive powers")
    p1_swapped = h2 * p2 / h1
    p2_swapped = h1 * p1 / h2
    t1 = packet_bits / (bandwidth * math.log2(1.0 + h1 * p1))
    t2 = packet_bits / (bandwidth * math.log2(1.0 + h2 * p2))
    energy_original = p1 * t1 + p2 * t2
    # swapped rates: state 1 now runs at the old state-2 rate and vice versa
    energy_swapped = p1_swapped * t2 + p2_swapped * t1
    return SwapComparison(
        energy_original=energy_original,
        energy_swapped=energy_swapped,
        p1_swapped=p1_swapped,
        p2_swapped=p2_swapped,
        duration=t1 + t2,
    )


def _two_state_waterfill(h1: float, h2: float, budget: float):
    """Split ``budget`` over two states maximizing the summed log rates."""
    inv_level = 0.5 * (budget + 1.0 / h1 + 1.0 / h2)
    q2 = inv_level - 1.0 / h2
    if q2 <= 0.0:
        return budget, 0.0
    return inv_level - 1.0 / h1, q2
