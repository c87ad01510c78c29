"""Closed-form water-filling for finite discrete fading.

With states indexed by descending x and cumulative constants

    p_k = a_1 + ... + a_k        alpha_k = sum_{i<=k} a_i / x_i

the multiplier is piecewise ``lam(Pi) = p_k / (alpha_k + Pi)`` between
breakpoints ``Pi_k``, and the optimal rate as a function of hop distance
is ``Gamma(d) = p_k * log(gamma_k * (alpha_k + Pt'/d**eta))`` with the
integration constants ``gamma_k`` chained so the pieces join
continuously.  Stationary points of d * Gamma(d) reduce, per segment, to
``y * exp(-eta*y) = exp(b_k - eta)`` on a half-open y-interval, which a
bisection per monotone branch enumerates exhaustively (hence the
2n - 1 count bound).
"""

from __future__ import annotations

import math

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NotDiscrete, ValidationError
from .fading import FadingModel
from .stationary import StationaryPoint, StationarySet

_Y_RTOL = 1e-15
_Y_XTOL = 1e-30
_RESIDUAL_REL = 1e-8


@dataclass(frozen=True, eq=False)
class DiscreteWaterfillTable:
    """Per-segment constants of the piecewise closed form.

    All entries depend only on the distribution (not on power or path
    loss): ``pi_breaks`` has length n-1 and is strictly increasing;
    ``log_gamma`` carries the integration constants in log space and
    ``b = log(alpha_k * gamma_k)`` feeds the stationary-point equation.
    """

    x: np.ndarray
    a: np.ndarray
    p: np.ndarray
    alpha: np.ndarray
    pi_breaks: np.ndarray
    log_gamma: np.ndarray
    b: np.ndarray

    @property
    def n_states(self) -> int:
        return self.x.size

    @property
    def gamma_consts(self) -> np.ndarray:
        return np.exp(self.log_gamma)


def build_table(model: FadingModel) -> DiscreteWaterfillTable:
    """Precompute cumulative sums, breakpoints and integration constants."""
    if not model.is_discrete:
        raise NotDiscrete("closed-form tables require a discrete model")
    x, a = model.x_states()
    p = np.cumsum(a)
    alpha = np.cumsum(a / x)
    n = x.size
    ratio_alpha = alpha / p
    inv_p = 1.0 / p
    pi_breaks = np.empty(max(n - 1, 0))
    for k in range(n - 1):
        pi_breaks[k] = (ratio_alpha[k + 1] - ratio_alpha[k]) / (inv_p[k] - inv_p[k + 1])
    if n > 1 and (np.any(pi_breaks <= 0) or np.any(np.diff(pi_breaks) <= 0)):
        raise NotDiscrete("breakpoints must be positive and strictly increasing")
    log_gamma = np.empty(n)
    log_gamma[0] = -math.log(alpha[0])
    for k in range(1, n):
        pi_prev = pi_breaks[k - 1]
        log_gamma[k] = (p[k - 1] / p[k]) * (
            math.log(alpha[k - 1] + pi_prev) + log_gamma[k - 1]
        ) - math.log(alpha[k] + pi_prev)
    b = np.log(alpha) + log_gamma
    b[0] = 0.0  # exactly, by definition; keeps y = 1 off the root set
    for arr in (x, a, p, alpha, pi_breaks, log_gamma, b):
        arr.flags.writeable = False
    return DiscreteWaterfillTable(x, a, p, alpha, pi_breaks, log_gamma, b)


def segment_index(table: DiscreteWaterfillTable, pi: float) -> int:
    """0-based segment k for Pi; boundaries belong to the lower segment."""
    return int(np.searchsorted(table.pi_breaks, pi, side="left"))


def lambda_closed_form(table: DiscreteWaterfillTable, pi: float) -> float:
    """Multiplier lam(Pi) = p_k / (alpha_k + Pi)."""
    k = segment_index(table, pi)
    return float(table.p[k] / (table.alpha[k] + pi))


def gamma_of_pi(table: DiscreteWaterfillTable, pi: float) -> float:
    """Optimal rate (nats) at normalized power Pi, via the closed form.

    Evaluated as p_k * (log1p(Pi/alpha_k) + b_k) rather than the printed
    log(gamma_k*(alpha_k + Pi)) so small Pi does not cancel digits.
    """
    if pi == 0.0:
        return 0.0
    k = segment_index(table, pi)
    return float(table.p[k] * (math.log1p(pi / table.alpha[k]) + table.b[k]))


def gamma_closed_form(
    table: DiscreteWaterfillTable, d: float, eta: float, pt_prime: float
) -> float:
    """Gamma at hop distance d for power pt_prime and path-loss exponent eta."""
    if d <= 0:
        raise ValidationError(f"hop distance must be > 0, got {d}")
    return gamma_of_pi(table, pt_prime / d**eta)


def gamma_derivative_wrt_d(
    table: DiscreteWaterfillTable, d: float, eta: float, pt_prime: float
) -> float:
    """Closed-form dGamma/dd; negative, continuous, increasing in d."""
    pi = pt_prime / d**eta
    k = segment_index(table, pi)
    return float(-eta * table.p[k] * pt_prime / (d * (table.alpha[k] * d**eta + pt_prime)))


def hop_breakpoints(table: DiscreteWaterfillTable, eta: float, pt_prime: float) -> np.ndarray:
    """Breakpoint hop distances d_k (descending), d_k = (pt'/Pi_k)**(1/eta)."""
    return (pt_prime / table.pi_breaks) ** (1.0 / eta)


def stationary_points_discrete(
    table: DiscreteWaterfillTable, eta: float, pt_prime: float
) -> StationarySet:
    """Enumerate all interior stationary points of d * Gamma(d).

    Per segment the equation ``y*exp(-eta*y) = exp(b_k - eta)`` has at
    most one root on each monotone branch of the left side, so the total
    never exceeds 2n - 1.  Roots landing exactly on the excluded upper
    y-boundary (notably y = 1, the d = infinity limit) are dropped.
    """
    n = table.n_states
    points = []
    for k in range(n):
        y_hi = 1.0 if k == 0 else float(
            table.alpha[k] / (table.alpha[k] + table.pi_breaks[k - 1])
        )
        y_lo = 0.0 if k == n - 1 else float(
            table.alpha[k] / (table.alpha[k] + table.pi_breaks[k])
        )
        level = math.exp(table.b[k] - eta)
        for y in _branch_roots(level, eta, y_lo, y_hi):
            pi = float(table.alpha[k] * (1.0 - y) / y)
            if pi <= 0.0:
                continue
            d = (pt_prime / pi) ** (1.0 / eta)
            gamma = gamma_of_pi(table, pi)
            lam = lambda_closed_form(table, pi)
            residual = gamma - eta * pi * lam
            if abs(residual) > _RESIDUAL_REL * max(gamma, 1e-12):
                continue
            points.append(
                StationaryPoint(d=d, pi=pi, lam=lam, gamma=gamma, psi=d * gamma, segment=k + 1)
            )
    assert len(points) <= 2 * n - 1
    points.sort(key=lambda pt: pt.d)

    maximizer_index: int | None = None
    boundary = None
    if points:
        maximizer_index = max(range(len(points)), key=lambda i: points[i].psi)
        candidates = [pt.d for pt in points]
        if n > 1:
            candidates.extend(hop_breakpoints(table, eta, pt_prime))
        d_ref = 1e6 * max(candidates)
        psi_far = d_ref * gamma_of_pi(table, pt_prime / d_ref**eta)
        if psi_far > points[maximizer_index].psi:
            maximizer_index = None
            boundary = "d->inf"
    else:
        boundary = "d->inf"
    return StationarySet(
        points=tuple(points),
        maximizer_index=maximizer_index,
        unique=len(points) == 1,
        boundary=boundary,
    )


def _branch_roots(level: float, eta: float, y_lo: float, y_hi: float):
    """Roots of y*exp(-eta*y) = level on [y_lo, y_hi) inside (0, 1]."""
    w = lambda y: y * math.exp(-eta * y) - level
    peak = 1.0 / eta
    roots = []
    branches = []
    if peak >= 1.0:
        branches.append((max(y_lo, 1e-300), min(y_hi, 1.0), +1))
    else:
        branches.append((max(y_lo, 1e-300), min(y_hi, peak), +1))
        branches.append((max(y_lo, peak), min(y_hi, 1.0), -1))
    for lo, hi, _sign in branches:
        if hi <= lo:
            continue
        f_lo, f_hi = w(lo), w(hi)
        if f_lo == 0.0:
            roots.append(lo)
            continue
        if f_lo * f_hi < 0.0:
            y = brentq(w, lo, hi, xtol=_Y_XTOL, rtol=_Y_RTOL)
            if y_lo <= y < y_hi:
                roots.append(float(y))
    return roots
