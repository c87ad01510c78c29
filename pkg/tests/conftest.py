"""Shared factories and independent numerical oracles for the test suite.

The oracles deliberately avoid the production code paths: dense
trapezoid quadrature plus plain bisection, nothing from `waterfill` or
`discrete`.
"""

import numpy as np

from hopcap.fading import FadingModel


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_discrete_model(rng, max_states: int = 6) -> FadingModel:
    """Random finite fading model with well-separated gains."""
    n = int(rng.integers(1, max_states + 1))
    while True:
        gains = np.exp(rng.uniform(np.log(1e-2), np.log(1e3), size=n))
        gains = np.sort(gains)[::-1]
        if n == 1 or np.min(gains[:-1] / gains[1:]) > 1.01:
            break
    while True:
        probs = rng.dirichlet(np.ones(n))
        if probs.min() > 1e-4:
            break
    scale = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
    return FadingModel.discrete(list(zip(gains, probs)), scale)


def random_tabulated_model(rng, points: int = 801) -> FadingModel:
    """Random compact-support density: truncated exp, triangle or bimodal."""
    shape = rng.integers(0, 3)
    if shape == 0:
        mu = float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
        h = np.linspace(0.0, 12.0 / mu, points)
        a = np.exp(-mu * h)
    elif shape == 1:
        lo = float(rng.uniform(0.05, 0.5))
        hi = lo + float(rng.uniform(0.5, 3.0))
        h = np.linspace(lo, hi, points)
        a = np.minimum(h - lo, hi - h)
    else:
        h = np.linspace(0.0, 8.0, points)
        a = np.exp(-0.5 * ((h - 1.0) / 0.3) ** 2) + 0.7 * np.exp(
            -0.5 * ((h - 4.0) / 0.8) ** 2
        )
    a = a / np.trapezoid(a, h)
    scale = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
    return FadingModel.tabulated(h, a, scale)


def random_model(rng, kinds=("exponential", "discrete", "tabulated")) -> FadingModel:
    kind = kinds[rng.integers(0, len(kinds))]
    if kind == "exponential":
        mu = float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
        scale = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
        return FadingModel.exponential(mu, scale)
    if kind == "discrete":
        return random_discrete_model(rng)
    return random_tabulated_model(rng)


# -- independent oracles -------------------------------------------------------


def oracle_x_samples(model, n_points: int):
    """Dense x-grid and density values covering the model's support."""
    if model.is_discrete:
        raise ValueError("oracle grids are for continuous models")
    lo, hi = model.x_support()
    if not np.isfinite(hi):
        nu = model.kind.rate / model.alpha_over_sigma2
        hi = 80.0 / nu
    x = np.linspace(max(lo, 1e-12), hi, n_points)
    return x, model.pdf_x(x)


def oracle_power_integral(model, lam: float, n_points: int = 400_001) -> float:
    """Trapezoid evaluation of E[(1/lam - 1/X)^+] for continuous models.

    The grid is logarithmic in x so the 1/x factor stays resolved when
    lam sits orders of magnitude below the support's top.
    """
    if model.is_discrete:
        x, a = model.x_states()
        mask = x > lam
        return float(np.sum(a[mask] * (1.0 / lam - 1.0 / x[mask])))
    xg, _ = oracle_x_samples(model, 3)
    hi = xg[-1]
    if lam >= hi:
        return 0.0
    x = np.geomspace(lam, hi, n_points)
    return float(np.trapezoid((1.0 / lam - 1.0 / x) * model.pdf_x(x), x))


def oracle_rate_integral(model, lam: float, n_points: int = 400_001) -> float:
    """Trapezoid evaluation of E[log(X/lam)^+] for continuous models."""
    if model.is_discrete:
        x, a = model.x_states()
        mask = x > lam
        return float(np.sum(a[mask] * np.log(x[mask] / lam)))
    xg, _ = oracle_x_samples(model, 3)
    hi = xg[-1]
    if lam >= hi:
        return 0.0
    x = np.geomspace(lam, hi, n_points)
    return float(np.trapezoid(np.log(x / lam) * model.pdf_x(x), x))


def oracle_waterfill_lambda(model, pi: float, n_points: int = 400_001) -> float:
    """Bisection on the trapezoid power integral, to 1e-12 relative."""
    lo, hi = 1e-9, 1e9
    for _ in range(300):
        mid = np.sqrt(lo * hi)
        if oracle_power_integral(model, mid, n_points) > pi:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * mid:
            break
    return float(0.5 * (lo + hi))


def bisect_scalar(func, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Plain bisection; ``func`` must change sign on [lo, hi]."""
    f_lo = func(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo <= tol * max(abs(mid), 1.0):
            break
    return 0.5 * (lo + hi)
