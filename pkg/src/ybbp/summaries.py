"""Posterior summaries: densities, credible sets, errors, and odds.

Density estimation is a Gaussian kernel on an evenly spaced grid with
Silverman's rule-of-thumb bandwidth, evaluated by binned convolution and
renormalized to integrate to one.  Highest-posterior-density sets come
from thresholding that density, so they may be unions of intervals when
the posterior is multimodal.  Parameters with a spike-and-slab prior are
summarized as a (spike probability, density of the positive part) pair,
and the zero hypothesis gets a Bayes factor equal to the posterior odds,
the prior odds being even by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PointMass:
    """Degenerate sample: all draws at one value."""

    location: float


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float


@dataclass(frozen=True)
class HpdSet:
    level: float
    intervals: tuple[tuple[float, float], ...]

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)

    @property
    def total_width(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


def silverman_bandwidth(samples: np.ndarray) -> float:
    """0.9 * min(sd, iqr/1.34) * n**(-1/5), with fallbacks for flat spreads."""
    x = np.asarray(samples, dtype=np.float64)
    sd = float(np.std(x))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    if spread <= 0:
        spread = sd if sd > 0 else 1.0
    return 0.9 * spread * len(x) ** (-0.2)


def kde(samples, grid_size: int = 2048, bandwidth: float | None = None):
    """Gaussian-kernel density of a sample, or a PointMass when degenerate.

    The grid spans [min - 3h, max + 3h].  Evaluation bins the sample onto
    the grid and convolves with the discretized kernel, then renormalizes
    so the trapezoidal integral is exactly one.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or len(x) == 0:
        raise ValueError("samples must be a non-empty 1-D array")
    if np.all(x == x[0]):
        return PointMass(float(x[0]))
    h = bandwidth if bandwidth is not None else silverman_bandwidth(x)
    lo = float(x.min()) - 3.0 * h
    hi = float(x.max()) + 3.0 * h
    grid = np.linspace(lo, hi, grid_size)
    delta = grid[1] - grid[0]
    edges = np.linspace(lo - delta / 2.0, hi + delta / 2.0, grid_size + 1)
    counts, _ = np.histogram(x, bins=edges)
    radius = max(1, int(math.ceil(4.0 * h / delta)))
    offsets = np.arange(-radius, radius + 1) * delta
    kernel = np.exp(-0.5 * (offsets / h) ** 2) / (h * math.sqrt(2.0 * math.pi))
    density = np.convolve(counts, kernel, mode="same") / len(x)
    integral = float(np.trapezoid(density, grid))
    density = density / integral
    return DensityEstimate(grid=grid, density=density, bandwidth=float(h))


def hpd(samples, level: float = 0.95, grid_size: int = 2048) -> HpdSet:
    """Highest-density region at the given level, from the kernel density.

    The region is the smallest density super-level set carrying at least
    ``level`` of the mass; it may consist of several intervals.
    Degenerate samples give a single zero-width interval.
    """
    if not (0.0 < level < 1.0):
        raise ValueError("level must be in (0, 1)")
    est = kde(samples, grid_size=grid_size)
    if isinstance(est, PointMass):
        return HpdSet(level, ((est.location, est.location),))
    masses = est.density  # equal spacing: cell mass proportional to density
    order = np.argsort(masses)[::-1]
    cum = np.cumsum(masses[order])
    n_in = int(np.searchsorted(cum, level * cum[-1])) + 1
    included = np.zeros(len(masses), dtype=bool)
    included[order[:n_in]] = True
    intervals = []
    start = None
    for i, inc in enumerate(included):
        if inc and start is None:
            start = i
        elif not inc and start is not None:
            intervals.append((float(est.grid[start]), float(est.grid[i - 1])))
            start = None
    if start is not None:
        intervals.append((float(est.grid[start]), float(est.grid[-1])))
    return HpdSet(level, tuple(intervals))


def point_estimate(samples) -> float:
    """Posterior mean (the point estimate under squared error loss)."""
    x = np.asarray(samples, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("samples must be non-empty")
    return float(np.mean(x))


def rmse(samples, true_value: float) -> float:
    """Relative mean square error of draws around a nonzero true value:
    mean((draw - truth)**2) / truth**2."""
    if true_value == 0.0:
        raise ValueError("true value is zero; use rmse_zero")
    x = np.asarray(samples, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("samples must be non-empty")
    return float(np.mean((x - true_value) ** 2) / true_value**2)


@dataclass(frozen=True)
class RmseZeroSurrogate:
    """Stand-in error measure for a zero true value.

    The relative error is undefined at zero truth; this reports
    mean(draw**2 / (draw + mean(draws))**2) together with the raw mean
    square, both explicitly labeled as a surrogate.
    """

    surrogate: float
    mean_square: float
    label: str = "surrogate"


def rmse_zero(samples) -> RmseZeroSurrogate:
    x = np.asarray(samples, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("samples must be non-empty")
    center = float(np.mean(x))
    denom = x + center
    terms = np.zeros_like(x)
    nonzero = x != 0.0
    terms[nonzero] = (x[nonzero] / denom[nonzero]) ** 2
    return RmseZeroSurrogate(
        surrogate=float(np.mean(terms)), mean_square=float(np.mean(x**2))
    )


def spike_probability(values) -> float:
    """Fraction of draws exactly at zero."""
    x = np.asarray(values, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("values must be non-empty")
    return float(np.mean(x == 0.0))


def bayes_factor_zero(spike_prob: float) -> float:
    """Bayes factor for the zero-value null from its posterior spike mass.

    The mixture prior's expected spike weight makes the prior odds even,
    so the factor reduces to the posterior odds p/(1-p).  Returns 0 or
    +inf at the boundary values; callers should flag those explicitly.
    """
    if not (0.0 <= spike_prob <= 1.0):
        raise ValueError("spike probability must be in [0, 1]")
    if spike_prob == 1.0:
        return math.inf
    return spike_prob / (1.0 - spike_prob)


def rate_posteriors(alpha, beta, m_R, m_r) -> tuple[np.ndarray, np.ndarray]:
    """Per-draw growth rates of the R-couple and r-couple lines.

    The R line grows at min(alpha, 1-alpha)*(1-beta)*m_R; the r line at
    min(alpha, 1-alpha)*max(m_r, (1-beta)*m_R), covering both the
    r-dominant case and the mutation-driven one.
    """
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(beta, dtype=np.float64)
    mR = np.asarray(m_R, dtype=np.float64)
    mr = np.asarray(m_r, dtype=np.float64)
    a_min = np.minimum(a, 1.0 - a)
    effective_R = (1.0 - b) * mR
    return a_min * effective_R, a_min * np.maximum(mr, effective_R)
