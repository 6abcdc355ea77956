"""Exact hypergeometric sampling without numpy's 1e9 argument cap.

numpy's ``Generator.hypergeometric`` refuses populations with more than
1e9 balls of either color.  Mating in an exploding population can exceed
that, so large cases are routed to exact samplers of our own:

* when the smallest of the four classical dimensions is short, direct
  inversion of the pmf over its support, with the pmf evaluated through
  falling-factorial ratios (no lgamma, no cancellation);
* otherwise the HRUA* ratio-of-uniforms rejection sampler (the same
  algorithm numpy uses), with the log-pmf acceptance ratio computed by a
  Stirling-difference expansion that stays accurate where naive lgamma
  differences lose all their digits.

Neither path approximates the distribution: both are exact up to
floating-point rounding of the pmf, the same guarantee numpy gives.
"""

from __future__ import annotations

import math

import numpy as np

_NUMPY_ARG_LIMIT = 10**9
_INVERSION_LIMIT = 25

# HRUA* constants: 2*sqrt(2/e) and 3 - 2*sqrt(3/e)
_D1 = 1.7155277699214135
_D2 = 0.8989161620588988


def _logfact(x: float) -> float:
    return math.lgamma(x + 1.0)


def _stirling_corr(x: float) -> float:
    xx = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * xx)) / xx) / x


def _logfact_diff(u: float, v: float) -> float:
    """lgamma(u+1) - lgamma(v+1) without catastrophic ulp loss at huge args.

    Plain lgamma keeps only ~1e-2 absolute precision near 1e12 because the
    result magnitude dwarfs the O(1) difference we need.  When both
    arguments are large, expand the difference analytically instead; the
    mixed small/large case only arises far out in the pmf tail where the
    coarse answer cannot change any accept/reject decision.
    """
    big, small = (u, v) if u >= v else (v, u)
    if big < 1e8 or small < 1e3:
        return _logfact(u) - _logfact(v)
    b = v + 1.0
    delta = u - v
    return (
        delta * math.log(b)
        + (b + delta - 0.5) * math.log1p(delta / b)
        - delta
        + _stirling_corr(b + delta)
        - _stirling_corr(b)
    )


def _hypergeometric_inversion(rng, ngood: int, nbad: int, nsample: int) -> int:
    """Inversion over a support of width <= the smallest dimension.

    Reduces the draw to "how many of the w marked balls land in the
    selected group", whose pmf is a product of at most w O(1)-sized
    factor ratios: exact in floats with no special functions.
    """
    nrest = ngood + nbad - nsample
    w = min(ngood, nbad, nsample, nrest)
    if w == ngood:
        side_a, side_b = float(nsample), float(nrest)
        unmap = lambda j: j
    elif w == nbad:
        side_a, side_b = float(nsample), float(nrest)
        unmap = lambda j: nsample - j
    elif w == nsample:
        side_a, side_b = float(ngood), float(nbad)
        unmap = lambda j: j
    else:
        side_a, side_b = float(ngood), float(nbad)
        unmap = lambda j: ngood - j

    total_pop = side_a + side_b
    # weight at j=0: all marked balls land on side b
    v = 1.0
    for i in range(w):
        v *= (side_b - i) / (total_pop - i)
    weights = [v]
    for j in range(w):
        v *= (w - j) * (side_a - j) / ((j + 1.0) * (side_b - w + j + 1.0))
        weights.append(v)

    t = rng.random() * math.fsum(weights)
    acc = 0.0
    j = w
    for idx, wt in enumerate(weights):
        acc += wt
        if acc >= t:
            j = idx
            break
    return int(unmap(j))


def _hypergeometric_hrua(rng, ngood: int, nbad: int, nsample: int) -> int:
    """Ratio-of-uniforms rejection sampler (HRUA*), O(1) at any size."""
    popsize = ngood + nbad
    mingoodbad = min(ngood, nbad)
    maxgoodbad = max(ngood, nbad)
    m = min(nsample, popsize - nsample)
    d4 = float(mingoodbad) / popsize
    d5 = 1.0 - d4
    d6 = m * d4 + 0.5
    d7 = math.sqrt(float(popsize - m) * nsample * d4 * d5 / (popsize - 1) + 0.5)
    d8 = _D1 * d7 + _D2
    d9 = math.floor(float(m + 1) * (mingoodbad + 1) / (popsize + 2))
    d11 = min(min(m, mingoodbad) + 1.0, math.floor(d6 + 16.0 * d7))

    while True:
        x = rng.random()
        y = rng.random()
        w = d6 + d8 * (y - 0.5) / x
        if w < 0.0 or w >= d11:
            continue
        z = math.floor(w)
        # log pmf(z) - log pmf(mode), term-paired to preserve precision
        t = (
            _logfact_diff(d9, z)
            + _logfact_diff(mingoodbad - d9, mingoodbad - z)
            + _logfact_diff(m - d9, m - z)
            + _logfact_diff(maxgoodbad - m + d9, maxgoodbad - m + z)
        )
        if x * (4.0 - x) - 3.0 <= t:
            break
        if x * (x - t) >= 1.0:
            continue
        if 2.0 * math.log(x) <= t:
            break

    z = int(z)
    if ngood > nbad:
        z = m - z
    if m < nsample:
        z = ngood - z
    return z


def hypergeometric(rng: np.random.Generator, ngood: int, nbad: int, nsample: int) -> int:
    """Exact draw of the good-ball count in ``nsample`` draws without replacement.

    Delegates to numpy when its argument cap allows, otherwise to the local
    exact samplers.  Degenerate cases never touch the stream.
    """
    if ngood < 0 or nbad < 0 or not (0 <= nsample <= ngood + nbad):
        raise ValueError(f"invalid hypergeometric arguments ({ngood}, {nbad}, {nsample})")
    if nsample == 0 or ngood == 0:
        return 0
    if nbad == 0:
        return nsample
    if nsample == ngood + nbad:
        return ngood
    if ngood < _NUMPY_ARG_LIMIT and nbad < _NUMPY_ARG_LIMIT:
        return int(rng.hypergeometric(ngood, nbad, nsample))
    if min(ngood, nbad, nsample, ngood + nbad - nsample) <= _INVERSION_LIMIT:
        return _hypergeometric_inversion(rng, ngood, nbad, nsample)
    return _hypergeometric_hrua(rng, ngood, nbad, nsample)
