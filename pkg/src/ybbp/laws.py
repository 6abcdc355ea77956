"""Per-couple reproduction laws and closed-form aggregation over couples.

Three law families are supported: Poisson, negative binomial
(parameterized by size ``k`` and mean, variance ``m + m**2/k``), and an
arbitrary finite-support distribution on counts ``0..K``.  All laws are
immutable values and safe to share across threads.

``sample_total`` draws the sum of ``n_couples`` independent per-couple
litters in one shot: Poisson sums stay Poisson, negative binomial sums add
their sizes, and finite-support sums reduce to a single multinomial over
the support points.  All three are exact, not approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

# Expected totals above this are refused outright: counts are kept as
# 64-bit integers, every downstream sampler needs them exactly
# representable as floats, and silent wraparound is never acceptable.
COUNT_CAP = 10**15


class CountOverflowError(OverflowError):
    """Population counts grew past the 64-bit safety cap."""


def _check_total(expected: float) -> None:
    if expected > COUNT_CAP:
        raise CountOverflowError(
            f"expected offspring total {expected:.3g} exceeds the count cap {COUNT_CAP:.0e}"
        )


@dataclass(frozen=True)
class PoissonLaw:
    """Poisson litter-size law."""

    mean: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.mean >= 0.0):
            raise ValueError(f"Poisson mean must be finite and >= 0, got {self.mean}")

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.poisson(self.mean))

    def sample_many(self, size, rng: np.random.Generator) -> np.ndarray:
        return rng.poisson(self.mean, size=size)

    def sample_total(self, n_couples: int, rng: np.random.Generator) -> int:
        """Sum of ``n_couples`` iid draws: Poisson(n * mean)."""
        if n_couples < 0:
            raise ValueError("n_couples must be >= 0")
        if n_couples == 0 or self.mean == 0.0:
            return 0
        lam = n_couples * self.mean
        _check_total(lam)
        return int(rng.poisson(lam))


@dataclass(frozen=True)
class NegativeBinomialLaw:
    """Negative binomial litter-size law with size ``k`` and mean ``mean``.

    Variance is ``mean + mean**2 / k``; small ``k`` means heavy
    overdispersion, ``k -> inf`` recovers the Poisson law.
    """

    k: float
    mean: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0.0):
            raise ValueError(f"negative binomial size k must be > 0, got {self.k}")
        if not (math.isfinite(self.mean) and self.mean >= 0.0):
            raise ValueError(f"negative binomial mean must be finite and >= 0, got {self.mean}")

    @property
    def _p(self) -> float:
        # success probability of numpy's parameterization
        return self.k / (self.k + self.mean)

    def sample(self, rng: np.random.Generator) -> int:
        if self.mean == 0.0:
            return 0
        return int(rng.negative_binomial(self.k, self._p))

    def sample_many(self, size, rng: np.random.Generator) -> np.ndarray:
        if self.mean == 0.0:
            return np.zeros(size, dtype=np.int64)
        return rng.negative_binomial(self.k, self._p, size=size)

    def sample_total(self, n_couples: int, rng: np.random.Generator) -> int:
        """Sum of ``n_couples`` iid draws: size adds, mean per couple fixed."""
        if n_couples < 0:
            raise ValueError("n_couples must be >= 0")
        if n_couples == 0 or self.mean == 0.0:
            return 0
        _check_total(n_couples * self.mean)
        return int(rng.negative_binomial(n_couples * self.k, self._p))


@dataclass(frozen=True)
class FiniteSupportLaw:
    """Law with arbitrary probabilities on litter sizes ``0..K``."""

    probs: tuple[float, ...]
    _probs_arr: np.ndarray = field(init=False, repr=False, compare=False)
    _counts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D sequence")
        if np.any(p < 0.0) or not np.all(np.isfinite(p)):
            raise ValueError("probs must be finite and >= 0")
        total = float(p.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probs must sum to 1 within 1e-12, got {total!r}")
        # store exactly normalized probabilities so numpy's samplers accept them
        object.__setattr__(self, "probs", tuple(float(x) for x in p))
        object.__setattr__(self, "_probs_arr", p / total)
        object.__setattr__(self, "_counts", np.arange(p.size, dtype=np.int64))

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self._counts.size, p=self._probs_arr))

    def sample_many(self, size, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(self._counts.size, size=size, p=self._probs_arr)

    def sample_total(self, n_couples: int, rng: np.random.Generator) -> int:
        """Sum of ``n_couples`` iid draws via one multinomial over the support."""
        if n_couples < 0:
            raise ValueError("n_couples must be >= 0")
        if n_couples == 0:
            return 0
        _check_total(n_couples * self.mean())
        occupancy = rng.multinomial(n_couples, self._probs_arr)
        return int(occupancy @ self._counts)

    def mean(self) -> float:
        return float(self._probs_arr @ self._counts)


OffspringLaw = Union[PoissonLaw, NegativeBinomialLaw, FiniteSupportLaw]


def law_mean(law: OffspringLaw) -> float:
    """Expected litter size of a law."""
    if isinstance(law, FiniteSupportLaw):
        return law.mean()
    return float(law.mean)


def law_to_spec(law: OffspringLaw) -> dict:
    """JSON-friendly law description (inverse of :func:`law_from_spec`)."""
    if isinstance(law, PoissonLaw):
        return {"poisson": {"mean": law.mean}}
    if isinstance(law, NegativeBinomialLaw):
        return {"negbin": {"k": law.k, "mean": law.mean}}
    if isinstance(law, FiniteSupportLaw):
        return {"finite": {"probs": list(law.probs)}}
    raise TypeError(f"not an offspring law: {law!r}")


def law_from_spec(spec: dict) -> OffspringLaw:
    """Build a law from its config-file form.

    Accepted shapes: ``{"poisson": {"mean": m}}``,
    ``{"negbin": {"k": k, "mean": m}}``, ``{"finite": {"probs": [p0, ...]}}``.
    """
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"law spec must be a single-key mapping, got {spec!r}")
    kind, params = next(iter(spec.items()))
    try:
        if kind == "poisson":
            return PoissonLaw(mean=float(params["mean"]))
        if kind == "negbin":
            return NegativeBinomialLaw(k=float(params["k"]), mean=float(params["mean"]))
        if kind == "finite":
            return FiniteSupportLaw(probs=tuple(float(x) for x in params["probs"]))
    except KeyError as exc:
        raise ValueError(f"law spec {kind!r} is missing field {exc}") from exc
    raise ValueError(f"unknown law kind {kind!r}")


@dataclass(frozen=True)
class LawFamily:
    """A law family with the mean left free, used to map parameter draws to laws.

    The rejection engine simulates with ``family.make(m_R)`` and
    ``family.make(m_r)``; a zero mean always yields a law degenerate at 0.
    """

    kind: str = "poisson"
    k: float | None = None

    def __post_init__(self):
        if self.kind == "poisson":
            if self.k is not None:
                raise ValueError("poisson family takes no size parameter")
        elif self.kind == "negbin":
            if self.k is None or not (math.isfinite(self.k) and self.k > 0):
                raise ValueError("negbin family requires size k > 0")
        else:
            raise ValueError(f"unknown law family {self.kind!r}")

    def make(self, mean: float) -> OffspringLaw:
        if self.kind == "poisson" or mean == 0.0:
            return PoissonLaw(mean=mean)
        return NegativeBinomialLaw(k=self.k, mean=mean)

    def to_spec(self) -> dict:
        if self.kind == "poisson":
            return {"poisson": {}}
        return {"negbin": {"k": self.k}}

    @classmethod
    def from_spec(cls, spec: dict) -> "LawFamily":
        if not isinstance(spec, dict) or len(spec) != 1:
            raise ValueError(f"law family spec must be a single-key mapping, got {spec!r}")
        kind, params = next(iter(spec.items()))
        if kind == "poisson":
            return cls("poisson")
        if kind == "negbin":
            if "k" not in params:
                raise ValueError("negbin family spec requires the size field k")
            return cls("negbin", k=float(params["k"]))
        raise ValueError(f"unknown law family {kind!r}")
