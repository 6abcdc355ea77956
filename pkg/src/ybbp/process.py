"""The Y-linked two-sex branching process with mutations.

The population carries one Y-linked gene with a tracked allele (``R``)
and a catch-all class for everything else (``r``), including mutants of
``R``; mutation is strictly one-way, R to r.  Generations do not overlap
and evolve in two stages:

* reproduction: every couple of generation ``n`` independently produces a
  litter from its genotype's law; each child is female with probability
  ``alpha``; each son of an R-couple carries a mutated allele with
  probability ``beta``, while sons of r-couples always carry ``r``;
* mating: monogamous and blind to genotype.  With females at least as
  numerous as males every male mates; otherwise the female hands are
  allocated across male genotypes by an exact hypergeometric draw.

All operations are pure given an explicit generator, so paths can be
simulated independently in parallel with per-path substreams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .laws import OffspringLaw
from .sampling import hypergeometric

REGIME_R_DOMINANT = "r dominant"
REGIME_NO_DOMINANT = "no dominant"
REGIME_EQUAL = "equal"
REGIME_DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ParamVector:
    """Model parameters: sex ratio, mutation probability and the two
    genotype reproduction means."""

    alpha: float
    beta: float
    m_R: float
    m_r: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (0.0 <= self.beta < 1.0):
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        if not (math.isfinite(self.m_R) and self.m_R >= 0.0):
            raise ValueError(f"m_R must be finite and >= 0, got {self.m_R}")
        if not (math.isfinite(self.m_r) and self.m_r >= 0.0):
            raise ValueError(f"m_r must be finite and >= 0, got {self.m_r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.m_R, self.m_r)


@dataclass(frozen=True)
class GenerationState:
    """Census of one generation after both stages.

    ``M_Rr`` are r-males whose father was an R-couple (mutants born this
    generation); ``M_rr`` are r-males stemming from r-couples.  For the
    founding generation the origin split is conventional: the initial
    r-males are recorded under ``M_rr``.
    """

    n: int
    F: int
    M_R: int
    M_Rr: int
    M_rr: int
    Z_R: int
    Z_r: int

    def __post_init__(self):
        for name in ("F", "M_R", "M_Rr", "M_rr", "Z_R", "Z_r"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.Z_R + self.Z_r != min(self.F, self.M_R + self.M_Rr + self.M_rr):
            raise ValueError("couple counts must satisfy Z_R + Z_r = min(F, M)")

    @property
    def M_r(self) -> int:
        return self.M_Rr + self.M_rr

    @property
    def M(self) -> int:
        return self.M_R + self.M_Rr + self.M_rr


class PathRecord:
    """A simulated trajectory, generations ``0..N``, stored columnwise."""

    __slots__ = ("F", "M_R", "M_Rr", "M_rr", "Z_R", "Z_r")

    def __init__(self, F, M_R, M_Rr, M_rr, Z_R, Z_r):
        self.F = np.asarray(F, dtype=np.int64)
        self.M_R = np.asarray(M_R, dtype=np.int64)
        self.M_Rr = np.asarray(M_Rr, dtype=np.int64)
        self.M_rr = np.asarray(M_rr, dtype=np.int64)
        self.Z_R = np.asarray(Z_R, dtype=np.int64)
        self.Z_r = np.asarray(Z_r, dtype=np.int64)

    @property
    def horizon(self) -> int:
        return len(self.F) - 1

    @property
    def M_r(self) -> np.ndarray:
        return self.M_Rr + self.M_rr

    @property
    def M(self) -> np.ndarray:
        return self.M_R + self.M_Rr + self.M_rr

    def state(self, n: int) -> GenerationState:
        return GenerationState(
            n=n,
            F=int(self.F[n]),
            M_R=int(self.M_R[n]),
            M_Rr=int(self.M_Rr[n]),
            M_rr=int(self.M_rr[n]),
            Z_R=int(self.Z_R[n]),
            Z_r=int(self.Z_r[n]),
        )

    def __len__(self) -> int:
        return len(self.F)

    def __iter__(self) -> Iterator[GenerationState]:
        return (self.state(n) for n in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PathRecord):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in self.__slots__
        )

    def to_csv(self, path: str | Path, meta: Optional[dict] = None) -> None:
        lines = []
        for key, value in (meta or {}).items():
            lines.append(f"# {key}: {value}")
        lines.append("n,F,M_R,M_Rr,M_rr,Z_R,Z_r")
        for n in range(len(self)):
            lines.append(
                f"{n},{self.F[n]},{self.M_R[n]},{self.M_Rr[n]},"
                f"{self.M_rr[n]},{self.Z_R[n]},{self.Z_r[n]}"
            )
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "PathRecord":
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("n,"):
                continue
            rows.append([int(x) for x in line.split(",")])
        if not rows:
            raise ValueError(f"no data rows in {path}")
        cols = list(zip(*rows))
        if list(cols[0]) != list(range(len(rows))):
            raise ValueError(f"generation index column must be 0..N in {path}")
        return cls(*cols[1:])


def reproduce(
    z_R: int,
    z_r: int,
    theta: ParamVector,
    law_R: OffspringLaw,
    law_r: OffspringLaw,
    rng: np.random.Generator,
) -> tuple[int, int, int, int]:
    """One reproduction stage: (females, R-males, mutant r-males, r-line r-males).

    Litter totals are drawn per genotype with the closed-form couple
    aggregation, then split by sequential binomial conditioning, which is
    distributionally identical to splitting couple by couple: each child of
    an R-couple is female w.p. ``alpha``, and each son mutates w.p.
    ``beta``; children of r-couples are female w.p. ``alpha`` and their
    sons always carry r.
    """
    alpha, beta = theta.alpha, theta.beta

    total_R = law_R.sample_total(z_R, rng)
    if total_R:
        females_R = int(rng.binomial(total_R, alpha))
        sons_R = total_R - females_R
        m_Rr = int(rng.binomial(sons_R, beta)) if sons_R else 0
        m_R = sons_R - m_Rr
    else:
        females_R = m_R = m_Rr = 0

    total_r = law_r.sample_total(z_r, rng)
    if total_r:
        females_r = int(rng.binomial(total_r, alpha))
        m_rr = total_r - females_r
    else:
        females_r = m_rr = 0

    return females_R + females_r, m_R, m_Rr, m_rr


def mate(F: int, M_R: int, M_r: int, rng: np.random.Generator) -> tuple[int, int]:
    """Monogamous blind mating: couple counts by genotype.

    With ``F >= M`` every male finds a mate.  Otherwise every female
    mates and the R-couple count is an exact hypergeometric draw of ``F``
    mates from the male pool.
    """
    if F < 0 or M_R < 0 or M_r < 0:
        raise ValueError("census counts must be >= 0")
    M = M_R + M_r
    if F >= M:
        return M_R, M_r
    if M_R == 0:
        return 0, F
    if M_r == 0:
        return F, 0
    z_R = hypergeometric(rng, M_R, M_r, F)
    return z_R, F - z_R


def step(
    state: GenerationState,
    theta: ParamVector,
    law_R: OffspringLaw,
    law_r: OffspringLaw,
    rng: np.random.Generator,
) -> GenerationState:
    """Advance one generation: reproduce from the couples, then mate."""
    F, m_R, m_Rr, m_rr = reproduce(state.Z_R, state.Z_r, theta, law_R, law_r, rng)
    z_R, z_r = mate(F, m_R, m_Rr + m_rr, rng)
    return GenerationState(state.n + 1, F, m_R, m_Rr, m_rr, z_R, z_r)


def initial_state(F_0: int, M_R0: int, M_r0: int, rng: np.random.Generator) -> GenerationState:
    """Found generation 0 by mating the initial census."""
    z_R, z_r = mate(F_0, M_R0, M_r0, rng)
    return GenerationState(0, F_0, M_R0, 0, M_r0, z_R, z_r)


def simulate_path(
    initial: tuple[int, int, int],
    theta: ParamVector,
    law_R: OffspringLaw,
    law_r: OffspringLaw,
    N: int,
    rng: np.random.Generator,
) -> PathRecord:
    """Simulate generations ``0..N`` from an initial census.

    Once both couple counts hit zero the lineage is extinct and the
    remaining generations are recorded as zero states, keeping every path
    the same length.
    """
    if N < 1:
        raise ValueError("horizon N must be >= 1")
    state = initial_state(*initial, rng)
    F = [state.F]
    M_R = [state.M_R]
    M_Rr = [state.M_Rr]
    M_rr = [state.M_rr]
    Z_R = [state.Z_R]
    Z_r = [state.Z_r]
    for _ in range(N):
        if state.Z_R == 0 and state.Z_r == 0:
            state = GenerationState(state.n + 1, 0, 0, 0, 0, 0, 0)
        else:
            state = step(state, theta, law_R, law_r, rng)
        F.append(state.F)
        M_R.append(state.M_R)
        M_Rr.append(state.M_Rr)
        M_rr.append(state.M_rr)
        Z_R.append(state.Z_R)
        Z_r.append(state.Z_r)
    return PathRecord(F, M_R, M_Rr, M_rr, Z_R, Z_r)


def survival_condition(theta: ParamVector) -> bool:
    """Whether indefinite coexistence of both alleles has positive probability."""
    return min(theta.alpha, 1.0 - theta.alpha) * (1.0 - theta.beta) * theta.m_R > 1.0


@dataclass(frozen=True)
class RateReport:
    """Asymptotic growth description on the coexistence event.

    ``tau_R`` and ``tau_r`` are the geometric growth rates of R- and
    r-couples.  ``ratio_limit_or_slope`` describes the couple-count ratio
    ``Z_r/Z_R``: its geometric divergence rate when r dominates, its
    linear slope in ``n`` when the regimes tie, and its finite limit when
    neither dominates.  ``gap`` is the signed quantity ``m_r - (1-beta)*m_R``
    whose sign picks the regime; callers probing near-equality should use
    it rather than the exact-comparison regime label.
    """

    tau_R: float
    tau_r: float
    regime: str
    ratio_limit_or_slope: Optional[float]
    gap: float


def theoretical_rates(theta: ParamVector) -> RateReport:
    """Growth rates and ratio behavior implied by the parameters.

    Regime comparison is exact arithmetic on the inputs: the "equal"
    regime is reported only when ``m_r == (1-beta)*m_R`` exactly.  A zero
    ``m_R`` makes the ratio undefined and is flagged as degenerate.
    """
    a_min = min(theta.alpha, 1.0 - theta.alpha)
    effective_R = (1.0 - theta.beta) * theta.m_R
    tau_R = a_min * effective_R
    tau_r = a_min * max(theta.m_r, effective_R)
    gap = theta.m_r - effective_R
    if theta.m_R == 0.0:
        return RateReport(tau_R, tau_r, REGIME_DEGENERATE, None, gap)
    if gap > 0.0:
        value = theta.m_r / effective_R
        regime = REGIME_R_DOMINANT
    elif gap == 0.0:
        value = theta.beta / (1.0 - theta.beta)
        regime = REGIME_EQUAL
    else:
        value = theta.beta * theta.m_R / (effective_R - theta.m_r)
        regime = REGIME_NO_DOMINANT
    return RateReport(tau_R, tau_r, regime, value, gap)
