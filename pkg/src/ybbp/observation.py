"""Partial observation schemes and the rescaled distances between them.

Real data never exposes the full family tree.  Two nested schemes are
supported:

* basic: per-generation totals of females and males up to the horizon,
  plus the genotype-resolved male counts in the last generation only;
* extended: the basic scheme plus the genotype split one generation
  earlier and the origin split (mutant vs r-line) of the last
  generation's r-males.

Both schemes presume coexistence in the last generation (all final
genotype counts positive for the fields the scheme's variant declares
positive), which in turn forces every earlier generation's female and
male totals to be positive, so the ratio-based distance below never
divides by zero.

Each compared coordinate contributes ``(a/b - b/a)**2``, which rescales
the wildly different magnitudes across generations, sexes and genotypes;
the distance is the square root of the summed contributions.  The basic
distance compares females for generations ``1..N``, male totals for
``1..N-1`` and the two genotype counts at ``N``.  The extended distance
stops the male totals at ``N-2`` and adds the five genotype-resolved
coordinates; when the observed origin split has a structural zero the
corresponding term is dropped (it would compare zero with zero).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .laws import OffspringLaw
from .process import PathRecord, ParamVector, simulate_path


class ObservationError(ValueError):
    """Raised when an observed-sample file or construction is invalid."""


class SchemeVariant(enum.Enum):
    """Positivity pattern of the extended scheme's last-generation origin split."""

    BOTH_POSITIVE = "both_positive"
    RR_ZERO = "rr_zero"      # no r-line sons observed in the last generation
    RMUT_ZERO = "rmut_zero"  # no mutant sons observed in the last generation


@dataclass(frozen=True, eq=False)
class BasicSample:
    """Basic scheme: (F_n, M_n) for n = 0..N-1 plus (F_N, M_R_N, M_r_N)."""

    F: np.ndarray          # females, generations 0..N
    M: np.ndarray          # male totals, generations 0..N-1
    M_R_last: int
    M_r_last: int

    def __post_init__(self):
        F = np.asarray(self.F, dtype=np.int64)
        M = np.asarray(self.M, dtype=np.int64)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "M", M)
        if len(F) < 2 or len(M) != len(F) - 1:
            raise ObservationError(
                f"need F over 0..N and M over 0..N-1, got lengths {len(F)} and {len(M)}"
            )
        if self.M_R_last <= 0 or self.M_r_last <= 0 or F[-1] <= 0:
            raise ObservationError("last generation must have F, M_R and M_r all positive")
        if np.any(F[:-1] <= 0) or np.any(M <= 0):
            raise ObservationError("all earlier generations must have positive F and M")

    @property
    def N(self) -> int:
        return len(self.F) - 1

    @property
    def M_last(self) -> int:
        return self.M_R_last + self.M_r_last

    def __eq__(self, other) -> bool:
        if not isinstance(other, BasicSample):
            return NotImplemented
        return (
            np.array_equal(self.F, other.F)
            and np.array_equal(self.M, other.M)
            and self.M_R_last == other.M_R_last
            and self.M_r_last == other.M_r_last
        )


@dataclass(frozen=True, eq=False)
class ExtendedSample:
    """Extended scheme: basic plus the N-1 genotype split and the final origin split."""

    basic: BasicSample
    M_R_prev: int
    M_r_prev: int
    M_Rr_last: int
    M_rr_last: int

    def __post_init__(self):
        if self.M_R_prev <= 0 or self.M_r_prev <= 0:
            raise ObservationError("generation N-1 must have both genotypes present")
        if self.M_Rr_last < 0 or self.M_rr_last < 0:
            raise ObservationError("origin split counts must be >= 0")
        if self.M_R_prev + self.M_r_prev != int(self.basic.M[-1]):
            raise ObservationError(
                "genotype split at N-1 must sum to the male total at N-1"
            )
        if self.M_Rr_last + self.M_rr_last != self.basic.M_r_last:
            raise ObservationError("origin split must sum to the r-male count at N")

    @property
    def N(self) -> int:
        return self.basic.N

    @property
    def variant(self) -> SchemeVariant:
        if self.M_Rr_last > 0 and self.M_rr_last > 0:
            return SchemeVariant.BOTH_POSITIVE
        if self.M_rr_last == 0:
            return SchemeVariant.RR_ZERO
        return SchemeVariant.RMUT_ZERO

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtendedSample):
            return NotImplemented
        return (
            self.basic == other.basic
            and self.M_R_prev == other.M_R_prev
            and self.M_r_prev == other.M_r_prev
            and self.M_Rr_last == other.M_Rr_last
            and self.M_rr_last == other.M_rr_last
        )


ObservedSample = Union[BasicSample, ExtendedSample]


def extract_basic(path: PathRecord) -> Optional[BasicSample]:
    """Project a path onto the basic scheme; None if the path is incompatible.

    Compatible means both alleles coexist in the last generation:
    ``F_N > 0``, ``M_R_N > 0`` and ``M_r_N > 0``.
    """
    N = path.horizon
    if N < 1:
        raise ValueError("path must cover at least generations 0..1")
    M_R_last = int(path.M_R[N])
    M_r_last = int(path.M_Rr[N] + path.M_rr[N])
    if path.F[N] <= 0 or M_R_last <= 0 or M_r_last <= 0:
        return None
    return BasicSample(
        F=path.F.copy(),
        M=(path.M_R + path.M_Rr + path.M_rr)[:N].copy(),
        M_R_last=M_R_last,
        M_r_last=M_r_last,
    )


def extract_extended(
    path: PathRecord, variant: Optional[SchemeVariant] = None
) -> Optional[ExtendedSample]:
    """Project a path onto the extended scheme; None if incompatible.

    With a variant given, the path's realized zero pattern must match it
    exactly; with ``variant=None`` any valid extended pattern is accepted.
    All variants require both genotypes present at generation N-1.
    """
    basic = extract_basic(path)
    if basic is None:
        return None
    N = path.horizon
    M_R_prev = int(path.M_R[N - 1])
    M_r_prev = int(path.M_Rr[N - 1] + path.M_rr[N - 1])
    M_Rr_last = int(path.M_Rr[N])
    M_rr_last = int(path.M_rr[N])
    if M_R_prev <= 0 or M_r_prev <= 0:
        return None
    sample = ExtendedSample(basic, M_R_prev, M_r_prev, M_Rr_last, M_rr_last)
    if variant is not None and sample.variant is not variant:
        return None
    return sample


def _term(sim, obs) -> np.ndarray:
    a = np.asarray(sim, dtype=np.float64)
    b = np.asarray(obs, dtype=np.float64)
    r = a / b - b / a
    return r * r


def rho_terms(sim: BasicSample, obs: BasicSample) -> dict[str, float]:
    """Individual squared contributions of the basic distance, by coordinate."""
    if sim.N != obs.N:
        raise ValueError(f"horizon mismatch: {sim.N} vs {obs.N}")
    N = obs.N
    out: dict[str, float] = {}
    f = _term(sim.F[1:], obs.F[1:])
    for n in range(1, N + 1):
        out[f"F_{n}"] = float(f[n - 1])
    m = _term(sim.M[1:], obs.M[1:])
    for n in range(1, N):
        out[f"M_{n}"] = float(m[n - 1])
    out[f"M_R_{N}"] = float(_term(sim.M_R_last, obs.M_R_last))
    out[f"M_r_{N}"] = float(_term(sim.M_r_last, obs.M_r_last))
    return out


def rho(sim: BasicSample, obs: BasicSample) -> float:
    """Rescaled distance between two basic-scheme samples."""
    if sim.N != obs.N:
        raise ValueError(f"horizon mismatch: {sim.N} vs {obs.N}")
    total = (
        float(np.sum(_term(sim.F[1:], obs.F[1:])))
        + float(np.sum(_term(sim.M[1:], obs.M[1:])))
        + float(_term(sim.M_R_last, obs.M_R_last))
        + float(_term(sim.M_r_last, obs.M_r_last))
    )
    return float(np.sqrt(total))


def rho_star_terms(
    sim: ExtendedSample, obs: ExtendedSample, variant: Optional[SchemeVariant] = None
) -> dict[str, float]:
    """Individual squared contributions of the extended distance, by coordinate."""
    if sim.N != obs.N:
        raise ValueError(f"horizon mismatch: {sim.N} vs {obs.N}")
    if variant is None:
        variant = obs.variant
    if obs.variant is not variant or sim.variant is not variant:
        raise ValueError(
            f"zero patterns must both match {variant}: sim={sim.variant}, obs={obs.variant}"
        )
    N = obs.N
    out: dict[str, float] = {}
    f = _term(sim.basic.F[1:], obs.basic.F[1:])
    for n in range(1, N + 1):
        out[f"F_{n}"] = float(f[n - 1])
    if N >= 2:
        m = _term(sim.basic.M[1 : N - 1], obs.basic.M[1 : N - 1])
        for n in range(1, N - 1):
            out[f"M_{n}"] = float(m[n - 1])
    out[f"M_R_{N - 1}"] = float(_term(sim.M_R_prev, obs.M_R_prev))
    out[f"M_r_{N - 1}"] = float(_term(sim.M_r_prev, obs.M_r_prev))
    out[f"M_R_{N}"] = float(_term(sim.basic.M_R_last, obs.basic.M_R_last))
    if variant is not SchemeVariant.RMUT_ZERO:
        out[f"M_Rr_{N}"] = float(_term(sim.M_Rr_last, obs.M_Rr_last))
    if variant is not SchemeVariant.RR_ZERO:
        out[f"M_rr_{N}"] = float(_term(sim.M_rr_last, obs.M_rr_last))
    return out


def rho_star(
    sim: ExtendedSample, obs: ExtendedSample, variant: Optional[SchemeVariant] = None
) -> float:
    """Rescaled distance between two extended-scheme samples.

    Under the RR_ZERO variant the r-line origin term is dropped; under
    RMUT_ZERO the mutant origin term is dropped.  Both sides must carry
    the variant's exact zero pattern.
    """
    return float(np.sqrt(sum(rho_star_terms(sim, obs, variant).values())))


def simulate_compatible(
    theta: ParamVector,
    law_R: OffspringLaw,
    law_r: OffspringLaw,
    initial: tuple[int, int, int],
    N: int,
    rng: np.random.Generator,
    scheme: str = "basic",
    variant: Optional[SchemeVariant] = None,
    max_tries: int = 1000,
) -> tuple[PathRecord, ObservedSample, int]:
    """Simulate until a path projects onto the requested scheme.

    Returns the path, its projection and the number of attempts.  Raises
    RuntimeError when ``max_tries`` consecutive paths are incompatible.
    """
    if scheme not in ("basic", "extended"):
        raise ValueError(f"unknown scheme {scheme!r}")
    for attempt in range(1, max_tries + 1):
        path = simulate_path(initial, theta, law_R, law_r, N, rng)
        if scheme == "basic":
            sample = extract_basic(path)
        else:
            sample = extract_extended(path, variant)
        if sample is not None:
            return path, sample, attempt
    raise RuntimeError(
        f"no compatible path in {max_tries} attempts (scheme={scheme}, variant={variant})"
    )


# ---------------------------------------------------------------------------
# observed-sample files
#
# One CSV with columns n,F,M,M_R,M_r,M_Rr,M_rr and empty cells where the
# scheme leaves a quantity unobserved.  The loader validates positivity,
# the split identities, and reports the implied scheme variant.
# ---------------------------------------------------------------------------

_HEADER = "n,F,M,M_R,M_r,M_Rr,M_rr"


def write_observed_csv(
    path: str | Path, sample: ObservedSample, meta: Optional[dict] = None
) -> None:
    basic = sample.basic if isinstance(sample, ExtendedSample) else sample
    N = basic.N
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    lines.append(_HEADER)
    for n in range(N):
        row = [str(n), str(basic.F[n]), str(basic.M[n]), "", "", "", ""]
        if isinstance(sample, ExtendedSample) and n == N - 1:
            row[3] = str(sample.M_R_prev)
            row[4] = str(sample.M_r_prev)
        lines.append(",".join(row))
    last = [str(N), str(basic.F[N]), str(basic.M_last), str(basic.M_R_last),
            str(basic.M_r_last), "", ""]
    if isinstance(sample, ExtendedSample):
        last[5] = str(sample.M_Rr_last)
        last[6] = str(sample.M_rr_last)
    lines.append(",".join(last))
    Path(path).write_text("\n".join(lines) + "\n")


def load_observed_csv(path: str | Path) -> ObservedSample:
    """Load an observed sample, inferring basic vs extended from the columns."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == _HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ObservationError(f"{path}: expected 7 columns, got {len(parts)}: {line!r}")
        try:
            rows.append([int(p) if p != "" else None for p in parts])
        except ValueError as exc:
            raise ObservationError(f"{path}: non-integer cell in {line!r}") from exc
    if len(rows) < 2:
        raise ObservationError(f"{path}: need at least generations 0 and 1")
    for i, row in enumerate(rows):
        if row[0] != i:
            raise ObservationError(f"{path}: generation column must run 0..N, got {row[0]} at line {i}")
        if row[1] is None:
            raise ObservationError(f"{path}: F missing at generation {i}")
    N = len(rows) - 1
    last = rows[N]
    if last[3] is None or last[4] is None:
        raise ObservationError(f"{path}: last generation must provide M_R and M_r")
    if last[2] is not None and last[2] != last[3] + last[4]:
        raise ObservationError(f"{path}: M at generation {N} must equal M_R + M_r")
    for n in range(N):
        if rows[n][2] is None:
            raise ObservationError(f"{path}: M missing at generation {n}")
    basic = BasicSample(
        F=np.array([r[1] for r in rows], dtype=np.int64),
        M=np.array([r[2] for r in rows[:N]], dtype=np.int64),
        M_R_last=last[3],
        M_r_last=last[4],
    )
    extended_cells = (rows[N - 1][3], rows[N - 1][4], last[5], last[6])
    if all(c is None for c in extended_cells):
        return basic
    if any(c is None for c in extended_cells):
        raise ObservationError(
            f"{path}: extended scheme needs M_R,M_r at generation {N - 1} and M_Rr,M_rr at {N}"
        )
    return ExtendedSample(basic, *extended_cells)
