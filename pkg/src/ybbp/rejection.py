"""Tolerance rejection sampling against a fixed pool of simulated paths.

The engine draws a pool of parameter proposals from the prior, simulates
one path per proposal started from the observed initial census (with the
unobserved genotype split of the first generation's males randomized
uniformly), measures each compatible path's distance to the observation,
and accepts the proposals whose distances fall below the tolerance.  The
tolerance is not fixed up front: it is the configured empirical quantile
of the pool's finite distances, so the accepted sample size is
``round(quantile * n_compatible)``.

Priors: the sex-ratio probability is uniform on (0, 1); the reproduction
means are uniform on (0, m_max); the mutation probability and the r-line
mean get spike-and-slab mixtures whose spike weight is itself redrawn
uniformly per proposal, which makes the marginal prior probability of an
exact zero equal to 1/2.  Observation patterns that rule the zeros out
(both origin counts positive in the extended scheme) switch the spikes
off via the force-positive flags.

Incompatible paths keep their pool slot with distance +inf, so the pool
size is fixed and the quantile is taken over finite distances only; the
compatible count is reported so other conventions can be recomputed.
Results are bitwise reproducible for a fixed master seed at any worker
count: path ``i`` always consumes substream ``(seed, POOL, i)`` and the
reduction is a deterministic merge.
"""

from __future__ import annotations

import heapq
import json
import math
import multiprocessing as mp
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .laws import CountOverflowError, LawFamily
from .observation import (
    BasicSample,
    ExtendedSample,
    ObservedSample,
    SchemeVariant,
    rho,
    rho_star,
)
from .process import ParamVector, mate, reproduce
from .rng import STREAM_POOL, substream

_BLOCK_SIZE = 4096


class InsufficientCompatibilityError(RuntimeError):
    """Too few compatible paths to realize the requested quantile."""

    def __init__(self, n_compatible: int, pool_size: int, quantile: float):
        self.n_compatible = n_compatible
        self.pool_size = pool_size
        self.quantile = quantile
        needed = math.ceil(0.5 / quantile)
        super().__init__(
            f"only {n_compatible} of {pool_size} simulated paths were compatible; "
            f"the {quantile} quantile needs at least {needed}. "
            f"Increase the pool size or loosen the quantile."
        )


@dataclass(frozen=True)
class PriorSpec:
    """Prior hyperparameters; only the mean-support upper bound is tunable."""

    m_max: float = 10.0

    def __post_init__(self):
        if not (self.m_max > 0.0 and math.isfinite(self.m_max)):
            raise ValueError(f"m_max must be positive and finite, got {self.m_max}")


@dataclass(frozen=True)
class AbcConfig:
    """Rejection-run settings."""

    pool_size: int
    tolerance_quantile: float
    scheme: str                      # "basic" | "extended"
    horizon: int
    law_family: LawFamily = field(default_factory=LawFamily)
    master_seed: int = 0
    force_positive_beta: bool = False
    force_positive_m_r: bool = False

    def __post_init__(self):
        if not (0.0 < self.tolerance_quantile < 1.0):
            raise ValueError("tolerance_quantile must be in (0, 1)")
        if self.pool_size * self.tolerance_quantile < 1.0:
            raise ValueError("pool_size must be at least 1/tolerance_quantile")
        if self.scheme not in ("basic", "extended"):
            raise ValueError(f"scheme must be 'basic' or 'extended', got {self.scheme!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True)
class AcceptedDraw:
    theta: ParamVector
    distance: float
    path_index: int


class PosteriorSample:
    """Accepted parameter draws plus the realized tolerance bookkeeping."""

    def __init__(self, thetas, distances, path_indices, epsilon, pool_size, n_compatible):
        self.thetas = np.asarray(thetas, dtype=np.float64).reshape(-1, 4)
        self.distances = np.asarray(distances, dtype=np.float64)
        self.path_indices = np.asarray(path_indices, dtype=np.int64)
        self.epsilon = float(epsilon)
        self.pool_size = int(pool_size)
        self.n_compatible = int(n_compatible)

    @property
    def alpha(self) -> np.ndarray:
        return self.thetas[:, 0]

    @property
    def beta(self) -> np.ndarray:
        return self.thetas[:, 1]

    @property
    def m_R(self) -> np.ndarray:
        return self.thetas[:, 2]

    @property
    def m_r(self) -> np.ndarray:
        return self.thetas[:, 3]

    def __len__(self) -> int:
        return len(self.distances)

    def draws(self) -> Iterator[AcceptedDraw]:
        for i in range(len(self)):
            yield AcceptedDraw(
                ParamVector(*self.thetas[i]), float(self.distances[i]), int(self.path_indices[i])
            )

    def column(self, name: str) -> np.ndarray:
        idx = {"alpha": 0, "beta": 1, "m_R": 2, "m_r": 3}[name]
        return self.thetas[:, idx]

    def to_csv(self, path: str | Path, meta: Optional[dict] = None) -> None:
        lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
        lines.append("alpha,beta,m_R,m_r,distance,path_index")
        for i in range(len(self)):
            a, b, mr_, mr2 = (float(v) for v in self.thetas[i])
            lines.append(
                f"{a!r},{b!r},{mr_!r},{mr2!r},{float(self.distances[i])!r},{self.path_indices[i]}"
            )
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(
        cls, path: str | Path, epsilon=float("nan"), pool_size=0, n_compatible=0
    ) -> "PosteriorSample":
        thetas, dists, idxs = [], [], []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("alpha,"):
                continue
            parts = line.split(",")
            thetas.append([float(x) for x in parts[:4]])
            dists.append(float(parts[4]))
            idxs.append(int(parts[5]))
        return cls(thetas, dists, idxs, epsilon, pool_size, n_compatible)

    def sidecar(self, config: AbcConfig, prior: PriorSpec) -> dict:
        return {
            "pool_size": self.pool_size,
            "tolerance_quantile": config.tolerance_quantile,
            "epsilon": self.epsilon,
            "n_compatible": self.n_compatible,
            "n_accepted": len(self),
            "scheme": config.scheme,
            "horizon": config.horizon,
            "law_family": config.law_family.to_spec(),
            "force_positive_beta": config.force_positive_beta,
            "force_positive_m_r": config.force_positive_m_r,
            "m_max": prior.m_max,
            "master_seed": config.master_seed,
        }

    def write_sidecar(
        self, path: str | Path, config: AbcConfig, prior: PriorSpec, meta: Optional[dict] = None
    ) -> None:
        payload = dict(meta or {})
        payload.update(self.sidecar(config, prior))
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def draw_prior(
    prior: PriorSpec,
    rng: np.random.Generator,
    force_positive_beta: bool = False,
    force_positive_m_r: bool = False,
) -> ParamVector:
    """One proposal from the mixture prior.

    The spike weights gamma and phi are redrawn per proposal and applied
    immediately, so marginally P(beta = 0) = P(m_r = 0) = 1/2; forcing a
    parameter positive skips its spike branch entirely.
    """
    alpha = rng.random()
    while alpha == 0.0:  # the open interval excludes 0; measure-zero redraw
        alpha = rng.random()
    gamma = rng.random()
    phi = rng.random()
    if force_positive_beta:
        beta = rng.random()
    else:
        beta = 0.0 if rng.random() < gamma else rng.random()
    if force_positive_m_r:
        m_r = rng.random() * prior.m_max
    else:
        m_r = 0.0 if rng.random() < phi else rng.random() * prior.m_max
    m_R = rng.random() * prior.m_max
    return ParamVector(alpha, beta, m_R, m_r)


def init_state_from_obs(F_0: int, M_0: int, rng: np.random.Generator) -> tuple[int, int, int]:
    """Initial census for a simulated path: females copied, male genotype
    split uniform on {0..M_0}."""
    if M_0 < 0 or F_0 < 0:
        raise ValueError("initial census must be >= 0")
    M_R0 = int(rng.integers(0, M_0 + 1))
    return F_0, M_R0, M_0 - M_R0


# ---------------------------------------------------------------------------
# pool simulation
# ---------------------------------------------------------------------------


@dataclass
class _PoolContext:
    obs: ObservedSample
    config: AbcConfig
    prior: PriorSpec
    variant: Optional[SchemeVariant]
    keep_limit: int


_CTX: Optional[_PoolContext] = None


def _init_pool_worker(ctx: _PoolContext) -> None:
    global _CTX
    _CTX = ctx


def _simulate_pool_path(ctx: _PoolContext, index: int):
    """Simulate pool path ``index``; return (theta, distance) or (theta, None).

    The path aborts as soon as the R line dies before the horizon, since
    every scheme requires R-males in the last generation.  Totals past the
    count cap are treated as incompatible: such populations are unboundedly
    far from any feasible observation.
    """
    cfg = ctx.config
    obs = ctx.obs
    rng = substream(cfg.master_seed, (STREAM_POOL, index))
    theta = draw_prior(
        ctx.prior, rng, cfg.force_positive_beta, cfg.force_positive_m_r
    )
    basic_obs = obs.basic if isinstance(obs, ExtendedSample) else obs
    F0, M_R0, M_r0 = init_state_from_obs(int(basic_obs.F[0]), int(basic_obs.M[0]), rng)

    law_R = cfg.law_family.make(theta.m_R)
    law_r = cfg.law_family.make(theta.m_r)
    N = cfg.horizon

    z_R, z_r = mate(F0, M_R0, M_r0, rng)
    F = np.empty(N + 1, dtype=np.int64)
    M_R = np.empty(N + 1, dtype=np.int64)
    M_Rr = np.empty(N + 1, dtype=np.int64)
    M_rr = np.empty(N + 1, dtype=np.int64)
    F[0], M_R[0], M_Rr[0], M_rr[0] = F0, M_R0, 0, M_r0

    try:
        for n in range(1, N + 1):
            if z_R == 0:
                return theta, None  # R line extinct: M_R at the horizon must be 0
            f, m_R, m_Rr, m_rr = reproduce(z_R, z_r, theta, law_R, law_r, rng)
            F[n], M_R[n], M_Rr[n], M_rr[n] = f, m_R, m_Rr, m_rr
            if n < N:
                z_R, z_r = mate(f, m_R, m_Rr + m_rr, rng)
    except CountOverflowError:
        return theta, None

    if cfg.scheme == "basic":
        if F[N] <= 0 or M_R[N] <= 0 or M_Rr[N] + M_rr[N] <= 0:
            return theta, None
        sim = BasicSample(
            F=F, M=(M_R + M_Rr + M_rr)[:N], M_R_last=int(M_R[N]), M_r_last=int(M_Rr[N] + M_rr[N])
        )
        return theta, rho(sim, obs)

    variant = ctx.variant
    if F[N] <= 0 or M_R[N] <= 0:
        return theta, None
    if M_R[N - 1] <= 0 or M_Rr[N - 1] + M_rr[N - 1] <= 0:
        return theta, None
    if variant is SchemeVariant.BOTH_POSITIVE and (M_Rr[N] <= 0 or M_rr[N] <= 0):
        return theta, None
    if variant is SchemeVariant.RR_ZERO and (M_Rr[N] <= 0 or M_rr[N] != 0):
        return theta, None
    if variant is SchemeVariant.RMUT_ZERO and (M_Rr[N] != 0 or M_rr[N] <= 0):
        return theta, None
    sim = ExtendedSample(
        BasicSample(
            F=F, M=(M_R + M_Rr + M_rr)[:N], M_R_last=int(M_R[N]), M_r_last=int(M_Rr[N] + M_rr[N])
        ),
        M_R_prev=int(M_R[N - 1]),
        M_r_prev=int(M_Rr[N - 1] + M_rr[N - 1]),
        M_Rr_last=int(M_Rr[N]),
        M_rr_last=int(M_rr[N]),
    )
    return theta, rho_star(sim, obs, variant)


def _run_block(bounds: tuple[int, int]):
    """Worker task: simulate paths [start, stop); return the block's best.

    Returns (n_compatible, candidates) with candidates the block's
    ``keep_limit`` smallest (distance, path_index, alpha, beta, m_R, m_r)
    tuples in lexicographic order.
    """
    ctx = _CTX
    start, stop = bounds
    n_finite = 0
    cands: list[tuple] = []
    for i in range(start, stop):
        theta, dist = _simulate_pool_path(ctx, i)
        if dist is None:
            continue
        n_finite += 1
        cands.append((dist, i, theta.alpha, theta.beta, theta.m_R, theta.m_r))
    if len(cands) > ctx.keep_limit:
        cands = heapq.nsmallest(ctx.keep_limit, cands)
    else:
        cands.sort()
    return n_finite, cands


def _quantile_rank(quantile: float, n: int) -> int:
    """Order-statistic rank of the empirical quantile: round-half-up of q*n."""
    return int(math.floor(quantile * n + 0.5))


def run_rejection(
    obs: ObservedSample,
    config: AbcConfig,
    prior: Optional[PriorSpec] = None,
    workers: int = 1,
) -> PosteriorSample:
    """Run the rejection pool against an observed sample.

    Accepts the proposals whose distance is at most the
    ``tolerance_quantile`` empirical quantile of the compatible paths'
    distances, breaking ties at the threshold by lowest path index, and
    returns them in pool order.  Raises InsufficientCompatibilityError
    when the compatible count cannot support the quantile.
    """
    prior = prior or PriorSpec()
    if isinstance(obs, ExtendedSample):
        if config.scheme != "extended":
            raise ValueError("extended observation requires scheme='extended'")
        variant = obs.variant
    else:
        if config.scheme != "basic":
            raise ValueError("basic observation requires scheme='basic'")
        variant = None
    if config.horizon != obs.N:
        raise ValueError(f"config horizon {config.horizon} != observed horizon {obs.N}")

    keep_limit = _quantile_rank(config.tolerance_quantile, config.pool_size) + 1
    ctx = _PoolContext(obs=obs, config=config, prior=prior, variant=variant, keep_limit=keep_limit)
    blocks = [
        (start, min(start + _BLOCK_SIZE, config.pool_size))
        for start in range(0, config.pool_size, _BLOCK_SIZE)
    ]

    n_compatible = 0
    candidates: list[tuple] = []

    def _fold(result):
        nonlocal n_compatible, candidates
        n_finite, cands = result
        n_compatible += n_finite
        candidates.extend(cands)
        if len(candidates) > 8 * keep_limit:
            candidates = heapq.nsmallest(keep_limit, candidates)

    if workers <= 1 or len(blocks) == 1:
        _init_pool_worker(ctx)
        for block in blocks:
            _fold(_run_block(block))
    else:
        mp_ctx = mp.get_context("fork")
        with mp_ctx.Pool(workers, initializer=_init_pool_worker, initargs=(ctx,)) as pool:
            for result in pool.imap_unordered(_run_block, blocks, chunksize=1):
                _fold(result)

    k = _quantile_rank(config.tolerance_quantile, n_compatible)
    if n_compatible == 0 or k < 1:
        raise InsufficientCompatibilityError(
            n_compatible, config.pool_size, config.tolerance_quantile
        )
    candidates = heapq.nsmallest(k, candidates)
    epsilon = candidates[k - 1][0]
    accepted = sorted(candidates[:k], key=lambda c: c[1])  # pool order
    thetas = [(c[2], c[3], c[4], c[5]) for c in accepted]
    distances = [c[0] for c in accepted]
    indices = [c[1] for c in accepted]
    return PosteriorSample(thetas, distances, indices, epsilon, config.pool_size, n_compatible)
