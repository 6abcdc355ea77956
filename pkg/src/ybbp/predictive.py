"""Posterior predictive simulation of future generations.

Each accepted parameter draw seeds ``s`` independent continuations of the
process from the last observed census: the census is mated (afresh per
replicate, since the couple formation is itself unobserved), then evolved
the requested number of generations.  The output is the raw table of
final-generation censuses over all (draw, replicate) pairs; densities of
its columns approximate the predictive posterior of the next
generations' composition.
"""

from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .laws import LawFamily
from .process import GenerationState, ParamVector, initial_state, step
from .rng import STREAM_PREDICT, substream


@dataclass(frozen=True)
class PredictiveConfig:
    """Predictive-run settings: horizon ahead, replicates per draw, start census."""

    horizon: int
    replicates: int
    start: tuple[int, int, int]  # (F_N, M_R_N, M_r_N)

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("predictive horizon must be >= 0")
        if self.replicates < 1:
            raise ValueError("need at least one replicate per draw")
        if any(c < 0 for c in self.start):
            raise ValueError("start census must be >= 0")


class PredictiveTable:
    """m*s rows of (draw_index, replicate, F, M_R, M_Rr, M_rr, Z_R, Z_r)."""

    COLUMNS = ("draw_index", "replicate", "F", "M_R", "M_Rr", "M_rr", "Z_R", "Z_r")

    def __init__(self, data: np.ndarray):
        self.data = np.asarray(data, dtype=np.int64).reshape(-1, 8)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.COLUMNS.index(name)]

    @property
    def M_r(self) -> np.ndarray:
        return self.column("M_Rr") + self.column("M_rr")

    def __len__(self) -> int:
        return len(self.data)

    def to_csv(self, path: str | Path, meta: Optional[dict] = None) -> None:
        lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
        lines.append(",".join(self.COLUMNS))
        for row in self.data:
            lines.append(",".join(str(int(v)) for v in row))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "PredictiveTable":
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("draw_index,"):
                continue
            rows.append([int(x) for x in line.split(",")])
        return cls(np.array(rows, dtype=np.int64))


@dataclass
class _PredictContext:
    thetas: np.ndarray
    cfg: PredictiveConfig
    law_family: LawFamily
    master_seed: int


_CTX: Optional[_PredictContext] = None


def _init_predict_worker(ctx: _PredictContext) -> None:
    global _CTX
    _CTX = ctx


def _continue_census(
    theta: ParamVector,
    laws: tuple,
    start: tuple[int, int, int],
    horizon: int,
    rng: np.random.Generator,
) -> GenerationState:
    state = initial_state(*start, rng)
    for _ in range(horizon):
        if state.Z_R == 0 and state.Z_r == 0:
            state = GenerationState(state.n + 1, 0, 0, 0, 0, 0, 0)
        else:
            state = step(state, theta, laws[0], laws[1], rng)
    return state


def _run_draw(draw_index: int) -> np.ndarray:
    ctx = _CTX
    theta = ParamVector(*ctx.thetas[draw_index])
    laws = (ctx.law_family.make(theta.m_R), ctx.law_family.make(theta.m_r))
    rows = np.empty((ctx.cfg.replicates, 8), dtype=np.int64)
    for rep in range(ctx.cfg.replicates):
        rng = substream(ctx.master_seed, (STREAM_PREDICT, draw_index, rep))
        if ctx.cfg.horizon == 0:
            state = initial_state(*ctx.cfg.start, rng)
        else:
            state = _continue_census(theta, laws, ctx.cfg.start, ctx.cfg.horizon, rng)
        rows[rep] = (
            draw_index, rep, state.F, state.M_R, state.M_Rr, state.M_rr, state.Z_R, state.Z_r,
        )
    return rows


def predict(
    thetas,
    cfg: PredictiveConfig,
    law_family: Optional[LawFamily] = None,
    master_seed: int = 0,
    workers: int = 1,
) -> PredictiveTable:
    """Simulate the predictive table for a set of parameter draws.

    ``thetas`` is an (m, 4) array of (alpha, beta, m_R, m_r) rows, e.g.
    ``PosteriorSample.thetas``.  Rows are emitted in (draw, replicate)
    order and are reproducible for a fixed seed at any worker count.
    With horizon 0 the censuses simply replicate the start census (the
    mating stage still runs, so couple counts are populated).
    """
    thetas = np.asarray(thetas, dtype=np.float64).reshape(-1, 4)
    if len(thetas) == 0:
        raise ValueError("need at least one parameter draw")
    law_family = law_family or LawFamily()
    ctx = _PredictContext(thetas=thetas, cfg=cfg, law_family=law_family, master_seed=master_seed)
    draw_indices = list(range(len(thetas)))
    if workers <= 1 or len(draw_indices) == 1:
        _init_predict_worker(ctx)
        blocks = [_run_draw(i) for i in draw_indices]
    else:
        mp_ctx = mp.get_context("fork")
        with mp_ctx.Pool(workers, initializer=_init_predict_worker, initargs=(ctx,)) as pool:
            blocks = pool.map(_run_draw, draw_indices, chunksize=8)
    return PredictiveTable(np.concatenate(blocks, axis=0))
