"""Posterior report assembly: summary JSON, density grids, group files.

The summary carries, per parameter: posterior mean, 95% HPD set, the
relative error against a supplied truth (or its zero-truth surrogate),
and, for the spike-and-slab parameters, the posterior spike probability
with the Bayes factor for the zero null.  Densities of spiked parameters
describe the positive part only; the spike is reported alongside as a
probability, never smoothed into the curve.  Derived growth-rate
posteriors are summarized the same way.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .rejection import AbcConfig, PosteriorSample, PriorSpec
from .summaries import (
    PointMass,
    bayes_factor_zero,
    hpd,
    kde,
    point_estimate,
    rate_posteriors,
    rmse,
    rmse_zero,
    spike_probability,
)

PARAM_NAMES = ("alpha", "beta", "m_R", "m_r")
HPD_LEVEL = 0.95


def _json_safe(x: float):
    if x is None or math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _density_or_none(values: np.ndarray):
    if len(values) < 2:
        return None
    return kde(values)


def _hpd_list(values: np.ndarray) -> list[list[float]]:
    return [[lo, hi] for lo, hi in hpd(values, HPD_LEVEL).intervals]


def summarize_parameter(
    values: np.ndarray,
    truth: Optional[float] = None,
    spiked: bool = False,
) -> dict:
    """Summary block for one parameter's accepted draws."""
    out: dict = {"mean": point_estimate(values), "n": int(len(values))}
    positive = values[values > 0.0]
    if spiked:
        p = spike_probability(values)
        out["spike_probability"] = p
        K = bayes_factor_zero(p)
        out["bayes_factor"] = _json_safe(K)
        if p in (0.0, 1.0):
            out["bayes_factor_flag"] = "degenerate"
        out["hpd_positive_part"] = _hpd_list(positive) if len(positive) >= 2 else None
    else:
        out["hpd"] = _hpd_list(values)
    if truth is not None:
        if truth != 0.0:
            out["rmse"] = rmse(values, truth)
        else:
            surrogate = rmse_zero(values)
            out["rmse_zero_surrogate"] = {
                "surrogate": surrogate.surrogate,
                "mean_square": surrogate.mean_square,
                "label": surrogate.label,
            }
    return out


def build_summary(
    post: PosteriorSample,
    config: AbcConfig,
    prior: PriorSpec,
    truth: Optional[dict] = None,
    meta: Optional[dict] = None,
) -> dict:
    truth = truth or {}
    spiked = {
        "alpha": False,
        "beta": not config.force_positive_beta,
        "m_R": False,
        "m_r": not config.force_positive_m_r,
    }
    parameters = {
        name: summarize_parameter(post.column(name), truth.get(name), spiked[name])
        for name in PARAM_NAMES
    }
    rate_R, rate_r = rate_posteriors(post.alpha, post.beta, post.m_R, post.m_r)
    rates = {
        "rate_R": {"mean": point_estimate(rate_R), "hpd": _hpd_list(rate_R)},
        "rate_r": {"mean": point_estimate(rate_r), "hpd": _hpd_list(rate_r)},
    }
    return {
        "meta": dict(meta or {}),
        "abc": post.sidecar(config, prior),
        "parameters": parameters,
        "rates": rates,
    }


def write_density_csv(path: str | Path, estimate, meta: Optional[dict] = None) -> None:
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    if isinstance(estimate, PointMass):
        lines.append(f"# point_mass: {estimate.location!r}")
        lines.append("grid,density")
    else:
        lines.append(f"# bandwidth: {estimate.bandwidth!r}")
        lines.append("grid,density")
        for g, d in zip(estimate.grid, estimate.density):
            lines.append(f"{float(g)!r},{float(d)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _write_theta_csv(path: Path, thetas: np.ndarray, meta: dict) -> None:
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append("alpha,beta,m_R,m_r")
    for row in thetas:
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_report_files(
    out_dir: str | Path,
    post: PosteriorSample,
    config: AbcConfig,
    prior: PriorSpec,
    truth: Optional[dict] = None,
    meta: Optional[dict] = None,
    svg: bool = False,
) -> dict:
    """Write the full report tree for one inference run; returns the summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = dict(meta or {})
    summary = build_summary(post, config, prior, truth, meta)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    post.to_csv(out / "posterior.csv", meta)
    post.write_sidecar(out / "posterior_meta.json", config, prior, meta)

    rate_R, rate_r = rate_posteriors(post.alpha, post.beta, post.m_R, post.m_r)
    rate_lines = [f"# {k}: {v}" for k, v in meta.items()]
    rate_lines.append("rate_R,rate_r")
    rate_lines.extend(f"{float(a)!r},{float(b)!r}" for a, b in zip(rate_R, rate_r))
    (out / "rates.csv").write_text("\n".join(rate_lines) + "\n")

    density_targets = {
        "alpha": post.alpha,
        "beta": post.beta[post.beta > 0] if not config.force_positive_beta else post.beta,
        "m_R": post.m_R,
        "m_r": post.m_r[post.m_r > 0] if not config.force_positive_m_r else post.m_r,
        "rate_R": rate_R,
        "rate_r": rate_r,
    }
    truth_map = dict(truth or {})
    for name, values in density_targets.items():
        est = _density_or_none(np.asarray(values, dtype=np.float64))
        if est is None:
            continue
        write_density_csv(out / f"density_{name}.csv", est, meta)
        if svg:
            from .svgplot import density_svg

            level = hpd(np.asarray(values, dtype=np.float64), HPD_LEVEL)
            density_svg(
                out / f"density_{name}.svg", name, est, level, truth_map.get(name), meta
            )

    # spike-group partitions for external group comparison
    groups = []
    if not config.force_positive_m_r:
        groups.append(("m_r", post.m_r))
    if not config.force_positive_beta:
        groups.append(("beta", post.beta))
    for name, values in groups:
        zero_mask = values == 0.0
        if zero_mask.any() and (~zero_mask).any():
            gdir = out / "groups"
            gdir.mkdir(exist_ok=True)
            _write_theta_csv(gdir / f"{name}_zero.csv", post.thetas[zero_mask], meta)
            _write_theta_csv(gdir / f"{name}_positive.csv", post.thetas[~zero_mask], meta)
    return summary
