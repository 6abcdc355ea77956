"""Command-line surface: simulate, infer, predict, report.

Every command takes a JSON config file; flags override config fields.
All outputs embed the seed, a hash of the semantic config sections, and
the tool version, and re-running a command with identical inputs
reproduces byte-identical files at any worker count.

Exit codes: 0 success, 2 configuration error, 3 insufficient-compatibility.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .laws import CountOverflowError
from .observation import (
    ExtendedSample,
    ObservationError,
    extract_basic,
    extract_extended,
    load_observed_csv,
    write_observed_csv,
)
from .predictive import PredictiveConfig, predict as run_predict
from .process import PathRecord, initial_state, simulate_path
from .rejection import InsufficientCompatibilityError, PosteriorSample, run_rejection
from .reporting import write_density_csv, write_report_files
from .rng import STREAM_SIMULATE, substream
from .summaries import kde

EXIT_CONFIG = 2
EXIT_INSUFFICIENT = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(config_path: str, overrides: dict) -> ExperimentConfig:
    try:
        return load_config(config_path, overrides)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))


@click.group()
@click.version_option(__version__)
def main():
    """Simulation and likelihood-free inference for a Y-linked two-sex
    branching process with mutations."""


@main.command()
@click.option("--config", "-c", "config_path", required=True, type=click.Path())
@click.option("--out", "-o", "out_dir", default=None, type=click.Path(), help="Output directory.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option(
    "--require-coexistence/--no-require-coexistence",
    default=False,
    help="Retry simulation until both alleles survive to the horizon.",
)
@click.option("--max-tries", type=int, default=1000, show_default=True)
def simulate(config_path, out_dir, seed, require_coexistence, max_tries):
    """Simulate one trajectory and write it with its observable projections."""
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    cfg = _load(config_path, overrides)
    if cfg.model is None:
        _fail(EXIT_CONFIG, "model: missing required section")
    out = Path(out_dir or "simulate_out")
    out.mkdir(parents=True, exist_ok=True)
    meta = cfg.meta()
    model = cfg.model
    rng = substream(cfg.seed, (STREAM_SIMULATE,))

    if model.N == 0:
        state = initial_state(*model.initial, rng)
        path = PathRecord([state.F], [state.M_R], [state.M_Rr], [state.M_rr],
                          [state.Z_R], [state.Z_r])
        path.to_csv(out / "path.csv", meta)
        click.echo(f"wrote path.csv (initial census only) in {out}")
        return

    path = None
    for attempt in range(1, max_tries + 1):
        path = simulate_path(model.initial, model.theta, model.law_R, model.law_r, model.N, rng)
        if not require_coexistence or extract_basic(path) is not None:
            break
    else:
        _fail(EXIT_INSUFFICIENT, f"no coexistence path in {max_tries} attempts")

    path.to_csv(out / "path.csv", meta)
    written = ["path.csv"]
    basic = extract_basic(path)
    if basic is not None:
        write_observed_csv(out / "observed_basic.csv", basic, meta)
        written.append("observed_basic.csv")
    extended = extract_extended(path)
    if extended is not None:
        write_observed_csv(out / "observed_extended.csv", extended, meta)
        written.append(f"observed_extended.csv ({extended.variant.value})")
    if basic is None:
        click.echo("note: path is not coexistent; observable projections skipped")
    click.echo(f"wrote {', '.join(written)} in {out}")


def _observed_sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


@main.command()
@click.option("--config", "-c", "config_path", required=True, type=click.Path())
@click.option("--observed", required=True, type=click.Path(), help="Observed-sample CSV.")
@click.option("--out", "-o", "out_dir", default=None, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None, help="Worker processes (output-invariant).")
@click.option("--scheme", type=click.Choice(["auto", "basic", "extended"]), default=None)
@click.option("--svg", is_flag=True, help="Also write density plots as SVG.")
def infer(config_path, observed, out_dir, seed, workers, scheme, svg):
    """Approximate the parameter posterior from an observed sample."""
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if scheme is not None:
        overrides["abc.scheme"] = scheme
    cfg = _load(config_path, overrides)
    if cfg.abc is None:
        _fail(EXIT_CONFIG, "abc: missing required section")
    observed_path = Path(observed)
    if not observed_path.exists():
        _fail(EXIT_CONFIG, f"observed sample not found: {observed_path}")
    try:
        obs = load_observed_csv(observed_path)
    except ObservationError as exc:
        _fail(EXIT_CONFIG, str(exc))

    detected = "extended" if isinstance(obs, ExtendedSample) else "basic"
    requested = cfg.scheme_request
    if requested == "auto":
        requested = detected
    elif requested == "extended" and detected == "basic":
        _fail(EXIT_CONFIG, "abc.scheme: extended scheme requested but the file is basic")
    elif requested == "basic" and detected == "extended":
        obs = obs.basic
    abc = dataclasses.replace(cfg.abc, scheme=requested, horizon=obs.N)

    n_workers = workers if workers is not None else cfg.workers
    meta = cfg.meta()
    meta["observed_sha256"] = _observed_sha(observed_path)
    try:
        post = run_rejection(obs, abc, cfg.prior, workers=n_workers)
    except InsufficientCompatibilityError as exc:
        _fail(EXIT_INSUFFICIENT, str(exc))
    out = Path(out_dir or "infer_out")
    summary = write_report_files(out, post, abc, cfg.prior, cfg.truth, meta, svg=svg)
    click.echo(
        f"accepted {len(post)} of {post.n_compatible} compatible paths "
        f"(pool {abc.pool_size}, eps {post.epsilon:.4g}); report in {out}"
    )
    means = {k: round(v["mean"], 4) for k, v in summary["parameters"].items()}
    click.echo(f"posterior means: {means}")


@main.command(name="predict")
@click.option("--config", "-c", "config_path", required=True, type=click.Path())
@click.option("--posterior", required=True, type=click.Path(), help="posterior.csv from infer.")
@click.option("--out", "-o", "out_dir", default=None, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--svg", is_flag=True)
def predict_cmd(config_path, posterior, out_dir, seed, workers, svg):
    """Posterior predictive simulation of future generations."""
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    cfg = _load(config_path, overrides)
    if cfg.predictive is None:
        _fail(EXIT_CONFIG, "predictive: missing required section")
    posterior_path = Path(posterior)
    if not posterior_path.exists():
        _fail(EXIT_CONFIG, f"posterior file not found: {posterior_path}")
    post = PosteriorSample.from_csv(posterior_path)
    if len(post) == 0:
        _fail(EXIT_CONFIG, f"posterior file has no draws: {posterior_path}")
    start = cfg.predictive.get("start")
    if start is None:
        _fail(EXIT_CONFIG, "predictive.start: missing (provide [F, M_R, M_r])")
    pred_cfg = PredictiveConfig(
        horizon=cfg.predictive["horizon"],
        replicates=cfg.predictive["replicates"],
        start=start,
    )
    law_family = cfg.abc.law_family if cfg.abc else None
    n_workers = workers if workers is not None else cfg.workers
    try:
        table = run_predict(
            post.thetas, pred_cfg, law_family, master_seed=cfg.seed, workers=n_workers
        )
    except CountOverflowError as exc:
        _fail(EXIT_CONFIG, str(exc))
    out = Path(out_dir or "predict_out")
    out.mkdir(parents=True, exist_ok=True)
    meta = cfg.meta()
    table.to_csv(out / "predictive.csv", meta)
    sidecar = dict(meta)
    sidecar.update(
        {
            "horizon": pred_cfg.horizon,
            "replicates": pred_cfg.replicates,
            "start": list(pred_cfg.start),
            "n_draws": int(len(post)),
        }
    )
    (out / "predictive_meta.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    for name in ("F", "M_R", "M_Rr", "M_rr"):
        values = table.column(name).astype(np.float64)
        est = kde(values)
        write_density_csv(out / f"density_{name}.csv", est, meta)
        if svg:
            from .summaries import hpd
            from .svgplot import density_svg

            density_svg(out / f"density_{name}.svg", name, est, hpd(values, 0.95), meta=meta)
    click.echo(f"wrote {len(table)} predictive rows in {out}")


@main.command()
@click.argument("run_dirs", nargs=-1, required=True, type=click.Path())
@click.option("--out", "-o", "out_path", default="report", type=click.Path(),
              help="Output basename; writes <out>.json and <out>.csv.")
def report(run_dirs, out_path):
    """Consolidate several inference runs into one comparison table."""
    rows = []
    reference = None
    for run_dir in run_dirs:
        d = Path(run_dir)
        summary_path = d / "summary.json"
        if not summary_path.exists():
            _fail(EXIT_CONFIG, f"no summary.json in {d}")
        summary = json.loads(summary_path.read_text())
        abc = summary.get("abc", {})
        fingerprint = {
            "scheme": abc.get("scheme"),
            "horizon": abc.get("horizon"),
            "m_max": abc.get("m_max"),
            "observed_sha256": summary.get("meta", {}).get("observed_sha256"),
        }
        if reference is None:
            reference = fingerprint
        else:
            mismatched = [k for k in fingerprint if fingerprint[k] != reference[k]]
            if mismatched:
                _fail(
                    EXIT_CONFIG,
                    f"run {d} does not match the first run on: {', '.join(mismatched)}",
                )
        family = abc.get("law_family", {})
        kind = next(iter(family), "?")
        label = kind if kind != "negbin" else f"negbin k={family['negbin'].get('k'):g}"
        row = {"run": d.name, "base_distribution": label}
        for name, block in summary["parameters"].items():
            row[f"{name}_mean"] = block["mean"]
            hpd_list = block.get("hpd") or block.get("hpd_positive_part") or []
            if hpd_list:
                row[f"{name}_hpd_lo"] = hpd_list[0][0]
                row[f"{name}_hpd_hi"] = hpd_list[-1][1]
        rows.append(row)

    out_json = Path(f"{out_path}.json")
    payload = {"meta": {"tool_version": __version__, "fingerprint": reference}, "runs": rows}
    out_json.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    lines = [f"# tool_version: {__version__}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in columns))
    Path(f"{out_path}.csv").write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {out_json} and {out_path}.csv ({len(rows)} runs)")


if __name__ == "__main__":
    main()
