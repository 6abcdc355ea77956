"""Run configuration: schema validation, hashing, output metadata.

One JSON file describes a run; command-line flags override individual
fields.  Validation failures name the offending field path.  The config
hash covers only the semantic sections (seed, model, abc, predictive,
truth), never worker counts or file locations, so re-running with a
different parallelism or output directory reproduces byte-identical
artifacts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .laws import LawFamily, law_from_spec, OffspringLaw
from .process import ParamVector
from .rejection import AbcConfig, PriorSpec


class ConfigError(ValueError):
    """Invalid run configuration; the message names the field path."""


def _require(mapping: dict, key: str, where: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"{where}.{key}: missing required field")
    return mapping[key]


def _as_int(value, where: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class ModelConfig:
    theta: ParamVector
    law_R: OffspringLaw
    law_r: OffspringLaw
    initial: tuple[int, int, int]
    N: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs, as parsed from one JSON file."""

    seed: int
    raw: dict
    model: Optional[ModelConfig] = None
    abc: Optional[AbcConfig] = None
    prior: PriorSpec = field(default_factory=PriorSpec)
    scheme_request: str = "auto"
    predictive: Optional[dict] = None
    truth: Optional[dict] = None
    workers: int = 1

    def config_hash(self) -> str:
        semantic = {
            key: self.raw[key]
            for key in ("seed", "model", "abc", "predictive", "truth")
            if key in self.raw
        }
        blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def meta(self) -> dict:
        return {
            "seed": self.seed,
            "config_hash": self.config_hash(),
            "tool_version": __version__,
        }


def _parse_theta(spec: dict, where: str) -> ParamVector:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a mapping")
    try:
        return ParamVector(
            alpha=_as_number(_require(spec, "alpha", where), f"{where}.alpha"),
            beta=_as_number(_require(spec, "beta", where), f"{where}.beta"),
            m_R=_as_number(_require(spec, "m_R", where), f"{where}.m_R"),
            m_r=_as_number(_require(spec, "m_r", where), f"{where}.m_r"),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_model(spec: dict) -> ModelConfig:
    if not isinstance(spec, dict):
        raise ConfigError("model: expected a mapping")
    theta = _parse_theta(_require(spec, "theta", "model"), "model.theta")
    try:
        law_R = law_from_spec(_require(spec, "law_R", "model"))
        law_r = law_from_spec(_require(spec, "law_r", "model"))
    except ValueError as exc:
        raise ConfigError(f"model.law: {exc}") from exc
    init = _require(spec, "initial", "model")
    if not isinstance(init, dict):
        raise ConfigError("model.initial: expected a mapping with F, M_R, M_r")
    initial = (
        _as_int(_require(init, "F", "model.initial"), "model.initial.F", 0),
        _as_int(_require(init, "M_R", "model.initial"), "model.initial.M_R", 0),
        _as_int(_require(init, "M_r", "model.initial"), "model.initial.M_r", 0),
    )
    N = _as_int(_require(spec, "N", "model"), "model.N", 0)
    return ModelConfig(theta=theta, law_R=law_R, law_r=law_r, initial=initial, N=N)


def _parse_abc(spec: dict, seed: int, horizon: Optional[int]) -> tuple[AbcConfig, PriorSpec, str]:
    if not isinstance(spec, dict):
        raise ConfigError("abc: expected a mapping")
    pool = _as_int(_require(spec, "pool_size", "abc"), "abc.pool_size", 1)
    quantile = _as_number(_require(spec, "tolerance_quantile", "abc"), "abc.tolerance_quantile")
    scheme = spec.get("scheme", "auto")
    if scheme not in ("auto", "basic", "extended"):
        raise ConfigError(f"abc.scheme: must be auto|basic|extended, got {scheme!r}")
    family_spec = spec.get("base_law_family", {"poisson": {}})
    try:
        family = LawFamily.from_spec(family_spec)
    except ValueError as exc:
        raise ConfigError(f"abc.base_law_family: {exc}") from exc
    m_max = _as_number(spec.get("m_max", 10.0), "abc.m_max")
    try:
        prior = PriorSpec(m_max=m_max)
    except ValueError as exc:
        raise ConfigError(f"abc.m_max: {exc}") from exc
    if "N" in spec:
        horizon_value = spec["N"]
    elif horizon is not None and horizon >= 1:
        horizon_value = horizon
    else:
        # placeholder; the CLI resolves the horizon from the observed sample
        horizon_value = 1
    try:
        abc = AbcConfig(
            pool_size=pool,
            tolerance_quantile=quantile,
            scheme=scheme if scheme != "auto" else "basic",
            horizon=_as_int(horizon_value, "abc.N", 1),
            law_family=family,
            master_seed=seed,
            force_positive_beta=bool(spec.get("force_positive_beta", False)),
            force_positive_m_r=bool(spec.get("force_positive_m_r", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"abc: {exc}") from exc
    return abc, prior, scheme


def _parse_truth(spec: dict) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError("truth: expected a mapping")
    out = {}
    for key in ("alpha", "beta", "m_R", "m_r"):
        if key in spec:
            out[key] = _as_number(spec[key], f"truth.{key}")
    if not out:
        raise ConfigError("truth: provide at least one of alpha, beta, m_R, m_r")
    return out


def _parse_predictive(spec: dict) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError("predictive: expected a mapping")
    out = {
        "horizon": _as_int(_require(spec, "horizon", "predictive"), "predictive.horizon", 0),
        "replicates": _as_int(
            _require(spec, "replicates", "predictive"), "predictive.replicates", 1
        ),
    }
    start = spec.get("start")
    if start is not None:
        if not (isinstance(start, list) and len(start) == 3):
            raise ConfigError("predictive.start: expected [F, M_R, M_r]")
        out["start"] = tuple(
            _as_int(v, f"predictive.start[{i}]", 0) for i, v in enumerate(start)
        )
    return out


def load_config(path: str | Path, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse and validate a run configuration file.

    ``overrides`` maps dotted field paths (e.g. ``"abc.pool_size"``) to
    replacement values applied before validation.
    """
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    for dotted, value in (overrides or {}).items():
        node = raw
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    seed = _as_int(_require(raw, "seed", "config"), "seed")
    model = _parse_model(raw["model"]) if "model" in raw else None
    abc = prior = None
    scheme_request = "auto"
    if "abc" in raw:
        abc, prior, scheme_request = _parse_abc(
            raw["abc"], seed, model.N if model else None
        )
    predictive = _parse_predictive(raw["predictive"]) if "predictive" in raw else None
    truth = _parse_truth(raw["truth"]) if "truth" in raw else None
    workers = _as_int(raw.get("workers", 1), "workers", 1)
    return ExperimentConfig(
        seed=seed,
        raw=raw,
        model=model,
        abc=abc,
        prior=prior or PriorSpec(),
        scheme_request=scheme_request,
        predictive=predictive,
        truth=truth,
        workers=workers,
    )
