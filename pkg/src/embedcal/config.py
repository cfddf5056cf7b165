"""Run configuration: YAML text validated against a JSON schema.

A config is a nested mapping with sections ``data``, ``model``,
``embedding``, ``likelihood``, ``prior``, ``nisp``, ``mcmc``,
``prediction``, ``replicas`` and ``output``. Only ``data`` is required;
everything else has defaults. Parameter indices in ``embedding.embedded``
are 1-based, matching the lambda1..lambdad column names in chain files.
"""
from __future__ import annotations

import copy
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np
import yaml

from .demos import DEMOS, get_demo
from .embed import EmbeddingSpec, Variant
from .inference import NispConfig
from .likelihood import LikelihoodKind, LikelihoodSpec
from .mcmc import AmcmcConfig
from .prior import PriorSpec


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (``1e-3``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def _yaml_load(text: str) -> Any:
    return yaml.load(text, Loader=_Loader)

OUTPUT_ENV = "EMBEDCAL_OUTPUT_DIR"

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int0 = {"type": "integer", "minimum": 0}
_int1 = {"type": "integer", "minimum": 1}
_interval = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_demo_id = {"enum": sorted(DEMOS)}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "embedcal run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["data"],
    "properties": {
        "data": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "demo": _demo_id,
                "csv": {"type": "string"},
                "n": _int1,
                "sigma": {"type": "number", "minimum": 0},
                "seed": _int0,
            },
            "oneOf": [
                {"required": ["demo", "n"], "not": {"required": ["csv"]}},
                {"required": ["csv"], "not": {"required": ["demo"]}},
            ],
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "demo": _demo_id,
                "surrogate": {"type": "string"},
            },
            "not": {"required": ["demo", "surrogate"]},
        },
        "embedding": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "variant": {"enum": [v.value for v in Variant]},
                "embedded": {"type": "array", "items": _int1, "uniqueItems": True},
                "order": _int1,
                "infer_sigma": {"type": "boolean"},
            },
        },
        "likelihood": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": [k.value for k in LikelihoodKind]},
                "sigma": {"type": "number", "minimum": 0},
                "epsilon": _pos,
                "gamma": _pos,
                "samples": {"type": "integer", "minimum": 100},
                "bandwidth": {"enum": ["silverman", "scott"]},
                "nugget": {"type": "number", "minimum": 0},
                "seed": _int0,
            },
        },
        "prior": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lambda_bounds": {"type": "array", "items": _interval, "minItems": 1},
                "alpha_bounds": _interval,
                "log_sigma_bounds": _interval,
                "enforce_range": {"type": "boolean"},
                "positive_diagonal": {"type": "boolean"},
            },
        },
        "nisp": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"order": _int0, "points": _int1},
        },
        "mcmc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "steps": _int1,
                "seed": _int0,
                "adapt_start": _int0,
                "adapt_interval": _int1,
                "cov_nugget": {"type": "number", "minimum": 0},
                "burnin": _int0,
                "thin": _int1,
                "scales": {"oneOf": [_pos, {"type": "array", "items": _pos, "minItems": 1}]},
                "start": {"type": "array", "items": _num, "minItems": 1},
                "lambda_guess": {"type": "array", "items": _num, "minItems": 1},
                "optimize_start": {"type": "boolean"},
                "auto_scales": {"type": "boolean"},
            },
        },
        "prediction": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["pushed_forward", "posterior_predictive", "map"]},
                "subsample": _int1,
                "points": {"type": "array", "items": _num, "minItems": 1},
                "grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["start", "stop", "num"],
                    "properties": {"start": _num, "stop": _num, "num": _int1},
                },
            },
            "not": {"required": ["points", "grid"]},
        },
        "replicas": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "models": {"type": "array", "items": _demo_id, "minItems": 1},
                "n_values": {"type": "array", "items": _int1, "minItems": 1},
                "count": {"type": "integer", "minimum": 3},
                "workers": _int1,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}


class ConfigError(ValueError):
    """All schema and consistency violations, each prefixed by its field path."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid config:\n  " + "\n  ".join(self.problems))


def _field(path) -> str:
    return ".".join(str(p) for p in path) or "<root>"


def _schema_problems(cfg: Any) -> list[str]:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    out = []
    for err in sorted(validator.iter_errors(cfg), key=lambda e: (list(map(str, e.path)), e.message)):
        out.append(f"{_field(err.absolute_path)}: {err.message}")
    return out


def _semantic_problems(cfg: dict, base_dir: Path) -> list[str]:
    out = []
    data = cfg.get("data", {})
    model = cfg.get("model", {})
    if "csv" in data and not (base_dir / data["csv"]).exists():
        out.append(f"data.csv: file not found: {data['csv']}")
    if "surrogate" in model and not (base_dir / model["surrogate"]).exists():
        out.append(f"model.surrogate: file not found: {model['surrogate']}")
    if "csv" in data and "demo" not in model and "surrogate" not in model:
        out.append("model: a CSV dataset needs model.demo or model.surrogate")
    dim = _model_dim(cfg, base_dir)
    if dim is not None:
        emb = cfg.get("embedding", {})
        for j in emb.get("embedded", []):
            if j > dim:
                out.append(f"embedding.embedded: index {j} exceeds model dimension {dim}")
        bounds = cfg.get("prior", {}).get("lambda_bounds")
        if bounds is not None and len(bounds) != dim:
            out.append(f"prior.lambda_bounds: expected {dim} intervals, got {len(bounds)}")
        guess = cfg.get("mcmc", {}).get("lambda_guess")
        if guess is not None and len(guess) != dim:
            out.append(f"mcmc.lambda_guess: expected {dim} values, got {len(guess)}")
    for key in ("prior.lambda_bounds", "prior.alpha_bounds", "prior.log_sigma_bounds"):
        sec, name = key.split(".")
        val = cfg.get(sec, {}).get(name)
        if val is None:
            continue
        rows = val if name == "lambda_bounds" else [val]
        if any(len(r) == 2 and r[0] >= r[1] for r in rows):
            out.append(f"{key}: lower bound must be below upper bound")
    lik = cfg.get("likelihood", {})
    kind = lik.get("kind", "independent_normal")
    emb = cfg.get("embedding", {})
    infer = emb.get("infer_sigma", False)
    if infer and "sigma" in lik:
        out.append("likelihood.sigma: must be omitted when embedding.infer_sigma is true")
    if not infer and kind == "classical" and lik.get("sigma", 0.0) <= 0:
        out.append("likelihood.sigma: classical likelihood needs sigma > 0 or infer_sigma")
    if kind == "classical" and emb.get("variant", "triangular") != "classical":
        out.append("likelihood.kind: classical likelihood requires embedding.variant classical")
    grid = cfg.get("prediction", {}).get("grid")
    if grid and grid.get("start", 0) >= grid.get("stop", 1):
        out.append("prediction.grid: start must be below stop")
    return out


def _model_dim(cfg: dict, base_dir: Path) -> Optional[int]:
    model = cfg.get("model", {})
    if "demo" in model:
        return get_demo(model["demo"]).model.dim
    if "surrogate" in model:
        path = base_dir / model["surrogate"]
        if not path.exists():
            return None
        with path.open() as fh:
            for line in fh:
                if line.startswith("ranges"):
                    return int(line.split()[1])
        return None
    demo = cfg.get("data", {}).get("demo")
    return get_demo(demo).model.dim if demo else None


def validate(cfg: Any, base_dir: Path | str = ".") -> dict:
    """Check a parsed config; raise :class:`ConfigError` listing every problem."""
    problems = _schema_problems(cfg)
    if problems:
        raise ConfigError(problems)
    problems = _semantic_problems(cfg, Path(base_dir))
    if problems:
        raise ConfigError(problems)
    return cfg


def parse_override(text: str) -> tuple[list[str], Any]:
    """``section.key=value`` with the value parsed as YAML (so 1e-3, true, [1, 2] work)."""
    if "=" not in text:
        raise ConfigError([f"override '{text}': expected key=value"])
    key, raw = text.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError([f"override '{text}': empty key"])
    return path, _yaml_load(raw)


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    cfg = copy.deepcopy(cfg)
    for text in overrides:
        path, value = parse_override(text)
        node = cfg
        for p in path[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError([f"{'.'.join(path)}: cannot override inside a non-mapping"])
        node[path[-1]] = value
    return cfg


def load_config(path, overrides: list[str] = ()) -> "RunConfig":
    path = Path(path)
    try:
        raw = _yaml_load(path.read_text())
    except FileNotFoundError:
        raise ConfigError([f"<file>: config not found: {path}"]) from None
    except yaml.YAMLError as exc:
        raise ConfigError([f"<file>: YAML syntax error: {exc}"]) from None
    return RunConfig.from_dict(apply_overrides(raw or {}, list(overrides)), path.parent)


def dump_schema() -> str:
    import json
    return json.dumps(SCHEMA, indent=2, sort_keys=True)


@dataclass
class RunConfig:
    """A validated configuration plus the directory its relative paths resolve against."""

    raw: dict
    base_dir: Path

    @classmethod
    def from_dict(cls, cfg: dict, base_dir: Path | str = ".") -> "RunConfig":
        return cls(validate(cfg, base_dir), Path(base_dir))

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    def resolve(self, rel: str) -> Path:
        return self.base_dir / rel

    def with_overrides(self, overrides: list[str]) -> "RunConfig":
        return RunConfig.from_dict(apply_overrides(self.raw, overrides), self.base_dir)

    @property
    def model_demo(self) -> Optional[str]:
        m = self.section("model")
        if "surrogate" in m:
            return None
        return m.get("demo", self.section("data").get("demo"))

    def output_dir(self, flag: Optional[str] = None) -> Path:
        """Command-line flag, then the environment variable, then ``output.dir``."""
        if flag:
            return Path(flag)
        env = os.environ.get(OUTPUT_ENV)
        if env:
            return Path(env)
        return self.resolve(self.section("output").get("dir", "output"))

    def embedding(self, dim: int) -> EmbeddingSpec:
        e = self.section("embedding")
        embedded = tuple(j - 1 for j in e["embedded"]) if "embedded" in e else ()
        return EmbeddingSpec(e.get("variant", "triangular"), dim, embedded, e.get("order", 1))

    def likelihood(self) -> LikelihoodSpec:
        lk = self.section("likelihood")
        infer = self.section("embedding").get("infer_sigma", False)
        data_sigma = self.section("data").get("sigma")
        if infer:
            sigma = None
        elif "sigma" in lk:
            sigma = float(lk["sigma"])
        elif data_sigma is not None:
            sigma = float(data_sigma)
        elif self.section("data").get("demo"):
            sigma = get_demo(self.section("data")["demo"]).sigma
        else:
            sigma = 0.0
        kw = {k: lk[k] for k in ("epsilon", "gamma", "samples", "bandwidth", "nugget", "seed") if k in lk}
        return LikelihoodSpec(lk.get("kind", "independent_normal"), sigma=sigma, **kw)

    def prior(self, default_bounds=None) -> PriorSpec:
        p = self.section("prior")
        bounds = p.get("lambda_bounds", default_bounds)
        if bounds is None:
            raise ConfigError(["prior.lambda_bounds: required when the model is not a built-in demo"])
        kw = {k: p[k] for k in ("enforce_range", "positive_diagonal") if k in p}
        if "alpha_bounds" in p:
            kw["alpha_bounds"] = tuple(p["alpha_bounds"])
        if "log_sigma_bounds" in p:
            kw["log_sigma_bounds"] = tuple(p["log_sigma_bounds"])
        return PriorSpec(np.asarray(bounds, dtype=float), **kw)

    def nisp(self) -> NispConfig:
        n = self.section("nisp")
        return NispConfig(n.get("order", 1), n.get("points"))

    def mcmc(self) -> AmcmcConfig:
        m = self.section("mcmc")
        kw = {k: m[k] for k in ("seed", "adapt_start", "adapt_interval", "cov_nugget", "burnin", "thin")
              if k in m}
        if "scales" in m:
            kw["scales"] = m["scales"]
        return AmcmcConfig(**kw)

    @property
    def steps(self) -> int:
        return int(self.section("mcmc").get("steps", 20000))

    def prediction_points(self) -> Optional[np.ndarray]:
        p = self.section("prediction")
        if "points" in p:
            return np.asarray(p["points"], dtype=float)
        if "grid" in p:
            g = p["grid"]
            return np.linspace(g["start"], g["stop"], g["num"])
        return None
