"""Config-driven runs: data, optional surrogate, calibration, prediction, replica studies.

All writes go through a temporary file and ``os.replace`` so that a file
is either complete or absent. Outputs carry no timestamps; identical
configs and seeds give byte-identical files.
"""
from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig
from .dataio import load_csv_dataset, write_csv_dataset
from .demos import generate_data, get_demo
from .likelihood import Dataset
from .mcmc import Chain, read_chain, write_chain
from .nisp import ForwardModel
from .predict import PredictionMoments, posterior_predictive, pushed_forward, write_predictions
from .surrogate import SurrogateForwardModel, SurrogateModel
from .workflow import CalibrationResult, calibrate, param_names, predict


class StageError(RuntimeError):
    """A failure inside one workflow stage; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_via(writer, obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        writer(obj, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(record: dict, path) -> None:
    atomic_write_text(path, json.dumps(record, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- setup

@dataclass
class Problem:
    model: ForwardModel
    data: Dataset
    bounds: Optional[np.ndarray]
    lam_guess: Optional[np.ndarray]


def load_data(cfg: RunConfig, n: Optional[int] = None, seed: Optional[int] = None) -> Dataset:
    d = cfg.section("data")
    if "csv" in d:
        return load_csv_dataset(cfg.resolve(d["csv"]))
    return generate_data(d["demo"], n if n is not None else d["n"], d.get("sigma"),
                         seed if seed is not None else d.get("seed", 0))


def build_problem(cfg: RunConfig, data: Dataset, model_id: Optional[str] = None) -> Problem:
    model_id = model_id or cfg.model_demo
    guess = cfg.section("mcmc").get("lambda_guess")
    if model_id is not None:
        demo = get_demo(model_id)
        return Problem(demo.model, data, np.asarray(demo.bounds, dtype=float),
                       np.asarray(guess if guess is not None else demo.guess, dtype=float))
    sur = SurrogateModel.load(cfg.resolve(cfg.section("model")["surrogate"]))
    if sur.n_locations != data.n:
        raise ValueError(f"surrogate has {sur.n_locations} locations but the dataset has {data.n} rows")
    return Problem(SurrogateForwardModel(sur, data.xs), data, sur.ranges.copy(),
                   None if guess is None else np.asarray(guess, dtype=float))


def _calibrate(cfg: RunConfig, prob: Problem, steps: Optional[int] = None,
               seed: Optional[int] = None) -> CalibrationResult:
    spec = cfg.embedding(prob.model.dim)
    mc = cfg.mcmc()
    if seed is not None:
        mc.seed = seed
    m = cfg.section("mcmc")
    return calibrate(prob.model, prob.data, spec, cfg.likelihood(), cfg.prior(prob.bounds), cfg.nisp(),
                     steps=steps or cfg.steps, mcmc=mc, start=m.get("start"),
                     lam_guess=prob.lam_guess, optimize=m.get("optimize_start", True),
                     auto_scales=m.get("auto_scales", "scales" not in m))


def _prediction(cfg: RunConfig, result: CalibrationResult, mode: Optional[str] = None) -> PredictionMoments:
    p = cfg.section("prediction")
    mode = mode or p.get("mode", "posterior_predictive")
    xs = cfg.prediction_points()
    if xs is not None and isinstance(result.posterior.model, SurrogateForwardModel):
        raise ValueError("surrogate models predict only at their training locations; drop prediction.points/grid")
    return predict(result, xs, p.get("subsample", 500), mode)


def consistency_ratio(result: CalibrationResult, subsample: int = 500) -> float:
    """mean(sd_total) / mean|mu_pf - y| at the data locations, with data noise included."""
    post = result.posterior
    pf = pushed_forward(result.chain, post.model, post.spec, post.data.xs, post.nisp, subsample,
                        post.infer_sigma)
    sigma = None if post.infer_sigma else post.likelihood.sigma
    pp = posterior_predictive(pf, result.chain, sigma, post.spec)
    resid = float(np.mean(np.abs(pp.mu_pf - post.data.ys)))
    sd = float(np.mean(np.sqrt(pp.var_total)))
    return sd / resid if resid > 0 else float("inf")


def summary_record(cfg: RunConfig, result: CalibrationResult, pred: PredictionMoments) -> dict:
    chain = result.chain
    rec = {
        "parameters": chain.column_names(),
        "map": [float(v) for v in chain.map_point],
        "map_logpost": float(chain.map_logpost),
        "acceptance_rate": float(chain.acceptance_rate),
        "samples": int(len(chain)),
        "seed": int(chain.seed),
        "variance_averages": pred.averages(),
        "consistency_ratio": consistency_ratio(result, cfg.section("prediction").get("subsample", 500)),
    }
    if result.posterior.infer_sigma:
        rec["sigma_posterior_mean"] = float(np.mean(np.exp(chain.samples[:, -1])))
    return rec


# ---------------------------------------------------------------- runs

def run_calibration(cfg: RunConfig, out_dir, steps: Optional[int] = None,
                    seed: Optional[int] = None) -> dict:
    """Data -> (surrogate) -> MCMC -> prediction; writes chain.csv, predictions.csv, summary.json.

    Returns the summary record. Failures are raised as :class:`StageError`.
    """
    out_dir = Path(out_dir)
    try:
        data = load_data(cfg)
    except Exception as exc:
        raise StageError("data", exc) from exc
    try:
        prob = build_problem(cfg, data)
    except Exception as exc:
        raise StageError("surrogate" if cfg.model_demo is None else "model", exc) from exc
    try:
        result = _calibrate(cfg, prob, steps, seed)
    except Exception as exc:
        raise StageError("inference", exc) from exc
    try:
        pred = _prediction(cfg, result)
        rec = summary_record(cfg, result, pred)
    except Exception as exc:
        raise StageError("prediction", exc) from exc
    try:
        _atomic_via(write_chain, result.chain, out_dir / "chain.csv")
        _atomic_via(write_predictions, pred, out_dir / "predictions.csv")
        _atomic_via(write_csv_dataset, data, out_dir / "data.csv")
        write_json(rec, out_dir / "summary.json")
    except Exception as exc:
        raise StageError("output", exc) from exc
    return rec


def chain_from_file(path, names_expected: Sequence[str]) -> Chain:
    names, steps, logposts, samples = read_chain(path)
    if list(names) != list(names_expected):
        raise ValueError(f"chain columns {names} do not match the configured layout {list(names_expected)}")
    best = int(np.argmax(logposts))
    return Chain(samples, logposts, steps, samples[best].copy(), float(logposts[best]),
                 float("nan"), -1, list(names))


def run_prediction(cfg: RunConfig, chain_path, out_path, mode: Optional[str] = None) -> PredictionMoments:
    """Recompute predictions from a stored chain (MAP = best stored sample)."""
    from .inference import LogPosterior

    try:
        data = load_data(cfg)
        prob = build_problem(cfg, data)
        spec = cfg.embedding(prob.model.dim)
        lik = cfg.likelihood()
        chain = chain_from_file(chain_path, param_names(spec, lik.infer_sigma))
        post = LogPosterior(prob.model, data, spec, lik, cfg.prior(prob.bounds), cfg.nisp())
        pred = _prediction(cfg, CalibrationResult(chain, post, chain.map_point), mode)
    except Exception as exc:
        raise StageError("prediction", exc) from exc
    _atomic_via(write_predictions, pred, out_path)
    return pred


# ---------------------------------------------------------------- replicas

REPLICA_COLUMNS = ["model", "N", "me_median", "me_q25", "me_q75", "pu_median", "pu_q25", "pu_q75"]


def replica_seed(base: int, n: int, rep: int) -> int:
    """Data seed for one replica; shared across models so they see the same data."""
    return int(np.random.SeedSequence([base, n, rep]).generate_state(1)[0])


def _replica_cell(args) -> dict:
    raw, base_dir, model_id, n, rep, steps, cell_dir = args
    cfg = RunConfig(raw, Path(base_dir))
    ident = {"model": model_id, "N": n, "replica": rep}
    try:
        seed = replica_seed(cfg.section("data").get("seed", 0), n, rep)
        data = load_data(cfg, n=n, seed=seed)
        prob = build_problem(cfg, data, model_id)
        result = _calibrate(cfg, prob, steps, seed=cfg.mcmc().seed + rep)
        p = cfg.section("prediction")
        pf = pushed_forward(result.chain, prob.model, result.posterior.spec, data.xs,
                            result.posterior.nisp, p.get("subsample", 500), result.posterior.infer_sigma)
        rec = dict(ident, ok=True, me=float(pf.var_model_error.mean()),
                   pu=float(pf.var_posterior.mean()), acceptance_rate=float(result.chain.acceptance_rate))
    except Exception as exc:
        rec = dict(ident, ok=False, error=f"{type(exc).__name__}: {exc}")
    if cell_dir is not None:
        write_json(rec, Path(cell_dir) / f"{model_id}_N{n}_r{rep:03d}.json")
    return rec


@dataclass
class ReplicaTable:
    rows: list[dict]
    cells: list[dict]

    @property
    def failures(self) -> list[dict]:
        return [c for c in self.cells if not c["ok"]]

    def to_csv(self) -> str:
        lines = [",".join(REPLICA_COLUMNS)]
        for r in self.rows:
            lines.append(",".join([r["model"], str(r["N"])] + [repr(float(r[c])) for c in REPLICA_COLUMNS[2:]]))
        return "\n".join(lines) + "\n"

    def row(self, model: str, n: int) -> dict:
        for r in self.rows:
            if r["model"] == model and r["N"] == n:
                return r
        raise KeyError((model, n))


def _aggregate(cells: list[dict], models, ns) -> list[dict]:
    rows = []
    for m in models:
        for n in ns:
            ok = [c for c in cells if c["model"] == m and c["N"] == n and c["ok"]]
            row = {"model": m, "N": n}
            for key, tag in (("me", "me"), ("pu", "pu")):
                vals = np.array([c[key] for c in ok])
                if vals.size:
                    q25, med, q75 = np.percentile(vals, [25, 50, 75])
                else:
                    q25 = med = q75 = float("nan")
                row.update({f"{tag}_median": med, f"{tag}_q25": q25, f"{tag}_q75": q75})
            rows.append(row)
    return rows


def run_replicas(cfg: RunConfig, n_values: Optional[Sequence[int]] = None, replicas: Optional[int] = None,
                 models: Optional[Sequence[str]] = None, workers: Optional[int] = None,
                 steps: Optional[int] = None, out_dir=None) -> ReplicaTable:
    """Median and quartiles of spatially averaged variance components per (model, N).

    Each (model, N, replica) cell draws fresh data from the configured demo
    with its own seed and runs an independent chain. Cells run in a process
    pool when ``workers > 1``; failed cells are reported, not raised, and
    are excluded from the statistics.
    """
    r = cfg.section("replicas")
    if cfg.section("data").get("demo") is None:
        raise ConfigError(["data.demo: replica studies need a built-in data source"])
    n_values = list(n_values or r.get("n_values", [10, 100, 1000]))
    replicas = int(replicas or r.get("count", 20))
    if replicas < 3:
        raise ConfigError([f"replicas.count: need at least 3 replicas, got {replicas}"])
    models = list(models or r.get("models") or [cfg.model_demo])
    workers = int(workers or r.get("workers", 1))
    cell_dir = None if out_dir is None else Path(out_dir) / "cells"
    jobs = [(cfg.raw, str(cfg.base_dir), m, n, k, steps, cell_dir)
            for m in models for n in n_values for k in range(replicas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_replica_cell, jobs))
    else:
        cells = [_replica_cell(j) for j in jobs]
    table = ReplicaTable(_aggregate(cells, models, n_values), cells)
    if out_dir is not None:
        atomic_write_text(Path(out_dir) / "convergence.csv", table.to_csv())
        fails = ["model,N,replica,error"] + [
            f"{c['model']},{c['N']},{c['replica']},\"{c['error'].replace(chr(34), chr(39))}\""
            for c in table.failures]
        atomic_write_text(Path(out_dir) / "replica_failures.csv", "\n".join(fails) + "\n")
    return table
