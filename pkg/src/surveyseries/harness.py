"""Monte Carlo MISE studies over finite populations and sampling designs.

For each population ``i < m1`` and sample size ``n`` the harness draws ``m2``
samples, fits every requested method on the same sample, projects each fit
onto a valid density and records its integrated squared error against the
scaled superpopulation density.

Seeding: population ``i`` uses ``SeedSequence(seed, spawn_key=(0, i))`` and
replicate ``j`` at sample size ``n`` uses ``SeedSequence(seed, spawn_key=(1,
i, n, j))``. Every replicate therefore owns its stream, and the results do not
depend on how tasks are scheduled across workers. Per-replicate errors are
merged in index order and summed with ``math.fsum``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .basis import ScalingTransform, fit_scaling
from .design import (
    DesignSpec,
    EmptySampleError,
    design_from_dict,
    design_to_dict,
    design_with_n,
)
from .estimator import (
    ESTIMATORS,
    ValidDensity,
    evaluate,
    fit,
    j_cap,
    project_to_density,
    trapezoid_weights,
    unit_grid,
)
from .superpop import NAMED, Superpopulation, sample_population, true_density_on_unit

log = logging.getLogger(__name__)

# Replicate failures above this fraction abort the study.
FAILURE_BUDGET = 1e-3


class StudyFailure(RuntimeError):
    pass


class ScalingMismatch(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    superpopulation: Superpopulation
    design: DesignSpec
    N: int = 1000
    sample_sizes: tuple = (20, 40, 60, 80, 100)
    m1: int = 100
    m2: int = 10000
    grid: int = 1024
    seed: int = 0
    methods: tuple = ("truncated", "smoothed", "iid-baseline")
    workers: int = 1
    raw_mise: bool = False
    design_label: Optional[str] = None
    superpop_label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.m1 < 1 or self.m2 < 1:
            raise ValueError("m1 and m2 must be at least 1")
        if self.grid < 256:
            raise ValueError("grid must have at least 256 points")
        if not self.sample_sizes or any(n < 1 or n > self.N for n in self.sample_sizes):
            raise ValueError("sample sizes must lie in [1, N]")
        unknown = set(self.methods) - set(ESTIMATORS)
        if unknown or not self.methods:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {sorted(ESTIMATORS)}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def label(self) -> str:
        return self.design_label or self.design.name

    @classmethod
    def from_dict(cls, cfg: dict) -> "StudyConfig":
        cfg = dict(cfg)
        sp = cfg.pop("superpopulation")
        if isinstance(sp, str):
            cfg.setdefault("superpop_label", sp)
            sp = NAMED[sp]
        else:
            sp = Superpopulation.from_components(
                sp["components"], scale=sp.get("scale", "variance")
            )
        design = design_from_dict(cfg.pop("design"))
        return cls(superpopulation=sp, design=design, **cfg)

    def to_dict(self) -> dict:
        return {
            "superpopulation": {"components": self.superpopulation.to_components()},
            "superpop_label": self.superpop_label,
            "design": design_to_dict(self.design),
            "design_label": self.design_label,
            "N": self.N,
            "sample_sizes": list(self.sample_sizes),
            "m1": self.m1,
            "m2": self.m2,
            "grid": self.grid,
            "seed": self.seed,
            "methods": list(self.methods),
            "raw_mise": self.raw_mise,
        }

    def config_hash(self) -> str:
        """SHA-256 of the result-determining fields (worker count excluded)."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


# -- MISE -------------------------------------------------------------------


def ise(values, truth, G: int) -> float:
    """Trapezoid integral of squared error on the uniform ``G``-point grid."""
    err = np.asarray(values) - np.asarray(truth)
    return float(trapezoid_weights(G) @ (err * err))


def mise_mc(estimates, truth, G: Optional[int] = None) -> float:
    """Grid integral of the replicate-averaged squared error.

    ``estimates`` holds :class:`ValidDensity` objects or arrays of grid values.
    ``truth`` is the scaled true density, either a callable on [0, 1] or its
    values on the grid. All :class:`ValidDensity` inputs must share one
    scaling.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("no estimates")
    scalings = {e.base.scaling for e in estimates if isinstance(e, ValidDensity)}
    if len(scalings) > 1:
        raise ScalingMismatch("estimates were fitted on different scalings")
    if G is None:
        first = estimates[0]
        G = first.grid.size if isinstance(first, ValidDensity) else len(first)
    grid = unit_grid(G)
    f = truth(grid) if callable(truth) else np.asarray(truth, dtype=float)
    sq = np.zeros(G)
    for e in estimates:
        vals = e(grid) if isinstance(e, ValidDensity) else np.asarray(e, dtype=float)
        sq += (vals - f) ** 2
    return float(trapezoid_weights(G) @ (sq / len(estimates)))


# -- report -----------------------------------------------------------------


CSV_COLUMNS = ("design", "superpop", "method", "n", "mise", "se", "seconds")


@dataclass
class MISEReport:
    rows: list
    provenance: dict = field(default_factory=dict)

    def row(self, method: str, n: int) -> dict:
        for r in self.rows:
            if r["method"] == method and r["n"] == n:
                return r
        raise KeyError((method, n))

    def mise(self, method: str, n: int) -> float:
        return self.row(method, n)["mise"]

    def to_csv(self, include_timing: bool = True) -> str:
        cols = CSV_COLUMNS if include_timing else CSV_COLUMNS[:-1]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for r in self.rows:
            writer.writerow([_fmt(r[c]) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"provenance": self.provenance, "rows": self.rows}, indent=2)

    def write(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w", newline="") as fh:
            fh.write(self.to_csv())
        if json_path is not None:
            with open(json_path, "w") as fh:
                fh.write(self.to_json())


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


# -- execution --------------------------------------------------------------


def population_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(0, i))))


def replicate_rng(seed: int, i: int, n: int, j: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1, i, n, j)))
    )


def draw_population(cfg: StudyConfig, i: int):
    """Population ``i`` and its scaling, fitted on the population with zero margin."""
    pop = sample_population(cfg.superpopulation, cfg.N, population_rng(cfg.seed, i))
    return pop, fit_scaling(pop, margin=0.0)


def _cell(cfg: StudyConfig, i: int, n: int) -> dict:
    """Run all replicates of population ``i`` at sample size ``n``."""
    pop, scaling = draw_population(cfg, i)
    grid = unit_grid(cfg.grid)
    truth = true_density_on_unit(cfg.superpopulation, scaling, grid)
    quad = trapezoid_weights(cfg.grid)
    design = design_with_n(cfg.design, n)
    m2 = cfg.m2
    out = {
        m: {
            "ise": np.full(m2, np.nan),
            "raw_ise": np.full(m2, np.nan),
            "J": np.full(m2, -1, dtype=int),
            "cap": np.full(m2, -1, dtype=int),
            "w_min": np.inf,
            "w_max": -np.inf,
            "min_value": np.inf,
            "mass_err": 0.0,
            "seconds": 0.0,
        }
        for m in cfg.methods
    }
    failures = 0
    redraws = 0
    for j in range(m2):
        rng = replicate_rng(cfg.seed, i, n, j)
        try:
            sample = design.draw(pop, rng)
        except EmptySampleError:
            failures += 1
            continue
        redraws += sample.redraws
        for m in cfg.methods:
            acc = out[m]
            t0 = time.perf_counter()
            est = fit(m, sample, scaling)
            proj = project_to_density(est, cfg.grid)
            acc["seconds"] += time.perf_counter() - t0
            err = proj.values - truth
            acc["ise"][j] = quad @ (err * err)
            if cfg.raw_mise:
                raw_err = evaluate(est, grid) - truth
                acc["raw_ise"][j] = quad @ (raw_err * raw_err)
            acc["J"][j] = est.J
            acc["cap"][j] = j_cap(est.coeffs.n)
            if est.J:
                acc["w_min"] = min(acc["w_min"], float(est.w.min()))
                acc["w_max"] = max(acc["w_max"], float(est.w.max()))
            acc["min_value"] = min(acc["min_value"], float(proj.values.min()))
            acc["mass_err"] = max(acc["mass_err"], float(abs(quad @ proj.values - 1.0)))
    return {"i": i, "n": n, "methods": out, "failures": failures, "redraws": redraws}


def _cell_task(args):
    return _cell(*args)


def run_study(cfg: StudyConfig) -> MISEReport:
    """Run the full study and summarize MISE per (method, n)."""
    tasks = [(cfg, i, n) for n in cfg.sample_sizes for i in range(cfg.m1)]
    started = time.perf_counter()
    if cfg.workers == 1:
        results = []
        for k, t in enumerate(tasks):
            results.append(_cell_task(t))
            log.info("cell %d/%d done (n=%d, population %d)", k + 1, len(tasks), t[2], t[1])
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = []
            for k, res in enumerate(pool.map(_cell_task, tasks)):
                results.append(res)
                log.info("cell %d/%d done (n=%d, population %d)",
                         k + 1, len(tasks), res["n"], res["i"])
    results.sort(key=lambda r: (cfg.sample_sizes.index(r["n"]), r["i"]))

    rows = []
    total_failures = 0
    for n in cfg.sample_sizes:
        cells = [r for r in results if r["n"] == n]
        failures = sum(r["failures"] for r in cells)
        total_failures += failures
        if failures > FAILURE_BUDGET * cfg.m1 * cfg.m2:
            raise StudyFailure(
                f"{failures} of {cfg.m1 * cfg.m2} replicates failed at n={n}"
            )
        for m in cfg.methods:
            ise_all = np.concatenate([r["methods"][m]["ise"] for r in cells])
            ok = ise_all[np.isfinite(ise_all)]
            count = ok.size
            mise = math.fsum(ok) / count
            se = float(np.std(ok, ddof=1) / math.sqrt(count)) if count > 1 else float("nan")
            J_all = np.concatenate([r["methods"][m]["J"] for r in cells])
            cap_all = np.concatenate([r["methods"][m]["cap"] for r in cells])
            kept = J_all >= 0
            row = {
                "design": cfg.label,
                "superpop": cfg.superpop_label,
                "method": m,
                "n": n,
                "mise": mise,
                "se": se,
                "seconds": sum(r["methods"][m]["seconds"] for r in cells),
                "replicates": int(count),
                "failures": int(failures),
                "redraws": int(sum(r["redraws"] for r in cells)),
                "max_J": int(J_all[kept].max()),
                "mean_J": float(J_all[kept].mean()),
                "cap_violations": int(np.sum(J_all[kept] > cap_all[kept])),
                "w_min": min(r["methods"][m]["w_min"] for r in cells),
                "w_max": max(r["methods"][m]["w_max"] for r in cells),
                "min_value": min(r["methods"][m]["min_value"] for r in cells),
                "max_mass_error": max(r["methods"][m]["mass_err"] for r in cells),
            }
            if cfg.raw_mise:
                raw = np.concatenate([r["methods"][m]["raw_ise"] for r in cells])
                row["raw_mise"] = math.fsum(raw[np.isfinite(raw)]) / count
            for key in ("w_min", "w_max"):
                if not math.isfinite(row[key]):
                    row[key] = None
            rows.append(row)

    provenance = {
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "package_version": __version__,
        "workers": cfg.workers,
        "wall_seconds": time.perf_counter() - started,
        "total_failures": total_failures,
    }
    return MISEReport(rows, provenance)


def load_config(path) -> StudyConfig:
    with open(path) as fh:
        return StudyConfig.from_dict(json.load(fh))


def population_ise(cfg: StudyConfig, scaling: ScalingTransform, proj: ValidDensity) -> float:
    """ISE of one projected estimate against the study's scaled truth."""
    if proj.base.scaling != scaling:
        raise ScalingMismatch("estimate and truth use different scalings")
    truth = true_density_on_unit(cfg.superpopulation, scaling, proj.grid)
    return ise(proj.values, truth, proj.grid.size)
