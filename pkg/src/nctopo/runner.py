"""Batch experiments: config validation, work scheduling and result files."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .invariants import (
    CONSTANTS,
    ROUND_THRESHOLD,
    index_even_sample,
    index_odd_sample,
    local_pairing,
    x0_points,
)
from .lattice_rep import DisorderSample, Lattice
from .nc_algebra import TwistMatrix
from .spectral import (
    PRESETS,
    GapViolationError,
    Hop,
    LatticeModel,
    build_hamiltonian,
    fermi_projection,
    fermi_unitary,
)

THREADS_ENV = "NCTOPO_THREADS"
AGREEMENT_TOL = 0.1

_NUMBER_OR_PAIR = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "nctopo experiment",
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "lattice_sizes", "index_sets", "seeds"],
    "properties": {
        "model": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["preset"],
                    "properties": {
                        "preset": {"enum": sorted(PRESETS)},
                        "params": {"type": "object", "additionalProperties": {"type": "number"}},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["dimension", "fiber_dim", "hops"],
                    "properties": {
                        "dimension": {"type": "integer", "minimum": 1, "maximum": 3},
                        "fiber_dim": {"type": "integer", "minimum": 1},
                        "flux": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                        "n_channels": {"type": "integer", "minimum": 0},
                        "chiral": {"type": "boolean"},
                        "n_bands": {"type": "integer", "minimum": 1},
                        "hops": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["q", "matrix"],
                                "properties": {
                                    "q": {"type": "array", "items": {"type": "integer"}},
                                    "matrix": {"type": "array", "items": {"type": "array", "items": _NUMBER_OR_PAIR}},
                                    "channel": {"type": ["integer", "null"], "minimum": 0},
                                    "coupling": {"type": "number"},
                                },
                            },
                        },
                    },
                },
            ]
        },
        "lattice_sizes": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "mu": {"type": "number"},
        "bands": {"type": "integer", "minimum": 1},
        "index_sets": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        },
        "routes": {"enum": ["local", "index", "both"]},
        "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "x0": {
            "oneOf": [
                {"const": "center"},
                {"type": "integer", "minimum": 1},
                {"type": "array", "minItems": 1, "items": {"type": "array", "items": {"type": "number"}}},
            ]
        },
        "fedosov_power": {"type": ["integer", "null"], "minimum": 1},
        "window": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "threshold": {"type": "number", "exclusiveMinimum": 0},
        "agreement_tol": {"type": "number", "exclusiveMinimum": 0},
        "fixed_reduction": {"type": "boolean"},
        "output": {"type": "string"},
    },
    "not": {"required": ["mu", "bands"]},
}


class ConfigError(ValueError):
    pass


def _complex_matrix(rows) -> np.ndarray:
    return np.array([[complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in row] for row in rows])


def validate_config(config: dict) -> dict:
    """Check a config against the schema and its semantic rules; return it
    with defaults filled in."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    cfg = {
        "routes": "both",
        "x0": "center",
        "fedosov_power": None,
        "window": None,
        "threshold": ROUND_THRESHOLD,
        "agreement_tol": AGREEMENT_TOL,
        "fixed_reduction": True,
        **config,
    }
    model = build_model(cfg["model"])
    for I in cfg["index_sets"]:
        if len(set(I)) != len(I) or max(I) > model.d:
            raise ConfigError(f"index set {I} must hold distinct directions in 1..{model.d}")
        if len(I) % 2 == 1 and not model.chiral:
            raise ConfigError(f"odd index set {I} needs a chiral model")
    if any(len(I) % 2 for I in cfg["index_sets"]) and cfg.get("mu", 0.0) != 0.0:
        raise ConfigError("odd index sets need mu = 0")
    if "mu" not in cfg and "bands" not in cfg:
        if model.chiral:
            cfg["mu"] = 0.0
        else:
            raise ConfigError("give either mu or bands")
    if isinstance(cfg["x0"], list):
        for I in cfg["index_sets"]:
            if any(len(p) != len(I) or not all(0 < v < 1 for v in p) for p in cfg["x0"]):
                raise ConfigError("explicit x0 points need one entry in (0, 1) per direction of every index set")
    if len(set(cfg["seeds"])) != len(cfg["seeds"]):
        raise ConfigError("seeds must be distinct")
    return cfg


def build_model(model_cfg: dict) -> LatticeModel:
    if "preset" in model_cfg:
        try:
            return PRESETS[model_cfg["preset"]](**model_cfg.get("params", {}))
        except TypeError as exc:
            raise ConfigError(f"bad preset parameters: {exc}") from None
    d, N = model_cfg["dimension"], model_cfg["fiber_dim"]
    theta = np.asarray(model_cfg.get("flux", np.zeros((d, d))), dtype=float)
    if theta.shape != (d, d):
        raise ConfigError("flux must be a d x d matrix")
    hops = []
    for h in model_cfg["hops"]:
        if len(h["q"]) != d:
            raise ConfigError(f"hop {h['q']} has wrong dimension")
        hops.append(Hop(tuple(h["q"]), _complex_matrix(h["matrix"]), h.get("channel"), h.get("coupling", 0.0)))
    try:
        return LatticeModel(
            d, N, hops, TwistMatrix(theta), n_channels=model_cfg.get("n_channels", 0), chiral=model_cfg.get("chiral", False),
            n_bands=model_cfg.get("n_bands"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None


@dataclass
class SampleRow:
    L: int
    seed: int
    I: tuple
    route: str
    x0: tuple
    value: float | None
    zeta: float | None
    status: str = "ok"
    message: str = ""

    def csv_fields(self) -> list[str]:
        fmt = lambda v: "" if v is None else repr(float(v))
        return [
            str(self.L),
            str(self.seed),
            " ".join(map(str, self.I)),
            self.route,
            " ".join(repr(float(v)) for v in self.x0),
            fmt(self.value),
            fmt(self.zeta),
            self.status,
            self.message,
        ]


CSV_HEADER = ["L", "seed", "I", "route", "x0", "value", "zeta", "status", "message"]


@dataclass
class ResultRecord:
    config: dict
    rows: list[SampleRow]
    aggregates: list[dict]
    checks: list[dict]
    wall_times: dict
    version: str = __version__
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "trace_convention": "normalized fiber trace; per_site values multiply by the fiber size",
            "samples": [dict(zip(CSV_HEADER, r.csv_fields())) for r in self.rows],
            "aggregates": self.aggregates,
            "checks": self.checks,
            "failures": self.failures,
            "passed": self.passed,
            "wall_times": self.wall_times,
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rj, rc = out / "result.json", out / "samples.csv"
        rj.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        with open(rc, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())
        return rj, rc


def _work_item(model: LatticeModel, cfg: dict, L: int, seed: int) -> tuple[list[SampleRow], float]:
    t0 = time.perf_counter()
    lat = Lattice(model.d, L, "periodic")
    routes = ["local", "index"] if cfg["routes"] == "both" else [cfg["routes"]]
    rows = []
    try:
        sample = DisorderSample.generate(seed, lat.shape, max(model.n_channels, 1))
        H = build_hamiltonian(model, sample, lat)
        if "mu" in cfg:
            fd = fermi_projection(H, mu=cfg["mu"])
        else:
            fd = fermi_projection(H, bands=cfg["bands"], n_bands=model.n_bands)
        unitary = None
        N = H.internal_dim
        for I in cfg["index_sets"]:
            I = tuple(I)
            k = len(I)
            pts = x0_points(cfg["x0"], k)
            factor = CONSTANTS.index_factor(k)
            if k % 2:
                if unitary is None:
                    unitary = fermi_unitary(fd, model.chiral_structure()).dense()
                target, fiber = unitary, N // 2
            else:
                target, fiber = fd.occupied, N
            tv = L ** (model.d - k) * fiber
            for route in routes:
                if route == "local":
                    if k % 2:
                        args = [target.conj().T if i % 2 == 0 else target for i in range(k + 1)]
                    else:
                        p = fd.projector.dense()
                        args = [p] * (k + 1)
                    z = local_pairing(args, I, lat, fiber).real
                    for x0 in pts:
                        rows.append(SampleRow(L, seed, I, route, x0, factor * z, z))
                else:
                    n = cfg["fedosov_power"] or (k // 2 + 1 if k % 2 == 0 else (k + 1) // 2)
                    fn = index_odd_sample if k % 2 else index_even_sample
                    for x0 in pts:
                        v = fn(target, I, x0, lat, fiber, n, cfg["window"]) / tv
                        rows.append(SampleRow(L, seed, I, route, x0, v, v / factor))
    except (GapViolationError, ValueError, np.linalg.LinAlgError) as exc:
        rows = []
        for I in cfg["index_sets"]:
            for route in routes:
                for x0 in x0_points(cfg["x0"], len(I)):
                    rows.append(SampleRow(L, seed, tuple(I), route, x0, None, None, "failed", f"{type(exc).__name__}: {exc}"))
    return rows, time.perf_counter() - t0


def _aggregate(cfg: dict, model: LatticeModel, rows: list[SampleRow]) -> tuple[list[dict], list[dict]]:
    aggs, checks = [], []
    groups: dict = {}
    for r in rows:
        if r.status == "ok":
            groups.setdefault((r.L, r.I, r.route), []).append(r)
    fiber_of = lambda I: model.N // 2 if len(I) % 2 else model.N
    means = {}
    for (L, I, route), rs in sorted(groups.items()):
        per_seed = {}
        for r in rs:
            per_seed.setdefault(r.seed, []).append(r.value)
        seed_means = [float(np.mean(v)) for _, v in sorted(per_seed.items())]
        mean = float(np.mean(seed_means))
        per_site = mean * fiber_of(I)
        nearest = int(round(per_site))
        dev = abs(per_site - nearest)
        means[(L, I, route)] = mean
        agg = {
            "L": L,
            "I": list(I),
            "route": route,
            "mean": mean,
            "std": float(np.std(seed_means)),
            "per_seed": seed_means,
            "per_site_mean": per_site,
            "rounded": nearest if dev < cfg["threshold"] else None,
            "deviation": dev,
        }
        aggs.append(agg)
        checks.append({"name": f"integrality L={L} I={list(I)} route={route}", "value": dev,
                       "tolerance": cfg["threshold"], "passed": dev < cfg["threshold"]})
    for (L, I, route), m in sorted(means.items()):
        if route == "local" and (L, I, "index") in means:
            diff = abs(m - means[(L, I, "index")])
            checks.append({"name": f"route agreement L={L} I={list(I)}", "value": diff,
                           "tolerance": cfg["agreement_tol"], "passed": diff < cfg["agreement_tol"]})
    return aggs, checks


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run(config: dict, threads: int | None = None) -> ResultRecord:
    """Run every (L, seed) work item and assemble the record.

    Work items run on a bounded thread pool; results are ordered by
    (L, seed, index set, route, x0) regardless of completion order, so
    repeated runs give identical sample files.
    """
    t0 = time.perf_counter()
    cfg = validate_config(config)
    model = build_model(cfg["model"])
    items = [(L, s) for L in cfg["lattice_sizes"] for s in cfg["seeds"]]
    threads = threads or default_threads()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        outs = list(pool.map(lambda it: _work_item(model, cfg, *it), items))
    rows, times = [], {}
    for (L, s), (rs, dt) in zip(items, outs):
        rows.extend(rs)
        times[f"L={L} seed={s}"] = dt
    rows.sort(key=lambda r: (r.L, r.seed, cfg["index_sets"].index(list(r.I)), r.route, r.x0))
    failures = [{"L": r.L, "seed": r.seed, "message": r.message} for r in rows if r.status != "ok"]
    failures = [dict(t) for t in {tuple(sorted(f.items())) for f in failures}]
    failures.sort(key=lambda f: (f["L"], f["seed"]))
    aggs, checks = _aggregate(cfg, model, rows)
    times["total"] = time.perf_counter() - t0
    return ResultRecord(cfg, rows, aggs, checks, times, failures=failures)


def preset_catalogue() -> dict:
    import inspect

    out = {}
    for name, fn in sorted(PRESETS.items()):
        sig = inspect.signature(fn)
        out[name] = {
            "params": {k: p.default for k, p in sig.parameters.items()},
            "description": (fn.__doc__ or "").strip().splitlines()[0],
        }
    return out
