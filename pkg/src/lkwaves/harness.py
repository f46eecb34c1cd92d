"""Config-driven ensembles: sample, measure, project, persist, summarise."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .chaos import boundary_second_chaos, epc_second_chaos, expected_lkc, integral_hermite, pathwise_error
from .coefficients import Manifold, reduced_scale, reduction_constants
from .errors import InvalidConfig, IoFailure, MalformedRecord, NotRepresentable
from .geometry import estimate_lkc
from .lattice import enumerate_frequencies
from .sampler import WaveSpec, default_resolution, sample

WORKERS_ENV = "LKWAVES_WORKERS"
RECORDS_FILE = "records.csv"
SUMMARY_FILE = "summary.json"
CONFIG_FILE = "config.json"
RUN_FILE = "run.json"

RECORD_COLUMNS = (
    "manifold", "n", "replicate", "seed", "level",
    "L0", "L1", "L2", "estimator", "resolution",
    "int_H2", "chaos2_L0", "chaos2_L1", "chaos2_L2",
    "deriv2_L0", "deriv2_L1",
)
FLOAT_COLUMNS = RECORD_COLUMNS[4:8] + RECORD_COLUMNS[10:]
STAT_COLUMNS = ("L0", "L1", "L2", "int_H2")
CORRELATED = (("L0", "chaos2_L0"), ("L1", "chaos2_L1"), ("L2", "chaos2_L2"))
PATHWISE_TOL = 1e-8


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ExperimentConfig:
    manifold: str
    energies: list
    levels: list
    replicates: int
    seed: int = 0
    points_per_wavelength: float = 8.0
    resolution: object = None
    boundary_estimator: str = "marching"
    eps: float = 0.05
    output_dir: str = "results"
    workers: object = None
    pathwise_tol: object = None
    min_correlation: float = 0.9

    _TYPES = {
        "manifold": (str,),
        "energies": (list,),
        "levels": (list,),
        "replicates": (int,),
        "seed": (int,),
        "points_per_wavelength": (int, float),
        "resolution": (type(None), int, list),
        "boundary_estimator": (str,),
        "eps": (int, float),
        "output_dir": (str,),
        "workers": (type(None), int),
        "pathwise_tol": (type(None), int, float),
        "min_correlation": (int, float),
    }

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name, types in self._TYPES.items():
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, types):
                raise InvalidConfig(f"{name}: expected {'/'.join(t.__name__ for t in types)}, got {value!r}")
        try:
            manifold = Manifold(self.manifold)
        except ValueError:
            raise InvalidConfig(f"unknown manifold {self.manifold!r}") from None
        if self.replicates < 1:
            raise InvalidConfig("replicates must be >= 1")
        if not self.energies or not self.levels:
            raise InvalidConfig("energies and levels must be non-empty")
        if self.boundary_estimator not in ("marching", "eps"):
            raise InvalidConfig(f"unknown boundary estimator {self.boundary_estimator!r}")
        if self.eps <= 0:
            raise InvalidConfig("eps must be positive")
        for u in self.levels:
            if isinstance(u, bool) or not isinstance(u, (int, float)):
                raise InvalidConfig(f"level {u!r} is not a number")
        for n in self.energies:
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise InvalidConfig(f"energy index {n!r} is not a positive integer")
            if manifold is Manifold.TORUS:
                try:
                    enumerate_frequencies(n)
                except NotRepresentable as exc:
                    raise InvalidConfig(f"NotRepresentable: {exc}") from exc
            elif n < 2:
                raise InvalidConfig("sphere energy indices must be >= 2")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfig(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("config must be a flat JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def resolution_for(self, n: int):
        if self.resolution is not None:
            return tuple(self.resolution) if isinstance(self.resolution, list) else self.resolution
        return default_resolution(self.manifold, n, self.points_per_wavelength)


@dataclass
class EnsembleResult:
    config: ExperimentConfig
    records: list[dict]
    summary: dict
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------- per replicate


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def replicate_records(cfg: ExperimentConfig, n: int, r: int) -> list[dict]:
    """All per-level records for one realisation."""
    manifold = Manifold(cfg.manifold)
    grid = sample(WaveSpec(manifold, n, cfg.seed, r), cfg.resolution_for(n))
    eps = cfg.eps if cfg.boundary_estimator == "eps" else None
    epc_derivative = manifold is Manifold.TORUS and not enumerate_frequencies(n).epc_degenerate
    h2 = integral_hermite(grid, 2)
    rows = []
    for u in cfg.levels:
        u = float(u)
        est = estimate_lkc(grid, u, boundary=cfg.boundary_estimator, eps=eps)
        rc = reduction_constants(u)
        row = {"manifold": manifold.value, "n": n, "replicate": r, "seed": cfg.seed, **est.as_row()}
        row["int_H2"] = h2
        row["chaos2_L0"] = rc.c0 * reduced_scale(0, grid.eigenvalue) * h2
        row["chaos2_L1"] = rc.c1 * reduced_scale(1, grid.eigenvalue) * h2
        row["chaos2_L2"] = rc.c2 * h2
        row["deriv2_L1"] = boundary_second_chaos(grid, u).value
        row["deriv2_L0"] = epc_second_chaos(grid, u).value if epc_derivative else None
        rows.append(row)
    return rows


def _job(args):
    cfg_dict, n, r = args
    return n, r, replicate_records(ExperimentConfig.from_dict(cfg_dict), n, r)


# ---------------------------------------------------------------- persistence


def _parse_record(raw: dict, lineno: int) -> dict:
    try:
        rec = {
            "manifold": Manifold(raw["manifold"]).value,
            "n": int(raw["n"]),
            "replicate": int(raw["replicate"]),
            "seed": int(raw["seed"]),
            "estimator": raw["estimator"],
            "resolution": raw["resolution"],
        }
        for col in FLOAT_COLUMNS:
            rec[col] = float(raw[col]) if raw[col] != "" else None
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(f"line {lineno}: {exc}") from exc
    return rec


def read_records(path) -> list[dict]:
    path = Path(path)
    if path.is_dir():
        path = path / RECORDS_FILE
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != RECORD_COLUMNS:
                raise MalformedRecord(f"{path}: missing or unexpected header")
            records = [_parse_record(raw, i + 2) for i, raw in enumerate(reader)]
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if not records:
        raise MalformedRecord(f"{path}: no records")
    return records


def _completed_prefix(path: Path, cfg: ExperimentConfig) -> list[tuple[int, int]]:
    """Replicates already fully written; truncates a torn tail in place."""
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines(keepends=True)
    if not lines or lines[0].rstrip("\r\n") != ",".join(RECORD_COLUMNS):
        raise MalformedRecord(f"{path}: missing or unexpected header")
    per = len(cfg.levels)
    body = lines[1:]
    # only whole, newline-terminated replicate blocks survive
    while body and not body[-1].endswith("\n"):
        body.pop()
    keep = (len(body) // per) * per
    body = body[:keep]
    done = []
    for i in range(0, keep, per):
        first = next(csv.reader([body[i]]))
        done.append((int(first[1]), int(first[2])))
    with open(path, "w", newline="") as fh:
        fh.writelines(lines[:1] + body)
    return done


def run_ensemble(
    cfg: ExperimentConfig,
    workers: int | None = None,
    resume: bool = True,
    stop_after: int | None = None,
) -> EnsembleResult:
    """Run every (n, replicate) of the config, appending records in a fixed order.

    ``stop_after`` halts after that many newly written replicates, which lets
    callers exercise interruption and resumption.
    """
    start = time.time()
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        cfg_path = out / CONFIG_FILE
        if cfg_path.exists() and resume:
            previous = ExperimentConfig.load(cfg_path)
            if previous != cfg:
                raise InvalidConfig(f"{cfg_path} holds a different configuration; use a new output_dir")
        cfg_path.write_text(cfg.dumps())
        rec_path = out / RECORDS_FILE
        if not resume and rec_path.exists():
            rec_path.unlink()
        done = set(_completed_prefix(rec_path, cfg))
        if not rec_path.exists():
            rec_path.write_text(",".join(RECORD_COLUMNS) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc

    todo = [(n, r) for n in cfg.energies for r in range(cfg.replicates) if (n, r) not in done]
    if stop_after is not None:
        todo = todo[:stop_after]
    workers = workers or cfg.workers or default_workers()
    jobs = [(cfg.to_dict(), n, r) for n, r in todo]
    try:
        with open(rec_path, "a", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if workers > 1 and len(jobs) > 1:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    results = pool.map(_job, jobs)
                    for _, _, rows in results:
                        writer.writerows([[_fmt(row[c]) for c in RECORD_COLUMNS] for row in rows])
                        fh.flush()
            else:
                for job in jobs:
                    _, _, rows = _job(job)
                    writer.writerows([[_fmt(row[c]) for c in RECORD_COLUMNS] for row in rows])
                    fh.flush()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc

    records = read_records(rec_path)
    summary = summarize_records(records)
    metadata = {
        "wall_clock_seconds": time.time() - start,
        "replicates_written": len(todo),
        "workers": workers,
    }
    try:
        (out / SUMMARY_FILE).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out / RUN_FILE).write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return EnsembleResult(cfg, records, summary, metadata)


# ---------------------------------------------------------------- summaries


def _mean(xs) -> float:
    return math.fsum(xs) / len(xs)


def _var(xs, mean) -> float:
    if len(xs) < 2:
        return 0.0
    return math.fsum((x - mean) ** 2 for x in xs) / (len(xs) - 1)


def _corr(xs, ys) -> float | None:
    if len(xs) < 2:
        return None
    mx, my = _mean(xs), _mean(ys)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    return sxy / math.sqrt(sxx * syy)


def summarize_records(records: list[dict]) -> dict:
    """Per (n, level) statistics; invariant under any reordering of the records."""
    groups: dict[tuple[int, float], list[dict]] = {}
    manifolds = {r["manifold"] for r in records}
    if len(manifolds) != 1:
        raise MalformedRecord(f"records mix manifolds {sorted(manifolds)}")
    manifold = manifolds.pop()
    for rec in records:
        groups.setdefault((rec["n"], rec["level"]), []).append(rec)
    tol = PATHWISE_TOL if manifold == "torus" else 1e-6
    table = []
    for (n, u) in sorted(groups):
        recs = groups[(n, u)]
        entry = {"n": n, "level": u, "count": len(recs)}
        expected = expected_lkc(manifold, n, u)
        for col in STAT_COLUMNS:
            xs = [r[col] for r in recs]
            m = _mean(xs)
            v = _var(xs, m)
            entry[f"mean_{col}"] = m
            entry[f"var_{col}"] = v
        for i, col in enumerate(("L0", "L1", "L2")):
            se = math.sqrt(entry[f"var_{col}"] / len(recs))
            entry[f"expected_{col}"] = expected[i]
            entry[f"z_{col}"] = (entry[f"mean_{col}"] - expected[i]) / se if se > 0 else None
        for geo, ch in CORRELATED:
            entry[f"corr_{geo}_{ch}"] = _corr([r[geo] for r in recs], [r[ch] for r in recs])
        for k, deriv, red in ((1, "deriv2_L1", "chaos2_L1"), (0, "deriv2_L0", "chaos2_L0")):
            errs = [pathwise_error(r[deriv], r[red]) for r in recs if r[deriv] is not None]
            entry[f"pathwise_max_err_k{k}"] = max(errs) if errs else None
            entry[f"pathwise_pass_k{k}"] = (max(errs) <= tol) if errs else None
        table.append(entry)
    flags = [e[f"pathwise_pass_k{k}"] for e in table for k in (0, 1)]
    return {
        "manifold": manifold,
        "records": len(records),
        "groups": table,
        "pathwise_pass": all(f is not False for f in flags),
    }


def summarize(path) -> dict:
    return summarize_records(read_records(path))


PLOT_TABLES = {
    "variance_vs_n.csv": ("n", "level", "count", "var_L0", "var_L1", "var_L2", "var_int_H2"),
    "correlation_vs_n.csv": ("n", "level", "count", "corr_L0_chaos2_L0", "corr_L1_chaos2_L1", "corr_L2_chaos2_L2"),
    "means_vs_u.csv": (
        "level", "n", "count", "mean_L0", "expected_L0", "mean_L1", "expected_L1", "mean_L2", "expected_L2",
    ),
}


def emit_plotdata(path, out_dir=None) -> dict[str, Path]:
    """Write plot-ready CSV tables, one row per (n, level), from stored records."""
    path = Path(path)
    summary = summarize(path)
    out = Path(out_dir) if out_dir is not None else (path if path.is_dir() else path.parent) / "plotdata"
    written = {}
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, cols in PLOT_TABLES.items():
            rows = summary["groups"]
            if name == "means_vs_u.csv":
                rows = sorted(rows, key=lambda e: (e["n"], e["level"]))
            with open(out / name, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(cols)
                for e in rows:
                    writer.writerow([_fmt(e[c]) for c in cols])
            written[name] = out / name
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return written


def records_array(records: list[dict], column: str) -> np.ndarray:
    return np.array([r[column] for r in records], dtype=float)
