"""Monte Carlo sweeps over p: configuration, sharded execution and curve output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .channel import CHUNK
from .codes import MAX_LEVEL, build_code
from .decoders import bd_logical_rate, count_errors, make_decoder, wilson_interval

SCHEMA_VERSION = 1
WORKERS_ENV = "SUBMHC_WORKERS"
CSV_COLUMNS = [
    "level", "family", "decoder", "p", "shots", "errors", "rate",
    "ci_low", "ci_high", "bd_reference", "seed", "wall_time_s",
]


class ConfigError(ValueError):
    pass


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def log_grid(start: float, stop: float, num: int) -> list[float]:
    return [float(v) for v in np.geomspace(start, stop, num)]


@dataclass
class SweepConfig:
    family: str = "subsystem"
    level: int = 2
    decoder: str = "blockmap"
    p_grid: list[float] = field(default_factory=lambda: [0.01, 0.02, 0.04])
    shots: int = 100_000
    seed: int = 0
    output: str | None = None
    workers: int | None = None
    schema_version: int = SCHEMA_VERSION

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.family not in ("subsystem", "original"):
            raise ConfigError(f"unknown family {self.family!r}")
        if not isinstance(self.level, int) or not 1 <= self.level <= MAX_LEVEL:
            raise ConfigError(f"level must be an integer in 1..{MAX_LEVEL}")
        if not self.p_grid:
            raise ConfigError("empty p grid")
        if any(not 0.0 <= p <= 0.5 for p in self.p_grid):
            raise ConfigError("p values must lie in [0, 0.5]")
        if any(b <= a for a, b in zip(self.p_grid, self.p_grid[1:])):
            raise ConfigError("p grid must be strictly increasing")
        if self.decoder != "bd" and self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        d = self.decoder
        if d == "oracle" and self.level > 2:
            raise ConfigError("the exhaustive oracle is limited to level <= 2")
        elif d == "blockmap" and (self.family != "subsystem" or self.level > 3):
            raise ConfigError("blockmap needs the subsystem family and level <= 3")
        elif d == "md" and (self.family != "original" or self.level > 3):
            raise ConfigError("md needs the original family and level <= 3")
        elif d.startswith("nn:"):
            if not Path(d[3:]).is_file():
                raise ConfigError(f"model file not found: {d[3:]}")
        elif d not in ("bd", "oracle", "blockmap", "md"):
            raise ConfigError(f"unknown decoder {d!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        if "p_range" in data:
            rng = data.pop("p_range")
            if "p_grid" in data:
                raise ConfigError("give either p_grid or p_range, not both")
            try:
                data["p_grid"] = log_grid(rng["start"], rng["stop"], int(rng["num"]))
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad p_range: {exc}") from exc
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data["p_grid"] = [float(p) for p in data.get("p_grid", [])]
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "SweepConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def result_hash(self) -> str:
        """Hash of the fields that determine the curve values."""
        d = self.to_dict()
        d.pop("output")
        d.pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


@dataclass
class CurvePoint:
    p: float
    logical_error_rate: float
    ci_low: float
    ci_high: float
    shots: int
    errors: int
    decoder: str
    level: int
    family: str
    bd_reference: float
    seed: int
    wall_time: float

    @property
    def relative_rate(self) -> float:
        """Rate relative to the bounded-distance formula at the same p."""
        return self.logical_error_rate / self.bd_reference if self.bd_reference > 0 else math.nan

    def csv_row(self) -> list[str]:
        return [
            str(self.level), self.family, self.decoder, repr(self.p), str(self.shots), str(self.errors),
            repr(self.logical_error_rate), repr(self.ci_low), repr(self.ci_high), repr(self.bd_reference),
            str(self.seed), f"{self.wall_time:.3f}",
        ]


def shard_ranges(shots: int, workers: int) -> list[tuple[int, int]]:
    """Contiguous shot ranges aligned to RNG chunks, at most ``workers`` of them."""
    chunks = -(-shots // CHUNK)
    workers = max(1, min(workers, chunks))
    bounds = [round(i * chunks / workers) for i in range(workers + 1)]
    return [(a * CHUNK, min(b * CHUNK, shots)) for a, b in zip(bounds, bounds[1:]) if a < b]


def _shard_task(args) -> int:
    family, level, decoder, p, seed, start, stop = args
    code = build_code(level, family)
    return count_errors(make_decoder(decoder, code, p), code, p, seed, start, stop)


def run_point(cfg: SweepConfig, p: float, workers: int) -> CurvePoint:
    t0 = time.perf_counter()
    bd = bd_logical_rate(cfg.level, p)
    if cfg.decoder == "bd":
        return CurvePoint(p, bd, bd, bd, 0, 0, "bd", cfg.level, cfg.family, bd, cfg.seed, time.perf_counter() - t0)
    ranges = shard_ranges(cfg.shots, workers)
    tasks = [(cfg.family, cfg.level, cfg.decoder, p, cfg.seed, a, b) for a, b in ranges]
    if len(tasks) == 1:
        errors = _shard_task(tasks[0])
    else:
        with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
            errors = sum(pool.map(_shard_task, tasks))
    lo, hi = wilson_interval(errors, cfg.shots)
    return CurvePoint(
        p, errors / cfg.shots, lo, hi, cfg.shots, errors, cfg.decoder, cfg.level, cfg.family, bd, cfg.seed,
        time.perf_counter() - t0,
    )


def run_sweep(cfg: SweepConfig, workers: int | None = None, progress=None) -> list[CurvePoint]:
    cfg.validate()
    workers = workers or cfg.workers or default_workers()
    points = []
    for p in cfg.p_grid:
        points.append(run_point(cfg, p, workers))
        if progress:
            progress(points[-1])
    return points


def curve_csv(points: list[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for pt in points:
        writer.writerow(pt.csv_row())
    return buf.getvalue()


def curve_json(points: list[CurvePoint]) -> str:
    rows = [dict(asdict(pt), relative_rate=pt.relative_rate) for pt in points]
    return json.dumps(rows, indent=2)


def metadata(cfg: SweepConfig) -> dict:
    return {
        "config": cfg.to_dict(),
        "config_hash": cfg.result_hash(),
        "seed": cfg.seed,
        "versions": {
            "submhc": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }


def write_curve(points: list[CurvePoint], cfg: SweepConfig, path) -> Path:
    """Write CSV (or JSON if the suffix is .json) plus a ``.meta.json`` sidecar."""
    path = Path(path)
    path.write_text(curve_json(points) if path.suffix == ".json" else curve_csv(points))
    path.with_name(path.name + ".meta.json").write_text(json.dumps(metadata(cfg), indent=2, sort_keys=True))
    return path


def crossing_point(p_grid, low_level_rates, high_level_rates) -> float | None:
    """First p where the higher-level curve stops beating the lower-level one.

    Interpolates log(high/low) linearly in log p between the bracketing grid
    points. Returns None if the sign never changes or a rate is zero.
    """
    pairs = list(zip(p_grid, low_level_rates, high_level_rates))
    if any(a <= 0 or b <= 0 for _, a, b in pairs):
        return None
    gaps = [math.log(b / a) for _, a, b in pairs]
    for (p0, _, _), (p1, _, _), g0, g1 in zip(pairs, pairs[1:], gaps, gaps[1:]):
        if g0 < 0 <= g1:
            t = -g0 / (g1 - g0)
            return math.exp(math.log(p0) + t * (math.log(p1) - math.log(p0)))
    return None


def loglog_slope(p_grid, errors, shots) -> tuple[float, float]:
    """Weighted least-squares slope of log(rate) vs log(p) and its standard error.

    Weights are the inverse Poisson variance of log(rate), i.e. the error counts.
    """
    x = np.log(np.asarray(p_grid, dtype=float))
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0):
        raise ValueError("every point needs at least one logical error")
    y = np.log(e / np.asarray(shots, dtype=float))
    w = e
    xm = np.sum(w * x) / w.sum()
    ym = np.sum(w * y) / w.sum()
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    return float(slope), float(1.0 / math.sqrt(sxx))
