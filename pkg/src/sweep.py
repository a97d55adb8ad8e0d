"""
Seeded Monte Carlo sweeps of the protocol over (n, alpha) grids.

Every record carries the seed it was run with; rerunning a single record
with that seed reproduces it. Records come back in grid order
(n outer, alpha middle, sample inner) whatever the worker count.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Tuple

import numpy as np
import orjson
import pandas as pd

from .bounds import xi
from .config import (
    BUILTIN_STATES, CSV_COLUMNS, DEFAULT_ALPHA, DEFAULT_DELTA, DEFAULT_NUM_U_CANDIDATES,
    DEFAULT_RANDOM_RANK,
)
from .protocol import ProtocolConfig, run_protocol
from .state_io import read_state
from .states import DensityOperator, builtin_state

log = logging.getLogger(__name__)

ERROR_COLUMN = "error"


def _split(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def _as_optional_float(value) -> Optional[float]:
    if value is None or str(value).strip().lower() in ("", "none", "auto"):
        return None
    return float(value)


@dataclass(frozen=True)
class SweepConfig:
    state: str = "random"
    n: Tuple[int, ...] = (1,)
    alpha: Tuple[float, ...] = (DEFAULT_ALPHA,)
    delta: float = DEFAULT_DELTA
    size_mode: str = "auto"
    log2_F: Optional[float] = None
    log2_M: Optional[float] = None
    num_U_candidates: int = DEFAULT_NUM_U_CANDIDATES
    samples: int = 1
    seed: int = 0
    rank: int = DEFAULT_RANDOM_RANK
    out: Optional[str] = None
    format: str = "csv"
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if not self.n or not self.alpha:
            raise ValueError("n and alpha lists must be non-empty")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.size_mode not in ("auto", "explicit"):
            raise ValueError(f"size_mode must be auto or explicit, got {self.size_mode!r}")
        if self.size_mode == "explicit" and self.log2_F is None:
            raise ValueError("size_mode = explicit needs log2_F")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"Unknown sweep keys {sorted(unknown)}. Keys allowed: {sorted(known)}")
        kw = dict(values)
        if "n" in kw:
            kw["n"] = tuple(int(v) for v in _listify(kw["n"]))
        if "alpha" in kw:
            kw["alpha"] = tuple(float(v) for v in _listify(kw["alpha"]))
        for key in ("delta",):
            if key in kw:
                kw[key] = float(kw[key])
        for key in ("num_U_candidates", "samples", "seed", "rank", "workers"):
            if key in kw:
                kw[key] = int(kw[key])
        for key in ("log2_F", "log2_M"):
            if key in kw:
                kw[key] = _as_optional_float(kw[key])
        if "timing" in kw:
            kw["timing"] = _as_bool(kw["timing"])
        return cls(**kw)

    def with_overrides(self, **overrides) -> "SweepConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _listify(value) -> List[str]:
    if isinstance(value, str):
        return _split(value)
    if isinstance(value, Iterable):
        return list(value)
    return [value]


def parse_config_text(text: str) -> dict:
    """Flat `key = value` lines; `#` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"Line {lineno}: expected key = value, got {raw!r}")
        values[key.strip()] = value.strip()
    return values


def load_sweep_config(path) -> SweepConfig:
    return SweepConfig.from_mapping(parse_config_text(Path(path).read_text(encoding="utf-8")))


def load_state(name: str, rank: int = DEFAULT_RANDOM_RANK, seed=0) -> DensityOperator:
    """A builtin name or a path to a density file."""
    if name in BUILTIN_STATES:
        return builtin_state(name, rank, seed)
    state = read_state(name)
    if not isinstance(state, DensityOperator):
        state = state.density()
    return state


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    seed: int
    n: int
    alpha: float
    delta: float
    values: Mapping[str, object] = field(default_factory=dict)
    duration_ms: Optional[float] = None
    error: Optional[str] = None

    def to_row(self) -> dict:
        row = {c: None for c in CSV_COLUMNS}
        row.update(self.values)
        row.update(run_id=self.run_id, seed=self.seed, n=self.n, alpha=self.alpha,
                   delta=self.delta, duration_ms=self.duration_ms)
        row[ERROR_COLUMN] = self.error
        return row


def record_values(run) -> dict:
    b = run.bounds
    return {
        "dimA": run.dims.dA, "dimB": run.dims.dB, "dimR": run.dims.dR, "dimE": run.dims.dE,
        "log2_F": run.sizes.log2_F, "log2_M": run.sizes.log2_M,
        "eps_emp": run.eps_emp, "eps_bound": b.eps_bound,
        "theta_emp": run.theta_emp, "theta_bound": b.theta_bound,
        "erasure_err": run.erasure_err, "marginal_err": run.marginal_err,
        "decon_err": run.decon_err,
        "chain_bound_emp": 2.0 * xi(run.eps_emp) + 2.0 * run.theta_emp,
        "chain_bound_theory": b.chain_bound_erasure,
        "rate": b.rate, "rate_formula": b.rate_formula, "cmi_target": b.cmi_target,
        "vacuous_flag": b.vacuous,
    }


def sample_seed(master_seed: int, i_n: int, i_alpha: int, i_sample: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(i_n, i_alpha, i_sample))
    return int(ss.generate_state(1)[0])


def _work_items(config: SweepConfig):
    run_id = 0
    for i_n, n in enumerate(config.n):
        for i_a, alpha in enumerate(config.alpha):
            for i_s in range(config.samples):
                yield run_id, n, alpha, sample_seed(config.seed, i_n, i_a, i_s)
                run_id += 1


def run_one(config: SweepConfig, run_id: int, n: int, alpha: float, seed: int) -> RunRecord:
    start = time.perf_counter()
    try:
        rho = load_state(config.state, config.rank, seed)
        explicit = config.size_mode == "explicit"
        run = run_protocol(ProtocolConfig(
            rho=rho, n=n, alpha=alpha, delta=config.delta,
            log2_F=config.log2_F if explicit else None,
            log2_M=config.log2_M if explicit else None,
            num_U_candidates=config.num_U_candidates, seed=seed,
        ))
        values, error = record_values(run), None
    except (ValueError, RuntimeError, OSError) as exc:
        log.warning("Run %d (n=%d, alpha=%s) failed: %s", run_id, n, alpha, exc)
        values, error = {}, f"{type(exc).__name__}: {exc}"
    duration = (time.perf_counter() - start) * 1000.0 if config.timing else None
    return RunRecord(run_id, seed, n, alpha, config.delta, values, duration, error)


def _run_item(args) -> RunRecord:
    return run_one(*args)


def run_sweep(config: SweepConfig, progress=None) -> List[RunRecord]:
    """One record per (n, alpha, sample); `progress` wraps the item iterator (e.g. tqdm)."""
    items = [(config,) + item for item in _work_items(config)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = pool.map(_run_item, items)
            if progress is not None:
                results = progress(results, total=len(items))
            return list(results)
    it = items if progress is None else progress(items, total=len(items))
    return [_run_item(item) for item in it]


def records_frame(records: Iterable[RunRecord]) -> pd.DataFrame:
    rows = [r.to_row() for r in records]
    return pd.DataFrame(rows, columns=CSV_COLUMNS + [ERROR_COLUMN])


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def records_to_json(records: Iterable[RunRecord]) -> bytes:
    rows = [{k: _json_safe(v) for k, v in r.to_row().items()} for r in records]
    return orjson.dumps(rows, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)


def write_records(records: Iterable[RunRecord], path, fmt: str = "csv") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = list(records)
    if fmt == "csv":
        records_frame(records).to_csv(path, index=False)
    elif fmt == "json":
        path.write_bytes(records_to_json(records))
    else:
        raise ValueError(f"Unknown output format {fmt!r}; expected csv or json")
    return path
