"""Experiment drivers behind the CLI.

Each driver takes an :class:`ExperimentConfig` and returns a :class:`Table`
of figure-ready rows.  Drivers are deterministic given the config.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .nand.array import FlashArray, Geometry
from .nand.gray import gray_map
from .nand.stats import triple_counts
from .pipeline import DatapathConfig, report_csv, simulate_pipeline
from .profiler.calibrate import Targets, calibrate, pattern_ranking
from .profiler.profile import default_profile, load_profile
from .randomizer.modes import Mode, Randomizer, program_block
from .ssd.config import CELL_BITS, SSDConfig, ssd_config_from_dict
from .ssd.device import BlockSample, Condition, measure_read_retry, sweep_lifetime
from .ssd.emulator import RetrySampler, run_trace
from .ssd.workload import PRESETS, READ, SECTOR, read_trace_csv, synthesize_workload, workload_spec

EXPERIMENTS = ("state-dist", "weak-patterns", "lifetime", "latency", "retry", "pipeline",
               "calibrate", "replay")

ENV_PREFIX = "STARSIM_"

DEFAULT_CONDITIONS = {
    "retry": {"qlc": [[0, 0], [500, 6], [500, 12], [1000, 6], [1000, 12]],
              "tlc": [[0, 0], [1000, 6], [1000, 12], [2000, 6], [2000, 12]]},
    "latency": {"qlc": [[1000, 12], [500, 6]], "tlc": [[2000, 12]]},
}


@dataclass
class ExperimentConfig:
    """Everything a subcommand needs; unset lists fall back to per-cell defaults."""

    experiment: str = "state-dist"
    cell_type: str = "qlc"
    profile: str | None = None
    mode: str | None = None
    seed: int = 0
    out: str = "results"
    n_blocks: int = 4
    conditions: list | None = None
    ssd: dict = field(default_factory=dict)
    step_pec: int | None = None
    max_pec: int | None = None
    months: float = 12.0
    workloads: list | None = None
    duration_us: float | None = None
    requests: int = 1500
    utilization: float = 0.05
    datapaths: list | None = None
    targets: dict | None = None
    trace: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.cell_type not in CELL_BITS:
            raise ConfigError(f"cell_type must be one of {sorted(CELL_BITS)}")
        if self.mode is not None:
            self.mode = Mode.parse(self.mode).value
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.n_blocks < 1:
            raise ConfigError("n_blocks must be >= 1")
        if self.profile is not None and not Path(self.profile).is_file():
            raise ConfigError(f"profile file not found: {self.profile}")
        if self.trace is not None and not Path(self.trace).is_file():
            raise ConfigError(f"trace file not found: {self.trace}")
        for name in self.workloads or ():
            workload_spec(name)

    @property
    def m(self):
        return CELL_BITS[self.cell_type]

    def load_profile(self):
        return load_profile(self.profile) if self.profile else default_profile(self.m)

    def ssd_config(self, mode=None):
        d = {"cell_type": self.cell_type, **self.ssd}
        if mode is not None:
            d["mode"] = mode
        return ssd_config_from_dict(d)

    def modes(self):
        """Baseline first, then the compared modes (TailCut is TLC only)."""
        if self.mode is not None:
            return ["baseline"] if self.mode == "baseline" else ["baseline", self.mode]
        out = ["baseline"]
        if self.cell_type == "tlc":
            out.append("tailcut")
        out.append("star")
        return out

    def condition_list(self, kind):
        raw = self.conditions
        if raw is None:
            raw = DEFAULT_CONDITIONS[kind][self.cell_type]
        out = []
        for item in raw:
            if len(item) != 2:
                raise ConfigError(f"condition {item!r} is not [pec, months]")
            out.append(Condition(float(item[0]), float(item[1])))
        return out

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        """Hash of everything that affects results (not the output location)."""
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce_env(name, raw):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if name in ("profile", "trace", "out", "mode", "cell_type", "experiment"):
        return str(value) if value is not None else None
    return value


def load_experiment_config(path=None, overrides=None, environ=None) -> ExperimentConfig:
    """Defaults, then the JSON file, then ``STARSIM_*`` variables, then
    explicit overrides (CLI flags); later layers win."""
    d = {}
    if path is not None:
        try:
            d.update(json.loads(Path(path).read_text()))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config top level must be an object")
    environ = os.environ if environ is None else environ
    for name in _FIELDS:
        key = ENV_PREFIX + name.upper()
        if key in environ:
            d[name] = _coerce_env(name, environ[key])
    for k, v in (overrides or {}).items():
        if v is not None:
            d[k] = v
    unknown = set(d) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**d)


@dataclass
class Table:
    header: list
    rows: list
    name: str

    def csv_text(self, cfg: ExperimentConfig):
        lines = [f"# starsim {__version__} experiment={self.name} config={cfg.digest()} seed={cfg.seed}",
                 ",".join(self.header)]
        lines += [",".join(_fmt(x) for x in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def column(self, name):
        i = self.header.index(name)
        return [row[i] for row in self.rows]


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _reduction(base, other):
    return 100.0 * (1.0 - other / base) if base else 0.0


# -- data-path statistics ------------------------------------------------------

def programmed_states(cfg: ExperimentConfig, mode, profile=None):
    """(blocks, wordlines, cells) states written under ``mode`` from the
    same random user data."""
    profile = profile or cfg.load_profile()
    ssd = cfg.ssd_config()
    gmap = gray_map(cfg.m)
    geo = Geometry(chips=1, blocks=cfg.n_blocks, wordlines=ssd.wordlines_per_block,
                   page_bytes=ssd.page_bytes, bits_per_cell=cfg.m)
    array = FlashArray(geo, gmap)
    randomizer = Randomizer(mode, gmap, profile)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x57A7E, cfg.m]))
    for b in range(cfg.n_blocks):
        array.erase(0, b)
        program_block(array, 0, b, randomizer, rng)
    return array.programmed[0]


def state_dist(cfg: ExperimentConfig) -> Table:
    profile = cfg.load_profile()
    n = 1 << cfg.m
    pops = {mode: np.bincount(programmed_states(cfg, mode, profile).ravel(), minlength=n)
            for mode in cfg.modes()}
    base = pops["baseline"] / pops["baseline"].sum()
    rows = []
    for mode, counts in pops.items():
        frac = counts / counts.sum()
        for k in range(n):
            rows.append([mode, f"P{k}", int(counts[k]), float(frac[k]), _reduction(base[k], frac[k])])
    return Table(["mode", "state", "count", "fraction", "reduction_pct"], rows, "state-dist")


def _label(triple):
    return "-".join("E" if k == 0 else f"P{k}" for k in triple)


def weak_patterns(cfg: ExperimentConfig, top=10) -> Table:
    """Occurrences of the ``top`` weakest triples (by model flip probability)
    under each mode, with reduction against baseline."""
    profile = cfg.load_profile()
    n = 1 << cfg.m
    ranking = pattern_ranking(profile, top)
    counts = {}
    for mode in cfg.modes():
        states = programmed_states(cfg, mode, profile)
        counts[mode] = sum(triple_counts(states[b], n) for b in range(states.shape[0]))
    rows = []
    for mode, c in counts.items():
        reds = []
        for rank, t in enumerate(ranking, 1):
            b, x = int(counts["baseline"][t]), int(c[t])
            red = _reduction(b, x)
            reds.append(red)
            rows.append([mode, rank, _label(t), x, red])
        rows.append([mode, "mean", f"top{top}", int(sum(c[t] for t in ranking)), float(np.mean(reds))])
    return Table(["mode", "rank", "pattern", "count", "reduction_pct"], rows, "weak-patterns")


# -- device experiments --------------------------------------------------------

LIFETIME_GRID = {"qlc": (50, 6000), "tlc": (100, 24000)}


def lifetime(cfg: ExperimentConfig) -> Table:
    profile = cfg.load_profile()
    step, top = LIFETIME_GRID[cfg.cell_type]
    step = cfg.step_pec or step
    top = cfg.max_pec or top
    reports = {}
    for mode in cfg.modes():
        ssd = cfg.ssd_config(mode)
        reports[mode] = sweep_lifetime(ssd, profile, step, top, cfg.months, cfg.n_blocks, cfg.seed)
    base = reports["baseline"].lifetime_pec
    rows = []
    for mode, rep in reports.items():
        eol = rep.block_eol_pec
        rows.append([mode, rep.lifetime_pec, int(eol.min()), int(eol.max()),
                     rep.lifetime_pec / base if base else math.inf])
    return Table(["mode", "lifetime_pec", "min_block_pec", "max_block_pec", "ratio_vs_baseline"],
                 rows, "lifetime")


def retry(cfg: ExperimentConfig) -> Table:
    profile = cfg.load_profile()
    rows = []
    for mode in cfg.modes():
        sample = BlockSample(cfg.ssd_config(mode), profile, cfg.n_blocks, cfg.seed)
        for cond in cfg.condition_list("retry"):
            st = measure_read_retry(sample.ssd, profile, cond, sample=sample)
            rows.append([mode, cond.pec, cond.months, st.mean_retries, st.mean_worst_errors])
    base = {(r[1], r[2]): r[3] for r in rows if r[0] == "baseline"}
    for r in rows:
        r.append(_reduction(base[(r[1], r[2])], r[3]))
    return Table(["mode", "pec", "months", "mean_retries", "mean_worst_errors", "reduction_pct"],
                 rows, "retry")


def retry_samplers(cfg: ExperimentConfig, cond: Condition, profile=None):
    profile = profile or cfg.load_profile()
    out = {}
    for mode in cfg.modes():
        st = measure_read_retry(cfg.ssd_config(mode), profile, cond, cfg.n_blocks, cfg.seed)
        out[mode] = st.distribution()
    return out


def workload_iops(ssd: SSDConfig, spec, utilization, mean_retries):
    """Arrival rate that keeps planes ``utilization`` busy on average."""
    from .ssd.workload import deflate
    _, fsize = deflate(spec, ssd.capacity)
    req_bytes = min(spec.io_size or fsize, fsize)
    pages = -(-req_bytes // max(ssd.page_bytes, SECTOR))
    rf = spec.read_fraction
    work = pages * (rf * (1 + mean_retries) * ssd.tR_us + (1 - rf) * ssd.tPROG_us)
    return utilization * ssd.planes * 1e6 / work


def latency(cfg: ExperimentConfig) -> Table:
    profile = cfg.load_profile()
    names = cfg.workloads or list(PRESETS)
    rows = []
    for cond in cfg.condition_list("latency"):
        dists = retry_samplers(cfg, cond, profile)
        base_mean = float(np.dot(np.arange(dists["baseline"].size), dists["baseline"]))
        for wi, name in enumerate(names):
            spec = workload_spec(name)
            ssd = cfg.ssd_config()
            iops = workload_iops(ssd, spec, cfg.utilization, base_mean)
            duration = cfg.duration_us or cfg.requests / iops * 1e6
            trace = synthesize_workload(spec, duration, cfg.seed + wi, ssd.capacity, iops)
            means = {}
            for mode, dist in dists.items():
                sampler = RetrySampler(dist, cfg.seed + wi)
                rep = run_trace(cfg.ssd_config(mode), trace, sampler)
                means[mode] = rep.mean_read_latency
                rows.append([name, cond.pec, cond.months, mode, rep.mean_read_latency,
                             rep.mean_read_service, rep.read_percentile(99), rep.retries_per_page_read,
                             int((rep.op == READ).sum())])
            for r in rows[-len(dists):]:
                r.append(_reduction(means["baseline"], r[4]))
    return Table(["workload", "pec", "months", "mode", "mean_read_us", "mean_read_service_us",
                  "p99_read_us", "retries_per_page", "reads", "reduction_pct"], rows, "latency")


def replay(cfg: ExperimentConfig) -> Table:
    if cfg.trace is None:
        raise ConfigError("replay needs a trace file")
    with open(cfg.trace) as fh:
        trace = read_trace_csv(fh)
    profile = cfg.load_profile()
    rows = []
    for cond in cfg.condition_list("latency"):
        dists = retry_samplers(cfg, cond, profile)
        for mode, dist in dists.items():
            rep = run_trace(cfg.ssd_config(mode), trace, RetrySampler(dist, cfg.seed))
            rows.append([cond.pec, cond.months, mode, rep.mean_read_latency, rep.mean_write_latency,
                         rep.read_percentile(99), rep.retries_per_page_read, rep.gc_runs])
    return Table(["pec", "months", "mode", "mean_read_us", "mean_write_us", "p99_read_us",
                  "retries_per_page", "gc_runs"], rows, "replay")


def pipeline(cfg: ExperimentConfig) -> Table:
    configs = cfg.datapaths or [{"io_width_bits": 32}, {"io_width_bits": 64}]
    rows = []
    for i, d in enumerate(configs):
        d = dict(d)
        cid = d.pop("id", f"dp{i}")
        groups = int(d.pop("groups", 64))
        if "stage_latencies" in d:
            d["stage_latencies"] = tuple(d["stage_latencies"])
        try:
            dp = DatapathConfig(**d)
        except TypeError as exc:
            raise ConfigError(f"datapath {cid}: {exc}") from None
        rows.append((cid, simulate_pipeline(dp, groups)))
    text = report_csv(rows)
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    return Table(header, [ln.split(",") for ln in lines[1:]], "pipeline")


def calibrate_cmd(cfg: ExperimentConfig):
    """Returns the residual table and the fitted profile."""
    t = dict(cfg.targets or {})
    t.setdefault("m", cfg.m)
    t.setdefault("state_ratio", 1.0)
    for key in ("prone_states", "top_patterns", "e_shape"):
        if t.get(key) is not None:
            t[key] = tuple(tuple(x) if isinstance(x, list) else x for x in t[key])
    try:
        targets = Targets(**t)
    except TypeError as exc:
        raise ConfigError(f"targets: {exc}") from None
    res = calibrate(targets)
    rows = [[name, value, achieved, f"{r:.6g}"] for name, value, achieved, r in res.residuals]
    return Table(["target", "value", "achieved", "residual"], rows, "calibrate"), res


DRIVERS = {
    "state-dist": state_dist,
    "weak-patterns": weak_patterns,
    "lifetime": lifetime,
    "latency": latency,
    "retry": retry,
    "pipeline": pipeline,
    "replay": replay,
}


def run_experiment(cfg: ExperimentConfig):
    """Run and write ``<out>/<experiment>.csv``; returns the written paths."""
    out = Path(cfg.out)
    if cfg.experiment == "calibrate":
        table, res = calibrate_cmd(cfg)
        prof = res.profile.to_dict()
        prof["provenance"] = f"calibrated config={cfg.digest()}"
        paths = [write_atomic(out / "calibrate.csv", table.csv_text(cfg)),
                 write_atomic(out / "profile.json", json.dumps(prof, indent=2) + "\n")]
        return paths, table
    table = DRIVERS[cfg.experiment](cfg)
    return [write_atomic(out / f"{cfg.experiment}.csv", table.csv_text(cfg))], table
