"""Monte Carlo runner, parameter sweeps and file output.

Every random quantity is drawn from a substream addressed by the master
seed and the realization index, so all schemes at one (grid point,
realization) see identical fading, and results do not depend on how the
work is scheduled across processes.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ao import ALL_SCHEMES, AOConfig, SchemeKind, run_ao, run_benchmark
from .channel import PLACEMENT_STREAM, GainPattern, realize_channels, substream
from .rates import array_gain_probe
from .sca import SCAConfig
from .scenario import Scenario, dbm_to_watt, default_scenario

__all__ = [
    "ExperimentConfig", "SweepResult", "ConvergenceResult", "PatternResult",
    "default_scenario", "run_monte_carlo", "sweep_power", "sweep_antennas",
    "sweep_eavesdroppers", "sweep_directivity", "gain_patterns", "emit",
]

AXES = {
    "power": "p_ap_dbm",
    "antennas": "k",
    "eavesdroppers": "M",
    "directivity": "p",
}

DEFAULT_GRIDS = {
    "power": (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
    "antennas": (2, 3, 4, 5, 6),
    "eavesdroppers": (1, 2, 3, 4, 5, 6),
    "directivity": (1.0, 2.0, 4.0),
}

EVE_SECTOR = (math.pi / 12, 11 * math.pi / 12)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment run."""

    seed: int = 0
    realizations: int = 200
    scenario: Scenario = field(default_factory=default_scenario)
    schemes: tuple[SchemeKind, ...] = ALL_SCHEMES
    grid: tuple[float, ...] | None = None
    ao: AOConfig = AOConfig()
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(SchemeKind(s) for s in self.schemes))
        if self.grid is not None:
            object.__setattr__(self, "grid", tuple(self.grid))

    def validate(self) -> None:
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"invalid field 'seed': {self.seed!r}")
        if self.realizations < 1:
            raise ValueError(f"invalid field 'realizations': {self.realizations!r}")
        if not self.schemes:
            raise ValueError("invalid field 'schemes': empty")
        if self.grid is not None:
            if not self.grid:
                raise ValueError("invalid field 'grid': empty")
            if list(self.grid) != sorted(self.grid):
                raise ValueError(f"invalid field 'grid': not sorted {list(self.grid)}")
        if self.workers < 1:
            raise ValueError(f"invalid field 'workers': {self.workers!r}")
        self.scenario.validate()

    # flat JSON form: scenario fields sit next to the run settings
    def to_dict(self) -> dict:
        d = {
            "seed": self.seed,
            "realizations": self.realizations,
            "schemes": [s.value for s in self.schemes],
            "grid": None if self.grid is None else list(self.grid),
            "eps": self.ao.eps,
            "max_outer": self.ao.max_outer,
            "sca_max_iter": self.ao.sca.max_iter,
            "sca_tol": self.ao.sca.tol,
            "sca_max_halvings": self.ao.sca.max_halvings,
            "sca_gain_tol": self.ao.sca.gain_tol,
            "workers": self.workers,
        }
        d.update(self.scenario.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        run_keys = {"seed", "realizations", "schemes", "grid", "eps", "max_outer", "sca_max_iter",
                    "sca_tol", "sca_max_halvings", "sca_gain_tol", "workers", "p_ap_dbm"}
        scen = {k: v for k, v in d.items() if k not in run_keys}
        if "p_ap_dbm" in d:
            scen["p_ap"] = float(dbm_to_watt(d["p_ap_dbm"]))
        base = cls()
        sca = SCAConfig(
            max_iter=int(d.get("sca_max_iter", base.ao.sca.max_iter)),
            tol=float(d.get("sca_tol", base.ao.sca.tol)),
            max_halvings=int(d.get("sca_max_halvings", base.ao.sca.max_halvings)),
            gain_tol=float(d.get("sca_gain_tol", base.ao.sca.gain_tol)),
        )
        ao = AOConfig(eps=float(d.get("eps", base.ao.eps)),
                      max_outer=int(d.get("max_outer", base.ao.max_outer)), sca=sca)
        schemes = d.get("schemes", [s.value for s in base.schemes])
        if isinstance(schemes, str):
            schemes = schemes.split(",")
        return cls(
            seed=int(d.get("seed", base.seed)),
            realizations=int(d.get("realizations", base.realizations)),
            scenario=Scenario.from_dict(scen) if scen else base.scenario,
            schemes=tuple(SchemeKind.parse(s) if isinstance(s, str) else s for s in schemes),
            grid=d.get("grid"),
            ao=ao,
            workers=int(d.get("workers", base.workers)),
        )


def _stderr(x: np.ndarray, axis=-1) -> np.ndarray:
    n = x.shape[axis]
    if n < 2:
        return np.zeros(np.delete(x.shape, axis))
    return np.std(x, axis=axis, ddof=1) / math.sqrt(n)


@dataclass
class SweepResult:
    """Per grid point x scheme x realization secrecy rates.

    ``iterations`` holds AO outer-iteration counts for the optimized scheme
    (zeros when it was not run).
    """

    axis: str
    grid: tuple
    schemes: tuple[SchemeKind, ...]
    values: np.ndarray  # (G, S, N)
    iterations: np.ndarray  # (G, N)
    config: ExperimentConfig | None = None

    @property
    def mean(self) -> np.ndarray:
        return self.values.mean(axis=-1)

    @property
    def stderr(self) -> np.ndarray:
        return _stderr(self.values)

    def series(self, scheme) -> np.ndarray:
        """Per-realization values of one scheme, shape ``(G, N)``."""
        return self.values[:, self.schemes.index(SchemeKind(scheme)), :]

    def mean_iterations(self) -> np.ndarray:
        return self.iterations.mean(axis=-1)

    def rows(self):
        for gi, x in enumerate(self.grid):
            for si, s in enumerate(self.schemes):
                yield x, s.value, self.mean[gi, si], self.stderr[gi, si], self.values.shape[-1]

    def to_json(self) -> dict:
        return {
            "axis": self.axis,
            "grid": list(self.grid),
            "schemes": [s.value for s in self.schemes],
            "mean": self.mean.tolist(),
            "stderr": self.stderr.tolist(),
            "values": self.values.tolist(),
            "mean_iterations": self.mean_iterations().tolist(),
        }


def eavesdropper_angles(seed: int, realization: int, m: int) -> tuple[float, ...]:
    """Uniform eavesdropper angles in the sector; the first ``m`` of a fixed stream."""
    rng = substream(seed, PLACEMENT_STREAM, realization)
    return tuple(float(a) for a in rng.uniform(*EVE_SECTOR, size=m))


def evaluate_realization(scenario: Scenario, seed: int, realization: int, schemes,
                         ao: AOConfig = AOConfig()) -> tuple[list[float], int]:
    """Secrecy rate of each scheme on one shared fading draw, plus AO iterations."""
    channels = realize_channels(scenario, seed, realization)
    out = []
    iters = 0
    for s in schemes:
        s = SchemeKind(s)
        if s is SchemeKind.RA:
            res = run_ao(scenario, channels, ao)
            out.append(res.report.r_sec)
            iters = res.trace.iterations
        else:
            out.append(run_benchmark(s, scenario, channels, seed, realization)[2].r_sec)
    return out, iters


def _task(args):
    scenario, seed, r, schemes, ao = args
    return evaluate_realization(scenario, seed, r, schemes, ao)


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def point_scenario(axis: str, base: Scenario, x, seed: int, realization: int) -> Scenario:
    """Scenario for grid value ``x`` of ``axis`` (and realization, for random placements)."""
    if axis == "power":
        return base.replace(p_ap=float(dbm_to_watt(x)))
    if axis == "antennas":
        return base.replace(k_x=int(x), k_y=int(x))
    if axis == "eavesdroppers":
        return base.replace(eve_angles=eavesdropper_angles(seed, realization, int(x)))
    if axis == "directivity":
        return base.replace(p=float(x))
    raise ValueError(f"unknown sweep axis {axis!r}")


def run_monte_carlo(config: ExperimentConfig, axis: str = "power") -> SweepResult:
    """Evaluate every scheme on ``config.realizations`` paired draws per grid point.

    Aggregation is in (grid, realization) index order regardless of
    ``config.workers``.
    """
    config.validate()
    grid = config.grid if config.grid is not None else DEFAULT_GRIDS[axis]
    if not grid:
        raise ValueError("invalid field 'grid': empty")
    N = config.realizations
    tasks = [(point_scenario(axis, config.scenario, x, config.seed, r), config.seed, r,
              config.schemes, config.ao)
             for x in grid for r in range(N)]
    results = _map(_task, tasks, config.workers)
    G, S = len(grid), len(config.schemes)
    values = np.array([v for v, _ in results], dtype=float).reshape(G, N, S).transpose(0, 2, 1)
    iterations = np.array([i for _, i in results], dtype=float).reshape(G, N)
    return SweepResult(axis, tuple(grid), config.schemes, values, iterations, config)


def sweep_power(config: ExperimentConfig) -> SweepResult:
    return run_monte_carlo(config, "power")


def sweep_antennas(config: ExperimentConfig) -> SweepResult:
    return run_monte_carlo(config, "antennas")


def sweep_eavesdroppers(config: ExperimentConfig) -> SweepResult:
    return run_monte_carlo(config, "eavesdroppers")


@dataclass
class ConvergenceResult:
    """AO secrecy-rate traces per directivity factor.

    ``traces[i, r, j]`` is the rate after outer iteration ``j`` (0 = start),
    held at its final value after the run stopped.
    """

    grid: tuple
    traces: np.ndarray  # (P, N, max_outer + 1)
    iterations: np.ndarray  # (P, N)
    converged: np.ndarray  # (P, N) bool
    monotone_violation: np.ndarray  # (P, N) largest decrease along the raw trace
    config: ExperimentConfig | None = None

    def rows(self):
        mean = self.traces.mean(axis=1)
        se = _stderr(self.traces.transpose(0, 2, 1))
        n = self.traces.shape[1]
        for pi, p in enumerate(self.grid):
            for j in range(self.traces.shape[2]):
                yield p, j, mean[pi, j], se[pi, j], n

    def to_json(self) -> dict:
        return {
            "grid": list(self.grid),
            "mean_trace": self.traces.mean(axis=1).tolist(),
            "iterations": self.iterations.tolist(),
            "mean_iterations": self.iterations.mean(axis=1).tolist(),
            "converged_fraction": self.converged.mean(axis=1).tolist(),
        }


def _converge_task(args):
    scenario, seed, r, ao = args
    res = run_ao(scenario, realize_channels(scenario, seed, r), ao)
    tr = np.asarray(res.trace.r_sec)
    drop = float(np.max(tr[:-1] - tr[1:])) if len(tr) > 1 else 0.0
    return tr, res.trace.iterations, res.trace.converged, drop


def sweep_directivity(config: ExperimentConfig) -> ConvergenceResult:
    """Full AO traces for each directivity factor on shared fading draws."""
    config.validate()
    grid = config.grid if config.grid is not None else DEFAULT_GRIDS["directivity"]
    N = config.realizations
    tasks = [(config.scenario.replace(p=float(p)), config.seed, r, config.ao)
             for p in grid for r in range(N)]
    results = _map(_converge_task, tasks, config.workers)
    L = config.ao.max_outer + 1
    traces = np.empty((len(grid) * N, L))
    for i, (tr, *_rest) in enumerate(results):
        traces[i, :len(tr)] = tr
        traces[i, len(tr):] = tr[-1]
    shape = (len(grid), N)
    return ConvergenceResult(
        tuple(grid), traces.reshape(*shape, L),
        np.array([r[1] for r in results], dtype=float).reshape(shape),
        np.array([r[2] for r in results], dtype=bool).reshape(shape),
        np.array([r[3] for r in results], dtype=float).reshape(shape),
        config,
    )


@dataclass
class PatternResult:
    """Array-gain probe (dB) versus elevation angle for each scheme.

    ``gain_db`` averages the linear gain over realizations; ``user_margin``
    holds, per realization, the optimized scheme's gain towards the user
    minus its gain towards each eavesdropper (dB).
    """

    phi: np.ndarray
    schemes: tuple[SchemeKind, ...]
    gain_db: np.ndarray  # (S, n_phi)
    user_margin: np.ndarray  # (N, M)
    config: ExperimentConfig | None = None

    def rows(self):
        for i, ph in enumerate(self.phi):
            yield (ph, *self.gain_db[:, i])

    def to_json(self) -> dict:
        return {
            "phi": self.phi.tolist(),
            "schemes": [s.value for s in self.schemes],
            "gain_db": self.gain_db.tolist(),
            "user_margin_db": self.user_margin.tolist(),
        }


def _pattern_task(args):
    scenario, seed, r, schemes, ao, phi = args
    channels = realize_channels(scenario, seed, r)
    lin = []
    margin = None
    for s in schemes:
        pattern = None
        if s is SchemeKind.RA:
            res = run_ao(scenario, channels, ao)
            v, F = res.v, res.F
            angles = np.array((scenario.user_angle, *scenario.eve_angles))
            probe = array_gain_probe(v, F, scenario, angles)
            margin = probe[0] - probe[1:]
        else:
            v, F, _ = run_benchmark(s, scenario, channels, seed, r)
            if s is SchemeKind.ISOTROPIC:
                pattern = GainPattern.isotropic_pattern()
        lin.append(10.0 ** (array_gain_probe(v, F, scenario, phi, pattern=pattern) / 10.0))
    return np.array(lin), margin


def gain_patterns(config: ExperimentConfig, n_phi: int = 181) -> PatternResult:
    """Array-gain probe over ``phi`` in ``[0, pi]`` for the default placements."""
    config.validate()
    phi = np.linspace(0.0, math.pi, n_phi)
    N = config.realizations
    tasks = [(config.scenario, config.seed, r, config.schemes, config.ao, phi) for r in range(N)]
    results = _map(_pattern_task, tasks, config.workers)
    lin = np.mean([r[0] for r in results], axis=0)
    with np.errstate(divide="ignore"):
        gain_db = 10.0 * np.log10(lin)
    margins = [r[1] for r in results]
    user_margin = (np.array(margins) if margins[0] is not None
                   else np.empty((N, 0)))
    return PatternResult(phi, config.schemes, gain_db, user_margin, config)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def manifest(config: ExperimentConfig | None, experiment: str) -> dict:
    return {
        "experiment": experiment,
        "version": __version__,
        "seed": None if config is None else config.seed,
        "config": None if config is None else config.to_dict(),
    }


def emit(result, out_dir, name: str, fmt: str = "csv") -> list[Path]:
    """Write ``result`` as ``<name>.csv`` or ``<name>.json`` plus ``<name>.manifest.json``.

    Returns the written paths.  Output is byte-identical for identical results.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        if fmt == "csv":
            path = out / f"{name}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(_header(result))
                for row in result.rows():
                    w.writerow([_fmt(x) for x in row])
        elif fmt == "json":
            path = out / f"{name}.json"
            path.write_text(json.dumps(result.to_json(), indent=2) + "\n", encoding="utf-8")
        else:
            raise ValueError(f"unknown format {fmt!r}")
        paths.append(path)
        mpath = out / f"{name}.manifest.json"
        mpath.write_text(json.dumps(manifest(result.config, name), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
        paths.append(mpath)
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return paths


def _header(result) -> list[str]:
    if isinstance(result, SweepResult):
        return [AXES[result.axis], "scheme", "mean", "stderr", "n"]
    if isinstance(result, ConvergenceResult):
        return ["p", "iteration", "mean", "stderr", "n"]
    if isinstance(result, PatternResult):
        return ["phi", *[f"gain_db_{s.value}" for s in result.schemes]]
    raise TypeError(f"cannot emit {type(result).__name__}")


def load_config(path) -> ExperimentConfig:
    """Read a flat JSON config file, or the ``config`` block of a run manifest."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must be a JSON object")
    if "experiment" in data and isinstance(data.get("config"), dict):
        data = data["config"]
    return ExperimentConfig.from_dict(data)


def config_replace(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(config, **changes)
