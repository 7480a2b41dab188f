"""Monte-Carlo harness: empirical error probabilities against Chebyshev bounds.

Every (size, graph index) unit draws its own random streams from
``SeedSequence(master_seed, spawn_key=(N, index, attempt))``, so results do
not depend on which other sizes are run or on thread scheduling.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import graphs
from .bounds import estimator_psd, filtered_psd, node_variance
from .errors import ErgographError, InvalidParameterError
from .estimators import graph_shift_average, optimal_mse_estimator
from .process import WssProcess, ensemble_mean, flat_psd, gmrf_process, logspace_psd, sample, snr_to_p1
from .spectral import decompose

log = logging.getLogger(__name__)

FAMILIES = ("er", "covariance", "sbm", "gmrf")
ESTIMATORS = ("shift_average", "optimal")
MAX_DRAW_ATTEMPTS = 10


@dataclass
class ExperimentConfig:
    family: str
    sizes: list[int]
    graphs_per_size: int = 10
    trials_per_graph: int = 10_000
    mu: float = 3.0
    snr_db: float = 10.0
    epsilon: float | None = None
    estimators: tuple[str, ...] = ESTIMATORS
    master_seed: int = 0
    p_er: float = 0.2
    communities: int = 4
    p_in: float = 0.6
    p_out: float = 0.1
    cov_samples: int = 100_000
    rho_min: float = 0.01
    rho_max: float = 1.0
    thres_factor: float = 1.75
    gmrf_a_factor: float = 0.99
    literal_dc: bool = False
    block_size: int = 5000

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        self.sizes = [int(n) for n in self.sizes]
        if not self.sizes:
            raise InvalidParameterError("sizes must be nonempty")
        if self.trials_per_graph < 1 or self.graphs_per_size < 1:
            raise InvalidParameterError("graphs_per_size and trials_per_graph must be >= 1")
        self.estimators = tuple(self.estimators)
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise InvalidParameterError(f"unknown estimators {sorted(unknown)}")
        if self.epsilon is not None and self.epsilon <= 0:
            raise InvalidParameterError("epsilon must be positive")

    @property
    def epsilon_value(self) -> float:
        if self.epsilon is not None:
            return float(self.epsilon)
        return 0.1 * 10.0 ** (self.snr_db / 10.0)

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise InvalidParameterError(f"unknown config keys {sorted(unknown)}")
        if doc.get("epsilon") == "snr":
            doc = {**doc, "epsilon": None}
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        return cls.from_dict(json.loads(text))


@dataclass
class GraphPoint:
    """Result for one estimator on one graph draw."""

    size: int
    graph_index: int
    estimator: str
    node: int
    err_prob: float
    trials: int
    bound_raw: float
    bound_clipped: float
    mse: float
    mse_se: float
    mse_analytic: float

    @property
    def err_se(self) -> float:
        p = self.err_prob
        return float(np.sqrt(p * (1 - p) / self.trials))


@dataclass
class Aggregate:
    family: str
    size: int
    estimator: str
    err_prob_mean: float
    err_prob_min: float
    err_prob_max: float
    err_prob_se: float
    bound_mean: float
    bound_min: float
    bound_max: float
    mse_mean: float
    mse_analytic_mean: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    points: list[GraphPoint]
    aggregates: list[Aggregate]
    failures: list[str] = field(default_factory=list)
    runtime_s: float = 0.0

    def aggregate(self, size: int, estimator: str) -> Aggregate:
        for agg in self.aggregates:
            if agg.size == size and agg.estimator == estimator:
                return agg
        raise KeyError((size, estimator))

    def series(self, estimator: str, attr: str = "err_prob_mean") -> list[float]:
        return [getattr(self.aggregate(n, estimator), attr) for n in self.config.sizes]

    CSV_HEADER = (
        "family", "N", "estimator", "err_prob_mean", "err_prob_min", "err_prob_max",
        "bound_mean", "bound_min", "bound_max", "mse_mean", "seed",
    )

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(self.CSV_HEADER)
        for a in self.aggregates:
            nums = (a.err_prob_mean, a.err_prob_min, a.err_prob_max, a.bound_mean, a.bound_min, a.bound_max, a.mse_mean)
            writer.writerow([a.family, a.size, a.estimator, *(format(v, ".17g") for v in nums), self.config.master_seed])


def select_node(v1) -> int:
    """Largest ``v1`` entry strictly below ``1/sqrt(N)``; ``argmin v1`` if there is none."""
    v1 = np.asarray(v1, dtype=float)
    below = np.flatnonzero(v1 < 1.0 / np.sqrt(len(v1)))
    if below.size == 0:
        return int(np.argmin(v1))
    return int(below[np.argmax(v1[below])])


def _build_graph(cfg: ExperimentConfig, n: int, rng):
    if cfg.family == "er":
        return graphs.erdos_renyi(n, cfg.p_er, rng)
    if cfg.family == "sbm":
        return graphs.sbm(n, cfg.communities, cfg.p_in, cfg.p_out, rng)
    if cfg.family == "covariance":
        return graphs.covariance_graph(n, cfg.cov_samples, rng)
    return graphs.sensor_network(n, cfg.rho_min, cfg.rho_max, cfg.thres_factor, rng)


def build_process(cfg: ExperimentConfig, g: graphs.Graph):
    """Shift, decomposition and WSS process for one graph draw."""
    shift = graphs.default_shift(g)
    d = decompose(shift)
    p1 = snr_to_p1(cfg.mu, cfg.snr_db)
    if cfg.family in ("er", "sbm"):
        proc = WssProcess(d, cfg.mu, logspace_psd(g.n, p1, literal_dc=cfg.literal_dc))
    elif cfg.family == "covariance":
        proc = WssProcess(d, cfg.mu, flat_psd(g.n, p1))
    else:
        proc = gmrf_process(d, cfg.mu, cfg.snr_db, cfg.gmrf_a_factor)
    return shift, d, proc


def _spawn(cfg, n, index, attempt):
    ss = np.random.SeedSequence(cfg.master_seed, spawn_key=(n, index, attempt))
    graph_ss, trial_ss = ss.spawn(2)
    return np.random.default_rng(graph_ss), np.random.default_rng(trial_ss)


def _run_unit(cfg: ExperimentConfig, n: int, index: int):
    failures = []
    for attempt in range(MAX_DRAW_ATTEMPTS):
        graph_rng, trial_rng = _spawn(cfg, n, index, attempt)
        try:
            g = _build_graph(cfg, n, graph_rng)
            shift, d, proc = build_process(cfg, g)
            break
        except ErgographError as exc:
            failures.append(f"N={n} graph={index} attempt={attempt}: {exc}")
            log.warning("resampling graph draw: %s", failures[-1])
    else:
        raise ErgographError(f"N={n} graph={index}: {MAX_DRAW_ATTEMPTS} failed draws; last: {failures[-1]}")

    k = select_node(d.v1)
    eps = cfg.epsilon_value
    mean = ensemble_mean(proc)
    psd = {
        "shift_average": estimator_psd(proc.psd, d.eigenvalues, d.lambda1, n),
        "optimal": filtered_psd(proc.psd, np.eye(n)[0]),
    }
    errors = {e: 0 for e in cfg.estimators}
    sq = {e: [] for e in cfg.estimators}
    done = 0
    while done < cfg.trials_per_graph:
        size = min(cfg.block_size, cfg.trials_per_graph - done)
        x = sample(proc, trial_rng, size=size)
        for e in cfg.estimators:
            if e == "shift_average":
                est = graph_shift_average(shift, d.lambda1, x, n)
            else:
                est = optimal_mse_estimator(d, x)
            dev = est - mean[:, None]
            errors[e] += int(np.count_nonzero(np.abs(dev[k]) > eps))
            sq[e].append(np.mean(dev**2, axis=0))
        done += size

    points = []
    for e in cfg.estimators:
        var = node_variance(psd[e], d, k)
        per_trial = np.concatenate(sq[e])
        points.append(
            GraphPoint(
                size=n,
                graph_index=index,
                estimator=e,
                node=k,
                err_prob=errors[e] / cfg.trials_per_graph,
                trials=cfg.trials_per_graph,
                bound_raw=var / eps**2,
                bound_clipped=min(var / eps**2, 1.0),
                mse=float(per_trial.mean()),
                mse_se=float(per_trial.std(ddof=1) / np.sqrt(len(per_trial))) if len(per_trial) > 1 else 0.0,
                mse_analytic=float(np.sum(psd[e]) / n),
            )
        )
    return points, failures


def _aggregate(cfg: ExperimentConfig, points: list[GraphPoint]) -> list[Aggregate]:
    out = []
    for n in cfg.sizes:
        for e in cfg.estimators:
            pts = [p for p in points if p.size == n and p.estimator == e]
            err = np.array([p.err_prob for p in pts])
            bnd = np.array([p.bound_raw for p in pts])
            # standard error of the mean over graphs, pooling binomial noise
            se = float(np.sqrt(np.sum([p.err_se**2 for p in pts])) / len(pts))
            out.append(
                Aggregate(
                    family=cfg.family,
                    size=n,
                    estimator=e,
                    err_prob_mean=float(err.mean()),
                    err_prob_min=float(err.min()),
                    err_prob_max=float(err.max()),
                    err_prob_se=se,
                    bound_mean=float(bnd.mean()),
                    bound_min=float(bnd.min()),
                    bound_max=float(bnd.max()),
                    mse_mean=float(np.mean([p.mse for p in pts])),
                    mse_analytic_mean=float(np.mean([p.mse_analytic for p in pts])),
                )
            )
    return out


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    start = time.perf_counter()
    units = [(n, i) for n in cfg.sizes for i in range(cfg.graphs_per_size)]
    log.info("experiment %s: %d graph draws, master_seed=%d", cfg.family, len(units), cfg.master_seed)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda u: _run_unit(cfg, *u), units))
    else:
        results = [_run_unit(cfg, *u) for u in units]
    points = [p for pts, _ in results for p in pts]
    failures = [f for _, fs in results for f in fs]
    return ExperimentReport(cfg, points, _aggregate(cfg, points), failures, time.perf_counter() - start)


@dataclass
class FieldDemo:
    positions: np.ndarray
    raw: np.ndarray
    shift_average: np.ndarray
    true_mean: np.ndarray
    rel_err_raw: float
    rel_err_avg: float

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["node", "x", "y", "raw", "shift_average", "true_mean"])
        for k in range(len(self.raw)):
            vals = (*self.positions[k], self.raw[k], self.shift_average[k], self.true_mean[k])
            writer.writerow([k + 1, *(format(float(v), ".17g") for v in vals)])


def gmrf_field_demo(n: int, seed: int, cfg: ExperimentConfig | None = None, noiseless: bool = False) -> FieldDemo:
    """One GMRF realization on a sensor network and its graph shift average."""
    if n < 10:
        raise InvalidParameterError(f"field demo needs N >= 10, got {n}")
    if cfg is None:
        cfg = ExperimentConfig(family="gmrf", sizes=[n], master_seed=seed)
    graph_rng, trial_rng = _spawn(cfg, n, 0, 0)
    g = graphs.sensor_network(n, cfg.rho_min, cfg.rho_max, cfg.thres_factor, graph_rng)
    shift, d, proc = build_process(cfg, g)
    if noiseless:
        proc = WssProcess(d, proc.mu, np.zeros(n))
    x = sample(proc, trial_rng)
    avg = graph_shift_average(shift, d.lambda1, x)
    true = ensemble_mean(proc)
    ref = np.linalg.norm(true)
    return FieldDemo(
        positions=g.positions,
        raw=x,
        shift_average=avg,
        true_mean=true,
        rel_err_raw=float(np.linalg.norm(x - true) / ref),
        rel_err_avg=float(np.linalg.norm(avg - true) / ref),
    )


def gmrf_mse_sweep(sizes, cfg: ExperimentConfig | None = None, threads: int = 1) -> list[dict]:
    """Mean empirical MSE of the graph shift average on GMRF sensor networks per size.

    Defaults to 50 networks per size and 10^3 realizations per network.
    """
    if cfg is None:
        cfg = ExperimentConfig(family="gmrf", sizes=list(sizes), graphs_per_size=50, trials_per_graph=1000)
    else:
        cfg = dataclasses.replace(cfg, family="gmrf", sizes=list(sizes), estimators=("shift_average",))
    report = run_experiment(dataclasses.replace(cfg, estimators=("shift_average",)), threads=threads)
    rows = []
    for n in cfg.sizes:
        pts = [p for p in report.points if p.size == n]
        rows.append(
            {
                "N": n,
                "mse_mean": float(np.mean([p.mse for p in pts])),
                "mse_analytic_mean": float(np.mean([p.mse_analytic for p in pts])),
                "points": pts,
            }
        )
    return rows
