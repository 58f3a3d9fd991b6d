"""Monte Carlo comparison of simulated and predicted APL.

For every beta, ``realizations`` networks are generated and ``requests``
cross-domain flow requests are drawn per network.  Every request is routed
under every scenario (paired design), so per-request comparisons between
scenarios are meaningful.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analytic, dist, netgen, routing
from .netgen import TopologySource

log = logging.getLogger(__name__)

THREADS_ENV = "SDNAPL_THREADS"
CALIBRATION_GRAPHS = 200


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).replace(" ", "").split(",") if x]


@dataclass
class ExperimentConfig:
    m: int = 30
    n: int = 50
    betas: list[int] = field(default_factory=lambda: [1, 4, 16])
    taus: list[int] = field(default_factory=lambda: [2, 3])
    realizations: int = 20
    requests: int = 50
    intra: str = "ba:1"
    inter: str = "er:0.10345"
    weights: str = str(dist.sample_weights_path())
    seed: int = 2019
    max_value: int = dist.DEFAULT_MAX_VALUE
    exact: bool = False
    shell_completion: str = "remainder"
    workers: int = 0
    out_dir: str = "results"

    # config-file key -> field
    ALIASES = {"beta": "betas", "tau": "taus", "R": "realizations", "S": "requests"}

    def __post_init__(self):
        self.betas = _int_list(self.betas)
        self.taus = _int_list(self.taus)
        for name in ("m", "n", "realizations", "requests", "seed", "max_value", "workers"):
            setattr(self, name, int(getattr(self, name)))
        if isinstance(self.exact, str):
            self.exact = self.exact.strip().lower() in ("1", "true", "yes", "on")
        self.validate()

    def validate(self):
        if self.m < 2 or self.n < 2:
            raise ValueError("m and n must be >= 2")
        if self.realizations < 1 or self.requests < 1:
            raise ValueError("realizations and requests must be >= 1")
        if not self.betas or any(b < 1 for b in self.betas):
            raise ValueError("beta values must be >= 1")
        if any(t < 1 for t in self.taus):
            raise ValueError("tau values must be >= 1")

    @classmethod
    def keys(cls) -> set[str]:
        return {f.name for f in fields(cls)} | set(cls.ALIASES)

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        unknown = sorted(set(values) - cls.keys())
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**{cls.ALIASES.get(k, k): v for k, v in values.items()})

    @property
    def scenarios(self) -> list[str]:
        return ["MS", "SS", *(f"PS{t}" for t in self.taus), "CS"]


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` comments and blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out


@dataclass
class ScenarioStats:
    scenario: str
    beta: int
    simulated_mean: float
    std_error: float
    sample_count: int
    analytic_value: float
    samples: np.ndarray = field(repr=False, default=None)

    @property
    def relative_error(self) -> float:
        if self.simulated_mean == 0:
            return math.inf if self.analytic_value else 0.0
        return abs(self.simulated_mean - self.analytic_value) / self.simulated_mean


def realization_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index, 0]).generate_state(1, np.uint64)[0])


def degree_pmf_for(source: TopologySource, size: int, seed: int) -> dist.DiscretePmf:
    """Degree distribution fed to the analytic model for one layer.

    Explicit pmfs are used as given; BA and ER layers are calibrated from
    the pooled degree histogram of independent generator output.
    """
    if source.kind == "pmf":
        return source.pmf
    rng = np.random.default_rng([seed, size, 0xCA11B])
    return netgen.empirical_degree_pmf([source.generate(size, rng) for _ in range(CALIBRATION_GRAPHS)])


def model_params(config: ExperimentConfig, beta: int) -> analytic.ModelParams:
    intra = TopologySource.parse(config.intra)
    inter = TopologySource.parse(config.inter)
    return analytic.ModelParams(
        n=config.n,
        m=config.m,
        beta=beta,
        intra_degree=degree_pmf_for(intra, config.n, config.seed),
        inter_degree=degree_pmf_for(inter, config.m, config.seed),
        weight=dist.load_pmf(config.weights),
        max_value=config.max_value,
        shell_completion=config.shell_completion,
    )


def predictions(params: analytic.ModelParams, taus, exact: bool = False) -> dict[str, analytic.AplPrediction]:
    model = analytic.AnalyticModel(params)
    out = {"MS": model.ms(), "SS": model.ss()}
    for t in taus:
        out[f"PS{t}"] = model.ps(t, exact)
    out["CS"] = model.cs(exact)
    return out


def draw_requests(m: int, n: int, count: int, rng: np.random.Generator) -> list[routing.FlowRequest]:
    out = []
    while len(out) < count:
        a, b = rng.integers(m, size=2)
        if a == b:
            continue
        out.append(routing.FlowRequest((int(a), int(rng.integers(n))), (int(b), int(rng.integers(n)))))
    return out


def simulate_realization(config: ExperimentConfig, beta: int, index: int) -> np.ndarray:
    """Weights of all scenario paths, shape (requests, scenarios)."""
    weight = dist.load_pmf(config.weights)
    net = netgen.assemble(
        config.m,
        config.n,
        beta,
        TopologySource.parse(config.intra),
        TopologySource.parse(config.inter),
        weight,
        realization_seed(config.seed, index),
    )
    rng = np.random.default_rng([config.seed, index, 1])
    reqs = draw_requests(config.m, config.n, config.requests, rng)
    out = np.zeros((len(reqs), len(config.scenarios)), dtype=np.int64)
    for i, req in enumerate(reqs):
        domains = routing.domain_wise_shortest_path(net, req.src[0], req.dst[0], rng)
        for j, s in enumerate(config.scenarios):
            if s == "MS":
                path = routing.route_ms(net, req, rng, domains)
            elif s == "SS":
                path = routing.route_ss(net, req, rng, domains)
            elif s == "CS":
                path = routing.route_cs(net, req)
            else:
                path = routing.route_ps(net, req, int(s[2:]), rng, domains)
            out[i, j] = path.total_weight
    return out


def _simulate_job(args):
    return simulate_realization(*args)


def _workers(config: ExperimentConfig) -> int:
    if config.workers > 0:
        return config.workers
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def simulate(config: ExperimentConfig, beta: int) -> np.ndarray:
    jobs = [(config, beta, r) for r in range(config.realizations)]
    workers = _workers(config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_job, jobs))
    else:
        parts = [_simulate_job(j) for j in jobs]
    return np.concatenate(parts, axis=0)


def run(config: ExperimentConfig, on_beta=None) -> list[ScenarioStats]:
    stats: list[ScenarioStats] = []
    for beta in config.betas:
        log.info("beta=%d: %d realizations x %d requests", beta, config.realizations, config.requests)
        preds = predictions(model_params(config, beta), config.taus, config.exact)
        weights = simulate(config, beta)
        rows = []
        for j, s in enumerate(config.scenarios):
            w = weights[:, j].astype(np.float64)
            se = float(w.std(ddof=1) / math.sqrt(w.size)) if w.size > 1 else 0.0
            rows.append(ScenarioStats(s, beta, float(w.mean()), se, int(w.size), preds[s].value, weights[:, j]))
        stats.extend(rows)
        if on_beta is not None:
            on_beta(rows)
    return stats


RESULTS_HEADER = "beta,scenario,analytic,simulated,std_err,rel_err,samples"


def format_row(s: ScenarioStats) -> str:
    return (
        f"{s.beta},{s.scenario},{s.analytic_value:.6f},{s.simulated_mean:.6f},"
        f"{s.std_error:.6f},{s.relative_error:.6f},{s.sample_count}"
    )


def write_results(stats, path: str | Path) -> None:
    lines = [RESULTS_HEADER, *(format_row(s) for s in stats)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_results(path: str | Path) -> list[ScenarioStats]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#") or line == RESULTS_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}:{lineno}: expected 7 columns")
        beta, scen, ana, sim, se, _, cnt = parts
        out.append(ScenarioStats(scen, int(beta), float(sim), float(se), int(cnt), float(ana)))
    return out


def run_to_files(config: ExperimentConfig) -> tuple[Path, Path, list[ScenarioStats]]:
    """Run and write ``results.csv`` and ``summary.txt`` into ``out_dir``.

    Rows are flushed after each beta so a failure leaves partial output
    followed by a ``# FAILED`` marker line.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = out / "results.csv"
    summary_path = out / "summary.txt"
    with results.open("w") as fh:
        fh.write(RESULTS_HEADER + "\n")

        def flush(rows):
            for r in rows:
                fh.write(format_row(r) + "\n")
            fh.flush()

        try:
            stats = run(config, on_beta=flush)
        except Exception as exc:
            fh.write(f"# FAILED: {type(exc).__name__}: {exc}\n")
            raise
    summary_path.write_text(summarize(stats))
    return results, summary_path, stats


def reduction_table(stats) -> dict[int, dict[str, float]]:
    """Percent APL reduction of every scenario relative to MS, per beta."""
    out: dict[int, dict[str, float]] = {}
    by_beta: dict[int, dict[str, ScenarioStats]] = {}
    for s in stats:
        by_beta.setdefault(s.beta, {})[s.scenario] = s
    for beta, rows in by_beta.items():
        ms = rows.get("MS")
        out[beta] = {}
        if ms is None or ms.simulated_mean == 0:
            continue
        for name, s in rows.items():
            if name != "MS":
                out[beta][name] = 100.0 * (ms.simulated_mean - s.simulated_mean) / ms.simulated_mean
    return out


def summarize(stats) -> str:
    if not stats:
        raise ValueError("no statistics to summarize")
    by_beta: dict[int, dict[str, ScenarioStats]] = {}
    order: list[str] = []
    for s in stats:
        by_beta.setdefault(s.beta, {})[s.scenario] = s
        if s.scenario not in order:
            order.append(s.scenario)
    reductions = reduction_table(stats)
    lines = ["APL comparison (weight units); std errors pool all requests as iid", ""]
    head = f"{'beta':>5} {'scenario':>8} {'analytic':>10} {'simulated':>10} {'std_err':>8} {'rel_err':>8} {'red_vs_MS%':>10}"
    lines.append(head)
    for beta in sorted(by_beta):
        for name in order:
            s = by_beta[beta].get(name)
            if s is None:
                continue
            red = reductions[beta].get(name)
            red_txt = f"{red:10.2f}" if red is not None else " " * 10
            lines.append(
                f"{beta:>5} {name:>8} {s.analytic_value:10.3f} {s.simulated_mean:10.3f} "
                f"{s.std_error:8.3f} {s.relative_error:8.3f} {red_txt}"
            )
    gains = []
    for beta in sorted(by_beta):
        rows = by_beta[beta]
        if {"SS", "PS2", "PS3"} <= rows.keys():
            a = rows["SS"].simulated_mean - rows["PS2"].simulated_mean
            b = rows["PS2"].simulated_mean - rows["PS3"].simulated_mean
            gains.append(f"{beta:>5} {a:12.3f} {b:12.3f}")
    if gains:
        lines += ["", "Diminishing returns (simulated)", f"{'beta':>5} {'SS->PS2':>12} {'PS2->PS3':>12}", *gains]
    return "\n".join(lines) + "\n"
