"""Command-line frontend.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
4 internal numeric error.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import analytic, dist, experiments, netgen, plot, routing
from .experiments import ExperimentConfig

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

GENERATE_KEYS = ("m", "n", "beta", "intra", "inter", "weights", "seed", "out")


class UsageError(ValueError):
    pass


def _positive_int(name: str, value, minimum: int = 1) -> int:
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise UsageError(f"--{name}: expected an integer, got {value!r}") from None
    if v < minimum:
        raise UsageError(f"--{name} must be >= {minimum}, got {v}")
    return v


def _merged(args, keys, defaults: dict) -> dict:
    """Config file values, then explicit flags on top."""
    values = dict(defaults)
    if getattr(args, "config", None):
        from_file = experiments.read_config_file(args.config)
        unknown = sorted(set(from_file) - set(keys))
        if unknown:
            raise UsageError(f"{args.config}: unknown config keys: {', '.join(unknown)}")
        values.update(from_file)
    for k in keys:
        v = getattr(args, k.replace("-", "_"), None)
        if v is not None:
            values[k] = v
    return values


def parse_node(text: str, flag: str) -> tuple[int, int]:
    d, sep, v = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return int(d), int(v)
    except ValueError:
        raise UsageError(f"--{flag}: malformed node id {text!r}; expected DOMAIN:NODE, e.g. 3:17") from None


def cmd_generate(args) -> int:
    defaults = {
        "m": 30,
        "n": 50,
        "beta": 1,
        "intra": "ba:1",
        "inter": "er:0.10345",
        "weights": str(dist.sample_weights_path()),
        "seed": 0,
    }
    v = _merged(args, GENERATE_KEYS, defaults)
    m = _positive_int("m", v["m"], 2)
    n = _positive_int("n", v["n"], 2)
    beta = _positive_int("beta", v["beta"])
    seed = _positive_int("seed", v["seed"], 0)
    if not v.get("out"):
        raise UsageError("--out is required")
    net = netgen.assemble(
        m,
        n,
        beta,
        netgen.TopologySource.parse(v["intra"]),
        netgen.TopologySource.parse(v["inter"]),
        dist.load_pmf(v["weights"]),
        seed,
    )
    net.dump(v["out"])
    counts = net.link_counts()
    print(f"wrote {v['out']}: {m} domains x {n} nodes, {len(net.domain_edges)} domain edges")
    print(f"inter-domain links: {len(net.inter_links)} total")
    for (a, b), c in sorted(counts.items()):
        print(f"  {a}-{b}: {c}")
    print(f"connectivity repairs: {net.repairs}")
    return EXIT_OK


def cmd_route(args) -> int:
    net = netgen.TwoLayerNetwork.load(args.net)
    src = parse_node(args.src, "src")
    dst = parse_node(args.dst, "dst")
    for flag, (d, u) in (("src", src), ("dst", dst)):
        if not (0 <= d < net.m and 0 <= u < net.n):
            raise UsageError(f"--{flag}: node {d}:{u} outside the {net.m}x{net.n} network")
    tau = _positive_int("tau", args.tau)
    try:
        req = routing.FlowRequest(src, dst)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rng = np.random.default_rng(_positive_int("seed", args.seed, 0))
    path = routing.route(net, req, args.scenario, rng, tau)
    print(f"scenario: {path.scenario}")
    print(f"domains: {' '.join(map(str, path.domain_sequence))}")
    print(f"path: {path.format()}")
    print(f"weight: {path.total_weight}")
    print(f"hops: {path.hop_count}")
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    keys = sorted(ExperimentConfig.keys())
    values = _merged(args, keys, {})
    if "beta" in values and "betas" in values:
        values.pop("betas")
    try:
        return ExperimentConfig.from_mapping(values)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def cmd_analyze(args) -> int:
    cfg = _experiment_config(args)
    lines = [f"{'beta':>5}  {'quantity':<10} {'value':>12}"]
    for beta in cfg.betas:
        params = experiments.model_params(cfg, beta)
        model = analytic.AnalyticModel(params)
        preds = experiments.predictions(params, cfg.taus, cfg.exact)
        rows = [
            ("Delta", model.delta),
            ("gamma", model.gamma),
            ("l", model.l),
            ("E[W]", params.weight.mean()),
            ("E[D]", model.D.mean()),
            ("E[M]", model.M.mean()),
            ("L_MS", preds["MS"].value),
            ("L_SS", preds["SS"].value),
            *((f"L_PS({t})", preds[f"PS{t}"].value) for t in cfg.taus),
            ("L_CS", preds["CS"].value),
        ]
        lines += [f"{beta:>5}  {name:<10} {value:12.6f}" for name, value in rows]
    print("\n".join(lines))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    results, summary, _ = experiments.run_to_files(cfg)
    print(summary.read_text(), end="")
    print(f"results: {results}")
    print(f"summary: {summary}")
    return EXIT_OK


def cmd_plot(args) -> int:
    rows = experiments.read_results(args.results)
    if not rows:
        raise UsageError(f"{args.results}: no result rows")
    Path(args.out).write_text(plot.render_svg(rows))
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdnapl", description="APL analysis and simulation for multi-domain SDN.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a two-layer network dump")
    g.add_argument("--config")
    for k in GENERATE_KEYS:
        g.add_argument(f"--{k}")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("route", help="route one request on a dump")
    r.add_argument("--net", required=True)
    r.add_argument("--src", required=True)
    r.add_argument("--dst", required=True)
    r.add_argument("--scenario", default="cs", choices=["ms", "ss", "ps", "cs", "MS", "SS", "PS", "CS"])
    r.add_argument("--tau", default="2")
    r.add_argument("--seed", default="0")
    r.set_defaults(func=cmd_route)

    for name, func, text in (
        ("analyze", cmd_analyze, "print analytic predictions"),
        ("experiment", cmd_experiment, "run the Monte Carlo comparison"),
    ):
        a = sub.add_parser(name, help=text)
        a.add_argument("--config")
        a.add_argument("--m")
        a.add_argument("--n")
        a.add_argument("--beta", help="comma-separated list")
        a.add_argument("--tau", help="comma-separated list")
        a.add_argument("--intra")
        a.add_argument("--inter")
        a.add_argument("--weights")
        a.add_argument("--seed")
        a.add_argument("--exact", choices=["true", "false"])
        a.add_argument("--shell-completion", dest="shell_completion", choices=list(analytic.SHELL_COMPLETIONS))
        if name == "experiment":
            a.add_argument("--realizations")
            a.add_argument("--requests")
            a.add_argument("--workers")
            a.add_argument("--out-dir", dest="out_dir")
        a.set_defaults(func=func)

    pl = sub.add_parser("plot", help="draw results.csv as SVG")
    pl.add_argument("--results", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, routing.RoutingError) as exc:
        # DegenerateBranching, PmfError and InfeasibleSequence all land here.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, netgen.GenerationFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
