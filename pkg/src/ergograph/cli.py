"""Command-line interface.

Graph files are JSON (see ``Graph.to_json``); signals and results are CSV
with a header row and 1-based node numbers.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import graphs
from .bounds import bound_report, estimator_psd, filtered_psd, write_reports
from .distributed import simulate_diffusion
from .errors import ErgographError, InvalidParameterError
from .estimators import graph_shift_average, optimal_mse_estimator
from .experiments import ExperimentConfig, gmrf_field_demo, run_experiment
from .process import WssProcess, flat_psd, gmrf_process, logspace_psd, sample, snr_to_p1
from .spectral import classify_spectrum, decompose

log = logging.getLogger("ergograph")


def _fmt(v) -> str:
    return format(float(v), ".17g")


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load_graph(path) -> graphs.Graph:
    with open(path) as fh:
        return graphs.Graph.from_json(fh.read())


def _shift(g, kind):
    if kind == "normalized":
        return graphs.normalized_adjacency_shift(g)
    return graphs.default_shift(g)


def _read_signal(path, n) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "node" not in rows[0] or "x" not in rows[0]:
        raise InvalidParameterError(f"{path}: expected CSV columns 'node,x'")
    x = np.full(n, np.nan)
    for row in rows:
        k = int(row["node"]) - 1
        if not 0 <= k < n:
            raise InvalidParameterError(f"{path}: node {k + 1} out of range for N={n}")
        x[k] = float(row["x"])
    if np.isnan(x).any():
        raise InvalidParameterError(f"{path}: missing values for nodes {(np.flatnonzero(np.isnan(x)) + 1).tolist()}")
    return x


def _process(args, d, n) -> WssProcess:
    if args.psd == "gmrf":
        return gmrf_process(d, args.mu, args.snr_db, args.a_factor)
    p1 = snr_to_p1(args.mu, args.snr_db)
    psd = logspace_psd(n, p1, literal_dc=args.literal_dc) if args.psd == "logspace" else flat_psd(n, p1)
    return WssProcess(d, args.mu, psd)


def _require_seed(args):
    if args.seed is None:
        raise InvalidParameterError(f"'{args.command}' is randomized and requires --seed")
    log.info("seed=%d", args.seed)
    return np.random.default_rng(args.seed)


# --- subcommands ------------------------------------------------------------


def cmd_graph(args):
    if args.family == "cycle":
        g = graphs.directed_cycle(args.n)
        log.info("deterministic family; seed not used")
    else:
        rng = _require_seed(args)
        if args.family == "er":
            g = graphs.erdos_renyi(args.n, args.p_er, rng)
        elif args.family == "sbm":
            g = graphs.sbm(args.n, args.communities, args.p_in, args.p_out, rng)
        elif args.family == "sensor":
            g = graphs.sensor_network(args.n, args.rho_min, args.rho_max, args.thres_factor, rng)
        else:
            g = graphs.covariance_graph(args.n, args.samples, rng)
    with _output(args.out) as fh:
        fh.write(g.to_json() + "\n")


def cmd_spectrum(args):
    g = _load_graph(args.graph)
    d = decompose(_shift(g, args.shift))
    doc = classify_spectrum(d, args.ratio_threshold).to_dict()
    doc["eigenvalues"] = [[z.real, z.imag] for z in np.asarray(d.eigenvalues, dtype=complex)]
    if args.vectors:
        doc["eigenvectors"] = json.loads(d.to_json())["eigenvectors"]
    with _output(args.out) as fh:
        fh.write(json.dumps(doc) + "\n")


def cmd_sample(args):
    rng = _require_seed(args)
    g = _load_graph(args.graph)
    d = decompose(_shift(g, args.shift))
    x = sample(_process(args, d, g.n), rng, size=args.count)
    with _output(args.out) as fh:
        writer = csv.writer(fh)
        if args.count is None:
            writer.writerow(["node", "x"])
            writer.writerows([k + 1, _fmt(v)] for k, v in enumerate(x))
        else:
            writer.writerow(["node", *(f"x{t + 1}" for t in range(args.count))])
            writer.writerows([k + 1, *map(_fmt, row)] for k, row in enumerate(x))


def cmd_estimate(args):
    g = _load_graph(args.graph)
    s = _shift(g, args.shift)
    d = decompose(s)
    x = _read_signal(args.signal, g.n)
    depth = args.depth or g.n
    if args.estimator == "optimal":
        if args.distributed:
            raise InvalidParameterError("--distributed applies to the shift average only")
        z = optimal_mse_estimator(d, x)
    elif args.distributed:
        trace = simulate_diffusion(g, s, d.lambda1, x, depth)
        z = trace.per_node_estimates
        print(f"rounds={trace.rounds} messages_sent={trace.messages_sent}", file=sys.stderr)
    else:
        z = graph_shift_average(s, d.lambda1, x, depth)
    with _output(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "estimate"])
        writer.writerows([k + 1, _fmt(v)] for k, v in enumerate(z))


def cmd_bound(args):
    g = _load_graph(args.graph)
    d = decompose(_shift(g, args.shift))
    proc = _process(args, d, g.n)
    if args.estimator == "optimal":
        spectrum = filtered_psd(proc.psd, np.eye(g.n)[0])
    elif args.estimator == "raw":
        spectrum = proc.psd
    else:
        spectrum = estimator_psd(proc.psd, d.eigenvalues, d.lambda1, args.depth or g.n)
    eps = args.epsilon if args.epsilon is not None else 0.1 * 10 ** (args.snr_db / 10)
    reports = [bound_report(spectrum, d, k, eps) for k in range(g.n)]
    with _output(args.out) as fh:
        write_reports(fh, reports)


def cmd_experiment(args):
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    if args.seed is not None:
        cfg.master_seed = args.seed
    log.info("seed=%d", cfg.master_seed)
    report = run_experiment(cfg, threads=args.threads)
    for msg in report.failures:
        log.warning(msg)
    with _output(args.out) as fh:
        report.write_csv(fh)


def cmd_gmrf_demo(args):
    _require_seed(args)
    demo = gmrf_field_demo(args.n, args.seed)
    log.info("rel_err_raw=%.4g rel_err_avg=%.4g", demo.rel_err_raw, demo.rel_err_avg)
    with _output(args.out) as fh:
        demo.write_csv(fh)


# --- parser -----------------------------------------------------------------


def _add_process_flags(p):
    p.add_argument("--psd", choices=("logspace", "flat", "gmrf"), default="logspace")
    p.add_argument("--mu", type=float, default=3.0)
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--a-factor", type=float, default=0.99, help="GMRF a = a_factor / lambda1")
    p.add_argument("--literal-dc", action="store_true", help="apply the logspace formula at the DC entry too")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergograph", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default: stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", parents=[common], help="generate a graph as JSON")
    p.add_argument("--family", choices=("cycle", "er", "sbm", "sensor", "covariance"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p-er", type=float, default=0.2)
    p.add_argument("--communities", type=int, default=4)
    p.add_argument("--p-in", type=float, default=0.6)
    p.add_argument("--p-out", type=float, default=0.1)
    p.add_argument("--rho-min", type=float, default=0.01)
    p.add_argument("--rho-max", type=float, default=1.0)
    p.add_argument("--thres-factor", type=float, default=1.75)
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_graph)

    shift_flag = argparse.ArgumentParser(add_help=False)
    shift_flag.add_argument("--graph", required=True)
    shift_flag.add_argument("--shift", choices=("default", "normalized"), default="default")

    p = sub.add_parser("spectrum", parents=[common, shift_flag], help="eigenvalues and regime")
    p.add_argument("--ratio-threshold", type=float, default=0.5)
    p.add_argument("--vectors", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sample", parents=[common, shift_flag], help="draw WSS signals")
    _add_process_flags(p)
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", parents=[common, shift_flag], help="estimate the ensemble mean")
    p.add_argument("--signal", required=True)
    p.add_argument("--estimator", choices=("shift_average", "optimal"), default="shift_average")
    p.add_argument("--depth", type=int)
    p.add_argument("--distributed", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bound", parents=[common, shift_flag], help="per-node Chebyshev bounds")
    _add_process_flags(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--estimator", choices=("shift_average", "optimal", "raw"), default="shift_average")
    p.add_argument("--depth", type=int)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("experiment", parents=[common], help="Monte-Carlo experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gmrf-demo", parents=[common], help="single GMRF field and its shift average")
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_gmrf_demo)
    return parser


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("ERGOGRAPH_LOG", "INFO").upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ErgographError, OSError, ValueError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"ergograph {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
