"""Command line interface: simulation harnesses, file workflows, diagnostics.

Reports are machine readable (JSON by default, CSV per-replicate rows on
request). Given the same config and seed the non-timing content is
byte-identical across runs and thread counts; timings sit in their own section
so they can be dropped with --no-timings.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from ._sampling import child_seed
from .diagnostics import (
    _aligned_two_inf,
    assumption_report,
    coherence,
    condition_number,
    eigen_scaling_check,
    error_curve,
)
from .estimate import predsub_estimate, subsample_size
from .exceptions import PredsubError
from .graph import (
    degree_filter,
    generate_mmsb,
    load_edge_list,
    perturbed_model,
    sample_adjacency,
    uniform_subsample,
)
from .lowrank import LowRankP, relative_frob_error
from .spectral import ase, truncated_eigs
from .testing import predsub_test, puresub_test

_COMMANDS = ("simulate-estimate", "simulate-test", "estimate", "test", "diagnostics")
_METHODS = ("ase", "predsub", "puresub")
_CHECKS = ("coherence", "condition", "scaling", "assumptions", "error_curve")


@dataclass
class RunConfig:
    """Merged configuration for one CLI run (file values overridden by flags)."""

    command: str
    # model
    n: int = None
    d: int = None
    p: int = None
    rho: float = None
    alpha: float = 0.5
    epsilon: list = None
    # method
    method: str = "predsub"
    a: float = None
    m: int = None
    b: int = 200
    statistic: str = "frobenius"
    reps: int = 10
    noiseless: bool = False
    self_test: bool = False
    alpha_level: float = 0.05
    # io
    input: str = None
    input2: str = None
    output: str = None
    format: str = "json"
    min_degree: int = 0
    one_based: bool = False
    save_embedding: str = None
    # diagnostics
    checks: list = None
    trials: int = 100
    a_grid: list = None
    m_grid: list = None
    # run control
    seed: int = None
    threads: int = None
    no_timings: bool = False

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.seed is None:
            raise ValueError("seed is required; reports must be reproducible")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.format!r}")
        if self.threads is None:
            self.threads = int(os.environ.get("PREDSUB_THREADS", "1"))

    def resolve_m(self, n):
        """Explicit m wins; otherwise m = ceil((ln n)^(1+a))."""
        if self.m is not None:
            return int(self.m)
        if self.a is not None:
            return subsample_size(n, self.a)
        raise ValueError("either --m or --a is required for this command")


@dataclass
class RunReport:
    """Everything one run produced: config echo, per-replicate records,
    aggregates recomputable from those records, and (separately) timings."""

    command: str
    config: dict
    derived: dict
    records: list
    aggregates: dict
    timings: dict
    artifact_version: str = __version__

    def to_json(self, include_timings=True):
        payload = {
            "artifact_version": self.artifact_version,
            "command": self.command,
            "config": self.config,
            "derived": self.derived,
            "records": self.records,
            "aggregates": self.aggregates,
        }
        if include_timings:
            payload["timings"] = self.timings
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        """One row per record; columns are the sorted union of record keys."""
        keys = sorted({k for rec in self.records for k in rec})
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys)
        writer.writeheader()
        for rec in self.records:
            writer.writerow(rec)
        return buf.getvalue()


def _echo(config):
    """Config echo for reports. Thread count changes execution, never numbers,
    so it lives with the timings instead of here."""
    out = asdict(config)
    del out["threads"]
    return out


def _mean(xs):
    return sum(xs) / len(xs) if xs else 0.0


def _sd(xs):
    if len(xs) < 2:
        return 0.0
    mu = _mean(xs)
    return (sum((x - mu) ** 2 for x in xs) / (len(xs) - 1)) ** 0.5


def _model_from_config(config, key):
    for name in ("n", "d", "rho"):
        if getattr(config, name) is None:
            raise ValueError(f"--{name} is required for {config.command}")
    return generate_mmsb(
        config.n, config.d, config.rho, alpha=config.alpha,
        seed=child_seed(config.seed, key), p=config.p,
    )


def _estimate_once(method, source, model, m, d, seed, x_ref, noiseless):
    """One estimator run -> (record dict, seconds). Errors are against the
    exact model factorization."""
    t0 = time.perf_counter()
    if method == "ase":
        emb = ase(model.operator() if noiseless else source, d)
        seconds = time.perf_counter() - t0
        rel = relative_frob_error(LowRankP.from_embedding(emb), model)
        _, two_inf = _aligned_two_inf(emb, x_ref)
        rec = {"p_hat": emb.p, "relative_frobenius_error": rel, "two_inf_error": two_inf}
    elif method == "predsub":
        res = predsub_estimate(source, m, d, seed=seed)
        seconds = res.timings["total"]
        rel = relative_frob_error(LowRankP.from_embedding(res.embedding), model)
        sub_err, glob_err = _aligned_two_inf(res.embedding, x_ref, rows=res.subsample.indices)
        rec = {
            "p_hat": res.p_hat,
            "relative_frobenius_error": rel,
            "two_inf_error": glob_err,
            "two_inf_subsample_error": sub_err,
            "isolated_count": res.isolated_count,
        }
    else:  # puresub: embed the induced subgraph only
        index = uniform_subsample(model.n, m, child_seed(seed, 0))
        sub_source = (
            model.operator(index.indices) if noiseless else source.subgraph(index.indices)
        )
        emb = ase(sub_source, d)
        seconds = time.perf_counter() - t0
        rel = relative_frob_error(
            LowRankP.from_embedding(emb), model.restrict(index.indices)
        )
        w_err, _ = _aligned_two_inf(emb, x_ref[index.indices])
        rec = {"p_hat": emb.p, "relative_frobenius_error": rel, "two_inf_error": w_err}
    rec = {k: (float(v) if isinstance(v, (float, np.floating)) else int(v)) for k, v in rec.items()}
    return rec, seconds


def run_simulate_estimate(config):
    """Monte Carlo estimation benchmark: one model, ``reps`` sampled networks,
    error and timing per replicate in the shape of a results table row."""
    model = _model_from_config(config, 10)
    d = config.d
    m = config.resolve_m(config.n) if config.method != "ase" else None
    x_ref = model.factor().X

    records, gen_seconds, est_seconds = [], [], []
    for rep in range(config.reps):
        t0 = time.perf_counter()
        source = model if config.noiseless else sample_adjacency(model, child_seed(config.seed, 11, rep))
        gen_seconds.append(time.perf_counter() - t0)
        rec, seconds = _estimate_once(
            config.method, source, model, m, d, child_seed(config.seed, 12, rep),
            x_ref, config.noiseless,
        )
        rec["replicate"] = rep
        records.append(rec)
        est_seconds.append(seconds)

    errs = [r["relative_frobenius_error"] for r in records]
    aggregates = {
        "mean_relative_frobenius_error": _mean(errs),
        "sd_relative_frobenius_error": _sd(errs),
        "mean_two_inf_error": _mean([r["two_inf_error"] for r in records]),
        "reps": config.reps,
    }
    derived = {"m": m} if m is not None else {}
    timings = {
        "mean_generate_seconds": _mean(gen_seconds),
        "mean_estimate_seconds": _mean(est_seconds),
        "estimate_seconds": est_seconds,
    }
    return RunReport(config.command, _echo(config), derived, records, aggregates, timings)


def run_simulate_test(config):
    """Monte Carlo level/power table: for each epsilon, ``reps`` graph pairs
    and one bootstrap test each; rejection rate tabulated at alpha_level."""
    model = _model_from_config(config, 10)
    d = config.d
    m = config.resolve_m(config.n)
    eps_grid = config.epsilon if config.epsilon else [0.0]
    test_fn = puresub_test if config.method == "puresub" else predsub_test

    records, test_seconds = [], []
    for k, eps in enumerate(eps_grid):
        alt = perturbed_model(model, eps) if eps > 0 else model
        for rep in range(config.reps):
            g1 = sample_adjacency(model, child_seed(config.seed, 20, k, rep, 1))
            g2 = g1 if config.self_test else sample_adjacency(alt, child_seed(config.seed, 20, k, rep, 2))
            report = test_fn(
                g1, g2, m, d, b=config.b, statistic_kind=config.statistic,
                seed=child_seed(config.seed, 21, k, rep), threads=config.threads,
            )
            records.append({
                "epsilon": float(eps),
                "replicate": rep,
                "p_value": float(report.p_value),
                "t0": float(report.t0),
                "reject": bool(report.p_value <= config.alpha_level),
            })
            test_seconds.append(report.timings["total"])

    aggregates = {"alpha_level": config.alpha_level, "by_epsilon": {}}
    for eps in eps_grid:
        rows = [r for r in records if r["epsilon"] == float(eps)]
        aggregates["by_epsilon"][str(float(eps))] = {
            "rejection_rate": _mean([1.0 if r["reject"] else 0.0 for r in rows]),
            "mean_p_value": _mean([r["p_value"] for r in rows]),
            "reps": len(rows),
        }
    return RunReport(
        config.command, _echo(config), {"m": m}, records, aggregates,
        {"mean_test_seconds": _mean(test_seconds), "test_seconds": test_seconds},
    )


def _load_filtered(path, config):
    graph = load_edge_list(path, one_based=config.one_based)
    kept = np.arange(graph.n)
    if config.min_degree > 0:
        graph, mapping = degree_filter(graph, config.min_degree)
        kept = np.flatnonzero(mapping >= 0)
    return graph, kept


def run_estimate(config):
    """Estimate latent positions for a graph read from an edge list."""
    if not config.input:
        raise ValueError("--input is required for estimate")
    graph, kept = _load_filtered(config.input, config)
    d = config.d
    if d is None:
        raise ValueError("--d is required for estimate")

    if config.method == "ase":
        t0 = time.perf_counter()
        emb = ase(graph, d)
        seconds = time.perf_counter() - t0
        record = {"p_hat": emb.p, "q_hat": emb.q}
        x_out = emb.X
        timings = {"estimate_seconds": seconds}
    else:
        m = config.resolve_m(graph.n)
        res = predsub_estimate(graph, m, d, seed=child_seed(config.seed, 30))
        record = {
            "p_hat": res.p_hat,
            "q_hat": res.q_hat,
            "m": m,
            "isolated_count": res.isolated_count,
        }
        x_out = res.embedding.X
        timings = dict(res.timings)

    if config.save_embedding:
        np.save(config.save_embedding, x_out)
        record["embedding_path"] = config.save_embedding
    record.update({"n": graph.n, "num_edges": graph.num_edges, "nodes_kept": int(kept.size)})
    derived = {"m": record["m"]} if "m" in record else {}
    return RunReport(config.command, _echo(config), derived, [record],
                     {"n": graph.n, "num_edges": graph.num_edges}, timings)


def run_test(config):
    """Two-sample test between two edge-list graphs on their common nodes."""
    if not (config.input and config.input2):
        raise ValueError("--input and --input2 are required for test")
    if config.d is None:
        raise ValueError("--d is required for test")
    g1, kept1 = _load_filtered(config.input, config)
    g2, kept2 = _load_filtered(config.input2, config)
    # kept arrays hold original node ids; compare the graphs on the shared ids.
    common1 = np.intersect1d(kept1, kept2)
    if common1.size == 0:
        raise ValueError("the two graphs share no nodes after filtering")
    lookup1 = {int(v): i for i, v in enumerate(kept1)}
    lookup2 = {int(v): i for i, v in enumerate(kept2)}
    sub1 = g1.subgraph(np.array([lookup1[int(v)] for v in common1]))
    sub2 = g2.subgraph(np.array([lookup2[int(v)] for v in common1]))

    m = config.resolve_m(sub1.n)
    test_fn = puresub_test if config.method == "puresub" else predsub_test
    report = test_fn(
        sub1, sub2, m, config.d, b=config.b, statistic_kind=config.statistic,
        seed=child_seed(config.seed, 31), threads=config.threads,
    )
    record = {
        "p_value": float(report.p_value),
        "t0": float(report.t0),
        "reject": bool(report.p_value <= config.alpha_level),
        "n_common": int(common1.size),
        "b": report.b,
    }
    aggregates = {
        "p_value": record["p_value"],
        "normalizers": {k: (float(v) if isinstance(v, float) else v)
                        for k, v in report.normalizers.items()},
        "boot": [float(x) for x in report.boot],
    }
    return RunReport(config.command, _echo(config), {"m": m}, [record],
                     aggregates, dict(report.timings))


def _report_to_dict(rep):
    out = {"values": {k: float(v) for k, v in rep.values.items()},
           "flags": dict(rep.flags), "notes": dict(rep.notes), "curves": {}}
    for key, (x, y) in rep.curves.items():
        out["curves"][key] = {"x": [float(v) for v in x], "y": [float(v) for v in y]}
    return out


def run_diagnostics(config):
    """Run the selected theory diagnostics against a generated model."""
    model = _model_from_config(config, 40)
    d = config.d
    checks = config.checks if config.checks else list(_CHECKS)
    unknown = [c for c in checks if c not in _CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; available: {_CHECKS}")

    results, records = {}, []
    needs_m = {"scaling", "assumptions"} & set(checks)
    m = config.resolve_m(config.n) if needs_m else None

    if "coherence" in checks or "condition" in checks:
        pairs = truncated_eigs(model.operator(), d)
        if "coherence" in checks:
            val = coherence(pairs.vectors)
            results["coherence"] = {"value": val}
            records.append({"check": "coherence", "value": val})
        if "condition" in checks:
            val = condition_number(pairs.values)
            results["condition"] = {"value": val}
            records.append({"check": "condition", "value": val})
    if "scaling" in checks:
        rep = eigen_scaling_check(model, m, trials=config.trials, seed=child_seed(config.seed, 41))
        results["scaling"] = _report_to_dict(rep)
        records.append({"check": "scaling", "value": rep.values["max_deviation"]})
    if "assumptions" in checks:
        rep = assumption_report(model, m)
        results["assumptions"] = _report_to_dict(rep)
        records.append({"check": "assumptions", "value": float(rep.all_pass)})
    if "error_curve" in checks:
        rep = error_curve(
            model, d, a_grid=config.a_grid, reps=config.reps,
            seed=child_seed(config.seed, 42), m_grid=config.m_grid,
            noiseless=config.noiseless,
        )
        results["error_curve"] = _report_to_dict(rep)
        records.append({"check": "error_curve", "value": rep.values["slope_two_inf_subsample"]})

    derived = {"m": m} if m is not None else {}
    return RunReport(config.command, _echo(config), derived, records,
                     {"diagnostics": results}, {})


_RUNNERS = {
    "simulate-estimate": run_simulate_estimate,
    "simulate-test": run_simulate_test,
    "estimate": run_estimate,
    "test": run_test,
    "diagnostics": run_diagnostics,
}


def _float_list(text):
    return [float(tok) for tok in text.split(",") if tok != ""]


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok != ""]


def _str_list(text):
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="predsub",
        description="Scalable spectral estimation and two-sample testing for large networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--seed", type=int, help="master seed (required)")
        sp.add_argument("--threads", type=int, help="worker threads (or PREDSUB_THREADS)")
        sp.add_argument("--output", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"))
        sp.add_argument("--no-timings", action="store_true", default=None,
                        help="omit the timings section (byte-stable reports)")

    def add_model(sp):
        sp.add_argument("--n", type=int)
        sp.add_argument("--d", type=int)
        sp.add_argument("--p", type=int, help="positive eigenvalues of the mixing matrix")
        sp.add_argument("--rho", type=float)
        sp.add_argument("--alpha", type=float, help="Dirichlet concentration (default 0.5)")

    def add_method(sp):
        sp.add_argument("--method", choices=_METHODS)
        sp.add_argument("--a", type=float, help="subsample exponent: m = ceil((ln n)^(1+a))")
        sp.add_argument("--m", type=int, help="explicit subsample size (overrides --a)")
        sp.add_argument("--statistic", choices=("frobenius", "two_to_infinity"))
        sp.add_argument("--reps", type=int)

    sp = sub.add_parser("simulate-estimate", help="error/time benchmark on generated graphs")
    add_common(sp), add_model(sp), add_method(sp)
    sp.add_argument("--noiseless", action="store_true", default=None,
                    help="feed the exact model to the estimator (debug)")

    sp = sub.add_parser("simulate-test", help="level/power table on generated graph pairs")
    add_common(sp), add_model(sp), add_method(sp)
    sp.add_argument("--epsilon", type=_float_list, help="comma-separated perturbations")
    sp.add_argument("--b", type=int, help="bootstrap replicates per test")
    sp.add_argument("--alpha-level", type=float, help="decision level (default 0.05)")
    sp.add_argument("--self-test", action="store_true", default=None,
                    help="test each graph against itself (p should be 1)")

    sp = sub.add_parser("estimate", help="embed a graph from an edge list")
    add_common(sp), add_method(sp)
    sp.add_argument("--input", help="edge-list path")
    sp.add_argument("--d", type=int)
    sp.add_argument("--min-degree", type=int)
    sp.add_argument("--one-based", action="store_true", default=None)
    sp.add_argument("--save-embedding", help="write the n x d embedding as .npy")

    sp = sub.add_parser("test", help="two-sample test between two edge lists")
    add_common(sp), add_method(sp)
    sp.add_argument("--input", help="first edge-list path")
    sp.add_argument("--input2", help="second edge-list path")
    sp.add_argument("--d", type=int)
    sp.add_argument("--b", type=int)
    sp.add_argument("--alpha-level", type=float)
    sp.add_argument("--min-degree", type=int)
    sp.add_argument("--one-based", action="store_true", default=None)

    sp = sub.add_parser("diagnostics", help="theory regime checks on a generated model")
    add_common(sp), add_model(sp), add_method(sp)
    sp.add_argument("--checks", type=_str_list, help=f"subset of {','.join(_CHECKS)}")
    sp.add_argument("--trials", type=int, help="trials for the scaling check")
    sp.add_argument("--a-grid", type=_float_list)
    sp.add_argument("--m-grid", type=_int_list)
    sp.add_argument("--noiseless", action="store_true", default=None)

    return parser


def _merge_config(args):
    payload = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            payload = json.load(fh)
        if not isinstance(payload, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
    valid = {f.name for f in fields(RunConfig)}
    unknown = set(payload) - valid
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        payload[key] = value
    payload["command"] = args.command
    return RunConfig(**{k: v for k, v in payload.items() if k in valid})


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _merge_config(args)
        report = _RUNNERS[config.command](config)
        report.timings["threads"] = config.threads
        if config.format == "csv":
            text = report.to_csv()
        else:
            text = report.to_json(include_timings=not config.no_timings)
        if config.output:
            with open(config.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except (PredsubError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
