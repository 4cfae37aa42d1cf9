"""Command-line harness.

Subcommands:
  simulate  run a configured replication experiment and write result tables
  fit       run the real-data workflow on a CSV file and write a JSON report
  oracle    print the closed-form theory report for a simulation design

Exit codes: 0 success, 2 configuration error, 3 data error, 4 experiment aborted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .harness import (
    CsvFormatError,
    ExperimentAbortedError,
    ExperimentConfig,
    emit_tables,
    fit_real,
    load_csv,
    run_experiment,
)
from .model import DegenerateTailsError
from .oracle import theory_report
from .sampler import SimulationConfig, XiLaw, design_from_config
from .tuning import GridParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_ABORTED = 4

_REPLICATION_COLUMNS = ("rep", "estimator", "q", "mse", "auc", "tpr", "fpr", "n_q", "pi_q_hat")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ulasso", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a replication experiment")
    sim.add_argument("--config", type=Path, default=None,
                     help="JSON config file; flags override its keys")
    sim.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    sim.add_argument("--reps", type=int, required=True, help="replication count (mandatory)")
    sim.add_argument("--out", type=Path, required=True, help="output directory (mandatory)")
    sim.add_argument("--p", type=int, default=None)
    sim.add_argument("--rho", type=float, default=None)
    sim.add_argument("--xi-law", choices=["normal", "uniform"], default=None)
    sim.add_argument("--n-pop", type=int, default=None)
    sim.add_argument("--q", type=float, action="append", default=None,
                     help="tail fraction, repeatable")
    sim.add_argument("--supervised-size", type=int, action="append", default=None,
                     help="labeled subsample size, repeatable")
    sim.add_argument("--validation-size", type=int, default=None)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--format", choices=["csv", "json"], default="csv")

    fit = sub.add_parser("fit", help="fit the tail regression to a CSV dataset")
    fit.add_argument("--data", type=Path, required=True)
    fit.add_argument("--s-col", required=True)
    fit.add_argument("--y-col", default=None)
    fit.add_argument("--q", type=float, action="append", required=True)
    fit.add_argument("--log1p", action="append", default=[],
                     help="covariate column to transform as x -> log(1+x), repeatable")
    fit.add_argument("--standardize", action="store_true",
                     help="rescale covariate columns to unit variance")
    fit.add_argument("--out", type=Path, required=True, help="path of the JSON report")

    orc = sub.add_parser("oracle", help="print the theory report for a design")
    orc.add_argument("--p", type=int, required=True)
    orc.add_argument("--rho", type=float, default=0.0)
    orc.add_argument("--xi-law", choices=["normal", "uniform"], default="normal")
    orc.add_argument("--n-pop", type=int, default=100_000)
    orc.add_argument("--seed", type=int, required=True)
    orc.add_argument("--sigma", type=float, default=1.0,
                     help="surrogate noise standard deviation")
    orc.add_argument("--q", type=float, action="append", required=True)
    orc.add_argument("--out", type=Path, default=None)
    return parser


def _xi_law(name: str) -> XiLaw:
    return XiLaw.NORMAL_3_1 if name == "normal" else XiLaw.UNIFORM_2_5


_CONFIG_DEFAULTS = {
    "p": 20,
    "rho": 0.0,
    "xi_law": "normal",
    "n_pop": 100_000,
    "q_values": [0.02],
    "supervised_sizes": [500],
    "validation_size": 100_000,
    "grid_points": 100,
    "grid_ratio": 1e-4,
}


def _experiment_config(args) -> ExperimentConfig:
    values = dict(_CONFIG_DEFAULTS)
    if args.config is not None:
        with open(args.config) as handle:
            loaded = json.load(handle)
        unknown = set(loaded) - set(values)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    if args.p is not None:
        values["p"] = args.p
    if args.rho is not None:
        values["rho"] = args.rho
    if args.xi_law is not None:
        values["xi_law"] = args.xi_law
    if args.n_pop is not None:
        values["n_pop"] = args.n_pop
    if args.q:
        values["q_values"] = args.q
    if args.supervised_size:
        values["supervised_sizes"] = args.supervised_size
    if args.validation_size is not None:
        values["validation_size"] = args.validation_size
    sim = SimulationConfig(
        p=int(values["p"]),
        rho=float(values["rho"]),
        xi_law=_xi_law(values["xi_law"]),
        n_pop=int(values["n_pop"]),
        seed=args.seed,
    )
    return ExperimentConfig(
        sim=sim,
        q_values=tuple(values["q_values"]),
        supervised_sizes=tuple(values["supervised_sizes"]),
        n_replications=args.reps,
        validation_size=int(values["validation_size"]),
        seed=args.seed,
        output_path=str(args.out),
        grid=GridParams(n_points=int(values["grid_points"]), ratio=float(values["grid_ratio"])),
    )


def _json_dump(payload, path: Path) -> None:
    with path.open("w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _cmd_simulate(args) -> int:
    try:
        cfg = _experiment_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(cfg, workers=args.workers)
    except ExperimentAbortedError as exc:
        print(f"experiment aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_tables(result.rows, args.format, out)
    with (out / "replications.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_REPLICATION_COLUMNS)
        for rec in result.replications:
            writer.writerow([
                "" if rec[c] is None else (repr(rec[c]) if isinstance(rec[c], float) else rec[c])
                for c in _REPLICATION_COLUMNS
            ])
    summary = {
        "config": {
            "p": cfg.sim.p,
            "rho": cfg.sim.rho,
            "xi_law": cfg.sim.xi_law.value,
            "n_pop": cfg.sim.n_pop,
            "q_values": list(cfg.q_values),
            "supervised_sizes": list(cfg.supervised_sizes),
            "n_replications": cfg.n_replications,
            "validation_size": cfg.validation_size,
            "seed": cfg.seed,
        },
        "failures": result.failures,
        "rows": [
            {
                "setting": row.setting,
                "rho": row.rho,
                "q": row.q,
                "p": row.p,
                "estimator": row.estimator,
                "mse": row.mse,
                "re_vs": row.re_vs,
                "auc": row.auc,
                "tpr": row.tpr,
                "fpr": row.fpr,
                "n_q": row.n_q,
                "pi_q_hat": row.pi_q_hat,
            }
            for row in result.rows
        ],
    }
    _json_dump(summary, out / "summary.json")
    return EXIT_OK


def _cmd_fit(args) -> int:
    try:
        ds = load_csv(
            args.data,
            s_column=args.s_col,
            y_column=args.y_col,
            log1p_columns=tuple(args.log1p),
            standardize=args.standardize,
        )
    except (CsvFormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        report = fit_real(ds, args.q)
    except DegenerateTailsError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _json_dump(report, args.out)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    try:
        sim = SimulationConfig(
            p=args.p,
            rho=args.rho,
            xi_law=_xi_law(args.xi_law),
            n_pop=args.n_pop,
            seed=args.seed,
        )
        spec = design_from_config(sim, surrogate_noise_sd=args.sigma)
        reports = {repr(q): theory_report(spec, q) for q in args.q}
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = json.dumps(reports, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        args.out.write_text(text + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "fit":
        return _cmd_fit(args)
    return _cmd_oracle(args)


if __name__ == "__main__":
    sys.exit(main())
