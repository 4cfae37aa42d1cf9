"""Experiment configuration, replication engine, CSV ingestion, and table emission.

Replications run in isolated RNG streams derived from (seed, replication
index), so results are bit-identical at any worker count. Aggregates are
computed from the per-replication log alone, never from streaming state.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extremes import estimate_pi_q
from .metrics import auc, combine_directions, mse_direction, normalize_direction, tpr_fpr
from .model import Dataset, Direction, Orientation
from .sampler import SimulationConfig, design_from_config, gen_population, rng_stream
from .solver import SolverError, logistic_lasso_fit
from .tuning import GridParams, fit_ulasso

__all__ = [
    "ExperimentAbortedError",
    "CsvFormatError",
    "ExperimentConfig",
    "ResultRow",
    "ExperimentResult",
    "run_experiment",
    "load_csv",
    "write_csv",
    "fit_real",
    "emit_tables",
]

logger = logging.getLogger(__name__)

_FAILURE_ABORT_FRACTION = 0.10
_SLASSO_GRID_POINTS = 50
_SLASSO_GRID_RATIO = 1e-3


class ExperimentAbortedError(RuntimeError):
    """More than the tolerated fraction of replications failed."""


class CsvFormatError(ValueError):
    """A CSV cell or column violated the expected schema."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experimental grid for one simulation setting."""

    sim: SimulationConfig
    q_values: tuple
    supervised_sizes: tuple
    n_replications: int
    validation_size: int
    seed: int
    output_path: str | None = None
    grid: GridParams = GridParams()

    def __post_init__(self):
        object.__setattr__(self, "q_values", tuple(float(q) for q in self.q_values))
        object.__setattr__(self, "supervised_sizes", tuple(int(n) for n in self.supervised_sizes))
        if not self.q_values:
            raise ValueError("q_values must be nonempty")
        if any(not (0.0 < q <= 1.0) for q in self.q_values):
            raise ValueError("q_values must lie in (0, 1]")
        if any(n < 2 or n > self.sim.n_pop for n in self.supervised_sizes):
            raise ValueError("supervised sizes must lie in [2, n_pop]")
        if self.n_replications < 1:
            raise ValueError("n_replications must be positive")
        if self.validation_size < 2:
            raise ValueError("validation_size must be at least 2")


@dataclass(frozen=True)
class ResultRow:
    """Aggregated metrics for one estimator in one setting."""

    setting: str
    rho: float
    q: float | None
    p: int
    estimator: str
    mse: float
    re_vs: dict = field(default_factory=dict)
    auc: float | None = None
    tpr: float | None = None
    fpr: float | None = None
    n_q: float | None = None
    pi_q_hat: float | None = None

    def __post_init__(self):
        for name in ("mse", "auc", "tpr", "fpr", "n_q", "pi_q_hat"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
        if self.auc is not None and not (0.0 <= self.auc <= 1.0):
            raise ValueError("auc must lie in [0, 1]")


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated rows plus the per-replication log they were computed from."""

    rows: list
    replications: list
    failures: list


def _logistic_bic_path(x: np.ndarray, y: np.ndarray, tol: float = 1e-7):
    """Supervised baseline: penalized logistic path scored by the logistic BIC.

    The score is the deviance per observation plus log(n)/n per selected
    coordinate; ties resolve to the larger penalty. Only converged fits are
    eligible.
    """
    n = x.shape[0]
    y_bar = y.mean()
    lam_max = float(np.abs((x - x.mean(axis=0)).T @ (y - y_bar)).max()) / n
    if lam_max <= 0.0:
        raise SolverError("degenerate supervised design: zero score at the null model")
    lams = lam_max * np.logspace(0.0, math.log10(_SLASSO_GRID_RATIO), num=_SLASSO_GRID_POINTS)
    best = None
    best_bic = math.inf
    beta_init = None
    b0_init = None
    for lam in lams:
        fit, b0 = logistic_lasso_fit(
            x, y, float(lam), tol=tol, beta_init=beta_init, intercept_init=b0_init
        )
        beta_init, b0_init = fit.beta_hat, b0
        if not fit.converged:
            continue
        nll_avg = fit.objective - fit.lam * float(np.abs(fit.beta_hat).sum())
        bic = 2.0 * nll_avg + math.log(n) / n * len(fit.support)
        if bic < best_bic:
            best_bic = bic
            best = (fit, b0)
    if best is None:
        raise SolverError("no converged supervised fit on the penalty grid")
    return best


def _validation_auc(direction: Direction, val: Dataset) -> float | None:
    if direction.degenerate:
        logger.warning("degenerate direction excluded from AUC")
        return None
    return auc(val.x @ direction.v, val.y)


def _replicate(cfg: ExperimentConfig, rep: int) -> list:
    """Run one replication; returns flat metric records."""
    spec = design_from_config(cfg.sim)
    pop = gen_population(spec, cfg.sim.n_pop, rng_stream(cfg.seed, "rep", rep, "population"))
    val = gen_population(spec, cfg.validation_size, rng_stream(cfg.seed, "rep", rep, "validation"))
    beta0_dir = normalize_direction(spec.beta0, spec.sigma_mat, spec.beta0)
    support_true = set(np.nonzero(spec.beta0)[0])
    records = []

    def record(estimator, q=None, mse=None, auc_val=None, tpr=None, fpr=None,
               n_q=None, pi_q_hat=None):
        records.append({
            "rep": rep,
            "estimator": estimator,
            "q": q,
            "mse": mse,
            "auc": auc_val,
            "tpr": tpr,
            "fpr": fpr,
            "n_q": n_q,
            "pi_q_hat": pi_q_hat,
        })

    per_q_dirs = []
    for q in cfg.q_values:
        fit, _, subset = fit_ulasso(pop, q, grid_params=cfg.grid)
        direction = normalize_direction(fit.beta_hat, spec.sigma_mat, spec.beta0)
        per_q_dirs.append(direction)
        tpr, fpr = tpr_fpr(fit.support, support_true, spec.p)
        record(
            f"ulasso_q{q:g}",
            q=q,
            mse=mse_direction(direction, beta0_dir),
            auc_val=_validation_auc(direction, val),
            tpr=tpr,
            fpr=fpr,
            n_q=subset.n_q,
            pi_q_hat=estimate_pi_q(subset),
        )

    usable = [d for d in per_q_dirs if not d.degenerate]
    combined = combine_directions(usable) if usable else Direction(
        v=np.zeros(spec.p), degenerate=True
    )
    record(
        "ulasso_combined",
        mse=mse_direction(combined, beta0_dir),
        auc_val=_validation_auc(combined, val),
    )

    for n_lab in cfg.supervised_sizes:
        idx = rng_stream(cfg.seed, "rep", rep, "labels", n_lab).choice(
            cfg.sim.n_pop, size=n_lab, replace=False
        )
        fit, _ = _logistic_bic_path(pop.x[idx], pop.y[idx])
        direction = normalize_direction(fit.beta_hat, spec.sigma_mat, spec.beta0)
        tpr, fpr = tpr_fpr(fit.support, support_true, spec.p)
        record(
            f"slasso_n{n_lab}",
            mse=mse_direction(direction, beta0_dir),
            auc_val=_validation_auc(direction, val),
            tpr=tpr,
            fpr=fpr,
        )

    alpha_dir = normalize_direction(spec.alpha0, spec.sigma_mat, spec.beta0)
    record(
        "alpha0_benchmark",
        mse=mse_direction(alpha_dir, beta0_dir),
        auc_val=_validation_auc(alpha_dir, val),
    )
    record(
        "beta0_oracle",
        mse=0.0,
        auc_val=_validation_auc(beta0_dir, val),
    )
    return records


def _replication_worker(args):
    cfg, rep = args
    try:
        return rep, _replicate(cfg, rep), None
    except Exception as exc:  # noqa: BLE001 - skip-and-log policy
        return rep, None, repr(exc)


def _mean_or_none(values: list) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run all replications, aggregate per-estimator means, attach RE maps.

    Failed replications are skipped and logged; the experiment aborts once
    more than 10% fail. Results are invariant to the worker count.
    """
    jobs = [(cfg, rep) for rep in range(cfg.n_replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_replication_worker, jobs))
    else:
        outcomes = [_replication_worker(job) for job in jobs]
    outcomes.sort(key=lambda item: item[0])

    replications = []
    failures = []
    for rep, records, error in outcomes:
        if error is not None:
            logger.warning("replication %d failed: %s", rep, error)
            failures.append({"rep": rep, "error": error})
        else:
            replications.extend(records)
    if len(failures) > _FAILURE_ABORT_FRACTION * cfg.n_replications:
        raise ExperimentAbortedError(
            f"{len(failures)} of {cfg.n_replications} replications failed"
        )

    setting = "I" if cfg.sim.xi_law.name == "NORMAL_3_1" else "II"
    by_estimator = {}
    for rec in replications:
        by_estimator.setdefault(rec["estimator"], []).append(rec)

    mse_means = {
        name: _mean_or_none([r["mse"] for r in recs])
        for name, recs in by_estimator.items()
    }
    rows = []
    for name, recs in by_estimator.items():
        re_vs = {}
        if name.startswith("ulasso"):
            own = mse_means[name]
            for other, other_mse in mse_means.items():
                if other != name and other_mse is not None and own:
                    re_vs[other] = other_mse / own
        rows.append(ResultRow(
            setting=setting,
            rho=cfg.sim.rho,
            q=recs[0]["q"],
            p=cfg.sim.p,
            estimator=name,
            mse=_mean_or_none([r["mse"] for r in recs]),
            re_vs=re_vs,
            auc=_mean_or_none([r["auc"] for r in recs]),
            tpr=_mean_or_none([r["tpr"] for r in recs]),
            fpr=_mean_or_none([r["fpr"] for r in recs]),
            n_q=_mean_or_none([r["n_q"] for r in recs]),
            pi_q_hat=_mean_or_none([r["pi_q_hat"] for r in recs]),
        ))
    rows.sort(key=lambda row: row.estimator)
    return ExperimentResult(rows=rows, replications=replications, failures=failures)


def load_csv(
    path,
    s_column: str,
    y_column: str | None = None,
    log1p_columns: tuple = (),
    standardize: bool = False,
) -> Dataset:
    """Read a headered CSV into a Dataset.

    All columns other than the surrogate and optional label columns become
    covariates, in header order. ``log1p_columns`` names covariate columns to
    transform as x -> log(1 + x); ``standardize`` rescales every covariate
    column to unit variance (zero-variance columns are left untouched).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise CsvFormatError(f"{path}: duplicate column names in header")
        if s_column not in header:
            raise CsvFormatError(f"{path}: missing surrogate column {s_column!r}")
        if y_column == s_column:
            raise CsvFormatError(f"{path}: surrogate and label columns must differ")
        if y_column is not None and y_column not in header:
            raise CsvFormatError(f"{path}: missing label column {y_column!r}")
        x_names = [c for c in header if c != s_column and c != y_column]
        if not x_names:
            raise CsvFormatError(f"{path}: no covariate columns")
        unknown = set(log1p_columns) - set(x_names)
        if unknown:
            raise CsvFormatError(f"{path}: log1p columns not among covariates: {sorted(unknown)}")
        col_index = {name: i for i, name in enumerate(header)}
        s_vals, y_vals, x_rows = [], [], []
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvFormatError(f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}")
            parsed = []
            for name in header:
                cell = row[col_index[name]]
                try:
                    value = float(cell) if "_" not in cell else math.nan
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    raise CsvFormatError(
                        f"{path}: row {row_num}, column {name!r}: non-numeric value {cell!r}"
                    )
                parsed.append(value)
            s_vals.append(parsed[col_index[s_column]])
            if y_column is not None:
                y_cell = parsed[col_index[y_column]]
                if y_cell not in (0.0, 1.0):
                    raise CsvFormatError(
                        f"{path}: row {row_num}, column {y_column!r}: label must be 0 or 1"
                    )
                y_vals.append(y_cell)
            x_rows.append([parsed[col_index[name]] for name in x_names])
    x = np.asarray(x_rows, dtype=float)
    for name in log1p_columns:
        j = x_names.index(name)
        if np.any(x[:, j] < 0.0):
            raise CsvFormatError(f"{path}: column {name!r} has negative values, log1p undefined")
        x[:, j] = np.log1p(x[:, j])
    if standardize:
        sd = x.std(axis=0)
        nz = sd > 0.0
        x[:, nz] /= sd[nz]
    return Dataset(x=x, s=np.asarray(s_vals), y=np.asarray(y_vals) if y_column else None)


def write_csv(ds: Dataset, path, s_column: str = "S", y_column: str = "Y",
              x_columns: list | None = None) -> None:
    """Write a Dataset back to the CSV schema accepted by load_csv."""
    if x_columns is None:
        x_columns = [f"X{j + 1}" for j in range(ds.p)]
    if len(x_columns) != ds.p:
        raise ValueError("x_columns must name every covariate column")
    header = [s_column] + ([y_column] if ds.y is not None else []) + list(x_columns)
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(ds.n_rows):
            row = [repr(float(ds.s[i]))]
            if ds.y is not None:
                row.append(repr(float(ds.y[i])))
            row.extend(repr(float(v)) for v in ds.x[i])
            writer.writerow(row)


def fit_real(
    ds: Dataset,
    q_values,
    grid: GridParams = GridParams(),
    tol: float = 1e-7,
) -> dict:
    """Real-data workflow: per-q tail fits, their combination, and the
    full-data surrogate-index baseline.

    Directions are oriented by positive inner product with the full-data
    least-squares direction of the surrogate on the covariates. Label-based
    quantities (pi_q_hat, auc) appear only when the dataset carries labels.
    """
    q_values = [float(q) for q in q_values]
    if not q_values:
        raise ValueError("q_values must be nonempty")
    x_t = ds.x - ds.x.mean(axis=0)
    s_t = ds.s - ds.s.mean()
    alpha_hat = np.linalg.lstsq(x_t, s_t, rcond=None)[0]
    identity = np.eye(ds.p)
    alpha_dir = normalize_direction(
        alpha_hat, identity, beta_ref=alpha_hat, orientation=Orientation.SURROGATE_ALPHA
    )
    report = {
        "n_rows": ds.n_rows,
        "p": ds.p,
        "alpha_direction": alpha_dir.v.tolist(),
        "q_fits": [],
    }
    directions = []
    for q in q_values:
        fit, trace, subset = fit_ulasso(ds, q, grid_params=grid, tol=tol)
        direction = normalize_direction(
            fit.beta_hat, identity, beta_ref=alpha_dir.v,
            orientation=Orientation.SURROGATE_ALPHA,
        )
        directions.append(direction)
        entry = {
            "q": q,
            "beta_hat": fit.beta_hat.tolist(),
            "lambda_selected": fit.lam,
            "support": sorted(fit.support),
            "n_q": subset.n_q,
            "delta_lo": subset.delta_lo,
            "delta_hi": subset.delta_hi,
            "bic_trace": {
                "lambdas": trace.lambdas.tolist(),
                "bic_values": trace.bic_values.tolist(),
                "selected_index": trace.selected_index,
            },
        }
        if ds.y is not None:
            entry["pi_q_hat"] = estimate_pi_q(subset)
            if not direction.degenerate:
                entry["auc"] = auc(ds.x @ fit.beta_hat, ds.y)
        report["q_fits"].append(entry)
    usable = [d for d in directions if not d.degenerate]
    combined = combine_directions(usable) if usable else Direction(
        v=np.zeros(ds.p), degenerate=True
    )
    report["combined"] = {
        "direction": combined.v.tolist(),
        "degenerate": combined.degenerate,
    }
    if ds.y is not None and not combined.degenerate:
        report["combined"]["auc"] = auc(ds.x @ combined.v, ds.y)
    return report


_TABLE_SCHEMAS = {
    "re": ("setting", "rho", "p", "q", "estimator", "reference", "re"),
    "auc": ("setting", "rho", "p", "q", "estimator", "auc"),
    "selection": ("setting", "rho", "p", "q", "estimator", "tpr", "fpr"),
}


def _table_records(rows: list, kind: str) -> list:
    records = []
    for row in rows:
        base = {"setting": row.setting, "rho": row.rho, "p": row.p,
                "q": row.q, "estimator": row.estimator}
        if kind == "re":
            for reference in sorted(row.re_vs):
                records.append({**base, "reference": reference, "re": row.re_vs[reference]})
        elif kind == "auc":
            if row.auc is not None:
                records.append({**base, "auc": row.auc})
        elif kind == "selection":
            if row.tpr is not None or row.fpr is not None:
                records.append({**base, "tpr": row.tpr, "fpr": row.fpr})
    return records


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_tables(rows: list, fmt: str, out_dir) -> list:
    """Write one file per table kind (RE, AUC, TPR/FPR); returns the paths.

    Column order follows the documented schemas; floats are written in
    shortest round-trip form so repeated runs are byte-identical.
    """
    if not rows:
        raise ValueError("emit_tables requires at least one result row")
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for kind, columns in _TABLE_SCHEMAS.items():
        records = _table_records(rows, kind)
        path = out_dir / f"table_{kind}.{fmt}"
        if fmt == "csv":
            with path.open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(columns)
                for rec in records:
                    writer.writerow([_format_cell(rec.get(c)) for c in columns])
        else:
            with path.open("w") as handle:
                json.dump(records, handle, indent=2, sort_keys=True)
                handle.write("\n")
        paths.append(path)
    return paths
