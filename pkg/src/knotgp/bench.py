"""Dataset ingestion, experiment orchestration and result persistence.

An experiment fits a roster of models to repeated random train/test splits
of one CSV dataset. Predictors and targets are standardized by training-set
statistics; metrics are always computed back on the original target scale.
Every random choice descends from the experiment seed, so a rerun with the
same configuration reproduces the numbers exactly.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import full_gp, metrics as metrics_mod
from .adadelta import OptimizerConfig, maximize
from .common import PredictiveDistribution
from .kernels import KernelParams
from .selection import OATConfig, kmeans_init, oat_select, simultaneous_optimize

logger = logging.getLogger(__name__)

KNOT_SELECTIONS = ("OAT-BO", "OAT-RS", "Simult", "none")
APPROXIMATIONS = ("VFE", "FIC", "FullGP")

RESULT_COLUMNS = ("run", "model_id", "mnlp", "srmse", "aukl", "log10_aukl",
                  "seconds", "knots")


# -- tables and datasets -------------------------------------------------------

@dataclass
class Table:
    columns: dict
    n_rows: int


def load_csv(path, predictor_columns, target_column, filter_rules=()) -> Table:
    """Parse the needed columns of a headered CSV and apply row filters.

    Each filter rule is (column, comparator, value) with comparator one of
    ==, !=, <, <=, >, >=. Non-numeric cells in a used column are reported by
    row and column name.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    needed = list(dict.fromkeys(list(predictor_columns) + [target_column]
                                + [rule[0] for rule in filter_rules]))
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        header = [name.strip() for name in header]
        missing = [name for name in needed if name not in header]
        if missing:
            raise ValueError(f"columns {missing} not found in {path} header {header}")
        positions = {name: header.index(name) for name in needed}
        raw = {name: [] for name in needed}
        for row_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            for name, pos in positions.items():
                try:
                    raw[name].append(float(row[pos]))
                except (ValueError, IndexError):
                    cell = row[pos] if pos < len(row) else "<missing>"
                    raise ValueError(
                        f"non-numeric cell {cell!r} at row {row_number}, "
                        f"column {name!r} of {path}"
                    ) from None
    columns = {name: np.asarray(values) for name, values in raw.items()}
    n_rows = len(next(iter(columns.values()))) if columns else 0
    if n_rows == 0:
        raise ValueError(f"{path} contains a header but no data rows")
    for name, values in columns.items():
        if not np.all(np.isfinite(values)):
            raise ValueError(f"column {name!r} contains non-finite values")

    comparators = {
        "==": np.equal, "!=": np.not_equal, "<": np.less,
        "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
    }
    keep = np.ones(n_rows, dtype=bool)
    for column, op, value in filter_rules:
        if op not in comparators:
            raise ValueError(f"unknown comparator {op!r} in filter rule")
        keep &= comparators[op](columns[column], float(value))
    columns = {name: values[keep] for name, values in columns.items()}
    return Table(columns, int(np.sum(keep)))


@dataclass
class Dataset:
    """A standardized train/test split with inverse-transform metadata."""

    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray            # standardized, same transform as y_train
    y_test_original: np.ndarray
    x_mean: np.ndarray
    x_sd: np.ndarray
    y_mean: float
    y_sd: float
    train_indices: np.ndarray
    test_indices: np.ndarray

    def to_original_scale(self, pred: PredictiveDistribution) -> PredictiveDistribution:
        return PredictiveDistribution(
            pred.latent_mean * self.y_sd + self.y_mean,
            pred.latent_variance * self.y_sd ** 2,
            pred.noisy_variance * self.y_sd ** 2,
        )


def split_and_standardize(table: Table, predictor_columns, target_column,
                          fraction: float, run_seed) -> Dataset:
    """Shuffle, split, and center/scale by training-set statistics."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"split fraction must lie in (0, 1), got {fraction}")
    x_all = np.column_stack([table.columns[name] for name in predictor_columns])
    y_all = table.columns[target_column]
    n = table.n_rows
    rng = np.random.default_rng(run_seed)
    perm = rng.permutation(n)
    n_train = int(round(fraction * n))
    if n_train < 2 or n - n_train < 1:
        raise ValueError(f"split fraction {fraction} leaves too few rows on one side")
    train_idx, test_idx = perm[:n_train], perm[n_train:]

    x_mean = x_all[train_idx].mean(axis=0)
    x_sd = x_all[train_idx].std(axis=0)
    for j, name in enumerate(predictor_columns):
        if x_sd[j] <= 1e-12 * (abs(x_mean[j]) + 1.0):
            raise ValueError(f"predictor column {name!r} is constant on the training split")
    y_mean = float(y_all[train_idx].mean())
    y_sd = float(y_all[train_idx].std())
    if y_sd <= 0.0:
        raise ValueError(f"target column {target_column!r} is constant on the training split")

    return Dataset(
        x_train=(x_all[train_idx] - x_mean) / x_sd,
        y_train=(y_all[train_idx] - y_mean) / y_sd,
        x_test=(x_all[test_idx] - x_mean) / x_sd,
        y_test=(y_all[test_idx] - y_mean) / y_sd,
        y_test_original=y_all[test_idx].copy(),
        x_mean=x_mean, x_sd=x_sd, y_mean=y_mean, y_sd=y_sd,
        train_indices=train_idx, test_indices=test_idx,
    )


# -- configuration --------------------------------------------------------------

@dataclass(frozen=True)
class RosterEntry:
    model_id: str
    knot_selection: str            # OAT-BO | OAT-RS | Simult | none
    approximation: str             # VFE | FIC | FullGP
    knot_init: str = "kmeans"      # kmeans | from-model:<id>

    def __post_init__(self):
        if self.knot_selection not in KNOT_SELECTIONS:
            raise ValueError(f"unknown knot_selection {self.knot_selection!r}")
        if self.approximation not in APPROXIMATIONS:
            raise ValueError(f"unknown approximation {self.approximation!r}")
        if self.approximation == "FullGP" and self.knot_selection != "none":
            raise ValueError("a FullGP entry must use knot_selection 'none'")
        if not (self.knot_init == "kmeans" or self.knot_init.startswith("from-model:")):
            raise ValueError(f"unknown knot_init {self.knot_init!r}")


@dataclass
class ExperimentConfig:
    dataset_path: str
    predictor_columns: list
    target_column: str
    filter_rules: list = field(default_factory=list)
    split_fraction: float = 0.8
    n_runs: int = 5
    rng_seed: int = 0
    model_roster: list = field(default_factory=list)
    oat: OATConfig = field(default_factory=OATConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    output_dir: str = "results"
    init_params: KernelParams = field(default_factory=lambda: KernelParams(1.0, 1.0, 0.1))
    record_timing: bool = True

    def __post_init__(self):
        ids = [entry.model_id for entry in self.model_roster]
        if len(set(ids)) != len(ids):
            raise ValueError("model roster ids must be unique")
        seen = set()
        for entry in self.model_roster:
            if entry.knot_init.startswith("from-model:"):
                ref = entry.knot_init.split(":", 1)[1]
                if ref not in seen:
                    raise ValueError(
                        f"model {entry.model_id!r} references {ref!r}, which is not "
                        "an earlier roster entry"
                    )
            seen.add(entry.model_id)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        roster = [RosterEntry(**entry) for entry in raw.get("model_roster", [])]
        oat_raw = dict(raw.get("oat", {}))
        oat_raw.setdefault("rng_seed", raw.get("rng_seed", 0))
        init = raw.get("init_params", {})
        params = KernelParams(
            init.get("signal_variance", 1.0),
            init.get("lengthscale", 1.0),
            init.get("noise_variance", 0.1),
            latent_jitter=init.get("latent_jitter"),
        )
        return cls(
            dataset_path=raw["dataset_path"],
            predictor_columns=list(raw["predictor_columns"]),
            target_column=raw["target_column"],
            filter_rules=[tuple(rule) for rule in raw.get("filter_rules", [])],
            split_fraction=raw.get("split_fraction", 0.8),
            n_runs=raw.get("n_runs", 5),
            rng_seed=raw.get("rng_seed", 0),
            model_roster=roster,
            oat=OATConfig(**oat_raw),
            optimizer=OptimizerConfig(**raw.get("optimizer", {})),
            output_dir=raw.get("output_dir", "results"),
            init_params=params,
            record_timing=raw.get("record_timing", True),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as handle:
            return cls.from_dict(json.load(handle))


@dataclass
class RunResult:
    run_index: int
    model_id: str
    metrics: metrics_mod.MetricReport | None
    final_params: KernelParams | None
    final_knots: np.ndarray | None
    trace: dict = field(default_factory=dict)
    failed: bool = False
    error: str | None = None


# -- model fitting ---------------------------------------------------------------

@dataclass
class _FittedModel:
    predictive_original: PredictiveDistribution
    objective: float
    params: KernelParams
    knots: np.ndarray | None
    seconds: float
    history: list                   # [{"knots": k, "objective": v}, ...]
    is_full_gp: bool = False
    selection: dict | None = None   # full OAT trace, when one exists


def _fit_full_gp_entry(dataset: Dataset, init_params: KernelParams,
                       optimizer_config: OptimizerConfig) -> _FittedModel:
    start = time.perf_counter()

    def fg(vec):
        p = init_params.with_log_vector(vec)
        model = full_gp.fit_full(dataset.x_train, dataset.y_train, p)
        return full_gp.log_marginal_likelihood(model, with_grad=True)

    res = maximize(fg, init_params.log_vector(), optimizer_config)
    params = init_params.with_log_vector(res.x)
    model = full_gp.fit_full(dataset.x_train, dataset.y_train, params)
    pred = full_gp.predict_full(model, dataset.x_test)
    seconds = time.perf_counter() - start
    return _FittedModel(dataset.to_original_scale(pred), res.fun, params, None,
                        seconds, [{"knots": 0, "objective": res.fun}], is_full_gp=True)


def _fit_oat_entry(entry: RosterEntry, dataset: Dataset, init_params: KernelParams,
                   oat_config: OATConfig, optimizer_config: OptimizerConfig,
                   seed: int) -> _FittedModel:
    proposal = "bo" if entry.knot_selection == "OAT-BO" else "rs"
    objective = "vfe" if entry.approximation == "VFE" else "fic"
    config = OATConfig(
        initial_knot_count=oat_config.initial_knot_count,
        max_knots=oat_config.max_knots,
        proposal=proposal,
        objective=objective,
        improvement_tol=oat_config.improvement_tol,
        rs_subset_size=oat_config.rs_subset_size,
        bo_budget=oat_config.bo_budget,
        bo_initial_design=oat_config.bo_initial_design,
        rng_seed=seed,
    )
    start = time.perf_counter()
    model, trace = oat_select(dataset.x_train, dataset.y_train, init_params, config,
                              optimizer_config)
    seconds = time.perf_counter() - start
    pred = model.predict(dataset.x_test)
    history = [{"knots": step.knot_count, "objective": step.objective_after}
               for step in trace.steps]
    return _FittedModel(dataset.to_original_scale(pred), model.objective(),
                        model.params, model.knots.locations, seconds, history,
                        selection=trace.to_dict())


def _fit_simult_entry(entry: RosterEntry, dataset: Dataset, init_params: KernelParams,
                      optimizer_config: OptimizerConfig, seed: int,
                      fitted: dict, roster: list) -> _FittedModel:
    objective = "vfe" if entry.approximation == "VFE" else "fic"
    if entry.knot_init.startswith("from-model:"):
        source = fitted[entry.knot_init.split(":", 1)[1]]
        knots0 = source.knots.copy()
        params0 = source.params
    else:
        # knot count follows the OAT-BO model of the same run
        source_id = None
        for other in roster:
            if other.model_id == entry.model_id:
                break
            if other.knot_selection == "OAT-BO" and other.approximation == entry.approximation:
                source_id = other.model_id
        if source_id is None:
            for other in roster:
                if other.model_id == entry.model_id:
                    break
                if other.knot_selection == "OAT-BO":
                    source_id = other.model_id
        if source_id is None or source_id not in fitted:
            raise ValueError(
                f"model {entry.model_id!r} needs an earlier OAT-BO entry to set its knot count"
            )
        k = fitted[source_id].knots.shape[0]
        knots0 = kmeans_init(dataset.x_train, k, seed)
        params0 = init_params
    start = time.perf_counter()
    model, res = simultaneous_optimize(dataset.x_train, dataset.y_train, params0,
                                       knots0, objective, optimizer_config)
    seconds = time.perf_counter() - start
    pred = model.predict(dataset.x_test)
    history = [{"knots": knots0.shape[0], "objective": float(v)} for v in res.trace]
    return _FittedModel(dataset.to_original_scale(pred), res.fun, model.params,
                        model.knots.locations, seconds, history)


def run_experiment(config: ExperimentConfig):
    """Fit the whole roster on every run; returns (results, all_succeeded)."""
    table = load_csv(config.dataset_path, config.predictor_columns,
                     config.target_column, config.filter_rules)
    master = np.random.SeedSequence(config.rng_seed)
    run_sequences = master.spawn(config.n_runs)
    results: list[RunResult] = []
    all_ok = True

    for run_index, run_seq in enumerate(run_sequences):
        split_seed, *model_seeds = run_seq.spawn(1 + len(config.model_roster))
        dataset = split_and_standardize(table, config.predictor_columns,
                                        config.target_column, config.split_fraction,
                                        split_seed)
        fitted: dict[str, _FittedModel] = {}
        for entry, model_seq in zip(config.model_roster, model_seeds):
            logger.info("run %d: fitting %s", run_index, entry.model_id)
            model_seed = int(model_seq.generate_state(1)[0])
            try:
                if entry.approximation == "FullGP":
                    outcome = _fit_full_gp_entry(dataset, config.init_params,
                                                 config.optimizer)
                elif entry.knot_selection in ("OAT-BO", "OAT-RS"):
                    outcome = _fit_oat_entry(entry, dataset, config.init_params,
                                             config.oat, config.optimizer, model_seed)
                elif entry.knot_selection == "Simult":
                    outcome = _fit_simult_entry(entry, dataset, config.init_params,
                                                config.optimizer, model_seed, fitted,
                                                config.model_roster)
                else:
                    raise ValueError(
                        f"entry {entry.model_id!r}: knot_selection 'none' is only "
                        "valid for FullGP"
                    )
            except Exception as err:  # noqa: BLE001 - a failed model must not kill the run
                logger.exception("run %d: model %s failed", run_index, entry.model_id)
                results.append(RunResult(run_index, entry.model_id, None, None, None,
                                         {}, failed=True, error=str(err)))
                all_ok = False
                continue
            fitted[entry.model_id] = outcome
            report = metrics_mod.MetricReport(
                mnlp=metrics_mod.mnlp(outcome.predictive_original, dataset.y_test_original),
                srmse=metrics_mod.srmse(outcome.predictive_original, dataset.y_test_original),
                train_seconds=outcome.seconds,
                knot_count=0 if outcome.knots is None else outcome.knots.shape[0],
            )
            trace_payload = {
                "history": outcome.history,
                "objective": outcome.objective,
                "objective_before": outcome.history[0]["objective"]
                if outcome.history else None,
            }
            if outcome.selection is not None:
                trace_payload["selection"] = outcome.selection
            results.append(RunResult(run_index, entry.model_id, report,
                                     outcome.params, outcome.knots, trace_payload))

        full_entry = next((m for m in fitted.values() if m.is_full_gp), None)
        if full_entry is not None:
            for result in results:
                if result.run_index != run_index or result.failed or result.metrics is None:
                    continue
                outcome = fitted.get(result.model_id)
                if outcome is None or outcome.is_full_gp:
                    continue
                value = metrics_mod.aukl(full_entry.predictive_original,
                                         outcome.predictive_original)
                result.metrics.aukl = value
                result.metrics.log10_aukl = float(np.log10(value)) if value > 0 else None

    emit_results(results, config.output_dir, record_timing=config.record_timing)
    return results, all_ok


# -- persistence -----------------------------------------------------------------

def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(results, output_dir, record_timing: bool = True):
    """Write the flat results CSV, one trace JSON per (run, model), and a
    plain-text summary of per-model means. With ``record_timing`` off the
    seconds cells stay empty so reruns are byte-identical."""
    if not results:
        raise ValueError("no results to emit")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    traces = out / "traces"
    traces.mkdir(exist_ok=True)

    rows = []
    for result in results:
        rep = result.metrics
        rows.append({
            "run": result.run_index,
            "model_id": result.model_id,
            "mnlp": None if rep is None else rep.mnlp,
            "srmse": None if rep is None else rep.srmse,
            "aukl": None if rep is None else rep.aukl,
            "log10_aukl": None if rep is None else rep.log10_aukl,
            "seconds": (rep.train_seconds if (rep is not None and record_timing)
                        else None),
            "knots": None if rep is None else rep.knot_count,
        })

    with open(out / "results.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row[col]) for col in RESULT_COLUMNS])

    def _scrub_seconds(node):
        if isinstance(node, dict):
            return {key: _scrub_seconds(value) for key, value in node.items()
                    if not key.endswith("_seconds")}
        if isinstance(node, list):
            return [_scrub_seconds(item) for item in node]
        return node

    for result in results:
        payload = {"run": result.run_index, "model_id": result.model_id,
                   "failed": result.failed, "error": result.error}
        payload.update(result.trace)
        if not record_timing:
            payload = _scrub_seconds(payload)
        name = f"run{result.run_index}_{result.model_id}.json"
        with open(traces / name, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)

    by_model: dict[str, list] = {}
    order = []
    for result in results:
        if result.model_id not in by_model:
            order.append(result.model_id)
        by_model.setdefault(result.model_id, []).append(result)
    lines = ["model_id  runs  mean_mnlp  mean_srmse  mean_aukl  mean_seconds  mean_knots  failures"]
    for model_id in order:
        group = by_model[model_id]
        good = [r.metrics for r in group if r.metrics is not None]
        failures = sum(1 for r in group if r.failed)

        def mean_of(values):
            values = [v for v in values if v is not None]
            return f"{np.mean(values):.6g}" if values else "-"

        lines.append("  ".join([
            model_id, str(len(group)),
            mean_of([m.mnlp for m in good]),
            mean_of([m.srmse for m in good]),
            mean_of([m.aukl for m in good]),
            mean_of([m.train_seconds for m in good]) if record_timing else "-",
            mean_of([float(m.knot_count) for m in good]),
            str(failures),
        ]))
    (out / "summary.txt").write_text("\n".join(lines) + "\n")


# -- demonstration pipelines -------------------------------------------------------

def spike_demo(seed: int = 0, out_dir=None, n_points: int = 200, n_knots: int = 5,
               n_grid: int = 401, noise_sd: float = 0.4, jitter_ratio: float = 1e-3):
    """Fit a five-knot variational model to 1-d data, then sweep the location
    of a sixth knot across the domain and record the objective.

    The sweep exhibits the duplicate-knot spikes: at each existing knot the
    objective drops sharply toward the five-knot baseline (a duplicate adds
    no new span, so the gain collapses to the tiny nugget-recovery effect),
    while generic locations gain substantially. The spike width grows with
    the latent nugget.

    Returns a dict with the sweep grid, objective values, the fixed knots,
    the no-sixth-knot baseline, and the objective at each fixed knot and at
    offsets of +/- 2% of the domain width; optionally writes ``spike.csv``.
    """
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.0, 1.0, n_points)).reshape(-1, 1)
    f = np.sin(2.0 * np.pi * x[:, 0]) + 0.5 * np.cos(5.0 * np.pi * x[:, 0])
    y = f + noise_sd * rng.standard_normal(n_points)
    y = (y - y.mean()) / y.std()

    init = KernelParams(1.0, 0.2, 0.1, latent_jitter=jitter_ratio)
    knots0 = kmeans_init(x, n_knots, rng.integers(2 ** 32))
    model, _ = simultaneous_optimize(x, y, init, knots0, "vfe",
                                     OptimizerConfig(max_steps=400))
    base = model.objective()
    knots = np.sort(model.knots.locations[:, 0])

    lo, hi = float(x.min()), float(x.max())
    width = hi - lo
    grid = np.linspace(lo, hi, n_grid)
    sweep = np.array([model.objective_with_added_knot([s]) for s in grid])

    offset = 0.02 * width
    at_knots = np.array([model.objective_with_added_knot([k]) for k in knots])
    above = np.array([model.objective_with_added_knot([k + offset]) for k in knots])
    below = np.array([model.objective_with_added_knot([k - offset]) for k in knots])

    result = {
        "grid": grid, "objective": sweep, "knots": knots,
        "baseline": base, "at_knots": at_knots, "plus_offset": above,
        "minus_offset": below, "domain_width": width, "model": model,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "spike.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["sixth_knot_location", "objective", "baseline"])
            for s, v in zip(grid, sweep):
                writer.writerow([repr(float(s)), repr(float(v)), repr(base)])
        with open(out / "spike_knots.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["knot", "objective_at", "objective_plus", "objective_minus"])
            for k, a, p, m in zip(np.sort(knots), at_knots, above, below):
                writer.writerow([repr(float(k)), repr(float(a)), repr(float(p)),
                                 repr(float(m))])
    return result


def synth_demo(seed: int = 0, out_dir=None, n_points: int = 300, max_knots: int = 30,
               noise_sd: float = 0.3):
    """The one-dimensional walkthrough: 300 synthetic points, an OAT-BO
    variational fit, and a simultaneous refinement started from it.

    Returns a dict with both fitted models, the selection trace, and grid
    predictions; optionally writes plot-ready CSVs.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, n_points).reshape(-1, 1)
    f = np.sin(2.0 * np.pi * x[:, 0]) + 0.5 * np.sin(6.0 * np.pi * x[:, 0])
    y = f + noise_sd * rng.standard_normal(n_points)
    y = (y - y.mean()) / y.std()

    config = OATConfig(initial_knot_count=5, max_knots=max_knots, proposal="bo",
                       objective="vfe", rng_seed=int(rng.integers(2 ** 32)))
    opt = OptimizerConfig(max_steps=300)
    oat_model, trace = oat_select(x, y, KernelParams(1.0, 0.2, 0.1), config, opt)
    refined, res = simultaneous_optimize(x, y, oat_model.params,
                                         oat_model.knots.locations, "vfe", opt)

    grid = np.linspace(0.0, 1.0, 201).reshape(-1, 1)
    oat_pred = oat_model.predict(grid)
    refined_pred = refined.predict(grid)

    result = {
        "x": x, "y": y, "oat_model": oat_model, "refined_model": refined,
        "trace": trace, "grid": grid[:, 0], "oat_pred": oat_pred,
        "refined_pred": refined_pred, "refinement": res,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "synth_fit.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["x", "oat_mean", "oat_var", "refined_mean", "refined_var"])
            for i, s in enumerate(grid[:, 0]):
                writer.writerow([repr(float(s)),
                                 repr(float(oat_pred.latent_mean[i])),
                                 repr(float(oat_pred.latent_variance[i])),
                                 repr(float(refined_pred.latent_mean[i])),
                                 repr(float(refined_pred.latent_variance[i]))])
        with open(out / "synth_trace.json", "w") as handle:
            json.dump(trace.to_dict(), handle, indent=2, sort_keys=True)
        with open(out / "synth_knots.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["oat_knot", "refined_knot"])
            for a, b in zip(np.sort(oat_model.knots.locations[:, 0]),
                            np.sort(refined.knots.locations[:, 0])):
                writer.writerow([repr(float(a)), repr(float(b))])
    return result
