"""Trial orchestration: data partitioning, training runs, and reports.

A run takes `trials` pairwise-disjoint blocks from a shuffled training set.
Each trial initializes fresh parameters from a trial-derived seed, makes a
single unsupervised pass over its block's first `unsup_samples` samples (the
state is never reset between samples), freezes the parameters, featurizes
the next `sup_samples` samples, fits the ridge classifier, and scores the
test set. A character-frequency baseline runs on the same supervised block.

Telemetry is windowed: per-step Hamming errors and state density are
averaged over `telemetry_window` consecutive steps and written as one CSV
row per window. Reports and telemetry contain no timestamps, so a repeated
run with the same config is byte-identical.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import classifier, modelio
from .core import LearningConfig, UpdateSource, init_params, train_text_stream, zero_state
from .encoding import Dataset, vocabulary_for
from .errors import ConfigError
from .features import FeatureMode, baseline_featurize, featurize_stream
from .rng import SplitMix64, derive_seed

log = logging.getLogger("statenet.experiment")


@dataclass
class ExperimentConfig:
    m: int = 96
    n: int = 4000
    r_x: float = 0.01
    r_h: float = 1e-6
    density: float = 0.1
    unsup_samples: int = 5000
    sup_samples: int = 5000
    trials: int = 5
    seed: int = 20240
    lam: float = 1.0
    feature_mode: FeatureMode = FeatureMode.AVERAGE_STATE
    update_source: UpdateSource = UpdateSource.PREV_STATE
    telemetry_window: int = 1000

    def learning(self) -> LearningConfig:
        return LearningConfig(r_x=self.r_x, r_h=self.r_h, density=self.density,
                              update_source=self.update_source)

    def validate(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ConfigError("m and n must be >= 1")
        for name in ("unsup_samples", "sup_samples", "trials", "telemetry_window"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed must be an integer")
        if not (np.isfinite(self.lam) and self.lam >= 0.0):
            raise ConfigError("lambda must be finite and >= 0")
        self.learning().validate()

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            out[f.name] = val.value if hasattr(val, "value") else val
        return out


# Cost tiers for the reproduction pipeline. micro finishes in seconds and
# exists for CI and oracle tests; small takes minutes; full matches the
# reference setup and takes hours.
SCALE_PRESETS = {
    "micro": dict(m=8, n=16, unsup_samples=10, sup_samples=10, trials=2,
                  telemetry_window=10),
    "small": dict(m=96, n=500, unsup_samples=1000, sup_samples=1000, trials=5,
                  telemetry_window=1000),
    "full": dict(m=96, n=4000, unsup_samples=5000, sup_samples=5000, trials=5,
                 telemetry_window=1000),
}


def preset_config(scale: str, **overrides) -> ExperimentConfig:
    if scale not in SCALE_PRESETS:
        raise ConfigError(f"unknown scale {scale!r}; choose from {sorted(SCALE_PRESETS)}")
    merged = dict(SCALE_PRESETS[scale])
    merged.update(overrides)
    return ExperimentConfig(**merged)


@dataclass(frozen=True)
class TelemetryRecord:
    """Windowed means; `step` is the 1-based index of the window's last step."""

    step: int
    state_err: float
    input_err: float
    density: float


@dataclass
class WindowAccumulator:
    """Accumulates per-step telemetry into fixed-size windows.

    Windows run across sample boundaries; a partial final window is emitted
    by finish() so no step goes unreported.
    """

    window: int
    n: int
    _records: list = field(default_factory=list)
    _steps: int = 0
    _fill: int = 0
    _se: int = 0
    _ie: int = 0
    _act: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError("telemetry window must be >= 1")

    def feed(self, state_err: np.ndarray, input_err: np.ndarray, active: np.ndarray) -> None:
        pos = 0
        total = len(state_err)
        while pos < total:
            take = min(self.window - self._fill, total - pos)
            self._se += int(state_err[pos:pos + take].sum())
            self._ie += int(input_err[pos:pos + take].sum())
            self._act += int(active[pos:pos + take].sum())
            self._fill += take
            self._steps += take
            pos += take
            if self._fill == self.window:
                self._emit()

    def _emit(self) -> None:
        count = self._fill
        self._records.append(TelemetryRecord(
            step=self._steps,
            state_err=self._se / count,
            input_err=self._ie / count,
            density=self._act / (count * self.n),
        ))
        self._fill = self._se = self._ie = self._act = 0

    def finish(self) -> list:
        if self._fill:
            self._emit()
        return list(self._records)


def write_telemetry(path: str, records: list) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,state_err,input_err,density\n")
        for rec in records:
            fh.write(f"{rec.step},{rec.state_err!r},{rec.input_err!r},{rec.density!r}\n")


def load_telemetry(path: str) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip() != "step,state_err,input_err,density":
            raise ConfigError(f"{path}: not a telemetry file")
        for line in fh:
            step, se, ie, dens = line.rstrip("\n").split(",")
            records.append(TelemetryRecord(int(step), float(se), float(ie), float(dens)))
    return records


def detect_collapse(record: TelemetryRecord, density_target: float) -> bool:
    """A window whose mean density fell below 1% of the target is a dead state."""
    return record.density < 0.01 * density_target


@dataclass
class TrialData:
    index: int
    unsup: list
    sup: list


@dataclass
class TrialResult:
    trial: int
    accuracy: float
    telemetry_path: str | None
    collapsed: bool
    elapsed: float
    model_path: str | None = None


def partition_trials(train_set: Dataset, cfg: ExperimentConfig) -> list:
    """Disjoint contiguous blocks of a seeded shuffle, one block per trial.

    Trial i's block is independent of how many trials follow it, so results
    for a given trial index are stable under changes to cfg.trials.
    """
    block = cfg.unsup_samples + cfg.sup_samples
    need = cfg.trials * block
    if len(train_set) < need:
        raise ConfigError(
            f"training set has {len(train_set)} samples; "
            f"{cfg.trials} trials x {block} need {need}")
    order = list(range(len(train_set)))
    SplitMix64(derive_seed(cfg.seed, 0)).shuffle(order)
    out = []
    for i in range(cfg.trials):
        chunk = order[i * block:(i + 1) * block]
        samples = [train_set[j] for j in chunk]
        out.append(TrialData(index=i,
                             unsup=samples[:cfg.unsup_samples],
                             sup=samples[cfg.unsup_samples:]))
    return out


def trial_seed(cfg: ExperimentConfig, trial_index: int) -> int:
    # Index 0 of the run seed's derivation space belongs to the partition
    # shuffle; trials start at 1.
    return derive_seed(cfg.seed, trial_index + 1)


def run_trial(cfg: ExperimentConfig, trial: TrialData, test_set: Dataset, *,
              telemetry_path: str | None = None,
              model_path: str | None = None,
              raw_telemetry_path: str | None = None) -> TrialResult:
    cfg.validate()
    t0 = time.perf_counter()
    params = init_params(cfg.m, cfg.n, trial_seed(cfg, trial.index))
    lcfg = cfg.learning()

    h = zero_state(cfg.n)
    acc = WindowAccumulator(window=cfg.telemetry_window, n=cfg.n)
    raw = [] if raw_telemetry_path else None
    for sample in trial.unsup[:cfg.unsup_samples]:
        se, ie, act = train_text_stream(params, lcfg, sample.chars, h)
        acc.feed(se, ie, act)
        if raw is not None:
            raw.append((se, ie, act))
    records = acc.finish()

    collapsed = False
    for rec in records:
        if detect_collapse(rec, cfg.density):
            if not collapsed:
                log.warning("trial %d: state density %.2g at step %d is below "
                            "1%% of target %.2g (collapsed representation)",
                            trial.index, rec.density, rec.step, cfg.density)
            collapsed = True

    if telemetry_path:
        write_telemetry(telemetry_path, records)
    if raw_telemetry_path:
        _write_raw_telemetry(raw_telemetry_path, raw, cfg.n)

    feats = featurize_stream(params, trial.sup[:cfg.sup_samples], cfg.feature_mode)
    clf = classifier.fit(feats, cfg.lam)
    test_feats = featurize_stream(params, test_set.samples, cfg.feature_mode)
    predicted = classifier.predict(clf, test_feats)
    score = classifier.accuracy(predicted, test_feats.labels)

    if model_path:
        modelio.save_model(model_path, params, {
            "m": cfg.m, "n": cfg.n,
            "r_x": repr(cfg.r_x), "r_h": repr(cfg.r_h),
            "density": repr(cfg.density),
            "update_source": cfg.update_source.value,
            "seed": trial_seed(cfg, trial.index),
            "trained_samples": len(trial.unsup[:cfg.unsup_samples]),
            "vocabulary": vocabulary_for(cfg.m).description,
        })

    elapsed = time.perf_counter() - t0
    log.info("trial %d: accuracy %.4f (%.1fs)%s", trial.index, score, elapsed,
             " [collapsed]" if collapsed else "")
    return TrialResult(trial=trial.index, accuracy=score,
                       telemetry_path=telemetry_path, collapsed=collapsed,
                       elapsed=elapsed, model_path=model_path)


def _write_raw_telemetry(path: str, chunks: list, n: int) -> None:
    step = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,state_err,input_err,density\n")
        for se, ie, act in chunks:
            for k in range(len(se)):
                step += 1
                fh.write(f"{step},{int(se[k])},{int(ie[k])},{int(act[k]) / n!r}\n")


def run_baseline_trial(cfg: ExperimentConfig, trial: TrialData,
                       test_set: Dataset) -> TrialResult:
    """Character-frequency features + the same ridge fit, no model at all."""
    cfg.validate()
    t0 = time.perf_counter()
    feats = baseline_featurize(trial.sup[:cfg.sup_samples], vocab_size=cfg.m)
    clf = classifier.fit(feats, cfg.lam)
    test_feats = baseline_featurize(test_set.samples, vocab_size=cfg.m)
    score = classifier.accuracy(classifier.predict(clf, test_feats), test_feats.labels)
    elapsed = time.perf_counter() - t0
    log.info("trial %d baseline: accuracy %.4f (%.1fs)", trial.index, score, elapsed)
    return TrialResult(trial=trial.index, accuracy=score, telemetry_path=None,
                       collapsed=False, elapsed=elapsed)


def _model_trial_job(args) -> TrialResult:
    cfg, trial, test_set, telemetry_path, model_path, raw_path = args
    return run_trial(cfg, trial, test_set, telemetry_path=telemetry_path,
                     model_path=model_path, raw_telemetry_path=raw_path)


def reproduce(cfg: ExperimentConfig, train_set: Dataset, test_set: Dataset,
              out_dir: str, *, jobs: int = 1, run_model: bool = True,
              run_baseline: bool = True, save_models: bool = True,
              raw_telemetry: bool = False) -> dict:
    """Run every trial for model and baseline and write the result table.

    Artifacts under out_dir: telemetry/trial_<i>.csv, models/trial_<i>.snet
    (with .meta sidecars), report.json, report.csv. Report paths are
    relative to out_dir and reports carry no timing, so two runs with the
    same config produce byte-identical artifacts.
    """
    cfg.validate()
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if not (run_model or run_baseline):
        raise ConfigError("nothing to run: model and baseline both disabled")
    trials_data = partition_trials(train_set, cfg)
    if run_model:
        os.makedirs(os.path.join(out_dir, "telemetry"), exist_ok=True)
        if save_models:
            os.makedirs(os.path.join(out_dir, "models"), exist_ok=True)
    else:
        os.makedirs(out_dir, exist_ok=True)

    model_results: dict[int, TrialResult] = {}
    if run_model:
        job_args = []
        for trial in trials_data:
            tel_rel = f"telemetry/trial_{trial.index}.csv"
            model_rel = f"models/trial_{trial.index}.snet" if save_models else None
            raw_rel = f"telemetry/trial_{trial.index}_raw.csv" if raw_telemetry else None
            job_args.append((
                cfg, trial, test_set,
                os.path.join(out_dir, tel_rel),
                os.path.join(out_dir, model_rel) if model_rel else None,
                os.path.join(out_dir, raw_rel) if raw_rel else None,
            ))
        if jobs > 1 and len(job_args) > 1:
            with ProcessPoolExecutor(max_workers=min(jobs, len(job_args))) as pool:
                for result in pool.map(_model_trial_job, job_args):
                    model_results[result.trial] = result
        else:
            for args in job_args:
                result = _model_trial_job(args)
                model_results[result.trial] = result

    baseline_results: dict[int, TrialResult] = {}
    if run_baseline:
        for trial in trials_data:
            result = run_baseline_trial(cfg, trial, test_set)
            baseline_results[result.trial] = result

    report = _build_report(cfg, trials_data, model_results, baseline_results,
                           save_models and run_model)
    _write_report(out_dir, report)
    return report


def _mean(values: list) -> float:
    return float(np.mean(np.asarray(values, dtype=np.float64)))


def _build_report(cfg, trials_data, model_results, baseline_results, with_models) -> dict:
    rows = []
    for trial in trials_data:
        i = trial.index
        row = {"trial": i}
        if model_results:
            row["model_accuracy"] = model_results[i].accuracy
            row["collapsed"] = model_results[i].collapsed
            row["telemetry"] = f"telemetry/trial_{i}.csv"
            if with_models:
                row["model"] = f"models/trial_{i}.snet"
        if baseline_results:
            row["baseline_accuracy"] = baseline_results[i].accuracy
        rows.append(row)
    summary: dict = {}
    if model_results:
        accs = [model_results[t.index].accuracy for t in trials_data]
        summary["model_mean"] = _mean(accs)
        summary["model_min"] = min(accs)
        summary["model_max"] = max(accs)
        summary["model_spread"] = max(accs) - min(accs)
        summary["collapsed_trials"] = sum(
            1 for t in trials_data if model_results[t.index].collapsed)
    if baseline_results:
        baccs = [baseline_results[t.index].accuracy for t in trials_data]
        summary["baseline_mean"] = _mean(baccs)
        summary["baseline_min"] = min(baccs)
        summary["baseline_max"] = max(baccs)
    return {
        "config": cfg.as_dict(),
        "vocabulary": vocabulary_for(cfg.m).description,
        "trials": rows,
        "summary": summary,
    }


def _write_report(out_dir: str, report: dict) -> None:
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cols = ["trial", "model_accuracy", "baseline_accuracy", "collapsed"]
    lines = [",".join(cols)]
    for row in report["trials"]:
        cells = []
        for col in cols:
            val = row.get(col, "")
            if isinstance(val, bool):
                cells.append("true" if val else "false")
            elif isinstance(val, float):
                cells.append(repr(val))
            else:
                cells.append(str(val))
        lines.append(",".join(cells))
    summary = report["summary"]
    mean_cells = ["mean",
                  repr(summary["model_mean"]) if "model_mean" in summary else "",
                  repr(summary["baseline_mean"]) if "baseline_mean" in summary else "",
                  ""]
    lines.append(",".join(mean_cells))
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
