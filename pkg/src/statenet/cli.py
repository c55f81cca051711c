"""Command-line interface.

Subcommands: ingest, train, featurize, fit, evaluate, reproduce, rollback.
Every artifact-producing command writes a run manifest (config snapshot plus
content digests of inputs and outputs) next to its output.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numeric error.

Hyperparameters resolve in four layers, later layers winning: built-in
defaults, then a --scale preset, then a --config file, then explicit flags.
Config files are flat text, one `key = value` per line, `#` comments; keys
are the ExperimentConfig field names (`lambda` is accepted for `lam`).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, classifier, core, encoding, modelio, synth
from .errors import (ConfigError, DataError, DimensionError, NumericError,
                     StatenetError)
from .experiment import (SCALE_PRESETS, ExperimentConfig, WindowAccumulator,
                         reproduce, write_telemetry)
from .features import FeatureMode, featurize_stream
from .rng import derive_seed

log = logging.getLogger("statenet.cli")

_CONFIG_ALIASES = {"lambda": "lam", "window": "telemetry_window", "d": "density"}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def read_config_file(path: str) -> dict:
    """Flat `key = value` lines into ExperimentConfig field overrides."""
    valid = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected `key = value`")
            key, val = (part.strip() for part in line.split("=", 1))
            key = _CONFIG_ALIASES.get(key, key)
            if key not in valid:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _parse_config_value(key, val, f"{path}:{lineno}")
    return out


def _parse_config_value(key: str, val: str, where: str):
    try:
        if key in ("m", "n", "unsup_samples", "sup_samples", "trials",
                   "seed", "telemetry_window"):
            return int(val)
        if key in ("r_x", "r_h", "density", "lam"):
            return float(val)
        if key == "feature_mode":
            return FeatureMode.parse(val)
        if key == "update_source":
            return core.UpdateSource.parse(val)
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    raise ConfigError(f"{where}: unknown key {key!r}")


def resolve_config(args) -> ExperimentConfig:
    layers = {}
    if getattr(args, "scale", None):
        layers.update(SCALE_PRESETS[args.scale])
    if getattr(args, "config", None):
        layers.update(read_config_file(args.config))
    for name in ("m", "n", "r_x", "r_h", "density", "unsup_samples",
                 "sup_samples", "trials", "seed", "lam", "telemetry_window"):
        val = getattr(args, name, None)
        if val is not None:
            layers[name] = val
    if getattr(args, "feature_mode", None) is not None:
        layers["feature_mode"] = FeatureMode.parse(args.feature_mode)
    if getattr(args, "update_source", None) is not None:
        layers["update_source"] = core.UpdateSource.parse(args.update_source)
    cfg = ExperimentConfig(**layers)
    cfg.validate()
    return cfg


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--scale", choices=sorted(SCALE_PRESETS),
                   help="preset tier; config file and flags override it")
    p.add_argument("--m", type=int, help="input dimension (vocabulary size)")
    p.add_argument("--n", type=int, help="state dimension")
    p.add_argument("--r-x", dest="r_x", type=float, help="input learning rate")
    p.add_argument("--r-h", dest="r_h", type=float, help="state learning rate")
    p.add_argument("--density", type=float, help="target state density")
    p.add_argument("--unsup", dest="unsup_samples", type=int,
                   help="unsupervised samples per trial")
    p.add_argument("--sup", dest="sup_samples", type=int,
                   help="supervised samples per trial")
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--seed", type=int, help="run seed")
    p.add_argument("--lambda", dest="lam", type=float, help="ridge penalty")
    p.add_argument("--feature-mode", choices=["average", "final"],
                   help="per-sample feature: mean state or final state")
    p.add_argument("--update-source", choices=["prev", "next"],
                   help="state vector that gates weight updates")
    p.add_argument("--window", dest="telemetry_window", type=int,
                   help="telemetry window size in steps")


def _load_dataset(path: str, fmt: str, m: int, split: str) -> encoding.Dataset:
    vocab = encoding.vocabulary_for(m)
    return encoding.ingest(path, fmt, vocab=vocab, split=split)


def cmd_ingest(args) -> int:
    started = _utcnow()
    vocab = encoding.vocabulary_for(args.m if args.m is not None else 96)
    dataset = encoding.ingest(args.input, args.format, vocab=vocab,
                              split=args.split)
    encoding.export_jsonl(dataset, args.out)
    modelio.write_manifest(
        args.out + ".manifest.json", "ingest",
        {"format": args.format, "split": args.split, "m": vocab.size},
        [args.input], [args.out], started,
        extra={"samples": len(dataset)})
    log.info("ingested %d samples -> %s", len(dataset), args.out)
    return 0


def cmd_train(args) -> int:
    started = _utcnow()
    cfg = resolve_config(args)
    dataset = _load_dataset(args.data, args.format, cfg.m, "train")
    samples = dataset.samples[:args.take] if args.take else dataset.samples
    if not samples:
        raise DataError(f"{args.data}: no samples to train on")

    params = core.init_params(cfg.m, cfg.n, cfg.seed)
    lcfg = cfg.learning()
    h = core.zero_state(cfg.n)
    acc = WindowAccumulator(window=cfg.telemetry_window, n=cfg.n)
    for sample in samples:
        se, ie, act = core.train_text_stream(params, lcfg, sample.chars, h)
        acc.feed(se, ie, act)
    records = acc.finish()

    modelio.save_model(args.out, params, {
        "m": cfg.m, "n": cfg.n,
        "r_x": repr(cfg.r_x), "r_h": repr(cfg.r_h),
        "density": repr(cfg.density),
        "update_source": cfg.update_source.value,
        "seed": cfg.seed,
        "trained_samples": len(samples),
        "vocabulary": encoding.vocabulary_for(cfg.m).description,
    })
    artifacts = [args.out, args.out + ".meta"]
    if args.telemetry:
        write_telemetry(args.telemetry, records)
        artifacts.append(args.telemetry)
    modelio.write_manifest(args.out + ".manifest.json", "train",
                           cfg.as_dict(), [args.data], artifacts, started,
                           extra={"trained_samples": len(samples)})
    log.info("trained on %d samples (%d steps) -> %s",
             len(samples), sum(len(s) for s in samples), args.out)
    return 0


def cmd_featurize(args) -> int:
    started = _utcnow()
    params, _meta = modelio.load_model(args.model)
    dataset = _load_dataset(args.data, args.format, params.m, "featurize")
    feats = featurize_stream(params, dataset.samples, FeatureMode.parse(args.mode))
    modelio.save_features(args.out, feats)
    artifacts = [args.out, args.out + ".labels"]
    if args.csv:
        modelio.export_features_csv(args.csv, feats)
        artifacts.append(args.csv)
    modelio.write_manifest(args.out + ".manifest.json", "featurize",
                           {"mode": args.mode}, [args.model, args.data],
                           artifacts, started,
                           extra={"rows": feats.rows, "dim": feats.dim})
    log.info("featurized %d samples (dim %d) -> %s", feats.rows, feats.dim, args.out)
    return 0


def cmd_fit(args) -> int:
    started = _utcnow()
    feats = modelio.load_features(args.features)
    clf = classifier.fit(feats, args.lam if args.lam is not None else 1.0)
    modelio.save_classifier(args.out, clf)
    modelio.write_manifest(args.out + ".manifest.json", "fit",
                           {"lambda": clf.lam}, [args.features], [args.out],
                           started, extra={"residual": clf.residual})
    log.info("fit ridge on %d rows, residual %.2e -> %s",
             feats.rows, clf.residual, args.out)
    return 0


def cmd_evaluate(args) -> int:
    started = _utcnow()
    clf = modelio.load_classifier(args.classifier)
    feats = modelio.load_features(args.features)
    predicted = classifier.predict(clf, feats)
    acc = classifier.accuracy(predicted, feats.labels)
    report = {"accuracy": acc, "rows": feats.rows,
              "correct": int(np.count_nonzero(predicted == feats.labels))}
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    modelio.write_manifest(args.out + ".manifest.json", "evaluate", {},
                           [args.classifier, args.features], [args.out],
                           started, extra=report)
    print(f"accuracy {acc:.4f} ({report['correct']}/{report['rows']})")
    return 0


def _synthetic_pair(cfg: ExperimentConfig, test_count: int):
    spec = synth.default_spec(cfg.m)
    vocab = encoding.vocabulary_for(cfg.m)
    need = cfg.trials * (cfg.unsup_samples + cfg.sup_samples)
    train = synth.synth_dataset(need, cfg.seed, spec, vocab, split="train")
    test = synth.synth_dataset(test_count, cfg.seed, spec, vocab, split="test")
    return train, test


def cmd_reproduce(args) -> int:
    started = _utcnow()
    cfg = resolve_config(args)
    if args.synthetic:
        train_set, test_set = _synthetic_pair(cfg, args.synthetic_test)
        inputs = []
    else:
        if not args.train or not args.test:
            raise ConfigError("--train and --test are required unless --synthetic")
        train_set = _load_dataset(args.train, args.format, cfg.m, "train")
        test_set = _load_dataset(args.test, args.format, cfg.m, "test")
        inputs = [args.train, args.test]

    report = reproduce(cfg, train_set, test_set, args.out_dir,
                       jobs=args.jobs,
                       run_model=not args.baseline_only,
                       run_baseline=not args.model_only,
                       save_models=not args.no_models,
                       raw_telemetry=args.raw_telemetry)

    artifacts = [os.path.join(args.out_dir, "report.json"),
                 os.path.join(args.out_dir, "report.csv")]
    for row in report["trials"]:
        for key in ("telemetry", "model"):
            if key in row:
                artifacts.append(os.path.join(args.out_dir, row[key]))
                if key == "model":
                    artifacts.append(os.path.join(args.out_dir, row[key]) + ".meta")
    modelio.write_manifest(
        os.path.join(args.out_dir, "manifest.json"), "reproduce",
        dict(report["config"], synthetic=bool(args.synthetic), jobs=args.jobs),
        inputs, artifacts, started,
        extra={"summary": report["summary"]})

    _print_report(report)
    return 0


def _print_report(report: dict) -> None:
    summary = report["summary"]
    has_model = "model_mean" in summary
    has_baseline = "baseline_mean" in summary
    header = ["trial"]
    if has_model:
        header.append("model")
    if has_baseline:
        header.append("baseline")
    print("  ".join(f"{h:>8}" for h in header))
    for row in report["trials"]:
        cells = [f"{row['trial']:>8}"]
        if has_model:
            flag = "*" if row.get("collapsed") else ""
            cells.append(f"{row['model_accuracy']:>7.4f}{flag or ' '}")
        if has_baseline:
            cells.append(f"{row['baseline_accuracy']:>8.4f}")
        print("  ".join(cells))
    line = ["    mean"]
    if has_model:
        line.append(f"{summary['model_mean']:>7.4f} ")
    if has_baseline:
        line.append(f"{summary['baseline_mean']:>8.4f}")
    print("  ".join(line))
    if summary.get("collapsed_trials"):
        print(f"({summary['collapsed_trials']} trial(s) collapsed to a dead state)")


def cmd_rollback(args) -> int:
    if args.depth < 1:
        raise ConfigError("rollback depth must be >= 1")
    params, _meta = modelio.load_model(args.model)
    vocab = encoding.vocabulary_for(params.m)

    lines = []
    if args.text is not None:
        if not args.text:
            raise DataError("empty text")
        chars = vocab.encode_text(args.text)
        states = [core.zero_state(params.n)]
        for c in chars:
            x = np.zeros(params.m, dtype=np.uint8)
            x[c] = 1
            states.append(core.step(params, x, states[-1]))
        steps = len(chars)
        if args.depth > steps:
            raise ConfigError(
                f"depth {args.depth} exceeds the {steps} recorded steps")
        lines.append(f"ran {steps} characters; rolling back {args.depth} "
                     f"step(s) from the final state")
        recons = core.rollback(params, states[-1], args.depth)
        for j, (x_rec, h_rec) in enumerate(recons, start=1):
            true_char = int(chars[steps - j])
            true_x = np.zeros(params.m, dtype=np.uint8)
            true_x[true_char] = 1
            true_h = states[steps - j]
            active = np.flatnonzero(x_rec)
            chars_txt = "".join(vocab.chars[i] for i in active) or "(none)"
            lines.append(
                f"depth {j}: true char {vocab.chars[true_char]!r}; "
                f"reconstructed input positions {list(map(int, active))} "
                f"{chars_txt!r} (err {core.hamming(x_rec, true_x)}); "
                f"state agreement {params.n - core.hamming(h_rec, true_h)}"
                f"/{params.n}")
    else:
        bits = args.state_bits.strip()
        if len(bits) != params.n or set(bits) - {"0", "1"}:
            raise DataError(
                f"state must be exactly {params.n} characters of 0/1")
        h = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
        lines.append(f"rolling back {args.depth} step(s) from the given state")
        recons = core.rollback(params, h.copy(), args.depth)
        for j, (x_rec, h_rec) in enumerate(recons, start=1):
            active = np.flatnonzero(x_rec)
            chars_txt = "".join(vocab.chars[i] for i in active) or "(none)"
            lines.append(
                f"depth {j}: reconstructed input positions "
                f"{list(map(int, active))} {chars_txt!r}; "
                f"state actives {int(np.count_nonzero(h_rec))}/{params.n}")

    text = "\n".join(lines)
    print(text)
    if args.out:
        started = _utcnow()
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
        modelio.write_manifest(args.out + ".manifest.json", "rollback",
                               {"depth": args.depth}, [args.model],
                               [args.out], started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="statenet",
                     description="Binary-state sequence model tools")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress logging")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("ingest", help="convert a dataset to canonical JSONL")
    p.add_argument("--in", dest="input", required=True, help="source file")
    p.add_argument("--format", choices=sorted(encoding.FORMATS),
                   default="agnews-csv")
    p.add_argument("--out", required=True, help="canonical JSONL path")
    p.add_argument("--split", default="train", help="split name to record")
    p.add_argument("--m", type=int, default=None,
                   help="vocabulary size the samples will be encoded for")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a model over a sample file")
    p.add_argument("--data", required=True, help="canonical JSONL samples")
    p.add_argument("--format", choices=sorted(encoding.FORMATS),
                   default="canonical-jsonl")
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--take", type=int, default=None,
                   help="train on only the first N samples")
    p.add_argument("--telemetry", default=None,
                   help="write windowed telemetry CSV here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("featurize", help="extract per-sample state features")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=sorted(encoding.FORMATS),
                   default="canonical-jsonl")
    p.add_argument("--out", required=True, help="feature file path")
    p.add_argument("--mode", choices=["average", "final"], default="average")
    p.add_argument("--csv", default=None, help="also export readable CSV here")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("fit", help="fit the ridge classifier on features")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="classifier file path")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="score a classifier on features")
    p.add_argument("--classifier", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("reproduce",
                       help="full pipeline: trials, baseline, report")
    p.add_argument("--train", default=None, help="training samples")
    p.add_argument("--test", default=None, help="test samples")
    p.add_argument("--format", choices=sorted(encoding.FORMATS),
                   default="canonical-jsonl")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes across trials")
    p.add_argument("--baseline-only", action="store_true")
    p.add_argument("--model-only", action="store_true")
    p.add_argument("--no-models", action="store_true",
                   help="skip writing model files")
    p.add_argument("--raw-telemetry", action="store_true",
                   help="also dump per-step telemetry (large)")
    p.add_argument("--synthetic", action="store_true",
                   help="generate a deterministic synthetic corpus instead "
                        "of reading --train/--test")
    p.add_argument("--synthetic-test", type=int, default=2000,
                   help="test samples to generate with --synthetic")
    _add_config_flags(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("rollback",
                       help="reconstruct past inputs from a model state")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", default=None,
                       help="run this text through the frozen model first")
    group.add_argument("--state-bits", default=None,
                       help="start from this 0/1 state string instead")
    p.add_argument("-k", "--depth", type=int, default=1,
                   help="how many steps to roll back")
    p.add_argument("--out", default=None,
                   help="also write the trace (and a manifest) here")
    p.set_defaults(func=cmd_rollback)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"statenet: {exc}", file=sys.stderr)
        return 1
    except (DataError, DimensionError, FileNotFoundError, IsADirectoryError,
            PermissionError) as exc:
        print(f"statenet: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"statenet: {exc}", file=sys.stderr)
        return 3
    except StatenetError as exc:
        print(f"statenet: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
