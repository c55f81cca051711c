"""Versioned binary file formats and run manifests.

Model file ("SNET"): magic bytes, format version (u32 LE), m and n (u64 LE),
then the weight matrix row-major, the input biases, and the hidden biases as
little-endian float64. A text sidecar at <path>.meta records seed,
hyperparameters, and training-sample count as sorted `key = value` lines.

Feature file ("FEAT"): magic, version u32, rows u64, dim u64, values
row-major float64 LE; labels live in a <path>.labels sidecar, one integer
per line.

Classifier file ("RDGE"): magic, version u32, dim u64, lambda f64 LE, then
beta ((dim+1) x 4) row-major float64 LE.

All writers are byte-deterministic for identical inputs; manifests are the
one place timestamps appear.
"""

from __future__ import annotations

import hashlib
import json
import struct
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .core import ModelParams
from .errors import DataError, NumericError
from .features import FeatureMatrix
from .classifier import NUM_CLASSES, RidgeClassifier

MODEL_MAGIC = b"SNET"
MODEL_VERSION = 1
FEATURE_MAGIC = b"FEAT"
FEATURE_VERSION = 1
CLASSIFIER_MAGIC = b"RDGE"
CLASSIFIER_VERSION = 1


def _f64le(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def save_model(path: str, params: ModelParams, metadata: dict) -> None:
    params.validate_finite()
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_VERSION))
        fh.write(struct.pack("<QQ", params.m, params.n))
        fh.write(_f64le(params.w))
        fh.write(_f64le(params.a))
        fh.write(_f64le(params.b))
    with open(str(path) + ".meta", "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(metadata):
            fh.write(f"{key} = {metadata[key]}\n")


def load_model(path: str) -> tuple[ModelParams, dict]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MODEL_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, not a model file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != MODEL_VERSION:
            raise DataError(f"{path}: unsupported model format version {version}")
        m, n = struct.unpack("<QQ", fh.read(16))
        m, n = int(m), int(n)
        body = fh.read()
    expect = 8 * (n * (m + n) + (m + n) + n)
    if len(body) != expect:
        raise DataError(f"{path}: truncated model file ({len(body)} of {expect} body bytes)")
    flat = np.frombuffer(body, dtype="<f8").astype(np.float64)
    w = flat[:n * (m + n)].reshape(n, m + n).copy()
    a = flat[n * (m + n):n * (m + n) + m + n].copy()
    b = flat[n * (m + n) + m + n:].copy()
    params = ModelParams(w=w, a=a, b=b, m=m, n=n)
    try:
        params.validate_finite()
    except NumericError as exc:
        raise DataError(f"{path}: {exc}") from None
    meta = {}
    try:
        with open(str(path) + ".meta", "r", encoding="utf-8") as fh:
            for line in fh:
                if " = " in line:
                    key, val = line.rstrip("\n").split(" = ", 1)
                    meta[key] = val
    except FileNotFoundError:
        pass
    return params, meta


def save_features(path: str, features: FeatureMatrix) -> None:
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<I", FEATURE_VERSION))
        fh.write(struct.pack("<QQ", features.rows, features.dim))
        fh.write(_f64le(features.values))
    with open(str(path) + ".labels", "w", encoding="utf-8", newline="\n") as fh:
        for label in features.labels:
            fh.write(f"{int(label)}\n")


def load_features(path: str) -> FeatureMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FEATURE_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, not a feature file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FEATURE_VERSION:
            raise DataError(f"{path}: unsupported feature format version {version}")
        rows, dim = struct.unpack("<QQ", fh.read(16))
        rows, dim = int(rows), int(dim)
        body = fh.read()
    if len(body) != 8 * rows * dim:
        raise DataError(f"{path}: truncated feature file")
    values = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(rows, dim)
    try:
        with open(str(path) + ".labels", "r", encoding="utf-8") as fh:
            labels = np.array([int(line) for line in fh if line.strip()], dtype=np.int64)
    except FileNotFoundError:
        raise DataError(f"{path}.labels: missing labels sidecar") from None
    if labels.shape[0] != rows:
        raise DataError(f"{path}.labels: {labels.shape[0]} labels for {rows} rows")
    return FeatureMatrix(values=values, labels=labels)


def export_features_csv(path: str, features: FeatureMatrix) -> None:
    """Plain-text dump for inspection: label, then the feature values."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("label," + ",".join(f"f{i}" for i in range(features.dim)) + "\n")
        for r in range(features.rows):
            # float() first: repr of a numpy scalar is "np.float64(0.4)".
            row = ",".join(repr(float(v)) for v in features.values[r])
            fh.write(f"{int(features.labels[r])},{row}\n")


def save_classifier(path: str, clf: RidgeClassifier) -> None:
    with open(path, "wb") as fh:
        fh.write(CLASSIFIER_MAGIC)
        fh.write(struct.pack("<I", CLASSIFIER_VERSION))
        fh.write(struct.pack("<Q", clf.dim))
        fh.write(struct.pack("<d", clf.lam))
        fh.write(_f64le(clf.beta))


def load_classifier(path: str) -> RidgeClassifier:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CLASSIFIER_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, not a classifier file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CLASSIFIER_VERSION:
            raise DataError(f"{path}: unsupported classifier format version {version}")
        (dim,) = struct.unpack("<Q", fh.read(8))
        (lam,) = struct.unpack("<d", fh.read(8))
        dim = int(dim)
        body = fh.read()
    if len(body) != 8 * (dim + 1) * NUM_CLASSES:
        raise DataError(f"{path}: truncated classifier file")
    beta = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(dim + 1, NUM_CLASSES)
    return RidgeClassifier(beta=beta, lam=lam, dim=dim, residual=float("nan"))


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path: str, command: str, config: dict, inputs: list,
                   artifacts: list, started: datetime, extra: dict | None = None) -> None:
    """Record what a command did: config snapshot, input/artifact digests."""
    manifest = {
        "tool": "statenet",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {p: sha256_file(p) for p in inputs},
        "artifacts": {p: sha256_file(p) for p in artifacts},
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
