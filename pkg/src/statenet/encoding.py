"""Character vocabulary, one-hot encoding, and dataset ingestion.

The character set for the news experiment is the 96 ASCII code points 32
through 127 (space through DEL); anything outside maps to the fallback
character (space). Datasets are stored canonically as JSONL with one
{"label": int, "text": str} object per line, labels already remapped to
0..3 (World, Sports, Business, Sci/Tech).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParseError

TOPICS = ("World", "Sports", "Business", "Sci/Tech")
NUM_CLASSES = 4


@dataclass(frozen=True)
class Vocabulary:
    """Bijective character <-> index mapping with a fallback index.

    `lowercase` folds text case before lookup; it is off by default and
    recorded in run metadata whenever used.
    """

    chars: tuple
    fallback_index: int
    lowercase: bool = False
    description: str = "custom"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.chars)) != len(self.chars):
            raise ValueError("vocabulary characters must be distinct")
        if not (0 <= self.fallback_index < len(self.chars)):
            raise ValueError("fallback index out of range")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.chars)})

    @property
    def size(self) -> int:
        return len(self.chars)

    def encode_char(self, c: str) -> int:
        """Index of a character; unmapped characters go to the fallback."""
        if self.lowercase:
            c = c.lower()
        return self._index.get(c, self.fallback_index)

    def encode_text(self, text: str) -> np.ndarray:
        """Indices for every character of `text`, as int16."""
        if self.lowercase:
            text = text.lower()
        cps = np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32)
        if self._ascii_contiguous:
            out = np.where((cps >= 32) & (cps <= 127), cps - 32, self.fallback_index)
            return out.astype(np.int16)
        return np.array([self._index.get(c, self.fallback_index) for c in text],
                        dtype=np.int16)

    @property
    def _ascii_contiguous(self) -> bool:
        return self.description == "ascii-32-127"


def ascii_vocab(lowercase: bool = False) -> Vocabulary:
    """The 96-character vocabulary: ASCII 32..127, fallback = space."""
    return Vocabulary(chars=tuple(chr(c) for c in range(32, 128)),
                      fallback_index=0, lowercase=lowercase,
                      description="ascii-32-127")


def small_vocab(size: int) -> Vocabulary:
    """A reduced vocabulary for scaled-down runs: space plus 'a', 'b', ...

    Index 0 is space and the fallback; indices 1..size-1 are the first
    size-1 lowercase letters.
    """
    if not (2 <= size <= 27):
        raise ValueError("small vocabulary size must be in [2, 27]")
    chars = (" ",) + tuple(chr(ord("a") + i) for i in range(size - 1))
    return Vocabulary(chars=chars, fallback_index=0,
                      description=f"space+a..{chars[-1]}")


def vocabulary_for(m: int, lowercase: bool = False) -> Vocabulary:
    """The vocabulary matching an input dimension (96 -> ASCII, else reduced)."""
    if m == 96:
        return ascii_vocab(lowercase=lowercase)
    return small_vocab(m)


@dataclass
class Sample:
    """One labeled text sample with its encoded character indices."""

    label: int
    text: str
    chars: np.ndarray

    def __len__(self) -> int:
        return len(self.chars)


@dataclass
class Dataset:
    """An ordered collection of samples with a split tag."""

    samples: list
    split: str = "train"

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)


def make_sample(vocab: Vocabulary, label: int, text: str, where: str) -> Sample:
    if isinstance(label, bool) or not isinstance(label, int) or not (0 <= label < NUM_CLASSES):
        raise DataError(f"{where}: label must be an integer in [0, {NUM_CLASSES}), got {label!r}")
    if len(text) == 0:
        raise DataError(f"{where}: empty text field")
    return Sample(label=label, text=text, chars=vocab.encode_text(text))


def _sniff_delimiter(first_line: str) -> str:
    return "\t" if "\t" in first_line else ","


def _ingest_agnews_csv(path: str, vocab: Vocabulary, split: str) -> Dataset:
    """AG News CSV: class,title,description — or the 2-column label,text variant.

    Class labels 1..4 are remapped to 0..3. Title and description are joined
    with a single space. Tab or comma delimiting is auto-detected from the
    first line.
    """
    samples = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        head = fh.readline()
        if head == "":
            return Dataset(samples=[], split=split)
        fh.seek(0)
        reader = csv.reader(fh, delimiter=_sniff_delimiter(head))
        for rownum, row in enumerate(reader, start=1):
            where = f"{path}:{rownum}"
            if len(row) < 2:
                raise ParseError(f"{where}: expected at least 2 fields, got {len(row)}")
            try:
                raw_label = int(row[0])
            except ValueError:
                raise ParseError(f"{where}: class field {row[0]!r} is not an integer") from None
            if not (1 <= raw_label <= 4):
                raise DataError(f"{where}: class {raw_label} outside 1..4")
            if len(row) >= 3:
                text = row[1].strip() + " " + " ".join(f.strip() for f in row[2:])
                text = text.strip()
            else:
                text = row[1].strip()
            samples.append(make_sample(vocab, raw_label - 1, text, where))
    return Dataset(samples=samples, split=split)


def _ingest_jsonl(path: str, vocab: Vocabulary, split: str) -> Dataset:
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip() == "":
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "label" not in obj or "text" not in obj:
                raise ParseError(f"{where}: expected an object with 'label' and 'text'")
            label, text = obj["label"], obj["text"]
            if not isinstance(text, str):
                raise ParseError(f"{where}: 'text' must be a string")
            samples.append(make_sample(vocab, label, text, where))
    return Dataset(samples=samples, split=split)


FORMATS = ("agnews-csv", "canonical-jsonl")


def ingest(path: str, fmt: str, vocab: Vocabulary | None = None,
           split: str = "train") -> Dataset:
    """Read a dataset file into a canonical Dataset, preserving file order."""
    vocab = vocab if vocab is not None else ascii_vocab()
    if fmt == "agnews-csv":
        return _ingest_agnews_csv(path, vocab, split)
    if fmt in ("canonical-jsonl", "jsonl"):
        return _ingest_jsonl(path, vocab, split)
    raise DataError(f"unknown dataset format {fmt!r} (expected one of {FORMATS})")


def export_jsonl(dataset: Dataset, path: str) -> None:
    """Write the canonical JSONL form; byte-deterministic for a given dataset."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in dataset:
            fh.write(json.dumps({"label": s.label, "text": s.text},
                                ensure_ascii=True, sort_keys=True,
                                separators=(",", ":")))
            fh.write("\n")


def datasets_equal(d1: Dataset, d2: Dataset) -> bool:
    if len(d1) != len(d2):
        return False
    for s1, s2 in zip(d1, d2):
        if s1.label != s2.label or s1.text != s2.text:
            return False
        if not np.array_equal(s1.chars, s2.chars):
            return False
    return True
