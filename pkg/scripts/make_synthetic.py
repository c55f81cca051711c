#!/usr/bin/env python3
"""Write a synthetic shift-cipher corpus as canonical JSONL train/test files.

The corpus has uniform character frequencies across classes (a frequency
baseline scores near chance) but fully class-determined transition
structure, so it exercises the whole pipeline without the real dataset.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from statenet import encoding, synth


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data/synth")
    ap.add_argument("--train", type=int, default=10000, help="training samples")
    ap.add_argument("--test", type=int, default=2000, help="test samples")
    ap.add_argument("--seed", type=int, default=20240)
    ap.add_argument("--m", type=int, default=96,
                    help="vocabulary size the samples are encoded for")
    ap.add_argument("--noise", type=float, default=None,
                    help="override the default character noise rate")
    args = ap.parse_args()

    spec = synth.default_spec(args.m)
    if args.noise is not None:
        spec = synth.SynthSpec(alphabet=spec.alphabet, shifts=spec.shifts,
                               noise=args.noise, min_len=spec.min_len,
                               max_len=spec.max_len)
    vocab = encoding.vocabulary_for(args.m)
    os.makedirs(args.out_dir, exist_ok=True)
    for split, count in (("train", args.train), ("test", args.test)):
        dataset = synth.synth_dataset(count, args.seed, spec, vocab, split=split)
        path = os.path.join(args.out_dir, f"{split}.jsonl")
        encoding.export_jsonl(dataset, path)
        print(f"wrote {path} ({count} samples)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
