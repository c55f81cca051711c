#!/usr/bin/env python3
"""Download the AG News topic classification CSVs and canonicalize them.

Writes <out-dir>/train.csv and <out-dir>/test.csv, then converts them to
train.jsonl / test.jsonl with the package vocabulary. Needs outbound
network access; if your environment has none, obtain the two CSVs by any
other means and run `statenet ingest` on them yourself.

Expected sizes: 120000 training rows, 7600 test rows, 4 classes.
"""

import argparse
import os
import sys
import urllib.request

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from statenet import encoding

URLS = {
    "train.csv": "https://raw.githubusercontent.com/mhjabreel/CharCnn_Keras/master/data/ag_news_csv/train.csv",
    "test.csv": "https://raw.githubusercontent.com/mhjabreel/CharCnn_Keras/master/data/ag_news_csv/test.csv",
}
EXPECTED_ROWS = {"train.csv": 120000, "test.csv": 7600}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data/agnews")
    ap.add_argument("--skip-download", action="store_true",
                    help="CSVs already present; just convert")
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    vocab = encoding.ascii_vocab()
    for name, url in URLS.items():
        csv_path = os.path.join(args.out_dir, name)
        if not args.skip_download:
            print(f"downloading {url}")
            urllib.request.urlretrieve(url, csv_path)
        split = name.split(".")[0]
        dataset = encoding.ingest(csv_path, "agnews-csv", vocab=vocab, split=split)
        if len(dataset) != EXPECTED_ROWS[name]:
            print(f"warning: {name} has {len(dataset)} rows, "
                  f"expected {EXPECTED_ROWS[name]}", file=sys.stderr)
        out_path = os.path.join(args.out_dir, f"{split}.jsonl")
        encoding.export_jsonl(dataset, out_path)
        print(f"wrote {out_path} ({len(dataset)} samples)")
    print(f"done; point tests at it with STATENET_AGNEWS_DIR={args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
