"""Shared fixtures plus the acceptance-criteria summary table.

The tests in test_acceptance.py are named test_criterion_<k>_*; after the
run, a one-line PASS/FAIL/SKIP verdict per criterion is appended to the
terminal summary so the whole checklist is readable at a glance.
"""

import os
import re

import pytest

from statenet import encoding

CRITERIA = {
    1: "baseline char-frequency accuracy on AG News in [0.46, 0.52]",
    2: "full-scale model mean accuracy in [0.80, 0.845], spread <= 1.5 pts",
    3: "small-scale model beats the baseline by >= 10 points on AG News",
    4: "state reconstruction error drops early, then stays flat",
    5: "input reconstruction error typically exactly 0 after warmup",
    6: "1000 randomized micro instances match the naive oracles",
    7: "two identical small-scale pipeline runs are byte-identical",
    8: "unit inactive for 1000 steps gains exactly the folded bias sum",
    9: "every ridge fit meets the 1e-8 normal-equation residual",
}

_NODE_RE = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    reasons = {}
    rank = {"PASS": 0, "SKIP": 1, "FAIL": 2}
    for category, verdict in (("passed", "PASS"), ("skipped", "SKIP"),
                              ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(category, []):
            nodeid = getattr(rep, "nodeid", "")
            match = _NODE_RE.search(nodeid)
            if not match:
                continue
            if verdict == "PASS" and getattr(rep, "when", "call") != "call":
                continue
            num = int(match.group(1))
            if rank[verdict] >= rank.get(verdicts.get(num, "PASS"), -1):
                verdicts[num] = verdict
            if verdict == "SKIP" and isinstance(rep.longrepr, tuple):
                reasons[num] = rep.longrepr[2].removeprefix("Skipped: ")
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(CRITERIA):
        verdict = verdicts.get(num, "----")
        line = f"[{verdict}] {num}. {CRITERIA[num]}"
        if num in reasons:
            line += f"  ({reasons[num]})"
        terminalreporter.write_line(line)


def find_agnews():
    """Locate the real dataset; returns (dir, format) or (None, None)."""
    here = os.path.dirname(os.path.abspath(__file__))
    candidates = [
        os.environ.get("STATENET_AGNEWS_DIR"),
        os.path.join(here, "..", "data", "agnews"),
    ]
    for cand in candidates:
        if not cand or not os.path.isdir(cand):
            continue
        for names, fmt in ((("train.jsonl", "test.jsonl"), "canonical-jsonl"),
                           (("train.csv", "test.csv"), "agnews-csv")):
            if all(os.path.isfile(os.path.join(cand, f)) for f in names):
                return cand, fmt
    return None, None


AGNEWS_SKIP = ("AG News data not found; run scripts/fetch_agnews.py (needs "
               "network) and point STATENET_AGNEWS_DIR at it")


@pytest.fixture(scope="session")
def agnews():
    """Real train/test datasets, or a skip when the data is absent."""
    data_dir, fmt = find_agnews()
    if data_dir is None:
        pytest.skip(AGNEWS_SKIP)
    ext = "jsonl" if fmt == "canonical-jsonl" else "csv"
    vocab = encoding.ascii_vocab()
    train = encoding.ingest(os.path.join(data_dir, f"train.{ext}"), fmt,
                            vocab=vocab, split="train")
    test = encoding.ingest(os.path.join(data_dir, f"test.{ext}"), fmt,
                           vocab=vocab, split="test")
    return {"train": train, "test": test}
