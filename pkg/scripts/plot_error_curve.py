#!/usr/bin/env python3
"""Plot windowed reconstruction error and state density from a telemetry CSV."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from statenet.experiment import load_telemetry


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("telemetry", help="telemetry CSV from a training run")
    ap.add_argument("--out", default=None, help="write PNG here instead of showing")
    args = ap.parse_args()

    try:
        import matplotlib
        if args.out:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is required for plotting: pip install matplotlib",
              file=sys.stderr)
        return 1

    records = load_telemetry(args.telemetry)
    steps = [r.step for r in records]

    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    ax1.plot(steps, [r.state_err for r in records], label="state error")
    ax1.plot(steps, [r.input_err for r in records], label="input error")
    ax1.set_ylabel("mean Hamming distance")
    ax1.legend()
    ax2.plot(steps, [r.density for r in records], color="tab:green")
    ax2.set_ylabel("mean state density")
    ax2.set_xlabel("training step")
    fig.suptitle(os.path.basename(args.telemetry))
    fig.tight_layout()

    if args.out:
        fig.savefig(args.out, dpi=120)
        print(f"wrote {args.out}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
