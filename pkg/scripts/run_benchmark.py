#!/usr/bin/env python3
"""Run the four-follower benchmark end to end, both variants.

Writes trajectory CSVs, certificate and decay reports into the output
directory (default ./results/benchmark), then prints a short summary of
final tracking errors and the certified quantities.

Usage: python scripts/run_benchmark.py [--out DIR]
"""

import argparse
from pathlib import Path

from leadfollow.cli import main as cli_main


def run(out_dir: Path) -> int:
    rc = 0
    for variant, flags in (("noise_free", []), ("disturbed", ["--noise"])):
        target = out_dir / variant
        print(f"== {variant} -> {target}")
        code = cli_main(["paper", *flags, "--out", str(target)])
        print(f"exit code: {code}\n")
        rc = rc or code
    return rc


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/benchmark", type=Path)
    args = parser.parse_args()
    raise SystemExit(run(args.out))
