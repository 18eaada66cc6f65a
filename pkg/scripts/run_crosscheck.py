#!/usr/bin/env python3
"""Run the full cross-validation scenario matrix and write the report CSVs.

Usage: python scripts/run_crosscheck.py [--seed N] [--workers N] [--out DIR]
"""

import argparse
import sys

from killdiff.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="crosscheck_out")
    args = parser.parse_args()
    return cli_main(
        [
            "--seed", str(args.seed),
            "--workers", str(args.workers),
            "--out", args.out,
            "crosscheck",
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
