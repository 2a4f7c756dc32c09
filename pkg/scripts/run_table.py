#!/usr/bin/env python3
"""
Reproduce the exponential decision table for r = e^{alpha|x|}, q = e^{beta|x|}
and compare it with the known answers.
"""

import argparse
import logging
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from coefficient_model import Window  # noqa: E402
from criteria_engine import exponential_table, table_matrix  # noqa: E402
from utils import save_frame  # noqa: E402

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


def main() -> int:
    parser = argparse.ArgumentParser(description="Exponential decision table")
    parser.add_argument("--window", type=float, default=30.0, help="Window half-width X")
    parser.add_argument("--samples", type=int, default=601, help="Samples on [-X, X]")
    parser.add_argument("--out", type=Path, default=Path("data/tables/exponential_table.csv"))
    args = parser.parse_args()

    table = exponential_table(window=Window(args.window, args.samples))
    logger.info("\n" + table_matrix(table).to_string())
    save_frame(table, str(args.out))
    logger.info(f"Saved to: {args.out}")

    matched = int(table["match"].sum())
    logger.info(f"{matched}/{len(table)} cells match the known table")
    return 0 if matched == len(table) else 1


if __name__ == "__main__":
    sys.exit(main())
