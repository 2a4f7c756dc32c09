#!/usr/bin/env python3
"""
Run the analysis CLI from a source checkout.

    python scripts/srt.py analyze --spec data/specs/const11.cfg
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
