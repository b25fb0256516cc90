"""Rewrite the golden trace files under tests/golden.

Only run this after an intentional change to the trace format or planner;
the test suite checks the committed bytes.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from golden_cases import GOLDEN_DIR, regenerate  # noqa: E402

if __name__ == "__main__":
    regenerate()
    print(f"wrote {GOLDEN_DIR}")
