#!/usr/bin/env python3
"""Run the acceptance suite and print one PASS/FAIL line per criterion."""

from __future__ import annotations

import argparse
import re
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-k", help="pytest -k expression, e.g. 'criterion_1 or criterion_5'")
    args = ap.parse_args()
    cmd = [sys.executable, "-m", "pytest", "-s", "-q", "-p", "no:cacheprovider", "tests/test_acceptance.py"]
    if args.k:
        cmd += ["-k", args.k]
    proc = subprocess.run(cmd, cwd=ROOT, capture_output=True, text=True)
    lines = [ln for ln in proc.stdout.splitlines() if re.match(r"\.?(PASS|FAIL) criterion", ln)]
    lines = sorted((ln.lstrip(".") for ln in lines), key=lambda ln: int(ln.split()[2].rstrip(":")))
    print("\n".join(lines) if lines else proc.stdout)
    print(f"{sum(ln.startswith('PASS') for ln in lines)}/{len(lines)} criteria passed")
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main())
