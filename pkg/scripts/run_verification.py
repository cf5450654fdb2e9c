#!/usr/bin/env python3
"""Replay the full certification for n = 3, 4, 5 and store the JSON reports.

Writes one report per dimension into ``out/`` (created next to the current
working directory) and exits nonzero if any dimension fails its core checks.
"""

import json
import pathlib
import sys
import time

from finvar import verify_theorem


def main() -> int:
    out_dir = pathlib.Path("out")
    out_dir.mkdir(exist_ok=True)
    all_ok = True
    for n in (3, 4, 5):
        started = time.perf_counter()
        report = verify_theorem(n)
        elapsed = time.perf_counter() - started
        path = out_dir / f"verification_n{n}.json"
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
        status = "PASS" if report.overall else "FAIL"
        print(f"n={n}: {status} in {elapsed:.1f}s -> {path}")
        for check in report.checks:
            print(f"    [{'PASS' if check.passed else 'FAIL'}] {check.check_id}: {check.detail}")
        all_ok = all_ok and report.overall
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
