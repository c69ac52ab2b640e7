"""Run every built-in check suite and print one line per check.

    python scripts/run_suites.py --seed 7 --samples 1000000 --json out.json
"""

import argparse
import json
import time

from gbverify.suites import SUITES, SuiteConfig


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--suite", action="append", choices=sorted(SUITES), help="repeatable; default all")
    parser.add_argument("--json", help="write all reports here")
    args = parser.parse_args()
    cfg = SuiteConfig(seed=args.seed, samples=args.samples)
    out = {}
    for name in args.suite or list(SUITES):
        start = time.perf_counter()
        reports = SUITES[name](cfg)
        elapsed = time.perf_counter() - start
        passed = sum(bool(r.passed) for r in reports)
        print(f"== {name}: {passed}/{len(reports)} passed in {elapsed:.1f}s")
        for r in reports:
            print("   " + r.line())
        out[name] = [r.to_dict() for r in reports]
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()
