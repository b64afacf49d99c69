#!/usr/bin/env python3
"""Run every reproduction preset at its default parameters and print a table.

Exit status is nonzero if any preset assertion fails.
"""

import sys

from fot.reproduce import PRESETS, run_preset


def main() -> int:
    failures = 0
    for name in sorted(PRESETS):
        result = run_preset(name)
        status = "PASS" if result.ok else "FAIL"
        params = " ".join(f"{k}={v}" for k, v in result.parameters.items())
        print(f"{status}  {name:10s} {params}")
        for a in result.assertions:
            mark = "ok " if a.holds else "XX "
            print(f"      {mark}{a.description}: required {a.required}, "
                  f"observed {a.observed}")
        if not result.ok:
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
