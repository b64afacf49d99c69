#!/usr/bin/env python3
"""Run the default grid on the transposed three-level ladder and summarize.

Every point is expected to report cost ratio exactly 1; anything else exits
nonzero and prints the offending points.
"""

import sys

from fot.braess import default_transpose_m3_grid, sweep_transpose_m3
from fot.core import format_scalar


def main() -> int:
    grid = default_transpose_m3_grid()
    report = sweep_transpose_m3(grid)
    bad = [p for p in report.points if p.error is not None or p.ratio != 1]
    print(f"{len(report.points)} grid points, "
          f"max ratio {format_scalar(report.max_ratio)}, "
          f"paradox found: {report.any_paradox}")
    for p in bad:
        print(f"  UNEXPECTED {p.label}: ratio={p.ratio} error={p.error}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
