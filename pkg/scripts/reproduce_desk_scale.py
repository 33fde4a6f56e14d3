#!/usr/bin/env python3
"""Reproduce the desk-scale size / FWER / power grid.

Runs the homoscedastic and both heteroscedastic variance pairings of the
four-group, six-variable scenario at every innovation law, under the null
and under the delta = 0.1 alternative, and writes one CSV + JSON report.
With the default 500 replications x B = 500 this takes a few hours on one
core; pass --reps/--B to downscale for a smoke run.
"""

import argparse
import json
import subprocess
import sys
import tempfile
from pathlib import Path

SCENARIOS = []
for dist in ("normal", "t4", "chisq4"):
    for pairing, h_vector in (
        ("hom", [1.5, 1.5, 1.5, 1.5]),
        ("pos", [1.5, 2.0, 2.5, 3.0]),
        ("neg", [3.0, 2.5, 2.0, 1.5]),
    ):
        for delta, tag in ((0.0, "null"), (0.1, "power")):
            SCENARIOS.append(
                {
                    "model": "model1",
                    "rho": 0.1,
                    "h_vector": h_vector,
                    "sample_sizes": [20, 30, 40, 50],
                    "distribution": dist,
                    "delta": delta,
                    "label": f"{dist}-{pairing}-{tag}",
                }
            )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=500)
    parser.add_argument("--B", type=int, default=500)
    parser.add_argument("--seed", type=int, default=20250809)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default="desk_scale.csv")
    args = parser.parse_args()

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump({"scenarios": SCENARIOS, "study": {"design": "tukey"}}, fh)
        config_path = fh.name

    cmd = [
        sys.executable,
        "-m",
        "fmanova.cli",
        "simulate",
        "--config",
        config_path,
        "--reps",
        str(args.reps),
        "--B",
        str(args.B),
        "--seed",
        str(args.seed),
        "--threads",
        str(args.threads),
        "--out",
        args.out,
    ]
    code = subprocess.call(cmd)
    Path(config_path).unlink(missing_ok=True)
    if code == 0:
        print(f"wrote {args.out} and {Path(args.out).with_suffix('.json')}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
