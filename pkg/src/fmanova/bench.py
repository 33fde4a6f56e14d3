"""Micro-benchmarks of bootstrap throughput.

Each case times :func:`fmanova.bootstrap.bootstrap_replicates` on a synthetic
dataset and verifies the determinism contract along the way (a second run
with the same seed must reproduce the replicate matrix bit-exactly).
Throughput is replicates per second.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, replace

import numpy as np

from .bootstrap import bootstrap_replicates, substream
from .contrasts import DesignSpec, build_design
from .dataset import FunctionalDataset, Group, TimeGrid


@dataclass(frozen=True)
class BenchCase:
    """One benchmark scenario and, after running, its measurements."""

    name: str
    sample_sizes: tuple[int, ...]
    n_vars: int
    n_points: int
    n_boot: int
    design: str = "one-way"
    seed: int = 20240
    wall_time_s: float | None = None
    throughput: float | None = None

    def to_row(self) -> dict:
        return {
            "name": self.name,
            "sample_sizes": "|".join(str(n) for n in self.sample_sizes),
            "n_vars": self.n_vars,
            "n_points": self.n_points,
            "n_boot": self.n_boot,
            "design": self.design,
            "wall_time_s": self.wall_time_s,
            "throughput": self.throughput,
        }


DEFAULT_CASES = (
    BenchCase("one-way-small", (20, 30, 40, 50), 6, 50, 100),
    BenchCase("one-way-large-B", (20, 30, 40, 50), 6, 50, 200),
    BenchCase("tukey-blocks", (20, 30, 40, 50), 6, 50, 100, design="tukey"),
)


def _synthetic_dataset(case: BenchCase) -> FunctionalDataset:
    rng = substream(case.seed, 9)
    groups = tuple(
        Group(label=f"g{i + 1}", curves=rng.standard_normal((n_i, case.n_vars, case.n_points)))
        for i, n_i in enumerate(case.sample_sizes)
    )
    return FunctionalDataset(grid=TimeGrid.uniform(case.n_points), groups=groups)


def bench_bootstrap(case: BenchCase) -> BenchCase:
    """Run one case; asserts bit-identical replicates across two runs."""
    data = _synthetic_dataset(case)
    spec = DesignSpec(kind=case.design, k=data.k, p=data.p)
    blocks = build_design(spec, data.n_points)

    reference = bootstrap_replicates(data, blocks, case.n_boot, case.seed).values
    start = time.perf_counter()
    timed = bootstrap_replicates(data, blocks, case.n_boot, case.seed).values
    elapsed = time.perf_counter() - start
    if not np.array_equal(reference, timed):
        raise AssertionError(f"{case.name}: bootstrap replicates are not reproducible")
    return replace(case, wall_time_s=elapsed, throughput=case.n_boot / elapsed)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="fmanova bootstrap micro-benchmarks")
    parser.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    args = parser.parse_args(argv)

    results = [bench_bootstrap(case) for case in DEFAULT_CASES]
    header = list(results[0].to_row())
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=header)
        writer.writeheader()
        for case in results:
            writer.writerow(case.to_row())
    finally:
        if args.out:
            out.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
