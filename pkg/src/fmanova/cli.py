"""Command-line front end.

Subcommands:

* ``test``     global bootstrap test on a CSV dataset
* ``mtest``    multiple bootstrap tests with family-wise error calibration
* ``simulate`` Monte Carlo study driven by a JSON config

Reports are JSON (nested) with the full manifest embedded for provenance;
studies additionally emit a flat CSV (one row per scenario x metric).
Wall-clock information lives in a separate ``metadata`` field so identical
manifests produce byte-identical report bodies.  Exit codes: 0 success,
2 input error, 3 numerical failure; test decisions never affect the exit
code.  Errors are emitted as JSON on stderr.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bootstrap import run_global_test
from .contrasts import DESIGN_KINDS, DesignSpec, build_design
from .dataset import load_csv
from .errors import DataValidationError, FmanovaError
from .multiplicity import multiple_test
from .simulation import ModelConfig, StudySpec, run_study
from .validation import check_alpha, check_positive_int, check_seed

SCHEMA_VERSION = "1"


def _default_threads() -> int:
    env = os.environ.get("FMANOVA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DataValidationError(f"FMANOVA_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.05, help="significance level")
    parser.add_argument("--B", type=int, required=True, dest="n_boot", help="bootstrap replicates")
    parser.add_argument("--seed", type=int, required=True, help="reproducibility seed (mandatory)")
    parser.add_argument(
        "--globalizer", choices=("sup", "int"), default="sup", help="sup or integral statistic"
    )
    parser.add_argument("--threads", type=int, default=None, help="worker count (simulate only)")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="long-format CSV dataset")
    parser.add_argument("--grid", default=None, help="grid file, one time value per line")
    parser.add_argument("--design", required=True, choices=DESIGN_KINDS)
    parser.add_argument("--p", type=int, default=None, help="expected number of variables (check)")
    parser.add_argument("--a", type=int, default=None, help="factor A levels / repeats")
    parser.add_argument("--b", type=int, default=None, help="factor B levels / dimensions")
    parser.add_argument("--c", default=None, help="CSV of target pattern (identity design), r x T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmanova",
        description="Global and multiple bootstrap tests for multivariate functional data",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="global test on a CSV dataset")
    _add_data_args(p_test)
    _add_common(p_test)

    p_mtest = sub.add_parser("mtest", help="multiple tests with FWER calibration")
    _add_data_args(p_mtest)
    _add_common(p_mtest)

    p_sim = sub.add_parser("simulate", help="Monte Carlo study from a JSON config")
    p_sim.add_argument("--config", required=True, help="JSON study configuration")
    p_sim.add_argument("--reps", type=int, required=True, help="Monte Carlo replications")
    _add_common(p_sim)
    return parser


def _load_pattern(path, shape):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    arr = np.asarray(rows, dtype=float)
    if arr.shape != shape:
        raise DataValidationError(f"pattern file must have shape {shape}, got {arr.shape}")
    return arr


def _resolve_blocks(args, dataset):
    if args.p is not None and args.p != dataset.p:
        raise DataValidationError(
            f"--p {args.p} does not match the data ({dataset.p} variables)"
        )
    spec = DesignSpec(kind=args.design, k=dataset.k, p=dataset.p, a=args.a, b=args.b)
    c = None
    if args.c is not None:
        c = _load_pattern(args.c, (dataset.p * dataset.k, dataset.n_points))
    return build_design(spec, dataset.n_points, c=c)


def _manifest(args, command: str) -> dict:
    manifest = {
        "command": command,
        "alpha": args.alpha,
        "B": args.n_boot,
        "seed": args.seed,
        "globalizer": args.globalizer,
        "threads": args.threads,
    }
    if command in ("test", "mtest"):
        manifest.update(
            {
                "data": args.data,
                "grid": args.grid,
                "design": {"kind": args.design, "a": args.a, "b": args.b, "c": args.c, "p": args.p},
            }
        )
    else:
        manifest.update({"config": args.config, "reps": args.reps})
    return manifest


def _emit(report: dict, out_path) -> None:
    text = json.dumps(report, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _wrap(manifest: dict, results: dict, started: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest,
        "results": results,
        "metadata": {
            "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "wall_time_s": time.perf_counter() - started,
            "package_version": __version__,
        },
    }


def _cmd_test(args) -> int:
    started = time.perf_counter()
    dataset = load_csv(args.data, grid_path=args.grid)
    blocks = _resolve_blocks(args, dataset)
    report = run_global_test(
        dataset,
        blocks,
        check_alpha(args.alpha),
        check_positive_int(args.n_boot, "B", minimum=2),
        check_seed(args.seed),
        globalizer=args.globalizer,
    )
    _emit(_wrap(_manifest(args, "test"), report.to_dict(), started), args.out)
    return 0


def _cmd_mtest(args) -> int:
    started = time.perf_counter()
    dataset = load_csv(args.data, grid_path=args.grid)
    blocks = _resolve_blocks(args, dataset)
    report = multiple_test(
        dataset,
        blocks,
        check_alpha(args.alpha),
        check_positive_int(args.n_boot, "B", minimum=2),
        check_seed(args.seed),
        globalizer=args.globalizer,
    )
    _emit(_wrap(_manifest(args, "mtest"), report.to_dict(), started), args.out)
    return 0


def _cmd_simulate(args) -> int:
    started = time.perf_counter()
    if not args.out:
        raise DataValidationError("simulate requires --out <report.csv>")
    with open(args.config, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    if "scenarios" not in config or not config["scenarios"]:
        raise DataValidationError("study config needs a non-empty 'scenarios' list")
    scenarios = [ModelConfig.from_dict(s) for s in config["scenarios"]]
    study = StudySpec.from_dict(config.get("study", {}))
    threads = args.threads if args.threads is not None else _default_threads()
    report = run_study(
        scenarios,
        study,
        reps=check_positive_int(args.reps, "reps", minimum=1),
        n_boot=check_positive_int(args.n_boot, "B", minimum=2),
        alpha=check_alpha(args.alpha),
        seed=check_seed(args.seed),
        n_workers=threads,
    )
    report.write_csv(args.out)
    json_path = os.path.splitext(args.out)[0] + ".json"
    body = report.to_dict()
    _emit(_wrap(_manifest(args, "simulate"), body, started), json_path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"test": _cmd_test, "mtest": _cmd_mtest, "simulate": _cmd_simulate}
    try:
        return handlers[args.command](args)
    except (DataValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        _emit_error(exc)
        return 2
    except FmanovaError as exc:
        _emit_error(exc)
        return 3


def _emit_error(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(payload) + "\n")


if __name__ == "__main__":
    raise SystemExit(main())
