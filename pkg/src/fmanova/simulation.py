"""Synthetic functional MANOVA scenarios and Monte Carlo studies.

Two data models are built in:

* ``model1``: one-way layout with k = 4 groups and p = 6 functional
  variables.  Groups 1-3 share one mean vector; group 4 differs only in the
  sixth variable, a cubic polynomial whose coefficients are shifted by
  ``delta / sqrt(30) * (1, 2, 3, 4)`` so ``delta = 0`` realizes the null.
* ``model2``: two samples with p = 2 variables; the second variable of
  group 2 carries the same polynomial shift.

Errors are linear-model noise: per variable, a random Fourier series with
geometrically decaying coefficient variances ``h_i * rho^r`` (r = 1..7,
paired with the basis functions in listed order), mixed across variables by
a fixed matrix.  Innovations come from one of three standardized laws
(normal, t4 / sqrt(2), (chi2_4 - 4) / sqrt(8)).  Optionally every
observation is scaled by h(t) = 1 / (t + 1/50) to probe scale invariance.

Studies replay a scenario ``reps`` times with independent keyed substreams
and tabulate rejection rates for the global test, the calibrated multiple
test, and a Bonferroni baseline, all evaluated on shared bootstrap draws.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bootstrap import bootstrap_replicates, global_pvalue, substream
from .contrasts import DesignSpec, build_design
from .dataset import FunctionalDataset, Group, TimeGrid
from .errors import BadConfigError
from .moments import lambda_hat
from .multiplicity import bonferroni_decisions, decisions_from_replicates
from .stats import HypothesisBlocks, observed_statistics, resolve_globalizer
from .validation import check_alpha, check_positive_int, check_seed

DISTRIBUTIONS = ("normal", "t4", "chisq4")

# Stream tags keep data generation and bootstrap draws on disjoint substreams.
_STREAM_DATA = 101
_STREAM_BOOT = 202

MODEL1_VARIANCES = {
    "hom": (1.5, 1.5, 1.5, 1.5),
    "pos": (1.5, 2.0, 2.5, 3.0),
    "neg": (3.0, 2.5, 2.0, 1.5),
}
MODEL2_VARIANCES = {
    "hom": (1.5, 1.5),
    "pos": (1.5, 3.5),
    "neg": (3.5, 1.5),
}

_MODEL1_MIXING = np.array(
    [
        [1, 0, -1, -1, 0, 0],
        [0, 1, 0, 0, -1, -1],
        [0, 0, 1, -1, 0, -1],
        [1, 1, 0, 1, 0, -1],
        [0, 0, 1, 0, 1, -1],
        [0, 0, 0, 0, 0, 1],
    ],
    dtype=float,
)
_MODEL2_MIXING = np.array([[1, -1], [0, 1]], dtype=float)

_N_BASIS = 7


def fourier_basis(t) -> np.ndarray:
    """The constant function and three sine/cosine pairs, orthonormal on [0, 1].

    Returns shape ``(7,) + shape(t)``: rows are
    (1, sqrt2 sin 2pi t, sqrt2 cos 2pi t, sqrt2 sin 4pi t, sqrt2 cos 4pi t,
    sqrt2 sin 6pi t, sqrt2 cos 6pi t).
    """
    t = np.asarray(t, dtype=float)
    rows = [np.ones_like(t)]
    for s in (1, 2, 3):
        rows.append(np.sqrt(2.0) * np.sin(2.0 * np.pi * s * t))
        rows.append(np.sqrt(2.0) * np.cos(2.0 * np.pi * s * t))
    return np.stack(rows, axis=0)


def scaling_function(t) -> np.ndarray:
    """h(t) = 1 / (t + 1/50), the scale perturbation used by scaled scenarios."""
    return 1.0 / (np.asarray(t, dtype=float) + 0.02)


def draw_innovation(dist: str, rng: np.random.Generator, size=None):
    """Draw from one of the standardized (mean 0, variance 1) innovation laws."""
    if dist == "normal":
        return rng.standard_normal(size)
    if dist == "t4":
        return rng.standard_t(4, size) / np.sqrt(2.0)
    if dist == "chisq4":
        return (rng.chisquare(4, size) - 4.0) / np.sqrt(8.0)
    raise BadConfigError(f"unknown distribution {dist!r}; choose one of {DISTRIBUTIONS}")


@dataclass(frozen=True)
class ModelConfig:
    """One simulation scenario.

    ``h_vector`` holds the per-group variance factors (the ``hom``/``pos``/
    ``neg`` pairings are available as module constants), ``rho`` the
    coefficient decay (smaller means stronger correlation across the basis),
    ``delta`` the mean-shift hyperparameter, and ``scaled`` whether the
    observations are multiplied by ``scaling_function``.
    """

    model: str
    rho: float
    h_vector: tuple[float, ...]
    sample_sizes: tuple[int, ...]
    distribution: str = "normal"
    delta: float = 0.0
    scaled: bool = False
    n_points: int = 50
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "h_vector", tuple(float(h) for h in self.h_vector))
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        if self.model not in ("model1", "model2"):
            raise BadConfigError(f"unknown model {self.model!r}; use 'model1' or 'model2'")
        if not 0.0 < self.rho < 1.0:
            raise BadConfigError(f"rho must be in (0, 1), got {self.rho}")
        if self.distribution not in DISTRIBUTIONS:
            raise BadConfigError(
                f"unknown distribution {self.distribution!r}; choose one of {DISTRIBUTIONS}"
            )
        if self.delta < 0:
            raise BadConfigError(f"delta must be >= 0, got {self.delta}")
        if self.n_points < 1:
            raise BadConfigError("n_points must be >= 1")
        k = self.k
        if len(self.h_vector) != k or len(self.sample_sizes) != k:
            raise BadConfigError(
                f"{self.model} needs {k} variance factors and {k} sample sizes"
            )
        if any(h <= 0 for h in self.h_vector):
            raise BadConfigError("variance factors must be positive")
        if any(n < 2 for n in self.sample_sizes):
            raise BadConfigError("every group needs at least 2 subjects")

    @property
    def k(self) -> int:
        return 4 if self.model == "model1" else 2

    @property
    def p(self) -> int:
        return 6 if self.model == "model1" else 2

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "rho": self.rho,
            "h_vector": list(self.h_vector),
            "sample_sizes": list(self.sample_sizes),
            "distribution": self.distribution,
            "delta": self.delta,
            "scaled": self.scaled,
            "n_points": self.n_points,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {
            "model",
            "rho",
            "h_vector",
            "sample_sizes",
            "distribution",
            "delta",
            "scaled",
            "n_points",
            "label",
        }
        extra = set(data) - known
        if extra:
            raise BadConfigError(f"unknown scenario keys: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise BadConfigError(f"incomplete scenario: {exc}") from exc


def _shifted_polynomial(t: np.ndarray, delta: float) -> np.ndarray:
    s = delta / np.sqrt(30.0)
    return (1.0 + s) + (2.3 + 2 * s) * t + (3.4 + 3 * s) * t**2 + (1.5 + 4 * s) * t**3


def _model1_base_means(t: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            np.sin(2.0 * np.pi * t**2) ** 5,
            np.cos(2.0 * np.pi * t**2) ** 5,
            np.cbrt(t) * (1.0 - t) - 5.0,
            np.sqrt(5.0) * t ** (2.0 / 3.0) * np.exp(-7.0 * t),
            np.sqrt(13.0 * t) * np.exp(-6.5 * t),
            _shifted_polynomial(t, 0.0),
        ]
    )


def mean_functions(cfg: ModelConfig, t: np.ndarray) -> list[np.ndarray]:
    """Per-group population mean functions evaluated on ``t`` (unscaled)."""
    if cfg.model == "model1":
        base = _model1_base_means(t)
        last = base.copy()
        last[5] = _shifted_polynomial(t, cfg.delta)
        return [base, base, base, last]
    sine = np.sin(2.0 * np.pi * t**2) ** 5
    g1 = np.stack([sine, _shifted_polynomial(t, 0.0)])
    g2 = np.stack([sine, _shifted_polynomial(t, cfg.delta)])
    return [g1, g2]


def population_means(cfg: ModelConfig, grid: TimeGrid | None = None) -> np.ndarray:
    """Stacked (p*k, T) population means, including the scaling when active.

    Used to decide which hypothesis blocks are true nulls in a study.
    """
    grid = grid or TimeGrid.uniform(cfg.n_points)
    means = mean_functions(cfg, grid.points)
    if cfg.scaled:
        h = scaling_function(grid.points)
        means = [m * h[None, :] for m in means]
    return np.concatenate(means, axis=0)


def _mixing_matrix(cfg: ModelConfig) -> np.ndarray:
    return _MODEL1_MIXING if cfg.model == "model1" else _MODEL2_MIXING


def _draw_noise(cfg: ModelConfig, rng: np.random.Generator, psi: np.ndarray) -> list[np.ndarray]:
    """Error curves per group, each (n_i, p, T); innovations drawn in fixed
    nested (subject, variable, basis) order per group."""
    lam_powers = np.arange(1, _N_BASIS + 1)
    mixing = _mixing_matrix(cfg)
    noise = []
    for i, n_i in enumerate(cfg.sample_sizes):
        lam = cfg.h_vector[i] * cfg.rho**lam_powers
        v = draw_innovation(cfg.distribution, rng, (n_i, cfg.p, _N_BASIS))
        coeff = np.sqrt(lam)[None, None, :] * v
        z = coeff @ psi
        noise.append(np.einsum("mv,jvt->jmt", mixing, z))
    return noise


def generate(cfg: ModelConfig, seed: int) -> FunctionalDataset:
    """Generate one dataset for the scenario; fully determined by (cfg, seed)."""
    seed = check_seed(seed)
    grid = TimeGrid.uniform(cfg.n_points)
    psi = fourier_basis(grid.points)
    means = mean_functions(cfg, grid.points)
    rng = substream(seed, _STREAM_DATA)
    noise = _draw_noise(cfg, rng, psi)
    scale = scaling_function(grid.points) if cfg.scaled else None
    groups = []
    for i in range(cfg.k):
        curves = means[i][None, :, :] + noise[i]
        if scale is not None:
            curves = curves * scale[None, None, :]
        groups.append(Group(label=f"g{i + 1}", curves=curves))
    return FunctionalDataset(grid=grid, groups=tuple(groups))


@dataclass(frozen=True)
class StudySpec:
    """Which tests a study runs on each simulated dataset.

    The multiple design's blocks drive the calibrated multiple test and the
    Bonferroni baseline; the global test uses the same blocks stacked into a
    single hypothesis matrix.
    """

    design: str = "tukey"
    run_global: bool = True
    run_multiple: bool = True
    run_bonferroni: bool = True
    globalizer: str = "sup"

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "run_global": self.run_global,
            "run_multiple": self.run_multiple,
            "run_bonferroni": self.run_bonferroni,
            "globalizer": self.globalizer,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StudySpec":
        known = {"design", "run_global", "run_multiple", "run_bonferroni", "globalizer"}
        extra = set(data) - known
        if extra:
            raise BadConfigError(f"unknown study keys: {sorted(extra)}")
        return cls(**data)


@dataclass(frozen=True)
class ScenarioOutcome:
    """Aggregated rates for one scenario (all rates are rejection proportions)."""

    label: str
    config: ModelConfig
    n_reps: int
    true_nulls: dict[str, bool]
    global_reject_rate: float | None = None
    multiple_any_rate: float | None = None
    multiple_fwer: float | None = None
    multiple_local_rates: dict[str, float] | None = None
    bonferroni_any_rate: float | None = None
    bonferroni_fwer: float | None = None
    bonferroni_local_rates: dict[str, float] | None = None
    mean_beta: float | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "config": self.config.to_dict(),
            "n_reps": self.n_reps,
            "true_nulls": self.true_nulls,
            "global_reject_rate": self.global_reject_rate,
            "multiple_any_rate": self.multiple_any_rate,
            "multiple_fwer": self.multiple_fwer,
            "multiple_local_rates": self.multiple_local_rates,
            "bonferroni_any_rate": self.bonferroni_any_rate,
            "bonferroni_fwer": self.bonferroni_fwer,
            "bonferroni_local_rates": self.bonferroni_local_rates,
            "mean_beta": self.mean_beta,
        }


@dataclass(frozen=True)
class StudyReport:
    """All scenario outcomes of one study plus the parameters that drove it."""

    outcomes: tuple[ScenarioOutcome, ...]
    reps: int
    n_boot: int
    alpha: float
    seed: int
    study: StudySpec
    wall_time_s: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "reps": self.reps,
            "n_boot": self.n_boot,
            "alpha": self.alpha,
            "seed": self.seed,
            "study": self.study.to_dict(),
            "scenarios": [o.to_dict() for o in self.outcomes],
        }

    def to_rows(self) -> list[dict]:
        """Flat rows (one per scenario x metric) for the CSV emitter."""
        rows = []
        for o in self.outcomes:
            cfg = o.config

            def push(metric, block, value):
                if value is None:
                    return
                rows.append(
                    {
                        "scenario": o.label,
                        "model": cfg.model,
                        "distribution": cfg.distribution,
                        "rho": cfg.rho,
                        "delta": cfg.delta,
                        "variances": "|".join(repr(h) for h in cfg.h_vector),
                        "sample_sizes": "|".join(str(n) for n in cfg.sample_sizes),
                        "scaled": cfg.scaled,
                        "metric": metric,
                        "block": block,
                        "value": value,
                        "reps": o.n_reps,
                    }
                )

            push("global_reject_rate", "", o.global_reject_rate)
            push("multiple_any_rate", "", o.multiple_any_rate)
            push("multiple_fwer", "", o.multiple_fwer)
            push("mean_beta", "", o.mean_beta)
            for label, rate in (o.multiple_local_rates or {}).items():
                push("multiple_local_rate", label, rate)
            push("bonferroni_any_rate", "", o.bonferroni_any_rate)
            push("bonferroni_fwer", "", o.bonferroni_fwer)
            for label, rate in (o.bonferroni_local_rates or {}).items():
                push("bonferroni_local_rate", label, rate)
        return rows

    def write_csv(self, path) -> None:
        rows = self.to_rows()
        header = [
            "scenario",
            "model",
            "distribution",
            "rho",
            "delta",
            "variances",
            "sample_sizes",
            "scaled",
            "metric",
            "block",
            "value",
            "reps",
        ]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=header)
            writer.writeheader()
            writer.writerows(rows)


def _rep_seed(seed: int, tag: int, rep: int) -> int:
    state = np.random.SeedSequence((seed, tag, rep)).generate_state(1, np.uint64)
    return int(state[0])


def _true_null_mask(cfg: ModelConfig, blocks: HypothesisBlocks) -> np.ndarray:
    eta = population_means(cfg)
    scale = max(1.0, float(np.max(np.abs(eta))))
    mask = np.empty(blocks.n_blocks, dtype=bool)
    for ell, (h, c) in enumerate(zip(blocks.blocks, blocks.c)):
        mask[ell] = bool(np.max(np.abs(h @ eta - c)) <= 1e-9 * scale)
    return mask


def _run_one_rep(args) -> dict:
    cfg, study, blocks, alpha, n_boot, seed, rep = args
    data = generate(cfg, _rep_seed(seed, _STREAM_DATA, rep))
    est = lambda_hat(data)
    targets = blocks.extended(blocks.stacked()) if study.run_global else blocks
    observed, _ = observed_statistics(est, targets, study.globalizer, data.grid)
    reps_matrix = bootstrap_replicates(
        data, targets, n_boot, _rep_seed(seed, _STREAM_BOOT, rep), study.globalizer
    ).values

    out: dict = {}
    if study.run_global:
        decision = global_pvalue(observed[-1], reps_matrix[:, -1], alpha)
        out["global_reject"] = decision.reject
    n_blocks = blocks.n_blocks
    if study.run_multiple:
        beta, _, decisions, _ = decisions_from_replicates(
            observed[:n_blocks], reps_matrix[:, :n_blocks], alpha
        )
        out["multiple_decisions"] = decisions
        out["beta"] = beta
    if study.run_bonferroni:
        out["bonferroni_decisions"] = bonferroni_decisions(
            observed[:n_blocks], reps_matrix[:, :n_blocks], alpha
        )
    return out


def run_study(
    configs,
    study: StudySpec,
    reps: int,
    n_boot: int,
    alpha: float,
    seed: int,
    n_workers: int = 1,
) -> StudyReport:
    """Monte Carlo study over a list of scenarios.

    Each replication generates a dataset on its own keyed substream, draws
    one set of bootstrap replicates, and evaluates all requested tests on
    those shared draws (the comparisons are paired).  Results are identical
    for any ``n_workers``.
    """
    configs = [configs] if isinstance(configs, ModelConfig) else list(configs)
    alpha = check_alpha(alpha)
    reps = check_positive_int(reps, "reps", minimum=1)
    n_boot = check_positive_int(n_boot, "n_boot", minimum=2)
    seed = check_seed(seed)
    n_workers = check_positive_int(n_workers, "n_workers", minimum=1)
    study = replace(study, globalizer=resolve_globalizer(study.globalizer))

    start = time.perf_counter()
    outcomes = []
    for idx, cfg in enumerate(configs):
        spec = DesignSpec(kind=study.design, k=cfg.k, p=cfg.p)
        blocks = build_design(spec, cfg.n_points)
        true_nulls = _true_null_mask(cfg, blocks)
        tasks = [(cfg, study, blocks, alpha, n_boot, seed, rep) for rep in range(reps)]
        if n_workers > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(_run_one_rep, tasks, chunksize=8))
        else:
            results = [_run_one_rep(t) for t in tasks]
        outcomes.append(
            _aggregate(cfg, cfg.label or f"scenario{idx + 1}", study, blocks, true_nulls, results)
        )
    return StudyReport(
        outcomes=tuple(outcomes),
        reps=reps,
        n_boot=n_boot,
        alpha=alpha,
        seed=seed,
        study=study,
        wall_time_s=time.perf_counter() - start,
    )


def _aggregate(cfg, label, study, blocks, true_nulls, results) -> ScenarioOutcome:
    n_reps = len(results)
    labels = blocks.labels
    out = dict(
        label=label,
        config=cfg,
        n_reps=n_reps,
        true_nulls={labels[i]: bool(true_nulls[i]) for i in range(len(labels))},
    )
    if study.run_global:
        out["global_reject_rate"] = float(
            np.mean([r["global_reject"] for r in results])
        )
    if study.run_multiple:
        decisions = np.array([r["multiple_decisions"] for r in results])
        out["multiple_any_rate"] = float(np.mean(decisions.any(axis=1)))
        out["multiple_local_rates"] = {
            labels[i]: float(decisions[:, i].mean()) for i in range(len(labels))
        }
        if true_nulls.any():
            out["multiple_fwer"] = float(np.mean(decisions[:, true_nulls].any(axis=1)))
        out["mean_beta"] = float(np.mean([r["beta"] for r in results]))
    if study.run_bonferroni:
        decisions = np.array([r["bonferroni_decisions"] for r in results])
        out["bonferroni_any_rate"] = float(np.mean(decisions.any(axis=1)))
        out["bonferroni_local_rates"] = {
            labels[i]: float(decisions[:, i].mean()) for i in range(len(labels))
        }
        if true_nulls.any():
            out["bonferroni_fwer"] = float(np.mean(decisions[:, true_nulls].any(axis=1)))
    return ScenarioOutcome(**out)
