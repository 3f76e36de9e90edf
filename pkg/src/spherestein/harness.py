"""Monte Carlo simulation harness: replicate sampling + fitting and report
bias, MSE and non-existence frequencies per estimator.

Replications draw from independent RNG streams keyed by (seed, replication
index), so results are identical for any level of parallelism and any
thread schedule.  NE semantics: a Watson NotEligible or a Fisher-Bingham
SingularSystem counts as a non-existence event and is excluded from bias
and MSE; any other failure aborts loudly.

Default replication count is 2000, a fifth of the full-scale studies the
reference tables use; Monte Carlo standard errors (reported for every
cell) are correspondingly sqrt(5) times larger.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import est_fb, est_vmf, est_watson, sampler
from .linalg import SingularSystem, spectral_norm
from .models import (
    FisherBinghamParams,
    Params,
    VmfParams,
    WatsonParams,
    params_to_dict,
)

_VMF_ESTIMATORS: dict[str, Callable] = {
    "st": est_vmf.kappa_stein,
    "st2": est_vmf.kappa_stein2,
    "ml": est_vmf.kappa_mle,
    "sm": est_vmf.kappa_score_matching,
}
_WATSON_ESTIMATORS: dict[str, Callable] = {
    "st": est_watson.watson_stein_fit,
    "mla": est_watson.watson_mla_fit,
    "ml": est_watson.watson_mle_fit,
}
_FB_ESTIMATORS: dict[str, Callable] = {
    "st": est_fb.fb_stein_fit,
}

DEFAULT_ESTIMATORS = {
    "vmf": ("st", "ml", "sm"),
    "watson": ("st", "mla"),
    "fb": ("st",),
}


@dataclass
class SimConfig:
    params: Params
    n: int
    reps: int = 2000
    estimators: tuple[str, ...] = ()
    seed: int = 0
    threads: int = 1
    label: str = ""

    def __post_init__(self):
        self.estimators = tuple(e.lower() for e in self.estimators)
        if not self.estimators:
            self.estimators = DEFAULT_ESTIMATORS[self.family]
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        registry = _estimator_registry(self.family)
        for est in self.estimators:
            if est not in registry:
                raise ValueError(f"unknown estimator {est!r} for {self.family}")

    @property
    def family(self) -> str:
        if isinstance(self.params, VmfParams):
            return "vmf"
        if isinstance(self.params, WatsonParams):
            return "watson"
        if isinstance(self.params, FisherBinghamParams):
            return "fb"
        raise TypeError(f"unsupported parameter type {type(self.params)!r}")


@dataclass
class Cell:
    """Metrics for one estimator and one parameter block."""

    block: str
    bias: float | None
    bias_se: float | None
    mse: float
    mse_se: float
    ne: float
    # alternative error reading (mean distance instead of mean squared
    # distance); populated for the Fisher-Bingham blocks only
    mse_alt: float | None = None
    mse_alt_se: float | None = None


@dataclass
class SimResult:
    family: str
    n: int
    reps: int
    seed: int
    params: dict
    cells: dict[str, dict[str, Cell]]  # estimator -> block -> Cell
    warnings: list[str] = field(default_factory=list)
    walltime: float = 0.0
    label: str = ""

    def to_csv(self) -> str:
        """Deterministic CSV, one row per estimator x parameter block.

        Wall time is intentionally excluded so output bytes are identical
        across parallelism levels at a fixed seed.
        """
        fields = [
            "label", "family", "n", "reps", "seed", "estimator", "block",
            "bias", "bias_se", "mse", "mse_se", "mse_alt", "mse_alt_se", "ne",
        ]
        lines = [",".join(fields)]
        for est in sorted(self.cells):
            for block in sorted(self.cells[est]):
                cell = self.cells[est][block]
                row = [
                    self.label, self.family, str(self.n), str(self.reps),
                    str(self.seed), est, block,
                    _fmt(cell.bias), _fmt(cell.bias_se),
                    _fmt(cell.mse), _fmt(cell.mse_se),
                    _fmt(cell.mse_alt), _fmt(cell.mse_alt_se), _fmt(cell.ne),
                ]
                lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        header = (
            f"{self.label or self.family}: n={self.n} reps={self.reps} "
            f"seed={self.seed} ({self.walltime:.1f}s)"
        )
        lines = [header, f"{'estimator':<10}{'block':<7}{'bias':>12}"
                 f"{'mse':>12}{'ne':>8}"]
        for est in sorted(self.cells):
            for block in sorted(self.cells[est]):
                cell = self.cells[est][block]
                bias = f"{cell.bias:.4g}" if cell.bias is not None else "-"
                lines.append(
                    f"{est:<10}{block:<7}{bias:>12}{cell.mse:>12.4g}"
                    f"{cell.ne:>8.4g}"
                )
        return "\n".join(lines)


def _fmt(value) -> str:
    return "" if value is None else f"{value:.17g}"


def _estimator_registry(family: str) -> dict[str, Callable]:
    return {"vmf": _VMF_ESTIMATORS, "watson": _WATSON_ESTIMATORS,
            "fb": _FB_ESTIMATORS}[family]


def _sample(params: Params, n: int, rng: sampler.RngState) -> np.ndarray:
    if isinstance(params, VmfParams):
        return sampler.sample_vmf(params, n, rng)
    if isinstance(params, WatsonParams):
        return sampler.sample_watson(params, n, rng)
    return sampler.sample_fb(params, n, rng)


def _replicate(config: SimConfig, rep: int) -> dict:
    """One replication: fresh stream, one dataset, every estimator fit.

    Returns per-estimator either None (NE event) or the error summary the
    aggregation needs.
    """
    rng = sampler.RngState(config.seed, stream=rep)
    x = _sample(config.params, config.n, rng)
    registry = _estimator_registry(config.family)
    out = {}
    for est in config.estimators:
        try:
            fit = registry[est](x)
        except (est_watson.NotEligible, SingularSystem):
            out[est] = None
            continue
        except Exception as exc:
            raise RuntimeError(
                f"estimator {est!r} failed hard on replication {rep} "
                f"(seed {config.seed}): {exc}"
            ) from exc
        if config.family == "fb":
            out[est] = (
                float(np.linalg.norm(fit.mu_hat - config.params.mu)),
                spectral_norm(fit.A_hat - config.params.A),
            )
        else:
            out[est] = fit.kappa_hat - config.params.kappa
    return out


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))


def run_simulation(config: SimConfig) -> SimResult:
    """Run all replications and aggregate bias/MSE/NE per estimator.

    Failures beyond the NE semantics propagate with the replication index
    attached.
    """
    start = time.perf_counter()
    reps = range(config.reps)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(lambda r: _replicate(config, r), reps))
    else:
        outcomes = [_replicate(config, r) for r in reps]

    warnings = []
    if config.reps < 30:
        warnings.append(f"low replication count ({config.reps}); "
                        "standard errors are unreliable")

    cells: dict[str, dict[str, Cell]] = {}
    for est in config.estimators:
        values = [o[est] for o in outcomes]
        ne_rate = sum(v is None for v in values) / config.reps
        kept = [v for v in values if v is not None]
        if not kept:
            raise RuntimeError(f"estimator {est!r} never existed in {config.reps} reps")
        if config.family == "fb":
            mu_err = np.array([v[0] for v in kept])
            a_err = np.array([v[1] for v in kept])
            blocks = {}
            for name, err in (("mu", mu_err), ("A", a_err)):
                mse, mse_se = _mean_se(err**2)
                alt, alt_se = _mean_se(err)
                blocks[name] = Cell(
                    block=name, bias=None, bias_se=None,
                    mse=mse, mse_se=mse_se, ne=ne_rate,
                    mse_alt=alt, mse_alt_se=alt_se,
                )
            cells[est] = blocks
        else:
            err = np.array(kept)
            bias, bias_se = _mean_se(err)
            mse, mse_se = _mean_se(err**2)
            cells[est] = {
                "kappa": Cell(
                    block="kappa", bias=bias, bias_se=bias_se,
                    mse=mse, mse_se=mse_se, ne=ne_rate,
                )
            }

    return SimResult(
        family=config.family,
        n=config.n,
        reps=config.reps,
        seed=config.seed,
        params=params_to_dict(config.params),
        cells=cells,
        warnings=warnings,
        walltime=time.perf_counter() - start,
        label=config.label,
    )


@dataclass
class ComparisonRow:
    label: str
    block: str
    cells: dict[str, Cell]
    best_bias: str | None
    best_mse: str


def compare_estimators(configs: list[SimConfig]) -> list[ComparisonRow]:
    """Run each config and flag the best |bias| and best MSE per row.

    Estimators within a row share replication datasets, so the flags are
    paired comparisons.
    """
    rows = []
    for config in configs:
        if len(config.estimators) < 2:
            raise ValueError("comparison needs at least two estimators")
        result = run_simulation(config)
        blocks = sorted({b for est in result.cells for b in result.cells[est]})
        for block in blocks:
            cells = {est: result.cells[est][block] for est in result.cells}
            with_bias = {e: c for e, c in cells.items() if c.bias is not None}
            best_bias = (
                min(with_bias, key=lambda e: abs(with_bias[e].bias))
                if with_bias else None
            )
            best_mse = min(cells, key=lambda e: cells[e].mse)
            rows.append(ComparisonRow(
                label=result.label or f"{result.family} n={result.n}",
                block=block, cells=cells,
                best_bias=best_bias, best_mse=best_mse,
            ))
    return rows


def comparison_table(rows: list[ComparisonRow]) -> str:
    lines = []
    for row in rows:
        parts = [f"{row.label} [{row.block}]"]
        for est in sorted(row.cells):
            cell = row.cells[est]
            bias = f"{cell.bias:.4g}" if cell.bias is not None else "-"
            mark_b = "*" if est == row.best_bias else " "
            mark_m = "*" if est == row.best_mse else " "
            parts.append(
                f"{est}: bias={bias}{mark_b} mse={cell.mse:.4g}{mark_m} "
                f"ne={cell.ne:.3g}"
            )
        lines.append("  ".join(parts))
    return "\n".join(lines)
