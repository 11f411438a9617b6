"""Competing extreme-quantile predictors.

Three kinds compete for a target level p:

* ``EMP`` (index 0): the empirical quantile, i.e. the ceil(n*p)-th order
  statistic, falling back to the sample maximum for out-of-sample levels.
* Set A (indices 1-10): GPD fitted to a fixed number m of upper order
  statistics, m in (150, 125, 100, 75, 50, 40, 30, 20, 10, 3). Lower index
  means lower threshold (more excesses).
* Set B (indices 11-20): GPD fitted to exceedances of a fixed sample
  percentile, levels (0.98, ..., 0.9996). The excess count scales with
  the training-sample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import SHAPE_ZERO_TOL, Gev
from .gpdfit import FitFailureError, InsufficientDataError, fit_gpd_mle

SET_A_COUNTS = (150, 125, 100, 75, 50, 40, 30, 20, 10, 3)
SET_B_LEVELS = (0.98, 0.9833, 0.9867, 0.99, 0.993, 0.995, 0.996, 0.9973, 0.9987, 0.9996)

KIND_EMPIRICAL = "empirical"
KIND_GPD_COUNT = "gpd_count"
KIND_GPD_PERCENTILE = "gpd_percentile"


class SpecInfeasibleError(ValueError):
    """The predictor cannot be formed on a training sample of this size."""


@dataclass(frozen=True)
class PredictorSpec:
    """Identity of one competing predictor; ``index`` is its canonical label."""

    kind: str
    index: int
    m: int = 0
    q: float = 0.0

    def __post_init__(self):
        if self.kind == KIND_GPD_COUNT and self.m < 2:
            raise ValueError(f"upper-order count must be >= 2, got {self.m}")
        if self.kind == KIND_GPD_PERCENTILE and not 0.0 < self.q < 1.0:
            raise ValueError(f"percentile level must lie in (0, 1), got {self.q}")

    @property
    def label(self) -> str:
        if self.kind == KIND_EMPIRICAL:
            return "EMP"
        if self.kind == KIND_GPD_COUNT:
            return f"A:m={self.m}"
        return f"B:q={self.q:g}"


def empirical_spec() -> PredictorSpec:
    return PredictorSpec(kind=KIND_EMPIRICAL, index=0)


def set_a() -> list:
    return [
        PredictorSpec(kind=KIND_GPD_COUNT, index=i + 1, m=m)
        for i, m in enumerate(SET_A_COUNTS)
    ]


def set_b() -> list:
    return [
        PredictorSpec(kind=KIND_GPD_PERCENTILE, index=i + 11, q=q)
        for i, q in enumerate(SET_B_LEVELS)
    ]


def predictor_set(name: str) -> list:
    """Resolve a predictor-set name: ``a``, ``b``, ``ab`` or ``zero-ab``."""
    key = name.lower().replace("_", "-")
    if key == "a":
        return set_a()
    if key == "b":
        return set_b()
    if key == "ab":
        return set_a() + set_b()
    if key == "zero-ab":
        return [empirical_spec()] + set_a() + set_b()
    raise ValueError(f"unknown predictor set {name!r}; expected a, b, ab or zero-ab")


@dataclass(frozen=True)
class GpdFit:
    """A fitted peaks-over-threshold model attached to its threshold."""

    u: float
    scale: float
    shape: float
    zeta_u: float
    n_exceed: int
    converged: bool
    log_likelihood: float


@dataclass(frozen=True)
class Prediction:
    value: float
    spec: PredictorSpec
    fallback_used: bool = False


def order_statistic_index(n: int, p: float) -> int:
    """ceil(n*p), with values within 1e-9 of an integer snapped first.

    The snap absorbs float roundoff such as 7500*0.98 = 7350.000000000001,
    whose true ceiling is 7350, not 7351.
    """
    v = n * p
    r = round(v)
    if abs(v - r) <= 1e-9:
        return int(r)
    return int(math.ceil(v))


def empirical_quantile(sample, p: float) -> float:
    """The ceil(n*p)-th order statistic; the maximum for out-of-sample levels."""
    ys = np.sort(np.asarray(sample, dtype=float))
    if ys.size == 0:
        raise ValueError("empirical quantile of an empty sample")
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    return _empirical_from_sorted(ys, p)


def _empirical_from_sorted(ys: np.ndarray, p: float) -> float:
    idx = order_statistic_index(ys.size, p)
    if idx < 1:
        idx = 1
    if idx > ys.size:
        return float(ys[-1])
    return float(ys[idx - 1])


def gpd_quantile(u: float, scale: float, shape: float, zeta_u: float, p: float) -> float:
    """Quantile at level p implied by a GPD above threshold u with exceedance rate zeta_u."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    if not zeta_u > 0.0:
        raise ValueError(f"exceedance rate must be positive, got {zeta_u}")
    ratio = zeta_u / (1.0 - p)
    if abs(shape) < SHAPE_ZERO_TOL:
        return u + scale * math.log(ratio)
    return u + scale / shape * (ratio**shape - 1.0)


def gpd_quantile_predict(fit: GpdFit, p: float) -> float:
    return gpd_quantile(fit.u, fit.scale, fit.shape, fit.zeta_u, p)


def gev_quantile_predict(params: Gev, p: float) -> float:
    """Quantile at level p of a GEV, inverting its CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    if abs(params.shape) < SHAPE_ZERO_TOL:
        return params.location - params.scale * math.log(-math.log(p))
    return params.location + params.scale / params.shape * (
        (-math.log(p)) ** -params.shape - 1.0
    )


def fit_gpd_above(sorted_sample: np.ndarray, u: float) -> GpdFit:
    """MLE fit of the excesses of ``sorted_sample`` strictly above ``u``."""
    pos = np.searchsorted(sorted_sample, u, side="right")
    excesses = sorted_sample[pos:] - u
    n_exceed = excesses.size
    if n_exceed < 2:
        raise InsufficientDataError(
            f"only {n_exceed} exceedances above threshold {u}; need at least 2"
        )
    fit = fit_gpd_mle(excesses)
    return GpdFit(
        u=float(u),
        scale=fit.scale,
        shape=fit.shape,
        zeta_u=n_exceed / sorted_sample.size,
        n_exceed=int(n_exceed),
        converged=fit.converged,
        log_likelihood=fit.log_likelihood,
    )


def predict(spec: PredictorSpec, training, p: float) -> Prediction:
    """Apply one predictor to a training sample at level p.

    GPD predictors that cannot be fitted (degenerate excesses, fewer than two
    exceedances, or a non-finite result) fall back to the training maximum
    with ``fallback_used`` set, keeping every predictor total and scoreable.
    """
    ys = np.sort(np.asarray(training, dtype=float))
    if ys.size == 0:
        raise ValueError("cannot predict from an empty training sample")
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    return _predict_sorted(spec, ys, p)


def _predict_sorted(spec: PredictorSpec, ys: np.ndarray, p: float) -> Prediction:
    if spec.kind == KIND_EMPIRICAL:
        return Prediction(value=_empirical_from_sorted(ys, p), spec=spec)

    n = ys.size
    if spec.kind == KIND_GPD_COUNT:
        if spec.m >= n:
            raise SpecInfeasibleError(
                f"{spec.label} needs more than {spec.m} training values, got {n}"
            )
        u = float(ys[n - spec.m - 1])
    elif spec.kind == KIND_GPD_PERCENTILE:
        u = _empirical_from_sorted(ys, spec.q)
    else:
        raise ValueError(f"unknown predictor kind {spec.kind!r}")

    try:
        fit = fit_gpd_above(ys, u)
        value = gpd_quantile_predict(fit, p)
    except (InsufficientDataError, FitFailureError):
        return Prediction(value=float(ys[-1]), spec=spec, fallback_used=True)
    if not math.isfinite(value):
        return Prediction(value=float(ys[-1]), spec=spec, fallback_used=True)
    return Prediction(value=float(value), spec=spec)
