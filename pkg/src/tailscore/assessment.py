"""Assessment methods for competing extreme-quantile predictors.

Three ways to pick the best predictor of the quantile at level p0 from a
sample of size n:

* ``qs``: the conventional in-sample quantile score at p0.
* ``scv1``: cross-validated scoring with a small training sample (one fold)
  and a large validation sample (the other k-1 folds). The trial level p_c
  and training size n_c are calibrated so the expected number of exceedances
  in the training sample matches the original problem ("equally extreme"),
  while a tuning parameter alpha fixes the expected number of validation
  exceedances.
* ``scv2``: the same calibration with conventional fold roles, training on
  k-1 folds and validating on one.

Scores for several alpha values are combined with equal weights; the
selected predictor minimizes the combined score (ties go to the lowest
predictor index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .predictors import _predict_sorted
from .scoring import average_score

METHOD_QS = "qs"
METHOD_SCV1 = "scv1"
METHOD_SCV2 = "scv2"


class InfeasiblePlanError(ValueError):
    """No valid cross-validation geometry exists for (n, p0, alpha)."""


def _floor_snapped(x: float) -> int:
    """floor(x) after snapping values within 1e-9 (relative) of an integer.

    The fold-count algebra divides by n*(1-p0), which carries cancellation
    error; without the snap, alpha=8 at n=7500, p0=1-1/15000 yields
    16.999999999999102 and a wrong k.
    """
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(r)):
        return int(r)
    return int(math.floor(x))


@dataclass(frozen=True)
class CvPlan:
    """Derived cross-validation geometry for one tuning value alpha."""

    n: int
    p0: float
    alpha: float
    method: str
    k: int
    n_c: int
    p_c: float


def derive_cv_params(n: int, p0: float, alpha: float, method: str) -> CvPlan:
    """Solve the equal-extremeness conditions for (k, n_c, p_c).

    Training at level p_c on n_c points keeps n_c*(1-p_c) = n*(1-p0), while
    alpha = (n-n_c)*(1-p_c) sets the expected validation exceedances. For
    ``scv1`` the training sample is one fold (k = floor(1 + alpha/(n(1-p0)))),
    for ``scv2`` it is k-1 folds (k = floor(n(1-p0)/alpha + 1)); both give
    p_c = p0 - alpha/n.
    """
    if method not in (METHOD_SCV1, METHOD_SCV2):
        raise ValueError(f"unknown method {method!r}")
    if n < 2:
        raise InfeasiblePlanError(f"need n >= 2, got {n}")
    if not 0.0 < p0 < 1.0:
        raise InfeasiblePlanError(f"target level p0 must lie in (0, 1), got {p0}")
    if not alpha > 0.0:
        raise InfeasiblePlanError(f"tuning parameter alpha must be positive, got {alpha}")

    expected_exceed = n * (1.0 - p0)
    if method == METHOD_SCV1:
        k = _floor_snapped(1.0 + alpha / expected_exceed)
    else:
        k = _floor_snapped(expected_exceed / alpha + 1.0)
    p_c = p0 - alpha / n

    if k < 2:
        raise InfeasiblePlanError(
            f"alpha={alpha} gives k={k} (<2) for n={n}, p0={p0} under {method}; "
            f"{'increase' if method == METHOD_SCV1 else 'decrease'} alpha"
        )
    if k > n:
        raise InfeasiblePlanError(f"alpha={alpha} gives k={k} > n={n}")
    if not 0.0 < p_c < 1.0:
        raise InfeasiblePlanError(
            f"trial level p_c = p0 - alpha/n = {p_c} falls outside (0, 1)"
        )

    n_c = n // k if method == METHOD_SCV1 else n - n // k
    return CvPlan(n=n, p0=p0, alpha=float(alpha), method=method, k=k, n_c=n_c, p_c=p_c)


def matched_alphas(n: int, p0: float, alphas, method: str) -> tuple:
    """Fold-matched tuning values for ``method``.

    The two cross-validation geometries are compared at equal fold counts k,
    and a given k corresponds to different alpha under each (small-train:
    alpha = n(1-p0)(k-1); large-train: alpha = n(1-p0)/(k-1)). A value lying
    in the other method's feasible range (the ranges split at alpha =
    n(1-p0)) is converted to this method's value with the same k, e.g.
    (1, 2, 4, 8) becomes (1/4, 1/8, 1/16, 1/32) for ``scv2`` at n = 7500,
    p0 = 1 - 1/15000.
    """
    if method not in (METHOD_SCV1, METHOD_SCV2):
        raise ValueError(f"unknown method {method!r}")
    expected_exceed = n * (1.0 - p0)
    out = []
    for a in alphas:
        a = float(a)
        if not a > 0:
            raise ValueError(f"tuning parameter alpha must be positive, got {a}")
        if method == METHOD_SCV1 and a < expected_exceed:
            k = _floor_snapped(expected_exceed / a + 1.0)
            # round off the cancellation noise n*(1-p0) carries, e.g.
            # 0.24999999999997247 -> 0.25
            out.append(round(expected_exceed * (k - 1), 12))
        elif method == METHOD_SCV2 and a > expected_exceed:
            k = _floor_snapped(1.0 + a / expected_exceed)
            out.append(round(expected_exceed / (k - 1), 12))
        else:
            out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class FoldAssignment:
    """Deterministic random partition of n indices into k near-equal folds."""

    fold_of: np.ndarray
    k: int
    seed: int


def partition_folds(n: int, k: int, seed: int) -> FoldAssignment:
    """Deal a seeded uniform permutation of indices round-robin into k folds."""
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[perm] = np.arange(n) % k
    return FoldAssignment(fold_of=fold_of, k=k, seed=seed)


def fold_seed(seed: int, alpha_pos: int) -> int:
    """Sub-seed for the fold partition of the alpha at position ``alpha_pos``.

    Shared by scv1 and scv2 so that equal k yields equal partitions, making
    the two methods exact mirrors at k = 2.
    """
    ss = np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, alpha_pos))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class ScoreReport:
    """Scores, selection and audit trail of one assessment method."""

    method: str
    n: int
    p0: float
    alphas: tuple
    plans: tuple
    predictions_at_p0: tuple
    per_alpha_scores: Optional[np.ndarray]  # (n_predictors, n_alphas)
    combined_scores: np.ndarray
    selected_pos: int
    fallback_counts: tuple

    @property
    def predictor_labels(self) -> tuple:
        return tuple(pr.spec.label for pr in self.predictions_at_p0)

    @property
    def predictor_indices(self) -> tuple:
        return tuple(pr.spec.index for pr in self.predictions_at_p0)

    @property
    def selected_index(self) -> int:
        return self.predictions_at_p0[self.selected_pos].spec.index

    @property
    def selected_label(self) -> str:
        return self.predictions_at_p0[self.selected_pos].spec.label

    @property
    def selected_prediction(self) -> float:
        return self.predictions_at_p0[self.selected_pos].value

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "p0": self.p0,
            "alphas": list(self.alphas),
            "plans": [
                {"alpha": pl.alpha, "k": pl.k, "n_c": pl.n_c, "p_c": pl.p_c}
                for pl in self.plans
            ],
            "predictors": list(self.predictor_labels),
            "predictor_indices": list(self.predictor_indices),
            "per_alpha_scores": None
            if self.per_alpha_scores is None
            else [[float(v) for v in row] for row in self.per_alpha_scores],
            "combined_scores": [float(v) for v in self.combined_scores],
            "selected_index": self.selected_index,
            "selected_label": self.selected_label,
            "selected_prediction": self.selected_prediction,
            "predictions_at_p0": [
                {
                    "index": pr.spec.index,
                    "label": pr.spec.label,
                    "value": pr.value,
                    "fallback_used": pr.fallback_used,
                }
                for pr in self.predictions_at_p0
            ],
            "fallback_counts": list(self.fallback_counts),
        }


def _argmin_by_index(scores: np.ndarray, indices: Sequence[int]) -> int:
    """Position of the smallest score; exact ties go to the lowest predictor index."""
    return min(range(len(scores)), key=lambda i: (scores[i], indices[i]))


def _full_sample_predictions(specs, y: np.ndarray, p0: float) -> tuple:
    ys = np.sort(y)
    return tuple(_predict_sorted(spec, ys, p0) for spec in specs)


def conventional_assess(predictions, p0: float, sample) -> ScoreReport:
    """In-sample quantile score at p0 for predictions made from the full sample."""
    y = np.asarray(sample, dtype=float)
    preds = tuple(predictions)
    if not preds:
        raise ValueError("no predictions to assess")
    scores = np.array([average_score(pr.value, p0, y) for pr in preds])
    selected = _argmin_by_index(scores, [pr.spec.index for pr in preds])
    return ScoreReport(
        method=METHOD_QS,
        n=int(y.size),
        p0=p0,
        alphas=(),
        plans=(),
        predictions_at_p0=preds,
        per_alpha_scores=None,
        combined_scores=scores,
        selected_pos=selected,
        fallback_counts=tuple(int(pr.fallback_used) for pr in preds),
    )


def _cv_assess(specs, p0, alphas, sample, seed, method, predictions) -> ScoreReport:
    y = np.asarray(sample, dtype=float)
    if y.size == 0:
        raise ValueError("cannot assess on an empty sample")
    specs = list(specs)
    if not specs:
        raise ValueError("no predictor specs given")
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ValueError("need at least one tuning value alpha")

    plans = tuple(derive_cv_params(y.size, p0, a, method) for a in alphas)
    per_alpha = np.empty((len(specs), len(alphas)))
    fallbacks = np.zeros(len(specs), dtype=int)

    for i, plan in enumerate(plans):
        assignment = partition_folds(y.size, plan.k, fold_seed(seed, i))
        fold_scores = np.empty((len(specs), plan.k))
        for j in range(plan.k):
            in_fold = assignment.fold_of == j
            if method == METHOD_SCV1:
                train, valid = y[in_fold], y[~in_fold]
            else:
                train, valid = y[~in_fold], y[in_fold]
            train_sorted = np.sort(train)
            for s, spec in enumerate(specs):
                pr = _predict_sorted(spec, train_sorted, plan.p_c)
                fallbacks[s] += pr.fallback_used
                fold_scores[s, j] = average_score(pr.value, plan.p_c, valid)
        per_alpha[:, i] = fold_scores.mean(axis=1)

    combined = per_alpha.mean(axis=1)
    if predictions is None:
        predictions = _full_sample_predictions(specs, y, p0)
    else:
        predictions = tuple(predictions)
    selected = _argmin_by_index(combined, [spec.index for spec in specs])
    return ScoreReport(
        method=method,
        n=int(y.size),
        p0=p0,
        alphas=alphas,
        plans=plans,
        predictions_at_p0=predictions,
        per_alpha_scores=per_alpha,
        combined_scores=combined,
        selected_pos=selected,
        fallback_counts=tuple(int(c) for c in fallbacks),
    )


def scv1(specs, p0: float, alphas, sample, seed: int, predictions=None) -> ScoreReport:
    """Small-train / large-validate cross-validated combined score.

    For each alpha: derive the plan, split into k folds, train every
    predictor on each single fold at level p_c and score it against the
    complement; average over folds, then over alphas with equal weights.

    ``predictions`` optionally supplies precomputed full-sample predictions
    at p0 (they are recomputed otherwise).
    """
    return _cv_assess(specs, p0, alphas, sample, seed, METHOD_SCV1, predictions)


def scv2(specs, p0: float, alphas, sample, seed: int, predictions=None) -> ScoreReport:
    """Large-train / small-validate variant: train on k-1 folds, score on one."""
    return _cv_assess(specs, p0, alphas, sample, seed, METHOD_SCV2, predictions)
