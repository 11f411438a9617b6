"""Monte Carlo benchmark of the assessment methods.

Generates replicates from a data model, lets each method (qs, scv1, scv2)
select its predictor, re-applies the winner to the full replicate at the
target level, and accumulates RMSE against the model's true quantile plus
selection-frequency histograms. Median-of-predictors and random-predictor
baselines ride along for comparison.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .assessment import (
    METHOD_QS,
    METHOD_SCV1,
    METHOD_SCV2,
    conventional_assess,
    matched_alphas,
    scv1,
    scv2,
)
from .distributions import DataModel
from .predictors import PredictorSpec, _predict_sorted, predictor_set

BASELINE_MEDIAN = "median"
BASELINE_RANDOM = "random"

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SimulationConfig:
    model: DataModel
    n: int = 7500
    replicates: int = 200
    p0: Optional[float] = None  # None resolves to 1 - 1/(2n)
    alphas: Tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    predictor_set: Union[str, Sequence[PredictorSpec]] = "zero-ab"
    master_seed: int = 0
    methods: Tuple[str, ...] = (METHOD_QS, METHOD_SCV1, METHOD_SCV2)

    @property
    def resolved_p0(self) -> float:
        return self.p0 if self.p0 is not None else 1.0 - 1.0 / (2.0 * self.n)

    def specs(self) -> List[PredictorSpec]:
        if isinstance(self.predictor_set, str):
            return predictor_set(self.predictor_set)
        return list(self.predictor_set)


@dataclass
class SimulationResult:
    config: SimulationConfig
    true_quantile: float
    # method -> one (selected predictor index, chosen prediction) per replicate;
    # baselines use index None (median) or the drawn predictor index (random)
    per_replicate: Dict[str, List[Tuple[Optional[int], float]]]
    rmse: Dict[str, float] = field(default_factory=dict)
    selection_counts: Dict[str, Dict[int, int]] = field(default_factory=dict)

    def recompute_rmse(self, method: str) -> float:
        values = np.array([v for _, v in self.per_replicate[method]])
        return float(np.sqrt(np.mean((values - self.true_quantile) ** 2)))


def replicate_seeds(master_seed: int, replicate: int) -> Tuple[int, int, int, int]:
    """Splittable per-replicate seeds: (sampling, scv1, scv2, random baseline)."""
    ss = np.random.SeedSequence((master_seed & _SEED_MASK, replicate))
    return tuple(int(s) for s in ss.generate_state(4))


def median_baseline(predictions) -> float:
    """Median of the competing predicted values (mean of middles when even)."""
    values = [pr.value for pr in predictions]
    if not values:
        raise ValueError("median of no predictions")
    return float(np.median(values))


def random_baseline(predictions, rng) -> Tuple[int, float]:
    """A uniformly drawn prediction; returns (predictor index, value)."""
    preds = list(predictions)
    if not preds:
        raise ValueError("random choice from no predictions")
    pick = preds[int(rng.integers(len(preds)))]
    return pick.spec.index, pick.value


def run_simulation(config: SimulationConfig) -> SimulationResult:
    if config.replicates < 1:
        raise ValueError("need at least one replicate")
    specs = config.specs()
    p0 = config.resolved_p0
    true_q = config.model.quantile(p0)
    alphas_scv1 = matched_alphas(config.n, p0, config.alphas, METHOD_SCV1)
    alphas_scv2 = matched_alphas(config.n, p0, config.alphas, METHOD_SCV2)

    methods = tuple(config.methods)
    keys = list(methods) + [BASELINE_MEDIAN, BASELINE_RANDOM]
    per_replicate: Dict[str, List[Tuple[Optional[int], float]]] = {k: [] for k in keys}

    for i in range(config.replicates):
        s_sample, s1, s2, s_rand = replicate_seeds(config.master_seed, i)
        y = config.model.sample(config.n, np.random.default_rng(s_sample))
        ys = np.sort(y)
        predictions = tuple(_predict_sorted(spec, ys, p0) for spec in specs)

        if METHOD_QS in methods:
            rep = conventional_assess(predictions, p0, y)
            per_replicate[METHOD_QS].append((rep.selected_index, rep.selected_prediction))
        if METHOD_SCV1 in methods:
            rep = scv1(specs, p0, alphas_scv1, y, s1, predictions=predictions)
            per_replicate[METHOD_SCV1].append((rep.selected_index, rep.selected_prediction))
        if METHOD_SCV2 in methods:
            rep = scv2(specs, p0, alphas_scv2, y, s2, predictions=predictions)
            per_replicate[METHOD_SCV2].append((rep.selected_index, rep.selected_prediction))

        per_replicate[BASELINE_MEDIAN].append((None, median_baseline(predictions)))
        idx, value = random_baseline(predictions, np.random.default_rng(s_rand))
        per_replicate[BASELINE_RANDOM].append((idx, value))

    result = SimulationResult(
        config=config, true_quantile=float(true_q), per_replicate=per_replicate
    )
    for key in keys:
        result.rmse[key] = result.recompute_rmse(key)
    for method in methods:
        counts: Dict[int, int] = {}
        for idx, _ in per_replicate[method]:
            counts[idx] = counts.get(idx, 0) + 1
        result.selection_counts[method] = counts
    return result


def write_rmse_table(result: SimulationResult, path, model_label: str, set_label: str) -> None:
    """One wide row per run: model/set identity, then RMSE per method and baseline."""
    cfg = result.config
    keys = list(cfg.methods) + [BASELINE_MEDIAN, BASELINE_RANDOM]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["model", "set", "n", "replicates", "p0", "seed", "true_quantile"]
        header += [f"rmse_{k}" for k in keys]
        writer.writerow(header)
        row = [
            model_label,
            set_label,
            cfg.n,
            cfg.replicates,
            repr(cfg.resolved_p0),
            cfg.master_seed,
            repr(result.true_quantile),
        ]
        row += [repr(result.rmse[k]) for k in keys]
        writer.writerow(row)


def write_selection_freq(result: SimulationResult, path) -> None:
    labels = {spec.index: spec.label for spec in result.config.specs()}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "predictor_index", "predictor_label", "count"])
        for method in result.config.methods:
            counts = result.selection_counts[method]
            for idx in sorted(counts):
                writer.writerow([method, idx, labels.get(idx, "?"), counts[idx]])
