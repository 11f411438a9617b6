"""Check loss and average quantile score."""

from __future__ import annotations

import numpy as np


def check_loss(a, b, p: float):
    """Asymmetric piecewise-linear loss (a - b)(p - 1[a < b]); pinball loss.

    Nonnegative, zero iff a == b; its expectation over b is minimized when a
    is the p-quantile of b.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"loss level must lie in (0, 1), got {p}")
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    out = (av - bv) * (p - (av < bv))
    return float(out) if out.ndim == 0 else out


def average_score(prediction: float, p: float, validation) -> float:
    """Mean check loss of a point prediction over a validation sample.

    The loss is applied to (observation, prediction), i.e. to the residual
    observation - prediction, so under-prediction of a high quantile costs p
    per unit and the expected score is minimized by the true p-quantile (the
    consistent scoring rule for the quantile functional).
    """
    xs = np.asarray(validation, dtype=float)
    if xs.size == 0:
        raise ValueError("average score over an empty validation sample")
    return float(np.mean(check_loss(xs, prediction, p)))
