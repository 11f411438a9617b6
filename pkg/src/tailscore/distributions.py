"""Sampleable univariate data models: GPD, GEV, Gamma, Uniform and finite mixtures.

Every family exposes a vectorized ``cdf`` and ``quantile``; :class:`DataModel`
combines weighted components and supports exact inverse-transform sampling
from a seeded :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gammainc

# |shape| below this uses the exponential/Gumbel limiting branch, which keeps
# the power-branch cancellation error under 1e-5 of the limit.
SHAPE_ZERO_TOL = 1e-6

_QUANTILE_X_TOL = 1e-10
_QUANTILE_P_TOL = 1e-12
_BISECT_MAX_ITER = 200


def as_generator(rng: Union[int, np.random.Generator]) -> np.random.Generator:
    """Accept either a seed or a ready Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _scalar_like(x, out):
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class Uniform:
    """Uniform distribution on (lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError(f"uniform needs hi > lo, got ({self.lo}, {self.hi})")

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.clip((xs - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return _scalar_like(x, out)

    def quantile(self, p):
        ps = np.asarray(p, dtype=float)
        return _scalar_like(p, self.lo + ps * (self.hi - self.lo))


@dataclass(frozen=True)
class Gpd:
    """Generalized Pareto: location (threshold), scale, shape.

    Support is [location, inf) for shape >= 0 and
    [location, location - scale/shape] for shape < 0.
    """

    location: float
    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"gpd scale must be positive, got {self.scale}")

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        z = np.maximum((xs - self.location) / self.scale, 0.0)
        if abs(self.shape) < SHAPE_ZERO_TOL:
            out = -np.expm1(-z)
        else:
            t = 1.0 + self.shape * z
            # t <= 0 only past the upper endpoint when shape < 0
            out = np.where(
                t > 0.0, -np.expm1(np.log(np.maximum(t, 1e-300)) / -self.shape), 1.0
            )
        return _scalar_like(x, out)

    def quantile(self, p):
        ps = np.asarray(p, dtype=float)
        if abs(self.shape) < SHAPE_ZERO_TOL:
            out = self.location - self.scale * np.log1p(-ps)
        else:
            out = self.location + self.scale / self.shape * np.expm1(
                -self.shape * np.log1p(-ps)
            )
        return _scalar_like(p, out)


@dataclass(frozen=True)
class Gev:
    """Generalized extreme value: location, scale, shape."""

    location: float
    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"gev scale must be positive, got {self.scale}")

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        z = (xs - self.location) / self.scale
        if abs(self.shape) < SHAPE_ZERO_TOL:
            out = np.exp(-np.exp(-z))
        else:
            t = 1.0 + self.shape * z
            with np.errstate(over="ignore"):
                core = np.exp(-np.power(np.maximum(t, 1e-300), -1.0 / self.shape))
            # below the lower endpoint (shape > 0) the cdf is 0; above the
            # upper endpoint (shape < 0) it is 1
            out = np.where(t > 0.0, core, 1.0 if self.shape < 0 else 0.0)
        return _scalar_like(x, out)

    def quantile(self, p):
        ps = np.asarray(p, dtype=float)
        if abs(self.shape) < SHAPE_ZERO_TOL:
            out = self.location - self.scale * np.log(-np.log(ps))
        else:
            out = self.location + self.scale / self.shape * np.expm1(
                -self.shape * np.log(-np.log(ps))
            )
        return _scalar_like(p, out)


@dataclass(frozen=True)
class Gamma:
    """Gamma with redundant (rate, scale, shape) triple; effective scale is scale/rate."""

    rate: float
    scale: float
    shape: float

    def __post_init__(self):
        for name in ("rate", "scale", "shape"):
            if not getattr(self, name) > 0:
                raise ValueError(f"gamma {name} must be positive")

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        out = gammainc(self.shape, np.maximum(xs, 0.0) * self.rate / self.scale)
        return _scalar_like(x, out)

    def quantile(self, p):
        # No closed form. Bisect on log(x): for shape < 1 the density is
        # unbounded at 0 and quantiles can sit at ~1e-20, where an absolute
        # bracket cannot deliver |cdf(q) - p| <= 1e-9.
        ps = np.atleast_1d(np.asarray(p, dtype=float))
        _check_prob_open(ps)
        lo = np.full(ps.shape, -746.0)  # exp(-746) underflows to the tiniest double
        hi = np.zeros(ps.shape)
        pmax = ps.max()
        while self.cdf(math.exp(hi.flat[0])) < pmax:
            hi += 1.0
        t = _bisect(lambda u: self.cdf(np.exp(u)), ps, lo, hi, x_tol=1e-12)
        return _scalar_like(p, np.exp(t) if np.ndim(p) else float(np.exp(t[0])))


Family = Union[Uniform, Gpd, Gev, Gamma]


def _check_prob_open(ps) -> None:
    if np.any(ps <= 0.0) or np.any(ps >= 1.0):
        raise ValueError("probability level must lie strictly inside (0, 1)")


def _bisect(cdf, ps, lo, hi, x_tol=_QUANTILE_X_TOL, p_tol=_QUANTILE_P_TOL):
    """Vectorized bisection for cdf(x) = p on a bracketing interval.

    Runs until the interval is below ``x_tol`` and the cdf residual below
    ``p_tol`` (or the hard iteration cap, by then at machine resolution).
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    mid = 0.5 * (lo + hi)
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        f = cdf(mid)
        below = f < ps
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= x_tol) and np.all(np.abs(f - ps) <= p_tol):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DataModel:
    """Finite mixture of weighted component families.

    Weights must be in (0, 1] and sum to 1 within 1e-12.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), f) for w, f in self.components)
        if not comps:
            raise ValueError("data model needs at least one component")
        total = 0.0
        for w, _ in comps:
            if not 0.0 < w <= 1.0:
                raise ValueError(f"component weight {w} outside (0, 1]")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component weights sum to {total}, expected 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, family: Family) -> "DataModel":
        return cls(((1.0, family),))

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        out = sum(w * np.asarray(f.cdf(xs)) for w, f in self.components)
        return _scalar_like(x, out)

    def quantile(self, p):
        ps = np.atleast_1d(np.asarray(p, dtype=float))
        _check_prob_open(ps)
        if len(self.components) == 1:
            return self.components[0][1].quantile(p)
        comp_q = np.stack([f.quantile(ps) for _, f in self.components])
        lo = comp_q.min(axis=0) - 1e-9
        hi = comp_q.max(axis=0) + 1e-9
        # grow geometrically in the (rare) event the component bracket is off
        width = np.maximum(hi - lo, 1.0)
        for _ in range(200):
            bad_lo = self.cdf(lo) > ps
            bad_hi = self.cdf(hi) < ps
            if not (np.any(bad_lo) or np.any(bad_hi)):
                break
            lo = np.where(bad_lo, lo - width, lo)
            hi = np.where(bad_hi, hi + width, hi)
            width *= 2.0
        out = _bisect(self.cdf, ps, lo, hi)
        return _scalar_like(p, out if np.ndim(p) else float(out[0]))

    def sample(self, n: int, rng: Union[int, np.random.Generator]) -> np.ndarray:
        """Draw n i.i.d. values by component selection + inverse transform."""
        if n < 1:
            raise ValueError(f"sample size must be >= 1, got {n}")
        gen = as_generator(rng)
        if len(self.components) == 1:
            u = np.maximum(gen.random(n), np.finfo(float).tiny)
            return np.asarray(self.components[0][1].quantile(u))
        weights = np.array([w for w, _ in self.components])
        cumw = np.cumsum(weights)
        comp_idx = np.searchsorted(cumw, gen.random(n), side="right")
        # random() can return exactly 0, outside the open quantile domain
        u = np.maximum(gen.random(n), np.finfo(float).tiny)
        out = np.empty(n)
        for i, (_, family) in enumerate(self.components):
            mask = comp_idx == i
            if np.any(mask):
                out[mask] = family.quantile(u[mask])
        return out


_FAMILY_RE = re.compile(r"^(gpd|gev|gamma|unif)\s*\(([^()]*)\)$", re.IGNORECASE)


def _parse_family(text: str) -> Family:
    m = _FAMILY_RE.match(text.strip())
    if m is None:
        raise ValueError(f"unrecognized model component {text!r}")
    name = m.group(1).lower()
    try:
        args = [float(a) for a in m.group(2).split(",")]
    except ValueError as exc:
        raise ValueError(f"bad numeric argument in {text!r}") from exc
    arity = {"gpd": 3, "gev": 3, "gamma": 3, "unif": 2}[name]
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} arguments, got {len(args)} in {text!r}")
    if name == "gpd":
        return Gpd(*args)
    if name == "gev":
        return Gev(*args)
    if name == "gamma":
        return Gamma(*args)
    return Uniform(*args)


def _split_terms(body: str) -> list:
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0:
            terms.append(body[start:i])
            start = i + 1
    terms.append(body[start:])
    return terms


def parse_model(text: str) -> DataModel:
    """Parse the model grammar.

    Examples: ``gpd(10,1,0.5)``, ``unif(0,10)``,
    ``mix(0.5*unif(0,10) + 0.5*gpd(10,1,0.5))``.
    """
    s = text.strip()
    low = s.lower()
    if low.startswith("mix(") and s.endswith(")"):
        body = s[4:-1]
        components = []
        for term in _split_terms(body):
            if "*" not in term:
                raise ValueError(f"mixture term {term!r} must look like weight*family(...)")
            w_text, fam_text = term.split("*", 1)
            components.append((float(w_text), _parse_family(fam_text)))
        return DataModel(tuple(components))
    return DataModel.of(_parse_family(s))
