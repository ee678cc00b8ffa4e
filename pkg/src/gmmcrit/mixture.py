"""Two-component univariate Gaussian mixture: density, likelihood, gradient.

The density is

    f(x) = alpha * N(x; mu1, sigma1^2) + (1 - alpha) * N(x; mu2, sigma2^2)

and all evaluation goes through component log-densities combined with
``logaddexp`` so well separated clusters never underflow.

Example:
    >>> s = Sample([1.0, 1.2, 2.0, 2.2])
    >>> p = MixtureParams(0.5, 1.1, 2.1, 0.1, 0.1)
    >>> round(loglik(p, s), 6)
    0.761998
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BoundaryGradientError,
    DegenerateEvaluationError,
    DomainError,
    SizeLimitError,
)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

CLASSIFY_TOL = 1e-6
SIGMA_FLOOR = 1e-8
TIE_TOL = 1e-12
SPECTRUM_MAX_N = 24


@dataclass(frozen=True)
class MixtureParams:
    """The five parameters (alpha, mu1, mu2, sigma1, sigma2).

    ``alpha`` is the weight of component 1. Construction validates
    ``0 <= alpha <= 1`` and strictly positive, finite standard deviations.
    """

    alpha: float
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        for name in ("alpha", "mu1", "mu2", "sigma1", "sigma2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if self.sigma1 <= 0.0 or self.sigma2 <= 0.0:
            raise DomainError(
                f"standard deviations must be positive, got "
                f"({self.sigma1!r}, {self.sigma2!r})"
            )

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "MixtureParams":
        if len(values) != 5:
            raise DomainError(f"expected 5 parameters, got {len(values)}")
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.alpha, self.mu1, self.mu2, self.sigma1, self.sigma2], dtype=float
        )

    def as_tuple(self) -> tuple:
        return (self.alpha, self.mu1, self.mu2, self.sigma1, self.sigma2)

    def swapped(self) -> "MixtureParams":
        """Label-switched representation of the same density."""
        return MixtureParams(
            1.0 - self.alpha, self.mu2, self.mu1, self.sigma2, self.sigma1
        )


@dataclass(frozen=True, eq=False)
class Sample:
    """Observations x_1..x_N, stored sorted and read-only."""

    points: np.ndarray

    def __init__(self, points: Iterable[float]):
        arr = np.sort(np.asarray(list(points), dtype=float).ravel())
        if arr.size < 1:
            raise DomainError("a sample needs at least one point")
        if not np.all(np.isfinite(arr)):
            raise DomainError("sample values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "points", arr)

    @property
    def N(self) -> int:
        return int(self.points.size)

    def __len__(self):
        return self.N

    def __iter__(self):
        return iter(self.points.tolist())

    def __eq__(self, other):
        return isinstance(other, Sample) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())

    def __repr__(self):
        return f"Sample(N={self.N}, points={self.points.tolist()!r})"

    @property
    def mean(self) -> float:
        return float(np.mean(self.points))

    @property
    def std(self) -> float:
        """Empirical standard deviation with the 1/N convention."""
        return float(np.sqrt(np.mean((self.points - self.mean) ** 2)))


@dataclass(frozen=True, eq=False)
class Responsibilities:
    """Posterior probability of component 1 for every point, plus totals."""

    gamma: np.ndarray
    n1: float
    n2: float


class Classification(str, enum.Enum):
    TRIVIAL = "Trivial"
    NONTRIVIAL = "NonTrivial"
    BOUNDARY = "Boundary"
    DEGENERATE = "Degenerate"

    def __str__(self):
        return self.value


def _as_sample(sample) -> Sample:
    return sample if isinstance(sample, Sample) else Sample(sample)


def trivial_point(sample, alpha: float = 0.5) -> MixtureParams:
    """The single-Gaussian critical point (alpha, xbar, xbar, s, s)."""
    sample = _as_sample(sample)
    s = sample.std
    if s <= 0.0:
        raise DomainError("trivial point undefined for a constant sample")
    return MixtureParams(alpha, sample.mean, sample.mean, s, s)


def _component_logs(params: MixtureParams, x: np.ndarray):
    """Unweighted component log-densities at ``x``."""
    z1 = (x - params.mu1) / params.sigma1
    z2 = (x - params.mu2) / params.sigma2
    l1 = -0.5 * z1 * z1 - math.log(params.sigma1) - LOG_SQRT_2PI
    l2 = -0.5 * z2 * z2 - math.log(params.sigma2) - LOG_SQRT_2PI
    return l1, l2


def _weighted_logs(params: MixtureParams, x: np.ndarray):
    la = math.log(params.alpha) if params.alpha > 0.0 else -math.inf
    lb = math.log1p(-params.alpha) if params.alpha < 1.0 else -math.inf
    c1 = la - math.log(params.sigma1) - LOG_SQRT_2PI
    c2 = lb - math.log(params.sigma2) - LOG_SQRT_2PI
    with np.errstate(over="ignore"):
        z1 = (x - params.mu1) * (1.0 / params.sigma1)
        z2 = (x - params.mu2) * (1.0 / params.sigma2)
        return c1 - 0.5 * (z1 * z1), c2 - 0.5 * (z2 * z2)


def log_density(params: MixtureParams, x) -> np.ndarray | float:
    """Log of the mixture density, evaluated without leaving log space."""
    xs = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise DomainError("x must be finite")
    w1, w2 = _weighted_logs(params, xs)
    out = np.logaddexp(w1, w2)
    return float(out) if out.ndim == 0 else out


def density(params: MixtureParams, x: float) -> float:
    """Mixture density at a single point.

    Raises:
        DomainError: non-finite ``x``.
        DegenerateEvaluationError: the value underflows to zero in double
            precision (use :func:`log_density` instead).
    """
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    value = math.exp(log_density(params, x))
    if value <= 0.0:
        raise DegenerateEvaluationError(
            f"density underflows to zero at x={x!r}; use log_density"
        )
    return value


def pointwise_loglik(params: MixtureParams, sample) -> np.ndarray:
    sample = _as_sample(sample)
    ll = log_density(params, sample.points)
    ll = np.atleast_1d(ll)
    bad = np.flatnonzero(~np.isfinite(ll))
    if bad.size:
        i = int(bad[0])
        raise DegenerateEvaluationError(
            f"density term {i} (x={sample.points[i]!r}) is not representable",
            index=i,
        )
    return ll


def loglik(params: MixtureParams, sample) -> float:
    """Log-likelihood: sum over points of the log mixture density."""
    return float(np.sum(pointwise_loglik(params, sample)))


def responsibilities(params: MixtureParams, sample) -> Responsibilities:
    """E-step posteriors gamma_i = alpha f1(x_i) / f(x_i)."""
    sample = _as_sample(sample)
    gamma, _ = _estep(params, sample.points)
    n1 = float(np.sum(gamma))
    return Responsibilities(gamma=gamma, n1=n1, n2=sample.N - n1)


def _estep(params: MixtureParams, x: np.ndarray):
    """Responsibilities and per-point log-density, sharing one pass."""
    w1, w2 = _weighted_logs(params, x)
    lf = np.logaddexp(w1, w2)
    if not np.isfinite(lf).all():
        i = int(np.flatnonzero(~np.isfinite(lf))[0])
        raise DegenerateEvaluationError(
            f"both component densities vanish at x[{i}]={x[i]!r}", index=i
        )
    if params.alpha == 1.0:
        gamma = np.ones_like(x)
    elif params.alpha == 0.0:
        gamma = np.zeros_like(x)
    else:
        gamma = np.exp(w1 - lf)
        np.minimum(gamma, 1.0, out=gamma)
    return gamma, lf


def grad_loglik(params: MixtureParams, sample) -> np.ndarray:
    """Gradient (d/dalpha, d/dmu1, d/dmu2, d/dsigma1, d/dsigma2).

    Only defined for 0 < alpha < 1; at the boundary the one-sided
    derivative is not provided and :class:`BoundaryGradientError` is raised.
    """
    if not 0.0 < params.alpha < 1.0:
        raise BoundaryGradientError(
            f"gradient requires 0 < alpha < 1, got {params.alpha!r}"
        )
    sample = _as_sample(sample)
    x = sample.points
    l1, l2 = _component_logs(params, x)
    gamma, lf = _estep(params, x)
    rest = 1.0 - gamma
    d1 = x - params.mu1
    d2 = x - params.mu2
    s1, s2 = params.sigma1, params.sigma2
    return np.array(
        [
            np.sum(np.exp(l1 - lf) - np.exp(l2 - lf)),
            np.sum(gamma * d1) / s1**2,
            np.sum(rest * d2) / s2**2,
            np.sum(gamma * (d1 * d1 / s1**3 - 1.0 / s1)),
            np.sum(rest * (d2 * d2 / s2**3 - 1.0 / s2)),
        ]
    )


def exponent_spectrum(params: MixtureParams, sample, tol: float = 1e-9):
    """Distinct values among the 2^N exponent sums over label assignments.

    For every assignment k in {1,2}^N the sum of (x_j - mu_{k_j})^2 /
    (2 sigma_{k_j}^2) is formed; values within ``tol`` of their sorted
    neighbour are merged.  A single distinct value means the two
    components coincide.

    Returns:
        ``(count, values)`` with ``values`` the smallest member of each
        cluster, increasing.
    """
    sample = _as_sample(sample)
    if sample.N > SPECTRUM_MAX_N:
        raise SizeLimitError(
            f"exponent spectrum enumerates 2^N sums; N={sample.N} exceeds "
            f"the limit {SPECTRUM_MAX_N}"
        )
    if tol <= 0:
        raise DomainError("tol must be positive")
    x = sample.points
    e1 = (x - params.mu1) ** 2 / (2.0 * params.sigma1**2)
    e2 = (x - params.mu2) ** 2 / (2.0 * params.sigma2**2)
    sums = np.zeros(1)
    for a, b in zip(e1, e2):
        sums = np.concatenate((sums + a, sums + b))
    sums.sort()
    starts = np.concatenate(([True], np.diff(sums) > tol))
    values = sums[starts]
    return int(values.size), values.tolist()


def canonicalize(params: MixtureParams) -> MixtureParams:
    """Pick the label ordering with mu1 < mu2, then sigma1 <= sigma2,
    then alpha <= 0.5 (ties judged at 1e-12)."""
    p = params
    dmu = p.mu1 - p.mu2
    if dmu > TIE_TOL:
        return p.swapped()
    if abs(dmu) <= TIE_TOL:
        dsig = p.sigma1 - p.sigma2
        if dsig > TIE_TOL:
            return p.swapped()
        if abs(dsig) <= TIE_TOL and p.alpha > 0.5:
            return p.swapped()
    return p


def classify(
    params: MixtureParams, tol: float = CLASSIFY_TOL, sigma_floor: float = SIGMA_FLOOR
) -> Classification:
    if abs(params.mu1 - params.mu2) <= tol and abs(params.sigma1 - params.sigma2) <= tol:
        return Classification.TRIVIAL
    if params.alpha <= tol or params.alpha >= 1.0 - tol:
        return Classification.BOUNDARY
    if min(params.sigma1, params.sigma2) <= sigma_floor:
        return Classification.DEGENERATE
    return Classification.NONTRIVIAL


def alpha_near_multiple(alpha: float, N: int, tol: float = 1e-6) -> bool:
    """True when alpha lies within ``tol`` of some m/N."""
    return abs(alpha - round(alpha * N) / N) <= tol
