"""EM iteration for the two-component univariate mixture.

The E-step computes responsibilities; the M-step evaluates the weighted
moment (fixed-point) equations.  The variance update is stored as a
standard deviation.  Degeneracy is detected and reported, never clamped.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import (
    DegenerateComponentError,
    DegenerateEvaluationError,
    DomainError,
    EmptyComponentError,
    InsufficientDataError,
)
from .mixture import (
    SIGMA_FLOOR,
    MixtureParams,
    Responsibilities,
    _as_sample,
    _estep,
    canonicalize,
)

logger = logging.getLogger(__name__)

EMPTY_COMPONENT_TOL = 1e-12


class Constraint(str, enum.Enum):
    FREE = "Free"
    EQUAL_VARIANCE = "EqualVariance"


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DEGENERATE = "Degenerate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EMOptions:
    max_iters: int = 10000
    param_tol: float = 1e-10
    loglik_tol: float = 1e-12
    constraint: Constraint = Constraint.FREE
    sigma_floor: float = SIGMA_FLOOR

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if self.param_tol <= 0 or self.loglik_tol <= 0 or self.sigma_floor <= 0:
            raise DomainError("tolerances and sigma_floor must be positive")
        object.__setattr__(self, "constraint", Constraint(self.constraint))


@dataclass
class EMTrace:
    """Every iterate visited by one EM run, starting with the start point."""

    iterates: List[MixtureParams]
    logliks: List[float]
    status: Status
    final: MixtureParams
    reason: Optional[str] = None
    degenerate_sigma: Optional[float] = None

    @property
    def n_iter(self) -> int:
        return len(self.iterates) - 1

    def to_dict(self) -> dict:
        return {
            "iterates": [list(p.as_tuple()) for p in self.iterates],
            "logliks": list(self.logliks),
            "status": self.status.value,
            "final": list(self.final.as_tuple()),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def m_step(
    resp: Responsibilities,
    sample,
    constraint: Constraint = Constraint.FREE,
    sigma_floor: float = SIGMA_FLOOR,
) -> MixtureParams:
    """Weighted-moment update from responsibilities.

    Raises:
        EmptyComponentError: n1 or n2 is at most 1e-12.
        DegenerateComponentError: an updated standard deviation falls below
            ``sigma_floor``; ``exc.params`` holds the raw update.
    """
    sample = _as_sample(sample)
    x = sample.points
    g = np.asarray(resp.gamma, dtype=float)
    h = 1.0 - g
    n1 = float(g.sum())
    n2 = sample.N - n1
    if n1 <= EMPTY_COMPONENT_TOL or n2 <= EMPTY_COMPONENT_TOL:
        raise EmptyComponentError(f"empty component: n1={n1!r}, n2={n2!r}")

    alpha = n1 / sample.N
    mu1 = float(g.dot(x)) / n1
    mu2 = float(h.dot(x)) / n2
    d1 = x - mu1
    d2 = x - mu2
    ss1 = float(g.dot(d1 * d1))
    ss2 = float(h.dot(d2 * d2))
    if constraint == Constraint.EQUAL_VARIANCE:
        sigma1 = sigma2 = math.sqrt((ss1 + ss2) / sample.N)
    else:
        sigma1 = math.sqrt(ss1 / n1)
        sigma2 = math.sqrt(ss2 / n2)

    raw = (min(max(alpha, 0.0), 1.0), mu1, mu2, sigma1, sigma2)
    low = min(sigma1, sigma2)
    if low < sigma_floor:
        err = DegenerateComponentError(
            f"standard deviation {low!r} fell below floor {sigma_floor!r}", sigma=low
        )
        err.params = raw
        raise err
    return MixtureParams(*raw)


def _max_change(p: MixtureParams, q: MixtureParams) -> float:
    a = canonicalize(p).as_tuple()
    b = canonicalize(q).as_tuple()
    return max(abs(u - v) for u, v in zip(a, b))


def run_em(start: MixtureParams, sample, opts: Optional[EMOptions] = None) -> EMTrace:
    """Iterate E and M steps from ``start``.

    Stops when both the canonical parameter change (max norm) and the
    log-likelihood change fall below their tolerances, after
    ``max_iters`` updates, or when a component degenerates.
    """
    opts = opts or EMOptions()
    sample = _as_sample(sample)
    if sample.N < 2:
        raise InsufficientDataError("EM needs at least two observations")
    x = sample.points

    p = start
    gamma, lf = _estep(p, x)
    iterates = [p]
    logliks = [float(lf.sum())]
    status = Status.MAX_ITERS
    reason = None
    degenerate_sigma = None

    for _ in range(opts.max_iters):
        n1 = float(gamma.sum())
        resp = Responsibilities(gamma=gamma, n1=n1, n2=sample.N - n1)
        try:
            q = m_step(resp, sample, opts.constraint, opts.sigma_floor)
        except EmptyComponentError as exc:
            status, reason = Status.DEGENERATE, str(exc)
            break
        except DegenerateComponentError as exc:
            status, reason = Status.DEGENERATE, str(exc)
            degenerate_sigma = exc.sigma
            _append_collapsed(exc.params, x, iterates, logliks)
            break
        try:
            gamma, lf = _estep(q, x)
        except DegenerateEvaluationError as exc:
            status, reason = Status.DEGENERATE, str(exc)
            break
        iterates.append(q)
        logliks.append(float(lf.sum()))
        change = _max_change(p, q)
        p = q
        if change < opts.param_tol and abs(logliks[-1] - logliks[-2]) < opts.loglik_tol:
            status = Status.CONVERGED
            break

    if status is Status.DEGENERATE:
        logger.debug("EM stopped degenerate after %d updates: %s", len(iterates) - 1, reason)
    return EMTrace(
        iterates=iterates,
        logliks=logliks,
        status=status,
        final=iterates[-1],
        reason=reason,
        degenerate_sigma=degenerate_sigma,
    )


def _append_collapsed(raw, x, iterates, logliks):
    # Keep the collapsed iterate in the trace when it is still a valid point.
    try:
        q = MixtureParams(*raw)
        _, lf = _estep(q, x)
    except (DomainError, DegenerateEvaluationError):
        return
    value = float(np.sum(lf))
    if math.isfinite(value):
        iterates.append(q)
        logliks.append(value)


def em_update(params: MixtureParams, sample, constraint=Constraint.FREE) -> MixtureParams:
    """One full E+M cycle."""
    sample = _as_sample(sample)
    gamma, _ = _estep(params, sample.points)
    n1 = float(np.sum(gamma))
    return m_step(Responsibilities(gamma, n1, sample.N - n1), sample, constraint)
