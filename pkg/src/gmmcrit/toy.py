"""Two-parameter toy likelihood on the data {0, x}.

With mu2 = 0 and sigma1 = sigma2 = 1/sqrt(2), the log-likelihood (up to
an additive constant) is

    l(alpha, mu) = log(alpha e^{-mu^2} + 1 - alpha)
                 + log(alpha e^{-(mu-x)^2} + (1 - alpha) e^{-x^2})

Eliminating alpha from the two stationarity conditions leaves the
one-variable transcendental equation

    (x - mu) e^{mu^2} - x + mu e^{-mu (2x - mu)} = 0

which is solved here in extended precision.  The working precision is
raised by about x^2 / ln(10) digits so that e^{mu^2} never swamps the
requested accuracy.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateEvaluationError,
    DomainError,
    NoInteriorRootError,
    PrecisionRangeError,
)
from .mixture import MixtureParams, _as_sample, loglik

MU_LIMIT = 20.0
FLOAT_EXP_LIMIT = math.sqrt(math.log(np.finfo(float).max))
SEARCH_EPS = 1e-6
GUARD_DIGITS = 10
SURFACE_HEADER = ("alpha", "mu", "loglik")


def _check_x(x):
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")


def _check_digits(digits):
    if digits < 17:
        raise DomainError(f"digits must be >= 17, got {digits!r}")


def working_dps(digits: int, x) -> int:
    """Decimal digits needed so residuals near mu ~ x keep ``digits``."""
    return int(digits + GUARD_DIGITS + math.ceil(float(x) ** 2 / math.log(10)))


# ---------------------------------------------------------------------------
# likelihood and critical equation
# ---------------------------------------------------------------------------


def toy_loglik(alpha, mu, x, digits: Optional[int] = None):
    """Toy log-likelihood; vectorised in double precision, or an mpf when
    ``digits`` is given."""
    if digits is not None:
        with mpmath.workdps(digits):
            a, m, xx = mpmath.mpf(alpha), mpmath.mpf(mu), mpmath.mpf(x)
            if not 0 <= a <= 1:
                raise DomainError("alpha must lie in [0, 1]")
            t1 = a * mpmath.exp(-m * m) + (1 - a)
            t2 = a * mpmath.exp(-(m - xx) ** 2) + (1 - a) * mpmath.exp(-xx * xx)
            if t1 == 0 or t2 == 0:
                raise DegenerateEvaluationError("log argument vanished")
            return mpmath.log(t1) + mpmath.log(t2)

    a = np.asarray(alpha, dtype=float)
    m = np.asarray(mu, dtype=float)
    if np.any((a < 0) | (a > 1)):
        raise DomainError("alpha must lie in [0, 1]")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        la = np.log(a)
        lb = np.log1p(-a)
        t1 = np.logaddexp(la - m * m, lb)
        t2 = np.logaddexp(la - (m - x) ** 2, lb - x * x)
    out = t1 + t2
    if not np.all(np.isfinite(out)):
        raise DegenerateEvaluationError("log argument underflowed to zero")
    return float(out) if out.ndim == 0 else out


def toy_gradient(alpha, mu, x, digits: int = 30):
    """(dl/dalpha, dl/dmu) of the toy log-likelihood, as mpf values."""
    with mpmath.workdps(digits):
        a, m, xx = mpmath.mpf(alpha), mpmath.mpf(mu), mpmath.mpf(x)
        A = mpmath.exp(-m * m)
        B = mpmath.exp(-(m - xx) ** 2)
        C = mpmath.exp(-xx * xx)
        t1 = a * A + 1 - a
        t2 = a * B + (1 - a) * C
        d_alpha = (A - 1) / t1 + (B - C) / t2
        d_mu = -2 * m * a * A / t1 - 2 * (m - xx) * a * B / t2
        return d_alpha, d_mu


def critical_residual(mu, x, digits: Optional[int] = None):
    """Left-hand side of the critical equation for mu.

    Without ``digits`` the value is a float and fails once e^{mu^2}
    overflows a double (|mu| > ~26.6).  With ``digits`` it is an mpf and
    |mu| is limited to 20.
    """
    if digits is None:
        mu, x = float(mu), float(x)
        try:
            big = math.exp(mu * mu)
        except OverflowError:
            raise PrecisionRangeError(
                f"e^(mu^2) overflows double precision for |mu| > {FLOAT_EXP_LIMIT:.4f}",
                threshold=FLOAT_EXP_LIMIT,
            ) from None
        return (x - mu) * big - x + mu * math.exp(-mu * (2 * x - mu))

    with mpmath.workdps(digits):
        m, xx = mpmath.mpf(mu), mpmath.mpf(x)
        if abs(m) > MU_LIMIT:
            raise PrecisionRangeError(
                f"|mu| > {MU_LIMIT} is outside the supported exponent range",
                threshold=MU_LIMIT,
            )
        return _residual(m, xx)


def _residual(m, x):
    return (x - m) * mpmath.exp(m * m) - x + m * mpmath.exp(-m * (2 * x - m))


def _residual_derivative(m, x):
    e1 = mpmath.exp(m * m)
    e2 = mpmath.exp(-m * (2 * x - m))
    return -e1 + 2 * m * (x - m) * e1 + e2 + m * (2 * m - 2 * x) * e2


def recover_alpha(mu_hat, x, digits: int = 25):
    """Solve the (linear) alpha-stationarity condition at ``mu_hat``.

    Raises:
        ConsistencyError: the solution is not in (0, 1); ``exc.value``
            carries it.
    """
    _check_x(x)
    with mpmath.workdps(working_dps(digits, x)):
        m, xx = mpmath.mpf(mu_hat), mpmath.mpf(x)
        A = mpmath.exp(-m * m)
        B = mpmath.exp(-(m - xx) ** 2)
        C = mpmath.exp(-xx * xx)
        denom = 2 * (A - 1) * (B - C)
        if denom == 0:
            raise ConsistencyError("alpha condition is degenerate at this mu", value=None)
        alpha = -((A - 1) * C + (B - C)) / denom
        if not 0 < alpha < 1:
            raise ConsistencyError(
                f"recovered alpha {mpmath.nstr(alpha, 12)} is outside (0, 1)", value=alpha
            )
        return +alpha


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToyProblem:
    x: float
    digits: int = 25

    def __post_init__(self):
        _check_x(self.x)
        _check_digits(self.digits)


@dataclass(frozen=True)
class ToySolveResult:
    x: float
    digits: int
    mu_hat: mpmath.mpf
    alpha_hat: mpmath.mpf
    residual: mpmath.mpf
    loglik_at_max: float
    candidates: Tuple[mpmath.mpf, ...] = ()

    @property
    def residual_bound(self) -> float:
        return 10.0 ** (-(self.digits - 5))

    def to_dict(self) -> dict:
        # Extended-precision values travel as decimal strings.
        return {
            "x": repr(self.x),
            "digits": self.digits,
            "mu_hat": mpmath.nstr(self.mu_hat, self.digits, strip_zeros=False),
            "alpha_hat": mpmath.nstr(self.alpha_hat, self.digits, strip_zeros=False),
            "residual": mpmath.nstr(self.residual, 6),
            "residual_bound": mpmath.nstr(mpmath.mpf(self.residual_bound), 6),
            "loglik_at_max": repr(self.loglik_at_max),
            "critical_abscissae": [mpmath.nstr(c, self.digits) for c in self.candidates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _refine(lo, hi, flo, x, tol):
    # Bisection down to a narrow bracket, then Newton kept inside it.
    for _ in range(60):
        if hi - lo <= mpmath.mpf(10) ** -12 * max(1, abs(hi)):
            break
        mid = (lo + hi) / 2
        fm = _residual(mid, x)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    m = (lo + hi) / 2
    for _ in range(200):
        f = _residual(m, x)
        if f == 0:
            break
        if (f < 0) == (flo < 0):
            lo, flo = m, f
        else:
            hi = m
        d = _residual_derivative(m, x)
        step = f / d if d != 0 else None
        nxt = m - step if step is not None else None
        if nxt is None or not lo <= nxt <= hi:
            nxt = (lo + hi) / 2
        if abs(nxt - m) <= tol * max(1, abs(m)) or hi - lo <= tol:
            m = nxt
            break
        m = nxt
    return m


def critical_abscissae(x, digits: int = 25) -> List[mpmath.mpf]:
    """All sign changes of the residual on (1e-6, x], refined."""
    _check_x(x)
    if x > MU_LIMIT:
        raise PrecisionRangeError(
            f"x > {MU_LIMIT} exceeds the supported exponent range", threshold=MU_LIMIT
        )
    dps = working_dps(digits, x)
    with mpmath.workdps(dps):
        xx = mpmath.mpf(x)
        eps = mpmath.mpf(SEARCH_EPS)
        n = 10 * math.ceil(float(x) * 100)
        grid = [eps + (xx - eps) * i / n for i in range(n + 1)]
        vals = [_residual(g, xx) for g in grid]
        tol = mpmath.mpf(10) ** (-(dps - 3))
        roots = []
        for i in range(n):
            if vals[i] == 0:
                roots.append(grid[i])
            elif (vals[i] < 0) != (vals[i + 1] < 0) and vals[i + 1] != 0:
                roots.append(_refine(grid[i], grid[i + 1], vals[i], xx, tol))
        if vals[n] == 0:
            roots.append(grid[n])
        return roots


def solve_mu(x, digits: int = 25) -> ToySolveResult:
    """Interior maximiser of the toy likelihood via its critical equation.

    Every admissible root (recovered alpha in (0, 1)) is scored by the
    log-likelihood; the best one is returned.

    Raises:
        NoInteriorRootError: no admissible root in (1e-6, x].
    """
    _check_x(x)
    _check_digits(digits)
    roots = critical_abscissae(x, digits)
    dps = working_dps(digits, x)
    best = None
    with mpmath.workdps(dps):
        for m in roots:
            try:
                a = recover_alpha(m, x, digits)
            except ConsistencyError:
                continue
            value = toy_loglik(a, m, x, digits=dps)
            if best is None or value > best[0]:
                best = (value, m, a)
        if best is None:
            raise NoInteriorRootError(
                f"no interior critical point in ({SEARCH_EPS}, {x}]; "
                "x is below the interior threshold"
            )
        value, m, a = best
        residual = _residual(m, mpmath.mpf(x))
    bound = 10.0 ** (-(digits - 5))
    if not abs(residual) < bound:
        raise ConsistencyError(f"residual {mpmath.nstr(residual, 5)} exceeds {bound}", value=residual)
    return ToySolveResult(
        x=float(x),
        digits=digits,
        mu_hat=m,
        alpha_hat=a,
        residual=residual,
        loglik_at_max=float(value),
        candidates=tuple(roots),
    )


# ---------------------------------------------------------------------------
# interior threshold
# ---------------------------------------------------------------------------


def boundary_supremum(x) -> float:
    """Largest value on alpha in {0, 1} and on the mu = 0 family.

    alpha = 0 and mu = 0 both give -x^2; alpha = 1 gives
    -mu^2 - (mu - x)^2, maximised at mu = x/2 with value -x^2/2.
    """
    return max(-x * x, -x * x / 2.0)


def edge_slope(x, digits: int = 30):
    """dl/dalpha at the alpha = 1 edge maximiser (1, x/2).

    Negative means the likelihood rises when moving into the interior, so
    the edge point is not a local maximum.
    """
    with mpmath.workdps(digits):
        xx = mpmath.mpf(x)
        return 2 - mpmath.exp(xx * xx / 4) - mpmath.exp(-3 * xx * xx / 4)


def interior_dominates(x, digits: int = 20, require_edge_descent: bool = True) -> bool:
    """Whether the global maximum is interior with 0 < mu <= x.

    The best interior critical value must beat :func:`boundary_supremum`.
    With ``require_edge_descent`` the alpha = 1 edge maximiser must in
    addition fail to be a local maximum, so no boundary point competes.
    """
    try:
        res = solve_mu(x, digits)
    except NoInteriorRootError:
        return False
    if not res.loglik_at_max > boundary_supremum(float(x)):
        return False
    if require_edge_descent and not edge_slope(x) < 0:
        return False
    return True


def interior_threshold(
    tol: float = 1e-3,
    digits: int = 20,
    lo: float = 1.0,
    hi: float = 2.0,
    require_edge_descent: bool = True,
) -> float:
    """Smallest x (to within ``tol``) from which the maximum is interior.

    Bisection on :func:`interior_dominates` over ``[lo, hi]``.
    """
    if tol < 1e-6:
        raise DomainError("tol must be >= 1e-6")
    pred = lambda v: interior_dominates(v, digits, require_edge_descent)  # noqa: E731
    if pred(lo) or not pred(hi):
        raise DomainError(f"threshold is not bracketed by [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# unboundedness and surface
# ---------------------------------------------------------------------------


def unboundedness_trace(sample, sigma_list: Sequence[float]) -> List[Tuple[float, float]]:
    """Log-likelihood as sigma1 shrinks with mu1 pinned to the first point.

    Uses alpha = 0.5, mu2 = sample mean, sigma2 = sample std (1/N).
    """
    sample = _as_sample(sample)
    if sample.N < 2:
        raise DomainError("need at least two observations")
    s = sample.std
    if s <= 0:
        raise DomainError("sample must contain distinct values")
    x1 = float(sample.points[0])
    out = []
    for sig in sigma_list:
        if not sig > 0:
            raise DomainError(f"sigma must be positive, got {sig!r}")
        p = MixtureParams(0.5, x1, sample.mean, sig, s)
        out.append((float(sig), loglik(p, sample)))
    return out


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Toy log-likelihood on an alpha x mu grid; ``values[i, j]`` is at
    (alphas[i], mus[j])."""

    x: float
    alphas: np.ndarray
    mus: np.ndarray
    values: np.ndarray

    def rows(self):
        for i, a in enumerate(self.alphas):
            for j, m in enumerate(self.mus):
                yield float(a), float(m), float(self.values[i, j])

    def argmax(self) -> Tuple[float, float, float]:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return float(self.alphas[i]), float(self.mus[j]), float(self.values[i, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SURFACE_HEADER)
        for a, m, v in self.rows():
            writer.writerow([repr(a), repr(m), repr(v)])
        return buf.getvalue()


def surface_grid(x, alpha_steps: int = 201, mu_range=(-1.0, 4.0), mu_steps: int = 201) -> SurfaceGrid:
    _check_x(x)
    if alpha_steps < 2 or mu_steps < 2:
        raise DomainError("grid needs at least 2 steps per axis")
    alphas = np.linspace(0.0, 1.0, alpha_steps)
    mus = np.linspace(float(mu_range[0]), float(mu_range[1]), mu_steps)
    A, M = np.meshgrid(alphas, mus, indexing="ij")
    return SurfaceGrid(float(x), alphas, mus, toy_loglik(A, M, float(x)))
