"""Multi-start search for likelihood critical points on a fixed sample.

Pipeline: starting points -> EM -> classify -> canonicalize -> Newton
polish in extended precision -> dedup -> report.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .em import EMOptions, Status, run_em
from .errors import (
    CertificationError,
    DomainError,
    InsufficientDataError,
    RegionExitError,
)
from .mixture import (
    CLASSIFY_TOL,
    SIGMA_FLOOR,
    Classification,
    MixtureParams,
    Sample,
    _as_sample,
    alpha_near_multiple,
    canonicalize,
    classify,
    grad_loglik,
    loglik,
)

logger = logging.getLogger(__name__)

DEDUP_TOL = 1e-4
POLISH_DIGITS = 30
ALPHA_MULTIPLE_TOL = 1e-6
MAX_NEWTON_STEPS = 100
MAX_HALVINGS = 40
GUARD_DIGITS = 5


class Strategy(str, enum.Enum):
    RANDOM_PAIRS = "RandomPairs"
    GRID_ALPHA_MEANS = "GridAlphaMeans"
    CLUSTER_SEEDED = "ClusterSeeded"


@dataclass(frozen=True)
class CriticalPoint:
    """A polished stationary point, stored in canonical label order.

    ``precise`` keeps the extended-precision coordinates as decimal
    strings so the certificate can be re-checked at any precision.
    """

    params: MixtureParams
    loglik: float
    grad_norm: float
    classification: Classification
    alpha_near_multiple_of_1_over_N: bool
    polish_digits: int
    precise: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        p = self.params
        return {
            "alpha": p.alpha,
            "mu1": p.mu1,
            "mu2": p.mu2,
            "sigma1": p.sigma1,
            "sigma2": p.sigma2,
            "loglik": self.loglik,
            "grad_norm": self.grad_norm,
            "classification": self.classification.value,
            "alpha_near_multiple_of_1_over_N": self.alpha_near_multiple_of_1_over_N,
            "polish_digits": self.polish_digits,
        }


@dataclass(frozen=True)
class CensusOptions:
    strategies: Tuple[str, ...] = (Strategy.CLUSTER_SEEDED.value, Strategy.RANDOM_PAIRS.value)
    n_starts: int = 200
    seed: int = 0
    em: EMOptions = field(default_factory=EMOptions)
    dedup_tol: float = DEDUP_TOL
    classify_tol: float = CLASSIFY_TOL
    sigma_floor: float = SIGMA_FLOOR
    polish_digits: int = POLISH_DIGITS
    alpha_tol: float = ALPHA_MULTIPLE_TOL
    workers: Optional[int] = None


@dataclass(frozen=True)
class CensusReport:
    sample_digest: str
    points: Tuple[CriticalPoint, ...]
    n_nontrivial: int
    n_trivial: int
    n_degenerate_runs: int
    starts_used: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "sample_digest": self.sample_digest,
            "seed": self.seed,
            "starts_used": self.starts_used,
            "points": [p.to_dict() for p in self.points],
            "n_nontrivial": self.n_nontrivial,
            "n_trivial": self.n_trivial,
            "n_degenerate_runs": self.n_degenerate_runs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def sample_digest(sample) -> str:
    sample = _as_sample(sample)
    return hashlib.sha256(sample.points.astype("<f8").tobytes()).hexdigest()


# ---------------------------------------------------------------------------
# starting points
# ---------------------------------------------------------------------------


def _local_scatter(x: np.ndarray, center: float, fallback: float) -> float:
    m = max(2, math.ceil(x.size / 4))
    nearest = x[np.argsort(np.abs(x - center), kind="stable")[:m]]
    s = float(np.sqrt(np.mean((nearest - center) ** 2)))
    return s if s > 0.0 else fallback


def _fallback_sigma(sample: Sample) -> float:
    s = sample.std
    return s if s > 0.0 else 1.0


def _random_pairs(sample: Sample, n: int, seed: int) -> List[MixtureParams]:
    rng = np.random.default_rng(seed)
    x = sample.points
    fb = _fallback_sigma(sample)
    out = []
    for _ in range(n):
        i, j = rng.choice(sample.N, size=2, replace=False)
        a = float(rng.uniform(0.1, 0.9))
        m1, m2 = float(x[i]), float(x[j])
        out.append(
            MixtureParams(a, m1, m2, _local_scatter(x, m1, fb), _local_scatter(x, m2, fb))
        )
    return out


def _grid_alpha_means(sample: Sample, n: int, seed: int) -> List[MixtureParams]:
    x = sample.points
    fb = _fallback_sigma(sample)
    idx = np.unique(np.round(np.linspace(0, sample.N - 1, min(sample.N, 6))).astype(int))
    alphas = (0.1, 0.3, 0.5, 0.7, 0.9)
    combos = [
        (a, float(x[i]), float(x[j]))
        for a in alphas
        for i, j in itertools.combinations(idx, 2)
    ]
    if n < len(combos):
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(len(combos), size=n, replace=False))
        combos = [combos[k] for k in keep]
    return [
        MixtureParams(a, m1, m2, _local_scatter(x, m1, fb), _local_scatter(x, m2, fb))
        for a, m1, m2 in combos
    ]


def _cluster_seeded(sample: Sample) -> List[MixtureParams]:
    # Consecutive pairs as component 1, everything else as component 2.
    x = sample.points
    N = sample.N
    fb = _fallback_sigma(sample)
    out = []
    for j in range(N // 2):
        pair = x[2 * j : 2 * j + 2]
        rest = np.concatenate((x[: 2 * j], x[2 * j + 2 :]))
        m1 = float(np.mean(pair))
        s1 = float(np.sqrt(np.mean((pair - m1) ** 2))) or fb
        m2 = float(np.mean(rest))
        s2 = float(np.sqrt(np.mean((rest - m2) ** 2))) or fb
        out.append(MixtureParams(2.0 / N, m1, m2, s1, s2))
    return out


def generate_starts(sample, strategy="RandomPairs", n: int = 100, seed: int = 0):
    """Deterministic starting points for EM.

    ``RandomPairs`` uses two distinct data points as means, the scatter of
    nearby points as standard deviations and alpha ~ U[0.1, 0.9].
    ``GridAlphaMeans`` crosses an alpha grid with pairs of order
    statistics (at most ``n`` of them).  ``ClusterSeeded`` ignores ``n``
    and puts each consecutive pair in component 1.
    """
    sample = _as_sample(sample)
    if sample.N < 2:
        raise InsufficientDataError("starting points need at least two observations")
    if n < 1:
        raise DomainError("n must be >= 1")
    strategy = Strategy(strategy)
    if strategy is Strategy.RANDOM_PAIRS:
        return _random_pairs(sample, n, seed)
    if strategy is Strategy.GRID_ALPHA_MEANS:
        return _grid_alpha_means(sample, n, seed)
    return _cluster_seeded(sample)


# ---------------------------------------------------------------------------
# deduplication
# ---------------------------------------------------------------------------


def _sort_key(p: CriticalPoint):
    return (-p.loglik, p.params.as_tuple())


def _distance(p: CriticalPoint, q: CriticalPoint, trivial_alpha_free: bool) -> float:
    a, b = p.params.as_array(), q.params.as_array()
    if (
        trivial_alpha_free
        and p.classification is Classification.TRIVIAL
        and q.classification is Classification.TRIVIAL
    ):
        a, b = a[1:], b[1:]
    return float(np.max(np.abs(a - b)))


def dedup(points: Sequence[CriticalPoint], tol: float = DEDUP_TOL, trivial_alpha_free=True):
    """Greedy clustering in descending-loglik order.

    The highest-likelihood member of each cluster is kept.  With
    ``trivial_alpha_free`` two Trivial points are compared without alpha,
    since the trivial family is flat in the weight.
    """
    kept: List[CriticalPoint] = []
    for p in sorted(points, key=_sort_key):
        if all(_distance(p, q, trivial_alpha_free) >= tol for q in kept):
            kept.append(p)
    return kept


# ---------------------------------------------------------------------------
# extended-precision polishing
# ---------------------------------------------------------------------------


def _mp_grad(p, xs):
    a, m1, m2, s1, s2 = p
    b = 1 - a
    ga = gm1 = gm2 = gs1 = gs2 = mpmath.mpf(0)
    for x in xs:
        d1 = x - m1
        d2 = x - m2
        phi1 = mpmath.exp(-(d1 * d1) / (2 * s1 * s1)) / s1
        phi2 = mpmath.exp(-(d2 * d2) / (2 * s2 * s2)) / s2
        f = a * phi1 + b * phi2
        g = a * phi1 / f
        h = 1 - g
        ga += (phi1 - phi2) / f
        gm1 += g * d1 / (s1 * s1)
        gm2 += h * d2 / (s2 * s2)
        gs1 += g * (d1 * d1 / s1**3 - 1 / s1)
        gs2 += h * (d2 * d2 / s2**3 - 1 / s2)
    return [ga, gm1, gm2, gs1, gs2]


def _mp_loglik(p, xs):
    a, m1, m2, s1, s2 = p
    total = mpmath.mpf(0)
    for x in xs:
        phi1 = mpmath.exp(-((x - m1) ** 2) / (2 * s1 * s1)) / s1
        phi2 = mpmath.exp(-((x - m2) ** 2) / (2 * s2 * s2)) / s2
        total += mpmath.log(a * phi1 + (1 - a) * phi2)
    return total - len(xs) * mpmath.log(2 * mpmath.pi) / 2


def _norm(v):
    return max(abs(c) for c in v)


def _inside(p) -> bool:
    return 0 < p[0] < 1 and p[3] > 0 and p[4] > 0


def _jacobian(p, xs, h_rel):
    cols = []
    for j in range(5):
        h = h_rel * max(1, abs(p[j]))
        up = list(p)
        dn = list(p)
        up[j] += h
        dn[j] -= h
        gu = _mp_grad(up, xs)
        gd = _mp_grad(dn, xs)
        cols.append([(u - d) / (2 * h) for u, d in zip(gu, gd)])
    return mpmath.matrix([[cols[j][i] for j in range(5)] for i in range(5)])


def _min_norm_solve(J, rhs, cutoff):
    U, S, V = mpmath.svd_r(J)
    smax = max(S[i] for i in range(len(S)))
    coeffs = []
    for i in range(len(S)):
        if S[i] > cutoff * smax:
            ui = sum(U[r, i] * rhs[r] for r in range(5))
            coeffs.append(ui / S[i])
        else:
            coeffs.append(mpmath.mpf(0))
    return [sum(V[i, c] * coeffs[i] for i in range(len(S))) for c in range(5)]


def certification_threshold(digits: int) -> float:
    return 10.0 ** (-(digits - 10))


def grad_norm_at(precise: Sequence, sample, digits: int) -> float:
    """Max-norm of the gradient at ``precise`` coordinates, evaluated with
    ``digits`` decimal digits.  Independent of the float code path."""
    sample = _as_sample(sample)
    with mpmath.workdps(digits):
        p = [mpmath.mpf(v) for v in precise]
        xs = [mpmath.mpf(float(x)) for x in sample.points]
        return float(_norm(_mp_grad(p, xs)))


def polish(
    approx: MixtureParams,
    sample,
    digits: int = POLISH_DIGITS,
    classify_tol: float = CLASSIFY_TOL,
    sigma_floor: float = SIGMA_FLOOR,
    alpha_tol: float = ALPHA_MULTIPLE_TOL,
) -> CriticalPoint:
    """Refine a near-stationary point by damped Newton on the gradient.

    Works with ``digits`` (+ guard) decimal digits; the Jacobian of the
    gradient comes from central differences at the same precision and the
    step is the minimum-norm solution, so flat directions (e.g. the
    weight on the trivial family) stay put.  Steps are halved until the
    gradient max-norm decreases.

    Raises:
        DomainError: ``digits < 17`` or ``approx`` is not an interior point
            with double-precision gradient norm below 1e-3.
        RegionExitError: every damped step leaves the open domain.
        CertificationError: the threshold 10^-(digits-10) is not reached.
    """
    if digits < 17:
        raise DomainError("polish needs digits >= 17")
    sample = _as_sample(sample)
    g0 = float(np.max(np.abs(grad_loglik(approx, sample))))
    if not g0 < 1e-3:
        raise DomainError(f"start is not near-stationary (gradient norm {g0:.3g})")

    threshold = certification_threshold(digits)
    with mpmath.workdps(digits + GUARD_DIGITS):
        xs = [mpmath.mpf(float(x)) for x in sample.points]
        p = [mpmath.mpf(v) for v in approx.as_tuple()]
        g = _mp_grad(p, xs)
        gn = _norm(g)
        h_rel = mpmath.mpf(10) ** (-(digits // 3))
        cutoff = mpmath.mpf(10) ** (-(digits // 2))
        steps = 0
        while gn >= threshold:
            if steps >= MAX_NEWTON_STEPS:
                raise CertificationError(
                    f"Newton did not certify within {MAX_NEWTON_STEPS} steps",
                    best_residual=float(gn),
                )
            steps += 1
            J = _jacobian(p, xs, h_rel)
            delta = _min_norm_solve(J, [-c for c in g], cutoff)
            t = mpmath.mpf(1)
            accepted = False
            left_region = False
            for _ in range(MAX_HALVINGS + 1):
                trial = [pi + t * di for pi, di in zip(p, delta)]
                if _inside(trial):
                    gt = _mp_grad(trial, xs)
                    gtn = _norm(gt)
                    if gtn < gn:
                        p, g, gn = trial, gt, gtn
                        accepted = True
                        break
                else:
                    left_region = True
                t /= 2
            if not accepted:
                cls = RegionExitError if left_region else CertificationError
                raise cls(
                    "damped Newton step made no progress", best_residual=float(gn)
                )

        if not _inside(p):
            raise RegionExitError("polished point left the domain", best_residual=float(gn))
        params = MixtureParams(*(float(v) for v in p))
        canon = canonicalize(params)
        if canon is not params:
            p = [1 - p[0], p[2], p[1], p[4], p[3]]
        precise = tuple(mpmath.nstr(v, digits + GUARD_DIGITS, strip_zeros=False) for v in p)
        ll = float(_mp_loglik(p, xs))

    return CriticalPoint(
        params=canon,
        loglik=ll,
        grad_norm=float(gn),
        classification=classify(canon, classify_tol, sigma_floor),
        alpha_near_multiple_of_1_over_N=alpha_near_multiple(canon.alpha, sample.N, alpha_tol),
        polish_digits=digits,
        precise=precise,
    )


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------


def _em_outcome(args):
    start, sample, em_opts = args
    trace = run_em(start, sample, em_opts)
    return trace.status, trace.final, trace.logliks[-1]


def census(sample, opts: Optional[CensusOptions] = None) -> CensusReport:
    """Collect, certify and deduplicate critical points of one sample.

    Boundary and degenerate EM outcomes are counted in
    ``n_degenerate_runs`` but never listed.
    """
    opts = opts or CensusOptions()
    sample = _as_sample(sample)
    if sample.N < 3:
        raise InsufficientDataError("census needs at least three observations")

    starts: List[MixtureParams] = []
    for strategy in opts.strategies:
        starts.extend(generate_starts(sample, strategy, opts.n_starts, opts.seed))

    jobs = [(s, sample, opts.em) for s in starts]
    if opts.workers and opts.workers > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as pool:
            outcomes = list(pool.map(_em_outcome, jobs, chunksize=8))
    else:
        outcomes = [_em_outcome(j) for j in jobs]

    n_degenerate = 0
    raw: List[CriticalPoint] = []
    for status, final, ll in outcomes:
        if status is Status.DEGENERATE:
            n_degenerate += 1
            continue
        cls = classify(final, opts.classify_tol, opts.sigma_floor)
        if cls in (Classification.BOUNDARY, Classification.DEGENERATE):
            n_degenerate += 1
            continue
        canon = canonicalize(final)
        if status is Status.MAX_ITERS:
            if not float(np.max(np.abs(grad_loglik(canon, sample)))) < 1e-3:
                logger.info("dropping unconverged EM run at %s", canon)
                continue
        raw.append(CriticalPoint(canon, ll, math.nan, cls, False, 0))

    points: List[CriticalPoint] = []
    for cand in dedup(raw, opts.dedup_tol):
        try:
            cp = polish(
                cand.params,
                sample,
                opts.polish_digits,
                opts.classify_tol,
                opts.sigma_floor,
                opts.alpha_tol,
            )
        except (CertificationError, DomainError) as exc:
            logger.warning("could not certify candidate %s: %s", cand.params, exc)
            continue
        if cp.classification in (Classification.BOUNDARY, Classification.DEGENERATE):
            n_degenerate += 1
            continue
        points.append(cp)

    points = dedup(points, opts.dedup_tol)
    n_trivial = sum(p.classification is Classification.TRIVIAL for p in points)
    return CensusReport(
        sample_digest=sample_digest(sample),
        points=tuple(points),
        n_nontrivial=len(points) - n_trivial,
        n_trivial=n_trivial,
        n_degenerate_runs=n_degenerate,
        starts_used=len(starts),
        seed=opts.seed,
    )
