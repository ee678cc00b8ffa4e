"""Clustered samples with one critical point per cluster pair.

The sample (1, 1.2, 2, 2.2, ..., K, K+0.2) has, for each k, a non-trivial
critical point whose first component sits on the pair (k, k+0.2).  EM is
started from closed-form values that put that pair in component 1 and
every EM iterate is audited against a fixed box of inequalities.  The
audit never projects: an iterate outside the box fails the row.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from .census import POLISH_DIGITS, CriticalPoint, polish
from .em import EMOptions, Status, run_em
from .errors import CertificationError, DomainError
from .mixture import Classification, MixtureParams, Sample

logger = logging.getLogger(__name__)

BOX_SLACK = 1e-12
CSV_HEADER = ("k", "alpha", "mu1", "mu2", "sigma1", "sigma2", "loglik")

# Reference critical points for K = 7 as (k, alpha, mu1, mu2, sigma1,
# sigma2, loglik), parameters rounded to 7 significant digits.
REFERENCE_K7 = (
    (1, 0.1311958, 1.098998, 4.553174, 0.09999497, 1.746049, -27.2918782147578),
    (2, 0.1032031, 2.097836, 4.330408, 0.09997658, 1.988948, -28.6397463805501),
    (3, 0.07883084, 3.097929, 4.185754, 0.09997856, 2.06374, -29.1550277534757),
    (4, 0.06897294, 4.1, 4.1, 0.1, 2.07517, -29.2858981551065),
    (5, 0.07883084, 5.102071, 4.014246, 0.09997856, 2.06374, -29.1550277534757),
    (6, 0.1032031, 6.102164, 3.869592, 0.09997658, 1.988948, -28.6397463805501),
    (7, 0.1311958, 7.101002, 3.646826, 0.09999497, 1.746049, -27.2918782147578),
)


def _check_K(K: int, k: Optional[int] = None):
    if int(K) != K or K < 2:
        raise DomainError(f"K must be an integer >= 2, got {K!r}")
    if k is not None and (int(k) != k or not 1 <= k <= K):
        raise DomainError(f"k must satisfy 1 <= k <= K={K}, got {k!r}")


def generate_sample(K: int) -> Sample:
    """The 2K points (k, k + 0.2), k = 1..K, each the nearest double."""
    _check_K(K)
    pts = []
    for k in range(1, K + 1):
        pts.append(float(k))
        pts.append(float(Fraction(5 * k + 1, 5)))
    return Sample(pts)


def starting_point(K: int, k: int) -> MixtureParams:
    """Closed-form EM start suggesting the k-th pair forms component 1."""
    if K == 1:
        raise DomainError("starting point divides by K - 1; K = 1 is undefined")
    _check_K(K, k)
    alpha = 1.0 / K
    mu1 = k + 0.1
    mu2 = (K * K + 1.2 * K - 2 * k - 0.2) / (2 * (K - 1))
    radicand = (
        K**4 / 12.0
        - K**3 / 3.0
        + (k - 43.0 / 75.0) * K**2
        - (k * k - k + 14.0 / 75.0) * K
        + 0.01
    )
    sigma2 = math.sqrt(radicand) / (K - 1)
    return MixtureParams(alpha, mu1, mu2, 0.1, sigma2)


@dataclass(frozen=True)
class BoxBounds:
    """Closed intervals every EM iterate of row k is expected to respect.

    ``sigma2_simple_*`` is the looser K-linear bracket for sigma2 (valid
    for K > 3); it is reported but not part of the audit.
    """

    K: int
    k: int
    alpha_lo: float
    alpha_hi: float
    mu1_lo: float
    mu1_hi: float
    sigma1_lo: float
    sigma1_hi: float
    mu2_lo: float
    mu2_hi: float
    sigma2_lo: float
    sigma2_hi: float
    sigma2_simple_lo: float
    sigma2_simple_hi: float

    def violations(self, p: MixtureParams, slack: float = BOX_SLACK) -> List[str]:
        checks = (
            ("alpha", p.alpha, self.alpha_lo, self.alpha_hi),
            ("mu1", p.mu1, self.mu1_lo, self.mu1_hi),
            ("sigma1", p.sigma1, self.sigma1_lo, self.sigma1_hi),
            ("mu2", p.mu2, self.mu2_lo, self.mu2_hi),
            ("sigma2", p.sigma2, self.sigma2_lo, self.sigma2_hi),
        )
        return [
            name
            for name, v, lo, hi in checks
            if v < lo - slack or v > hi + slack
        ]

    def contains(self, p: MixtureParams, slack: float = BOX_SLACK) -> bool:
        return not self.violations(p, slack)


def box_bounds(K: int, k: int) -> BoxBounds:
    _check_K(K, k)
    r3 = math.sqrt(3.0)
    r12 = math.sqrt(12.0)
    return BoxBounds(
        K=K,
        k=k,
        alpha_lo=1.0 / (4 * K),
        alpha_hi=1.0 / K,
        mu1_lo=k + 0.09,
        mu1_hi=k + 0.11,
        sigma1_lo=0.099,
        sigma1_hi=0.105,
        mu2_lo=K / 2 + 0.1,
        mu2_hi=K / 2 + 1.1,
        sigma2_lo=math.sqrt(K * K / 12 - K / 6 + 0.01),
        sigma2_hi=math.sqrt(K * K / 12 + K / 12 + 0.01),
        sigma2_simple_lo=K / r12 - r3 / 5,
        sigma2_simple_hi=K / r12 + r3 / 12,
    )


@dataclass(frozen=True)
class HillsRow:
    """Outcome for one cluster pair.

    ``params`` keeps the row orientation (component 1 on pair k);
    ``point.params`` is the canonical form of the same critical point.
    """

    k: int
    params: MixtureParams
    point: Optional[CriticalPoint]
    loglik: float
    box_violations: int
    status: Status
    n_iter: int
    accepted: bool
    failure: Optional[str] = None

    def to_dict(self) -> dict:
        p = self.params
        return {
            "k": self.k,
            "alpha": p.alpha,
            "mu1": p.mu1,
            "mu2": p.mu2,
            "sigma1": p.sigma1,
            "sigma2": p.sigma2,
            "loglik": self.loglik,
            "box_violations": self.box_violations,
            "em_status": self.status.value,
            "em_iterations": self.n_iter,
            "accepted": self.accepted,
            "failure": self.failure,
            "critical_point": None if self.point is None else self.point.to_dict(),
        }


def run_row(K: int, k: int, opts: Optional[EMOptions] = None, digits: int = POLISH_DIGITS,
            sample: Optional[Sample] = None) -> HillsRow:
    _check_K(K, k)
    sample = sample or generate_sample(K)
    box = box_bounds(K, k)
    trace = run_em(starting_point(K, k), sample, opts)
    outside = sum(1 for p in trace.iterates if not box.contains(p))
    final = trace.final
    loglik = trace.logliks[-1]

    def failed(reason, point=None, params=final):
        logger.warning("K=%d row k=%d rejected: %s", K, k, reason)
        return HillsRow(k, params, point, loglik, outside, trace.status, trace.n_iter, False, reason)

    if trace.status is not Status.CONVERGED:
        return failed(f"EM stopped with status {trace.status.value}: {trace.reason}")
    try:
        point = polish(final, sample, digits)
    except (CertificationError, DomainError) as exc:
        return failed(f"polishing failed: {exc}")

    oriented = point.params
    swapped = oriented.swapped()
    if _dist(swapped, final) < _dist(oriented, final):
        oriented = swapped
    loglik = point.loglik
    if outside:
        return failed(f"{outside} EM iterates left the box", point, oriented)
    if point.classification is not Classification.NONTRIVIAL:
        return failed(f"limit classified {point.classification.value}", point, oriented)
    if not k < oriented.mu1 < k + 0.2:
        return failed(f"mu1={oriented.mu1!r} outside ({k}, {k + 0.2})", point, oriented)
    return HillsRow(k, oriented, point, loglik, 0, trace.status, trace.n_iter, True)


def _dist(p: MixtureParams, q: MixtureParams) -> float:
    return max(abs(a - b) for a, b in zip(p.as_tuple(), q.as_tuple()))


def run_manyhills(K: int, opts: Optional[EMOptions] = None, digits: int = POLISH_DIGITS) -> List[HillsRow]:
    """Run every row k = 1..K; failed rows are flagged, not raised."""
    _check_K(K)
    sample = generate_sample(K)
    return [run_row(K, k, opts, digits, sample) for k in range(1, K + 1)]


def rows_to_csv(rows: List[HillsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        p = r.params
        writer.writerow([r.k, repr(p.alpha), repr(p.mu1), repr(p.mu2),
                         repr(p.sigma1), repr(p.sigma2), repr(r.loglik)])
    return buf.getvalue()


def rows_to_json(K: int, rows: List[HillsRow]) -> str:
    doc = {
        "K": K,
        "accepted": sum(r.accepted for r in rows),
        "rows": [r.to_dict() for r in rows],
    }
    return json.dumps(doc, indent=2) + "\n"
