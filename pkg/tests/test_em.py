import json
import math

import numpy as np
import pytest

from gmmcrit import (
    Constraint,
    EMOptions,
    MixtureParams,
    Responsibilities,
    Sample,
    Status,
    canonicalize,
    grad_loglik,
    m_step,
    run_em,
    starting_point,
    trivial_point,
)
from gmmcrit.em import em_update
from gmmcrit.errors import (
    DegenerateComponentError,
    DomainError,
    EmptyComponentError,
    InsufficientDataError,
)
from gmmcrit.manyhills import REFERENCE_K7

from conftest import random_params, random_points, rel_err


def resp(gamma):
    g = np.asarray(gamma, dtype=float)
    return Responsibilities(g, float(g.sum()), g.size - float(g.sum()))


# --- m_step ----------------------------------------------------------------


def test_m_step_constant_responsibilities_give_moments():
    x = Sample([0.0, 1.0, 3.0, 7.0])
    p = m_step(resp([0.3] * 4), x)
    assert p.alpha == pytest.approx(0.3)
    assert p.mu1 == pytest.approx(x.mean) and p.mu2 == pytest.approx(x.mean)
    assert p.sigma1 == pytest.approx(x.std) and p.sigma2 == pytest.approx(x.std)


def test_m_step_hard_assignment():
    p = m_step(resp([1, 1, 0, 0]), [1.0, 1.2, 2.0, 2.2])
    assert p.as_tuple() == pytest.approx((0.5, 1.1, 2.1, 0.1, 0.1), abs=1e-14)


def test_m_step_weighted_moment_oracle():
    rng = np.random.default_rng(23)
    for _ in range(30):
        x = np.sort(random_points(rng, 6))
        g = rng.uniform(0, 1, 6)
        h = 1 - g
        n1, n2 = g.sum(), h.sum()
        mu1 = sum(gi * xi for gi, xi in zip(g, x)) / n1
        mu2 = sum(hi * xi for hi, xi in zip(h, x)) / n2
        v1 = sum(gi * (xi - mu1) ** 2 for gi, xi in zip(g, x)) / n1
        v2 = sum(hi * (xi - mu2) ** 2 for hi, xi in zip(h, x)) / n2
        p = m_step(resp(g), x)
        assert rel_err(p.as_array(), [n1 / 6, mu1, mu2, math.sqrt(v1), math.sqrt(v2)]) < 1e-13
        q = m_step(resp(g), x, Constraint.EQUAL_VARIANCE)
        pooled = math.sqrt((v1 * n1 + v2 * n2) / 6)
        assert q.sigma1 == q.sigma2
        assert q.sigma1 == pytest.approx(pooled, rel=1e-13)


def test_m_step_empty_component():
    with pytest.raises(EmptyComponentError):
        m_step(resp([0, 0, 0]), [0.0, 1.0, 2.0])
    with pytest.raises(EmptyComponentError):
        m_step(resp([1, 1, 1]), [0.0, 1.0, 2.0])


def test_m_step_degenerate_component():
    with pytest.raises(DegenerateComponentError) as info:
        m_step(resp([1, 0, 0]), [0.0, 1.0, 2.0])
    assert info.value.sigma == 0.0


def test_options_validation():
    with pytest.raises(DomainError):
        EMOptions(max_iters=0)
    with pytest.raises(DomainError):
        EMOptions(param_tol=0)
    assert EMOptions(constraint="EqualVariance").constraint is Constraint.EQUAL_VARIANCE


# --- run_em ----------------------------------------------------------------


def test_run_em_reproduces_reference_row_1(k7_sample):
    trace = run_em(starting_point(7, 1), k7_sample)
    assert trace.status is Status.CONVERGED
    final = canonicalize(trace.final)
    ref = canonicalize(MixtureParams(*REFERENCE_K7[0][1:6]))
    assert np.max(np.abs(final.as_array() - ref.as_array())) < 1e-5
    assert trace.logliks[-1] == pytest.approx(-27.2918782147578, abs=1e-9)


def test_run_em_trivial_point_is_fixed():
    x = Sample([0.0, 0.4, 1.3, 2.0, 5.5])
    p = trivial_point(x)
    q = em_update(p, x)
    assert np.max(np.abs(q.as_array() - p.as_array())) <= 1e-12
    trace = run_em(p, x)
    assert trace.status is Status.CONVERGED
    assert trace.n_iter == 1


def test_run_em_needs_two_points():
    with pytest.raises(InsufficientDataError):
        run_em(MixtureParams(0.5, 0, 1, 1, 1), [0.0])


def test_run_em_monotone_on_random_problems():
    rng = np.random.default_rng(29)
    for _ in range(100):
        x = random_points(rng, 10)
        trace = run_em(random_params(rng), x, EMOptions(max_iters=200))
        assert len(trace.logliks) == len(trace.iterates)
        assert np.all(np.diff(trace.logliks) >= -1e-12)


def test_converged_runs_are_stationary():
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 50:
        x = random_points(rng, 10)
        trace = run_em(random_params(rng), x, EMOptions(max_iters=20000))
        if trace.status is not Status.CONVERGED or not 0 < trace.final.alpha < 1:
            continue
        assert np.max(np.abs(grad_loglik(trace.final, x))) < 1e-6
        checked += 1


def test_em_update_idempotent_at_polished_point(k7_sample):
    from gmmcrit import polish

    cp = polish(MixtureParams(*REFERENCE_K7[0][1:6]), k7_sample, 30)
    assert np.max(np.abs(grad_loglik(cp.params, k7_sample))) < 1e-12
    q = em_update(cp.params, k7_sample)
    assert np.max(np.abs(q.as_array() - cp.params.as_array())) < 1e-9


def test_equal_variance_iterates():
    rng = np.random.default_rng(37)
    x = random_points(rng, 12)
    start = MixtureParams(0.4, -1.0, 1.0, 0.8, 0.8)
    trace = run_em(start, x, EMOptions(constraint=Constraint.EQUAL_VARIANCE, max_iters=500))
    for p in trace.iterates[1:]:
        assert p.sigma1 == p.sigma2
    assert np.all(np.diff(trace.logliks) >= -1e-12)


def test_degenerate_run_is_reported_not_clamped():
    x = Sample([0.0, 2.0])
    trace = run_em(MixtureParams(0.5, 0.0, 2.0, 1.0, 1.0), x)
    assert trace.status is Status.DEGENERATE
    # the rejected update collapses to sigma = 0 exactly, which is not a
    # valid point, so the trace keeps the last valid iterate unclamped
    assert trace.degenerate_sigma == 0.0
    assert min(trace.final.sigma1, trace.final.sigma2) < 1e-3
    assert np.all(np.diff(trace.logliks) >= -1e-12)


def test_max_iters_status():
    x = random_points(np.random.default_rng(1), 10)
    trace = run_em(MixtureParams(0.3, -1, 1, 1, 1), x, EMOptions(max_iters=3))
    assert trace.status is Status.MAX_ITERS
    assert trace.n_iter == 3


def test_trace_json_round_trip(k7_sample):
    trace = run_em(starting_point(7, 4), k7_sample)
    doc = json.loads(trace.to_json())
    assert set(doc) == {"iterates", "logliks", "status", "final"}
    assert doc["status"] == "Converged"
    assert len(doc["iterates"]) == len(doc["logliks"])
    assert doc["final"] == list(trace.final.as_tuple())
