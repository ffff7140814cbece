import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracthermo.errors import DomainError, InvalidB
from fracthermo.kernelcore import (
    CASE1,
    CASE2,
    CASE3,
    MIXED,
    case_of,
    classify,
    default_b,
    gamma_fn,
    gamma_line,
    gamma_sup_norm,
    kernel_K,
    resolve_beta,
    thresholds,
)

from conftest import make_spec

# Gamma at 40 digits (mpmath), rounded to 20
GAMMA_ORACLE = {
    0.1: 9.5135076986687318363,
    0.3: 2.9915689876875906283,
    0.5: 1.7724538509055160273,
    0.8: 1.1642297137253033736,
    1.0: 1.0,
    1.2: 0.91816874239976061064,
    1.5: 0.88622692545275801365,
    1.8: 0.93138377098024269891,
    2.0: 1.0,
    2.5: 1.3293403881791370205,
    3.7: 4.1706517837966031654,
    7.5: 1871.2543057977883465,
}


@pytest.mark.parametrize("x, value", sorted(GAMMA_ORACLE.items()))
def test_gamma_oracle(x, value):
    assert gamma_fn(x) == pytest.approx(value, rel=1e-14)


@given(st.floats(0.05, 20.0))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-13)


@given(st.floats(0.01, 0.99))
def test_gamma_reflection(x):
    assert gamma_fn(x) * gamma_fn(1 - x) == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan"), float("inf")])
def test_gamma_domain(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_thresholds_case2(case2):
    th = thresholds(case2)
    assert th.beta_K == pytest.approx(0.5158451205209632117, rel=1e-14)
    assert th.beta_gamma == pytest.approx(0.3672674969599042443, rel=1e-14)


def test_thresholds_case3(case3):
    th = thresholds(case3)
    assert th.beta_K == pytest.approx(0.7978845608028653559, rel=1e-14)
    assert th.beta_gamma == pytest.approx(0.4431134627263790068, rel=1e-14)
    assert th.t_K == pytest.approx(0.5078539816339744831, rel=1e-14)
    assert th.t_gamma == pytest.approx(0.6128379167095512574, rel=1e-14)
    assert th.t_star == th.t_K


def test_kernel_degenerate_at_beta_K():
    spec = make_spec(alpha="1.8", eta="0.6", beta="betaK")
    assert abs(kernel_K(1.0, 0.6, spec)) <= 1e-12


def test_gamma_degenerate_at_beta_gamma():
    spec = make_spec(alpha="1.8", eta="0.6", beta="betaGamma")
    assert abs(gamma_line(1.0, spec)) <= 1e-12


def test_gamma_vanishes_at_t_gamma(case3):
    th = thresholds(case3)
    assert abs(gamma_line(th.t_gamma, case3)) <= 1e-12


def test_kernel_values():
    spec = make_spec(alpha="2", eta="0.5", beta="1")
    # alpha = 2: K = beta + (eta - s)_+ - (t - s)_+
    assert kernel_K(0.0, 0.2, spec) == pytest.approx(1.3)
    assert kernel_K(1.0, 0.2, spec) == pytest.approx(0.5)
    assert kernel_K(0.7, 0.6, spec) == pytest.approx(0.9)
    K = kernel_K(np.array([0.0, 1.0]), 0.2, spec)
    assert K.shape == (2,)


@given(st.floats(0, 1), st.floats(0, 1))
def test_kernel_continuity_in_t(t, s):
    spec = make_spec(alpha="1.5", eta="0.5", beta="0.1")
    assert abs(kernel_K(t, s, spec) - kernel_K(min(t + 1e-9, 1.0), s, spec)) < 1e-3


def test_gamma_sup_norm(case3):
    assert gamma_sup_norm(case3) == max(abs(gamma_line(0, case3)), abs(gamma_line(1, case3)))


@pytest.mark.parametrize("beta, expected", [
    ("2", CASE1), ("betaK", CASE2), ("0.1", CASE3), ("0.6", MIXED), ("betaGamma", MIXED),
])
def test_case_of(beta, expected):
    assert case_of(make_spec(alpha="1.5", eta="0.5", beta=beta)) == expected


def test_case2_numeric_beta_within_tolerance():
    spec = make_spec(alpha="1.8", eta="0.6", beta=repr(resolve_beta(make_spec(alpha="1.8", eta="0.6", beta="betaK"))))
    assert case_of(spec) == CASE2


def test_classify_case3(case3):
    c = classify(case3)
    assert c.case_id == CASE3
    assert c.b == pytest.approx(0.5039269908169872415, rel=1e-14)
    assert c.phi_const == pytest.approx(0.8978845608028653559, rel=1e-14)
    assert c.c_K == pytest.approx(0.03262036475508108392, rel=1e-12)
    assert c.sigma_gamma == pytest.approx(0.1777157106683745232, rel=1e-13)
    assert c.sigma == c.c_K
    assert c.tau == -1.0


def test_classify_case2(case2):
    c = classify(case2)
    assert c.case_id == CASE2
    assert c.b == pytest.approx(0.8)
    assert c.phi_const == pytest.approx(1.229342420618401516, rel=1e-14)
    assert c.c_K == pytest.approx(0.1786076004134577471, rel=1e-13)
    assert c.sigma_gamma == pytest.approx(0.3114248922158623489, rel=1e-13)
    assert c.tau == 0.0


def test_classify_case1(case1):
    c = classify(case1)
    assert c.case_id == CASE1 and c.b == 1.0 and c.tau == c.sigma
    assert 0.0 < c.sigma <= 1.0


def test_mixed_constants_positive():
    c = classify(make_spec(alpha="1.5", eta="0.5", beta="0.6"))
    assert c.case_id == MIXED
    assert c.c_K > 0 and c.sigma_gamma > 0 and 0 < c.sigma <= 1
    assert c.b < c.thresholds.t_star


def test_b_override(case3):
    c = classify(case3, b_override=0.505)
    assert c.b == 0.505
    assert c.sigma > 0


@pytest.mark.parametrize("b", [0.4, 0.51, 0.99])
def test_invalid_b_case3(case3, b):
    with pytest.raises(InvalidB):
        classify(case3, b_override=b)


def test_invalid_b_case1(case1):
    with pytest.raises(InvalidB):
        classify(case1, b_override=0.7)


def test_invalid_b_case2(case2):
    with pytest.raises(InvalidB):
        classify(case2, b_override=0.5)


@given(st.floats(1.05, 2.0), st.floats(0.05, 0.95), st.floats(0.01, 3.0))
def test_default_b_valid(alpha, eta, beta):
    spec = make_spec(alpha=repr(alpha), eta=repr(eta), beta=repr(beta))
    if thresholds(spec).t_star <= eta:
        # t* - eta underflows for alpha close to 1 and tiny beta
        with pytest.raises(InvalidB):
            classify(spec)
        return
    c = classify(spec)
    assert c.b == default_b(spec)
    # cone constants are usable: positive and at most one
    assert 0.0 < c.sigma <= 1.0
    assert c.phi_const > 0


@given(st.floats(1.05, 2.0), st.floats(0.05, 0.95), st.floats(0.01, 3.0))
def test_kernel_dominated_by_phi(alpha, eta, beta):
    # |K(t, s)| <= Phi on the unit square and K(t, s) >= c_K Phi on [0, b]
    spec = make_spec(alpha=repr(alpha), eta=repr(eta), beta=repr(beta))
    if thresholds(spec).t_star <= eta:
        return
    c = classify(spec)
    s = np.linspace(0, 1, 41)
    t = np.linspace(0, 1, 41)
    K = kernel_K(t[:, None], s[None, :], spec)
    assert np.all(np.abs(K) <= c.phi_const * (1 + 1e-12))
    tb = t[t <= c.b]
    Kb = kernel_K(tb[:, None], s[None, :], spec)
    assert np.all(Kb >= c.c_K * c.phi_const - 1e-12)
