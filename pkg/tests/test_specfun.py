import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeroenergy.specfun import (HypergeometricConvergenceError, HypParams, PoleError,
                                hyp2f1_reg, ln_gamma, rgamma)


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (4.0, math.log(6.0)),
                                         (0.5, 0.5 * math.log(math.pi))])
def test_ln_gamma_examples(x, expected):
    val, sign = ln_gamma(x)
    assert sign == 1
    assert val == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("x", [-0.5, -1.5, -2.5, -3.25, 0.3, 7.7])
def test_ln_gamma_sign_and_magnitude(x):
    val, sign = ln_gamma(x)
    g = mp.gamma(x)
    assert sign == (1 if g > 0 else -1)
    assert val == pytest.approx(float(mp.log(abs(g))), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -4.0])
def test_ln_gamma_poles(x):
    with pytest.raises(PoleError):
        ln_gamma(x)
    assert rgamma(x) == 0.0


def test_hyp2f1_examples():
    assert hyp2f1_reg(1, 1, 2, 0) == 1.0
    assert hyp2f1_reg(0, 5.5, 3, -7) == pytest.approx(0.5, rel=1e-14)
    assert hyp2f1_reg(HypParams(1, 1, 2, -1)) == pytest.approx(math.log(2), rel=1e-12)


def test_hyp2f1_closed_form_against_direct_series():
    # 2F1(1,1;2;z) = -log(1-z)/z; direct series converges at z = -1/2
    z = -0.5
    s = math.fsum(z**k / (k + 1) for k in range(10_000))
    assert hyp2f1_reg(1, 1, 2, z) == pytest.approx(s, rel=1e-13)


def test_hyp2f1_rejects_positive_z():
    with pytest.raises(ValueError):
        HypParams(1, 1, 2, 0.5)


def _oracle(a, b, c, z):
    with mp.workdps(40):
        return float(mp.hyp2f1(a, b, c, z) / mp.gamma(c)) if c > 0 else float(
            mp.hyp2f1(a, b, c, z) * mp.rgamma(c))


@pytest.mark.parametrize("a, b, c, z", [
    (1.0, 1.25, 0.5, -3.0),
    (1.5, 2.0, 1.5, -100.0),
    (0.75, 0.6, 0.5, -1e4),
    (2.0, 1.75, 1.5, -1e6),
    (1.25, 0.45, 0.5, -0.3),
    (1.0, 1.0, 1.0, -50.0),  # log-degenerate b - a = 0 in the large-|z| form
])
def test_hyp2f1_against_mpmath(a, b, c, z):
    assert hyp2f1_reg(a, b, c, z) == pytest.approx(_oracle(a, b, c, z), rel=1e-9)


params = st.tuples(st.floats(0.3, 2.5), st.floats(0.1, 3.0), st.sampled_from([0.5, 1.0, 1.5]),
                   st.floats(-1e6, 0.0))


@settings(max_examples=60, deadline=None)
@given(params)
def test_pfaff_variants_agree(p):
    a, b, c, z = p
    va = hyp2f1_reg(a, b, c, z, variant="a")
    vb = hyp2f1_reg(a, b, c, z, variant="b")
    assert va == pytest.approx(vb, rel=1e-8, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(params)
def test_matches_mpmath_on_parameter_box(p):
    a, b, c, z = p
    assert hyp2f1_reg(a, b, c, z) == pytest.approx(_oracle(a, b, c, z), rel=1e-8, abs=1e-300)


def test_non_convergence_is_reported():
    with pytest.raises(HypergeometricConvergenceError):
        hyp2f1_reg(1.3, 2.7, 0.5, -0.5, max_terms=5)
