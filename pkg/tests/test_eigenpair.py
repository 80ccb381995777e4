import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeroenergy.eigenpair import (EigenpairSpec, OutOfRangeError, decay_class,
                                  eigenfunction_value, lp_membership, potential_radial,
                                  potential_value, sign_at_infinity)


def test_eigenfunction_examples():
    assert eigenfunction_value(EigenpairSpec(2, 1.0, 0, 1.3), np.zeros(2)) == 1.0
    assert eigenfunction_value(EigenpairSpec(3, 1.0, 1, 1.3), np.zeros(3)) == 0.0
    assert eigenfunction_value(EigenpairSpec(1, 1.0, 0, 1.0), 1.0) == pytest.approx(0.5)


def test_closed_form_potential():
    spec = EigenpairSpec(1, 1.0, 0, 1.0)
    assert potential_value(spec, 0.0) == pytest.approx(-1.0, rel=1e-12)
    assert potential_value(spec, 1.0) == pytest.approx(0.0, abs=1e-12)
    x = np.array([0.3, 2.0, 7.5, 40.0])
    assert np.allclose(potential_value(spec, x), (x**2 - 1) / (1 + x**2), rtol=1e-11, atol=1e-14)


def test_negative_tail_below_threshold():
    spec = EigenpairSpec(1, 0.5, 0, 0.2)
    assert sign_at_infinity(spec) == "negative"
    assert np.all(potential_radial(spec, np.array([1e2, 1e3, 1e5])) < 0)


@pytest.mark.parametrize("spec, row, form, a", [
    (EigenpairSpec(3, 1.0, 0, 1.0), 2, "power", 2.0),
    (EigenpairSpec(2, 1.0, 0, 1.0), 3, "power_log", 1.0),
    (EigenpairSpec(1, 1.0, 0, 0.9), 4, "power", 0.2),
    (EigenpairSpec(3, 1.0, 0, 1.25), 1, "power", 1.0),
])
def test_decay_class_rows(spec, row, form, a):
    dc = decay_class(spec)
    assert dc.row == row and dc.rate.form == form
    assert dc.rate.a == pytest.approx(a)
    assert dc.degenerate_log_case == (row == 3)


def test_decay_class_rejects_out_of_range():
    with pytest.raises(OutOfRangeError):
        decay_class(EigenpairSpec(1, 1.0, 0, 1.0))  # kappa = (mu+alpha)/2


def test_lp_membership_examples():
    assert lp_membership(EigenpairSpec(1, 1.0, 0, 1.0), 2)
    assert not lp_membership(EigenpairSpec(3, 1.0, 0, 0.375), 2)
    assert not lp_membership(EigenpairSpec(1, 1.0, 0, 0.25), 2)  # boundary excluded
    with pytest.raises(ValueError):
        lp_membership(EigenpairSpec(1, 1.0, 0, 1.0), 0.5)


@pytest.mark.parametrize("bad", [dict(d=0, alpha=1.0), dict(d=1, alpha=2.0),
                                 dict(d=1, alpha=1.0, l=1, kappa=0.9),
                                 dict(d=2, alpha=1.0, axis=3)])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        EigenpairSpec(**bad)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.floats(0.2, 1.9), st.floats(0.05, 0.95),
       st.lists(st.floats(-20, 20), min_size=3, max_size=3))
def test_l1_antisymmetry(d, alpha, t, x):
    spec = EigenpairSpec(d, alpha, 1, 1.0 + t * ((d + 2 + alpha) / 2 - 1.0), axis=1)
    p = np.array(x[:d])
    q = p.copy()
    q[0] = -q[0]
    assert eigenfunction_value(spec, p if d > 1 else p[0]) == \
        -eigenfunction_value(spec, q if d > 1 else q[0])


@pytest.mark.parametrize("d, alpha, kappa", [(1, 1.0, 0.6), (2, 1.0, 0.75), (3, 1.5, 1.2)])
def test_phi_tail(d, alpha, kappa):
    spec = EigenpairSpec(d, alpha, 0, kappa)
    r = 1e5
    x = np.zeros(d)
    x[0] = r
    assert eigenfunction_value(spec, x if d > 1 else r) == pytest.approx(
        (1 + r * r) ** -kappa, rel=1e-12)


def test_potential_sign_regimes():
    for k in np.linspace(0.1, 1.9, 10):
        spec = EigenpairSpec(3, 1.0, 0, float(k))
        v = float(potential_radial(spec, 1e4))
        assert (v < 0) == (sign_at_infinity(spec) == "negative")
    assert math.isfinite(float(potential_radial(EigenpairSpec(3, 1.0, 0, 1.5), 1e6)))
