import math

import numpy as np
import pytest

from zeroenergy.rates import FreeParam, RateFunction, power, power_log, stretched


def test_forms_evaluate():
    r = np.array([10.0, 1e3])
    assert np.allclose(power(2)(r), r**-2.0)
    assert np.allclose(power_log(1, 2)(r), r**-1.0 * np.log(r) ** -2.0)
    s = stretched(1, 0.5, 0.3, 0.5)
    expect = np.exp(0.3 / 0.5 * np.log(r) ** 0.5) * r**-1.0 * np.log(r) ** -0.5
    assert np.allclose(s(r), expect)


def test_free_params_bind():
    g = FreeParam("gamma", 0.0, 1.0, offset=3.0, scale=-1.0)
    rate = power(g)
    assert rate.free_params() == [g]
    with pytest.raises(ValueError):
        rate(10.0)
    assert rate.bind({"gamma": 0.25}).a == pytest.approx(2.75)
    d = rate.to_dict()
    assert d["a"]["free"] == "gamma" and d["a"]["offset"] == 3.0


def test_validation_and_describe():
    with pytest.raises(ValueError):
        RateFunction("exponential", 1.0)
    with pytest.raises(ValueError):
        stretched(1, 1, 1, 1.0)
    assert "log r" in power_log(1, 1).describe()
    assert power(1.5).valid_from == 1.0 and power_log(1, 1).valid_from == math.e
