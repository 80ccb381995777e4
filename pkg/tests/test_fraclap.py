import numpy as np
import pytest

from zeroenergy.eigenpair import EigenpairSpec
from zeroenergy.fraclap import (QuadConfig, QuadratureError, frac_laplacian,
                                frac_laplacian_estimate, normalization_check, residual,
                                sphere_area, stable_constant)


def lorentz(p):
    return 1.0 / (1.0 + p[:, 0] ** 2)


def test_constant_function_gives_zero():
    for d, alpha in ((1, 0.5), (2, 1.0), (3, 1.5)):
        val = frac_laplacian(lambda p: np.ones(len(p)), alpha, np.full(d, 0.7))
        assert abs(val) < 1e-12


@pytest.mark.parametrize("x, expected", [(0.0, 1.0), (2.0, -3.0 / 25.0)])
def test_harmonic_extension_oracle(x, expected):
    # (-Delta)^(1/2) (1 + x^2)^-1 = (1 - x^2)/(1 + x^2)^2
    assert frac_laplacian(lorentz, 1.0, x) == pytest.approx(expected, abs=1e-10)


def test_oracle_on_a_grid():
    xs = np.array([0.05, 0.3, 1.0, 3.0, 9.0])
    got = np.array([frac_laplacian(lorentz, 1.0, x) for x in xs])
    assert np.allclose(got, (1 - xs**2) / (1 + xs**2) ** 2, rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0])
@pytest.mark.parametrize("d, alpha", [(1, 0.7), (2, 1.3)])
def test_scaling(lam, d, alpha):
    def f(p):
        return (1.0 + np.sum(p * p, axis=1)) ** -1.1

    def f_lam(p):
        return f(lam * p)

    x = np.full(d, 0.8)
    cfg = QuadConfig(feature_scale=1.0 / lam)
    lhs = frac_laplacian(f_lam, alpha, x, cfg)
    rhs = lam**alpha * frac_laplacian(f, alpha, lam * x)
    assert lhs == pytest.approx(rhs, rel=1e-6)


@pytest.mark.parametrize("d, alpha", [(1, 1.0), (2, 0.6), (3, 1.4)])
def test_stable_constant_normalisation(d, alpha):
    assert normalization_check(d, alpha) == pytest.approx(1.0, rel=1e-8)


def test_sphere_area():
    assert sphere_area(1) == 2.0
    assert sphere_area(2) == pytest.approx(2 * np.pi)
    assert sphere_area(3) == pytest.approx(4 * np.pi)
    assert stable_constant(1, 1.0) == pytest.approx(1 / np.pi)


def test_residual_closed_form_at_origin():
    rep = residual(EigenpairSpec(1, 1.0, 0, 1.0), [0.0])
    assert abs(rep["points"][0]["residual"]) <= 1e-6


def test_residual_on_nodal_set():
    spec = EigenpairSpec(2, 1.0, 1, 1.2, axis=1)
    rep = residual(spec, np.array([[0.0, 0.5], [0.0, 3.0]]))
    for row in rep["points"]:
        assert row["v_phi"] == 0.0
        assert abs(row["residual"]) < 1e-8
    assert np.isnan(rep["points"][0]["rel"]) or rep["points"][0]["rel"] <= 1.0


def test_residual_d2_boundary_case():
    spec = EigenpairSpec(2, 1.0, 0, 0.75)
    rep = residual(spec, np.geomspace(0.1, 10, 6))
    assert rep["max_rel"] <= 1e-4


def test_refinement_shrinks_residual():
    spec = EigenpairSpec(1, 1.0, 0, 0.6)
    coarse = QuadConfig(nodes_per_decade=8, angular_nodes=8)
    grid = np.geomspace(0.1, 20, 6)
    r1 = residual(spec, grid, coarse)["max_abs"]
    r2 = residual(spec, grid, coarse.refined())["max_abs"]
    assert r1 / r2 >= 4.0


def test_estimate_and_tolerance():
    val, err = frac_laplacian_estimate(lorentz, 1.0, 0.5)
    assert err < 1e-6
    with pytest.raises(QuadratureError):
        frac_laplacian(lorentz, 1.0, 0.5, QuadConfig(nodes_per_decade=16, angular_nodes=16),
                       tol=1e-15)


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureError):
        frac_laplacian(lambda p: np.full(len(p), np.nan), 1.0, 0.0)


@pytest.mark.parametrize("kw", [dict(inner_radius=0.0), dict(nodes_per_decade=4),
                                dict(tail_order=3), dict(feature_scale=-1.0)])
def test_quad_config_validation(kw):
    with pytest.raises(ValueError):
        QuadConfig(**kw)


def test_alpha_range():
    with pytest.raises(ValueError):
        frac_laplacian(lorentz, 2.0, 0.0)
