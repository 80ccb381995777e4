import math

import numpy as np
import pytest
from scipy import stats

from zeroenergy.fraclap import stable_constant
from zeroenergy.levysim import (PathConfig, ProcessSpec, bias_order, dump_paths, exit_law_check,
                                exit_radius_cdf, exit_time, extrapolated_exit_time,
                                fk_functional, getoor_mean_exit, lifetime_lambda,
                                maximal_symbol, mean_exit_time, pruitt_h, sample_increments,
                                survival_prob)
from zeroenergy.potentials import PotentialModel

CAUCHY = ProcessSpec.isotropic(1.0, 1)


def test_maximal_symbol_examples():
    assert maximal_symbol(ProcessSpec.isotropic(1.5), 2.0) == pytest.approx(2**1.5)
    lay = ProcessSpec.layered(1.0, 3.0)
    assert maximal_symbol(lay, 0.5) == pytest.approx(0.25)
    for r in (0.1, 1.0, 7.0):
        ratio = maximal_symbol(ProcessSpec.isotropic(1.3), 2 * r) / maximal_symbol(
            ProcessSpec.isotropic(1.3), r)
        assert ratio == pytest.approx(2**1.3) and ratio <= 4


def test_pruitt_h_is_homogeneous():
    proc = ProcessSpec.isotropic(0.8, 2)
    assert pruitt_h(proc, 2.0) / pruitt_h(proc, 1.0) == pytest.approx(2**-0.8, rel=1e-8)
    expected = 2 * math.pi * stable_constant(2, 0.8) * (1 / (2 - 0.8) + 1 / 0.8)
    assert pruitt_h(proc, 1.0) == pytest.approx(expected, rel=1e-8)


def test_cauchy_cdf_at_one():
    x = sample_increments(CAUCHY, 1.0, 100_000, seed=5)[:, 0]
    p = np.mean(x <= 1.0)
    assert abs(p - 0.75) < 4 * math.sqrt(0.75 * 0.25 / x.size)


@pytest.mark.parametrize("alpha", [0.6, 1.5])
def test_stable_marginal_matches_scipy(alpha):
    x = sample_increments(ProcessSpec.isotropic(alpha), 1.0, 3000, seed=9)[:, 0]
    cdf = lambda v: stats.levy_stable.cdf(v, alpha, 0.0)
    assert stats.kstest(x, cdf).pvalue > 1e-3


def test_increment_symmetry():
    x = sample_increments(ProcessSpec.isotropic(1.8), 0.5, 100_000, seed=2)[:, 0]
    assert abs(x.mean()) < 4 * x.std() / math.sqrt(x.size)


def test_self_similarity():
    proc = ProcessSpec.isotropic(1.95)
    iqr = []
    for dt in (1e-2, 1.0):
        x = sample_increments(proc, dt, 100_000, seed=4)[:, 0] / dt ** (1 / 1.95)
        q1, q3 = np.percentile(x, [25, 75])
        iqr.append(q3 - q1)
    assert iqr[0] == pytest.approx(iqr[1], rel=0.03)


def test_isotropic_directions_d3():
    x = sample_increments(ProcessSpec.isotropic(1.2, 3), 1.0, 20_000, seed=8)
    u = x / np.linalg.norm(x, axis=1, keepdims=True)
    # uniform on the sphere: each coordinate of u is uniform on [-1, 1]
    assert stats.kstest((u[:, 2] + 1) / 2, "uniform").pvalue > 1e-3


def test_layered_second_moment():
    alpha, gamma = 1.0, 5.0
    proc = ProcessSpec.layered(alpha, gamma)
    x = sample_increments(proc, 0.1, 200_000, seed=3)[:, 0]
    c = stable_constant(1, alpha)
    m2 = 2 * c * (1 / (2 - alpha) + 1 / (gamma - 2))
    assert np.var(x) / 0.1 == pytest.approx(m2, rel=0.05)


def test_getoor_formula_values():
    assert getoor_mean_exit(1, 1.0, 1.0) == pytest.approx(1.0)
    assert getoor_mean_exit(2, 1.0, 1.0) == pytest.approx(2 / math.pi)
    assert getoor_mean_exit(1, 1.5, 2.0) == pytest.approx(2**1.5 * getoor_mean_exit(1, 1.5, 1))


def test_mean_exit_time_against_getoor_d2():
    proc = ProcessSpec.isotropic(1.0, 2)
    est = mean_exit_time(proc, 1.0, PathConfig(dt=5e-4, horizon=100, n_paths=4000, seed=1))
    assert abs(est.mean - 2 / math.pi) < 4 * est.std_error + 0.02


def test_extrapolated_exit_time_alpha_15():
    proc = ProcessSpec.isotropic(1.5, 1)
    cfg = PathConfig(dt=1e-3, horizon=100, n_paths=20_000, seed=3)
    ext = extrapolated_exit_time(proc, 1.0, cfg, dts=(1e-2, 3e-3))
    exact = getoor_mean_exit(1, 1.5, 1.0)
    assert bias_order(proc) == pytest.approx(1 / 1.5)
    assert abs(ext["extrapolated"] - exact) < 4 * ext["combined_error"]
    assert abs(ext["extrapolated"] - exact) / exact < 0.03
    assert ext["by_dt"][0.01] > ext["by_dt"][0.001]  # grid detection overestimates tau


def test_exit_time_scale_bound():
    vals = []
    for r in (1.0, 2.0, 4.0, 8.0):
        m = mean_exit_time(CAUCHY, r, PathConfig(dt=1e-2 * r, horizon=1e3 * r, n_paths=4000))
        vals.append(m.mean * maximal_symbol(CAUCHY, 1 / r))
    assert max(vals) / min(vals) <= 3


def test_censoring_with_huge_ball():
    s = exit_time(CAUCHY, ([0.0], 1e6), PathConfig(dt=1e-2, horizon=1.0, n_paths=500))
    assert s.censored.mean() > 0.99
    est = mean_exit_time(CAUCHY, 1e6, PathConfig(dt=1e-2, horizon=1.0, n_paths=500))
    assert not est.reliable


def test_exit_time_start_validation():
    with pytest.raises(ValueError):
        exit_time(CAUCHY, ([0.0], 1.0), PathConfig(n_paths=10), start=[2.0])
    with pytest.raises(ValueError):
        exit_time(CAUCHY, ([0.0, 0.0], 1.0), PathConfig(n_paths=10))


def test_survival_examples():
    tiny = survival_prob(CAUCHY, 1.0, 1e-6, PathConfig(n_paths=5000))
    assert tiny.mean < 1e-2
    # Markov: P(tau <= E tau / 10) <= ... < 1/2 is far from tight
    est = survival_prob(CAUCHY, 1.0, 0.1, PathConfig(dt=2e-4, n_paths=5000))
    assert est.mean < 0.5
    with pytest.raises(ValueError):
        survival_prob(CAUCHY, 1.0, 0.0, PathConfig())


def test_fk_without_potential_is_one():
    est = fk_functional(CAUCHY, PotentialModel.constant(0.0), ("ball", [0.0], 1.0), [0.0],
                        lambda y: np.ones(len(y)), PathConfig(dt=1e-3, n_paths=2000))
    assert est.mean == 1.0 and est.censored == 0


def test_fk_constant_potential_against_fine_estimate():
    lam = 0.7
    pot = PotentialModel.constant(lam)
    one = lambda y: np.ones(len(y))
    coarse = fk_functional(CAUCHY, pot, ("ball", [0.0], 1.0), [0.0], one,
                           PathConfig(dt=4e-3, n_paths=1000, seed=1))
    fine = fk_functional(CAUCHY, pot, ("ball", [0.0], 1.0), [0.0], one,
                         PathConfig(dt=2.5e-4, n_paths=16_000, seed=2))
    err = math.hypot(coarse.std_error, fine.std_error)
    assert abs(coarse.mean - fine.mean) < 4 * err + 0.01


def test_fk_domain_validation():
    one = lambda y: np.ones(len(y))
    with pytest.raises(ValueError):
        fk_functional(CAUCHY, PotentialModel.constant(0.0), ("complement", [0.0], 5.0), [1.0],
                      one, PathConfig(n_paths=10))
    with pytest.raises(ValueError):
        fk_functional(CAUCHY, PotentialModel.constant(0.0), ("annulus", [0.0], 5.0), [1.0],
                      one, PathConfig(n_paths=10))


def test_lifetime_without_potential_is_mean_exit_time():
    cfg = PathConfig(dt=1e-3, n_paths=4000, seed=6)
    lam = lifetime_lambda(CAUCHY, PotentialModel.constant(0.0), [8.0], cfg)
    ref = mean_exit_time(CAUCHY, 4.0, cfg)
    assert lam.mean == pytest.approx(ref.mean, rel=1e-9)


def test_lifetime_bounds_power_potential():
    pot = PotentialModel.power(0.5)
    prods = []
    for x in (4.0, 8.0, 16.0, 32.0):
        est = lifetime_lambda(CAUCHY, pot, [x], PathConfig(dt=1e-3, horizon=1e6, n_paths=3000,
                                                            rho=0.02, seed=2))
        prods.append(est.mean * est.meta["v_star"])
        assert est.std_error / est.mean < 0.05
    assert min(prods) > 0 and max(prods) / min(prods) < 3


def test_exit_law():
    rep = exit_law_check(CAUCHY, 1.0, PathConfig(dt=2e-4, n_paths=20_000, seed=4))
    assert rep["all_outside"] and rep["pass"]
    assert exit_radius_cdf(1.0, 1.0, 1.0) == 0.0
    assert exit_radius_cdf(1.0, 1.0, 1e12) == pytest.approx(1.0)


def test_exit_angle_uniform_d2():
    rep = exit_law_check(ProcessSpec.isotropic(1.0, 2), 1.0,
                         PathConfig(dt=1e-3, n_paths=3000, seed=2))
    assert rep["angle_ks_pvalue"] > 1e-3 and rep["all_outside"]


def test_exit_law_needs_isotropic():
    with pytest.raises(ValueError):
        exit_law_check(ProcessSpec.layered(1.0, 3.0), 1.0, PathConfig(n_paths=10))


def test_bit_exact_reproducibility_across_workers():
    a = exit_time(CAUCHY, ([0.0], 1.0), PathConfig(dt=1e-3, n_paths=3000, seed=11, workers=1))
    b = exit_time(CAUCHY, ([0.0], 1.0), PathConfig(dt=1e-3, n_paths=3000, seed=11, workers=3))
    assert np.array_equal(a.tau, b.tau) and np.array_equal(a.position, b.position)
    e1 = mean_exit_time(CAUCHY, 1.0, PathConfig(dt=1e-3, n_paths=3000, seed=11, workers=1))
    e2 = mean_exit_time(CAUCHY, 1.0, PathConfig(dt=1e-3, n_paths=3000, seed=11, workers=3))
    assert e1.to_dict() == e2.to_dict()


def test_layered_exit_time_is_finite():
    proc = ProcessSpec.layered(1.0, 3.0)
    est = mean_exit_time(proc, 1.0, PathConfig(dt=1e-3, n_paths=500, seed=1))
    assert est.censored == 0 and est.mean > 0


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(dt=2.0, horizon=1.0), dict(n_paths=0),
                                dict(seed=-1), dict(workers=0)])
def test_path_config_validation(kw):
    with pytest.raises(ValueError):
        PathConfig(**kw)


def test_process_validation():
    with pytest.raises(ValueError):
        ProcessSpec.layered(1.0, 2.0)
    with pytest.raises(ValueError):
        ProcessSpec.isotropic(2.0)


def test_dump_paths(tmp_path):
    out = tmp_path / "paths.csv"
    dump_paths(CAUCHY, PathConfig(dt=0.1), out, n_paths=2, steps=5)
    lines = out.read_text().splitlines()
    assert lines[0] == "path,t,x_1" and len(lines) == 1 + 2 * 6
