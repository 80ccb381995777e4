"""Verification suites: each criterion returns a verdict dict with measured
values, tolerances and a pass flag.  Reports are deterministic given the
config; wall-clock data lives under the ``metadata`` key only."""

from __future__ import annotations

import logging
import math
import time
import zlib
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .decaylab import (envelope_predict, fit_decay, lower_iteration, lower_limit,
                       scenario_classify, upper_iteration, upper_limit)
from .eigenpair import (EigenpairSpec, decay_class, eigenfunction_value, potential_radial,
                        sign_at_infinity)
from .fraclap import QuadConfig, residual
from .levysim import (PathConfig, ProcessSpec, exit_law_check, exit_time,
                      extrapolated_exit_time, fk_functional, getoor_mean_exit,
                      lifetime_lambda, maximal_symbol, mean_exit_time, survival_prob)
from .potentials import PotentialModel

log = logging.getLogger(__name__)

SUITES = {
    "residual": ("C1", "C2"),
    "exit": ("C5", "C6", "C7", "C10", "C11"),
    "scenarios": ("C4",),
    "envelopes": ("C3", "C9"),
    "iterations": ("C8",),
}
SUITES["all"] = tuple(sorted({c for v in SUITES.values() for c in v}, key=lambda c: int(c[1:])))

FAMILIES = ("hypergeometric",)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VerifyConfig:
    suite: str = "all"
    seed: int = 0
    workers: int = 1
    paths: int = 100_000  # paths for the exit-time and exit-law oracles
    family: str | None = None
    quad: dict = field(default_factory=dict)  # QuadConfig overrides for C1/C2

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {sorted(SUITES)}")
        if self.family is not None and self.family not in FAMILIES:
            raise ConfigError("envelope checks need explicit eigenpairs: only the "
                              "hypergeometric family is available")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.workers < 1 or self.paths < 100:
            raise ConfigError("workers must be >= 1 and paths >= 100")
        try:
            QuadConfig(**self.quad)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad quad section: {exc}") from exc


def sub_seed(seed: int, tag: str) -> int:
    """Independent 64-bit seed per criterion, stable across suites."""
    ss = np.random.SeedSequence([seed % 2**64, zlib.crc32(tag.encode())])
    return int(ss.generate_state(1, np.uint64)[0])


class _Context:
    def __init__(self, cfg: VerifyConfig):
        self.cfg = cfg
        self.cache = {}

    def quad(self) -> QuadConfig:
        return QuadConfig(**self.cfg.quad)

    def path_cfg(self, tag: str, **kw) -> PathConfig:
        return PathConfig(seed=sub_seed(self.cfg.seed, tag), workers=self.cfg.workers, **kw)

    def oracle_sample(self):
        """dt = 1e-4 exit sample from B(0,1), shared by C5 and C11."""
        if "oracle" not in self.cache:
            proc = ProcessSpec.isotropic(1.0, 1)
            pc = self.path_cfg("exit-oracle", dt=1e-4, horizon=1e4, n_paths=self.cfg.paths)
            self.cache["oracle"] = (proc, pc, exit_time(proc, (np.zeros(1), 1.0), pc))
        return self.cache["oracle"]


def _verdict(cid: str, title: str, ok: bool, measured: dict, tolerance: dict) -> dict:
    return {"id": cid, "title": title, "pass": bool(ok), "measured": measured,
            "tolerance": tolerance}


# -- residual suite ---------------------------------------------------------


def c1(ctx: _Context) -> dict:
    spec = EigenpairSpec(1, 1.0, 0, 1.0)
    grid = np.concatenate([[0.0], np.logspace(-2, 1, 29)])
    t0 = time.perf_counter()
    rep = residual(spec, grid, ctx.quad(), workers=ctx.cfg.workers)
    elapsed = time.perf_counter() - t0
    ok_t = elapsed < 10.0
    return _verdict("C1", "zero-energy residual, closed-form case",
                    rep["max_rel"] <= 1e-6 and ok_t,
                    {"max_rel": rep["max_rel"], "max_abs": rep["max_abs"], "points": grid.size,
                     "runtime_ok": ok_t},
                    {"max_rel": 1e-6, "runtime_s": 10.0}), elapsed


C2_SPECS = ((1, 1.0, 0, 0.6), (2, 1.0, 0, 0.75), (1, 0.5, 0, 0.2), (3, 1.0, 0, 1.0))


def c2(ctx: _Context) -> dict:
    grid = np.geomspace(0.1, 20.0, 12)
    base = ctx.quad()
    coarse = QuadConfig(**{**asdict(base), "nodes_per_decade": 8, "angular_nodes": 8})
    rows = []
    t0 = time.perf_counter()
    for d, al, l, k in C2_SPECS:
        spec = EigenpairSpec(d, al, l, k)
        rep = residual(spec, grid, base, workers=ctx.cfg.workers)
        r1 = residual(spec, grid, coarse, workers=ctx.cfg.workers)["max_abs"]
        r2 = residual(spec, grid, coarse.refined(), workers=ctx.cfg.workers)["max_abs"]
        shrink = r1 / r2 if r2 > 0 else math.inf
        rows.append({"spec": [d, al, l, k], "max_rel": rep["max_rel"],
                     "coarse_max_abs": r1, "doubled_max_abs": r2, "shrink": shrink,
                     "pass": rep["max_rel"] <= 1e-4 and shrink >= 4.0})
    elapsed = time.perf_counter() - t0
    ok_t = elapsed < 300.0
    return _verdict("C2", "zero-energy residual, hypergeometric cases",
                    all(r["pass"] for r in rows) and ok_t,
                    {"cases": rows, "coarse_nodes": [coarse.nodes_per_decade, coarse.angular_nodes],
                     "runtime_ok": ok_t},
                    {"max_rel": 1e-4, "min_shrink": 4.0, "runtime_s": 300.0}), elapsed


# -- envelope suite ---------------------------------------------------------

# one spec per row of the decay table, d = 3, alpha = 1: kappa below mu/2,
# at (mu - alpha)/2, at mu/2, and above mu/2
C3_SPECS = ((3, 1.0, 0, 1.25), (3, 1.0, 0, 1.0), (3, 1.0, 0, 1.5), (3, 1.0, 0, 1.75))


def c3(ctx: _Context) -> dict:
    r = np.geomspace(1e2, 1e6, 41)
    rows = []
    for d, al, l, k in C3_SPECS:
        spec = EigenpairSpec(d, al, l, k)
        dc = decay_class(spec)
        v = np.abs(potential_radial(spec, r))
        pw = fit_decay(r, v, "power")
        row = {"spec": [d, al, l, k], "table_row": dc.row, "predicted_a": dc.rate.a,
               "power_fit_a": pw.rate.a, "power_rss": pw.rss}
        if dc.rate.form == "power_log":
            pl = fit_decay(r, v, "power_log")
            ratio = pw.rss / pl.rss if pl.rss > 0 else math.inf
            row.update(power_log_fit_a=pl.rate.a, power_log_fit_b=pl.rate.b,
                       power_log_rss=pl.rss, rss_ratio=ratio)
            row["pass"] = abs(pl.rate.a - dc.rate.a) <= 0.05 and ratio >= 10.0
        else:
            row["pass"] = abs(pw.rate.a - dc.rate.a) <= 0.05
        rows.append(row)
    return _verdict("C3", "decay table reproduction", all(r["pass"] for r in rows),
                    {"rows": rows}, {"exponent": 0.05, "min_rss_ratio": 10.0}), 0.0


def c9(ctx: _Context) -> dict:
    rng = np.random.default_rng(sub_seed(ctx.cfg.seed, "C9"))
    r = np.geomspace(1e2, 1e6, 41)
    rows = []
    for _ in range(20):
        d = int(rng.integers(1, 4))
        al = float(rng.uniform(0.2, 1.9))
        t = float(rng.uniform(0.05, 0.95))
        k = d / 2 + t * al / 2  # strictly inside (mu/2, (mu + alpha)/2)
        spec = EigenpairSpec(d, al, 0, k)
        proc = ProcessSpec.isotropic(al, d)
        pot = PotentialModel.hypergeometric(spec)
        scen = scenario_classify(proc, pot)
        pred = envelope_predict(proc, pot)
        pts = np.zeros((r.size, d))
        pts[:, 0] = r
        fit = fit_decay(r, eigenfunction_value(spec, pts if d > 1 else r), "power")
        err = abs(pred.lower.a - fit.rate.a)
        rows.append({"spec": [d, al, 0, k], "scenario": scen, "predicted": pred.lower.a,
                     "two_kappa": 2 * k, "fitted": fit.rate.a, "error": err,
                     "pass": scen == 1 and err <= 0.02 and pred.upper.a == pred.lower.a})
    return _verdict("C9", "scenario and envelope identity", all(x["pass"] for x in rows),
                    {"cases": rows, "max_error": max(x["error"] for x in rows)},
                    {"exponent": 0.02}), 0.0


# -- scenarios suite --------------------------------------------------------


def c4(ctx: _Context) -> dict:
    # d = 3, alpha = 1: V < 0 at infinity iff kappa <= (mu - alpha)/2 = 1
    rows = []
    for k in np.linspace(0.1, 1.9, 10):
        spec = EigenpairSpec(3, 1.0, 0, float(k))
        v = float(potential_radial(spec, 1e4))
        pred = sign_at_infinity(spec)
        got = "negative" if v < 0 else "positive"
        rows.append({"kappa": float(k), "V_at_1e4": v, "predicted": pred, "pass": got == pred})
    regimes = {r["predicted"] for r in rows}
    return _verdict("C4", "sign of V at infinity",
                    all(r["pass"] for r in rows) and len(regimes) == 2,
                    {"cases": rows, "regimes": sorted(regimes)}, {"r": 1e4}), 0.0


# -- iterations suite -------------------------------------------------------


def c8(ctx: _Context) -> dict:
    rng = np.random.default_rng(sub_seed(ctx.cfg.seed, "C8"))
    rows = []
    for _ in range(50):
        eta = float(rng.uniform(0.05, 2.0))
        h = float(rng.uniform(0.0, 20.0)) / eta  # eta h <= 20
        h1 = float(rng.uniform(0.0, h))
        K, c3_, nf = (float(v) for v in rng.uniform(0.1, 10.0, 3))
        c4_ = float(rng.uniform(0.05, 0.7))
        up = upper_iteration(100, K, h, c3_, c4_, eta, nf)
        upl = upper_limit(K, h, c3_, eta, nf)
        lo = lower_iteration(100, K, h, h1, eta)
        lol = lower_limit(K, h, h1, eta)
        e_up = abs(up - upl) / max(1.0, abs(upl))
        e_lo = abs(lo - lol) / max(1.0, abs(lol))
        rows.append({"eta_h": eta * h, "upper_error": e_up, "lower_error": e_lo,
                     "pass": e_up < 1e-12 and e_lo < 1e-12})
    worst = max(max(r["upper_error"], r["lower_error"]) for r in rows)
    return _verdict("C8", "iteration limits", all(r["pass"] for r in rows),
                    {"draws": len(rows), "max_scaled_error": worst,
                     "max_eta_h": max(r["eta_h"] for r in rows)},
                    {"p": 100, "error": 1e-12, "scale": "max(1, |limit|)"}), 0.0


# -- exit suite -------------------------------------------------------------


def c5(ctx: _Context) -> dict:
    t0 = time.perf_counter()
    proc, pc, sample = ctx.oracle_sample()
    ext = extrapolated_exit_time(proc, 1.0, pc, dts=(1e-2, 1e-3), sample=sample)
    elapsed = time.perf_counter() - t0
    exact = getoor_mean_exit(1, 1.0, 1.0)
    err = abs(ext["extrapolated"] - exact)
    rel = err / exact
    within = err <= 3 * ext["combined_error"]
    scan = []
    for r in (1.0, 2.0, 4.0, 8.0):
        c = ctx.path_cfg(f"exit-scan-{r}", dt=1e-3 * r, horizon=1e4 * r, n_paths=10_000)
        m = mean_exit_time(proc, r, c)
        scan.append({"r": r, "mean": m.mean, "std_error": m.std_error,
                     "scaled": m.mean * float(maximal_symbol(proc, 1.0 / r))})
    sc = [s["scaled"] for s in scan]
    spread = max(sc) / min(sc)
    ok_t = elapsed < 120.0
    return _verdict("C5", "exit-time oracle",
                    within and rel <= 0.02 and spread <= 3.0 and ok_t,
                    {"getoor": exact, "extrapolated": ext["extrapolated"],
                     "fine_mean": ext["fine"].mean, "mc_error": ext["fine"].std_error,
                     "extrapolation_error": ext["extrapolation_error"],
                     "combined_error": ext["combined_error"], "order": ext["order"],
                     "fitted_order": ext["fitted_order"], "limit_std_error": ext["limit_std_error"],
                     "by_dt": {repr(k): v for k, v in ext["by_dt"].items()},
                     "rel_error": rel, "error_bars": err / ext["combined_error"],
                     "scan": scan, "scan_ratio": spread, "censored": ext["fine"].censored,
                     "runtime_ok": ok_t},
                    {"error_bars": 3.0, "rel_error": 0.02, "scan_ratio": 3.0,
                     "runtime_s": 120.0, "n": pc.n_paths, "dt": pc.dt}), elapsed


def c6(ctx: _Context) -> dict:
    proc = ProcessSpec.isotropic(1.0, 1)
    rows = []
    for r in (1.0, 2.0, 4.0, 8.0):
        for eta in (0.02, 0.05, 0.1, 0.2):
            c = ctx.path_cfg(f"survival-{r}-{eta}", dt=eta / 500, horizon=eta, n_paths=50_000)
            est = survival_prob(proc, r, eta, c)
            ratio = est.mean / (eta * float(maximal_symbol(proc, 1.0 / r)))
            rows.append({"r": r, "eta": eta, "estimate": est.mean,
                         "std_error": est.std_error, "ratio": ratio})
    ratios = [x["ratio"] for x in rows]
    const, spread = max(ratios), max(ratios) / min(ratios)
    return _verdict("C6", "survival probability bound", min(ratios) > 0 and spread <= 5.0,
                    {"grid": rows, "constant": const, "max_over_min": spread},
                    {"max_over_min": 5.0}), 0.0


def c7(ctx: _Context) -> dict:
    proc = ProcessSpec.isotropic(1.0, 1)
    spec = EigenpairSpec(1, 1.0, 0, 0.6)
    pot = PotentialModel.hypergeometric(spec)
    c = ctx.path_cfg("fk", dt=1e-3, horizon=1e6, n_paths=100_000, rho=0.01)
    est = fk_functional(proc, pot, ("complement", [0.0], 5.0), [10.0],
                        lambda y: eigenfunction_value(spec, y[:, 0]), c)
    target = float(eigenfunction_value(spec, 10.0))
    z = (est.mean - target) / est.std_error
    frac = est.censored / est.n
    return _verdict("C7", "Feynman-Kac self-consistency", abs(z) <= 3.0 and frac < 0.01,
                    {"estimate": est.mean, "std_error": est.std_error, "phi": target,
                     "z": z, "censored_fraction": frac, "killed": est.killed},
                    {"z": 3.0, "censored_fraction": 0.01, "rho": c.rho, "dt": c.dt}), 0.0


def c10(ctx: _Context) -> dict:
    proc = ProcessSpec.isotropic(1.0, 1)
    pot = PotentialModel.power(0.5)
    rows = []
    for x in (4.0, 8.0, 16.0, 32.0):
        c = ctx.path_cfg(f"lambda-{x}", dt=1e-3, horizon=1e6, n_paths=20_000, rho=0.02)
        est = lifetime_lambda(proc, pot, [x], c)
        scale = max(est.meta["v_star"], est.meta["psi_inv_x"])
        rows.append({"x": x, "lambda": est.mean, "rel_error": est.std_error / est.mean,
                     "ratio": est.mean * scale})
    const = min(r["ratio"] for r in rows)
    ok = const > 0 and all(r["rel_error"] < 0.05 for r in rows)
    return _verdict("C10", "mean-lifetime lower bound", ok,
                    {"cases": rows, "constant": const,
                     "max_over_min": max(r["ratio"] for r in rows) / const},
                    {"rel_error": 0.05, "beta": 0.5}), 0.0


def c11(ctx: _Context) -> dict:
    proc, pc, sample = ctx.oracle_sample()
    rep = exit_law_check(proc, 1.0, pc, level=0.01, sample=sample)
    return _verdict("C11", "exit-law goodness of fit", rep["pass"] and rep["all_outside"],
                    rep, {"level": 0.01, "n": pc.n_paths, "dt": pc.dt}), 0.0


CRITERIA = {"C1": c1, "C2": c2, "C3": c3, "C4": c4, "C5": c5, "C6": c6, "C7": c7,
            "C8": c8, "C9": c9, "C10": c10, "C11": c11}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def run(cfg: VerifyConfig) -> dict:
    """Run a suite and return the verdict report."""
    ctx = _Context(cfg)
    verdicts, runtimes = [], {}
    for cid in SUITES[cfg.suite]:
        log.info("running %s", cid)
        t0 = time.perf_counter()
        v, _ = CRITERIA[cid](ctx)
        runtimes[cid] = time.perf_counter() - t0
        log.info("%s %s (%.1f s)", cid, "pass" if v["pass"] else "FAIL", runtimes[cid])
        verdicts.append(v)
    return _clean({
        "suite": cfg.suite,
        "config": asdict(cfg),
        "criteria": verdicts,
        "all_pass": all(v["pass"] for v in verdicts),
        "metadata": {
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "runtime_s": runtimes,
            "version": __version__,
        },
    })


def strip_metadata(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "metadata"}
