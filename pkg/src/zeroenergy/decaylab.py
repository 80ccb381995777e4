"""Decay machinery: ratio kernels, self-improving iterations, scenarios,
envelope predictions and log-log decay fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import mpmath as mp
import numpy as np
from scipy import integrate

from .eigenpair import EigenpairSpec
from .fraclap import sphere_area
from .levysim import ProcessSpec
from .potentials import PotentialModel
from .rates import FreeParam, RateFunction, power, power_log, stretched

__all__ = [
    "PotentialModel",
    "EnvelopePrediction",
    "DecayFit",
    "DecayFitError",
    "UnsupportedCombination",
    "K_and_h",
    "upper_iteration",
    "upper_limit",
    "lower_iteration",
    "lower_limit",
    "scenario_classify",
    "envelope_predict",
    "fit_decay",
    "check_envelope",
]

EXP_TOL = 1e-9
# only gamma2 >= 1 is known; profiling needs a finite upper end
GAMMA2_MAX = 5.0


class UnsupportedCombination(ValueError):
    pass


class DecayFitError(ValueError):
    pass


# -- K and h ----------------------------------------------------------------


def _log_ratio_exponents(u: RateFunction, v: RateFunction):
    """(c, b) with u/v = r^-c (log r)^-b when both are power or power_log."""
    if u.form == "stretched" or v.form == "stretched" or u.free_params() or v.free_params():
        return None
    bu = u.b if u.form == "power_log" else 0.0
    bv = v.b if v.form == "power_log" else 0.0
    return u.a - v.a, bu - bv


def _shell_closed(m: float, b: float, lo: float, hi: float) -> float:
    """int_lo^hi s^m (log s)^-b ds for lo >= 1, via t = log s."""
    t0, t1 = math.log(lo), math.log(hi)
    lam = -(m + 1.0)
    if abs(b) < EXP_TOL:
        if abs(lam) < EXP_TOL:
            return t1 - t0
        return (math.exp(-lam * t0) - math.exp(-lam * t1)) / lam
    if abs(lam) < EXP_TOL:
        if abs(b - 1.0) < EXP_TOL:
            return math.log(t1) - math.log(t0)
        return (t1 ** (1 - b) - t0 ** (1 - b)) / (1 - b)
    if lam > 0:
        # int t^-b e^{-lam t} dt = lam^{b-1} [Gamma(1-b, lam t0) - Gamma(1-b, lam t1)]
        val = mp.gammainc(1 - b, lam * t0, lam * t1) * mp.power(lam, b - 1)
        return float(val)
    return integrate.quad(lambda t: math.exp(-lam * t) * t**-b, t0, t1, limit=400)[0]


def K_and_h(u: RateFunction, v: RateFunction, R0: float, r: float, d: int):
    """K = u/v at r and h(r) = int_{R0 <= |y| <= r} K(|y|) dy."""
    if not r >= R0 >= 1.0:
        raise ValueError("need r >= R0 >= 1")
    K = float(np.exp(u.log_value(r) - v.log_value(r)))
    sig = sphere_area(d)
    ex = _log_ratio_exponents(u, v)
    if ex is not None:
        c, b = ex
        h = sig * _shell_closed(d - 1 - c, b, R0, r)
    else:
        f = lambda s: float(np.exp(u.log_value(s) - v.log_value(s))) * s ** (d - 1)
        h = sig * integrate.quad(f, R0, r, limit=400)[0]
    return K, h


# -- iterations -------------------------------------------------------------


def _exp_partial(x: float, p: int) -> float:
    """sum_{k=1}^p x^(k-1)/(k-1)!"""
    terms = [1.0]
    t = 1.0
    for k in range(1, p):
        t *= x / k
        terms.append(t)
    return math.fsum(terms)


def upper_iteration(p: int, K: float, h: float, c3: float, c4: float, eta: float,
                    norm_f: float) -> float:
    """c3 ||f|| [K sum_{k=1}^p (eta h)^(k-1)/(k-1)! + c4^p]."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not 0.0 < c4 < 1.0:
        raise ValueError("c4 must lie in (0, 1)")
    return c3 * norm_f * (K * _exp_partial(eta * h, p) + c4**p)


def upper_limit(K: float, h: float, c3: float, eta: float, norm_f: float) -> float:
    return c3 * norm_f * K * math.exp(eta * h)


def lower_iteration(p: int, K: float, h: float, h1: float, eta: float) -> float:
    """eta K sum_{k=1}^p (eta (h - h1))^(k-1)/(k-1)!."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if h < h1:
        raise ValueError("need h >= h1")
    return eta * K * _exp_partial(eta * (h - h1), p)


def lower_limit(K: float, h: float, h1: float, eta: float) -> float:
    return eta * K * math.exp(eta * (h - h1))


# -- scenarios and envelopes ------------------------------------------------


def _process_exponents(proc: ProcessSpec) -> tuple[float, float]:
    """(p_psi, p_nu): Psi(1/r) ~ r^-p_psi and nu ~ r^(-d-p_nu) at infinity."""
    if proc.family == "isotropic_stable":
        return proc.alpha, proc.alpha
    return 2.0, float(proc.gamma)


def scenario_classify(proc: ProcessSpec, pot: PotentialModel) -> int:
    """Scenario 1, 2 or 3 from the tail exponents, decided symbolically."""
    if pot.sign_at_infinity() != "positive":
        raise UnsupportedCombination("scenarios are defined for potentials positive at infinity")
    a, delta = pot.tail_exponents()
    p_psi, p_nu = _process_exponents(proc)
    lim_zero = a < p_psi - EXP_TOL or (abs(a - p_psi) <= EXP_TOL and delta > 0)
    if not lim_zero:
        return 3
    finite = a < p_nu - EXP_TOL or (abs(a - p_nu) <= EXP_TOL and delta > 1)
    return 1 if finite else 2


@dataclass(frozen=True)
class EnvelopePrediction:
    scenario: int | None
    lower: RateFunction | None
    upper: RateFunction | None
    free_constants: list = field(default_factory=list)
    along_axis: bool = False
    source: str = ""

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise ValueError("a prediction needs a lower or an upper envelope")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "lower": self.lower.to_dict() if self.lower else None,
            "upper": self.upper.to_dict() if self.upper else None,
            "free_constants": list(self.free_constants),
            "along_axis": self.along_axis,
            "source": self.source,
        }


# positive multiplicative constants C, eta* are never resolved
_CONSTS = ["C1", "C2"]


def _is_power(pot: PotentialModel, delta: float) -> bool:
    return pot.family in ("power", "constant") or abs(delta) <= EXP_TOL


def envelope_predict(proc: ProcessSpec, pot: PotentialModel, traits: str = "positive",
                     p: float | None = None) -> EnvelopePrediction:
    """Envelope for a solution phi of the zero-energy equation.

    ``traits`` is "positive", "antisymmetric" or "negative_potential";
    ``p`` is an exponent with phi in L^p when that is known.
    """
    d = proc.d
    a, delta = pot.tail_exponents()
    spec: EigenpairSpec | None = pot.spec if pot.family == "hypergeometric" else None

    if traits == "negative_potential":
        if pot.sign_at_infinity() != "negative":
            raise UnsupportedCombination("negative_potential needs V < 0 at infinity")
        if proc.family != "isotropic_stable":
            raise UnsupportedCombination("negative potentials are covered for stable processes only")
        if a < proc.alpha - EXP_TOL:
            raise UnsupportedCombination("need |V| <= C |x|^-alpha at infinity")
        if p is None or p <= 1:
            raise UnsupportedCombination("negative_potential envelope needs phi in L^p, p > 1")
        q = FreeParam("q", 0.0, d / p)
        return EnvelopePrediction(None, None, power(q), ["q"] + _CONSTS, True,
                                  "negative potential, antisymmetric, L^p")

    if pot.sign_at_infinity() != "positive":
        raise UnsupportedCombination(f"trait {traits!r} needs V > 0 at infinity")
    scen = scenario_classify(proc, pot)

    if traits == "antisymmetric":
        if proc.family != "isotropic_stable":
            raise UnsupportedCombination("antisymmetric envelopes are stated for stable processes")
        al = proc.alpha
        if _is_power(pot, delta) and a < al - EXP_TOL:
            # (1+|x|)^-(d+alpha-beta) times an extra (alpha-beta) off the nodal plane
            return EnvelopePrediction(scen, None, power(d + 2 * al - 2 * a), _CONSTS[:1], True,
                                      "antisymmetric, power beta < alpha")
        if abs(a - al) <= EXP_TOL and delta > 1:
            return EnvelopePrediction(scen, None, power_log(d, 2 * delta), _CONSTS[:1], True,
                                      "antisymmetric, power-log delta > 1")
        raise UnsupportedCombination("no antisymmetric envelope for this potential")

    if traits != "positive":
        raise UnsupportedCombination(f"unknown trait {traits!r}")

    if proc.family == "layered_stable":
        if not _is_power(pot, delta):
            raise UnsupportedCombination("layered envelopes need a power potential")
        g = proc.gamma
        if a < 2 - EXP_TOL:
            e = power(d + g - a)
            return EnvelopePrediction(scen, e, e, _CONSTS, False, "layered, beta < 2")
        up = power(d / p) if p is not None else None
        return EnvelopePrediction(scen, power(d + g - 2), up, _CONSTS[:1] + (["C4"] if up else []),
                                  False, "layered, beta >= 2")

    al = proc.alpha
    if _is_power(pot, delta) or (abs(a - al) <= EXP_TOL and delta <= 0):
        if a < al - EXP_TOL and _is_power(pot, delta):
            # d + alpha - beta; equals 2 kappa for the explicit pairs
            ex = 2 * spec.kappa - 2 * spec.l if spec is not None else d + al - a
            e = power(ex)
            return EnvelopePrediction(scen, e, e, _CONSTS, False, "stable, power beta < alpha")
        gam = FreeParam("gamma", 0.0, 1.0, offset=d, scale=-1.0)
        up = power(d / p) if p is not None else None
        return EnvelopePrediction(scen, power(gam), up, ["gamma"] + _CONSTS, False,
                                  "stable, power beta >= alpha")
    if abs(a - al) > EXP_TOL:
        raise UnsupportedCombination("power-log envelopes need V ~ r^-alpha (log r)^delta")
    if delta > 1 + EXP_TOL:
        e = power_log(d, delta)
        return EnvelopePrediction(scen, e, e, _CONSTS, False, "stable, power-log delta > 1")
    g1 = FreeParam("gamma1", 0.0, 1.0, offset=1.0, scale=-1.0)
    g2 = FreeParam("gamma2", 1.0, GAMMA2_MAX, offset=1.0, scale=-1.0)
    if abs(delta - 1) <= EXP_TOL:
        return EnvelopePrediction(scen, power_log(d, g1), power_log(d, g2),
                                  ["gamma1", "gamma2"] + _CONSTS, False, "stable, power-log delta = 1")
    lo = stretched(d, delta, FreeParam("gamma1", 0.0, 1.0), delta)
    hi = stretched(d, delta, FreeParam("gamma2", 1.0, GAMMA2_MAX), delta)
    return EnvelopePrediction(scen, lo, hi, ["gamma1", "gamma2"] + _CONSTS, False,
                              "stable, power-log 0 < delta < 1")


# -- fitting ----------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    rate: RateFunction
    rss: float
    rms: float
    n: int
    condition: float

    def to_dict(self) -> dict:
        return {"rate": self.rate.to_dict(), "rss": self.rss, "rms": self.rms,
                "n": self.n, "condition": self.condition}


def _ols(X: np.ndarray, y: np.ndarray):
    scale = np.linalg.norm(X, axis=0)
    Xs = X / scale
    cond = float(np.linalg.cond(Xs))
    if not np.isfinite(cond) or cond > 1e12:
        raise DecayFitError(f"ill-conditioned design matrix (cond={cond:.3g})")
    beta, *_ = np.linalg.lstsq(Xs, y, rcond=None)
    resid = y - Xs @ beta
    rss = float(resid @ resid)
    n, k = X.shape
    s2 = rss / (n - k) if n > k else 0.0
    cov = s2 * np.linalg.inv(Xs.T @ Xs)
    return beta / scale, np.sqrt(np.diag(cov)) / scale, rss, cond


def fit_decay(r, values, model_hint: str | None = None,
              delta_grid=np.linspace(0.05, 0.95, 91)) -> DecayFit:
    """Least-squares fit of log values against log r (plus log log r terms).

    ``model_hint`` is "power" (default), "power_log" or "stretched".
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(values, dtype=float)
    form = model_hint or "power"
    if form not in ("power", "power_log", "stretched"):
        raise ValueError(f"unknown model {form!r}")
    if r.size < 8 or r.size != y.size:
        raise DecayFitError("need at least 8 samples")
    if np.any(y <= 0) or np.any(r <= 0):
        raise DecayFitError("samples must be positive")
    if math.log10(r.max() / r.min()) < 3 - 1e-9:
        raise DecayFitError("samples must span at least 3 decades")
    if form != "power" and r.min() <= 1.0:
        raise DecayFitError("log forms need r > 1")
    lr = np.log(r)
    ly = np.log(y)
    cols = [np.ones_like(lr), -lr]
    if form != "power":
        cols.append(-np.log(lr))
    if form == "power":
        beta, se, rss, cond = _ols(np.column_stack(cols), ly)
        rate = RateFunction("power", float(beta[1]), valid_from=float(r.min()),
                            stderr={"a": float(se[1])})
    elif form == "power_log":
        beta, se, rss, cond = _ols(np.column_stack(cols), ly)
        rate = RateFunction("power_log", float(beta[1]), float(beta[2]), valid_from=float(r.min()),
                            stderr={"a": float(se[1]), "b": float(se[2])})
    else:
        best = None
        for dl in delta_grid:
            X = np.column_stack(cols + [lr ** (1 - dl) / (1 - dl)])
            try:
                fit = _ols(X, ly)
            except DecayFitError:
                continue
            if best is None or fit[2] < best[1][2]:
                best = (dl, fit)
        if best is None:
            raise DecayFitError("ill-conditioned design for every delta")
        dl, (beta, se, rss, cond) = best
        rate = RateFunction("stretched", float(beta[1]), float(beta[2]), float(beta[3]),
                            float(dl), valid_from=float(r.min()),
                            stderr={"a": float(se[1]), "b": float(se[2]), "c": float(se[3])})
    n = r.size
    return DecayFit(rate, rss, math.sqrt(rss / n), n, cond)


# -- envelope checking ------------------------------------------------------


def _bands(log_ratio: np.ndarray) -> tuple[float, float]:
    """(growth, decay): max over i >= j of ratio_i/ratio_j and ratio_j/ratio_i."""
    run_min = np.minimum.accumulate(log_ratio)
    run_max = np.maximum.accumulate(log_ratio)
    return float(np.exp(np.max(log_ratio - run_min))), float(np.exp(np.max(run_max - log_ratio)))


def _profile(rate: RateFunction, lr: np.ndarray, ly: np.ndarray, side: str, n_grid: int):
    free = rate.free_params()
    grids = [fp.grid(n_grid) for fp in free]
    best = None
    for combo in product(*grids) if free else [()]:
        vals = {fp.name: th for fp, th in zip(free, combo)}
        bound = rate.bind(vals) if free else rate
        log_ratio = ly - bound.log_value(np.exp(lr))
        grow, decay = _bands(log_ratio)
        band = grow if side == "upper" else decay
        if best is None or band < best[0]:
            best = (band, vals, log_ratio)
    return best


def check_envelope(r, values, prediction: EnvelopePrediction, band: float = 50.0,
                   n_grid: int = 201) -> dict:
    """Compare samples with the predicted envelopes.

    The upper envelope passes when value/upper never grows by more than
    ``band`` as r increases (an unknown constant absorbs any fixed level);
    the lower envelope likewise must not shrink by more than ``band``.
    Free exponents are profiled over their allowed intervals.
    """
    r = np.asarray(r, dtype=float)
    y = np.abs(np.asarray(values, dtype=float))
    valid = max((e.valid_from for e in (prediction.lower, prediction.upper) if e), default=0.0)
    keep = (r >= valid) & (y > 0)
    if not keep.any():
        raise ValueError("no samples inside the envelope's valid range")
    lr, ly = np.log(r[keep]), np.log(y[keep])
    out: dict = {"n": int(keep.sum()), "band_factor": band}
    ok = True
    for side in ("lower", "upper"):
        rate = getattr(prediction, side)
        if rate is None:
            out[side] = None
            continue
        b, vals, log_ratio = _profile(rate, lr, ly, side, n_grid)
        passed = b <= band
        ok = ok and passed
        out[side] = {
            "band": b,
            "ratio_min": float(np.exp(log_ratio.min())),
            "ratio_max": float(np.exp(log_ratio.max())),
            "free": {k: float(v) for k, v in vals.items()},
            "pass": bool(passed),
        }
    out["pass"] = bool(ok)
    return out
