"""Monte-Carlo simulation of isotropic stable and layered stable Levy processes.

Paths are advanced on a time grid by exact increment samplers (isotropic
case) or a jump-diffusion approximation (layered case).  Each path owns a
Philox stream keyed by (seed, path index), so results do not depend on how
paths are split across worker threads.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import integrate, special, stats

from .fraclap import sphere_area, stable_constant
from .potentials import PotentialModel
from .rng import exponential, new_stream, normal, reset_stream, uniform

__all__ = [
    "ProcessSpec",
    "PathConfig",
    "MCEstimate",
    "ExitSample",
    "CensoringError",
    "symbol_psi",
    "maximal_symbol",
    "pruitt_h",
    "bias_order",
    "sample_increments",
    "exit_time",
    "mean_exit_time",
    "extrapolated_exit_time",
    "survival_prob",
    "fk_functional",
    "lifetime_lambda",
    "exit_law_check",
    "getoor_mean_exit",
    "exit_radius_cdf",
    "dump_paths",
]

ISO, LAYERED = 0, 1
BALL, COMPLEMENT = 0, 1


class CensoringError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProcessSpec:
    family: str  # "isotropic_stable" or "layered_stable"
    alpha: float
    d: int = 1
    gamma: float | None = None
    small_jump_cutoff: float = 1e-3

    def __post_init__(self):
        if self.family not in ("isotropic_stable", "layered_stable"):
            raise ValueError(f"unknown process family {self.family!r}")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError("alpha must lie in (0, 2)")
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.family == "layered_stable":
            if self.gamma is None or not self.gamma > 2.0:
                raise ValueError("layered process needs gamma > 2")
            if not 0.0 < self.small_jump_cutoff < 1.0:
                raise ValueError("small_jump_cutoff must lie in (0, 1)")

    @classmethod
    def isotropic(cls, alpha: float, d: int = 1) -> "ProcessSpec":
        return cls("isotropic_stable", alpha, d)

    @classmethod
    def layered(cls, alpha: float, gamma: float, d: int = 1, cutoff: float = 1e-3) -> "ProcessSpec":
        return cls("layered_stable", alpha, d, gamma, cutoff)

    @property
    def code(self) -> int:
        return ISO if self.family == "isotropic_stable" else LAYERED

    def jump_density(self, r):
        """Radial profile of nu: C(d, alpha) r^(-d-alpha) (1 v r)^-(gamma-alpha)."""
        r = np.asarray(r, dtype=float)
        c = stable_constant(self.d, self.alpha)
        out = c * r ** (-self.d - self.alpha)
        if self.family == "layered_stable":
            out = out * np.maximum(1.0, r) ** -(self.gamma - self.alpha)
        return out

    def to_dict(self) -> dict:
        out = {"family": self.family, "alpha": self.alpha, "d": self.d}
        if self.family == "layered_stable":
            out.update(gamma=self.gamma, small_jump_cutoff=self.small_jump_cutoff)
        return out


@dataclass(frozen=True)
class PathConfig:
    dt: float = 1e-3
    horizon: float = 100.0
    seed: int = 0
    n_paths: int = 10_000
    workers: int = 1
    rho: float = 0.0  # > 0 enables distance-adaptive steps (see _step_size)
    kill_log_weight: float = 50.0
    censor_threshold: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.dt <= self.horizon:
            raise ValueError("need 0 < dt <= horizon")
        if self.n_paths < 1 or self.workers < 1:
            raise ValueError("n_paths and workers must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n: int
    seed: int
    censored: int = 0
    killed: int = 0
    reliable: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "n": self.n,
                "seed": self.seed, "censored": self.censored, "killed": self.killed,
                "reliable": self.reliable, **({"meta": self.meta} if self.meta else {})}


@dataclass
class ExitSample:
    tau: np.ndarray
    position: np.ndarray  # (n, d)
    log_weight: np.ndarray  # int_0^tau V(X_s) ds
    censored: np.ndarray
    killed: np.ndarray


# -- symbols ----------------------------------------------------------------


def maximal_symbol(proc: ProcessSpec, r):
    """Psi(r) = sup_{|xi| <= r} psi(xi).

    Isotropic: r^alpha exactly.  Layered: the surrogate r^2 on (0, 1] and
    r^alpha beyond (continuous at 1).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    if proc.family == "isotropic_stable":
        out = r**proc.alpha
    else:
        out = np.where(r <= 1.0, r * r, r**proc.alpha)
    return out[()] if out.ndim == 0 else out


def symbol_psi(proc: ProcessSpec, r):
    """psi on |xi| = r; radial and non-decreasing, so it coincides with Psi."""
    return maximal_symbol(proc, r)


def pruitt_h(proc: ProcessSpec, r: float) -> float:
    """H(r) = int (1 ^ |z|^2/r^2) nu(dz), by radial quadrature."""
    sig = sphere_area(proc.d)
    d = proc.d

    def shell(s):
        return float(proc.jump_density(s)) * s ** (d - 1) * sig

    brk = sorted({r, 1.0})
    inner = 0.0
    lo = 0.0
    for b in [p for p in brk if p <= r]:
        inner += integrate.quad(lambda s: shell(s) * s * s, lo, b, limit=200)[0]
        lo = b
    outer = 0.0
    lo = r
    for b in [p for p in brk if p > r] + [np.inf]:
        outer += integrate.quad(shell, lo, b, limit=200)[0]
        lo = b
    return inner / r**2 + outer


# -- compiled kernels -------------------------------------------------------


@njit(cache=True, nogil=True)
def _stable1(st, alpha):
    """Symmetric alpha-stable with E exp(i xi X) = exp(-|xi|^alpha) (CMS)."""
    v = math.pi * (uniform(st) - 0.5)
    if alpha == 1.0:
        return math.tan(v)
    w = exponential(st)
    return (math.sin(alpha * v) / math.cos(v) ** (1.0 / alpha)
            * (math.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha))


@njit(cache=True, nogil=True)
def _positive_stable(st, beta):
    """Positive beta-stable (0 < beta < 1) with E exp(-l S) = exp(-l^beta) (Kanter)."""
    u = math.pi * uniform(st)
    w = exponential(st)
    a = (math.sin(beta * u) ** (beta / (1.0 - beta)) * math.sin((1.0 - beta) * u)
         / math.sin(u) ** (1.0 / (1.0 - beta)))
    return (a / w) ** ((1.0 - beta) / beta)


@njit(cache=True, nogil=True)
def _direction(st, out):
    d = out.size
    if d == 1:
        out[0] = 1.0 if uniform(st) < 0.5 else -1.0
        return
    nrm = 0.0
    for k in range(d):
        g = normal(st)
        out[k] = g
        nrm += g * g
    nrm = math.sqrt(nrm)
    for k in range(d):
        out[k] /= nrm


@njit(cache=True, nogil=True)
def _poisson(st, lam):
    # inversion; large means use a rounded normal approximation
    if lam > 500.0:
        k = int(lam + math.sqrt(lam) * normal(st) + 0.5)
        return k if k > 0 else 0
    u = uniform(st)
    p = math.exp(-lam)
    c = p
    k = 0
    while u > c:
        k += 1
        p *= lam / k
        c += p
        if p == 0.0 and c < u:
            break
    return k


@njit(cache=True, nogil=True)
def _increment_general(st, code, alpha, lay, dt, scale, out, tmp):
    d = out.size
    if code == 0:
        if d == 1:
            out[0] = scale * _stable1(st, alpha)
        else:
            s = scale * scale * _positive_stable(st, alpha / 2.0)
            sc = math.sqrt(2.0 * s)
            for k in range(d):
                out[k] = sc * normal(st)
        return
    gvar, lam_s, lam_b, eps, gam = lay[0], lay[1], lay[2], lay[3], lay[4]
    sd = math.sqrt(gvar * dt)
    for k in range(d):
        out[k] = sd * normal(st)
    ea = eps ** (-alpha)
    n_s = _poisson(st, lam_s * dt)
    if n_s > 2000:
        # many small jumps: replace their sum by a matching Gaussian
        v = lay[5] * dt
        for k in range(d):
            out[k] += math.sqrt(v) * normal(st)
    else:
        for _ in range(n_s):
            r = (ea - uniform(st) * (ea - 1.0)) ** (-1.0 / alpha)
            _direction(st, tmp)
            for k in range(d):
                out[k] += r * tmp[k]
    n_b = _poisson(st, lam_b * dt)
    for _ in range(n_b):
        r = uniform(st) ** (-1.0 / gam)
        _direction(st, tmp)
        for k in range(d):
            out[k] += r * tmp[k]


@njit(cache=True, nogil=True, inline="always")
def _increment(st, code, alpha, lay, dt, scale, out, tmp):
    """Write one increment over time dt into ``out``.

    ``scale`` is dt^(1/alpha), passed in so fixed-step loops compute it once;
    ``lay`` = (gauss_var, lam_small, lam_big, eps, gamma, var_small) for the
    layered case.  The Cauchy case is kept inline since it dominates the
    long runs; everything else goes through an out-of-line call.
    """
    if code == 0 and alpha == 1.0 and out.size == 1:
        out[0] = scale * math.tan(math.pi * (uniform(st) - 0.5))
    else:
        _increment_general(st, code, alpha, lay, dt, scale, out, tmp)


@njit(cache=True, nogil=True, inline="always")
def _interp_v(r, lr0, dlog, vals, slope):
    n = vals.size
    if r <= 0.0:
        return vals[0]
    t = (math.log(r) - lr0) / dlog
    if t <= 0.0:
        return vals[0]
    if t >= n - 1:
        return vals[n - 1] * math.exp(slope * (t - (n - 1)) * dlog)
    i = int(t)
    f = t - i
    return vals[i] + (vals[i + 1] - vals[i]) * f


@njit(cache=True, nogil=True, inline="always")
def _inv_psi_inv(code, alpha, s):
    """1 / Psi(1/s)."""
    if code == 0:
        return s**alpha
    if s >= 1.0:
        return s * s
    return s**alpha


@njit(cache=True, nogil=True)
def _run(seed, first, n, code, alpha, lay, x0, center, radius, domain,
         dt, horizon, rho, use_v, lr0, dlog, vals, slope, kill,
         tau, pos, logw, cens, killed):
    d = x0.size
    x = np.empty(d)
    inc = np.empty(d)
    tmp = np.empty(d)
    st = new_stream(seed, first)
    h_prev = -1.0
    scale = 0.0
    r2 = radius * radius
    for i in range(n):
        reset_stream(st, seed, first + i)
        for k in range(d):
            x[k] = x0[k]
        t = 0.0
        lw = 0.0
        cens[i] = False
        killed[i] = False
        while True:
            h = dt
            if rho > 0.0:
                dist2 = 0.0
                for k in range(d):
                    dist2 += (x[k] - center[k]) ** 2
                dc = math.sqrt(dist2)
                gap = radius - dc if domain == 0 else dc - radius
                h = max(dt, _inv_psi_inv(code, alpha, rho * gap))
            if t + h > horizon:
                h = horizon - t
            if use_v:
                r0 = 0.0
                for k in range(d):
                    r0 += x[k] * x[k]
                lw += _interp_v(math.sqrt(r0), lr0, dlog, vals, slope) * h
                if lw > kill:
                    killed[i] = True
                    break
            if h != h_prev:
                scale = h ** (1.0 / alpha)
                h_prev = h
            _increment(st, code, alpha, lay, h, scale, inc, tmp)
            t += h
            dist2 = 0.0
            for k in range(d):
                x[k] += inc[k]
                dist2 += (x[k] - center[k]) ** 2
            if (dist2 >= r2) if domain == 0 else (dist2 <= r2):
                break
            if t >= horizon:
                cens[i] = True
                break
        tau[i] = t
        logw[i] = lw
        for k in range(d):
            pos[i, k] = x[k]


@njit(cache=True, nogil=True)
def _run_ball_1d(seed, first, n, code, alpha, lay, x0, center, radius, dt, horizon,
                 tau, pos, cens):
    """Fixed-step exit from an interval, no potential: the hot loop of the
    exit-time and exit-law estimators, kept minimal."""
    inc = np.empty(1)
    tmp = np.empty(1)
    st = new_stream(seed, first)
    scale = dt ** (1.0 / alpha)
    max_steps = int(math.ceil(horizon / dt - 1e-9))
    cauchy = code == 0 and alpha == 1.0
    for i in range(n):
        reset_stream(st, seed, first + i)
        y = x0 - center
        k = 0
        while True:
            if cauchy:
                y += scale * math.tan(math.pi * (uniform(st) - 0.5))
            else:
                _increment_general(st, code, alpha, lay, dt, scale, inc, tmp)
                y += inc[0]
            k += 1
            if abs(y) >= radius or k >= max_steps:
                break
        cens[i] = abs(y) < radius
        tau[i] = min(k * dt, horizon)
        pos[i, 0] = center + y


def _layered_params(proc: ProcessSpec) -> np.ndarray:
    if proc.family != "layered_stable":
        return np.zeros(6)
    a, g, d, eps = proc.alpha, proc.gamma, proc.d, proc.small_jump_cutoff
    cs = stable_constant(d, a) * sphere_area(d)
    gauss_var = cs * eps ** (2 - a) / (2 - a) / d
    lam_small = cs * (eps**-a - 1.0) / a
    lam_big = cs / g
    # per-coordinate variance rate of the jumps in (eps, 1]
    var_small = cs * (1.0 - eps ** (2 - a)) / (2 - a) / d
    return np.array([gauss_var, lam_small, lam_big, eps, g, var_small])


def _simulate(proc: ProcessSpec, cfg: PathConfig, x0, center, radius, domain,
              pot: PotentialModel | None = None, adaptive: bool = False) -> ExitSample:
    d = proc.d
    x0 = np.asarray(x0, dtype=float).reshape(d)
    center = np.asarray(center, dtype=float).reshape(d)
    n = cfg.n_paths
    tau = np.empty(n)
    pos = np.empty((n, d))
    logw = np.empty(n)
    cens = np.empty(n, dtype=np.bool_)
    killed = np.empty(n, dtype=np.bool_)
    if pot is not None:
        tab = pot.table()
        lr0, dlog, vals, slope = tab.log_r0, tab.dlog, np.ascontiguousarray(tab.values), tab.tail_slope
    else:
        lr0, dlog, vals, slope = 0.0, 1.0, np.zeros(2), 0.0
    lay = _layered_params(proc)
    rho = cfg.rho if adaptive else 0.0

    fast = d == 1 and pot is None and rho == 0.0 and domain == BALL

    def work(lo, hi):
        if fast:
            _run_ball_1d(np.uint64(cfg.seed), np.uint64(lo), hi - lo, proc.code,
                         float(proc.alpha), lay, float(x0[0]), float(center[0]), float(radius),
                         float(cfg.dt), float(cfg.horizon), tau[lo:hi], pos[lo:hi], cens[lo:hi])
            logw[lo:hi] = 0.0
            killed[lo:hi] = False
            return
        _run(np.uint64(cfg.seed), np.uint64(lo), hi - lo, proc.code, float(proc.alpha), lay,
             x0, center, float(radius), domain, float(cfg.dt), float(cfg.horizon), float(rho),
             pot is not None, lr0, dlog, vals, slope, float(cfg.kill_log_weight),
             tau[lo:hi], pos[lo:hi], logw[lo:hi], cens[lo:hi], killed[lo:hi])

    w = min(cfg.workers, n)
    bounds = np.linspace(0, n, w + 1).astype(int)
    if w == 1:
        work(0, n)
    else:
        with ThreadPoolExecutor(max_workers=w) as ex:
            list(ex.map(work, bounds[:-1], bounds[1:]))
    return ExitSample(tau, pos, logw, cens, killed)


def _estimate(values: np.ndarray, cfg: PathConfig, censored: int = 0, killed: int = 0,
              meta: dict | None = None) -> MCEstimate:
    n = values.size
    # np.sum uses pairwise summation over the full array: independent of workers
    mean = float(np.sum(values) / n)
    var = float(np.sum((values - mean) ** 2) / max(n - 1, 1))
    reliable = censored <= cfg.censor_threshold * n
    return MCEstimate(mean, math.sqrt(var / n), n, cfg.seed, int(censored), int(killed),
                      reliable, meta or {})


# -- public operations ------------------------------------------------------


def sample_increments(proc: ProcessSpec, dt: float, n: int, seed: int = 0) -> np.ndarray:
    """n independent increments over time dt, shape (n, d)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return _sample_incs(np.uint64(seed), n, proc.code, float(proc.alpha),
                        _layered_params(proc), float(dt), proc.d)


@njit(cache=True, nogil=True)
def _sample_incs(seed, n, code, alpha, lay, dt, d):
    out = np.empty((n, d))
    inc = np.empty(d)
    tmp = np.empty(d)
    for i in range(n):
        st = new_stream(seed, np.uint64(i))
        _increment(st, code, alpha, lay, dt, dt ** (1.0 / alpha), inc, tmp)
        for k in range(d):
            out[i, k] = inc[k]
    return out


def exit_time(proc: ProcessSpec, ball: tuple, cfg: PathConfig, start=None) -> ExitSample:
    """Exit times and positions from ``ball = (center, radius)`` for cfg.n_paths paths.

    Exit is detected at grid times only, so tau is biased upward by O(dt)
    effects; positions are taken at the detection time.
    """
    center, radius = ball
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.size != proc.d:
        raise ValueError("ball center has the wrong dimension")
    x0 = center if start is None else np.atleast_1d(np.asarray(start, dtype=float))
    if np.linalg.norm(x0 - center) >= radius:
        raise ValueError("start point must lie inside the ball")
    return _simulate(proc, cfg, x0, center, radius, BALL)


def mean_exit_time(proc: ProcessSpec, r: float, cfg: PathConfig,
                   sample: ExitSample | None = None) -> MCEstimate:
    """E^0 tau_{B(0,r)}; ``sample`` reuses an exit sample simulated with cfg."""
    s = exit_time(proc, (np.zeros(proc.d), r), cfg) if sample is None else sample
    nc = int(s.censored.sum())
    return _estimate(s.tau, cfg, censored=nc, meta={"dt": cfg.dt, "bias": "O(dt) grid detection"})


def bias_order(proc: ProcessSpec) -> float:
    """Order q of the grid-monitoring bias c dt^q of the mean exit time.

    Overshoot between grid times scales like the typical step dt^(1/alpha);
    the Brownian component of the layered process gives the familiar 1/2.
    """
    if proc.family == "layered_stable":
        return 0.5
    return min(1.0, 1.0 / proc.alpha)


def extrapolated_exit_time(proc: ProcessSpec, r: float, cfg: PathConfig,
                           dts=(1e-2, 1e-3), sample: ExitSample | None = None,
                           order: float | None = None) -> dict:
    """Mean exit time at cfg.dt plus a dt-extrapolated continuum value.

    m(dt) = m0 + c dt^q is fitted by weighted least squares over all step
    sizes with q = bias_order(proc) unless given.  The extrapolation error
    is the size of the correction applied to the finest estimate; the
    freely fitted three-point order is reported as a diagnostic.
    """
    steps = sorted(set(dts) | {cfg.dt}, reverse=True)
    if len(steps) < 2:
        raise ValueError("need at least two step sizes")
    ests = [mean_exit_time(proc, r, PathConfig(**{**cfg.__dict__, "dt": h}),
                           sample if h == cfg.dt else None) for h in steps]
    m = np.array([e.mean for e in ests])
    se = np.array([max(e.std_error, 1e-300) for e in ests])
    h = np.array(steps)
    q = bias_order(proc) if order is None else float(order)
    X = np.column_stack([np.ones_like(h), h**q]) / se[:, None]
    coef, *_ = np.linalg.lstsq(X, m / se, rcond=None)
    cov = np.linalg.inv(X.T @ X)
    limit, c = float(coef[0]), float(coef[1])
    fine = ests[-1]
    free_q = float("nan")
    if len(steps) >= 3:
        num, den = m[-3] - m[-2], m[-2] - m[-1]
        if den != 0 and num / den > 0:
            free_q = math.log(num / den) / math.log(h[-3] / h[-2])
    correction = abs(fine.mean - limit)
    return {
        "fine": fine,
        "extrapolated": limit,
        "limit_std_error": math.sqrt(cov[0, 0]),
        "extrapolation_error": correction,
        "order": q,
        "slope": c,
        "fitted_order": free_q,
        "combined_error": math.hypot(math.sqrt(cov[0, 0]), correction),
        "by_dt": {float(a): e.mean for a, e in zip(steps, ests)},
    }


def survival_prob(proc: ProcessSpec, r: float, eta: float, cfg: PathConfig) -> MCEstimate:
    """P^0(tau_{B(0,r)} <= eta)."""
    if r <= 0 or eta <= 0:
        raise ValueError("r and eta must be positive")
    c = PathConfig(**{**cfg.__dict__, "horizon": eta, "dt": min(cfg.dt, eta)})
    s = exit_time(proc, (np.zeros(proc.d), r), c)
    hit = (~s.censored).astype(float)
    return _estimate(hit, c)


def _domain(domain):
    kind, center, radius = domain
    if kind not in ("ball", "complement"):
        raise ValueError("domain kind must be 'ball' or 'complement'")
    return (BALL if kind == "ball" else COMPLEMENT), center, radius


def fk_functional(proc: ProcessSpec, pot: PotentialModel, domain: tuple, x, g,
                  cfg: PathConfig) -> MCEstimate:
    """E^x[exp(-int_0^tau V(X_s) ds) g(X_tau)] on a ball or a ball complement.

    ``domain`` is ("ball" | "complement", center, radius); the complement is
    that of the closed ball.  ``g`` maps an (n, d) array of exit positions
    to n values.  Paths whose accumulated potential exceeds
    cfg.kill_log_weight contribute zero; paths reaching the horizon count
    as censored and the estimate is flagged unreliable above
    cfg.censor_threshold.
    """
    code, center, radius = _domain(domain)
    center = np.atleast_1d(np.asarray(center, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dist = np.linalg.norm(x - center)
    if (code == BALL and dist >= radius) or (code == COMPLEMENT and dist <= radius):
        raise ValueError("start point must lie in the domain")
    s = _simulate(proc, cfg, x, center, radius, code, pot, adaptive=cfg.rho > 0)
    ok = ~(s.censored | s.killed)
    vals = np.zeros(cfg.n_paths)
    if ok.any():
        gv = np.asarray(g(s.position[ok]), dtype=float).reshape(-1)
        vals[ok] = np.exp(-s.log_weight[ok]) * gv
    nc = int(s.censored.sum())
    return _estimate(vals, cfg, censored=nc, killed=int(s.killed.sum()))


def lifetime_lambda(proc: ProcessSpec, pot: PotentialModel, x, cfg: PathConfig) -> MCEstimate:
    """Lambda(x) = E^x int_0^tau e^{-V^*(x) t} dt for the ball B(x, |x|/2).

    V^*(x) = sup_{|y| >= |x|/2} V(y) comes from the potential family.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rx = float(np.linalg.norm(x))
    if pot.family in ("power", "power_log") and rx < 2 * pot.r0:
        raise ValueError("need |x| >= 2 r0")
    vstar = pot.sup_outside(rx / 2)
    s = _simulate(proc, cfg, x, x, rx / 2, BALL, None, adaptive=cfg.rho > 0)
    t = s.tau
    vals = t if vstar == 0 else -np.expm1(-vstar * t) / vstar
    return _estimate(vals, cfg, censored=int(s.censored.sum()),
                     meta={"v_star": vstar, "psi_inv_x": float(maximal_symbol(proc, 1.0 / rx))})


def getoor_mean_exit(d: int, alpha: float, r: float) -> float:
    """E^0 tau_{B(0,r)} for the isotropic alpha-stable process."""
    return (r**alpha * math.gamma(d / 2)
            / (2**alpha * math.gamma(1 + alpha / 2) * math.gamma((d + alpha) / 2)))


def exit_radius_cdf(alpha: float, r: float, y):
    """P(|X_tau| <= y) for the exit position from B(0, r) started at 0.

    The exit density c (|y|^2 - r^2)^(-alpha/2) r^alpha |y|^-d integrates in
    the radial variable to a regularized incomplete beta function (the
    dimension drops out).
    """
    y = np.asarray(y, dtype=float)
    u = np.clip(1.0 - (r / np.maximum(y, r)) ** 2, 0.0, 1.0)
    return special.betainc(1.0 - alpha / 2, alpha / 2, u)


def exit_law_check(proc: ProcessSpec, r: float, cfg: PathConfig, level: float = 0.01,
                   sample: ExitSample | None = None) -> dict:
    """KS test of simulated |X_tau| against the closed-form exit law."""
    if proc.family != "isotropic_stable":
        raise ValueError("exit law oracle is only available for isotropic stable processes")
    s = exit_time(proc, (np.zeros(proc.d), r), cfg) if sample is None else sample
    keep = ~s.censored
    radii = np.linalg.norm(s.position[keep], axis=1)
    res = stats.kstest(radii, lambda y: exit_radius_cdf(proc.alpha, r, y))
    n = radii.size
    crit = stats.kstwo.ppf(1.0 - level, n)
    out = {
        "n": int(n),
        "censored": int((~keep).sum()),
        "ks_statistic": float(res.statistic),
        "p_value": float(res.pvalue),
        "critical_value": float(crit),
        "pass": bool(res.statistic < crit),
        "all_outside": bool(np.all(radii >= r)),
    }
    if proc.d >= 2:
        ang = np.arctan2(s.position[keep, 1], s.position[keep, 0])
        out["angle_ks_pvalue"] = float(stats.kstest((ang + np.pi) / (2 * np.pi), "uniform").pvalue)
    return out


@njit(cache=True, nogil=True)
def _trajectories(seed, n, steps, code, alpha, lay, dt, x0):
    d = x0.size
    out = np.empty((n, steps + 1, d))
    inc = np.empty(d)
    tmp = np.empty(d)
    for i in range(n):
        st = new_stream(seed, np.uint64(i))
        for k in range(d):
            out[i, 0, k] = x0[k]
        for j in range(steps):
            _increment(st, code, alpha, lay, dt, dt ** (1.0 / alpha), inc, tmp)
            for k in range(d):
                out[i, j + 1, k] = out[i, j, k] + inc[k]
    return out


def dump_paths(proc: ProcessSpec, cfg: PathConfig, path, x0=None, n_paths: int = 1,
               steps: int = 1000) -> None:
    """Write debugging trajectories as CSV rows (path, t, x_1..x_d)."""
    x0 = np.zeros(proc.d) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    tr = _trajectories(np.uint64(cfg.seed), n_paths, steps, proc.code, float(proc.alpha),
                       _layered_params(proc), float(cfg.dt), x0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "t"] + [f"x_{k + 1}" for k in range(proc.d)])
        for i in range(n_paths):
            for j in range(steps + 1):
                w.writerow([i, repr(j * cfg.dt)] + [repr(float(v)) for v in tr[i, j]])
