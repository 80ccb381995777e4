"""Explicit zero-energy pairs (V, phi) for the fractional Laplacian.

For a harmonic polynomial P of degree l in {0, 1} and mu = d + 2l,

    phi(x) = P(x) / (1 + |x|^2)^kappa
    V(x)   = -(2^alpha / Gamma(kappa)) Gamma((mu+alpha)/2) Gamma(alpha/2 + kappa)
             (1 + |x|^2)^kappa  F((mu+alpha)/2, alpha/2 + kappa; mu/2; -|x|^2)

with F the regularized Gauss function, satisfy (-Delta)^(alpha/2) phi + V phi = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rates import RateFunction, power, power_log
from .specfun import hyp2f1_reg, ln_gamma

__all__ = [
    "EigenpairSpec",
    "DecayClass",
    "OutOfRangeError",
    "eigenfunction_value",
    "potential_value",
    "potential_radial",
    "decay_class",
    "sign_at_infinity",
    "lp_membership",
]

# kappa values closer than this to a table breakpoint are treated as equal
KAPPA_TOL = 1e-9


class OutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class EigenpairSpec:
    d: int
    alpha: float
    l: int = 0
    kappa: float = 1.0
    axis: int = 1

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.l not in (0, 1):
            raise ValueError("only l in {0, 1} is supported")
        if not 1 <= self.axis <= self.d:
            raise ValueError(f"axis must lie in [1, {self.d}]")
        if not self.kappa > self.l:
            raise ValueError(f"kappa must exceed l={self.l}, got {self.kappa}")

    @property
    def mu(self) -> int:
        return self.d + 2 * self.l

    @property
    def kappa_max(self) -> float:
        return (self.mu + self.alpha) / 2

    def hyp_params(self) -> tuple[float, float, float]:
        return (self.mu + self.alpha) / 2, self.alpha / 2 + self.kappa, self.mu / 2

    def to_dict(self) -> dict:
        return {"d": self.d, "alpha": self.alpha, "l": self.l,
                "kappa": self.kappa, "axis": self.axis}


@dataclass(frozen=True)
class DecayClass:
    rate: RateFunction
    sign_at_infinity: str
    l2_member: bool
    degenerate_log_case: bool
    row: int

    def to_dict(self) -> dict:
        return {"row": self.row, "rate": self.rate.to_dict(),
                "sign_at_infinity": self.sign_at_infinity,
                "l2_member": self.l2_member,
                "degenerate_log_case": self.degenerate_log_case}


def _points(spec: EigenpairSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if spec.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != spec.d:
        raise ValueError(f"points must have trailing dimension {spec.d}")
    return x


def eigenfunction_value(spec: EigenpairSpec, x):
    """phi_kappa at x; x is a point or an array of points (..., d)."""
    x = _points(spec, x)
    r2 = np.sum(x * x, axis=-1)
    base = (1.0 + r2) ** (-spec.kappa)
    if spec.l == 1:
        base = x[..., spec.axis - 1] * base
    return base[()] if base.ndim == 0 else base


def _log_prefactor(spec: EigenpairSpec) -> tuple[float, int]:
    a, b, _ = spec.hyp_params()
    lg1, s1 = ln_gamma(a)
    lg2, s2 = ln_gamma(b)
    lg3, s3 = ln_gamma(spec.kappa)
    return spec.alpha * math.log(2.0) + lg1 + lg2 - lg3, -s1 * s2 * s3


def potential_radial(spec: EigenpairSpec, r, **hyp_kw):
    """V as a function of the radius |x| (scalar or array)."""
    a, b, c = spec.hyp_params()
    logk, sign = _log_prefactor(spec)
    r = np.asarray(r, dtype=float)
    flat = np.abs(r).ravel()
    out = np.empty_like(flat)
    for i, ri in enumerate(flat):
        r2 = ri * ri
        f = hyp2f1_reg(a, b, c, -r2, **hyp_kw)
        out[i] = sign * math.exp(logk + spec.kappa * math.log1p(r2)) * f
    out = out.reshape(r.shape)
    return out[()] if out.ndim == 0 else out


def potential_value(spec: EigenpairSpec, x, **hyp_kw):
    """V_{kappa,alpha} at x (point or array of points)."""
    x = _points(spec, x)
    return potential_radial(spec, np.sqrt(np.sum(x * x, axis=-1)), **hyp_kw)


def sign_at_infinity(spec: EigenpairSpec) -> str:
    if spec.kappa <= (spec.mu - spec.alpha) / 2 + KAPPA_TOL:
        return "negative"
    if spec.kappa < spec.kappa_max:
        return "positive"
    raise OutOfRangeError("sign at infinity is only classified for kappa < (mu+alpha)/2")


def decay_class(spec: EigenpairSpec) -> DecayClass:
    """Row of the decay table for |V| together with sign and L^2 data."""
    mu, al, k = spec.mu, spec.alpha, spec.kappa
    if not spec.l < k < spec.kappa_max:
        raise OutOfRangeError(
            f"kappa={k} outside ({spec.l}, {spec.kappa_max}) for d={spec.d}, "
            f"alpha={al}, l={spec.l}")
    degenerate = abs(k - mu / 2) <= KAPPA_TOL
    if abs(k - (mu - al) / 2) <= KAPPA_TOL:
        row, rate = 2, power(2 * al)
    elif degenerate:
        # |V| ~ r^-alpha log r, i.e. (log r)^-b with b = -1
        row, rate = 3, power_log(al, -1.0)
    elif k < mu / 2:
        row, rate = 1, power(al)
    else:
        row, rate = 4, power(mu + al - 2 * k)
    return DecayClass(rate=rate, sign_at_infinity=sign_at_infinity(spec),
                      l2_member=lp_membership(spec, 2.0),
                      degenerate_log_case=degenerate, row=row)


def lp_membership(spec: EigenpairSpec, p: float) -> bool:
    """phi in L^p iff |phi|^p ~ r^{-p(2 kappa - l)} is integrable at infinity."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return p * (2 * spec.kappa - spec.l) > spec.d
