"""Radial potential families used by the simulator and the decay predictions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigenpair import EigenpairSpec, decay_class, potential_radial, sign_at_infinity

__all__ = ["PotentialModel", "PotentialTable"]

FAMILIES = ("hypergeometric", "power", "power_log", "constant")


@dataclass(frozen=True)
class PotentialTable:
    """V sampled uniformly in log r, with power-law extrapolation past the end."""

    log_r0: float
    dlog: float
    values: np.ndarray
    tail_slope: float  # d log|V| / d log r at the right end

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        t = (np.log(np.maximum(r, 1e-300)) - self.log_r0) / self.dlog
        n = self.values.size
        i = np.clip(np.floor(t).astype(int), 0, n - 2)
        frac = np.clip(t - i, 0.0, None)
        inside = self.values[i] + (self.values[i + 1] - self.values[i]) * np.minimum(frac, 1.0)
        lr_end = self.log_r0 + (n - 1) * self.dlog
        beyond = self.values[-1] * np.exp(self.tail_slope * (np.log(np.maximum(r, 1e-300)) - lr_end))
        return np.where(t < 0, self.values[0], np.where(t > n - 1, beyond, inside))


@dataclass(frozen=True)
class PotentialModel:
    """A radial potential V(|x|).

    * ``hypergeometric``: the explicit potential of an EigenpairSpec
    * ``power``: V = r^-beta for r >= r0, held at r0^-beta inside
    * ``power_log``: V = r^-a (log r)^delta for r >= r0, held constant inside
    * ``constant``: V = lam everywhere
    """

    family: str
    spec: EigenpairSpec | None = None
    beta: float = 0.0
    delta: float = 0.0
    r0: float = 1.0
    lam: float = 0.0
    _table: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.family == "hypergeometric" and self.spec is None:
            raise ValueError("hypergeometric family needs an EigenpairSpec")
        if self.family in ("power", "power_log") and self.r0 < 1.0:
            raise ValueError("r0 must be >= 1")
        if self.family == "power_log" and self.r0 <= 1.0:
            # log r must be positive on the tail
            object.__setattr__(self, "r0", math.e)

    @classmethod
    def hypergeometric(cls, spec: EigenpairSpec) -> "PotentialModel":
        return cls("hypergeometric", spec=spec)

    @classmethod
    def power(cls, beta: float, r0: float = 1.0) -> "PotentialModel":
        return cls("power", beta=beta, r0=r0)

    @classmethod
    def power_log(cls, a: float, delta: float, r0: float = math.e) -> "PotentialModel":
        return cls("power_log", beta=a, delta=delta, r0=r0)

    @classmethod
    def constant(cls, lam: float) -> "PotentialModel":
        return cls("constant", lam=lam)

    # -- evaluation ---------------------------------------------------------

    def _tail(self, r):
        if self.family == "power":
            return r ** -self.beta
        return r ** -self.beta * np.log(r) ** self.delta

    def value(self, r):
        """V at radius r (scalar or array)."""
        r = np.abs(np.asarray(r, dtype=float))
        if self.family == "constant":
            out = np.full(r.shape, float(self.lam))
        elif self.family == "hypergeometric":
            out = np.asarray(potential_radial(self.spec, r))
        else:
            out = self._tail(np.maximum(r, self.r0))
        return out[()] if np.ndim(out) == 0 else out

    __call__ = value

    def table(self, r_min: float = 1e-3, r_max: float = 1e7, n: int = 8000) -> PotentialTable:
        """Log-r interpolation table used inside compiled path kernels."""
        key = (r_min, r_max, n)
        if key not in self._table:
            lr = np.linspace(math.log(r_min), math.log(r_max), n)
            vals = np.asarray(self.value(np.exp(lr)), dtype=float)
            a, b = abs(vals[-2]), abs(vals[-1])
            slope = (math.log(b) - math.log(a)) / (lr[-1] - lr[-2]) if a > 0 and b > 0 else 0.0
            self._table[key] = PotentialTable(float(lr[0]), float(lr[1] - lr[0]), vals, slope)
        return self._table[key]

    # -- envelopes ----------------------------------------------------------

    def sup_outside(self, rho: float) -> float:
        """V^*: sup of V over |y| >= rho."""
        if self.family == "constant":
            return float(self.lam)
        if self.family == "power":
            return float(max(rho, self.r0) ** -self.beta)
        if self.family == "power_log":
            # g(t) = -a t + delta log t peaks at t = delta / a
            t = math.log(max(rho, self.r0))
            if self.delta > 0 and self.beta > 0:
                t = max(t, self.delta / self.beta)
            return float(math.exp(-self.beta * t) * t**self.delta)
        # hypergeometric: tails are monotone beyond the sampled window
        r = np.geomspace(max(rho, 1e-12), max(rho, 1e-12) * 1e8, 4001)
        return float(np.max(self.value(r)))

    def inf_between(self, r_lo: float, r_hi: float) -> float:
        """V_*: inf of V over r_lo <= |y| <= r_hi."""
        if self.family == "constant":
            return float(self.lam)
        if self.family in ("power", "power_log"):
            # both families are unimodal in log r, so the inf sits at an end
            return float(min(self.value(r_lo), self.value(r_hi)))
        r = np.geomspace(max(r_lo, 1e-12), r_hi, 2001)
        return float(np.min(self.value(r)))

    # -- asymptotic data ----------------------------------------------------

    def tail_exponents(self) -> tuple[float, float]:
        """(a, delta) with V ~ r^-a (log r)^delta at infinity."""
        if self.family == "constant":
            return 0.0, 0.0
        if self.family == "power":
            return float(self.beta), 0.0
        if self.family == "power_log":
            return float(self.beta), float(self.delta)
        rate = decay_class(self.spec).rate
        return float(rate.a), float(-rate.b) if rate.form == "power_log" else 0.0

    def sign_at_infinity(self) -> str:
        if self.family == "hypergeometric":
            return sign_at_infinity(self.spec)
        if self.family == "constant":
            return "positive" if self.lam > 0 else ("negative" if self.lam < 0 else "zero")
        return "positive"

    def to_dict(self) -> dict:
        out = {"family": self.family}
        if self.family == "hypergeometric":
            out["spec"] = self.spec.to_dict()
        elif self.family == "power":
            out.update(beta=self.beta, r0=self.r0)
        elif self.family == "power_log":
            out.update(a=self.beta, delta=self.delta, r0=self.r0)
        else:
            out["lam"] = self.lam
        return out
