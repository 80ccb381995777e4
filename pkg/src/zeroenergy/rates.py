"""Asymptotic decay forms r^-a (log r)^-b, optionally with a stretched log factor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

__all__ = ["FreeParam", "RateFunction", "power", "power_log", "stretched"]


@dataclass(frozen=True)
class FreeParam:
    """An unresolved constant theta known only to lie in [lo, hi].

    The rate parameter it stands for is ``offset + scale * theta``, so an
    exponent such as d - gamma can be carried with gamma as the free symbol.
    """

    name: str
    lo: float
    hi: float
    offset: float = 0.0
    scale: float = 1.0

    def grid(self, n: int = 201) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def resolve(self, theta: float) -> float:
        return self.offset + self.scale * float(theta)

    def label(self) -> str:
        if self.offset == 0.0 and self.scale == 1.0:
            return self.name
        sign = "+" if self.scale > 0 else "-"
        k = abs(self.scale)
        term = self.name if k == 1.0 else f"{k:g}*{self.name}"
        return f"({self.offset:g}{sign}{term})"


Number = Union[float, FreeParam]

FORMS = ("power", "power_log", "stretched")


@dataclass(frozen=True)
class RateFunction:
    """``exp(c/(1-delta) (log r)^(1-delta)) r^-a (log r)^-b``.

    ``power`` uses only ``a``; ``power_log`` uses ``a`` and ``b``;
    ``stretched`` uses all four.  Parameters may be FreeParam placeholders
    until bound with :meth:`bind`.
    """

    form: str
    a: Number
    b: Number = 0.0
    c: Number = 0.0
    delta: float = 0.5
    valid_from: float = 1.0
    stderr: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown rate form {self.form!r}")
        if self.form == "stretched" and not 0.0 < self.delta < 1.0:
            raise ValueError("stretched form needs delta in (0, 1)")

    def free_params(self) -> list[FreeParam]:
        return [v for v in (self.a, self.b, self.c) if isinstance(v, FreeParam)]

    def bind(self, values: dict) -> "RateFunction":
        kw = {}
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if isinstance(v, FreeParam):
                kw[name] = v.resolve(values[v.name])
        return replace(self, **kw)

    def log_value(self, r) -> np.ndarray:
        if self.free_params():
            raise ValueError("bind free parameters before evaluating")
        r = np.asarray(r, dtype=float)
        lr = np.log(r)
        out = -self.a * lr
        if self.form in ("power_log", "stretched") and self.b != 0.0:
            out = out - self.b * np.log(lr)
        if self.form == "stretched" and self.c != 0.0:
            out = out + self.c / (1.0 - self.delta) * lr ** (1.0 - self.delta)
        return out

    def __call__(self, r) -> np.ndarray:
        return np.exp(self.log_value(r))

    def describe(self) -> str:
        def fmt(v):
            return v.label() if isinstance(v, FreeParam) else f"{v:.6g}"

        if self.form == "power":
            return f"r^-{fmt(self.a)}"
        if self.form == "power_log":
            return f"r^-{fmt(self.a)} (log r)^-{fmt(self.b)}"
        return (f"exp({fmt(self.c)}/(1-{self.delta:g}) (log r)^(1-{self.delta:g}))"
                f" r^-{fmt(self.a)} (log r)^-{fmt(self.b)}")

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, FreeParam):
                return {"free": v.name, "lo": float(v.lo), "hi": float(v.hi),
                        "offset": float(v.offset), "scale": float(v.scale)}
            return float(v)

        out = {"form": self.form, "a": enc(self.a)}
        if self.form != "power":
            out["b"] = enc(self.b)
        if self.form == "stretched":
            out["c"] = enc(self.c)
            out["delta"] = self.delta
        out["valid_from"] = self.valid_from
        if self.stderr:
            out["stderr"] = dict(self.stderr)
        return out


def power(a: Number, valid_from: float = 1.0) -> RateFunction:
    return RateFunction("power", a, valid_from=valid_from)


def power_log(a: Number, b: Number, valid_from: float = math.e) -> RateFunction:
    return RateFunction("power_log", a, b, valid_from=valid_from)


def stretched(a: Number, b: Number, c: Number, delta: float,
              valid_from: float = math.e) -> RateFunction:
    return RateFunction("stretched", a, b, c, delta, valid_from=valid_from)
