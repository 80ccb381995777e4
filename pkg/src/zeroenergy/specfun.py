"""Log-Gamma and the regularized Gauss hypergeometric function on z <= 0.

The hypergeometric routine maps z in (-inf, 0] to w = z/(z-1) in [0, 1)
with a Pfaff transformation, sums the Maclaurin series for w <= 1/2 and
uses the w -> 1 connection formulas otherwise.  When c - a - b is (close
to) an integer the connection formula degenerates and the logarithmic
(digamma) form is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import psi

__all__ = [
    "HypParams",
    "PoleError",
    "HypergeometricConvergenceError",
    "ln_gamma",
    "rgamma",
    "hyp2f1_reg",
]

DEFAULT_RTOL = 1e-10
DEFAULT_MAX_TERMS = 10_000
LOG_CASE_THRESHOLD = 1e-6


class PoleError(ValueError):
    """Gamma evaluated at a non-positive integer."""


class HypergeometricConvergenceError(ArithmeticError):
    """A hypergeometric series did not reach tolerance within the term cap."""


@dataclass(frozen=True)
class HypParams:
    a: float
    b: float
    c: float
    z: float

    def __post_init__(self):
        if not self.z <= 0.0:
            raise ValueError(f"z must be <= 0, got {self.z}")


def _is_nonpos_int(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def ln_gamma(x: float) -> tuple[float, int]:
    """Return ``(log|Gamma(x)|, sign(Gamma(x)))``.

    Raises PoleError at x = 0, -1, -2, ...
    """
    x = float(x)
    if _is_nonpos_int(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x > 0.0:
        return math.lgamma(x), 1
    # Gamma(x) < 0 on (-1, 0), (-3, -2), ...
    sign = 1 if math.floor(x) % 2 == 0 else -1
    return math.lgamma(x), sign


def rgamma(x: float) -> float:
    """Reciprocal Gamma, 1/Gamma(x); zero at the poles."""
    if _is_nonpos_int(x):
        return 0.0
    lg, s = ln_gamma(x)
    return s * math.exp(-lg)


def _poch(a: float, n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


def _nonpos_int_order(x: float) -> int | None:
    """Return m if x == -m for an integer m >= 0, else None."""
    if _is_nonpos_int(x):
        return int(-x)
    return None


def _series(a, b, c, w, rtol, max_terms):
    """Regularized Maclaurin series sum_n (a)_n (b)_n w^n / (Gamma(c+n) n!).

    Exact sum (finite) when a or b is a non-positive integer.
    """
    if w == 0.0:
        return rgamma(c)
    n_stop = None
    for p in (a, b):
        m = _nonpos_int_order(p)
        if m is not None:
            n_stop = m if n_stop is None else min(n_stop, m)

    # Terms with c + n a non-positive integer vanish; start past them.
    n0 = 0
    mc = _nonpos_int_order(c)
    if mc is not None:
        n0 = mc + 1
    if n_stop is not None and n0 > n_stop:
        return 0.0

    term = _poch(a, n0) * _poch(b, n0) / math.factorial(n0) * w**n0 * rgamma(c + n0)
    total = term
    n = n0
    small = 0
    while True:
        if n_stop is not None and n >= n_stop:
            return total
        term *= (a + n) * (b + n) / ((n + 1) * (c + n)) * w
        total += term
        n += 1
        if abs(term) <= rtol * 1e-3 * abs(total) or term == 0.0:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
        if n - n0 > max_terms:
            raise HypergeometricConvergenceError(
                f"2F1({a}, {b}; {c}; {w}) series not converged after {max_terms} terms"
            )


def _near_one(a, b, c, om, rtol, max_terms):
    """Regularized 2F1(a, b; c; 1 - om) for 0 < om < 1/2."""
    s = c - a - b
    m = round(s)
    if abs(s - m) < LOG_CASE_THRESHOLD:
        return _near_one_log(a, b, int(m), om, rtol, max_terms)
    f1 = _series(a, b, 1.0 - s, om, rtol, max_terms)
    f2 = _series(c - a, c - b, 1.0 + s, om, rtol, max_terms)
    t1 = f1 * rgamma(c - a) * rgamma(c - b)
    t2 = om**s * f2 * rgamma(a) * rgamma(b)
    return math.pi / math.sin(math.pi * s) * (t1 - t2)


def _near_one_log(a, b, m, om, rtol, max_terms):
    """Limiting form for c = a + b + m, m integer (digamma series)."""
    lom = math.log(om)
    if m >= 0:
        head = 0.0
        if m > 0:
            coef = math.gamma(m) * rgamma(a + m) * rgamma(b + m)
            t = 1.0
            acc = 1.0
            for n in range(1, m):
                t *= (a + n - 1) * (b + n - 1) / (n * (n - m)) * om
                acc += t
            head = coef * acc
        pre = (-om) ** m * rgamma(a) * rgamma(b)
        if pre == 0.0:
            return head
        t = 1.0 / math.factorial(m)
        n = 0
        tail = 0.0
        small = 0
        while True:
            bracket = lom - psi(n + 1) - psi(n + m + 1) + psi(a + n + m) + psi(b + n + m)
            contrib = t * bracket
            tail += contrib
            if abs(contrib) <= rtol * 1e-3 * abs(tail) or contrib == 0.0:
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
            t *= (a + m + n) * (b + m + n) / ((n + 1) * (n + m + 1)) * om
            n += 1
            if n > max_terms:
                raise HypergeometricConvergenceError("logarithmic 2F1 series not converged")
        return head - pre * tail

    k = -m
    coef = math.gamma(k) * rgamma(a) * rgamma(b) * om ** (-k)
    t = 1.0
    acc = 1.0
    for n in range(1, k):
        t *= (a - k + n - 1) * (b - k + n - 1) / (n * (n - k)) * om
        acc += t
    head = coef * acc
    pre = (-1) ** k * rgamma(a - k) * rgamma(b - k)
    if pre == 0.0:
        return head
    t = 1.0 / math.factorial(k)
    n = 0
    tail = 0.0
    small = 0
    while True:
        bracket = lom - psi(n + 1) - psi(n + k + 1) + psi(a + n) + psi(b + n)
        contrib = t * bracket
        tail += contrib
        if abs(contrib) <= rtol * 1e-3 * abs(tail) or contrib == 0.0:
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        t *= (a + n) * (b + n) / ((n + 1) * (n + k + 1)) * om
        n += 1
        if n > max_terms:
            raise HypergeometricConvergenceError("logarithmic 2F1 series not converged")
    return head - pre * tail


def _inner(a, b, c, w, om, rtol, max_terms):
    """Regularized 2F1(a, b; c; w) for w in [0, 1) with om = 1 - w."""
    if _nonpos_int_order(a) is not None or _nonpos_int_order(b) is not None:
        return _series(a, b, c, w, rtol, max_terms)
    if w <= 0.5:
        return _series(a, b, c, w, rtol, max_terms)
    return _near_one(a, b, c, om, rtol, max_terms)


def hyp2f1_reg(a, b=None, c=None, z=None, *, rtol=DEFAULT_RTOL,
               max_terms=DEFAULT_MAX_TERMS, variant=None):
    """Regularized Gauss hypergeometric function 2F1(a, b; c; z)/Gamma(c), z <= 0.

    Accepts either four scalars or a single HypParams.  ``variant`` selects
    the Pfaff transformation (``"a"``: keep a, ``"b"``: keep b); by default
    the one giving a terminating or better-conditioned inner series is used.
    """
    if isinstance(a, HypParams):
        p = a
    else:
        p = HypParams(float(a), float(b), float(c), float(z))
    a, b, c, z = p.a, p.b, p.c, p.z
    if z == 0.0:
        return rgamma(c)

    if variant is None:
        if _nonpos_int_order(c - a) is not None or _nonpos_int_order(b) is not None:
            variant = "b"
        elif _nonpos_int_order(a) is not None or _nonpos_int_order(c - b) is not None:
            variant = "a"
        else:
            variant = "b"

    one_minus_z = 1.0 - z
    w = z / (z - 1.0)
    om = 1.0 / one_minus_z  # 1 - w without cancellation
    if variant == "a":
        # F(a,b;c;z) = (1-z)^-a F(a, c-b; c; w)
        return one_minus_z ** (-a) * _inner(a, c - b, c, w, om, rtol, max_terms)
    if variant == "b":
        # F(a,b;c;z) = (1-z)^-b F(c-a, b; c; w)
        return one_minus_z ** (-b) * _inner(c - a, b, c, w, om, rtol, max_terms)
    raise ValueError(f"unknown Pfaff variant {variant!r}")
