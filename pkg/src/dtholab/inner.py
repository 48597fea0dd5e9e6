"""Inner functions: monomials ``z^n`` and finite Blaschke products.

A Blaschke product here is ``c * prod_j (a_j - z) / (1 - conj(a_j) z)`` with
``|a_j| < 1`` and ``|c| = 1``, so its constant term is ``c * prod_j a_j``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fourier import LaurentSeries

_UNIT_TOL = 1e-14


@dataclass(frozen=True)
class Monomial:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"monomial degree must be a positive integer, got {self.n!r}")

    @property
    def exact(self) -> bool:
        return True

    @property
    def degree(self) -> int:
        return self.n

    def __str__(self):
        return f"z^{self.n}"


@dataclass(frozen=True)
class FiniteBlaschke:
    zeros: tuple[complex, ...]
    unimodular_constant: complex = 1.0 + 0j
    _radius: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        if not zs:
            raise ValueError("a Blaschke product needs at least one zero")
        for a in zs:
            if not abs(a) < 1:
                raise ValueError(f"Blaschke zero {a} is not inside the unit disk")
        c = complex(self.unimodular_constant)
        if abs(abs(c) - 1) > _UNIT_TOL:
            raise ValueError(f"unimodular constant {c} has modulus {abs(c)}")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "unimodular_constant", c)
        object.__setattr__(self, "_radius", max(abs(a) for a in zs))

    @property
    def exact(self) -> bool:
        return False

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def radius(self) -> float:
        """Largest zero modulus; sets the geometric decay of the coefficients."""
        return self._radius

    def __str__(self):
        zs = ",".join(_fmt_complex(a) for a in self.zeros)
        return f"blaschke:c={_fmt_complex(self.unimodular_constant)};zeros={zs}"


InnerFunction = Monomial | FiniteBlaschke


def _factor(a: complex, order: int) -> tuple[np.ndarray, float]:
    """Taylor coefficients 0..order of (a - z)/(1 - conj(a) z) and the l1 tail."""
    ab = np.conj(a)
    c = np.empty(order + 1, dtype=complex)
    c[0] = a
    if order >= 1:
        k = np.arange(1, order + 1)
        c[1:] = ab ** (k - 1) * (abs(a) ** 2 - 1)
    r = abs(a)
    tail = (1 - r * r) * r ** order / (1 - r) if r > 0 else 0.0
    return c, tail


@lru_cache(maxsize=256)
def _expand_cached(theta: InnerFunction, order: int) -> tuple[LaurentSeries, float]:
    if isinstance(theta, Monomial):
        if order < theta.n:
            raise ValueError(f"expansion order {order} is below the degree of {theta}")
        return LaurentSeries.monomial(theta.n), 0.0
    coeffs = np.array([theta.unimodular_constant], dtype=complex)
    l1_trunc, l1_full = 1.0, 1.0
    for a in theta.zeros:
        c, tail = _factor(a, order)
        coeffs = np.convolve(coeffs, c)
        n1 = float(np.abs(c).sum())
        l1_trunc *= n1
        l1_full *= n1 + tail
    # beyond `order`: what the truncated product still carries plus every
    # cross term that touches at least one factor tail
    tail_bound = float(np.abs(coeffs[order + 1:]).sum()) + (l1_full - l1_trunc)
    return LaurentSeries.from_array(0, coeffs[: order + 1]), tail_bound


def expand(theta: InnerFunction, order: int) -> tuple[LaurentSeries, float]:
    """Taylor coefficients of ``theta`` on ``[0, order]`` and a bound on the dropped l1 mass."""
    return _expand_cached(theta, int(order))


def order_for_tail(theta: InnerFunction, tol: float = 1e-18, minimum: int = 0) -> int:
    """Smallest convenient expansion order whose tail bound is below ``tol``."""
    if isinstance(theta, Monomial):
        return max(theta.n, minimum)
    r = theta.radius
    d = theta.degree
    if r == 0:
        return max(minimum, d)
    # per-factor tails are (1+r) r^N; the product bound scales roughly with 3^d
    est = math.log(tol / ((1 + r) * d * 3.0 ** d)) / math.log(r)
    n = max(minimum, d, int(math.ceil(est)))
    while expand(theta, n)[1] > tol:
        n = int(n * 1.25) + 1
    return n


def theta0(theta: InnerFunction) -> complex:
    """Constant Fourier coefficient, read off the expansion."""
    series, _ = expand(theta, max(theta.degree, 1))
    return series[0]


def theta0_closed_form(theta: InnerFunction) -> complex:
    if isinstance(theta, Monomial):
        return 0j
    return theta.unimodular_constant * complex(np.prod(theta.zeros))


def is_symmetric(theta: InnerFunction, tol: float = 1e-12, order: int | None = None) -> bool:
    """True when every Taylor coefficient is real, i.e. ``theta* = theta``."""
    if isinstance(theta, Monomial):
        return True
    n = order if order is not None else order_for_tail(theta, 1e-16)
    series, _ = expand(theta, n)
    return bool(np.all(np.abs(series.values.imag) <= tol))


def unimodularity_residual(theta: InnerFunction, order: int, grid_size: int = 1024) -> float:
    """``max | |theta_N(z)| - 1 |`` over ``grid_size`` roots of unity."""
    if isinstance(theta, Monomial):
        return 0.0  # |z^n| = 1 exactly; sampling would only add rounding
    series, _ = expand(theta, order)
    z = np.exp(2j * np.pi * np.arange(grid_size) / grid_size)
    return float(np.abs(np.abs(series(z)) - 1).max())


# -- parsing -----------------------------------------------------------------

_MONO = re.compile(r"^\s*z\s*(\^\s*(\d+))?\s*$")


def parse_inner(text: str) -> InnerFunction:
    """Parse ``z^2`` or ``blaschke:c=1;zeros=0.5,-0.3+0.1i``."""
    m = _MONO.match(text)
    if m:
        return Monomial(int(m.group(2) or 1))
    t = text.strip()
    if not t.lower().startswith("blaschke:"):
        raise ValueError(f"unrecognised inner function {text!r}")
    c, zeros = 1.0 + 0j, None
    for part in t.split(":", 1)[1].split(";"):
        if not part.strip():
            continue
        key, _, val = part.partition("=")
        key = key.strip().lower()
        if key == "c":
            c = _parse_complex(val)
        elif key == "zeros":
            zeros = tuple(_parse_complex(v) for v in val.split(",") if v.strip())
        else:
            raise ValueError(f"unknown Blaschke field {key!r} in {text!r}")
    if not zeros:
        raise ValueError(f"Blaschke spec {text!r} lists no zeros")
    return FiniteBlaschke(zeros, c)


def _parse_complex(s: str) -> complex:
    s = s.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise ValueError(f"cannot parse complex number {s!r}") from None


def _fmt_complex(a: complex) -> str:
    a = complex(a)
    if a.imag == 0:
        return f"{a.real:g}"
    return f"{a.real:g}{a.imag:+g}i"
