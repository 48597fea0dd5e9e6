"""Finitely supported Laurent series on the unit circle.

A :class:`LaurentSeries` stores the Fourier coefficients of a trigonometric
polynomial ``f(z) = sum_k f_k z^k`` (``|z| = 1``) as a contiguous window
``[lo, hi]`` with a dense coefficient array.  Exact zeros at both ends are
trimmed, so ``lo`` and ``hi`` are the extreme nonzero indices.
"""
from __future__ import annotations

import ast
import math
from typing import Iterable, Mapping

import numpy as np

DEFAULT_ATOL = 1e-12


class LaurentSeries:
    """Two-sided coefficient sequence with finite support.

    Construct from a mapping ``{index: coefficient}``; use
    :meth:`from_array` for a dense window.
    """

    __slots__ = ("_lo", "_c")

    def __init__(self, coeffs: Mapping[int, complex] | None = None):
        if not coeffs:
            self._lo, self._c = 0, np.zeros(0, dtype=complex)
            return
        keys = [int(k) for k in coeffs]
        lo, hi = min(keys), max(keys)
        c = np.zeros(hi - lo + 1, dtype=complex)
        for k, v in coeffs.items():
            c[int(k) - lo] += complex(v)
        self._set(lo, c)

    def _set(self, lo: int, c: np.ndarray) -> None:
        nz = np.flatnonzero(c)
        if nz.size == 0:
            self._lo, self._c = 0, np.zeros(0, dtype=complex)
        else:
            self._lo = lo + int(nz[0])
            self._c = np.array(c[nz[0]: nz[-1] + 1], dtype=complex)
        self._c.setflags(write=False)

    @classmethod
    def from_array(cls, lo: int, values) -> "LaurentSeries":
        out = cls.__new__(cls)
        out._set(int(lo), np.asarray(values, dtype=complex))
        return out

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "LaurentSeries":
        return cls.from_array(k, [c])

    @classmethod
    def zero(cls) -> "LaurentSeries":
        return cls()

    # -- structure ---------------------------------------------------------
    @property
    def lo(self) -> int:
        return self._lo

    @property
    def hi(self) -> int:
        return self._lo + self._c.size - 1

    @property
    def values(self) -> np.ndarray:
        """Dense coefficients on ``[lo, hi]`` (read-only view)."""
        return self._c

    @property
    def coeffs(self) -> dict[int, complex]:
        return {self._lo + i: complex(v) for i, v in enumerate(self._c) if v != 0}

    def is_zero(self) -> bool:
        return self._c.size == 0

    @property
    def bandwidth(self) -> int:
        """Largest ``|k|`` with a nonzero coefficient (0 for the zero series)."""
        if self.is_zero():
            return 0
        return max(abs(self.lo), abs(self.hi))

    def __getitem__(self, k: int) -> complex:
        i = k - self._lo
        if 0 <= i < self._c.size:
            return complex(self._c[i])
        return 0j

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients on an arbitrary window ``[lo, hi]``, zero-padded or clipped."""
        out = np.zeros(max(hi - lo + 1, 0), dtype=complex)
        if self.is_zero() or hi < lo:
            return out
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo: b - lo + 1] = self._c[a - self._lo: b - self._lo + 1]
        return out

    def restrict(self, lo: int | None = None, hi: int | None = None) -> "LaurentSeries":
        """Keep only coefficients with ``lo <= k <= hi``."""
        if self.is_zero():
            return self
        a = self.lo if lo is None else max(lo, self.lo)
        b = self.hi if hi is None else min(hi, self.hi)
        if a > b:
            return LaurentSeries()
        return LaurentSeries.from_array(a, self._c[a - self._lo: b - self._lo + 1])

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.monomial(0, other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        c = np.zeros(hi - lo + 1, dtype=complex)
        c[self.lo - lo: self.hi - lo + 1] += self._c
        c[other.lo - lo: other.hi - lo + 1] += other._c
        return LaurentSeries.from_array(lo, c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries.from_array(self._lo, -self._c)

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.monomial(0, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return multiply(self, other)
        return LaurentSeries.from_array(self._lo, self._c * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return LaurentSeries.from_array(self._lo, self._c / complex(scalar))

    def shift(self, n: int) -> "LaurentSeries":
        """Multiply by ``z^n``."""
        if self.is_zero():
            return self
        return LaurentSeries.from_array(self._lo + n, self._c)

    # -- metrics -----------------------------------------------------------
    def norm(self) -> float:
        return float(np.linalg.norm(self._c))

    def l1(self) -> float:
        return float(np.abs(self._c).sum())

    def inner(self, other: "LaurentSeries") -> complex:
        """``<self, other>``, linear in the first slot."""
        if self.is_zero() or other.is_zero():
            return 0j
        a, b = max(self.lo, other.lo), min(self.hi, other.hi)
        if a > b:
            return 0j
        x = self._c[a - self.lo: b - self.lo + 1]
        y = other._c[a - other.lo: b - other.lo + 1]
        return complex(np.vdot(y, x))

    def allclose(self, other: "LaurentSeries", atol: float = DEFAULT_ATOL) -> bool:
        return (self - other).norm() <= atol

    def __call__(self, z):
        """Evaluate at points ``z`` (typically on the unit circle)."""
        z = np.asarray(z, dtype=complex)
        if self.is_zero():
            return np.zeros_like(z)
        k = np.arange(self.lo, self.hi + 1)
        return np.power.outer(z, k) @ self._c

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self._lo == other._lo and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash((self._lo, self._c.tobytes()))

    def __repr__(self):
        if self.is_zero():
            return "LaurentSeries(0)"
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in self.coeffs.items())
        return f"LaurentSeries({{{terms}}})"

    def to_triples(self) -> list[tuple[int, float, float]]:
        return [(k, v.real, v.imag) for k, v in self.coeffs.items()]


def multiply(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    """Pointwise product on the circle, i.e. coefficient convolution."""
    if f.is_zero() or g.is_zero():
        return LaurentSeries()
    return LaurentSeries.from_array(f.lo + g.lo, np.convolve(f.values, g.values))


def flip_J(f: LaurentSeries) -> LaurentSeries:
    """``(Jf)(z) = f(conj z)``: index negation."""
    if f.is_zero():
        return f
    return LaurentSeries.from_array(-f.hi, f.values[::-1])


def flip_curlyJ(f: LaurentSeries) -> LaurentSeries:
    """``conj(z) f(conj z)``: coefficient ``k`` moves to ``-k-1``."""
    if f.is_zero():
        return f
    return LaurentSeries.from_array(-f.hi - 1, f.values[::-1])


def star(f: LaurentSeries) -> LaurentSeries:
    """``f*(z) = conj(f(conj z))``: conjugate every coefficient in place."""
    return LaurentSeries.from_array(f.lo, np.conj(f.values))


def conj(f: LaurentSeries) -> LaurentSeries:
    """Boundary conjugate ``conj(f(z))`` on ``|z| = 1``."""
    return flip_J(star(f))


def proj_P(f: LaurentSeries) -> LaurentSeries:
    """Orthogonal projection onto H^2 (indices ``k >= 0``)."""
    return f.restrict(lo=0)


def proj_Q(f: LaurentSeries) -> LaurentSeries:
    """Orthogonal projection onto conj(H^2_0) (indices ``k <= -1``)."""
    return f.restrict(hi=-1)


def sup_norm_estimate(f: LaurentSeries, grid_size: int) -> tuple[float, float]:
    """Maximum of ``|f|`` over ``grid_size`` roots of unity, with an error bound.

    Returns ``(estimate, bound)`` where ``estimate <= ||f||_inf <= estimate + bound``.
    The bound is the mean-value estimate ``(pi / grid_size) * sum |k| |f_k|``.
    """
    if grid_size < 2 * f.bandwidth + 1:
        raise ValueError(
            f"grid_size={grid_size} too small for bandwidth {f.bandwidth}; "
            f"need at least {2 * f.bandwidth + 1}"
        )
    if f.is_zero():
        return 0.0, 0.0
    # evaluate sum_k f_k w^{jk} via an FFT on the nonnegative-shifted window
    n = grid_size
    c = np.zeros(n, dtype=complex)
    for i, v in enumerate(f.values):
        c[(f.lo + i) % n] += v
    samples = np.fft.ifft(c) * n
    est = float(np.abs(samples).max())
    k = np.arange(f.lo, f.hi + 1)
    bound = math.pi / n * float(np.abs(k * f.values).sum())
    return est, bound


def random_series(rng: np.random.Generator, lo: int, hi: int, real: bool = False) -> LaurentSeries:
    """Gaussian coefficients on ``[lo, hi]``; handy for tests and suites."""
    n = hi - lo + 1
    c = rng.standard_normal(n)
    if not real:
        c = c + 1j * rng.standard_normal(n)
    return LaurentSeries.from_array(lo, c)


def parse_series(text: str) -> LaurentSeries:
    """Parse the literal ``[(k, re, im), ...]`` used on the command line."""
    try:
        items = ast.literal_eval(text.strip())
    except (ValueError, SyntaxError) as exc:
        raise ValueError(f"cannot parse series literal {text!r}: {exc}") from None
    if isinstance(items, tuple) and len(items) == 3 and not isinstance(items[0], tuple):
        items = [items]
    coeffs: dict[int, complex] = {}
    for item in _as_list(items, text):
        if len(item) != 3:
            raise ValueError(f"series term {item!r} is not an (index, re, im) triple")
        k, re, im = item
        if int(k) != k:
            raise ValueError(f"series index {k!r} is not an integer")
        coeffs[int(k)] = coeffs.get(int(k), 0j) + complex(float(re), float(im))
    return LaurentSeries(coeffs)


def _as_list(items, text: str) -> Iterable:
    if not isinstance(items, (list, tuple)):
        raise ValueError(f"series literal {text!r} must be a list of triples")
    return items


def format_series(f: LaurentSeries) -> str:
    return "[" + ",".join(f"({k},{re!r},{im!r})" for k, re, im in f.to_triples()) + "]"
