"""Orthogonal decomposition ``L^2 = conj(H^2_0) + K_theta + theta H^2`` and coordinates.

Every basis here is orthonormal (up to the theta expansion tail) and knows how
to analyse a Laurent series into coordinates and synthesise it back.  The
synthesis error ``||f - from_coords(to_coords(f))||`` is the *leakage*: the
part of ``f`` that lives outside the retained finite slice.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .fourier import LaurentSeries, conj, multiply, proj_P, proj_Q, star
from .inner import InnerFunction, Monomial, expand, order_for_tail

TAIL_TOL = 1e-18


class ModelSpace:
    """Truncated expansion of ``theta`` plus the projections built from it."""

    def __init__(self, theta: InnerFunction, order: int | None = None):
        self.theta = theta
        auto = order_for_tail(theta, TAIL_TOL)
        self.order = auto if order is None else max(int(order), theta.degree if theta.exact else 1)
        self.series, self.tail = expand(theta, self.order)
        self.bar = conj(self.series)
        self.star = star(self.series)
        self.theta0 = self.series[0]

    @property
    def exact(self) -> bool:
        return self.theta.exact

    def times_theta(self, g: LaurentSeries) -> LaurentSeries:
        return multiply(self.series, g)

    def times_theta_bar(self, g: LaurentSeries) -> LaurentSeries:
        return multiply(self.bar, g)

    def Q(self, f: LaurentSeries) -> LaurentSeries:
        """Projection onto the orthogonal complement of K_theta: ``(I-P)f + theta P(conj(theta) f)``."""
        return proj_Q(f) + multiply(self.series, proj_P(multiply(self.bar, f)))

    def P(self, f: LaurentSeries) -> LaurentSeries:
        """Projection onto K_theta."""
        return f - self.Q(f)

    def __repr__(self):
        return f"ModelSpace({self.theta}, order={self.order})"


@lru_cache(maxsize=64)
def model_space(theta: InnerFunction, order: int | None = None) -> ModelSpace:
    return ModelSpace(theta, order)


def proj_Qtheta(f: LaurentSeries, theta: InnerFunction, order: int | None = None) -> LaurentSeries:
    return model_space(theta, order).Q(f)


def proj_Ptheta(f: LaurentSeries, theta: InnerFunction, order: int | None = None) -> LaurentSeries:
    return model_space(theta, order).P(f)


# -- bases -------------------------------------------------------------------


class Basis:
    """Finite orthonormal slice of some closed subspace of L^2."""

    labels: tuple[str, ...]
    tail: float = 0.0

    def __len__(self) -> int:
        return len(self.labels)

    def vector(self, j: int) -> LaurentSeries:
        raise NotImplementedError

    def to_coords(self, f: LaurentSeries) -> np.ndarray:
        raise NotImplementedError

    def from_coords(self, v) -> LaurentSeries:
        raise NotImplementedError

    def leakage(self, f: LaurentSeries, coords: np.ndarray | None = None) -> float:
        if coords is None:
            coords = self.to_coords(f)
        return (f - self.from_coords(coords)).norm()

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @cached_property
    def gram(self) -> np.ndarray:
        return np.array([self.to_coords(self.vector(j)) for j in range(len(self))]).T


class KPerpBasis(Basis):
    """``zbar^1 .. zbar^nneg, theta, theta z, .., theta z^(man-1)`` in that order."""

    def __init__(self, theta: InnerFunction, nneg: int, man: int, expansion_order: int | None = None):
        if nneg < 1 or man < 1:
            raise ValueError(f"need nneg >= 1 and man >= 1, got {nneg}, {man}")
        self.theta = theta
        self.nneg, self.man = int(nneg), int(man)
        if expansion_order is None and not theta.exact:
            expansion_order = max(order_for_tail(theta, TAIL_TOL), nneg + man)
        self.space = model_space(theta, expansion_order)
        self.expansion_order = self.space.order
        self.tail = self.space.tail
        self.labels = tuple(f"zbar^{k}" for k in range(1, nneg + 1)) + tuple(
            f"theta*z^{m}" for m in range(man)
        )
        self._theta_dense = self.space.series.dense(0, self.space.order)

    @property
    def exact(self) -> bool:
        return self.theta.exact

    @property
    def theta0(self) -> complex:
        return self.space.theta0

    def zbar(self, k: int) -> int:
        """Position of ``zbar^k``."""
        if not 1 <= k <= self.nneg:
            raise IndexError(f"zbar^{k} is outside the retained window")
        return k - 1

    def theta_z(self, m: int) -> int:
        """Position of ``theta z^m``."""
        if not 0 <= m < self.man:
            raise IndexError(f"theta*z^{m} is outside the retained window")
        return self.nneg + m

    def vector(self, j: int) -> LaurentSeries:
        if j < self.nneg:
            return LaurentSeries.monomial(-(j + 1))
        return self.space.series.shift(j - self.nneg)

    def to_coords(self, f: LaurentSeries) -> np.ndarray:
        out = np.empty(self.nneg + self.man, dtype=complex)
        out[: self.nneg] = f.dense(-self.nneg, -1)[::-1]
        n = self.space.order
        window = f.dense(0, self.man - 1 + n)
        # <f, theta z^m> = sum_j f_{m+j} conj(theta_j)
        out[self.nneg:] = np.correlate(window, self._theta_dense, mode="valid")
        return out

    def from_coords(self, v) -> LaurentSeries:
        v = np.asarray(v, dtype=complex)
        neg = LaurentSeries.from_array(-self.nneg, v[: self.nneg][::-1])
        pos = LaurentSeries.from_array(0, v[self.nneg:])
        return neg + multiply(self.space.series, pos)

    def __repr__(self):
        return f"KPerpBasis({self.theta}, nneg={self.nneg}, man={self.man}, order={self.expansion_order})"


class MonomialBasis(Basis):
    """Monomials ``z^k`` for a fixed list of indices (a window of H^2, conj(H^2_0), ...)."""

    def __init__(self, indices: Sequence[int], name: str = ""):
        self.indices = np.array([int(k) for k in indices], dtype=int)
        if len(set(self.indices.tolist())) != len(self.indices):
            raise ValueError("monomial basis indices must be distinct")
        self.name = name
        self.labels = tuple(_mono_label(int(k)) for k in self.indices)
        self._lo = int(self.indices.min()) if len(self.indices) else 0
        self._hi = int(self.indices.max()) if len(self.indices) else -1

    @property
    def exact(self) -> bool:
        return True

    def vector(self, j: int) -> LaurentSeries:
        return LaurentSeries.monomial(int(self.indices[j]))

    def to_coords(self, f: LaurentSeries) -> np.ndarray:
        return f.dense(self._lo, self._hi)[self.indices - self._lo]

    def from_coords(self, v) -> LaurentSeries:
        v = np.asarray(v, dtype=complex)
        c = np.zeros(self._hi - self._lo + 1, dtype=complex)
        c[self.indices - self._lo] = v
        return LaurentSeries.from_array(self._lo, c)

    def __repr__(self):
        return f"MonomialBasis({self.name or list(self.indices)})"


def hardy_window(m_max: int) -> MonomialBasis:
    """``1, z, .., z^m_max`` in H^2."""
    return MonomialBasis(range(0, m_max + 1), name=f"H2[0..{m_max}]")


def antianalytic_window(k_max: int) -> MonomialBasis:
    """``zbar, .., zbar^k_max`` in conj(H^2_0)."""
    return MonomialBasis([-k for k in range(1, k_max + 1)], name=f"H2bar0[1..{k_max}]")


class OrthonormalBasis(Basis):
    """Explicit list of orthonormal Laurent series (used for K_theta of a Blaschke product)."""

    def __init__(self, vectors: Sequence[LaurentSeries], labels: Sequence[str], tail: float = 0.0):
        self.vectors = list(vectors)
        self.labels = tuple(labels)
        self.tail = tail

    @property
    def exact(self) -> bool:
        return self.tail == 0.0

    def vector(self, j: int) -> LaurentSeries:
        return self.vectors[j]

    def to_coords(self, f: LaurentSeries) -> np.ndarray:
        return np.array([f.inner(b) for b in self.vectors], dtype=complex)

    def from_coords(self, v) -> LaurentSeries:
        out = LaurentSeries()
        for c, b in zip(v, self.vectors):
            out = out + b * c
        return out


def ktheta_basis(theta: InnerFunction, order: int | None = None) -> Basis:
    """Orthonormal basis of the model space K_theta.

    For ``z^n`` this is ``1, .., z^(n-1)``.  For a Blaschke product of degree d,
    the projections of ``1, .., z^(d-1)`` span K_theta and are orthonormalised
    by a QR factorisation of their coefficient vectors.
    """
    if isinstance(theta, Monomial):
        return MonomialBasis(range(theta.n), name=f"K[{theta}]")
    space = model_space(theta, order)
    d = theta.degree
    raw = [space.P(LaurentSeries.monomial(j)) for j in range(d)]
    lo = min(r.lo for r in raw)
    hi = max(r.hi for r in raw)
    mat = np.array([r.dense(lo, hi) for r in raw]).T
    q, _ = np.linalg.qr(mat)
    vecs = [LaurentSeries.from_array(lo, q[:, j]) for j in range(d)]
    return OrthonormalBasis(vecs, [f"k{j}" for j in range(d)], tail=space.tail)


@dataclass(frozen=True)
class CoordinateVector:
    values: np.ndarray
    basis: Basis
    residual: float

    def __len__(self):
        return len(self.values)


def to_coords(f: LaurentSeries, basis: Basis) -> CoordinateVector:
    """Analyse ``f``; ``residual`` is the norm of what the basis cannot represent."""
    v = basis.to_coords(f)
    return CoordinateVector(v, basis, basis.leakage(f, v))


def from_coords(v, basis: Basis) -> LaurentSeries:
    if isinstance(v, CoordinateVector):
        if v.basis is not basis and len(v.basis) != len(basis):
            raise ValueError("coordinate vector does not match basis")
        v = v.values
    if len(v) != len(basis):
        raise ValueError(f"coordinate vector has length {len(v)}, basis has {len(basis)}")
    return basis.from_coords(v)


def _mono_label(k: int) -> str:
    if k < 0:
        return f"zbar^{-k}"
    return f"z^{k}"
