"""Finite sections of the operators that act on K_theta^perp, H^2 and conj(H^2_0).

Every operator is described by an exact *action* on :class:`LaurentSeries`
(and, where available, the action of its adjoint).  A finite section is
assembled column by column: apply the action to a basis vector, read off the
coordinates in the row basis, and record how much of the image fell outside
the retained window.  That per-column error is what decides the interior
window, i.e. the columns that are exact up to rounding and the theta tail.

Matrix products propagate the column errors, so a product section knows its
own interior without rebuilding the composed operator.
"""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fourier import (
    LaurentSeries,
    conj,
    flip_curlyJ,
    flip_J,
    multiply,
    proj_P,
    proj_Q,
    star,
)
from .modelspace import (
    Basis,
    KPerpBasis,
    antianalytic_window,
    hardy_window,
    ktheta_basis,
    model_space,
)

Action = Callable[[LaurentSeries], LaurentSeries]

# columns whose error is below this (relative to the norm bound) form the interior
INTERIOR_RTOL = 1e-13
# slack for using theta_N instead of theta inside one action (basis vector,
# projection, coordinates)
TAIL_FACTOR = 4.0

ZBAR = LaurentSeries.monomial(-1)
ZBAR2 = LaurentSeries.monomial(-2)
Z = LaurentSeries.monomial(1)


def symbol_hash(*series: LaurentSeries | None) -> str:
    h = hashlib.sha256()
    for s in series:
        h.update(b"|")
        if s is not None:
            for k, re_, im in s.to_triples():
                h.update(f"{k}:{re_!r}:{im!r};".encode())
    return h.hexdigest()[:16]


def _same_basis(a: Basis, b: Basis) -> bool:
    if a is b:
        return True
    return (
        type(a) is type(b)
        and a.labels == b.labels
        and getattr(a, "theta", None) == getattr(b, "theta", None)
    )


@dataclass
class OperatorMatrix:
    """Dense finite section with basis labels and truncation bookkeeping.

    ``col_error[j]`` bounds ``||A b_j - sum_i entries[i, j] r_i||`` where
    ``b_j`` is the j-th column basis vector and ``r_i`` the row basis.
    ``norm_bound`` is an upper bound for the norm of the full operator.
    """

    entries: np.ndarray
    row_basis: Basis
    col_basis: Basis
    col_error: np.ndarray
    norm_bound: float
    meta: dict = field(default_factory=dict)
    action: Action | None = field(default=None, repr=False)
    adjoint_action: Action | None = field(default=None, repr=False)
    _adjoint: Callable[[], "OperatorMatrix"] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (len(self.row_basis), len(self.col_basis)):
            raise ValueError(
                f"entries have shape {self.entries.shape}, bases give "
                f"{(len(self.row_basis), len(self.col_basis))}"
            )
        self.col_error = np.asarray(self.col_error, dtype=float)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def name(self) -> str:
        return self.meta.get("builder", "operator")

    def interior(self, rtol: float = INTERIOR_RTOL) -> np.ndarray:
        """Indices of columns that are exact up to ``rtol * max(1, norm_bound)``."""
        thr = rtol * max(1.0, self.norm_bound)
        return np.flatnonzero(self.col_error <= thr)

    def apply(self, v) -> np.ndarray:
        return self.entries @ np.asarray(v, dtype=complex)

    def column_series(self, j: int) -> LaurentSeries:
        return self.row_basis.from_coords(self.entries[:, j])

    # -- algebra -----------------------------------------------------------
    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if not _same_basis(self.col_basis, other.row_basis):
            raise ValueError(f"cannot compose {self.name} after {other.name}: bases differ")
        a, b = self, other
        err = a.norm_bound * b.col_error + a.col_error @ np.abs(b.entries)
        act = _compose(a.action, b.action)
        adj = _compose(b.adjoint_action, a.adjoint_action)
        return OperatorMatrix(
            a.entries @ b.entries,
            a.row_basis,
            b.col_basis,
            err,
            a.norm_bound * b.norm_bound,
            {"builder": f"({a.name})({b.name})"},
            act,
            adj,
            lambda: b.adjoint() @ a.adjoint(),
        )

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if not (_same_basis(self.row_basis, other.row_basis) and _same_basis(self.col_basis, other.col_basis)):
            raise ValueError(f"cannot add {self.name} and {other.name}: bases differ")
        a, b = self, other
        return OperatorMatrix(
            a.entries + b.entries,
            a.row_basis,
            a.col_basis,
            a.col_error + b.col_error,
            a.norm_bound + b.norm_bound,
            {"builder": f"{a.name} + {b.name}"},
            _add(a.action, b.action),
            _add(a.adjoint_action, b.adjoint_action),
            lambda: a.adjoint() + b.adjoint(),
        )

    def __mul__(self, c) -> "OperatorMatrix":
        c = complex(c)
        a = self
        return OperatorMatrix(
            a.entries * c,
            a.row_basis,
            a.col_basis,
            a.col_error * abs(c),
            a.norm_bound * abs(c),
            {"builder": f"{c:g}*{a.name}"},
            _scale(a.action, c),
            _scale(a.adjoint_action, np.conj(c)),
            lambda: a.adjoint() * np.conj(c),
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def adjoint(self) -> "OperatorMatrix":
        """Conjugate transpose, with column errors measured against the true adjoint."""
        if self._adjoint is not None:
            return self._adjoint()
        ent = self.entries.conj().T
        err = np.full(ent.shape[1], np.inf)
        if self.adjoint_action is not None:
            extra = TAIL_FACTOR * (self.row_basis.tail + self.col_basis.tail) * (1 + self.norm_bound)
            for j in range(ent.shape[1]):
                f = self.adjoint_action(self.row_basis.vector(j))
                err[j] = (f - self.col_basis.from_coords(ent[:, j])).norm() + extra
        meta = dict(self.meta)
        meta["builder"] = f"adj({self.name})"
        me = self
        return OperatorMatrix(
            ent, self.col_basis, self.row_basis, err, self.norm_bound, meta,
            self.adjoint_action, self.action, lambda: me,
        )

    # -- output ------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + list(self.col_basis.labels))
        for label, row in zip(self.row_basis.labels, self.entries):
            w.writerow([label] + [format_complex(x) for x in row])
        return buf.getvalue()


def format_complex(x: complex) -> str:
    re_, im = float(x.real) + 0.0, float(x.imag) + 0.0
    return f"{re_:.17g}{im:+.17g}i"


def _compose(f: Action | None, g: Action | None) -> Action | None:
    if f is None or g is None:
        return None
    return lambda h: f(g(h))


def _add(f: Action | None, g: Action | None) -> Action | None:
    if f is None or g is None:
        return None
    return lambda h: f(h) + g(h)


def _scale(f: Action | None, c: complex) -> Action | None:
    if f is None:
        return None
    return lambda h: f(h) * c


def operator_from_action(
    action: Action,
    row_basis: Basis,
    col_basis: Basis,
    norm_bound: float,
    adjoint_action: Action | None = None,
    meta: dict | None = None,
) -> OperatorMatrix:
    """Assemble the finite section of ``action`` column by column."""
    n, m = len(row_basis), len(col_basis)
    entries = np.zeros((n, m), dtype=complex)
    err = np.zeros(m)
    extra = TAIL_FACTOR * (row_basis.tail + col_basis.tail) * (1 + norm_bound)
    for j in range(m):
        f = action(col_basis.vector(j))
        v = row_basis.to_coords(f)
        entries[:, j] = v
        err[j] = row_basis.leakage(f, v) + extra
    return OperatorMatrix(
        entries, row_basis, col_basis, err, float(norm_bound), dict(meta or {}),
        action, adjoint_action,
    )


def identity(basis: Basis) -> OperatorMatrix:
    I = operator_from_action(lambda h: h, basis, basis, 1.0, lambda h: h, {"builder": "I"})
    # exact by definition; skip the rounding of coordinate round trips
    I.entries = np.eye(len(basis), dtype=complex)
    I.col_error = np.zeros(len(basis))
    return I


# -- classical operators on H^2 ------------------------------------------------


def build_toeplitz(phi: LaurentSeries, n: int) -> OperatorMatrix:
    """``T_phi h = P(phi h)`` on the window ``1, z, .., z^n``; entry (i, j) is ``phi_{i-j}``."""
    w = hardy_window(n)
    phis = conj(phi)
    return operator_from_action(
        lambda h: proj_P(multiply(phi, h)),
        w, w, phi.l1(),
        lambda h: proj_P(multiply(phis, h)),
        {"builder": "T", "symbol": symbol_hash(phi), "n": n},
    )


def build_hankel(phi: LaurentSeries, convention: str = "J", n: int = 16, m: int | None = None) -> OperatorMatrix:
    """``P J(phi h)`` (``convention='J'``) or ``P curlyJ(phi h)`` (``'curlyJ'``) on H^2 windows."""
    flip = _flip(convention)
    rows, cols = hardy_window(n if m is None else m), hardy_window(n)
    ps = star(phi)
    return operator_from_action(
        lambda h: proj_P(flip(multiply(phi, h))),
        rows, cols, phi.l1(),
        lambda h: proj_P(flip(multiply(ps, h))),
        {"builder": f"H[{convention}]", "symbol": symbol_hash(phi), "n": n},
    )


def _flip(convention: str) -> Callable[[LaurentSeries], LaurentSeries]:
    if convention == "J":
        return flip_J
    if convention in ("curlyJ", "𝒥", "JJ"):
        return flip_curlyJ
    raise ValueError(f"unknown flip convention {convention!r}; use 'J' or 'curlyJ'")


# -- operators on the model space K_theta --------------------------------------


def build_tto(phi: LaurentSeries, theta, order: int | None = None) -> OperatorMatrix:
    """Truncated Toeplitz operator ``P_theta(phi h)`` on K_theta."""
    ms = model_space(theta, order)
    b = ktheta_basis(theta, order)
    phis = conj(phi)
    return operator_from_action(
        lambda h: ms.P(multiply(phi, h)),
        b, b, phi.l1(),
        lambda h: ms.P(multiply(phis, h)),
        {"builder": "A", "symbol": symbol_hash(phi), "theta": str(theta)},
    )


def build_tho(phi: LaurentSeries, theta, order: int | None = None) -> OperatorMatrix:
    """Truncated Hankel operator ``P_theta curlyJ(phi h)`` on K_theta."""
    ms = model_space(theta, order)
    b = ktheta_basis(theta, order)
    ps = star(phi)
    return operator_from_action(
        lambda h: ms.P(flip_curlyJ(multiply(phi, h))),
        b, b, phi.l1(),
        lambda h: ms.P(flip_curlyJ(multiply(ps, h))),
        {"builder": "B", "symbol": symbol_hash(phi), "theta": str(theta)},
    )


# -- dual operators on K_theta^perp ----------------------------------------------


def dtho_action(phi: LaurentSeries, basis: KPerpBasis) -> Action:
    Q = basis.space.Q
    return lambda h: Q(flip_J(multiply(phi, h)))


def dtto_action(phi: LaurentSeries, basis: KPerpBasis) -> Action:
    Q = basis.space.Q
    return lambda h: Q(multiply(phi, h))


def build_dtho(phi: LaurentSeries, basis: KPerpBasis) -> OperatorMatrix:
    """Dual truncated Hankel operator ``Q_theta J(phi h)``; its adjoint has symbol ``phi*``."""
    return operator_from_action(
        dtho_action(phi, basis), basis, basis, phi.l1(),
        dtho_action(star(phi), basis),
        {"builder": "DTHO", "symbol": symbol_hash(phi), "theta": str(basis.theta),
         "nneg": basis.nneg, "man": basis.man, "expansion_order": basis.expansion_order},
    )


def build_dtto(phi: LaurentSeries, basis: KPerpBasis) -> OperatorMatrix:
    """Dual truncated Toeplitz operator ``Q_theta(phi h)``; its adjoint has symbol ``conj(phi)``."""
    return operator_from_action(
        dtto_action(phi, basis), basis, basis, phi.l1(),
        dtto_action(conj(phi), basis),
        {"builder": "DTTO", "symbol": symbol_hash(phi), "theta": str(basis.theta),
         "nneg": basis.nneg, "man": basis.man, "expansion_order": basis.expansion_order},
    )


def shift_action(basis: KPerpBasis) -> Action:
    """``U h = z h + <h, zbar>(conj(theta_0) theta - 1)``."""
    th = basis.space.series
    c = np.conj(basis.theta0) * th - 1

    def act(h):
        return h.shift(1) + c * h[-1]

    return act


def shift_adjoint_action(basis: KPerpBasis) -> Action:
    """``U* h = zbar h + <h, theta>(theta_0 - theta) zbar``."""
    th = basis.space.series
    c = (basis.theta0 - th).shift(-1)

    def act(h):
        return h.shift(-1) + c * h.inner(th)

    return act


def build_compressed_shift(basis: KPerpBasis) -> tuple[OperatorMatrix, OperatorMatrix]:
    """``U`` and ``U*`` from their closed forms, each a separately assembled section."""
    u, us = shift_action(basis), shift_adjoint_action(basis)
    meta = {"theta": str(basis.theta), "nneg": basis.nneg, "man": basis.man}
    U = operator_from_action(u, basis, basis, 1.0, us, {"builder": "U", **meta})
    Us = operator_from_action(us, basis, basis, 1.0, u, {"builder": "U*", **meta})
    return U, Us


def _require_theta0(basis: KPerpBasis) -> complex:
    t0 = basis.theta0
    if t0 == 0:
        raise ValueError("the compressed shift is not invertible when theta_0 = 0")
    return t0


def build_shift_inverse(basis: KPerpBasis) -> tuple[OperatorMatrix, OperatorMatrix]:
    """``U^-1`` and ``(U*)^-1`` in closed form (requires ``theta_0 != 0``).

    On the basis: ``U^-1`` sends ``zbar^k -> zbar^(k+1)``, ``theta -> zbar/conj(theta_0)``,
    ``theta z^(m+1) -> theta z^m``; ``(U*)^-1`` sends ``zbar^(k+1) -> zbar^k``,
    ``zbar -> theta/theta_0``, ``theta z^m -> theta z^(m+1)``.
    """
    t0 = _require_theta0(basis)
    ms = basis.space
    th = ms.series

    def uinv(h):
        g = proj_P(ms.times_theta_bar(h))
        return proj_Q(h).shift(-1) + multiply(th, proj_P(g.shift(-1))) + ZBAR * (g[0] / np.conj(t0))

    def usinv(h):
        g = proj_P(ms.times_theta_bar(h))
        q = proj_Q(h)
        return proj_Q(q.shift(1)) + th * (q[-1] / t0) + multiply(th, g).shift(1)

    nb = max(1.0, 1.0 / abs(t0))
    meta = {"theta": str(basis.theta), "nneg": basis.nneg, "man": basis.man}
    Ui = operator_from_action(uinv, basis, basis, nb, usinv, {"builder": "U^-1", **meta})
    Usi = operator_from_action(usinv, basis, basis, nb, uinv, {"builder": "U*^-1", **meta})
    return Ui, Usi


# -- rank-one operators ------------------------------------------------------------


@dataclass(frozen=True)
class RankOneSpec:
    """``f (x) g``: ``h -> <h, g> f``."""

    left: LaurentSeries
    right: LaurentSeries


def rank_one(spec: RankOneSpec, basis: Basis, col_basis: Basis | None = None) -> OperatorMatrix:
    col_basis = basis if col_basis is None else col_basis
    f, g = spec.left, spec.right
    fc = basis.to_coords(f)
    gc = col_basis.to_coords(g)
    leak = basis.leakage(f, fc) + TAIL_FACTOR * basis.tail * (1 + f.norm())
    err = np.abs(gc) * leak
    return OperatorMatrix(
        np.outer(fc, gc.conj()),
        basis,
        col_basis,
        err,
        f.norm() * g.norm(),
        {"builder": "rank-one", "symbol": symbol_hash(f, g)},
        lambda h: f * h.inner(g),
        lambda h: g * h.inner(f),
    )


# -- defect parameters -------------------------------------------------------------


@dataclass(frozen=True)
class DefectData:
    """Parameters of the rank-two defect attached to one of the shift relations."""

    tag: str
    alpha: LaurentSeries | None = None
    alpha_star: LaurentSeries | None = None
    beta: LaurentSeries | None = None
    eta: LaurentSeries | None = None
    delta: complex = 0j


DEFECT_TAGS = ("defect-HU", "defect-UsHUs", "defect-UHU", "defect-HUs")


def defect_data(tag: str, phi: LaurentSeries, basis: KPerpBasis) -> DefectData:
    """Recompute the defect parameters of ``tag`` from ``(phi, theta)``.

    ``defect-HU``    : H U - U* H
    ``defect-UsHUs`` : H - U* H U*
    ``defect-UHU``   : H - U H U
    ``defect-HUs``   : H U* - U H
    """
    ms = basis.space
    th, t0 = ms.series, ms.theta0
    t0b = np.conj(t0)
    ps = star(phi)
    if tag == "defect-HU":
        w = 1 - t0b * th
        return DefectData(tag, alpha=multiply(phi, w), alpha_star=multiply(ps, w), delta=delta_HU(phi, basis))
    if tag == "defect-UsHUs":
        beta = ms.Q(multiply(conj(phi).shift(1), 1 - t0b * flip_J(th)))
        eta = multiply(phi, th - t0)
        return DefectData(tag, beta=beta, eta=eta, delta=delta_UsHUs(phi, basis))
    if tag == "defect-UHU":
        w = th - t0
        delta = t0b * multiply(multiply(phi, th), ms.star - t0b)[1]
        return DefectData(tag, alpha=multiply(phi, w), alpha_star=multiply(ps, w), delta=delta)
    if tag == "defect-HUs":
        w = (th - t0).shift(-1)
        return DefectData(tag, alpha=multiply(phi, w), alpha_star=multiply(ps, w))
    raise ValueError(f"unknown defect tag {tag!r}; expected one of {DEFECT_TAGS}")


def delta_HU(phi: LaurentSeries, basis: KPerpBasis) -> complex:
    """``phi_1 - theta_0 (phi theta*)_1``."""
    ms = basis.space
    return phi[1] - ms.theta0 * multiply(phi, ms.star)[1]


def delta_UsHUs(phi: LaurentSeries, basis: KPerpBasis) -> complex:
    """``theta_0 [ (J(phi zbar))_0 - theta_0 (conj(theta) J(phi zbar))_0 ]``."""
    ms = basis.space
    jp = flip_J(phi.shift(-1))
    return ms.theta0 * (jp[0] - ms.theta0 * multiply(ms.bar, jp)[0])


# -- O'Toeplitz operators ------------------------------------------------------------


def build_otoeplitz(psi: LaurentSeries, variant: str = "J", k: int = 16, m: int | None = None) -> OperatorMatrix:
    """``B_psi f = P J(psi f)`` (or ``P curlyJ(psi f)``) from ``zbar..zbar^k`` to ``1..z^m``.

    Entry ``(m, k)`` is ``psi_{k-m}`` for ``J`` and ``psi_{k-m-1}`` for ``curlyJ``.
    """
    flip = _flip(variant)
    dom, cod = antianalytic_window(k), hardy_window(k if m is None else m)
    ps = star(psi)
    return operator_from_action(
        lambda f: proj_P(flip(multiply(psi, f))),
        cod, dom, psi.l1(),
        lambda h: proj_Q(flip(multiply(ps, h))),
        {"builder": f"OT[{variant}]", "symbol": symbol_hash(psi), "k": k},
    )


def build_otoeplitz_adjoint(psi: LaurentSeries, variant: str = "J", k: int = 16, m: int | None = None) -> OperatorMatrix:
    """``B_psi* h = Q J(psi* h)`` (or ``Q curlyJ(psi* h)``) from ``1..z^m`` to ``zbar..zbar^k``."""
    flip = _flip(variant)
    dom, cod = hardy_window(k if m is None else m), antianalytic_window(k)
    ps = star(psi)
    return operator_from_action(
        lambda h: proj_Q(flip(multiply(ps, h))),
        cod, dom, psi.l1(),
        lambda f: proj_P(flip(multiply(psi, f))),
        {"builder": f"OT*[{variant}]", "symbol": symbol_hash(psi), "k": k},
    )


def build_Sflat(k: int) -> OperatorMatrix:
    """Multiplication by ``zbar`` on conj(H^2_0): ``zbar^j -> zbar^(j+1)``."""
    w = antianalytic_window(k)
    return operator_from_action(
        lambda f: proj_Q(f.shift(-1)), w, w, 1.0,
        lambda f: proj_Q(f.shift(1)),
        {"builder": "Sflat", "k": k},
    )


def build_shift(n: int) -> OperatorMatrix:
    """The unilateral shift ``S`` on ``1..z^n``."""
    m = build_toeplitz(Z, n)
    m.meta["builder"] = "S"
    return m


def build_backward_shift(n: int) -> OperatorMatrix:
    m = build_toeplitz(ZBAR, n)
    m.meta["builder"] = "S*"
    return m


# -- solutions of the shift equations --------------------------------------------------

EQUATION_KINDS = ("A=U*AU*", "A=UAU", "U*A=AU", "UA=AU*")


def _analytic(name: str, f: LaurentSeries | None) -> LaurentSeries:
    if f is None:
        return LaurentSeries()
    if not f.is_zero() and f.lo < 0:
        raise ValueError(f"{name} must be analytic (no negative Fourier indices), got lowest index {f.lo}")
    return f


def _unused(name: str, f: LaurentSeries | None, kind: str):
    if f is not None and not f.is_zero():
        raise ValueError(f"{name} is not a parameter of the theta_0 = 0 solutions of {kind}")


def build_equation_solution(
    kind: str,
    basis: KPerpBasis,
    eta: LaurentSeries | None = None,
    psi: LaurentSeries | None = None,
    Phi: LaurentSeries | None = None,
    branch: str | None = None,
) -> OperatorMatrix:
    """A solution of one of the homogeneous shift equations, from its explicit formula.

    ``kind`` is one of ``A=U*AU*``, ``A=UAU``, ``U*A=AU``, ``UA=AU*``.  The
    theta_0 = 0 and theta_0 != 0 families differ; ``branch`` ("zero" or
    "nonzero") may be passed to insist on one of them.
    """
    if kind not in EQUATION_KINDS:
        raise ValueError(f"unknown equation kind {kind!r}; expected one of {EQUATION_KINDS}")
    ms = basis.space
    th, ths, t0 = ms.series, ms.star, ms.theta0
    t0b = np.conj(t0)
    zero = t0 == 0
    if branch is not None:
        if branch not in ("zero", "nonzero"):
            raise ValueError(f"branch must be 'zero' or 'nonzero', got {branch!r}")
        if (branch == "zero") != zero:
            raise ValueError(f"branch {branch!r} requested but theta_0 = {t0:.6g}")

    def parts(h):
        q, p = proj_Q(h), proj_P(h)
        return flip_J(q), flip_J(p)

    def T(f):  # theta * f
        return multiply(th, f)

    if kind == "A=U*AU*":
        if zero:
            _unused("eta", eta, kind)
            _unused("Phi", Phi, kind)
            psi = psi if psi is not None else LaurentSeries()
            psib = flip_J(psi)

            def act(h):
                jq, _ = parts(h)
                return T(proj_P(multiply(psib, jq)))
        else:
            eta, psi = _analytic("eta", eta), _analytic("psi", psi)
            _unused("Phi", Phi, kind)
            a = conj(eta).shift(-2)  # zbar^2 conj(eta)
            b = multiply(psi.shift(-1), ths)  # psi zbar theta*

            def act(h):
                jq, jp = parts(h)
                x = multiply(a, jq)
                y = multiply(b, jp)
                F = multiply(a, multiply(ths, jp)) * t0 + proj_Q(x) + T(proj_P(x)) / t0
                G = T(multiply(psi.shift(-1), jq)) + t0 * (t0 * proj_Q(y) + T(proj_P(y)))
                return F + G
    elif kind == "A=UAU":
        if zero:
            _unused("eta", eta, kind)
            _unused("Phi", Phi, kind)
            psi = psi if psi is not None else LaurentSeries()

            def act(h):
                return proj_Q(flip_J(multiply(psi, proj_P(h))))
        else:
            eta, psi = _analytic("eta", eta), _analytic("psi", psi)
            _unused("Phi", Phi, kind)
            a = conj(eta).shift(-1)  # zbar conj(eta)
            b = multiply(psi, ths)

            def act(h):
                jq, jp = parts(h)
                x = multiply(a, jq)
                y = multiply(b, jp)
                F = multiply(multiply(ths, a), jp) + t0b * (proj_Q(x) + t0b * T(proj_P(x)))
                G = t0b * T(multiply(psi, jq)) + proj_Q(y) / t0b + T(proj_P(y))
                return F + G
    elif kind == "U*A=AU":
        eta, psi = _analytic("eta", eta), _analytic("psi", psi)
        a = conj(eta).shift(-1)  # zbar conj(eta) = conj(z eta)
        b = multiply(psi, ths)
        if zero:
            if Phi is None:
                raise ValueError("the theta_0 = 0 solutions of U*A=AU need the parameter Phi")
            Phi = _analytic("Phi", Phi)
            Phiz = Phi.shift(1)

            def act(h):
                _, jp = parts(h)
                return (
                    T(proj_P(flip_J(multiply(Phiz, proj_Q(h)))))
                    + multiply(multiply(a, ths), jp)
                    + T(proj_P(multiply(b, jp)))
                )
        else:
            _unused("Phi", Phi, kind)

            def act(h):
                jq, jp = parts(h)
                y = multiply(b, jp)
                x = multiply(a, jq)
                ap = multiply(multiply(a, ths), jp) + t0 * proj_Q(y) + T(proj_P(y))
                aq = t0b * (T(multiply(psi, jq)) + proj_Q(x) + T(proj_P(x)) / t0)
                return ap + aq
    else:  # UA=AU*
        eta, psi = _analytic("eta", eta), _analytic("psi", psi)
        a = conj(eta).shift(-2)  # zbar^2 conj(eta)
        zpsi = psi.shift(-1)  # zbar psi
        if zero:
            if Phi is None:
                raise ValueError("the theta_0 = 0 solutions of UA=AU* need the parameter Phi")
            Phi = _analytic("Phi", Phi)
            c = multiply(ths, Phi.shift(-1))  # theta* zbar Phi

            def act(h):
                jq, jp = parts(h)
                return T(multiply(zpsi, jq)) + proj_Q(multiply(a, jq)) + proj_Q(multiply(c, jp))
        else:
            _unused("Phi", Phi, kind)
            b = multiply(zpsi, ths)  # psi zbar theta*

            def act(h):
                jq, jp = parts(h)
                x = multiply(a, jq)
                y = multiply(b, jp)
                aq = T(multiply(zpsi, jq)) + proj_Q(x) + t0b * T(proj_P(x))
                ap = t0 * (multiply(multiply(a, ths), jp) + proj_Q(y) / t0b + T(proj_P(y)))
                return aq + ap

    l1 = sum(f.l1() for f in (eta, psi, Phi) if f is not None)
    nb = 3.0 * l1 * (1.0 if zero else max(1.0, 1.0 / abs(t0)))
    meta = {
        "builder": f"solution[{kind}]",
        "kind": kind,
        "branch": "zero" if zero else "nonzero",
        "symbol": symbol_hash(eta, psi, Phi),
        "theta": str(basis.theta),
    }
    return operator_from_action(act, basis, basis, nb, None, meta)
