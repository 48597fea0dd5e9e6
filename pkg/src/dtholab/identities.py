"""Operator identities evaluated as interior residuals of finite sections.

Each check builds both sides as :class:`OperatorMatrix` objects, compares them
on the columns that are interior for both, and returns a
:class:`ResidualReport`.  A check passes when the residual stays below
``tol`` plus the propagated truncation budget (which is exactly zero for
monomial inner functions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import LaurentSeries, conj, flip_J, multiply, proj_P, proj_Q, star
from .modelspace import KPerpBasis
from .operators import (
    DEFECT_TAGS,
    EQUATION_KINDS,
    ZBAR,
    OperatorMatrix,
    RankOneSpec,
    build_backward_shift,
    build_compressed_shift,
    build_dtho,
    build_otoeplitz,
    build_otoeplitz_adjoint,
    build_shift,
    build_shift_inverse,
    build_Sflat,
    build_toeplitz,
    defect_data,
    delta_HU,
    delta_UsHUs,
    identity,
    rank_one,
)

SCHEMA_VERSION = "1.0"
RANK_TOL = 1e-10
EXACT_TOL = 1e-12
APPROX_TOL = 1e-10


# JSON schema every serialized ResidualReport validates against
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "tag", "residual", "interior_cols", "sigma", "pass", "tol", "budget", "rank", "max_rank", "details"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tag": {"type": "string", "minLength": 1},
        "residual": {"type": "number"},
        "interior_cols": {"type": "integer", "minimum": 0},
        "sigma": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "pass": {"type": "boolean"},
        "tol": {"type": "number", "minimum": 0},
        "budget": {"type": "number"},
        "rank": {"type": ["integer", "null"], "minimum": 0},
        "max_rank": {"type": ["integer", "null"], "minimum": 0},
        "details": {"type": "object"},
    },
}

RUN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "array",
    "items": REPORT_SCHEMA,
}


def default_tol(basis) -> float:
    return EXACT_TOL if getattr(basis, "exact", True) else APPROX_TOL


@dataclass
class ResidualReport:
    tag: str
    residual: float
    interior_cols: int
    tol: float
    passed: bool
    sigma: list[float] = field(default_factory=list)
    budget: float = 0.0
    rank: int | None = None
    max_rank: int | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tag": self.tag,
            "residual": _clean(self.residual),
            "interior_cols": int(self.interior_cols),
            "sigma": [_clean(s) for s in self.sigma],
            "pass": bool(self.passed),
            "tol": float(self.tol),
            "budget": _clean(self.budget),
            "rank": self.rank,
            "max_rank": self.max_rank,
            "details": _jsonable(self.details),
        }

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.tag}: residual={self.residual:.3e} cols={self.interior_cols} tol={self.tol:g}"


def _clean(x: float) -> float:
    x = float(x)
    return x if math.isfinite(x) else -1.0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _clean(obj)
    return obj


# -- comparison machinery ---------------------------------------------------------


def common_interior(*ops: OperatorMatrix) -> np.ndarray:
    cols = ops[0].interior()
    for op in ops[1:]:
        cols = np.intersect1d(cols, op.interior())
    return cols


def compare(lhs: OperatorMatrix, rhs: OperatorMatrix) -> tuple[float, np.ndarray, float]:
    """Frobenius residual on the shared interior, the columns used, and the error budget."""
    if lhs.shape != rhs.shape:
        raise ValueError(f"shape mismatch {lhs.shape} vs {rhs.shape}")
    cols = common_interior(lhs, rhs)
    diff = (lhs.entries - rhs.entries)[:, cols]
    budget = float(np.linalg.norm((lhs.col_error + rhs.col_error)[cols]))
    return float(np.linalg.norm(diff)), cols, budget


def singular_values(a: OperatorMatrix, cols: np.ndarray | None = None) -> np.ndarray:
    m = a.entries if cols is None else a.entries[:, cols]
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def numerical_rank(sigma: np.ndarray, rank_tol: float = RANK_TOL, atol: float = 0.0) -> int:
    """Singular values above ``rank_tol * sigma_1``; values at or below ``atol`` are noise."""
    if sigma.size == 0 or sigma[0] <= atol:
        return 0
    return int(np.sum(sigma > max(rank_tol * sigma[0], atol)))


def residual_report(
    tag: str,
    lhs: OperatorMatrix,
    rhs: OperatorMatrix,
    tol: float,
    max_rank: int | None = None,
    rank_tol: float = RANK_TOL,
    details: dict | None = None,
    n_sigma: int = 6,
) -> ResidualReport:
    res, cols, budget = compare(lhs, rhs)
    ok = len(cols) > 0 and res <= tol + budget
    sigma, rank = [], None
    if max_rank is not None:
        s = singular_values(lhs, cols)
        rank = numerical_rank(s, rank_tol, atol=tol)
        sigma = [float(v) for v in s[:n_sigma]]
        ok = ok and rank <= max_rank
    return ResidualReport(tag, res, len(cols), tol, bool(ok), sigma, budget, rank, max_rank, dict(details or {}))


def zero_like(a: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix(
        np.zeros(a.shape, dtype=complex), a.row_basis, a.col_basis,
        np.zeros(a.shape[1]), 0.0, {"builder": "0"},
        lambda h: LaurentSeries(), lambda h: LaurentSeries(),
    )


# -- rank-two defects of the DTHO ----------------------------------------------------


def _ro(f: LaurentSeries, g: LaurentSeries, basis) -> OperatorMatrix:
    return rank_one(RankOneSpec(f, g), basis)


def defect_rhs(tag: str, phi: LaurentSeries, basis: KPerpBasis) -> OperatorMatrix:
    """The explicit rank-two operator that the defect ``tag`` should equal."""
    d = defect_data(tag, phi, basis)
    ms = basis.space
    th = ms.series

    def QJ(f):
        return ms.Q(flip_J(f))

    if tag == "defect-HU":
        return _ro(ZBAR, QJ(d.alpha_star), basis) - _ro(QJ(d.alpha), ZBAR, basis)
    if tag == "defect-UsHUs":
        b = d.beta - th * d.beta.inner(th)
        return _ro(ZBAR, b, basis) + _ro(QJ(d.eta) + ZBAR * d.delta, th, basis)
    if tag == "defect-UHU":
        a = QJ(d.alpha_star)
        a = a - ZBAR * a.inner(ZBAR)
        w = multiply(phi.shift(-1), 1 - np.conj(ms.theta0) * th)
        return _ro(th, a, basis) + _ro(QJ(w) + th * d.delta, ZBAR, basis)
    if tag == "defect-HUs":
        return _ro(th, QJ(d.alpha_star), basis) - _ro(QJ(d.alpha), th, basis)
    raise ValueError(f"unknown defect tag {tag!r}; expected one of {DEFECT_TAGS}")


def defect_lhs(tag: str, H: OperatorMatrix, U: OperatorMatrix, Us: OperatorMatrix) -> OperatorMatrix:
    if tag == "defect-HU":
        return H @ U - Us @ H
    if tag == "defect-UsHUs":
        return H - Us @ H @ Us
    if tag == "defect-UHU":
        return H - U @ H @ U
    if tag == "defect-HUs":
        return H @ Us - U @ H
    raise ValueError(f"unknown defect tag {tag!r}; expected one of {DEFECT_TAGS}")


def check_defect(
    tag: str,
    phi: LaurentSeries,
    basis: KPerpBasis,
    tol: float | None = None,
    rank_tol: float = RANK_TOL,
    rhs_tag: str | None = None,
) -> ResidualReport:
    """Compare a shift defect of the DTHO with its rank-two closed form.

    ``rhs_tag`` pairs the left side of ``tag`` with another tag's right side;
    it exists only as a negative control.
    """
    tol = default_tol(basis) if tol is None else tol
    H = build_dtho(phi, basis)
    U, Us = build_compressed_shift(basis)
    lhs = defect_lhs(tag, H, U, Us)
    rhs = defect_rhs(rhs_tag or tag, phi, basis)
    details = {}
    if tag == "defect-UsHUs":
        # two routes to the scalar: its own formula and theta_0 times the HU scalar
        d1 = delta_UsHUs(phi, basis)
        d2 = basis.theta0 * delta_HU(phi, basis)
        details = {"delta": d1, "delta_cross": d2, "delta_gap": abs(d1 - d2)}
    if rhs_tag:
        details["rhs_tag"] = rhs_tag
    rep = residual_report(tag, lhs, rhs, tol, max_rank=2, rank_tol=rank_tol, details=details)
    if "delta_gap" in details and details["delta_gap"] > tol:
        rep.passed = False
    return rep


def check_unitary_defects(basis: KPerpBasis, tol: float | None = None) -> ResidualReport:
    """``I - U*U = (1-|theta_0|^2) zbar (x) zbar`` and ``I - UU* = (1-|theta_0|^2) theta (x) theta``."""
    tol = default_tol(basis) if tol is None else tol
    U, Us = build_compressed_shift(basis)
    I = identity(basis)
    c = 1 - abs(basis.theta0) ** 2
    th = basis.space.series
    r1 = residual_report("unitary-defect-left", I - Us @ U, _ro(ZBAR, ZBAR, basis) * c, tol)
    r2 = residual_report("unitary-defect-right", I - U @ Us, _ro(th, th, basis) * c, tol)
    res = math.hypot(r1.residual, r2.residual)
    return ResidualReport(
        "unitary-defects", res, min(r1.interior_cols, r2.interior_cols), tol,
        r1.passed and r2.passed, budget=r1.budget + r2.budget,
        details={"left": r1.residual, "right": r2.residual, "coefficient": c},
    )


def check_shift_oracle(basis: KPerpBasis, tol: float | None = None) -> ResidualReport:
    """Closed-form ``U`` against the projection definition ``D_z``, and ``U*`` against ``U^H``."""
    from .operators import build_dtto

    tol = default_tol(basis) if tol is None else tol
    U, Us = build_compressed_shift(basis)
    Dz = build_dtto(LaurentSeries.monomial(1), basis)
    r1 = residual_report("shift-vs-dtto", U, Dz, tol)
    cols = common_interior(U, Dz)
    entry_gap = float(np.abs((U.entries - Dz.entries)[:, cols]).max()) if len(cols) else math.inf
    r2 = residual_report("shift-adjoint", Us, U.adjoint(), tol)
    return ResidualReport(
        "shift-oracle", math.hypot(r1.residual, r2.residual), r1.interior_cols, tol,
        r1.passed and r2.passed and entry_gap <= tol,
        details={"max_entry_gap": entry_gap, "adjoint_residual": r2.residual},
    )


# -- inverses and powers of the compressed shift ------------------------------------


def check_shift_inverses(
    basis: KPerpBasis,
    eta: LaurentSeries,
    psi: LaurentSeries,
    powers=(1, 2, 3),
    tol: float | None = None,
) -> ResidualReport:
    """Powers of ``U``, ``U*`` and their inverses applied to ``zbar conj(eta)`` and ``theta psi``.

    Items: ``U^n(zbar conj eta)``, ``U*^n(theta psi)``, ``U^-n(theta psi)``,
    ``U*^-n(zbar conj eta)`` against their closed forms, plus the basis action
    of ``(U*)^-1`` and a numerical-inverse cross-check.
    """
    tol = default_tol(basis) if tol is None else tol
    t0 = basis.theta0
    if t0 == 0:
        raise ValueError("inverse identities need theta_0 != 0")
    if not eta.is_zero() and eta.lo < 0 or not psi.is_zero() and psi.lo < 0:
        raise ValueError("eta and psi must be analytic")
    ms = basis.space
    th = ms.series
    U, Us = build_compressed_shift(basis)
    Ui, Usi = build_shift_inverse(basis)
    zeb = conj(eta).shift(-1)
    tp = multiply(th, psi)
    items: dict[str, float] = {}

    def run(name, M, f, ref, n):
        v = basis.to_coords(f)
        for _ in range(n):
            v = M.entries @ v
        items[f"{name}[n={n}]"] = float(np.linalg.norm(v - basis.to_coords(ref)))

    for n in powers:
        zn = zeb.shift(n)
        pn = psi.shift(-n)
        run("U^n", U, zeb, proj_Q(zn) + np.conj(t0) * multiply(th, proj_P(zn)), n)
        run("U*^n", Us, tp, t0 * proj_Q(pn) + multiply(th, proj_P(pn)), n)
        run("U^-n", Ui, tp, proj_Q(pn) / np.conj(t0) + multiply(th, proj_P(pn)), n)
        run("U*^-n", Usi, zeb, proj_Q(zn) + multiply(th, proj_P(zn)) / t0, n)
    # basis action of (U*)^-1
    m = min(basis.nneg, basis.man) - 1
    for k in range(1, m):
        items[f"U*^-1 zbar^{k + 1}"] = float(np.linalg.norm(Usi.entries[:, basis.zbar(k + 1)] - basis.to_coords(LaurentSeries.monomial(-k))))
    items["U*^-1 zbar"] = float(np.linalg.norm(Usi.entries[:, basis.zbar(1)] - basis.to_coords(th / t0)))
    for j in range(m - 1):
        items[f"U*^-1 theta z^{j}"] = float(np.linalg.norm(Usi.entries[:, basis.theta_z(j)] - basis.to_coords(th.shift(j + 1))))
    # independent routes: closed-form inverses times the shifts, and a
    # least-squares solve of the finite section itself
    I = identity(basis)
    inv_res = max(compare(Ui @ U, I)[0], compare(Usi @ Us, I)[0], compare(U @ Ui, I)[0], compare(Us @ Usi, I)[0])
    num_gap = 0.0
    for M, Minv, f in ((U, Ui, tp), (Us, Usi, zeb)):
        b = basis.to_coords(f)
        x = np.linalg.lstsq(M.entries, b, rcond=None)[0]
        num_gap = max(num_gap, float(np.linalg.norm(x - Minv.entries @ b)))
    cols = common_interior(U, Us)
    worst = max(items.values())
    details = dict(items)
    details["inverse_products"] = inv_res
    details["numerical_inverse_gap"] = num_gap
    ok = worst <= tol and inv_res <= tol and num_gap <= 1e-8
    return ResidualReport("shift-inverse", worst, len(cols), tol, bool(ok), details=details)


# -- symbols with vanishing HU defect ------------------------------------------------


def make_Ztheta_symbol(theta, d: complex, htilde: LaurentSeries, order: int = 40,
                       basis: KPerpBasis | None = None, tol: float = 1e-12) -> LaurentSeries:
    """``(d z + htilde) / (1 - conj(theta_0) theta)`` with ``htilde`` in ``J(K_theta)``.

    The reciprocal is a Neumann series in ``conj(theta_0) theta`` truncated to
    Taylor degree ``order``.
    """
    from .modelspace import model_space

    ms = basis.space if basis is not None else model_space(theta, None if theta.exact else max(order, 1))
    if not htilde.is_zero():
        if htilde.hi > 0:
            raise ValueError("htilde must be co-analytic to lie in J(K_theta)")
        out = ms.Q(flip_J(htilde)).norm()
        if out > tol:
            raise ValueError(f"htilde is not in J(K_theta): projection residual {out:.3e}")
    num = LaurentSeries({1: d}) + htilde
    t0 = ms.theta0
    if t0 == 0:
        return num
    w = (ms.series * np.conj(t0)).restrict(hi=order)
    total = LaurentSeries.monomial(0)
    term = LaurentSeries.monomial(0)
    r = abs(t0)
    nterms = int(math.ceil(math.log(1e-18 * (1 - r)) / math.log(r))) + 1
    for _ in range(nterms):
        term = multiply(term, w).restrict(hi=order)
        total = total + term
    return multiply(num, total).restrict(hi=order + max(num.hi, 0))


def ztheta_residual(phi: LaurentSeries, basis: KPerpBasis) -> float:
    """Distance of ``phi (1 - conj(theta_0) theta)`` from ``C z + J(K_theta)``."""
    ms = basis.space
    a = multiply(phi, 1 - np.conj(ms.theta0) * ms.series)
    rest = a - LaurentSeries({1: a[1]})
    return ms.Q(flip_J(rest)).norm() + ms.tail * phi.l1()


def intertwining_defect(A: OperatorMatrix, kind: str, basis: KPerpBasis) -> OperatorMatrix:
    U, Us = build_compressed_shift(basis)
    if kind == "U*A=AU":
        return Us @ A - A @ U
    if kind == "UA=AU*":
        return U @ A - A @ Us
    if kind == "A=U*AU*":
        return A - Us @ A @ Us
    if kind == "A=UAU":
        return A - U @ A @ U
    raise ValueError(f"unknown equation kind {kind!r}; expected one of {EQUATION_KINDS}")


def check_intertwining(A: OperatorMatrix, kind: str, basis: KPerpBasis, tol: float | None = None) -> ResidualReport:
    tol = default_tol(basis) if tol is None else tol
    E = intertwining_defect(A, kind, basis)
    rep = residual_report(f"intertwining[{kind}]", E, zero_like(E), tol)
    rep.details["operator"] = A.name
    return rep


# -- characterizations of the DTHO ---------------------------------------------------

# homogeneous equation kind -> (defect tag giving the inhomogeneous right side,
#           vector tested on A, vector tested on A* when theta_0 = 0)
CHARACTERIZATIONS = {
    "A=U*AU*": ("defect-UsHUs", "zbar", "theta"),
    "A=UAU": ("defect-UHU", "theta", "zbar"),
    "U*A=AU": ("defect-HU", "theta", "theta"),
    "UA=AU*": ("defect-HUs", "zbar", "zbar"),
}


def check_characterization(
    kind: str,
    phi: LaurentSeries,
    basis: KPerpBasis,
    perturbation: OperatorMatrix | None = None,
    tol: float | None = None,
) -> ResidualReport:
    """``A = H_phi + perturbation``: (a) A solves the inhomogeneous equation of ``H_phi``;
    (b) the boundary conditions hold exactly when ``A = H_phi``.
    """
    if kind not in CHARACTERIZATIONS:
        raise ValueError(f"unknown characterization {kind!r}; expected one of {sorted(CHARACTERIZATIONS)}")
    tol = default_tol(basis) if tol is None else tol
    tag, vec, adj_vec = CHARACTERIZATIONS[kind]
    H = build_dtho(phi, basis)
    A = H if perturbation is None else H + perturbation
    U, Us = build_compressed_shift(basis)
    lhs = defect_lhs(tag, A, U, Us)
    rhs = defect_rhs(tag, phi, basis)
    eq_res, eq_cols, eq_budget = compare(lhs, rhs)
    eq_ok = len(eq_cols) > 0 and eq_res <= tol + eq_budget

    idx = {"zbar": basis.zbar(1), "theta": basis.theta_z(0)}
    cols = common_interior(A, H)
    conds, slack = {}, {}
    j = idx[vec]
    # a single column: its own truncation error is the budget, interior or not
    conds[f"A {vec}"] = float(np.linalg.norm(A.entries[:, j] - H.entries[:, j]))
    slack[f"A {vec}"] = float(A.col_error[j] + H.col_error[j])
    if basis.theta0 == 0:
        i = idx[adj_vec]
        key = f"A* {adj_vec}"
        conds[key] = float(np.linalg.norm((A.entries[i, cols] - H.entries[i, cols])))
        slack[key] = float(np.linalg.norm((A.col_error + H.col_error)[cols]))
    conds_hold = all(v <= tol + slack[k] for k, v in conds.items())
    # column by column, each against its own truncation error, so that a
    # difference in a slightly leaky column is still seen
    err = A.col_error + H.col_error
    col_diff = np.linalg.norm(A.entries - H.entries, axis=0)
    diff = float(np.linalg.norm(col_diff))
    equal = bool(np.all(col_diff <= tol + err))
    ok = eq_ok and (conds_hold == equal)
    details = {
        "equation_residual": eq_res,
        "conditions": conds,
        "conditions_hold": conds_hold,
        "distance_to_dtho": diff,
        "equals_dtho": equal,
        "kind": kind,
    }
    return ResidualReport(f"char[{kind}]", eq_res, len(eq_cols), tol, bool(ok), budget=eq_budget, details=details)


# -- O'Toeplitz operators ------------------------------------------------------------


def _flip_series(f: LaurentSeries, variant: str) -> LaurentSeries:
    # curlyJ-variant with symbol psi is the J-variant with symbol z psi
    return f if variant == "J" else f.shift(1)


def check_otoeplitz_laws(
    psi: LaurentSeries,
    phi: LaurentSeries,
    k: int = 32,
    tol: float = EXACT_TOL,
    variant: str = "J",
) -> list[ResidualReport]:
    """Brown-Halmos, shift-commutation and product laws for ``B_psi`` (or its curlyJ variant).

    Every law is run whether or not its hypothesis holds; reports record the
    hypothesis, the closed-form obstruction and whether the law held.
    """
    if variant not in ("J", "curlyJ"):
        raise ValueError(f"variant must be 'J' or 'curlyJ', got {variant!r}")
    reports = []
    pre = "ot" if variant == "J" else "otc"
    B = build_otoeplitz(psi, variant, k)
    Bs = build_otoeplitz_adjoint(psi, variant, k)
    S, Sst = build_shift(k), build_backward_shift(k)
    Sf = build_Sflat(k)
    Sf_adj = Sf.adjoint()
    eff = _flip_series(psi, variant)  # J-variant symbol with the same operator

    # Toeplitz structure and the Brown-Halmos identity S* B Sflat = B
    cols = B.interior()
    sub = B.entries[:, cols]
    toeplitz_gap = 0.0
    for i in range(1, sub.shape[0]):
        for jj in range(1, sub.shape[1]):
            if cols[jj] - 1 == cols[jj - 1]:
                toeplitz_gap = max(toeplitz_gap, abs(sub[i, jj] - sub[i - 1, jj - 1]))
    r = residual_report(f"{pre}-brown-halmos", Sst @ B @ Sf, B, tol, details={"toeplitz_gap": toeplitz_gap})
    r.passed = r.passed and toeplitz_gap <= tol
    reports.append(r)
    reports.append(residual_report(f"{pre}-adjoint-brown-halmos", Sf_adj @ Bs @ S, Bs, tol))

    # S B = B Sflat iff the J-symbol has support <= 1
    hyp = eff.is_zero() or eff.hi <= 1
    obstruction = _ro_win(LaurentSeries.monomial(0), proj_Q(flip_J(multiply(star(eff), ZBAR))), B) * -1
    lhs = S @ B - B @ Sf
    r = residual_report(f"{pre}-shift-commute", lhs, obstruction, tol)
    obs = float(np.linalg.norm(obstruction.entries[:, common_interior(lhs, obstruction)]))
    holds = float(np.linalg.norm(lhs.entries[:, lhs.interior()])) <= tol
    r.details.update({"hypothesis": hyp, "obstruction_norm": obs, "law_holds": holds})
    r.passed = r.passed and holds == hyp
    reports.append(r)

    # T_phi B_psi: S*(T B)Sflat - T B = P(zbar phi) (x) QJ(eff* zbar); equals B_{J(phi) psi} when that vanishes
    T = build_toeplitz(phi, k)
    X = T @ B
    hyp = (phi.is_zero() or phi.hi <= 0) or (eff.is_zero() or eff.hi <= 1)
    obstruction = _ro_win(proj_P(phi.shift(-1)), proj_Q(flip_J(multiply(star(eff), ZBAR))), X)
    r = residual_report(f"{pre}-toeplitz-product", Sst @ X @ Sf - X, obstruction, tol)
    target = build_otoeplitz(multiply(flip_J(phi), psi), variant, k)
    diff, dcols, dbud = compare(X, target)
    obs = float(np.linalg.norm(obstruction.entries[:, common_interior(X, obstruction)]))
    holds = diff <= tol + dbud
    r.details.update({"hypothesis": hyp, "obstruction_norm": obs, "law_holds": holds, "product_gap": diff})
    r.passed = r.passed and holds == hyp and (obs <= tol) == hyp
    reports.append(r)

    # B_phi B_psi* = T_{J(phi) psi*} iff P(J eff_phi) (x) P(J eff_psi) = 0
    Bp = build_otoeplitz(phi, variant, k)
    Y = Bp @ Bs
    ephi = _flip_series(phi, variant)
    hyp = (ephi.is_zero() or ephi.lo >= 1) or (eff.is_zero() or eff.lo >= 1)
    obstruction = _ro_win(proj_P(flip_J(ephi)), proj_P(flip_J(eff)), Y)
    r = residual_report(f"{pre}-adjoint-product", Sst @ Y @ S - Y, obstruction, tol)
    target = build_toeplitz(multiply(flip_J(phi), star(psi)), k)
    diff, dcols, dbud = compare(Y, target)
    obs = float(np.linalg.norm(obstruction.entries[:, common_interior(Y, obstruction)]))
    holds = diff <= tol + dbud
    r.details.update({"hypothesis": hyp, "obstruction_norm": obs, "law_holds": holds, "product_gap": diff})
    r.passed = r.passed and holds == hyp and (obs <= tol) == hyp
    reports.append(r)

    # nonzero factors give nonzero products
    if not phi.is_zero() and not psi.is_zero():
        nx = float(np.linalg.norm(X.entries[:, X.interior()]))
        ny = float(np.linalg.norm(Y.entries[:, Y.interior()]))
        reports.append(ResidualReport(
            f"{pre}-nonzero-products", min(nx, ny), len(X.interior()), tol, min(nx, ny) > tol,
            details={"toeplitz_product_norm": nx, "adjoint_product_norm": ny},
        ))
    return reports


def _ro_win(f: LaurentSeries, g: LaurentSeries, like: OperatorMatrix) -> OperatorMatrix:
    return rank_one(RankOneSpec(f, g), like.row_basis, like.col_basis)
