"""Norms, spectra and structural tests for DTHO finite sections."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import LaurentSeries, flip_J, multiply, star, sup_norm_estimate
from .inner import InnerFunction, Monomial, is_symmetric
from .modelspace import KPerpBasis
from .identities import (
    EXACT_TOL,
    RANK_TOL,
    ResidualReport,
    common_interior,
    compare,
    default_tol,
    residual_report,
    ztheta_residual,
)
from .operators import OperatorMatrix, RankOneSpec, build_compressed_shift, build_dtho, rank_one

MONOTONE_TOL = 1e-12


def operator_norm(A: OperatorMatrix | np.ndarray, cols=None) -> float:
    """Largest singular value (optionally of a column subset)."""
    m = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A)
    if cols is not None:
        m = m[:, cols]
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def spectrum(A: OperatorMatrix | np.ndarray, decimals: int = 12) -> list[complex]:
    """Eigenvalues sorted by modulus, then argument."""
    m = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A)
    ev = np.linalg.eigvals(m)
    # round the keys so that ties broken by noise sort the same way every run
    key = sorted(range(len(ev)), key=lambda i: (round(abs(ev[i]), decimals), round(float(np.angle(ev[i])), decimals), i))
    return [complex(ev[i]) for i in key]


def _grid_for(f: LaurentSeries, minimum: int = 4096) -> int:
    return max(minimum, 2 * f.bandwidth + 1)


# -- norm equality ---------------------------------------------------------------


@dataclass
class ConvergenceTable:
    rows: list[tuple[int, float, float, float]] = field(default_factory=list)
    target_bound: float = 0.0

    @property
    def norms(self) -> list[float]:
        return [r[1] for r in self.rows]

    @property
    def gaps(self) -> list[float]:
        return [r[3] for r in self.rows]

    def is_monotone(self, tol: float = MONOTONE_TOL) -> bool:
        n = self.norms
        return all(b >= a - tol for a, b in zip(n, n[1:]))

    def gaps_shrink(self, tol: float = MONOTONE_TOL) -> bool:
        g = self.gaps
        return all(b <= a + tol for a, b in zip(g, g[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("N,norm,target,gap\n")
        for n, nm, t, g in self.rows:
            buf.write(f"{n},{nm:.17g},{t:.17g},{g:.17g}\n")
        return buf.getvalue()


def norm_convergence_study(phi: LaurentSeries, theta: InnerFunction, Ns, grid_size: int | None = None) -> ConvergenceTable:
    """Finite-section norms of the DTHO on nested bases against ``||phi||_inf``."""
    target, err = sup_norm_estimate(phi, grid_size or _grid_for(phi))
    table = ConvergenceTable(target_bound=err)
    for n in sorted(int(n) for n in Ns):
        H = build_dtho(phi, KPerpBasis(theta, n, n))
        nm = operator_norm(H)
        table.rows.append((n, nm, target, target - nm))
    return table


# -- product lower bound ------------------------------------------------------------


def product_lower_bound_check(pairs, basis: KPerpBasis, grid_size: int | None = None) -> ResidualReport:
    """``||sum H_phi_i H_psi_i|| >= ||sum J(phi_i) psi_i||_inf - eps(N)``.

    The left side is the largest singular value over the interior columns of the
    product section; ``eps(N)`` is ``sum bandwidth(phi) l1(phi) l1(psi)`` over the
    interior width.
    """
    if not pairs:
        raise ValueError("need at least one (phi, psi) pair")
    total = None
    symbol = LaurentSeries()
    eps_num = 0.0
    for phi, psi in pairs:
        P = build_dtho(phi, basis) @ build_dtho(psi, basis)
        total = P if total is None else total + P
        symbol = symbol + multiply(flip_J(phi), psi)
        eps_num += max(phi.bandwidth, 1) * phi.l1() * psi.l1()
    cols = total.interior()
    width = max(len(cols), 1)
    eps = eps_num / width
    lhs = operator_norm(total, cols)
    bound, bound_err = sup_norm_estimate(symbol, grid_size or _grid_for(symbol))
    shortfall = max(0.0, bound - eps - lhs)
    return ResidualReport(
        "product-lower-bound", shortfall, len(cols), eps, lhs >= bound - eps,
        details={"product_norm": lhs, "sup_bound": bound, "sup_bound_error": bound_err, "eps": eps},
    )


# -- rank-one product defect and its consequences -----------------------------------


def _check_product_hypotheses(phi: LaurentSeries, psi: LaurentSeries, basis: KPerpBasis, tol: float):
    if basis.theta0 != 0:
        raise ValueError("the rank-one product identity needs theta_0 = 0")
    if not is_symmetric(basis.theta):
        raise ValueError("the rank-one product identity needs a symmetric inner function")
    for name, f in (("phi", phi), ("phi*", star(phi)), ("psi", psi), ("psi*", star(psi))):
        r = ztheta_residual(f, basis)
        if r > tol:
            raise ValueError(f"{name} is not in Z_theta (distance {r:.3e})")


def rank_one_product_rhs(phi: LaurentSeries, psi: LaurentSeries, basis: KPerpBasis) -> OperatorMatrix:
    """``Q_theta J(phi theta) (x) Q_theta J(psi* theta)``."""
    ms = basis.space
    th = ms.series
    f = ms.Q(flip_J(multiply(phi, th)))
    g = ms.Q(flip_J(multiply(star(psi), th)))
    return rank_one(RankOneSpec(f, g), basis)


def product_defect(phi: LaurentSeries, psi: LaurentSeries, basis: KPerpBasis) -> OperatorMatrix:
    """``H_phi H_psi - U* H_phi H_psi U``."""
    U, Us = build_compressed_shift(basis)
    P = build_dtho(phi, basis) @ build_dtho(psi, basis)
    return P - Us @ P @ U


def check_rank_one_product(phi: LaurentSeries, psi: LaurentSeries, basis: KPerpBasis,
                           tol: float | None = None, rank_tol: float = RANK_TOL) -> ResidualReport:
    tol = default_tol(basis) if tol is None else tol
    _check_product_hypotheses(phi, psi, basis, max(tol, 1e-12))
    return residual_report(
        "rank-one-product", product_defect(phi, psi, basis), rank_one_product_rhs(phi, psi, basis),
        tol, max_rank=1, rank_tol=rank_tol,
    )


def brown_halmos_product_test(phi: LaurentSeries, psi: LaurentSeries, basis: KPerpBasis,
                              tol: float | None = None) -> ResidualReport:
    """Size of ``H_phi H_psi - U* H_phi H_psi U``; zero only when a symbol vanishes."""
    tol = default_tol(basis) if tol is None else tol
    _check_product_hypotheses(phi, psi, basis, max(tol, 1e-12))
    D = product_defect(phi, psi, basis)
    cols = D.interior()
    nrm = float(np.linalg.norm(D.entries[:, cols]))
    expect_zero = phi.is_zero() or psi.is_zero()
    ok = (nrm <= tol) == expect_zero and len(cols) > 0
    return ResidualReport(
        "brown-halmos-product", nrm, len(cols), tol, ok,
        details={"defect_norm": nrm, "expected_zero": expect_zero},
    )


def commutation_test(phi: LaurentSeries, psi: LaurentSeries, basis: KPerpBasis,
                     tol: float | None = None) -> ResidualReport:
    """Commutator ``C = H_phi H_psi - H_psi H_phi``.

    Also checks ``C - U* C U`` against the difference of the two rank-one
    product defects.  When ``psi`` is a multiple of ``phi`` the commutator must vanish.
    """
    tol = default_tol(basis) if tol is None else tol
    _check_product_hypotheses(phi, psi, basis, max(tol, 1e-12))
    Hf, Hp = build_dtho(phi, basis), build_dtho(psi, basis)
    C = Hf @ Hp - Hp @ Hf
    U, Us = build_compressed_shift(basis)
    lhs = C - Us @ C @ U
    rhs = rank_one_product_rhs(phi, psi, basis) - rank_one_product_rhs(psi, phi, basis)
    id_res, id_cols, id_budget = compare(lhs, rhs)
    cols = C.interior()
    nrm = float(np.linalg.norm(C.entries[:, cols]))
    proportional = _proportional(phi, psi)
    ok = id_res <= tol + id_budget and (nrm <= tol if proportional else True)
    return ResidualReport(
        "commutation", nrm, len(cols), tol, bool(ok),
        details={
            "commutator_norm": nrm,
            "proportional": proportional,
            "defect_identity_residual": id_res,
            "rank_one_difference_norm": float(np.linalg.norm(rhs.entries[:, id_cols])),
        },
    )


def _proportional(f: LaurentSeries, g: LaurentSeries, tol: float = 1e-12) -> bool:
    if f.is_zero() or g.is_zero():
        return True
    lo, hi = min(f.lo, g.lo), max(f.hi, g.hi)
    a, b = f.dense(lo, hi), g.dense(lo, hi)
    return float(np.linalg.norm(np.outer(a, b) - np.outer(b, a))) <= tol * (1 + np.linalg.norm(a) * np.linalg.norm(b))


# -- hyponormality ---------------------------------------------------------------


def hyponormality_analysis(phi: LaurentSeries, basis: KPerpBasis, tol: float | None = None,
                           n_random: int = 8, seed: int = 0) -> ResidualReport:
    """``||H* f*|| = ||H f||`` on interior vectors when ``theta* = theta``.

    With real Taylor coefficients every basis vector is fixed by ``star``, so
    ``f*`` has the conjugated coordinates of ``f``.  The check runs over each
    interior basis vector and a few random interior combinations; the
    self-commutator is reported as a diagnostic only.
    """
    if not is_symmetric(basis.theta):
        raise ValueError("the star-norm identity needs a symmetric inner function")
    tol = default_tol(basis) if tol is None else tol
    H = build_dtho(phi, basis)
    Ha = H.adjoint()
    cols = common_interior(H, Ha)
    gaps = []
    for j in cols:
        gaps.append(abs(np.linalg.norm(Ha.entries[:, j]) - np.linalg.norm(H.entries[:, j])))
    rng = np.random.default_rng(seed)
    for _ in range(n_random if len(cols) else 0):
        v = np.zeros(len(basis), dtype=complex)
        v[cols] = rng.standard_normal(len(cols)) + 1j * rng.standard_normal(len(cols))
        v /= np.linalg.norm(v)
        gaps.append(abs(np.linalg.norm(Ha.entries @ v.conj()) - np.linalg.norm(H.entries @ v)))
    worst = max(gaps) if gaps else math.inf
    budget = float(max(H.col_error[cols].max(initial=0.0), Ha.col_error[cols].max(initial=0.0)))
    comm = Ha @ H - H @ Ha
    ccols = comm.interior()
    block = comm.entries[np.ix_(ccols, ccols)]
    herm = (block + block.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(herm)[0]) if len(ccols) else 0.0
    return ResidualReport(
        "hyponormality", worst, len(cols), tol, worst <= tol + budget and len(cols) > 0, budget=budget,
        details={
            "self_commutator_norm": float(np.linalg.norm(comm.entries[:, ccols])),
            "self_commutator_min_eig": min_eig,
        },
    )


# -- symbol recovery ------------------------------------------------------------


@dataclass
class RecoveredSymbol:
    symbol: LaurentSeries
    inconsistency: float
    residual: float
    consistent: bool
    covered: tuple[int, int]


def recover_symbol(A: OperatorMatrix, theta: InnerFunction | None = None, tol: float = EXACT_TOL) -> RecoveredSymbol:
    """Read the symbol off a DTHO section over ``K_{z^n}^perp``.

    Entries: ``<H zbar^k, zbar^j> = phi_{j+k}``, ``<H theta z^m, zbar^j> = phi_{j-m-n}``,
    ``<H zbar^k, theta z^m'> = phi_{k-n-m'}``, ``<H theta z^m, theta z^m'> = phi_{-2n-m-m'}``.
    Each coefficient is the mean of its entries; ``inconsistency`` is the largest
    spread among entries that should agree.
    """
    basis = A.row_basis
    if not isinstance(basis, KPerpBasis) or not isinstance(A.col_basis, KPerpBasis):
        raise ValueError("symbol recovery needs a section over a KPerpBasis")
    theta = basis.theta if theta is None else theta
    if not isinstance(theta, Monomial):
        raise ValueError("symbol recovery is only defined for theta = z^n")
    n, N, M = theta.n, basis.nneg, basis.man
    k = np.arange(1, N + 1)
    m = np.arange(M)
    idx = np.empty(A.shape, dtype=int)
    idx[:N, :N] = k[:, None] + k[None, :]
    idx[:N, N:] = k[:, None] - m[None, :] - n
    idx[N:, :N] = k[None, :] - n - m[:, None]
    idx[N:, N:] = -2 * n - m[:, None] - m[None, :]
    flat_idx = idx.ravel()
    vals = A.entries.ravel()
    order = np.argsort(flat_idx, kind="stable")
    flat_idx, vals = flat_idx[order], vals[order]
    keys, starts = np.unique(flat_idx, return_index=True)
    coeffs = {}
    spread = 0.0
    sq = 0.0
    for key, a, b in zip(keys, starts, list(starts[1:]) + [len(vals)]):
        group = vals[a:b]
        mean = group.mean()
        coeffs[int(key)] = mean
        sq += float(np.sum(np.abs(group - mean) ** 2))
        if len(group) > 1:
            spread = max(spread, float(np.abs(group[:, None] - group[None, :]).max()))
    sym = LaurentSeries({kk: v for kk, v in coeffs.items() if abs(v) > 0})
    return RecoveredSymbol(sym, spread, math.sqrt(sq), spread <= tol, (int(keys[0]), int(keys[-1])))
