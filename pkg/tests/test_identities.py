import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtholab.fourier import LaurentSeries, star
from dtholab.inner import FiniteBlaschke, Monomial
from dtholab.modelspace import KPerpBasis
from dtholab.operators import (
    DEFECT_TAGS,
    EQUATION_KINDS,
    RankOneSpec,
    build_dtho,
    build_equation_solution,
    rank_one,
)
from dtholab.identities import (
    CHARACTERIZATIONS,
    REPORT_SCHEMA,
    RUN_SCHEMA,
    check_characterization,
    check_defect,
    check_intertwining,
    check_shift_inverses,
    check_otoeplitz_laws,
    check_shift_oracle,
    check_unitary_defects,
    defect_rhs,
    make_Ztheta_symbol,
    numerical_rank,
    ztheta_residual,
)

import oracles
from helpers import B05, Z2, Z3, banded, series

ZB = series(zbar1=1)


def oracle_lhs(tag, phi, theta, nneg, man, pad=10):
    """The defect built from quadrature sections on a padded window, cut back to nneg x man."""
    L = max(nneg, man) + pad
    H = oracles.dtho_matrix(phi, theta, L, L)
    U = oracles.dtto_matrix(series(z1=1), theta, L, L)
    Us = U.conj().T
    lhs = {
        "defect-HU": H @ U - Us @ H,
        "defect-UsHUs": H - Us @ H @ Us,
        "defect-UHU": H - U @ H @ U,
        "defect-HUs": H @ Us - U @ H,
    }[tag]
    keep = list(range(nneg)) + [L + m for m in range(man)]
    return lhs[np.ix_(keep, keep)]


# -- rank-two defects -----------------------------------------------------------------


def test_defect_rhs_examples():
    b = KPerpBasis(Z2, 6, 6)
    assert not defect_rhs("defect-HU", series(z1=1), b).entries.any()
    R = defect_rhs("defect-HU", series(z3=1), b).entries
    e = np.eye(12)
    ref = np.outer(e[b.zbar(1)], e[b.zbar(3)]) - np.outer(e[b.zbar(3)], e[b.zbar(1)])
    np.testing.assert_allclose(R, ref, atol=1e-15)
    assert np.linalg.matrix_rank(R) == 2
    for tag in DEFECT_TAGS:
        assert not defect_rhs(tag, LaurentSeries(), b).entries.any()
    with pytest.raises(ValueError):
        defect_rhs("defect-XY", series(z1=1), b)


@pytest.mark.parametrize("tag", DEFECT_TAGS)
@pytest.mark.parametrize("theta", [Z2, Z3])
def test_defect_rhs_matches_quadrature_lhs(tag, theta):
    phi = series(z2=1, zbar1=2, c0=0.5j)
    b = KPerpBasis(theta, 12, 12)
    ref = oracle_lhs(tag, phi, theta, 12, 12)
    np.testing.assert_allclose(defect_rhs(tag, phi, b).entries, ref, atol=1e-11)


@given(st.sampled_from(DEFECT_TAGS), banded(-3, 3), st.integers(1, 4))
def test_defects_exact_mode(tag, phi, n):
    rep = check_defect(tag, phi, KPerpBasis(Monomial(n), 16, 16))
    assert rep.passed, rep
    assert rep.residual < 1e-12 and rep.budget <= 1e-13 * (1 + phi.l1())
    assert rep.rank <= 2


@pytest.mark.parametrize("tag", DEFECT_TAGS)
@pytest.mark.parametrize("theta", [B05, FiniteBlaschke((0.3j, -0.2))])
def test_defects_blaschke(tag, theta):
    rep = check_defect(tag, series(z1=1, zbar2=0.5), KPerpBasis(theta, 24, 24))
    assert rep.passed, rep
    assert rep.residual < 1e-10 + rep.budget


def test_defect_examples_from_contract():
    rep = check_defect("defect-UsHUs", series(z2=1, zbar1=2), KPerpBasis(Z3, 32, 32))
    assert rep.passed and rep.residual < 1e-12 and rep.rank <= 2
    assert rep.details["delta"] == 0  # theta_0 = 0 reduction
    rep = check_defect("defect-HUs", series(z1=1), KPerpBasis(B05, 32, 32))
    assert rep.passed and rep.residual < 1e-10 + rep.budget
    rep = check_defect("defect-HU", LaurentSeries(), KPerpBasis(Z2, 8, 8))
    assert rep.residual == 0 and rep.rank == 0


def test_delta_two_routes_agree():
    rep = check_defect("defect-UsHUs", series(z1=1, zbar1=1, z2=0.3), KPerpBasis(B05, 32, 32))
    assert rep.details["delta_gap"] < 1e-12
    assert abs(rep.details["delta"]) > 1e-3


def test_mismatched_rhs_is_detected():
    rep = check_defect("defect-HU", series(z3=1, zbar1=2), KPerpBasis(Z3, 16, 16), rhs_tag="defect-UHU")
    assert not rep.passed


def test_numerical_rank():
    assert numerical_rank(np.array([])) == 0
    assert numerical_rank(np.array([1.0, 1e-3, 1e-12])) == 2
    assert numerical_rank(np.array([1e-16, 1e-17]), atol=1e-12) == 0


# -- compressed shift ---------------------------------------------------------------------


def test_unitary_defects():
    rep = check_unitary_defects(KPerpBasis(Z2, 32, 32))
    assert rep.passed and rep.residual == 0 and rep.details["coefficient"] == 1
    rep = check_unitary_defects(KPerpBasis(B05, 32, 32))
    assert rep.passed and rep.residual < 1e-10
    assert rep.details["coefficient"] == pytest.approx(0.75, abs=1e-15)
    assert check_unitary_defects(KPerpBasis(Monomial(5), 8, 8)).residual == 0


@pytest.mark.parametrize("theta", [Z2, Z3, B05, FiniteBlaschke((0.6j,))])
def test_shift_oracle(theta):
    rep = check_shift_oracle(KPerpBasis(theta, 24, 24))
    assert rep.passed
    assert rep.details["max_entry_gap"] < 1e-12


def test_shift_inverses():
    b = KPerpBasis(B05, 32, 32)
    rep = check_shift_inverses(b, series(c0=1, z1=0.5), series(c0=1, z2=-1))
    assert rep.passed, rep.details
    assert rep.residual < 1e-10
    rep = check_shift_inverses(b, series(c0=1), series(c0=1), powers=(1,))
    assert rep.details["U*^-1 zbar"] < 1e-12
    assert rep.details["U^n[n=1]"] < 1e-12 and rep.details["U*^n[n=1]"] < 1e-12
    with pytest.raises(ValueError):
        check_shift_inverses(KPerpBasis(Z2, 8, 8), series(c0=1), series(c0=1))
    with pytest.raises(ValueError):
        check_shift_inverses(b, series(zbar1=1), series(c0=1))


# -- symbols with vanishing HU defect ----------------------------------------------------------


def test_make_Ztheta_symbol():
    assert make_Ztheta_symbol(Z2, 1, LaurentSeries()) == series(z1=1)
    assert make_Ztheta_symbol(Z3, 0, series(zbar2=1)) == series(zbar2=1)
    phi = make_Ztheta_symbol(B05, 1, LaurentSeries(), order=40)
    th = LaurentSeries.from_array(0, oracles.taylor_coefficients(B05, 80))
    back = oracles.convolve(phi, 1 - 0.5 * th)
    back = LaurentSeries({k: v for k, v in back.items() if k <= 41})
    assert (back - series(z1=1)).norm() < 1e-10
    with pytest.raises(ValueError):
        make_Ztheta_symbol(Z2, 1, series(zbar3=1))
    with pytest.raises(ValueError):
        make_Ztheta_symbol(Z2, 1, series(z1=1))


@given(st.integers(2, 5), st.data())
def test_Ztheta_members_intertwine(n, data):
    theta = Monomial(n)
    h = data.draw(banded(-(n - 1), 0))
    h2 = data.draw(banded(-(n - 1), 0))
    # phi and phi* both in Z_theta
    phi = make_Ztheta_symbol(theta, 1.5, h)
    b = KPerpBasis(theta, 16, 16)
    assert ztheta_residual(phi, b) < 1e-14
    if ztheta_residual(star(phi), b) < 1e-14:
        rep = check_intertwining(build_dtho(phi, b), "U*A=AU", b)
        assert rep.passed and rep.residual < 1e-12
    del h2


def test_intertwining_non_member():
    b = KPerpBasis(Z2, 16, 16)
    rep = check_intertwining(build_dtho(series(z1=1), b), "U*A=AU", b)
    assert rep.residual < 1e-12
    rep = check_intertwining(build_dtho(series(z3=1), b), "U*A=AU", b)
    expected = np.linalg.norm(defect_rhs("defect-HU", series(z3=1), b).entries)
    assert rep.residual == pytest.approx(expected, abs=1e-12)
    assert rep.residual == pytest.approx(np.sqrt(2), abs=1e-10) and not rep.passed


@pytest.mark.parametrize("kind", EQUATION_KINDS)
@pytest.mark.parametrize("theta", [Z2, B05])
def test_solutions_satisfy_equations(kind, theta):
    b = KPerpBasis(theta, 24, 24)
    kw = {"psi": series(c0=1, z1=0.5)}
    if theta.exact and kind in ("U*A=AU", "UA=AU*"):
        kw["Phi"] = series(c0=1, z1=-1)
    elif not theta.exact and kind in ("A=U*AU*", "A=UAU"):
        kw["eta"] = series(c0=0.5, z2=1)
    A = build_equation_solution(kind, b, **kw)
    assert np.linalg.norm(A.entries) > 0.5
    rep = check_intertwining(A, kind, b, tol=1e-10)
    assert rep.passed, rep


# -- characterizations ---------------------------------------------------------------------------


def _homogeneous(kind, b):
    kw = {"psi": series(c0=1)}
    if b.theta0 == 0 and kind in ("U*A=AU", "UA=AU*"):
        kw["Phi"] = series(c0=1)
    return build_equation_solution(kind, b, **kw)


@pytest.mark.parametrize("which", sorted(CHARACTERIZATIONS))
@pytest.mark.parametrize("theta", [Z2, B05])
def test_characterizations_both_directions(which, theta):
    b = KPerpBasis(theta, 24, 24)
    phi = series(z1=1, zbar1=2)
    rep = check_characterization(which, phi, b)
    assert rep.passed and rep.details["conditions_hold"] and rep.details["equals_dtho"]
    G = _homogeneous(which, b)
    rep = check_characterization(which, phi, b, perturbation=G)
    assert rep.passed, rep.details
    assert not rep.details["conditions_hold"] and not rep.details["equals_dtho"]


def test_characterization_boundary_gap_equals_perturbation_column():
    b = KPerpBasis(B05, 24, 24)
    G = build_equation_solution("A=U*AU*", b, psi=series(c0=1))
    rep = check_characterization("A=U*AU*", series(z1=1), b, perturbation=G)
    gap = rep.details["conditions"]["A zbar"]
    assert gap == pytest.approx(np.linalg.norm(G.entries[:, b.zbar(1)]), abs=1e-12)
    assert gap > 0


def test_characterization_adjoint_condition_detects():
    # theta = z^2, U*A = AU: a Phi-perturbation leaves A theta alone but moves A* theta
    b = KPerpBasis(Z2, 16, 16)
    G = build_equation_solution("U*A=AU", b, Phi=series(c0=1))
    rep = check_characterization("U*A=AU", series(z1=1), b, perturbation=G)
    conds = rep.details["conditions"]
    assert rep.passed
    assert conds["A* theta"] > 0.5 or conds["A theta"] > 0.5
    assert not rep.details["equals_dtho"]


def test_unknown_characterization():
    with pytest.raises(ValueError):
        check_characterization("A=A", series(z1=1), KPerpBasis(Z2, 4, 4))


# -- O'Toeplitz laws ----------------------------------------------------------------------------


def _by_tag(reports):
    return {r.tag.split("-", 1)[1]: r for r in reports}


@given(banded(-3, 3), banded(-3, 3), st.sampled_from(["J", "curlyJ"]))
def test_otoeplitz_laws_consistent(psi, phi, variant):
    for r in check_otoeplitz_laws(psi, phi, k=24, variant=variant):
        assert r.passed, (r.tag, r.details)


@given(banded(-3, 3), st.sampled_from(["J", "curlyJ"]))
def test_otoeplitz_brown_halmos_exact(psi, variant):
    r = _by_tag(check_otoeplitz_laws(psi, series(c0=1), k=24, variant=variant))["brown-halmos"]
    assert r.residual <= r.budget and r.details["toeplitz_gap"] == 0


@pytest.mark.parametrize("variant", ["J", "curlyJ"])
def test_shift_commutation_characterized_by_top_index(variant):
    off = 0 if variant == "J" else 1
    for top in range(-4, 4):
        psi = LaurentSeries({top: 1.0, top - 2: 0.5})
        r = _by_tag(check_otoeplitz_laws(psi, LaurentSeries(), k=24, variant=variant))["shift-commute"]
        assert r.details["law_holds"] == (top + off <= 1)


def test_toeplitz_product_examples():
    r = _by_tag(check_otoeplitz_laws(series(zbar1=1), series(zbar1=1), k=16))["toeplitz-product"]
    assert r.details["law_holds"] and r.details["product_gap"] < 1e-15
    r = _by_tag(check_otoeplitz_laws(series(z2=1), series(z1=1), k=16))["toeplitz-product"]
    assert not r.details["hypothesis"] and not r.details["law_holds"]
    assert r.details["obstruction_norm"] == pytest.approx(1.0)
    assert r.passed


def test_otoeplitz_reports_validate():
    reps = check_otoeplitz_laws(series(zbar1=1, c0=2), series(zbar2=1), k=12)
    jsonschema.validate([r.to_json() for r in reps], RUN_SCHEMA)
    with pytest.raises(ValueError):
        check_otoeplitz_laws(series(c0=1), series(c0=1), variant="K")


# -- serialization ------------------------------------------------------------------------------


def test_report_json_schema():
    b = KPerpBasis(B05, 16, 16)
    reps = [
        check_defect("defect-UsHUs", series(z1=1 + 1j), b),
        check_unitary_defects(b),
        check_characterization("A=UAU", series(z1=1), b),
    ]
    for r in reps:
        doc = json.loads(json.dumps(r.to_json()))
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert doc["schema_version"] == "1.0"
    bad = dict(reps[0].to_json(), extra=1)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, REPORT_SCHEMA)


def test_rank_one_helper_matches_outer_product():
    b = KPerpBasis(Z3, 5, 5)
    f, g = series(zbar2=1, z3=2j), series(zbar1=1j)
    R = rank_one(RankOneSpec(f, g), b).entries
    np.testing.assert_allclose(R, np.outer(b.to_coords(f), b.to_coords(g).conj()))
