import json
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from loewner.errors import ContourError
from loewner.series import UnivalentCoefficients
from loewner.virasoro import (
    CONTOUR_FACTOR,
    MODE_NORMALIZATION,
    CircleVectorField,
    CoordinatePolynomial,
    bieberbach_functionals,
    commutator_closure,
    gelfand_fuks,
    goluzin_schiffer,
    kirillov_coordinate_operator,
    kirillov_variation,
    koebe_map,
    measured_mode_normalization,
    neretin_generatrix,
    neretin_recursion,
    neretin_symbolic,
    printed_closed_form,
    psi_pairing,
    virasoro_bracket,
    virasoro_mode_bracket,
    witt_bracket,
)

c2, c3, c4, c = sympy.symbols("c_2 c_3 c_4 c")


def fields(K=3, real=False):
    coef = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(lambda p: complex(*p))
    f = st.lists(coef, min_size=2 * K + 1, max_size=2 * K + 1).map(CircleVectorField)
    if real:
        f = f.map(lambda v: CircleVectorField(0.5 * (v.fourier + np.conj(v.fourier[::-1]))))
    return f


def small_map(rng, order=12, scale=0.15):
    a = scale ** np.arange(order) * (rng.standard_normal(order) + 1j * rng.standard_normal(order)) / 2
    a[0] = 1
    return UnivalentCoefficients(a)


def samples(rng, n=20, rmax=0.6):
    return rmax * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


# -- Witt algebra and cocycle ---------------------------------------------------

@pytest.mark.parametrize("m,n", [(1, 2), (2, -2), (-3, 1), (0, 4)])
def test_witt_on_exponentials(m, n):
    b = witt_bracket(CircleVectorField.exp_mode(m), CircleVectorField.exp_mode(n))
    expected = CircleVectorField.exp_mode(m + n, 1j * (n - m))
    assert np.allclose(b.padded(max(b.K, expected.K)).fourier, expected.padded(b.K).fourier)


@pytest.mark.parametrize("m,n", [(1, 2), (-2, 3), (2, -2)])
def test_witt_basis_structure(m, n):
    b = witt_bracket(CircleVectorField.basis(m), CircleVectorField.basis(n))
    assert b.coefficient(m + n) == pytest.approx((n - m) * -1j)


@given(fields(), fields())
def test_witt_antisymmetry(x, y):
    assert np.allclose(witt_bracket(x, y).fourier, -witt_bracket(y, x).fourier)
    assert witt_bracket(x, x).norm() < 1e-12


@given(fields(2), fields(2), fields(2))
def test_jacobi(x, y, z):
    total = (
        witt_bracket(x, witt_bracket(y, z))
        + witt_bracket(y, witt_bracket(z, x))
        + witt_bracket(z, witt_bracket(x, y))
    )
    assert total.norm() < 1e-12


def test_witt_matches_pointwise_derivatives(rng):
    x, y = CircleVectorField.random(rng, 3), CircleVectorField.random(rng, 3)
    th = np.linspace(0, 6, 11)
    direct = x.values(th) * y.derivative().values(th) - x.derivative().values(th) * y.values(th)
    assert np.allclose(witt_bracket(x, y).values(th), direct)


def test_gelfand_fuks_examples():
    assert gelfand_fuks(CircleVectorField.exp_mode(2), CircleVectorField.exp_mode(-2)) == pytest.approx(3j)
    for m in (-1, 0, 1):
        assert gelfand_fuks(CircleVectorField.exp_mode(m), CircleVectorField.exp_mode(-m)) == 0


def test_gelfand_fuks_by_quadrature(rng):
    x, y = CircleVectorField.random(rng, 4), CircleVectorField.random(rng, 4)
    th = 2 * np.pi * np.arange(256) / 256
    d1 = x.derivative()
    d3 = d1.derivative().derivative()
    quad = -np.mean((d1.values(th) + d3.values(th)) * y.values(th)) / 2
    assert gelfand_fuks(x, y) == pytest.approx(quad, abs=1e-12)


@given(fields(real=True))
def test_gelfand_fuks_real_diagonal(x):
    assert abs(gelfand_fuks(x, x)) < 1e-12


@given(fields(), fields(), fields())
def test_cocycle_identity(x, y, z):
    total = (
        gelfand_fuks(witt_bracket(x, y), z)
        + gelfand_fuks(witt_bracket(y, z), x)
        + gelfand_fuks(witt_bracket(z, x), y)
    )
    assert abs(total) < 1e-10
    assert gelfand_fuks(x, y) == pytest.approx(-gelfand_fuks(y, x), abs=1e-12)


def test_mode_normalization_measured():
    for m in (2, 3, 5):
        assert measured_mode_normalization(m) == pytest.approx(MODE_NORMALIZATION)


def test_virasoro_mode_bracket():
    structure, mode, central = virasoro_mode_bracket(2, -2, charge=12)
    assert (structure, mode) == (pytest.approx(-4), 0)
    assert central == pytest.approx(6)
    for m, n in [(1, 2), (3, -1), (-2, 5)]:
        s, k, cen = virasoro_mode_bracket(m, n, charge=7)
        assert s == pytest.approx(n - m) and k == m + n and cen == 0


def test_virasoro_bracket_central_element_commutes(rng):
    x = CircleVectorField.random(rng, 3)
    zero = CircleVectorField.zeros(0)
    field, central = virasoro_bracket((x, 0.3), (zero, 1.0), charge=5)
    assert field.norm() == 0 and central == 0


def test_virasoro_bracket_parts(rng):
    x, y = CircleVectorField.random(rng, 3), CircleVectorField.random(rng, 3)
    field, central = virasoro_bracket((x, 0), (y, 0), charge=12)
    assert np.allclose(field.fourier, witt_bracket(x, y).fourier)
    assert central == pytest.approx(gelfand_fuks(x, y))


# -- Goluzin-Schiffer variation ---------------------------------------------------

@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2, 3])
def test_contour_matches_closed_forms(k, rng):
    f = small_map(rng)
    z = samples(rng)
    contour = goluzin_schiffer(f, CircleVectorField.basis(k), z)
    assert np.max(np.abs(contour / CONTOUR_FACTOR - printed_closed_form(k, f, z))) < 1e-8


def test_contour_koebe_l0():
    z = 0.5 * np.exp(1j * np.linspace(0, 6, 20))
    got = goluzin_schiffer(koebe_map(), CircleVectorField.basis(0), z) / CONTOUR_FACTOR
    assert np.allclose(got, 2 * z**2 / (1 - z) ** 3, atol=1e-10)


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_series_variation_matches_closed_forms(k, rng):
    f = small_map(rng, order=24)
    z = samples(rng, rmax=0.4)
    series = kirillov_variation(f, k)
    assert np.max(np.abs(series(z) - printed_closed_form(k, f, z))) < 1e-10


def test_variation_linear_in_field(rng):
    f = small_map(rng, order=24)
    nu = CircleVectorField.random(rng, 2)
    z = samples(rng, rmax=0.4)
    contour = goluzin_schiffer(f, nu, z) / CONTOUR_FACTOR
    assert np.max(np.abs(kirillov_variation(f, nu)(z) - contour)) < 1e-9


def test_contour_errors(rng):
    f = small_map(rng)
    with pytest.raises(ContourError):
        goluzin_schiffer(f, CircleVectorField.basis(1), [0.95])
    # a truncation that folds: 1 + 4 z has a zero of f' at -1/4
    bad = UnivalentCoefficients([1, 2.0, 0, 0, 0])
    with pytest.raises(ContourError):
        goluzin_schiffer(bad, CircleVectorField.basis(1), [0.1])


def test_commutator_closure(rng):
    f = small_map(rng)
    phi = CircleVectorField.from_modes({1: 0.7, 2: -0.3j, -1: 0.2})
    psi = CircleVectorField.from_modes({0: 0.5, 3: 0.4, -2: 0.1j})
    bracket, expected = commutator_closure(f, phi, psi)
    assert len(bracket) > 4
    assert np.max(np.abs(bracket - expected)) < 1e-6


# -- coordinate operators -----------------------------------------------------------

def _var(i):
    return CoordinatePolynomial.variable(i)


def test_l0_is_weight_operator():
    for n in range(2, 7):
        assert kirillov_coordinate_operator(0, _var(n)) == _var(n).scale(n - 1)


def test_l1_on_c2():
    assert kirillov_coordinate_operator(1, _var(2)) == CoordinatePolynomial.constant(Fraction(1))
    assert kirillov_coordinate_operator(1, _var(3)) == _var(2).scale(2)


def test_coordinate_operators_match_series_variation(rng):
    f = small_map(rng, order=10)
    g = f.normalized()
    cvals = {j: g.c(j) for j in range(1, 11)}
    for k in (0, 1, 2, 3):
        dc = kirillov_variation(f, k).dense(0)
        for n in range(2, 8):
            got = kirillov_coordinate_operator(k, _var(n), order=10).evaluate(cvals)
            assert got == pytest.approx(dc[n], abs=1e-12)


def _monomials(N=8, max_degree=3):
    out = []
    for deg in range(1, max_degree + 1):
        for combo in combinations_with_replacement(range(2, N + 1), deg):
            exps = {}
            for i in combo:
                exps[i] = exps.get(i, 0) + 1
            out.append(CoordinatePolynomial({tuple(exps.items()): Fraction(1)}))
    return out


def test_l1_l2_commutator_on_monomials():
    L = kirillov_coordinate_operator
    for P in _monomials():
        comm = L(1, L(2, P, 8), 8) - L(2, L(1, P, 8), 8)
        assert comm == L(3, P, 8).scale(-1)


@pytest.mark.parametrize("m,n", [(1, 3), (2, 3), (1, 0), (2, 0)])
def test_coordinate_algebra(m, n):
    L = kirillov_coordinate_operator
    for P in _monomials(N=9, max_degree=2):
        comm = L(m, L(n, P, 9), 9) - L(n, L(m, P, 9), 9)
        assert comm == L(m + n, P, 9).scale(m - n)


def test_dropped_terms_counted():
    _, dropped = kirillov_coordinate_operator(2, _var(7), order=7, return_dropped=True)
    assert dropped == 0
    out, dropped = kirillov_coordinate_operator(2, _var(9).times_variable(3), order=7, return_dropped=True)
    assert dropped == 1
    assert out == _var(9)  # c_3 L_2(c_9) needs c_7 d/dc_9 beyond order 7


# -- Neretin polynomials ------------------------------------------------------------

def test_neretin_anchors():
    P = neretin_symbolic(3)
    assert P[0] == 0 and P[1] == 0
    assert sympy.expand(P[2] - c / 2 * (c3 - c2**2)) == 0
    assert sympy.expand(P[3] - 2 * c * (c4 - 2 * c2 * c3 + c2**3)) == 0


def test_neretin_exact_charge():
    P = neretin_recursion(3, charge=12)
    assert all(isinstance(v, Fraction) for v in P[2].terms.values())
    assert P[2].pretty(factor=True) == "6*(c_3 - c_2^2)"


@pytest.mark.parametrize("k", range(2, 9))
def test_neretin_homogeneous(k):
    assert neretin_recursion(8)[k].is_homogeneous(k)


def test_neretin_recursion_relation():
    P = neretin_recursion(7, charge=Fraction(5, 2))
    L = kirillov_coordinate_operator
    for n in range(2, 8):
        for m in range(1, n + 1):
            target = P[n - m].scale(n + m)
            if m == n:
                target = target + CoordinatePolynomial.constant(Fraction(5, 2) * m * (m * m - 1) / 12)
            assert L(m, P[n]) == target


def test_generatrix_matches_recursion(rng):
    P = neretin_recursion(8, charge=1.7)
    for _ in range(20):
        f = small_map(rng, order=12, scale=0.5)
        gen = neretin_generatrix(f, 1.7)
        for k in range(2, 9):
            assert abs(gen.coefficient(k) - P[k].evaluate_map(f)) < 1e-10


def test_generatrix_identity_map():
    gen = neretin_generatrix(UnivalentCoefficients.identity(), 3.0)
    assert np.all(gen.coeffs == 0)


def test_generatrix_p2(rng):
    f = small_map(rng)
    g = f.normalized()
    assert neretin_generatrix(f, 12).coefficient(2) == pytest.approx(6 * (g.c(3) - g.c(2) ** 2))


@settings(max_examples=20)
@given(st.floats(0.2, 3.0))
def test_weight_homogeneity(lam):
    rng = np.random.default_rng(7)
    cvals = {1: 1, **{j: complex(*rng.standard_normal(2)) for j in range(2, 10)}}
    scaled = {j: v * lam ** (j - 1) for j, v in cvals.items()}
    for k, p in enumerate(neretin_recursion(8)):
        assert p.evaluate(scaled) == pytest.approx(lam**k * p.evaluate(cvals), rel=1e-9, abs=1e-12)


def test_polynomial_json_round_trip():
    P = neretin_recursion(5)[5]
    obj = json.loads(json.dumps(P.to_json()))
    assert all(set(item) == {"monomial", "coeff"} for item in obj)
    back = CoordinatePolynomial.from_json(obj)
    cvals = {j: 0.1 * j + 0.2j for j in range(1, 7)}
    assert back.evaluate(cvals) == pytest.approx(P.evaluate(cvals))


def test_neretin_rejects_negative():
    with pytest.raises(ValueError):
        neretin_recursion(-1)


# -- pairing and functionals -------------------------------------------------------

def test_psi_identity_map(rng):
    nu = CircleVectorField.random(rng, 3)
    assert psi_pairing(UnivalentCoefficients.identity(), nu) == 0


def test_psi_single_mode(rng):
    from loewner.series import schwarzian

    f = small_map(rng, order=16, scale=0.3)
    s = schwarzian(f.to_series())
    for k in (-2, -3, -5, 1):
        got = psi_pairing(f, CircleVectorField.exp_mode(k))
        expected = 2 * np.pi * s.coefficient(-k - 2) if -k - 2 >= 0 else 0
        assert got == pytest.approx(expected, abs=1e-12)


def test_bieberbach_koebe_and_identity():
    b = bieberbach_functionals(UnivalentCoefficients.koebe(8))
    assert b.abs_c2 == 2 and b.abs_c3_minus_c2sq == 1
    assert bieberbach_functionals(UnivalentCoefficients.identity()).as_tuple() == (0, 0, 0, 0)


@given(st.floats(0, 2 * np.pi))
def test_bieberbach_rotation_invariance(alpha):
    f = UnivalentCoefficients([1, 0.3 + 0.1j, -0.2, 0.05j, 0.01])
    b0 = bieberbach_functionals(f)
    b1 = bieberbach_functionals(f.rotated(alpha))
    assert b1.abs_c2 == pytest.approx(b0.abs_c2)
    assert b1.abs_c3_minus_c2sq == pytest.approx(b0.abs_c3_minus_c2sq)


def test_bieberbach_rescales_first():
    f = UnivalentCoefficients([2.0, 2.0 * 2, 2.0 * 3, 2.0 * 4])
    assert bieberbach_functionals(f).abs_c3_minus_c2sq == pytest.approx(1)
