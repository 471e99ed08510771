import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loewner.driving import (
    BoundaryDensity,
    ConstantUnit,
    LaplacianGrowth,
    SlitKernel,
    SmoothDensity,
    herglotz_from_density,
)
from loewner.errors import InvalidDriverError, OrderMismatchError, SingularityError
from loewner.evolution import (
    ChainState,
    coefficient_rhs,
    evolve_chain,
    hamiltonian_residual,
    limit_coefficients,
    recover_f_limit,
    solve_lkord,
    stationary_coefficients,
    step_halving_error,
)
from loewner.series import TruncatedSeries, UnivalentCoefficients

COS = SmoothDensity(BoundaryDensity.from_modes({0: 2, 1: 0.5}))


def _p(coeffs, order):
    c = np.zeros(order + 1, dtype=complex)
    c[: len(coeffs)] = coeffs
    return TruncatedSeries(c, order)


def test_rhs_unit_p_is_diagonal():
    f = UnivalentCoefficients([1, 0.3, -0.2j, 0.1])
    rhs = coefficient_rhs(ChainState(0, f), _p([1], 4))
    assert np.allclose(rhs, np.arange(1, 5) * f.a)


def test_rhs_hand_convolution():
    f = UnivalentCoefficients.identity(4)
    rhs = coefficient_rhs(ChainState(0, f), _p([1, 0.5], 4))
    assert np.allclose(rhs, [1, 0.5, 0, 0])


@given(st.lists(st.complex_numbers(max_magnitude=1), min_size=3, max_size=3))
def test_rhs_first_coefficient_is_a1(tail):
    f = UnivalentCoefficients([1.7, *tail])
    p = _p([1, *tail], 4)
    assert coefficient_rhs(ChainState(0, f), p)[0] == pytest.approx(1.7)


def test_rhs_errors():
    f = UnivalentCoefficients.identity(4)
    with pytest.raises(InvalidDriverError):
        coefficient_rhs(ChainState(0, f), _p([0.5], 4))
    with pytest.raises(OrderMismatchError):
        coefficient_rhs(ChainState(0, f), _p([1], 6))


def test_constant_unit_exact():
    states = evolve_chain(UnivalentCoefficients.identity(), ConstantUnit(), 1.0)
    assert len(states) == 11
    a = states[-1].f.a
    assert a[0] == pytest.approx(math.e, rel=1e-13)
    assert np.all(a[1:] == 0)


def test_unit_driver_scales_each_coefficient():
    f0 = UnivalentCoefficients([1, 0.2, 0.05, 0.01])
    a = evolve_chain(f0, ConstantUnit(), 0.5, output_times=[0.5])[-1].f.a
    assert np.allclose(a, f0.a * np.exp(0.5 * np.arange(1, 5)), rtol=1e-12)


def test_laplacian_circle_fixed_shape():
    a = evolve_chain(UnivalentCoefficients.identity(), LaplacianGrowth(), 1.0)[-1].f.a
    assert abs(a[0] - math.e) < 1e-8
    assert np.max(np.abs(a[1:])) < 1e-8


def test_a2_small_time():
    for t in (1e-2, 5e-3):
        a2 = evolve_chain(UnivalentCoefficients.identity(), COS, t, dt=1e-4, output_times=[t])[-1].f.a[1]
        assert abs(a2 - t / 2) < 2 * t**2


def test_conformal_radius_law():
    drivers = [COS, SmoothDensity(BoundaryDensity.from_modes({0: 2, 2: 0.4j})), LaplacianGrowth()]
    f0 = UnivalentCoefficients([1, 0.1, 0.02])
    for d in drivers:
        for s in evolve_chain(UnivalentCoefficients.from_dense(np.r_[0, f0.a, np.zeros(13)]), d, 0.5):
            assert abs(s.f.a1 - math.exp(s.t)) < 1e-10 * math.exp(s.t)


def test_truncation_exact_on_shared_coefficients():
    lo = evolve_chain(UnivalentCoefficients.identity(8), COS, 0.7)[-1].f.a
    hi = evolve_chain(UnivalentCoefficients.identity(16), COS, 0.7)[-1].f.a
    assert np.array_equal(lo, hi[:8])


def test_step_halving_order():
    f0 = UnivalentCoefficients.identity(8)
    ref = evolve_chain(f0, COS, 1.0, dt=0.025 / 4, output_times=[1.0])[-1].f.a
    errs = [
        np.max(np.abs(evolve_chain(f0, COS, 1.0, dt=dt, output_times=[1.0], radius_rtol=1e-4)[-1].f.a - ref))
        for dt in (0.1, 0.05)
    ]
    ratio = errs[0] / errs[1]
    assert 8 <= ratio <= 32
    assert step_halving_error(f0, COS, 1.0) < 1e-8


def test_evolve_from_chain_state_and_errors():
    s = evolve_chain(UnivalentCoefficients.identity(8), COS, 0.5)[-1]
    cont = evolve_chain(s, COS, 1.0, output_times=[1.0])[-1]
    direct = evolve_chain(UnivalentCoefficients.identity(8), COS, 1.0, output_times=[0.5, 1.0])[-1]
    assert np.allclose(cont.f.a, direct.f.a, atol=1e-13)
    with pytest.raises(ValueError):
        evolve_chain(s, COS, 0.2)
    with pytest.raises(ValueError):
        evolve_chain(UnivalentCoefficients.identity(8), COS, 1.0, dt=0)


def _critical_radius(f):
    da = f.a * np.arange(1, f.order + 1)
    return float(np.min(np.abs(np.roots(da[::-1]))))


def test_bieberbach_bounds_along_chain():
    drivers = (COS, SmoothDensity(BoundaryDensity.from_modes({0: 2, 2: 0.4j})))
    for d in drivers:
        for s in evolve_chain(UnivalentCoefficients.identity(), d, 0.5):
            g = s.f.normalized()
            if s.t > 0:
                assert _critical_radius(g) > 1  # still locally univalent on the closed disk
            assert abs(g.c(3) - g.c(2) ** 2) <= 1 + 1e-8
            assert abs(g.c(2)) <= 2 + 1e-8 and abs(g.c(3)) <= 3 + 1e-8


def test_lkord_constant_unit():
    tr = solve_lkord(0.3 + 0.4j, ConstantUnit(), 2.0)
    assert np.allclose(tr.w, np.exp(-tr.t) * (0.3 + 0.4j), atol=1e-13)
    assert np.all(np.diff(np.abs(tr.w)) < 0)


def test_lkord_slit_first_integral():
    z0 = 0.3 - 0.2j
    tr = solve_lkord(z0, SlitKernel([0, 5], [0, 0]), 3.0)
    q = np.exp(tr.t) * tr.w / (1 + tr.w) ** 2
    assert np.max(np.abs(q - z0 / (1 + z0) ** 2)) < 1e-8


def test_forward_chain_loses_univalence():
    # a critical point of f enters the disk in finite time; bounds then fail
    late = evolve_chain(UnivalentCoefficients.identity(48), COS, 1.6, output_times=[1.6])[-1].f.normalized()
    assert _critical_radius(late) < 1
    assert abs(late.c(3)) > 3


def test_lkord_slit_singularity():
    with pytest.raises(SingularityError) as err:
        solve_lkord(1 - 5e-10 + 0j, SlitKernel([0, 10], [0, 0]), 1.0)
    assert "t" in err.value.context


@settings(max_examples=15)
@given(st.floats(0, 0.9), st.floats(0, 2 * math.pi))
def test_trajectory_stays_in_disk(r, alpha):
    z0 = r * complex(math.cos(alpha), math.sin(alpha))
    tr = solve_lkord(z0, COS, 2.0, dt=5e-3)
    assert np.all(np.abs(tr.w) < 1)


def test_lkord_rejects_outside_seed():
    with pytest.raises(ValueError):
        solve_lkord(1.0 + 0j, ConstantUnit(), 1.0)


def test_trajectory_csv_rows():
    tr = solve_lkord(0.5j, ConstantUnit(), 0.01)
    rows = tr.to_csv_rows()
    assert rows[0] == (0.0, 0.0, 0.5)
    assert len(rows) == len(tr.samples) == 11


def test_recover_identity():
    z = np.array([0.1, 0.5j, -0.3 + 0.3j])
    rec = recover_f_limit(ConstantUnit(), z, T=5.0)
    assert rec.converged
    assert np.allclose(rec.values, z, atol=1e-12)


def test_recover_slit_limit():
    z = np.array([0.2, -0.4j, 0.3 + 0.3j])
    rec = recover_f_limit(SlitKernel([0, 50], [0, 0]), z, T=20.0)
    assert np.max(np.abs(rec.values - z / (1 + z) ** 2)) < 1e-6
    assert rec.converged


def test_limit_vs_stationary_shape():
    oracle = stationary_coefficients(COS, 12)
    got, rec = limit_coefficients(COS, 12)
    assert rec.converged
    assert np.max(np.abs(got.a - oracle.a)) < 1e-8


def test_stationary_shape_is_self_similar():
    f = stationary_coefficients(COS, 10)
    rhs = coefficient_rhs(ChainState(0, f), COS.p_coeffs(0.0, None, 10))
    assert np.allclose(rhs, f.a, atol=1e-14)
    with pytest.raises(InvalidDriverError):
        stationary_coefficients(LaplacianGrowth())


def test_hamiltonian_identity():
    s = evolve_chain(UnivalentCoefficients.identity(), COS, 0.5)[-1]
    p = COS.p_coeffs(0.5, None, 16)
    assert hamiltonian_residual(s, p) < 1e-13
    assert hamiltonian_residual(s, p, driver=COS) < 1e-13
    e = ChainState(1.0, UnivalentCoefficients(np.r_[math.e, np.zeros(15)]))
    assert hamiltonian_residual(e, _p([1], 16)) == 0


def test_hamiltonian_negative_control():
    s = evolve_chain(UnivalentCoefficients.identity(), COS, 0.5)[-1]
    assert hamiltonian_residual(s, _p([1], 16), driver=COS) > 1e-3


def test_chain_state_json():
    s = evolve_chain(UnivalentCoefficients.identity(8), COS, 0.3)[-1]
    back = ChainState.from_json(json.loads(json.dumps(s.to_json())))
    assert back.t == s.t and np.array_equal(back.f.a, s.f.a)


def test_herglotz_driver_consistency():
    assert np.allclose(COS.p_coeffs(0.3, None, 5), herglotz_from_density(COS.density(0.3), 5).coeffs)
