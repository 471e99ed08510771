"""Acceptance criteria 1-9, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured quantities;
timed criteria are measured after the compiled kernels are warmed up.
"""

import math
import time

import numpy as np
import pytest
import sympy

from loewner import _kernels
from loewner.action import harmonicity_refinement, log_action_quadrature, log_action_series, theorem1_rhs, verify_theorem1
from loewner.driving import BoundaryDensity, ConstantUnit, LaplacianGrowth, SlitKernel, SmoothDensity
from loewner.evolution import ChainState, evolve_chain, limit_coefficients, solve_lkord
from loewner.series import UnivalentCoefficients
from loewner.virasoro import (
    CONTOUR_FACTOR,
    CircleVectorField,
    gelfand_fuks,
    goluzin_schiffer,
    neretin_generatrix,
    neretin_recursion,
    neretin_symbolic,
    printed_closed_form,
    witt_bracket,
)

TWO_PI = 2 * math.pi
COS = SmoothDensity(BoundaryDensity.from_modes({0: 2, 1: 0.5}))
SEED = 20240917


@pytest.fixture(scope="module", autouse=True)
def warm():
    _kernels.warmup()


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_trivial_chain(report):
    t0 = time.perf_counter()
    times = np.linspace(0, 1, 11)
    states = evolve_chain(UnivalentCoefficients.identity(), ConstantUnit(), 1.0, output_times=times)
    radius = max(abs(s.f.a1 - math.exp(s.t)) for s in states)
    action = max(abs(log_action_series(s).value - TWO_PI * s.t) for s in states)
    rhs0 = abs(theorem1_rhs(states[0], BoundaryDensity.uniform()).rhs - TWO_PI)
    sides = rhs0
    for t in times[1:]:
        rep = verify_theorem1(ConstantUnit(), float(t), quadrature=False)
        sides = max(sides, abs(rep.fd_dSdt - TWO_PI), abs(rep.theorem1_rhs - TWO_PI))
    elapsed = time.perf_counter() - t0
    ok = radius < 1e-8 and action < 1e-10 and sides < 1e-10 and elapsed < 1.0
    report(1, ok, f"|a1-e^t|={radius:.1e} |S-2pi t|={action:.1e} |sides-2pi|={sides:.1e} runtime={elapsed:.2f}s")


def test_criterion_2_headline_variation(report):
    t0 = time.perf_counter()
    rows = [verify_theorem1(COS, t, h=1e-4, order=16, quadrature=False) for t in (0.1, 0.2, 0.3, 0.4, 0.5)]
    elapsed = time.perf_counter() - t0
    worst = max(r.residual for r in rows)
    ratios = [r.halving_ratio for r in rows]
    ok = worst < 1e-4 and all(3.0 <= q <= 5.0 for q in ratios) and elapsed < 10.0
    report(
        2,
        ok,
        f"max residual={worst:.2e} halving ratios={[round(q, 2) for q in ratios]} runtime={elapsed:.2f}s",
    )


def test_criterion_3_dual_route_action(report):
    quad_map = ChainState(0, UnivalentCoefficients(np.r_[1, 0.25, np.zeros(46)]))
    series = log_action_series(quad_map).value
    closed = abs(series + math.pi * math.log(0.75))
    gap_quad = abs(log_action_quadrature(quad_map).value - series)
    koebe = ChainState(0, UnivalentCoefficients.koebe(24))
    gap_koebe = abs(log_action_quadrature(koebe).value - log_action_series(koebe).value)
    ok = closed < 1e-8 and gap_quad < 1e-6 and gap_koebe < 1e-4
    report(3, ok, f"|S+pi log(3/4)|={closed:.1e} quadratic gap={gap_quad:.1e} Koebe N=24 gap={gap_koebe:.1e}")


def test_criterion_4_laplacian_circle(report):
    states = evolve_chain(UnivalentCoefficients.identity(), LaplacianGrowth(), 1.0, n_outputs=20)
    drift = max(float(np.max(np.abs(s.f.a[1:]))) for s in states)
    residual = max(verify_theorem1(LaplacianGrowth(), t, quadrature=False).residual for t in (0.25, 0.5, 1.0))
    ok = drift < 1e-7 and residual < 1e-6
    report(4, ok, f"max_(n>=2)|a_n|={drift:.1e} variation-formula residual={residual:.1e}")


def test_criterion_5_virasoro_suite(report):
    rng = np.random.default_rng(SEED)
    a = 0.15 ** np.arange(12) * (rng.standard_normal(12) + 1j * rng.standard_normal(12)) / 2
    a[0] = 1
    f = UnivalentCoefficients(a)
    zeta = 0.6 * np.sqrt(rng.random(20)) * np.exp(2j * np.pi * rng.random(20))
    closed = max(
        float(np.max(np.abs(goluzin_schiffer(f, CircleVectorField.basis(k), zeta) / CONTOUR_FACTOR
                            - printed_closed_form(k, f, zeta))))
        for k in (-2, -1, 0, 1, 2, 3)
    )
    anti = jac = cocycle = 0.0
    for _ in range(100):
        x, y, z = (CircleVectorField.random(rng, 4) for _ in range(3))
        anti = max(anti, (witt_bracket(x, y) + witt_bracket(y, x)).norm())
        jac = max(jac, (witt_bracket(x, witt_bracket(y, z)) + witt_bracket(y, witt_bracket(z, x))
                        + witt_bracket(z, witt_bracket(x, y))).norm())
        cocycle = max(cocycle, abs(gelfand_fuks(witt_bracket(x, y), z) + gelfand_fuks(witt_bracket(y, z), x)
                                   + gelfand_fuks(witt_bracket(z, x), y)))
    kernel = [gelfand_fuks(CircleVectorField.exp_mode(m), CircleVectorField.exp_mode(-m)) for m in (-1, 0, 1)]
    ok = closed < 1e-8 and anti < 1e-10 and jac < 1e-10 and cocycle < 1e-10 and all(v == 0 for v in kernel)
    report(
        5,
        ok,
        f"closed forms {closed:.1e}, antisymmetry {anti:.1e}, Jacobi {jac:.1e}, cocycle {cocycle:.1e}, "
        f"kernel modes {[abs(v) for v in kernel]}",
    )


def test_criterion_6_neretin_anchors(report):
    c, c2, c3, c4 = sympy.symbols("c c_2 c_3 c_4")
    P = neretin_symbolic(3)
    anchors = (
        sympy.expand(P[2] - c / 2 * (c3 - c2**2)) == 0
        and sympy.expand(P[3] - 2 * c * (c4 - 2 * c2 * c3 + c2**3)) == 0
        and P[0] == 0
        and P[1] == 0
    )
    rng = np.random.default_rng(SEED)
    polys = neretin_recursion(8)
    gap = 0.0
    for _ in range(100):
        coeffs = rng.uniform(-1, 1, 12) + 1j * rng.uniform(-1, 1, 12)
        coeffs[0] = 1
        g = UnivalentCoefficients(coeffs)
        gen = neretin_generatrix(g)
        gap = max(gap, max(abs(polys[k].evaluate_map(g) - gen.coefficient(k)) for k in range(2, 9)))
    ok = anchors and gap < 1e-10
    report(6, ok, f"P_2, P_3 symbolic match={anchors} recursion vs generatrix (k<=8)={gap:.1e}")


def _bounds(states):
    worst = [0.0, 0.0, 0.0]
    for s in states:
        g = s.f.normalized()
        vals = (abs(g.c(2)), abs(g.c(3)), abs(g.c(3) - g.c(2) ** 2))
        worst = [max(w, v) for w, v in zip(worst, vals)]
    return worst


def test_criterion_7_coefficient_bounds(report):
    slit = SlitKernel([0.0, 40.0], [0.0, 0.0])
    limit, rec = limit_coefficients(slit, order=16, T=20.0)
    smooth = [
        COS,
        SmoothDensity(BoundaryDensity.from_modes({0: 2, 2: 0.4j})),
        SmoothDensity(BoundaryDensity.from_modes({0: 2, 1: 0.3, 3: -0.2 + 0.1j})),
    ]
    perturbed = UnivalentCoefficients(np.r_[1, 0.05, np.zeros(14)])
    chains = {
        "constant": evolve_chain(UnivalentCoefficients.identity(), ConstantUnit(), 1.0),
        "constant/perturbed": evolve_chain(perturbed, ConstantUnit(), 1.0),
        "laplacian": evolve_chain(UnivalentCoefficients.identity(), LaplacianGrowth(), 1.0),
        "laplacian/perturbed": evolve_chain(perturbed, LaplacianGrowth(), 1.0),
        "slit": evolve_chain(limit, slit, 1.0),
    }
    for i, d in enumerate(smooth):
        chains[f"smooth{i + 1}"] = evolve_chain(UnivalentCoefficients.identity(), d, 0.5)
    worst = np.max([_bounds(s) for s in chains.values()], axis=0)
    g = limit.normalized()
    extremal = abs(abs(g.c(3) - g.c(2) ** 2) - 1)
    ok = worst[0] <= 2 + 1e-8 and worst[1] <= 3 + 1e-8 and worst[2] <= 1 + 1e-8 and extremal < 1e-6 and rec.converged
    report(
        7,
        ok,
        f"max |c2|={worst[0]:.10f} max |c3|={worst[1]:.10f} max |c3-c2^2|={worst[2]:.10f} "
        f"slit limit ||c3-c2^2|-1|={extremal:.1e}",
    )


def test_criterion_8_harmonicity(report):
    maps = {
        "identity": UnivalentCoefficients.identity(),
        "zeta+zeta^2/4": UnivalentCoefficients(np.r_[1, 0.25, np.zeros(14)]),
        "dilated Koebe": UnivalentCoefficients(np.arange(1, 17) * 0.5 ** np.arange(16)),
    }
    results = {name: harmonicity_refinement(f) for name, f in maps.items()}
    ok = all(all(abs(o - 2) < 0.1 for o in r.orders) and r.extrapolated_residual < 1e-6 for r in results.values())
    detail = "; ".join(
        f"{n}: orders {[round(o, 3) for o in r.orders]} extrapolated {r.extrapolated_residual:.1e}"
        for n, r in results.items()
    )
    report(8, ok, detail)


def test_criterion_9_slit_first_integral(report):
    rng = np.random.default_rng(SEED)
    seeds = 0.5 * np.sqrt(rng.random(16)) * np.exp(2j * np.pi * rng.random(16))
    seeds = np.r_[seeds, 0.5, -0.5, 0.5j]
    slit = SlitKernel([0.0, 3.0], [0.0, 0.0])
    worst = 0.0
    for z0 in seeds:
        tr = solve_lkord(complex(z0), slit, 3.0)
        q = np.exp(tr.t) * tr.w / (1 + tr.w) ** 2
        worst = max(worst, float(np.max(np.abs(q - q[0]))))
    report(9, worst < 1e-8, f"max deviation of e^t w/(1+w)^2 up to t=3: {worst:.1e}")
