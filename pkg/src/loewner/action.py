"""Energies of a subordination chain and the time variation of the logarithmic
action.

Route of record for the logarithmic action is the coefficient sum

    S[f] = pi * sum_{n>=0} |h_n|^2 / (n + 1) + 2 pi log a_1,   h = f''/f',

obtained from the disk integral of ``|h + 1/zeta|^2 - 1/|zeta|^2`` because the
cross term has no angular mean.  :func:`log_action_quadrature` evaluates the
disk integral directly and is the oracle for that reduction.

Normal velocity convention: ``v_n = |f'| Re p = |f'| nu / 2``, which is what the
Löwner-Kufarev equation itself gives.  The alternative ``|f'| nu / (4 pi)``
differs by the factor ``2 pi`` and is only reported, never used.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .driving import ConstantUnit, LaplacianGrowth, SlitKernel, require_valid
from .errors import BoundaryDegeneracyError, InvalidDriverError, InversionError
from .evolution import ChainState, evolve_chain
from .virasoro import psi_pairing
from .series import (
    UnivalentCoefficients,
    circle_grid,
    differentiate,
    evaluate,
    evaluate_on_circle,
    pre_schwarzian,
    schwarzian,
)

TWO_PI = 2.0 * math.pi
CSV_COLUMNS = ("t", "dirichlet", "S_series", "S_quadrature", "term1", "term2", "rhs", "fd_dSdt", "residual")


def _map(state):
    return getattr(state, "f", state)


def _grid_size(f, nu=None, m=None):
    if m:
        return m
    k = nu.K if nu is not None else 0
    return max(4 * f.order, 4 * k, 64)


# ---------------------------------------------------------------------------
# Dirichlet energy
# ---------------------------------------------------------------------------

def dirichlet_energy(state):
    """Regularised Dirichlet energy of the Green function: ``2 pi log a_1``."""
    return TWO_PI * math.log(_map(state).a1)


def dirichlet_energy_quadrature(state, eps=1e-3, m=256):
    """Oracle for :func:`dirichlet_energy` straight from the regularised limit.

    The Dirichlet integral over ``Omega \\ {|z| <= eps}`` pulls back to
    ``int dtheta int_{r_eps(theta)}^1 dr / r`` where ``|f(r_eps e^{i theta})| = eps``.
    """
    f = _map(state)
    s = f.to_series()
    theta = circle_grid(m)
    radii = np.empty(m)
    for j, th in enumerate(theta):
        e = np.exp(1j * th)

        def g(r):
            return abs(evaluate(s, r * e)) - eps

        hi = min(eps / f.a1, 0.5)
        while g(hi) < 0:
            hi = min(2 * hi, 1.0 - 1e-12)
            if hi >= 1.0 - 1e-12:
                break
        radii[j] = brentq(g, 1e-300, hi, xtol=1e-300, rtol=1e-15)
    return float(-np.mean(np.log(radii)) * TWO_PI + TWO_PI * math.log(eps))


# ---------------------------------------------------------------------------
# logarithmic action
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionValue:
    value: float
    error: float
    converged: bool = True
    method: str = "series"


def log_action_series(state):
    """Coefficient-sum route; ``error`` is the size of the last retained term."""
    f = _map(state)
    if f.order < 4:
        raise ValueError("need order >= 4 for a meaningful action sum")
    h = pre_schwarzian(f.to_series())
    v = h.valid_order
    n = np.arange(v + 1)
    hn = np.abs(h.coeffs[: v + 1]) ** 2
    value = math.pi * float(np.sum(hn / (n + 1))) + TWO_PI * math.log(f.a1)
    tail = math.pi * float(hn[-1] / (v + 1))
    return ActionValue(value, tail)


def _derivative_zero_free(f, margin=1e-6):
    d = differentiate(f.to_series()).coeffs[: f.order]
    d = np.trim_zeros(d, "b")
    if d.shape[0] <= 1:
        return True
    roots = np.roots(d[::-1])
    return bool(np.min(np.abs(roots)) > 1.0 + margin)


def _disk_integral(hfun, n_radial, n_angular):
    x, w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w
    theta = circle_grid(n_angular)
    e = np.exp(1j * theta)
    zeta = np.multiply.outer(r, e)
    h = hfun(zeta)
    integrand = r[:, None] * np.abs(h) ** 2 + 2.0 * np.real(h * e[None, :])
    return float(wr @ integrand.mean(axis=1)) * TWO_PI


def log_action_quadrature(state, n_radial=64, n_angular=None, tol=1e-8, h_source="auto"):
    """Polar quadrature of ``int_U (|h + 1/zeta|^2 - 1/|zeta|^2) dsigma + 2 pi log a_1``.

    The ``1/|zeta|^2`` counterterm is cancelled analytically, leaving the
    bounded integrand ``r |h|^2 + 2 Re(h e^{i theta})`` per unit ``dr dtheta``.
    Gauss-Legendre in ``r``, trapezoid in ``theta``; the error estimate comes from
    doubling both node counts.

    ``h_source`` selects how ``h = f''/f'`` is sampled: ``"pointwise"`` divides the
    polynomial derivatives, ``"germ"`` evaluates the truncated series of ``h``.
    ``"auto"`` uses the pointwise ratio unless ``f'`` of the truncated map has a
    zero in the closed disk (then that ratio is not integrable).
    """
    f = _map(state)
    n_angular = n_angular or max(4 * f.order, 64)
    if h_source == "auto":
        h_source = "pointwise" if _derivative_zero_free(f) else "germ"
    s = f.to_series()
    if h_source == "pointwise":
        d1 = differentiate(s)
        d2 = differentiate(d1)

        def hfun(z):
            return evaluate(d2, z) / evaluate(d1, z)
    elif h_source == "germ":
        hs = pre_schwarzian(s)

        def hfun(z):
            return evaluate(hs, z)
    else:
        raise ValueError(f"unknown h_source {h_source!r}")
    coarse = _disk_integral(hfun, n_radial, n_angular)
    fine = _disk_integral(hfun, 2 * n_radial, 2 * n_angular)
    err = abs(fine - coarse)
    value = fine + TWO_PI * math.log(f.a1)
    return ActionValue(value, err, err <= tol, f"quadrature/{h_source}")


# ---------------------------------------------------------------------------
# variation formula
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Theorem1Terms:
    term1: float
    term2: float
    rhs: float


def _boundary_fields(f, m):
    theta = circle_grid(m)
    e = np.exp(1j * theta)
    s = f.to_series()
    h = evaluate(pre_schwarzian(s), e)
    sf = evaluate(schwarzian(s), e)
    return theta, e, h, sf


def theorem1_rhs(state, nu, m=None):
    """Right-hand side of the action variation formula.

    ``term1 = int [Re(1 + e^{i theta} f''/f')]^2 nu dtheta``,
    ``term2 = int Re(e^{2 i theta} S_f) nu dtheta``, ``rhs = term1 + term2 - 2 pi``;
    trapezoidal rule on ``m >= 4N`` angles (exact for these trigonometric polynomials).
    """
    require_valid(nu)
    f = _map(state)
    m = _grid_size(f, nu, m)
    theta, e, h, sf = _boundary_fields(f, m)
    v = nu.values(theta)
    term1 = TWO_PI * float(np.mean(np.real(1.0 + e * h) ** 2 * v))
    term2 = TWO_PI * float(np.mean(np.real(e * e * sf) * v))
    return Theorem1Terms(term1, term2, term1 + term2 - TWO_PI)


@dataclass(frozen=True, eq=False)
class CurvatureSamples:
    theta: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    v_n: np.ndarray
    kappa_v_n: np.ndarray
    term1_from_curvature: float
    term1: float
    curvature_form: float
    alternate_velocity_ratio: float = TWO_PI

    def to_json(self):
        return {
            "theta": self.theta.tolist(),
            "nu": self.nu.tolist(),
            "kappa": self.kappa.tolist(),
            "v_n": self.v_n.tolist(),
            "kappa_v_n": self.kappa_v_n.tolist(),
            "term1_from_curvature": self.term1_from_curvature,
            "term1": self.term1,
            "curvature_form": self.curvature_form,
        }


def curvature_decomposition(state, nu, m=None, threshold=1e-8):
    """Boundary curvature ``kappa``, normal velocity ``v_n`` and their product.

    ``kappa |f'| = Re(1 + e^{i theta} f''/f')`` and ``v_n = |f'| nu / 2``, so the first
    variation term equals ``4 int (kappa v_n)^2 / nu dtheta``.  ``curvature_form`` is
    the literal ``4 pi int (kappa v_n)^2 |dz|`` and is kept as a diagnostic only: it
    does not reproduce the first term (already for ``f = e^t zeta`` it gives
    ``8 pi^2 e^t``).
    """
    require_valid(nu)
    f = _map(state)
    m = _grid_size(f, nu, m)
    theta, e, h, _ = _boundary_fields(f, m)
    df = np.abs(evaluate_on_circle(differentiate(f.to_series()), theta))
    if np.min(df) < threshold:
        raise BoundaryDegeneracyError("|f'| vanishes on the boundary", min_abs_derivative=float(np.min(df)))
    v = nu.values(theta)
    q = np.real(1.0 + e * h)
    kappa = q / df
    v_n = df * v / 2.0
    kv = kappa * v_n
    term1 = TWO_PI * float(np.mean(q**2 * v))
    from_kv = 4.0 * TWO_PI * float(np.mean(kv**2 / v))
    literal = 4.0 * math.pi * TWO_PI * float(np.mean(kv**2 * df))
    return CurvatureSamples(theta, v, kappa, v_n, kv, from_kv, term1, literal)


@dataclass
class EnergyReport:
    t: float
    h: float
    order: int
    dirichlet: float
    log_action_series: float
    log_action_quadrature: float
    theorem1_term1: float
    theorem1_term2: float
    theorem1_rhs: float
    fd_dSdt: float
    fd_dSdt_half: float
    residual: float
    residual_half: float
    residuals: dict = field(default_factory=dict)
    conventions: dict = field(default_factory=dict)

    @property
    def halving_ratio(self):
        return self.residual / self.residual_half if self.residual_half > 0 else math.inf

    def to_json(self):
        return asdict(self)

    def csv_row(self):
        return (
            self.t,
            self.dirichlet,
            self.log_action_series,
            self.log_action_quadrature,
            self.theorem1_term1,
            self.theorem1_term2,
            self.theorem1_rhs,
            self.fd_dSdt,
            self.residual,
        )


def _density_at(driver, state):
    if isinstance(driver, SlitKernel):
        raise InvalidDriverError("the variation formula needs a smooth density, not a slit kernel")
    if isinstance(driver, LaplacianGrowth):
        return driver.density(state.t, state.f)
    return driver.density(state.t)


def verify_theorem1(driver, t, h=1e-4, order=16, dt=1e-3, f0=None, quadrature=True):
    """Central-difference ``dS/dt`` against the variation formula at time ``t``.

    The chain starts from ``f0`` (default the identity) at time 0.  The finite
    difference is taken with steps ``h`` and ``h/2``; for a smooth chain the
    residual should shrink by about 4.
    """
    if t - h <= 0:
        raise ValueError("need t > h for a central difference")
    f0 = f0 or UnivalentCoefficients.identity(order)
    if isinstance(driver, SlitKernel):
        raise InvalidDriverError("the variation formula needs a smooth density, not a slit kernel")
    times = [t - h, t - h / 2, t, t + h / 2, t + h]
    states = evolve_chain(f0, driver, t + h, dt, output_times=times)
    by_t = {round(s.t, 15): s for s in states}
    s_m, s_mh, s_0, s_ph, s_p = (by_t[round(x, 15)] for x in times)

    def S(st):
        return log_action_series(st).value

    fd = (S(s_p) - S(s_m)) / (2 * h)
    fd_half = (S(s_ph) - S(s_mh)) / h
    nu = _density_at(driver, s_0)
    terms = theorem1_rhs(s_0, nu)
    series = log_action_series(s_0)
    quad = log_action_quadrature(s_0) if quadrature else None
    curv = curvature_decomposition(s_0, nu)
    psi = psi_pairing(s_0.f, nu)
    richardson = (4.0 * fd_half - fd) / 3.0
    residuals = {
        "fd_vs_rhs": abs(fd - terms.rhs),
        "fd_half_vs_rhs": abs(fd_half - terms.rhs),
        "richardson_vs_rhs": abs(richardson - terms.rhs),
        "series_tail": series.error,
        "series_vs_quadrature": abs(series.value - quad.value) if quad else math.nan,
        "quadrature_refinement": quad.error if quad else math.nan,
        "curvature_identity": abs(curv.term1_from_curvature - terms.term1),
        "psi_vs_term2": abs(psi.real - terms.term2),
        "curvature_form_minus_fd": curv.curvature_form + psi.real - TWO_PI - fd,
        "conformal_radius": abs(s_0.f.a1 - f0.a1 * math.exp(t)),
    }
    conventions = {
        "herglotz": "p = 1 + sum_k nu_hat_k zeta^k (Schwarz kernel, p(0) = 1)",
        "normal_velocity": "v_n = |f'| nu / 2; alternative |f'| nu / (4 pi) differs by 2 pi",
        "curvature_form": "literal 4 pi int (kappa v_n)^2 |dz| reported, not asserted",
        "driver": driver.kind,
    }
    return EnergyReport(
        t=float(t),
        h=float(h),
        order=int(order),
        dirichlet=dirichlet_energy(s_0),
        log_action_series=series.value,
        log_action_quadrature=quad.value if quad else math.nan,
        theorem1_term1=terms.term1,
        theorem1_term2=terms.term2,
        theorem1_rhs=terms.rhs,
        fd_dSdt=fd,
        fd_dSdt_half=fd_half,
        residual=abs(fd - terms.rhs),
        residual_half=abs(fd_half - terms.rhs),
        residuals=residuals,
        conventions=conventions,
    )


def theorem1_sweep(driver, times, h=1e-4, order=16, dt=1e-3, f0=None):
    return [verify_theorem1(driver, t, h, order, dt, f0) for t in times]


# ---------------------------------------------------------------------------
# metric density: harmonicity and the complex Green field
# ---------------------------------------------------------------------------

def _map_functions(f):
    if isinstance(f, (UnivalentCoefficients, ChainState)):
        s = _map(f).to_series()
        d = differentiate(s)
        return (lambda z: evaluate(s, z)), (lambda z: evaluate(d, z))
    fun, dfun = f
    return fun, dfun


def _newton_invert(fun, dfun, z, zeta0, tol=1e-14, maxiter=50):
    zeta = np.array(zeta0, dtype=np.complex128)
    target = np.asarray(z, dtype=np.complex128)
    for _ in range(maxiter):
        step = (fun(zeta) - target) / dfun(zeta)
        zeta = zeta - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(zeta))):
            return zeta, True
    return zeta, False


def metric_density(fun, dfun, zeta):
    """``phi(f(zeta)) = -log(|zeta|^2 |f'(zeta)|^2)``."""
    return -np.log(np.abs(zeta) ** 2 * np.abs(dfun(zeta)) ** 2)


@dataclass(frozen=True, eq=False)
class HarmonicityResult:
    spacing: float
    max_residual: float
    laplacian: np.ndarray


def harmonicity_check(f, spacing=1e-3, r_min=0.2, r_max=0.9, n_r=8, n_theta=16):
    """Five-point Laplacian of ``phi`` in image coordinates on stencils around
    pulled-forward annulus nodes; preimages of stencil points by Newton."""
    fun, dfun = _map_functions(f)
    r = np.linspace(r_min, r_max, n_r)
    th = circle_grid(n_theta)
    centers = np.multiply.outer(r, np.exp(1j * th)).reshape(-1)
    zc = fun(centers)
    offsets = spacing * np.array([0, 1, -1, 1j, -1j])
    z = zc[:, None] + offsets[None, :]
    zeta0 = np.repeat(centers[:, None], 5, axis=1)
    zeta, ok = _newton_invert(fun, dfun, z, zeta0)
    if not ok or np.any(np.abs(zeta) >= 1):
        raise InversionError("stencil preimages not resolved; refine the spacing", spacing=spacing)
    phi = metric_density(fun, dfun, zeta)
    lap = (phi[:, 1] + phi[:, 2] + phi[:, 3] + phi[:, 4] - 4 * phi[:, 0]) / spacing**2
    return HarmonicityResult(float(spacing), float(np.max(np.abs(lap))), lap)


@dataclass(frozen=True, eq=False)
class HarmonicityRefinement:
    spacings: tuple
    max_residuals: tuple
    orders: tuple
    extrapolated_residual: float


def harmonicity_refinement(f, spacings=(4e-3, 2e-3, 1e-3), **kwargs):
    """Residuals under halving, observed orders, and a Richardson-extrapolated residual.

    The five-point stencil error is ``h^2/12 (phi_xxxx + phi_yyyy) + O(h^6)`` for a
    harmonic ``phi`` (the ``h^4`` term is ``Re`` of ``g^{(6)}(1 + i^6)``, which
    vanishes), so with three spacings in ratio 2 the extrapolation removes the
    ``h^2`` and then the ``h^6`` term; with two spacings only the ``h^2`` term.
    """
    results = [harmonicity_check(f, h, **kwargs) for h in spacings]
    res = tuple(r.max_residual for r in results)
    orders = tuple(
        math.log(a / b) / math.log(ha / hb) for a, b, ha, hb in zip(res, res[1:], spacings, spacings[1:])
    )
    laps = [r.laplacian for r in results]
    level = []
    for (ha, la), (hb, lb) in zip(zip(spacings, laps), zip(spacings[1:], laps[1:])):
        q = (ha / hb) ** 2
        level.append((q * lb - la) / (q - 1))
    extrap = level[-1]
    if len(level) >= 2:
        q = (spacings[-2] / spacings[-1]) ** 6
        extrap = (q * level[-1] - level[-2]) / (q - 1)
    return HarmonicityRefinement(tuple(spacings), res, orders, float(np.max(np.abs(extrap))))


@dataclass(frozen=True, eq=False)
class GreenField:
    z: np.ndarray
    zeta: np.ndarray
    w_prime: np.ndarray
    residual: np.ndarray


def complex_green_field(state, z_samples, n_r=64, n_theta=128, tol=1e-12, maxiter=50):
    """``W'(z) = -(f^{-1})'(z) / f^{-1}(z)`` and the pulled-back residual
    ``|(W' f'(zeta))^2 - 1/zeta^2|``."""
    fun, dfun = _map_functions(state)
    z = np.atleast_1d(np.asarray(z_samples, dtype=np.complex128))
    r = (np.arange(n_r) + 0.5) / n_r
    nodes = np.multiply.outer(r, np.exp(1j * circle_grid(n_theta))).reshape(-1)
    images = fun(nodes)
    start = nodes[np.argmin(np.abs(images[None, :] - z[:, None]), axis=1)]
    zeta, ok = _newton_invert(fun, dfun, z, start, tol=tol, maxiter=maxiter)
    if not ok or np.any(np.abs(zeta) >= 1) or np.any(np.abs(fun(zeta) - z) > 1e-9 * np.maximum(1, np.abs(z))):
        raise InversionError("Newton inversion failed; point outside the domain or too close to its boundary")
    d = dfun(zeta)
    wp = -1.0 / (zeta * d)
    residual = np.abs((wp * d) ** 2 - 1.0 / zeta**2)
    return GreenField(z, zeta, wp, residual)
