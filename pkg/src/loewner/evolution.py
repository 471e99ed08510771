"""Integration of the Löwner-Kufarev equations.

The PDE ``df/dt = zeta f' p`` becomes the lower-triangular coefficient system
``da_n/dt = sum_{m=1}^{n} m a_m p_{n-m}``, so an order-``N`` run is exact for
``a_1..a_N`` (no truncation feedback).  The characteristic equation
``dw/dt = -w p(w, t)`` is integrated pointwise.  Both use classical fixed-step
RK4, which keeps runs bit-reproducible.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .driving import ConstantUnit, LaplacianGrowth, SlitKernel, SmoothDensity
from .errors import (
    IntegrationError,
    InvalidDriverError,
    LoewnerError,
    OrderMismatchError,
    SingularityError,
)
from .series import (
    TruncatedSeries,
    UnivalentCoefficients,
    circle_grid,
    differentiate,
    fourier_project,
    mul,
    shift,
)

DEFAULT_DT = 1e-3
RADIUS_RTOL = 1e-8
SLIT_SINGULARITY_TOL = 1e-9


@dataclass(frozen=True)
class ChainState:
    t: float
    f: UnivalentCoefficients

    @property
    def order(self):
        return self.f.order

    def to_json(self):
        return {"t": float(self.t), "a": [[float(z.real), float(z.imag)] for z in self.f.a]}

    @classmethod
    def from_json(cls, obj):
        return cls(float(obj["t"]), UnivalentCoefficients([complex(re, im) for re, im in obj["a"]]))


@dataclass(frozen=True, eq=False)
class Trajectory:
    z0: complex
    t: np.ndarray
    w: np.ndarray

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.w.tolist()))

    def to_csv_rows(self):
        return [(float(t), float(w.real), float(w.imag)) for t, w in zip(self.t, self.w)]


def coefficient_rhs(state, p):
    """``d a_n / dt`` for ``n = 1..N`` given the Herglotz series ``p``."""
    f = getattr(state, "f", state)
    if isinstance(p, TruncatedSeries):
        if p.order != f.order:
            raise OrderMismatchError("driver and map orders differ", p=p.order, f=f.order)
        p = p.dense(0)
    p = np.ascontiguousarray(p, dtype=np.complex128)
    if abs(p[0] - 1.0) > 1e-12:
        raise InvalidDriverError("Herglotz function must satisfy p(0) = 1", p0=complex(p[0]))
    return _kernels.lk_rhs(f.dense(), p[: f.order + 1])[1:]


def hamiltonian_residual(state, p, driver=None):
    """Max coefficient gap between ``d f'/dt`` and ``d/dzeta (zeta f' p)``.

    ``d f/dt`` comes from :func:`coefficient_rhs` with the driver's own Herglotz
    series at ``state.t`` when ``driver`` is given, otherwise with ``p``; in the
    latter case the residual vanishes identically.
    """
    f = state.f
    n = f.order
    if isinstance(p, TruncatedSeries):
        p = p.dense(0)
    p = np.asarray(p, dtype=np.complex128)[: n + 1]
    q = p if driver is None else np.asarray(driver.p_coeffs(state.t, f, n), dtype=np.complex128)
    adot = np.concatenate(([0.0], coefficient_rhs(state, q)))
    dfdt = differentiate(TruncatedSeries(adot, n))
    fs = f.to_series()
    h = mul(shift(differentiate(_from_degree_zero(fs)), 1), TruncatedSeries(p, n))
    flux = differentiate(h)
    return float(np.max(np.abs(dfdt.coeffs[:n] - flux.coeffs[:n])))


def _from_degree_zero(s):
    """Re-index a series to start at degree 0."""
    return TruncatedSeries(s.dense(0), s.order, 0, s.lost)


def _stage_times(t0, h, nsteps):
    base = t0 + h * np.arange(nsteps)
    return np.stack([base, base + 0.5 * h, base + h], axis=1)


def _p_table(driver, times, order):
    table = np.empty(times.shape + (order + 1,), dtype=np.complex128)
    for idx in np.ndindex(times.shape):
        table[idx] = driver.p_coeffs(float(times[idx]), None, order)
    return table


def _advance(a, driver, t0, t1, dt):
    """Advance degree-indexed coefficients from ``t0`` to ``t1``."""
    span = t1 - t0
    if span <= 0:
        return a
    nsteps = max(1, math.ceil(span / dt - 1e-9))
    h = span / nsteps
    order = a.shape[0] - 1
    if driver.needs_state:
        return _advance_coupled(a, driver, t0, h, nsteps)
    if driver.time_constant:
        p = np.ascontiguousarray(driver.p_coeffs(t0, None, order))
        return _kernels.rk4_fixed_p(a, p, h, nsteps)
    table = _p_table(driver, _stage_times(t0, h, nsteps), order)
    return _kernels.rk4_tabulated_p(a, table, h)


def _advance_coupled(a, driver, t0, h, nsteps):
    order = a.shape[0] - 1
    y = a.copy()

    def rhs(t, z):
        try:
            p = driver.p_coeffs(t, UnivalentCoefficients.from_dense(z), order)
        except LoewnerError as exc:
            exc.context.setdefault("t", float(t))
            raise
        return _kernels.lk_rhs(z, p)

    for i in range(nsteps):
        t = t0 + i * h
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def evolve_chain(f0, driver, t_end, dt=DEFAULT_DT, output_times=None, n_outputs=10, radius_rtol=RADIUS_RTOL):
    """Integrate the coefficient system and return states at the output times.

    Parameters
    ----------
    f0 : UnivalentCoefficients or ChainState
        Initial map; a :class:`ChainState` also fixes the start time.
    driver : Driver
    t_end : float
        Final time (absolute).
    dt : float
        Maximal RK4 step; every output interval is split into equal steps.
    output_times : sequence of float, optional
        Times to report; defaults to ``n_outputs`` equal intervals.

    Raises
    ------
    IntegrationError
        If ``a_1`` drifts from ``a_1(0) e^t`` by more than ``radius_rtol``.
    """
    t0 = float(getattr(f0, "t", 0.0))
    f0 = getattr(f0, "f", f0)
    if not t_end > t0:
        raise ValueError(f"t_end must exceed the start time {t0}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if output_times is None:
        output_times = np.linspace(t0, t_end, n_outputs + 1)
    times = np.asarray(sorted(set(float(t) for t in output_times) | {t0}), dtype=float)
    if times[0] < t0 or times[-1] > t_end + 1e-15:
        raise ValueError("output times must lie in [t_start, t_end]")

    a = np.ascontiguousarray(f0.dense())
    a1_0 = f0.a1
    states = [ChainState(t0, f0)]
    for ta, tb in zip(times[:-1], times[1:]):
        try:
            a = _advance(a, driver, ta, tb, dt)
        except LoewnerError as exc:
            exc.context.setdefault("t", float(ta))
            raise
        expected = a1_0 * math.exp(tb - t0)
        drift = abs(a[1] - expected) / expected
        if not np.all(np.isfinite(a)) or drift > radius_rtol:
            raise IntegrationError(
                "conformal-radius law violated; reduce dt", t=float(tb), drift=float(drift)
            )
        a[1] = a[1].real
        states.append(ChainState(float(tb), UnivalentCoefficients.from_dense(a)))
    return states


def step_halving_error(f0, driver, t_end, dt=DEFAULT_DT):
    """Richardson estimate of the terminal coefficient error of an RK4 run."""
    coarse = evolve_chain(f0, driver, t_end, dt, output_times=[t_end])[-1].f.a
    fine = evolve_chain(f0, driver, t_end, dt / 2, output_times=[t_end])[-1].f.a
    return float(np.max(np.abs(coarse - fine))) * 16.0 / 15.0


# ---------------------------------------------------------------------------
# characteristic equation
# ---------------------------------------------------------------------------

def _poly_table(driver, stages):
    K = driver.K if isinstance(driver, SmoothDensity) else 0
    return _p_table(driver, stages, K)


def integrate_characteristics(z0, driver, t_end, dt=DEFAULT_DT, f0=None):
    """Vectorised ``dw/dt = -w p(w, t)``, ``w(0) = z0``.

    Returns ``(times, W)`` with ``W[i, j]`` the trajectory of seed ``j`` at
    ``times[i]``.  Laplacian growth co-evolves the map (``f0``, default the
    identity of order 16) because its density depends on it.
    """
    z0 = np.ascontiguousarray(np.atleast_1d(np.asarray(z0, dtype=np.complex128)))
    if np.any(np.abs(z0) >= 1):
        raise ValueError("seeds must lie in the open unit disk")
    nsteps = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / nsteps
    times = h * np.arange(nsteps + 1)
    stages = _stage_times(0.0, h, nsteps)
    if isinstance(driver, SlitKernel):
        u = np.ascontiguousarray(driver.u(stages))
        W, status, step, j = _kernels.lkord_slit(z0, u, h, SLIT_SINGULARITY_TOL)
    elif isinstance(driver, (ConstantUnit, SmoothDensity)):
        W, status, step, j = _kernels.lkord_poly(z0, _poly_table(driver, stages), h)
    elif isinstance(driver, LaplacianGrowth):
        W, status, step, j = _characteristics_coupled(z0, driver, h, nsteps, f0)
    else:
        raise InvalidDriverError(f"unsupported driver {driver!r}")
    if status == _kernels.STATUS_SINGULAR:
        raise SingularityError(
            "trajectory reached the slit-kernel singularity", t=float(times[step]), z0=complex(z0[j])
        )
    if status == _kernels.STATUS_LEFT_DISK:
        raise IntegrationError("trajectory left the unit disk", t=float(times[step]), z0=complex(z0[j]))
    return times, W


def _characteristics_coupled(z0, driver, h, nsteps, f0):
    f0 = f0 or UnivalentCoefficients.identity()
    order = f0.order
    a = f0.dense()
    w = z0.copy()
    out = np.empty((nsteps + 1, w.shape[0]), dtype=np.complex128)
    out[0] = w

    def rhs(t, y, x):
        p = driver.p_coeffs(t, UnivalentCoefficients.from_dense(y), order)
        return _kernels.lk_rhs(y, p), -x * np.polyval(p[::-1], x)

    for i in range(nsteps):
        t = i * h
        ka1, kw1 = rhs(t, a, w)
        ka2, kw2 = rhs(t + h / 2, a + h / 2 * ka1, w + h / 2 * kw1)
        ka3, kw3 = rhs(t + h / 2, a + h / 2 * ka2, w + h / 2 * kw2)
        ka4, kw4 = rhs(t + h, a + h * ka3, w + h * kw3)
        a = a + h / 6 * (ka1 + 2 * ka2 + 2 * ka3 + ka4)
        w = w + h / 6 * (kw1 + 2 * kw2 + 2 * kw3 + kw4)
        bad = np.abs(w) >= 1
        if np.any(bad):
            return out, _kernels.STATUS_LEFT_DISK, i, int(np.argmax(bad))
        out[i + 1] = w
    return out, _kernels.STATUS_OK, nsteps, 0


def solve_lkord(z0, driver, t_end, dt=DEFAULT_DT, f0=None):
    """Single characteristic trajectory as a :class:`Trajectory`."""
    times, W = integrate_characteristics([z0], driver, t_end, dt, f0)
    return Trajectory(complex(z0), times, W[:, 0].copy())


@dataclass(frozen=True, eq=False)
class LimitRecovery:
    z: np.ndarray
    values: np.ndarray
    error_estimate: float
    converged: bool
    horizon: float


def recover_f_limit(driver, z_grid, T=20.0, dt=5e-3, tol=1e-6):
    """``f(z) = lim e^t w(z, t)`` evaluated at horizon ``T`` and checked against ``2T``."""
    z = np.asarray(z_grid, dtype=np.complex128)
    times, W = integrate_characteristics(z.reshape(-1), driver, 2 * T, dt)
    i_T = int(np.argmin(np.abs(times - T)))
    at_T = np.exp(times[i_T]) * W[i_T]
    at_2T = np.exp(times[-1]) * W[-1]
    err = float(np.max(np.abs(at_T - at_2T)))
    return LimitRecovery(z, at_2T.reshape(z.shape), err, err <= 10 * tol, float(times[-1]))


def stationary_coefficients(driver, order=16):
    """Fixed shape of a time-constant driver: the map with ``f = zeta f' p``.

    Then ``e^t f`` solves the coefficient system, and ``f`` is also the limit
    ``lim e^t w(z, t)`` of the characteristics, so this is the coefficient-side
    oracle for :func:`limit_coefficients`.  Solved by the triangular recursion
    ``(1 - n) a_n = sum_{m<n} m a_m p_{n-m}``.
    """
    if not driver.time_constant or driver.needs_state:
        raise InvalidDriverError("stationary shapes need a time-constant driver")
    p = np.asarray(driver.p_coeffs(0.0, None, order), dtype=np.complex128)
    a = np.zeros(order + 1, dtype=np.complex128)
    a[1] = 1.0
    for n in range(2, order + 1):
        m = np.arange(1, n)
        a[n] = np.sum(m * a[1:n] * p[n - m]) / (1 - n)
    return UnivalentCoefficients(a[1:])


def limit_coefficients(driver, order=16, radius=0.5, m=None, T=20.0, dt=5e-3, tol=1e-6):
    """Taylor coefficients of the recovered limit map, by FFT on ``|z| = radius``."""
    m = m or 4 * order
    z = radius * np.exp(1j * circle_grid(m))
    rec = recover_f_limit(driver, z, T, dt, tol)
    s = fourier_project(rec.values, order, 0, radius)
    a = s.coeffs[1:].copy()
    a[0] = a[0].real
    return UnivalentCoefficients(a), rec
