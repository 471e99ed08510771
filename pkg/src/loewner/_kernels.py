"""Hot inner loops: Löwner-Kufarev right-hand sides, fixed-step RK4 drivers and
polynomial evaluation.

Two implementations of every kernel live here.  ``numba_impl`` holds loop-style
functions compiled with ``numba.njit``; ``numpy_impl`` holds vectorised numpy
equivalents.  The active set is exported at module level and chosen once at
import time:

* ``LOEWNER_DISABLE_NUMBA=1`` forces the numpy path;
* otherwise numba is used when it can be imported.

Coefficient arrays are indexed by degree, ``a[n]`` multiplying ``zeta**n``;
univalent maps carry ``a[0] == 0``.
"""

import os
import types

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("LOEWNER_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _DISABLED

# status codes shared by the trajectory kernels
STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_LEFT_DISK = 2


# ---------------------------------------------------------------------------
# loop implementations (compiled by numba when available)
# ---------------------------------------------------------------------------

def _lk_rhs_loop(a, p):
    n_terms = a.shape[0]
    out = np.zeros(n_terms, dtype=np.complex128)
    for n in range(1, n_terms):
        acc = 0j
        for m in range(1, n + 1):
            acc += m * a[m] * p[n - m]
        out[n] = acc
    return out


def _rk4_fixed_p_loop(a, p, h, nsteps):
    y = a.copy()
    for _ in range(nsteps):
        k1 = _lk_rhs_loop(y, p)
        k2 = _lk_rhs_loop(y + 0.5 * h * k1, p)
        k3 = _lk_rhs_loop(y + 0.5 * h * k2, p)
        k4 = _lk_rhs_loop(y + h * k3, p)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _rk4_tabulated_p_loop(a, p_stages, h):
    # p_stages[i, 0/1/2] = p at t_i, t_i + h/2, t_i + h
    y = a.copy()
    for i in range(p_stages.shape[0]):
        k1 = _lk_rhs_loop(y, p_stages[i, 0])
        k2 = _lk_rhs_loop(y + 0.5 * h * k1, p_stages[i, 1])
        k3 = _lk_rhs_loop(y + 0.5 * h * k2, p_stages[i, 1])
        k4 = _lk_rhs_loop(y + h * k3, p_stages[i, 2])
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _horner_loop(c, z):
    out = np.empty(z.shape[0], dtype=np.complex128)
    top = c.shape[0] - 1
    for j in range(z.shape[0]):
        acc = c[top]
        zj = z[j]
        for k in range(top - 1, -1, -1):
            acc = acc * zj + c[k]
        out[j] = acc
    return out


def _lkord_slit_loop(z0, u_stages, h, tol):
    # u_stages[i, 0/1/2] = u at t_i, t_i + h/2, t_i + h
    nz = z0.shape[0]
    nsteps = u_stages.shape[0]
    out = np.empty((nsteps + 1, nz), dtype=np.complex128)
    out[0] = z0
    w = z0.copy()
    for i in range(nsteps):
        for j in range(nz):
            x = w[j]
            e0 = np.exp(1j * u_stages[i, 0])
            e1 = np.exp(1j * u_stages[i, 1])
            e2 = np.exp(1j * u_stages[i, 2])
            if abs(e0 - x) < tol:
                return out, STATUS_SINGULAR, i, j
            k1 = -x * (e0 + x) / (e0 - x)
            x2 = x + 0.5 * h * k1
            if abs(e1 - x2) < tol:
                return out, STATUS_SINGULAR, i, j
            k2 = -x2 * (e1 + x2) / (e1 - x2)
            x3 = x + 0.5 * h * k2
            if abs(e1 - x3) < tol:
                return out, STATUS_SINGULAR, i, j
            k3 = -x3 * (e1 + x3) / (e1 - x3)
            x4 = x + h * k3
            if abs(e2 - x4) < tol:
                return out, STATUS_SINGULAR, i, j
            k4 = -x4 * (e2 + x4) / (e2 - x4)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if abs(x) >= 1.0:
                return out, STATUS_LEFT_DISK, i, j
            w[j] = x
        out[i + 1] = w
    return out, STATUS_OK, nsteps, 0


def _poly_at(c, x):
    acc = c[c.shape[0] - 1]
    for k in range(c.shape[0] - 2, -1, -1):
        acc = acc * x + c[k]
    return acc


def _lkord_poly_loop(z0, p_stages, h):
    nz = z0.shape[0]
    nsteps = p_stages.shape[0]
    out = np.empty((nsteps + 1, nz), dtype=np.complex128)
    out[0] = z0
    w = z0.copy()
    for i in range(nsteps):
        for j in range(nz):
            x = w[j]
            k1 = -x * _poly_at(p_stages[i, 0], x)
            x2 = x + 0.5 * h * k1
            k2 = -x2 * _poly_at(p_stages[i, 1], x2)
            x3 = x + 0.5 * h * k2
            k3 = -x3 * _poly_at(p_stages[i, 1], x3)
            x4 = x + h * k3
            k4 = -x4 * _poly_at(p_stages[i, 2], x4)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if abs(x) >= 1.0:
                return out, STATUS_LEFT_DISK, i, j
            w[j] = x
        out[i + 1] = w
    return out, STATUS_OK, nsteps, 0


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _lk_rhs_np(a, p):
    n = np.arange(a.shape[0])
    return np.convolve(n * a, p)[: a.shape[0]]


def _rk4_fixed_p_np(a, p, h, nsteps):
    y = np.array(a, dtype=np.complex128)
    for _ in range(nsteps):
        k1 = _lk_rhs_np(y, p)
        k2 = _lk_rhs_np(y + 0.5 * h * k1, p)
        k3 = _lk_rhs_np(y + 0.5 * h * k2, p)
        k4 = _lk_rhs_np(y + h * k3, p)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _rk4_tabulated_p_np(a, p_stages, h):
    y = np.array(a, dtype=np.complex128)
    for stage in p_stages:
        k1 = _lk_rhs_np(y, stage[0])
        k2 = _lk_rhs_np(y + 0.5 * h * k1, stage[1])
        k3 = _lk_rhs_np(y + 0.5 * h * k2, stage[1])
        k4 = _lk_rhs_np(y + h * k3, stage[2])
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _horner_np(c, z):
    return np.polyval(np.asarray(c)[::-1], z).astype(np.complex128)


def _lkord_slit_np(z0, u_stages, h, tol):
    w = np.array(z0, dtype=np.complex128)
    out = np.empty((u_stages.shape[0] + 1, w.shape[0]), dtype=np.complex128)
    out[0] = w
    for i, (u0, u1, u2) in enumerate(u_stages):
        e0, e1, e2 = np.exp(1j * u0), np.exp(1j * u1), np.exp(1j * u2)
        stages = []
        x = w
        for e, frac in ((e0, 0.5), (e1, 0.5), (e1, 1.0), (e2, None)):
            if np.any(np.abs(e - x) < tol):
                j = int(np.argmax(np.abs(e - x) < tol))
                return out, STATUS_SINGULAR, i, j
            k = -x * (e + x) / (e - x)
            stages.append(k)
            if frac is not None:
                x = w + frac * h * k
        k1, k2, k3, k4 = stages
        w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        bad = np.abs(w) >= 1.0
        if np.any(bad):
            return out, STATUS_LEFT_DISK, i, int(np.argmax(bad))
        out[i + 1] = w
    return out, STATUS_OK, u_stages.shape[0], 0


def _lkord_poly_np(z0, p_stages, h):
    w = np.array(z0, dtype=np.complex128)
    out = np.empty((p_stages.shape[0] + 1, w.shape[0]), dtype=np.complex128)
    out[0] = w
    for i, stage in enumerate(p_stages):
        k1 = -w * _horner_np(stage[0], w)
        x = w + 0.5 * h * k1
        k2 = -x * _horner_np(stage[1], x)
        x = w + 0.5 * h * k2
        k3 = -x * _horner_np(stage[1], x)
        x = w + h * k3
        k4 = -x * _horner_np(stage[2], x)
        w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        bad = np.abs(w) >= 1.0
        if np.any(bad):
            return out, STATUS_LEFT_DISK, i, int(np.argmax(bad))
        out[i + 1] = w
    return out, STATUS_OK, p_stages.shape[0], 0


numpy_impl = types.SimpleNamespace(
    name="numpy",
    lk_rhs=_lk_rhs_np,
    rk4_fixed_p=_rk4_fixed_p_np,
    rk4_tabulated_p=_rk4_tabulated_p_np,
    horner=_horner_np,
    lkord_slit=_lkord_slit_np,
    lkord_poly=_lkord_poly_np,
)

if NUMBA_AVAILABLE:
    _jit = numba.njit(cache=True)
    _lk_rhs_loop = _jit(_lk_rhs_loop)
    _poly_at = _jit(_poly_at)
    numba_impl = types.SimpleNamespace(
        name="numba",
        lk_rhs=_lk_rhs_loop,
        rk4_fixed_p=_jit(_rk4_fixed_p_loop),
        rk4_tabulated_p=_jit(_rk4_tabulated_p_loop),
        horner=_jit(_horner_loop),
        lkord_slit=_jit(_lkord_slit_loop),
        lkord_poly=_jit(_lkord_poly_loop),
    )
else:  # pragma: no cover
    numba_impl = None

active = numba_impl if USE_NUMBA else numpy_impl

lk_rhs = active.lk_rhs
rk4_fixed_p = active.rk4_fixed_p
rk4_tabulated_p = active.rk4_tabulated_p
horner = active.horner
lkord_slit = active.lkord_slit
lkord_poly = active.lkord_poly


def _as_c(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


def warmup(impl=None):
    """Trigger compilation of every kernel in ``impl`` (default: the active set)."""
    impl = impl or active
    a = np.zeros(4, dtype=np.complex128)
    a[1] = 1.0
    p = np.ones(4, dtype=np.complex128)
    impl.lk_rhs(a, p)
    impl.rk4_fixed_p(a, p, 1e-3, 1)
    impl.rk4_tabulated_p(a, np.ones((1, 3, 4), dtype=np.complex128), 1e-3)
    impl.horner(a, _as_c([0.1, 0.2j]))
    impl.lkord_slit(_as_c([0.1]), np.zeros((1, 3)), 1e-3, 1e-9)
    impl.lkord_poly(_as_c([0.1]), np.ones((1, 3, 2), dtype=np.complex128), 1e-3)
