"""Driving terms ``p(zeta, t)`` of the Löwner-Kufarev equation.

A smooth chain is driven by a positive density ``nu`` on the circle with
``int nu dtheta = 4 pi``.  The Schwarz kernel turns it into the Herglotz
function ``p = 1 + sum_{k>=1} nu_hat_k zeta**k`` whose boundary real part is
``nu / 2``.  The printed Herglotz display in the source material carries a
stray ``zeta`` prefactor; the kernel used here is the standard one, which is
the only form compatible with ``p(0) = 1``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryDegeneracyError, InvalidDensityError, InvalidDriverError
from .series import TruncatedSeries, UnivalentCoefficients, circle_grid, evaluate_on_circle, differentiate

POSITIVITY_THRESHOLD = 1e-10
NORMALIZATION_TOL = 1e-10
DEGENERACY_THRESHOLD = 1e-8
MIN_GRID = 64


@dataclass(frozen=True, eq=False)
class BoundaryDensity:
    """Real density ``nu(theta) = sum_{|k|<=K} nu_hat_k exp(ik theta)`` stored for
    ``k >= 0``; negative modes are the conjugates."""

    nu_hat: np.ndarray

    def __post_init__(self):
        c = np.array(self.nu_hat, dtype=np.complex128).reshape(-1)
        if c.shape[0] < 1:
            raise ValueError("nu_hat needs at least the mean mode")
        c.setflags(write=False)
        object.__setattr__(self, "nu_hat", c)

    @property
    def K(self):
        return self.nu_hat.shape[0] - 1

    @classmethod
    def uniform(cls):
        return cls([2.0])

    @classmethod
    def from_modes(cls, modes):
        """``{k: nu_hat_k}``; e.g. ``{0: 2, 1: 0.5}`` is ``2 + cos(theta)``."""
        K = max(modes)
        c = np.zeros(K + 1, dtype=np.complex128)
        for k, v in modes.items():
            if k < 0:
                raise ValueError("give non-negative modes only")
            c[k] = v
        return cls(c)

    @classmethod
    def from_samples(cls, values, K):
        values = np.asarray(values, dtype=float)
        spectrum = np.fft.fft(values) / values.shape[0]
        return cls(spectrum[: K + 1])

    def grid_size(self, m=None):
        return m or max(4 * self.K, MIN_GRID)

    def values(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.arange(1, self.K + 1)
        osc = np.exp(1j * np.multiply.outer(theta, k)) @ self.nu_hat[1:] if self.K else 0.0
        return self.nu_hat[0].real + 2.0 * np.real(osc)

    def padded(self, K):
        c = np.zeros(max(K, self.K) + 1, dtype=np.complex128)
        c[: self.K + 1] = self.nu_hat
        return c

    def to_json(self):
        return {"K": self.K, "nu_hat": [[float(z.real), float(z.imag)] for z in self.nu_hat]}

    @classmethod
    def from_json(cls, obj):
        """Accepts ``{"K", "nu_hat": [[re, im], ...]}`` or the shorthand
        ``{"modes": {"0": 2, "1": 0.5}}`` (values real or ``[re, im]``)."""
        if "modes" in obj:
            modes = {}
            for k, v in obj["modes"].items():
                modes[int(k)] = complex(*v) if isinstance(v, (list, tuple)) else complex(v)
            return cls.from_modes(modes)
        pairs = obj["nu_hat"]
        c = np.array([complex(re, im) for re, im in pairs])
        if "K" in obj and int(obj["K"]) != c.shape[0] - 1:
            raise ValueError(f"K={obj['K']} does not match {c.shape[0]} coefficients")
        return cls(c)


@dataclass(frozen=True)
class DensityDiagnostics:
    min_value: float
    normalization_residual: float
    hermitian_residual: float
    grid_size: int
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations


def validate_density(nu, m=None, threshold=POSITIVITY_THRESHOLD):
    """Grid minimum, deviation of ``nu_hat_0`` from 2, and the reality residual."""
    m = nu.grid_size(m)
    vmin = float(np.min(nu.values(circle_grid(m))))
    norm = abs(nu.nu_hat[0].real - 2.0)
    herm = abs(nu.nu_hat[0].imag)
    violations = []
    if herm > NORMALIZATION_TOL:
        violations.append("reality")
    if vmin <= threshold:
        violations.append("positivity")
    if norm > NORMALIZATION_TOL:
        violations.append("normalization")
    return DensityDiagnostics(vmin, norm, herm, m, tuple(violations))


def require_valid(nu, m=None):
    diag = validate_density(nu, m)
    if not diag.ok:
        inv = diag.violations[0]
        detail = {
            "reality": f"Im nu_hat_0 = {diag.hermitian_residual:.3g}",
            "positivity": f"min nu = {diag.min_value:.6g} on {diag.grid_size} points",
            "normalization": f"|nu_hat_0 - 2| = {diag.normalization_residual:.3g}",
        }[inv]
        raise InvalidDensityError(f"density violates {inv}: {detail}", invariant=inv)
    return diag


def herglotz_from_density(nu, order, check=True):
    """Herglotz series ``p`` with ``Re p(e^{i theta}) = nu(theta)/2`` and ``p(0) = 1``."""
    if check:
        require_valid(nu)
    c = np.zeros(order + 1, dtype=np.complex128)
    c[0] = 1.0
    k = min(nu.K, order)
    c[1 : k + 1] = nu.nu_hat[1 : k + 1]
    return TruncatedSeries(c, order)


def slit_kernel(u, order):
    """Series of ``(e^{iu} + zeta)/(e^{iu} - zeta)``: ``p_k = 2 e^{-iku}``."""
    k = np.arange(order + 1)
    c = 2.0 * np.exp(-1j * k * u)
    c[0] = 1.0
    return TruncatedSeries(c, order)


def laplacian_density(state, K=None, m=None, threshold=DEGENERACY_THRESHOLD):
    """Hele-Shaw density ``2/(sigma |f'|^2)`` renormalised to total mass ``4 pi``.

    ``sigma`` is the circle mean of ``1/|f'|^2``; dividing by it is a time
    reparametrisation that keeps the chain inside the hypotheses of the action
    variation formula.  ``state`` is a :class:`UnivalentCoefficients` or anything
    with an ``f`` attribute holding one.
    """
    f = getattr(state, "f", state)
    n = f.order
    K = n if K is None else K
    m = m or max(8 * n, 4 * K, MIN_GRID)
    df = evaluate_on_circle(differentiate(f.to_series()), m=m)
    mod = np.abs(df)
    if np.min(mod) < threshold:
        raise BoundaryDegeneracyError(
            "|f'| vanishes on the circle; Laplacian growth cannot continue",
            min_abs_derivative=float(np.min(mod)),
        )
    g = 1.0 / mod**2
    nu = 2.0 * g / np.mean(g)
    c = np.fft.fft(nu)[: K + 1] / m
    c[0] = 2.0
    return BoundaryDensity(c)


# ---------------------------------------------------------------------------
# driver variants
# ---------------------------------------------------------------------------

class Driver:
    """Common interface: the Herglotz coefficients at time ``t``."""

    kind = "abstract"
    needs_state = False
    time_constant = False
    smooth = True

    def p_coeffs(self, t, f=None, order=16):
        raise NotImplementedError

    def density(self, t, f=None):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantUnit(Driver):
    kind = "constant"
    time_constant = True

    def p_coeffs(self, t, f=None, order=16):
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = 1.0
        return c

    def density(self, t, f=None):
        return BoundaryDensity.uniform()

    def to_json(self):
        return {"type": self.kind}


@dataclass(frozen=True, eq=False)
class SmoothDensity(Driver):
    """Keyframed density; Fourier coefficients interpolate linearly in time and
    stay constant outside the keyframe range."""

    keyframes: tuple = field(default=())
    kind = "smooth"

    def __post_init__(self):
        frames = self.keyframes
        if isinstance(frames, BoundaryDensity):
            frames = ((0.0, frames),)
        frames = tuple((float(t), nu) for t, nu in frames)
        if not frames:
            raise InvalidDriverError("SmoothDensity needs at least one density")
        times = [t for t, _ in frames]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidDriverError("keyframe times must be strictly increasing", times=times)
        for t, nu in frames:
            try:
                require_valid(nu)
            except InvalidDensityError as exc:
                raise InvalidDensityError(f"{exc.message} (keyframe t={t})", exc.invariant, t=t) from None
        object.__setattr__(self, "keyframes", frames)

    @property
    def time_constant(self):
        return len(self.keyframes) == 1

    @property
    def K(self):
        return max(nu.K for _, nu in self.keyframes)

    def density(self, t, f=None):
        frames = self.keyframes
        if t <= frames[0][0]:
            return frames[0][1]
        if t >= frames[-1][0]:
            return frames[-1][1]
        i = np.searchsorted([s for s, _ in frames], t) - 1
        (t0, nu0), (t1, nu1) = frames[i], frames[i + 1]
        w = (t - t0) / (t1 - t0)
        K = max(nu0.K, nu1.K)
        nu = BoundaryDensity((1 - w) * nu0.padded(K) + w * nu1.padded(K))
        require_valid(nu)
        return nu

    def p_coeffs(self, t, f=None, order=16):
        return herglotz_from_density(self.density(t), order, check=False).coeffs.copy()

    def to_json(self):
        return {
            "type": self.kind,
            "keyframes": [{"t": t, "density": nu.to_json()} for t, nu in self.keyframes],
        }


@dataclass(frozen=True, eq=False)
class SlitKernel(Driver):
    """One-slit driver with piecewise-linear ``u(t)`` through ``(times, values)``."""

    times: np.ndarray = field(default_factory=lambda: np.array([0.0]))
    values: np.ndarray = field(default_factory=lambda: np.array([0.0]))
    kind = "slit"
    smooth = False

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        u = np.atleast_1d(np.asarray(self.values, dtype=float))
        if t.shape != u.shape:
            raise InvalidDriverError("u(t) needs as many values as knots")
        if np.any(np.diff(t) <= 0):
            raise InvalidDriverError("u(t) knots must be strictly increasing")
        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(t)):
            raise InvalidDriverError("u(t) must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", u)

    @classmethod
    def constant(cls, u=0.0):
        return cls(np.array([0.0]), np.array([float(u)]))

    @property
    def time_constant(self):
        return bool(np.all(self.values == self.values[0]))

    def u(self, t):
        return np.interp(t, self.times, self.values)

    def p_coeffs(self, t, f=None, order=16):
        return slit_kernel(float(self.u(t)), order).coeffs.copy()

    def density(self, t, f=None):
        raise InvalidDriverError("a slit kernel has a point-mass density, not a smooth one")

    def to_json(self):
        return {"type": self.kind, "u": {"t": self.times.tolist(), "u": self.values.tolist()}}


@dataclass(frozen=True)
class LaplacianGrowth(Driver):
    """Hele-Shaw driver: the density is read off the current map at every stage."""

    K: int = None
    kind = "laplacian"
    needs_state = True

    def density(self, t, f=None):
        if f is None:
            raise InvalidDriverError("Laplacian growth needs the current map")
        return laplacian_density(f, self.K)

    def p_coeffs(self, t, f=None, order=16):
        if not isinstance(f, UnivalentCoefficients):
            f = UnivalentCoefficients.from_dense(f)
        return herglotz_from_density(self.density(t, f), order, check=False).coeffs.copy()

    def to_json(self):
        out = {"type": self.kind}
        if self.K is not None:
            out["K"] = self.K
        return out


def driver_from_json(obj):
    """Inverse of ``Driver.to_json``; densities use the ``{"K", "nu_hat"}`` layout."""
    kind = obj.get("type")
    if kind == "constant":
        return ConstantUnit()
    if kind == "smooth":
        if "keyframes" in obj:
            frames = [(kf["t"], BoundaryDensity.from_json(kf["density"])) for kf in obj["keyframes"]]
        elif "density" in obj:
            frames = [(0.0, BoundaryDensity.from_json(obj["density"]))]
        else:
            raise InvalidDriverError("smooth driver needs 'density' or 'keyframes'")
        return SmoothDensity(tuple(frames))
    if kind == "slit":
        u = obj.get("u", 0.0)
        if isinstance(u, dict):
            return SlitKernel(u["t"], u["u"])
        return SlitKernel.constant(float(u))
    if kind == "laplacian":
        return LaplacianGrowth(obj.get("K"))
    raise InvalidDriverError(f"unknown driver type {kind!r}")
