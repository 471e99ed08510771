"""Truncated complex power series on the unit disk.

A :class:`TruncatedSeries` stores ``c_L, ..., c_N`` for ``sum c_k zeta**k`` with
``L = lowest_index`` (negative values allowed, for the finite Laurent parts that
appear in Kirillov variations) and ``N = order``.  All binary operations demand
equal ``N``; nothing is ever silently promoted.  Operations that cannot know the
top coefficients (derivatives, reciprocals of series starting above degree 0)
re-pad with zeros and add to the ``lost`` count, so ``valid_order = N - lost``
is the highest degree whose coefficient is exact.
"""

from dataclasses import dataclass
from numbers import Number

import numpy as np

from . import _kernels
from .errors import CompositionError, OrderMismatchError, VanishingCoefficientError

DEFAULT_ORDER = 16


def circle_grid(m):
    """``m`` equally spaced angles ``2*pi*j/m``."""
    return 2.0 * np.pi * np.arange(m) / m


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    coeffs: np.ndarray
    order: int
    lowest_index: int = 0
    lost: int = 0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        order = int(self.order)
        low = int(self.lowest_index)
        if order < 0:
            raise ValueError(f"order must be non-negative, got {order}")
        if c.shape[0] != order - low + 1:
            raise ValueError(
                f"expected {order - low + 1} coefficients for degrees {low}..{order}, got {c.shape[0]}"
            )
        lost = max(0, min(int(self.lost), c.shape[0]))
        if lost:
            c[c.shape[0] - lost :] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "lowest_index", low)
        object.__setattr__(self, "lost", lost)

    # construction -------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs, order=None, lowest_index=0):
        """Build from a coefficient list starting at ``lowest_index``; pad or cut to ``order``."""
        c = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if order is None:
            order = lowest_index + c.shape[0] - 1
        n = order - lowest_index + 1
        out = np.zeros(n, dtype=np.complex128)
        out[: min(n, c.shape[0])] = c[:n]
        return cls(out, order, lowest_index)

    @classmethod
    def zeros(cls, order, lowest_index=0):
        return cls(np.zeros(order - lowest_index + 1), order, lowest_index)

    @classmethod
    def constant(cls, value, order):
        return cls.from_coeffs([value], order)

    @classmethod
    def monomial(cls, k, order, coeff=1.0):
        """``coeff * zeta**k`` (zero when ``k > order``)."""
        low = min(k, 0)
        c = np.zeros(order - low + 1, dtype=np.complex128)
        if k <= order:
            c[k - low] = coeff
        return cls(c, order, low)

    # inspection ---------------------------------------------------------

    @property
    def degrees(self):
        return np.arange(self.lowest_index, self.order + 1)

    @property
    def valid_order(self):
        return self.order - self.lost

    def coefficient(self, k):
        if self.lowest_index <= k <= self.order:
            return complex(self.coeffs[k - self.lowest_index])
        return 0j

    def dense(self, lowest=0):
        """Coefficients for degrees ``lowest..order`` (zeros where not stored)."""
        if lowest > self.lowest_index and np.any(self.coeffs[: lowest - self.lowest_index] != 0):
            raise ValueError(f"series has nonzero terms below degree {lowest}")
        out = np.zeros(self.order - lowest + 1, dtype=np.complex128)
        for k, c in zip(self.degrees, self.coeffs):
            if k >= lowest:
                out[k - lowest] = c
        return out

    def __call__(self, z):
        return evaluate(self, z)

    def __repr__(self):
        return (
            f"TruncatedSeries(order={self.order}, lowest_index={self.lowest_index}, "
            f"lost={self.lost}, coeffs={np.array2string(self.coeffs, precision=6)})"
        )

    # arithmetic sugar ---------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return add(scale(self, -1.0), other)

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return scale(self, 1.0 / other)
        return mul(self, reciprocal(other))


def _check_same_order(s, t):
    if s.order != t.order:
        raise OrderMismatchError(
            f"series orders differ ({s.order} vs {t.order}); re-truncate explicitly",
            left=s.order,
            right=t.order,
        )


def _as_series(x, order):
    if isinstance(x, TruncatedSeries):
        return x
    if isinstance(x, Number):
        return TruncatedSeries.constant(x, order)
    raise TypeError(f"cannot combine TruncatedSeries with {type(x).__name__}")


def add(s, t):
    t = _as_series(t, s.order)
    _check_same_order(s, t)
    low = min(s.lowest_index, t.lowest_index)
    return TruncatedSeries(s.dense(low) + t.dense(low), s.order, low, max(s.lost, t.lost))


def sub(s, t):
    return add(s, scale(_as_series(t, s.order), -1.0))


def scale(s, x):
    return TruncatedSeries(s.coeffs * x, s.order, s.lowest_index, s.lost)


def mul(s, t):
    """Cauchy product truncated at the common order."""
    if isinstance(t, Number):
        return scale(s, t)
    _check_same_order(s, t)
    n = s.order
    low = s.lowest_index + t.lowest_index
    if low > n:
        return TruncatedSeries.zeros(n, n)
    width = n - low + 1
    raw = np.convolve(s.coeffs, t.coeffs)[:width]
    c = np.zeros(width, dtype=np.complex128)
    c[: raw.shape[0]] = raw
    valid_top = min(s.valid_order + t.lowest_index, t.valid_order + s.lowest_index)
    return TruncatedSeries(c, n, low, max(0, n - valid_top))


def truncate(s, order):
    """Explicit re-truncation to a new order (the only way to change ``N``)."""
    if order < s.lowest_index:
        raise ValueError("new order below the lowest stored degree")
    c = s.dense(s.lowest_index)
    out = np.zeros(order - s.lowest_index + 1, dtype=np.complex128)
    k = min(out.shape[0], c.shape[0])
    out[:k] = c[:k]
    return TruncatedSeries(out, order, s.lowest_index, max(0, order - s.valid_order))


def shift(s, m):
    """Multiply by ``zeta**m``; terms pushed past the order are dropped."""
    n = s.order
    low = s.lowest_index + m
    if low > n:
        return TruncatedSeries.zeros(n, n)
    width = n - low + 1
    c = np.zeros(width, dtype=np.complex128)
    k = min(width, s.coeffs.shape[0])
    c[:k] = s.coeffs[:k]
    return TruncatedSeries(c, n, low, max(0, n - (s.valid_order + m)))


def reciprocal(s):
    """``1/s``, factoring out ``zeta**lowest_index``.

    For a series starting at degree ``L > 0`` the result starts at ``-L`` and only
    degrees up to ``N - 2L`` are determined; the rest are zero-padded and counted
    in ``lost``.
    """
    g = s.coeffs
    if g[0] == 0:
        raise VanishingCoefficientError(
            "leading coefficient vanishes; cannot invert", degree=s.lowest_index
        )
    n_g = g.shape[0]
    r = np.zeros(n_g, dtype=np.complex128)
    r[0] = 1.0 / g[0]
    for k in range(1, n_g):
        r[k] = -np.dot(g[1 : k + 1], r[k - 1 :: -1]) / g[0]
    L = s.lowest_index
    n = s.order
    width = n + L + 1
    out = np.zeros(width, dtype=np.complex128)
    k = min(width, n_g)
    out[:k] = r[:k]
    valid_top = s.valid_order - 2 * L
    return TruncatedSeries(out, n, -L, max(0, n - valid_top))


def differentiate(s):
    """Termwise derivative, re-padded to the same order (``lost`` grows by one)."""
    k = s.degrees
    dc = k * s.coeffs
    if s.lowest_index == 0:
        c = np.append(dc[1:], 0.0)
        low = 0
    else:
        c = np.append(dc, 0.0)
        low = s.lowest_index - 1
    return TruncatedSeries(c, s.order, low, s.lost + 1)


def compose(outer, inner):
    """``outer(inner(zeta))`` for ``inner`` without constant term (Horner scheme)."""
    _check_same_order(outer, inner)
    if outer.lowest_index < 0:
        raise CompositionError("outer series has negative powers")
    if inner.lowest_index <= 0:
        below = inner.coeffs[: 1 - inner.lowest_index]
        if np.any(below != 0):
            raise CompositionError(
                "inner series must vanish at the origin", constant=complex(inner.coefficient(0))
            )
    n = outer.order
    x = inner.dense(1)  # degrees 1..N
    x_full = np.concatenate(([0.0], x))
    c = outer.dense(0)
    acc = np.zeros(n + 1, dtype=np.complex128)
    acc[0] = c[n]
    for k in range(n - 1, -1, -1):
        acc = np.convolve(acc, x_full)[: n + 1]
        acc[0] += c[k]
    lost = n - min(outer.valid_order, inner.valid_order)
    return TruncatedSeries(acc, n, 0, lost)


def evaluate(s, z):
    """Point values ``sum c_k z**k``; works on scalars and arrays."""
    z = np.asarray(z, dtype=np.complex128)
    flat = np.ascontiguousarray(z.reshape(-1))
    vals = _kernels.horner(np.ascontiguousarray(s.coeffs), flat)
    if s.lowest_index != 0:
        vals = vals * flat ** s.lowest_index
    return vals.reshape(z.shape) if z.ndim else complex(vals[0])


def evaluate_on_circle(s, theta=None, m=None, radius=1.0):
    """Values on ``radius * exp(i theta)``; default grid has ``m = 4 N`` angles."""
    if theta is None:
        theta = circle_grid(m or 4 * max(s.order, 1))
    return evaluate(s, radius * np.exp(1j * np.asarray(theta, dtype=float)))


def fourier_project(samples, order, lowest_index=0, radius=1.0):
    """Recover coefficients from samples on a uniform circle grid (inverse of
    :func:`evaluate_on_circle`)."""
    samples = np.asarray(samples, dtype=np.complex128)
    m = samples.shape[0]
    width = order - lowest_index + 1
    if m < width:
        raise ValueError(f"{m} samples alias a series spanning {width} degrees")
    spectrum = np.fft.fft(samples) / m
    k = np.arange(lowest_index, order + 1)
    return TruncatedSeries(spectrum[k % m] / radius**k, order, lowest_index)


def pre_schwarzian(f):
    """``f''/f'`` as a truncated series (exact through degree ``N - 2``)."""
    if f.lowest_index < 0 or f.coefficient(1) == 0:
        raise VanishingCoefficientError("f'(0) vanishes", a1=f.coefficient(1))
    d1 = differentiate(f)
    d2 = differentiate(d1)
    return mul(d2, reciprocal(d1))


def schwarzian(f):
    """``S_f = f'''/f' - 3/2 (f''/f')**2``, exact through degree ``N - 3``."""
    h = pre_schwarzian(f)
    return sub(differentiate(h), scale(mul(h, h), 0.5))


@dataclass(frozen=True, eq=False)
class UnivalentCoefficients:
    """Taylor coefficients ``a_1..a_N`` of ``f = a_1 zeta + a_2 zeta**2 + ...`` with
    ``a_1 > 0``."""

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=np.complex128).reshape(-1)
        if a.shape[0] < 1:
            raise ValueError("need at least a_1")
        a1 = a[0]
        if abs(a1.imag) > 1e-12 * max(1.0, abs(a1)) or a1.real <= 0:
            raise ValueError(f"a_1 must be real and positive, got {a1}")
        a[0] = a1.real
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def identity(cls, order=DEFAULT_ORDER):
        a = np.zeros(order, dtype=np.complex128)
        a[0] = 1.0
        return cls(a)

    @classmethod
    def koebe(cls, order=DEFAULT_ORDER, rotation=1.0):
        """Coefficients of ``zeta/(1 - rotation*zeta)**2`` (``|rotation| = 1``)."""
        n = np.arange(1, order + 1)
        return cls(n * np.asarray(rotation, dtype=np.complex128) ** (n - 1))

    @classmethod
    def from_dense(cls, arr):
        """From a degree-indexed array ``arr[0..N]`` with ``arr[0] == 0``."""
        return cls(np.asarray(arr)[1:])

    @classmethod
    def from_series(cls, s):
        return cls(s.dense(1))

    @property
    def order(self):
        return self.a.shape[0]

    @property
    def a1(self):
        return float(self.a[0].real)

    def dense(self):
        out = np.zeros(self.order + 1, dtype=np.complex128)
        out[1:] = self.a
        return out

    def to_series(self):
        return TruncatedSeries(self.a, self.order, 1)

    def normalized(self):
        """Rescaled map ``f / a_1`` (so ``c_1 = 1``)."""
        return UnivalentCoefficients(self.a / self.a1)

    def c(self, k):
        """Affine coordinate ``c_k`` of the rescaled map (``c_1 = 1``)."""
        return complex(self.a[k - 1] / self.a1) if k <= self.order else 0j

    def rotated(self, alpha):
        """``exp(-i alpha) f(exp(i alpha) zeta)``."""
        n = np.arange(1, self.order + 1)
        return UnivalentCoefficients(self.a * np.exp(1j * alpha * (n - 1)))

    def __call__(self, z):
        return evaluate(self.to_series(), z)

    def derivative(self, z):
        return evaluate(differentiate(self.to_series()), z)
