"""Algebraic layer: circle vector fields, the Virasoro cocycle, Kirillov
variations of univalent maps and the Neretin polynomials.

Conventions (all pinned numerically by the test-suite):

* A :class:`CircleVectorField` stores Fourier coefficients of ``nu(theta)`` in
  the basis ``e^{ik theta}``; the distinguished basis is ``nu_k = -i e^{ik theta}``
  with ``[nu_m, nu_n] = (n - m) nu_{m+n}``.
* The Goluzin-Schiffer contour integral is evaluated literally, with
  ``e^{ik theta}`` continued to ``w^k`` on the contour.  For ``nu_k`` it returns
  ``i L_k[f]``, where ``L_k`` are the closed forms (``zeta^{1+k} f'`` for
  ``k >= 1``, ``zeta f' - f``, ...).  :data:`CONTOUR_FACTOR` holds that ``i``.
* On the coefficient chart ``c_2, c_3, ...`` the variation ``L_k`` acts as the
  derivation ``dc_m = (m - k) c_{m-k}`` (``c_1 = 1``); for ``k = 0`` this is
  ``sum (m - 1) c_m d/dc_m``, the weight operator.  As derivations of
  coordinate functions these satisfy ``[L_m, L_n] = (m - n) L_{m+n}``.
* The Gelfand-Fuks cocycle on ``nu_m, nu_{-m}`` equals
  ``MODE_NORMALIZATION * m (m^2 - 1)`` with ``MODE_NORMALIZATION = -i/2``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy

from .errors import ContourError, RecursionInconsistencyError
from .series import (
    TruncatedSeries,
    UnivalentCoefficients,
    circle_grid,
    differentiate,
    evaluate,
    mul,
    reciprocal,
    schwarzian,
    shift,
    sub,
    truncate,
)

CONTOUR_FACTOR = 1j
MODE_NORMALIZATION = -0.5j
DEFAULT_CONTOUR_RADIUS = 0.9
DEFAULT_CONTOUR_NODES = 1024


# ---------------------------------------------------------------------------
# vector fields on the circle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CircleVectorField:
    """Complexified vector field ``sum_{|k| <= K} fourier[k + K] e^{ik theta}``."""

    fourier: np.ndarray

    def __post_init__(self):
        c = np.array(self.fourier, dtype=np.complex128).reshape(-1)
        if c.shape[0] % 2 == 0:
            raise ValueError("need an odd number of modes -K..K")
        c.setflags(write=False)
        object.__setattr__(self, "fourier", c)

    @property
    def K(self):
        return (self.fourier.shape[0] - 1) // 2

    @classmethod
    def zeros(cls, K):
        return cls(np.zeros(2 * K + 1))

    @classmethod
    def from_modes(cls, modes):
        K = max((abs(k) for k in modes), default=0)
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        for k, v in modes.items():
            c[k + K] += v
        return cls(c)

    @classmethod
    def exp_mode(cls, k, coeff=1.0):
        """``coeff * e^{ik theta}``."""
        return cls.from_modes({k: coeff})

    @classmethod
    def basis(cls, k):
        """``nu_k = -i e^{ik theta}``."""
        return cls.from_modes({k: -1j})

    @classmethod
    def random(cls, rng, K, real=False):
        c = rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
        if real:
            c = 0.5 * (c + np.conj(c[::-1]))
        return cls(c)

    def coefficient(self, k):
        return complex(self.fourier[k + self.K]) if abs(k) <= self.K else 0j

    def padded(self, K):
        if K < self.K:
            raise ValueError("cannot pad to a smaller K")
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        c[K - self.K : K + self.K + 1] = self.fourier
        return CircleVectorField(c)

    @property
    def modes(self):
        return np.arange(-self.K, self.K + 1)

    def values(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * np.multiply.outer(theta, self.modes)) @ self.fourier

    def on_contour(self, w):
        """Analytic continuation ``sum fourier_k w^k``."""
        w = np.asarray(w, dtype=np.complex128)
        return np.power.outer(w, self.modes.astype(float)) @ self.fourier

    def derivative(self):
        return CircleVectorField(1j * self.modes * self.fourier)

    def is_real(self, tol=1e-12):
        return bool(np.max(np.abs(self.fourier - np.conj(self.fourier[::-1]))) <= tol)

    def __add__(self, other):
        K = max(self.K, other.K)
        return CircleVectorField(self.padded(K).fourier + other.padded(K).fourier)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, x):
        return CircleVectorField(self.fourier * x)

    def norm(self):
        return float(np.max(np.abs(self.fourier))) if self.fourier.size else 0.0


def _common(phi, psi):
    K = max(phi.K, psi.K)
    return phi.padded(K), psi.padded(K), K


def witt_bracket(phi, psi):
    """Fourier coefficients of ``phi psi' - phi' psi`` (exact, ``K`` adds)."""
    phi, psi, K = _common(phi, psi)
    m = phi.modes
    a, b = phi.fourier, psi.fourier
    out = np.convolve(a, 1j * m * b) - np.convolve(1j * m * a, b)
    return CircleVectorField(out)


def gelfand_fuks(phi, psi):
    """``-(1/4 pi) int (phi' + phi''') psi dtheta`` by exact Fourier pairing:
    ``(i/2) sum_m m (m^2 - 1) phi_m psi_{-m}``."""
    phi, psi, K = _common(phi, psi)
    m = phi.modes
    return complex(0.5j * np.sum(m * (m * m - 1) * phi.fourier * psi.fourier[::-1]))


def virasoro_bracket(x, y, charge=1.0):
    """Bracket of ``(phi, a)`` and ``(psi, b)`` in the central extension.

    The central components never enter the result: the centre commutes with
    everything.
    """
    phi, _ = x
    psi, _ = y
    return witt_bracket(phi, psi), charge / 12.0 * gelfand_fuks(phi, psi)


def measured_mode_normalization(m=2):
    """``omega(nu_m, nu_{-m}) / (m (m^2 - 1))``; equals :data:`MODE_NORMALIZATION`."""
    return gelfand_fuks(CircleVectorField.basis(m), CircleVectorField.basis(-m)) / (m * (m * m - 1))


def virasoro_mode_bracket(m, n, charge=1.0):
    """``[e_m, e_n] = (n - m) e_{m+n} + (c/12) m (m^2 - 1) delta_{n,-m}`` realised on
    ``nu_m``; returns ``(structure constant, mode index, central part)``."""
    nm, nn = CircleVectorField.basis(m), CircleVectorField.basis(n)
    field = witt_bracket(nm, nn)
    mode = m + n
    structure = field.coefficient(mode) / -1j
    central = charge / 12.0 * gelfand_fuks(nm, nn) / MODE_NORMALIZATION
    return structure, mode, central


# ---------------------------------------------------------------------------
# Goluzin-Schiffer variation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalyticMap:
    """Point evaluators for a normalised map; ``coeffs`` holds ``c_1..c_n`` if known."""

    f: object
    df: object
    coeffs: tuple = ()

    def c(self, k):
        return self.coeffs[k - 1]


def as_analytic_map(f):
    if isinstance(f, AnalyticMap):
        return f
    if isinstance(f, UnivalentCoefficients):
        g = f.normalized()
        s = g.to_series()
        d = differentiate(s)
        return AnalyticMap(lambda z: evaluate(s, z), lambda z: evaluate(d, z), tuple(complex(x) for x in g.a))
    fun, dfun = f[:2]
    coeffs = tuple(f[2]) if len(f) > 2 else ()
    return AnalyticMap(fun, dfun, coeffs)


def koebe_map():
    """Exact Koebe function ``zeta / (1 - zeta)^2`` with ``c_k = k``."""
    return AnalyticMap(
        lambda z: z / (1 - z) ** 2,
        lambda z: (1 + z) / (1 - z) ** 3,
        tuple(range(1, 65)),
    )


def _winding(values):
    ang = np.unwrap(np.angle(np.concatenate([values, values[:1]])))
    return int(round((ang[-1] - ang[0]) / (2 * math.pi)))


def goluzin_schiffer(f, nu, zeta, radius=DEFAULT_CONTOUR_RADIUS, nodes=DEFAULT_CONTOUR_NODES, check=True):
    """Literal contour value
    ``-(f(zeta)^2 / 2 pi i) oint (w f'/f)^2 nu(w) / (f(w) - f(zeta)) dw / w``
    on ``|w| = radius`` by the trapezoidal rule.

    Raises
    ------
    ContourError
        If some ``zeta`` is too close to the contour, or the winding counts show
        that ``f`` is not injective on the enclosed disk near the samples.
    """
    fmap = as_analytic_map(f)
    zeta = np.atleast_1d(np.asarray(zeta, dtype=np.complex128))
    r = np.abs(zeta)
    if np.any(r >= radius) or np.any((r / radius) ** nodes > 1e-13):
        raise ContourError("sample point too close to the contour", radius=radius, max_abs=float(r.max()))
    w = radius * np.exp(1j * circle_grid(nodes))
    fw = fmap.f(w)
    dfw = fmap.df(w)
    fz = fmap.f(zeta)
    if check:
        if _winding(fw) != 1:
            raise ContourError("f winds more than once about 0 on the contour", radius=radius)
        for z0, v in zip(zeta, fz):
            if _winding(fw - v) != 1:
                raise ContourError("f(w) - f(zeta) has extra zeros inside the contour", zeta=complex(z0))
    kern = (w * dfw / fw) ** 2 * nu.on_contour(w)
    # dw / w = i dtheta, so the 1/(2 pi i) cancels against i and the mean
    integral = np.mean(kern[None, :] / (fw[None, :] - fz[:, None]), axis=1)
    return -(fz**2) * integral


def printed_closed_form(k, f, zeta):
    """The tabulated closed forms for ``L_k[f]``, ``k >= -2``."""
    fmap = as_analytic_map(f)
    z = np.asarray(zeta, dtype=np.complex128)
    fz, dfz = fmap.f(z), fmap.df(z)
    if k >= 1:
        return z ** (1 + k) * dfz
    if k == 0:
        return z * dfz - fz
    c2 = fmap.c(2)
    if k == -1:
        return dfz - 1 - 2 * c2 * fz
    if k == -2:
        c3 = fmap.c(3)
        return dfz / z - 1 / fz - 3 * c2 + (c2 * c2 - 4 * c3) * fz
    raise ValueError("closed forms are tabulated for k >= -2 only")


def _mode_variation(s, k):
    """``L_k`` as a series: ``zeta^{k+1} f' - sum_{j <= -k} A_j f^{1-j}`` with
    ``A_j = [w^{-k}] (w f'/f)^2 f^j`` (the residues at the origin)."""
    n = s.order
    d = differentiate(s)
    out = shift(d, k + 1)
    if k >= 1:
        return truncate(out, n) if out.lowest_index <= n else TruncatedSeries.zeros(n)
    q = mul(d, reciprocal(shift(s, -1)))
    q = mul(q, q)
    inv = reciprocal(s)
    power = TruncatedSeries.constant(1.0, n)
    for j in range(0, -k + 1):
        a_j = mul(q, power).coefficient(-k)
        if j == 0:
            term = s
        elif j == 1:
            term = TruncatedSeries.constant(1.0, n)
        else:
            term = inv
            for _ in range(j - 2):
                term = mul(term, inv)
        out = sub(out, term * a_j)
        power = mul(power, s)
    return out


def kirillov_variation(f, nu):
    """Variation ``L_nu[f]`` as a truncated series, normalised so that
    ``nu_k = -i e^{ik theta}`` gives ``L_k``; equals the contour value divided by
    :data:`CONTOUR_FACTOR`.

    ``nu`` may be an integer ``k`` (meaning ``nu_k``) or a :class:`CircleVectorField`.
    Negative powers cancel identically; the result starts at degree 0.
    """
    g = f.normalized() if isinstance(f, UnivalentCoefficients) else f
    s = g.to_series() if isinstance(g, UnivalentCoefficients) else g
    if isinstance(nu, (int, np.integer)):
        terms = {int(nu): 1.0}
    else:
        # e^{ik theta} = i nu_k
        terms = {int(k): 1j * v for k, v in zip(nu.modes, nu.fourier) if v != 0}
    total = np.zeros(s.order + 1, dtype=np.complex128)
    lost = 0
    for k, coeff in terms.items():
        v = _mode_variation(s, k)
        total += coeff * v.dense(0)[: s.order + 1]
        lost = max(lost, s.order - v.valid_order)
    return TruncatedSeries(total, s.order, 0, lost)


def variation_vector(f, nu):
    """Coefficient increments ``(dc_2, ..., dc_N)`` of ``L_nu`` at ``f``."""
    return kirillov_variation(f, nu).dense(0)[2:]


def commutator_closure(f, phi, psi, eps=1e-4):
    """Compare the Lie bracket of the coefficient vector fields ``L_phi``, ``L_psi``
    (nested central differences with step ``eps``) with ``L_{[phi, psi]}``.

    Returns ``(bracket, expected)`` with ``expected = -L_{[phi, psi]}``; the minus
    sign is the usual one for variations acting on the map from the right.  Only
    ``c_2..c_{N-q}`` are compared, ``q`` the largest negative mode present in
    ``phi``, ``psi`` or their bracket: a
    mode ``-q`` couples ``c_m`` to the unavailable ``c_{m+q}``.
    """
    g = f.normalized()
    base = g.a.copy()

    def field(a, nu):
        return variation_vector(UnivalentCoefficients(a), nu)

    def directional(nu_outer, direction):
        a_p = base.copy()
        a_m = base.copy()
        a_p[1:] += eps * direction
        a_m[1:] -= eps * direction
        return (field(a_p, nu_outer) - field(a_m, nu_outer)) / (2 * eps)

    v_phi = field(base, phi)
    v_psi = field(base, psi)
    bracket = directional(psi, v_phi) - directional(phi, v_psi)
    expected = -field(base, witt_bracket(phi, psi))
    fields = (phi, psi, witt_bracket(phi, psi))
    q = max([-int(k) for nu in fields for k in nu.modes[nu.fourier != 0] if k < 0], default=0)
    keep = g.order - 1 - q
    return bracket[:keep], expected[:keep]


# ---------------------------------------------------------------------------
# coordinate polynomials and the Neretin recursion
# ---------------------------------------------------------------------------

def _key(exps):
    return tuple(sorted((int(i), int(e)) for i, e in exps.items() if e))


class CoordinatePolynomial:
    """Sparse polynomial in ``c_2, c_3, ...``; monomials are tuples of
    ``(index, exponent)`` pairs.  Coefficients may be exact (``Fraction``) or
    complex."""

    def __init__(self, terms=None):
        self.terms = {}
        for k, v in (terms or {}).items():
            key = _key(dict(k))
            self.terms[key] = self.terms.get(key, 0) + v
        self.terms = {k: v for k, v in self.terms.items() if v != 0}

    @classmethod
    def variable(cls, i):
        return cls({((i, 1),): Fraction(1)})

    @classmethod
    def constant(cls, v):
        return cls({(): v})

    @property
    def max_index(self):
        return max((i for k in self.terms for i, _ in k), default=1)

    def weight_of(self, key):
        return sum((i - 1) * e for i, e in key)

    def is_homogeneous(self, weight):
        return all(self.weight_of(k) == weight for k in self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return CoordinatePolynomial(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        return isinstance(other, CoordinatePolynomial) and (self - other).terms == {}

    def scale(self, x):
        return CoordinatePolynomial({k: v * x for k, v in self.terms.items()})

    def derivative(self, i):
        out = {}
        for key, v in self.terms.items():
            exps = dict(key)
            e = exps.get(i, 0)
            if e:
                exps[i] = e - 1
                k2 = _key(exps)
                out[k2] = out.get(k2, 0) + v * e
        return CoordinatePolynomial(out)

    def times_variable(self, i, coeff=1):
        out = {}
        for key, v in self.terms.items():
            exps = dict(key)
            exps[i] = exps.get(i, 0) + 1
            k2 = _key(exps)
            out[k2] = out.get(k2, 0) + v * coeff
        return CoordinatePolynomial(out)

    def evaluate(self, c):
        """``c`` maps index ``j`` to ``c_j`` (a sequence indexed from 0 works too)."""
        total = 0j
        for key, v in self.terms.items():
            m = complex(v)
            for i, e in key:
                m *= complex(c[i]) ** e
            total += m
        return total

    def evaluate_map(self, f):
        g = f.normalized()
        c = {j: g.c(j) for j in range(1, g.order + 1)}
        return self.evaluate(c)

    def to_sympy(self, symbols=None):
        expr = sympy.Integer(0)
        for key, v in self.terms.items():
            coeff = sympy.Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else sympy.nsimplify(v)
            m = coeff
            for i, e in key:
                m *= sympy.Symbol(f"c_{i}") ** e
            expr += m
        return sympy.expand(expr)

    def to_json(self):
        out = []
        for key in sorted(self.terms):
            v = complex(self.terms[key])
            out.append({"monomial": {str(i): e for i, e in key}, "coeff": [v.real, v.imag]})
        return out

    @classmethod
    def from_json(cls, obj):
        terms = {}
        for item in obj:
            key = _key({int(i): int(e) for i, e in item["monomial"].items()})
            re, im = item["coeff"]
            terms[key] = terms.get(key, 0) + complex(re, im)
        return cls(terms)

    def pretty(self, factor=False):
        """Human-readable form, lowest degree first; ``factor=True`` pulls out the
        rational content, e.g. ``6*(c_3 - c_2^2)``."""
        if not self.terms:
            return "0"
        order = sorted(self.terms, key=lambda k: (sum(e for _, e in k), [-i for i, _ in k]))
        content = _content([self.terms[k] for k in order]) if factor else None
        parts = []
        for key in order:
            v = self.terms[key] / content if content is not None else self.terms[key]
            mono = "*".join(f"c_{i}" if e == 1 else f"c_{i}^{e}" for i, e in key)
            parts.append(_fmt_coeff(v, mono))
        s = " + ".join(parts).replace("+ -", "- ")
        if content is None or content == 1:
            return s
        return f"{_fmt_coeff(content, '')}*({s})"

    def __repr__(self):
        return f"CoordinatePolynomial({self.pretty()})"


def _content(values):
    """Rational gcd of exact coefficients, signed like the first one; ``None`` if
    any coefficient is inexact."""
    fr = []
    for v in values:
        if isinstance(v, Fraction):
            fr.append(v)
        elif isinstance(v, int):
            fr.append(Fraction(v))
        else:
            v = complex(v)
            if v.imag or not float(v.real).is_integer():
                return None
            fr.append(Fraction(int(v.real)))
    num = 0
    den = 1
    for x in fr:
        num = math.gcd(num, x.numerator)
        den = den * x.denominator // math.gcd(den, x.denominator)
    if num == 0:
        return None
    c = Fraction(num, den)
    return c if fr[0] > 0 else -c


def _fmt_coeff(v, mono):
    if isinstance(v, Fraction):
        txt = str(v)
    else:
        v = complex(v)
        if abs(v.imag) < 1e-14:
            x = v.real
            txt = str(int(x)) if float(x).is_integer() else f"{x:.12g}"
        else:
            txt = f"({v.real:.12g}{v.imag:+.12g}j)"
    if not mono:
        return txt
    if txt == "1":
        return mono
    if txt == "-1":
        return "-" + mono
    return f"{txt}*{mono}"


def kirillov_coordinate_operator(k, P, order=None, return_dropped=False):
    """Apply the derivation ``L_k`` to ``P`` in the coefficient chart.

    ``L_k = d/dc_{k+1} + sum_{n>=2} n c_n d/dc_{n+k}`` for ``k >= 1`` and
    ``L_0 = sum_n (n - 1) c_n d/dc_n``.  With the shifted index
    ``d_k = d/dc_{k+1}`` the ``k >= 1`` operator reads ``d_k + sum (n+1) c_{n+1} d_{k+n}``.
    Terms that would need ``c_j`` with ``j > order`` are dropped and counted.
    """
    if k < 0:
        raise ValueError("coordinate operators are defined for k >= 0")
    top = order or max(P.max_index, k + 1)
    out = CoordinatePolynomial()
    dropped = 0
    if k == 0:
        for i in range(2, top + 1):
            out = out + P.derivative(i).times_variable(i, i - 1)
    else:
        if k + 1 <= top:
            out = out + P.derivative(k + 1)
        for n in range(2, top + 1):
            j = n + k
            d = P.derivative(j) if j <= top else CoordinatePolynomial()
            if j > top:
                dropped += 1 if any(dict(key).get(j, 0) for key in P.terms) else 0
                continue
            out = out + d.times_variable(n, n)
    return (out, dropped) if return_dropped else out


def _weight_monomials(weight):
    """Monomials in ``c_2..c_{weight+1}`` of total weight ``weight``."""
    out = []

    def parts(n, max_part):
        if n == 0:
            yield []
            return
        for p in range(min(n, max_part), 0, -1):
            for rest in parts(n - p, p):
                yield [p] + rest

    for partition in parts(weight, weight):
        exps = {}
        for p in partition:
            exps[p + 1] = exps.get(p + 1, 0) + 1
        out.append(_key(exps))
    return out


@lru_cache(maxsize=None)
def _neretin_unit(k_max):
    """Neretin polynomials at central charge 1, exact rational coefficients."""
    polys = [CoordinatePolynomial(), CoordinatePolynomial()]
    for n in range(2, k_max + 1):
        unknowns = _weight_monomials(n)
        rows, rhs = [], []
        for m in range(1, n + 1):
            images = [kirillov_coordinate_operator(m, CoordinatePolynomial({key: Fraction(1)})) for key in unknowns]
            target = polys[n - m].scale(n + m) if n - m >= 0 else CoordinatePolynomial()
            if m == n:
                target = target + CoordinatePolynomial.constant(Fraction(m * (m * m - 1), 12))
            keys = set(target.terms)
            for img in images:
                keys |= set(img.terms)
            for key in sorted(keys):
                rows.append([img.terms.get(key, 0) for img in images])
                rhs.append(target.terms.get(key, 0))
        A = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x for x in r] for r in rows])
        b = sympy.Matrix([sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x for x in rhs])
        try:
            sol, params = A.gauss_jordan_solve(b)
        except ValueError as exc:
            raise RecursionInconsistencyError("Neretin recursion has no solution", k=n) from exc
        if params.shape[0]:
            raise RecursionInconsistencyError("Neretin recursion is underdetermined", k=n, free=params.shape[0])
        terms = {key: Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for key, v in zip(unknowns, sol) if v != 0}
        polys.append(CoordinatePolynomial(terms))
    return tuple(polys)


def neretin_recursion(k_max, charge=1):
    """``P_0..P_{k_max}`` solving
    ``L_m P_n = (n + m) P_{n-m} + (c/12) m (m^2 - 1) delta_{n,m}`` with ``P_0 = P_1 = 0``.

    Each ``P_n`` is sought among polynomials homogeneous of weight ``n``
    (``c_j`` has weight ``j - 1``); the linear system is solved exactly and must
    be consistent and uniquely solvable.  ``P_n`` is linear in ``c``, so the
    system is solved once at ``c = 1``.  Integer or ``Fraction`` charges keep
    exact coefficients.
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    unit = _neretin_unit(max(k_max, 1))[: k_max + 1]
    if isinstance(charge, (int, Fraction)):
        return [p.scale(Fraction(charge)) for p in unit]
    return [p.scale(complex(charge)) for p in unit]


def neretin_symbolic(k_max):
    """Sympy expressions of ``P_k`` with the charge as the symbol ``c``."""
    c = sympy.Symbol("c")
    return [sympy.expand(c * p.to_sympy()) for p in _neretin_unit(max(k_max, 1))[: k_max + 1]]


def neretin_generatrix(f, charge=1.0):
    """``(c zeta^2 / 12) S_f(zeta)``; its ``zeta^k`` coefficient is ``P_k`` at ``f``."""
    if f.order < 5:
        raise ValueError("need order >= 5")
    return shift(schwarzian(f.normalized().to_series()), 2) * (charge / 12.0)


def psi_pairing(f, nu, m=None):
    """``(Psi, nu)_f = int e^{2i theta} nu(e^{i theta}) S_f(e^{i theta}) dtheta``.

    ``nu`` is anything with a ``values(theta)`` method (a :class:`CircleVectorField`
    or a real boundary density).
    """
    if f.order < 5:
        raise ValueError("need order >= 5")
    K = getattr(nu, "K", 0)
    m = m or max(4 * f.order, 4 * K, 64)
    theta = circle_grid(m)
    e = np.exp(1j * theta)
    s = evaluate(schwarzian(f.to_series()), e)
    return complex(2 * math.pi * np.mean(e * e * nu.values(theta) * s))


@dataclass(frozen=True)
class BieberbachFunctionals:
    abs_c2: float
    abs_c3_minus_c2sq: float
    p2_over_c: complex
    p3_over_c: complex

    def as_tuple(self):
        return (self.abs_c2, self.abs_c3_minus_c2sq, self.p2_over_c, self.p3_over_c)


def bieberbach_functionals(f):
    """``|c_2|``, ``|c_3 - c_2^2|``, ``P_2/c`` and ``P_3/c`` of the map rescaled to
    ``a_1 = 1``."""
    g = f.normalized()
    c2, c3 = g.c(2), g.c(3)
    c4 = g.c(4) if g.order >= 4 else 0j
    return BieberbachFunctionals(
        abs(c2),
        abs(c3 - c2 * c2),
        0.5 * (c3 - c2 * c2),
        2.0 * (c4 - 2 * c2 * c3 + c2**3),
    )
