"""Special functions and quadrature used by every series and integral in vvlab.

Bessel functions of order 0, 1 and 2 are evaluated without an external
special-function library: a Maclaurin series near the origin, Miller's
backward recurrence at moderate arguments and the Hankel asymptotic
expansion beyond.  Gauss-Legendre nodes come from numpy; the error
function comes from scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .errors import BracketError, DomainError

__all__ = [
    "QuadratureRule",
    "gauss_legendre",
    "composite_gauss",
    "graded_edges",
    "bessel_j",
    "bessel_j01",
    "BesselTable",
    "j1_zeros",
    "erf",
    "erfc",
    "erfcx",
    "iterated_erfc_scaled",
    "LayerSpec",
    "smooth_cutoff",
    "smooth_cutoff_slope",
    "Estimate",
]


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of an interpolatory rule on [a, b].

    ``order`` is the number of Gauss points per panel; a single-panel rule
    integrates polynomials of degree ``2 * order - 1`` exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))

    def __len__(self):
        return len(self.nodes)


@lru_cache(maxsize=64)
def _reference_rule(order):
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(order: int, a: float, b: float) -> QuadratureRule:
    """Gauss-Legendre rule with ``order`` nodes mapped to [a, b]."""
    if int(order) != order or order < 1:
        raise DomainError(f"quadrature order must be a positive integer, got {order!r}")
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"invalid interval [{a}, {b}]")
    x, w = _reference_rule(int(order))
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (x + 1.0), half * w, int(order))


def composite_gauss(edges, order: int = 20) -> QuadratureRule:
    """Gauss-Legendre rule of ``order`` points on every panel between ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("panel edges must be strictly increasing")
    x, w = _reference_rule(int(order))
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return QuadratureRule(nodes, weights, int(order))


def graded_edges(width: float, scale: float, ratio: float = 2.0, first: float = 0.25):
    """Panel edges on [0, width] refined geometrically toward 0.

    The first panel has length ``first * scale``; panels then grow by
    ``ratio`` until ``width`` is reached.  Used wherever the integrand has a
    boundary layer of thickness ``scale`` at 0.
    """
    if width <= 0:
        raise DomainError("width must be positive")
    h = first * scale
    if not h > 0 or h >= width:
        return np.array([0.0, width])
    edges = [0.0]
    while h < width:
        edges.append(h)
        h *= ratio
    # avoid a sliver panel at the far end
    if width - edges[-1] < 0.25 * (edges[-1] - edges[-2]):
        edges[-1] = width
    else:
        edges.append(width)
    return np.array(edges)


# ---------------------------------------------------------------------------
# Bessel functions J0, J1, J2
# ---------------------------------------------------------------------------

_SERIES_MAX = 8.0
_MILLER_MAX = 25.0
_MILLER_START = 80
_SERIES_TERMS = 40
_HANKEL_TERMS = 16


def _hankel_coefficients(n, count):
    # a_k(n) = prod_{i=1..k} (4n^2 - (2i-1)^2) / (k! 8^k)
    mu = 4.0 * n * n
    coeffs = [1.0]
    for k in range(1, count):
        coeffs.append(coeffs[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return np.array(coeffs)


_HANKEL = {n: _hankel_coefficients(n, 2 * _HANKEL_TERMS) for n in (0, 1, 2)}


def _series(n, x):
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term.copy()
    q = -half * half
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + n))
        total += term
    return total


def _miller(x):
    """J0, J1, J2 by backward recurrence normalised with J0 + 2 sum J_2k = 1."""
    b_next = np.zeros_like(x)
    b = np.ones_like(x)
    norm = np.zeros_like(x)
    out = {}
    inv = 2.0 / x
    for n in range(_MILLER_START, 0, -1):
        b_prev = n * inv * b - b_next
        b_next, b = b, b_prev
        m = n - 1
        if m <= 2:
            out[m] = b
        if m > 0 and m % 2 == 0:
            norm += 2.0 * b
    norm += out[0]
    return out[0] / norm, out[1] / norm, out[2] / norm


# (lower end of argument range, number of P and Q terms) keeping the
# first omitted term below 1e-16
_HANKEL_TIERS = ((1000.0, 3), (100.0, 5), (60.0, 6), (_MILLER_MAX, _HANKEL_TERMS))


def _hankel(n, x, cos_x, sin_x, terms=_HANKEL_TERMS):
    a = _HANKEL[n]
    y = 1.0 / x
    y2 = y * y
    # Horner in 1/x^2 for P (even coefficients) and Q (odd coefficients)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for k in range(terms - 1, -1, -1):
        sign = -1.0 if k % 2 else 1.0
        p = p * y2 + sign * a[2 * k]
        q = q * y2 + sign * a[2 * k + 1]
    q = q * y
    phase = (2 * n + 1) * math.pi / 4.0
    cos_chi = cos_x * math.cos(phase) + sin_x * math.sin(phase)
    sin_chi = sin_x * math.cos(phase) - cos_x * math.sin(phase)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi)


def _check_argument(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    if np.any(arr < 0):
        raise DomainError("Bessel argument must be nonnegative")
    return arr


def _bessel(orders, x):
    arr = _check_argument(x)
    flat = arr.ravel()
    result = {n: np.empty_like(flat) for n in orders}

    small = flat < _SERIES_MAX
    if np.any(small):
        xs = flat[small]
        for n in orders:
            result[n][small] = _series(n, xs)

    middle = (~small) & (flat < _MILLER_MAX)
    if np.any(middle):
        values = _miller(flat[middle])
        for n in orders:
            result[n][middle] = values[n]

    upper = np.inf
    for lower, terms in _HANKEL_TIERS:
        band = (flat >= lower) & (flat < upper)
        upper = lower
        if not np.any(band):
            continue
        xl = flat[band]
        cos_x, sin_x = np.cos(xl), np.sin(xl)
        for n in orders:
            result[n][band] = _hankel(n, xl, cos_x, sin_x, terms)

    if arr.ndim == 0:
        return [float(result[n][0]) for n in orders]
    return [result[n].reshape(arr.shape) for n in orders]


def bessel_j(order: int, x):
    """Bessel function of the first kind J_order(x) for order in {0, 1, 2}, x >= 0.

    Accepts scalars or arrays; absolute accuracy is about 1e-13 up to x = 1000.
    """
    if order not in (0, 1, 2):
        raise DomainError(f"order must be 0, 1 or 2, got {order!r}")
    return _bessel((order,), x)[0]


def bessel_j01(x):
    """(J0(x), J1(x)) sharing one pass of argument reduction."""
    j0, j1 = _bessel((0, 1), x)
    return j0, j1


# ---------------------------------------------------------------------------
# Zeros of J1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BesselTable:
    """The first ``count`` positive zeros of J1 with J0 evaluated there."""

    count: int
    zeros: np.ndarray
    j0_at_zeros: np.ndarray
    signs: np.ndarray

    def check(self):
        """Raise AssertionError if any table invariant is violated."""
        k = np.arange(1, self.count + 1)
        z = self.zeros
        assert len(z) == self.count
        assert np.all(np.diff(z) > 0), "zeros not strictly increasing"
        assert np.all(1 + k < z) and np.all(z <= math.pi * (0.5 + k)), "zero bounds violated"
        assert np.max(np.abs(bessel_j(1, z))) <= 1e-12, "J1 not zero at a tabulated zero"
        expected = np.where(k % 2 == 1, -1.0, 1.0)
        assert np.array_equal(self.signs, expected), "signs of J0 do not alternate from -1"


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=16)
def j1_zeros(count: int) -> BesselTable:
    """Bracket each zero of J1 near pi (k + 1/4), bisect to 1e-6, polish by Newton."""
    if int(count) != count or count < 1:
        raise DomainError(f"need at least one zero, got {count!r}")
    k = np.arange(1, int(count) + 1, dtype=float)
    lo = math.pi * (k + 0.25) - 0.5
    hi = math.pi * (k + 0.5)
    f_lo = bessel_j(1, lo)
    f_hi = bessel_j(1, hi)
    bad = np.sign(f_lo) == np.sign(f_hi)
    if np.any(bad):
        first = int(k[bad][0])
        raise BracketError(f"failed to bracket zero {first} of J1; Bessel evaluation is defective")

    while np.max(hi - lo) > 1e-6:
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(1, mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)

    z = 0.5 * (lo + hi)
    for _ in range(8):
        j0, j1 = bessel_j01(z)
        step = j1 / (j0 - j1 / z)
        z = z - step
        # steps stall at the rounding level of J1 near large zeros
        if np.max(np.abs(step) / np.maximum(z, 1.0)) < 1e-15:
            break
    else:
        raise BracketError("Newton polish of J1 zeros did not converge")

    j0 = bessel_j(0, z)
    return BesselTable(int(count), _freeze(z), _freeze(j0), _freeze(np.sign(j0)))


# ---------------------------------------------------------------------------
# Error function family
# ---------------------------------------------------------------------------


def _finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    return arr


def _as_output(arr, value):
    return float(value) if arr.ndim == 0 else value


def erf(x):
    arr = _finite(x)
    return _as_output(arr, special.erf(arr))


def erfc(x):
    arr = _finite(x)
    return _as_output(arr, special.erfc(arr))


def erfcx(x):
    """Scaled complementary error function exp(x^2) erfc(x)."""
    arr = _finite(x)
    return _as_output(arr, special.erfcx(arr))


_IERFC_RULE = 64


def _ierfc_cutoff(k, x):
    # f(u) = k log u - u^2 - 2xu is concave with its peak at u_p; find U > u_p
    # where f has dropped by 46.  Newton from the right stays on the safe side.
    u_p = 0.5 * (np.sqrt(x * x + 2.0 * k) - x)
    safe_p = np.where(k > 0, u_p, 1.0)
    f_p = np.where(k > 0, k * np.log(safe_p) - u_p * u_p - 2.0 * x * u_p, 0.0)
    u = u_p + 12.0
    for _ in range(12):
        g = k * np.log(u) - u * u - 2.0 * x * u - f_p + 46.0
        dg = k / u - 2.0 * u - 2.0 * x
        u = u - g / dg
    return u


def iterated_erfc_scaled(kmax: int, x) -> np.ndarray:
    """exp(x^2) * i^k erfc(x) for k = -1, 0, ..., kmax and x >= 0.

    Row ``k + 1`` of the result holds order ``k``.  Uses the representation
    exp(x^2) i^k erfc(x) = 2/sqrt(pi) * int_0^inf u^k/k! exp(-u^2 - 2xu) du,
    whose integrand is positive, so no cancellation occurs at large x.
    Each order gets a Gauss rule fitted to where its own integrand lives.
    """
    xs = _finite(x).ravel()
    if np.any(xs < 0):
        raise DomainError("iterated erfc is only provided for x >= 0")
    out = np.empty((kmax + 2, len(xs)))
    out[0] = 2.0 / math.sqrt(math.pi)
    if kmax < 0:
        return out
    t, w = _reference_rule(_IERFC_RULE)
    k = np.arange(kmax + 1, dtype=float)[:, None]
    upper = _ierfc_cutoff(k, xs[None, :])[..., None]
    u = 0.5 * upper * (t + 1.0)
    log_f = k[..., None] * np.log(u) - u * u - 2.0 * xs[None, :, None] * u
    log_f -= np.array([math.lgamma(j + 1.0) for j in range(kmax + 1)])[:, None, None]
    out[1:] = (2.0 / math.sqrt(math.pi)) * 0.5 * upper[..., 0] * (np.exp(log_f) @ w)
    return out


# ---------------------------------------------------------------------------
# Boundary-layer cutoff
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LayerSpec:
    """Boundary-layer geometry: outer width ``delta``, inner width ``delta_star``
    and the Kato constant ``kato_constant`` (the Kato layer has width c * nu)."""

    delta: float
    delta_star: float
    kato_constant: float = 1.0

    def __post_init__(self):
        if not (0 < self.delta_star < self.delta):
            raise DomainError(
                f"layer requires 0 < delta_star < delta, got delta={self.delta}, "
                f"delta_star={self.delta_star}"
            )
        if not self.kato_constant > 0:
            raise DomainError("kato_constant must be positive")

    def kato_width(self, nu):
        return self.kato_constant * nu


def smooth_cutoff(layer: LayerSpec, distance_to_boundary):
    """C^1 cutoff equal to 1 within delta_star of the boundary and 0 beyond delta.

    Cubic smoothstep in the normalised gap; |slope| <= 1.5 / (delta - delta_star).
    """
    d = _finite(distance_to_boundary)
    if np.any(d < 0):
        raise DomainError("distance to the boundary must be nonnegative")
    s = np.clip((d - layer.delta_star) / (layer.delta - layer.delta_star), 0.0, 1.0)
    return _as_output(d, 1.0 - s * s * (3.0 - 2.0 * s))


def smooth_cutoff_slope(layer: LayerSpec, distance_to_boundary):
    """Derivative of :func:`smooth_cutoff` with respect to the distance."""
    d = _finite(distance_to_boundary)
    gap = layer.delta - layer.delta_star
    s = np.clip((d - layer.delta_star) / gap, 0.0, 1.0)
    return _as_output(d, -6.0 * s * (1.0 - s) / gap)


# ---------------------------------------------------------------------------
# Values carrying an error estimate
# ---------------------------------------------------------------------------


class Estimate(float):
    """A float that also carries an absolute error estimate in ``error``."""

    def __new__(cls, value, error=0.0):
        obj = super().__new__(cls, value)
        obj.error = float(error)
        return obj

    def __repr__(self):
        return f"Estimate({float(self)!r}, error={self.error!r})"
