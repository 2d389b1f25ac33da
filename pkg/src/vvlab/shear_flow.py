"""Shear flow u = (phi(t, z), 0) over a no-slip wall at z = 0.

The channel is periodic of width 2L in x1 and unbounded in z = x2 > 0.  The
profile phi solves the heat equation with phi(t, 0) = 0, so

    phi(t, z) = (4 pi nu t)^(-1/2) int_0^inf [G(z - y) - G(z + y)] phi0(y) dy,

G(x) = exp(-x^2 / (4 nu t)).  With sigma = 2 sqrt(nu t) and the odd
extension phi0~ of phi0 this reads

    phi(t, z) = pi^(-1/2) int exp(-w^2) phi0~(sigma (z / sigma + w)) dw,

which is what the quadrature evaluates.  The vorticity is -d phi / dz.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InitialLayerError, QuadratureError
from .specfun import _reference_rule, composite_gauss, graded_edges

# Gaussian factor exp(-w^2) is below 1e-170 beyond this many kernel widths
KERNEL_WIDTH = 20.0
_PANELS_PER_PIECE = 40
_ORDER = 16


@dataclass(frozen=True)
class ShearProfile:
    """Initial shear phi0(z), z >= 0, with declared bounds.

    ``bound`` B and ``decay`` beta declare |phi0(y)| <= B exp(-beta y)
    (beta = 0 means merely bounded); ``lipschitz`` bounds |phi0'|;
    ``extent`` is the depth beyond which phi0 is constant or negligible.
    """

    kind: str
    params: tuple
    bound: float
    decay: float
    lipschitz: float
    extent: float
    breakpoints: tuple = ()
    label: str = ""
    _fn: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("bound", "lipschitz", "extent"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"profile {name} must be finite and nonnegative, got {v!r}")
        if not (math.isfinite(self.decay) and self.decay >= 0):
            raise DomainError("decay rate must be finite and nonnegative")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = self._fn(z)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def value_at_0(self):
        return float(self(0.0))

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, value=1.0):
        v = float(value)
        return cls("constant", (v,), abs(v), 0.0, 0.0, 0.0, (), f"constant:{v:g}",
                   lambda z: np.full(np.shape(z), v) if np.ndim(z) else v)

    @classmethod
    def exponential(cls, amplitude=1.0, rate=1.0):
        a, b = float(amplitude), float(rate)
        if not b > 0:
            raise DomainError("exponential profile needs a positive decay rate")
        return cls("exponential", (a, b), abs(a), b, abs(a) * b, 40.0 / b, (),
                   f"exponential:{a:g},{b:g}", lambda z: a * np.exp(-b * z))

    @classmethod
    def gaussian_poly(cls, coeffs=(1.0,), width=1.0):
        """(sum_i c_i z^i) exp(-(z / width)^2)."""
        c = tuple(float(x) for x in coeffs)
        w = float(width)
        if not c or not w > 0:
            raise DomainError("gaussian_poly needs coefficients and a positive width")
        P = np.polynomial.Polynomial(c)
        dP = P.deriv()

        def fn(z):
            return P(z) * np.exp(-((z / w) ** 2))

        grid = np.linspace(0.0, 12.0 * w, 24001)
        g = np.exp(-((grid / w) ** 2))
        bound = float(np.max(np.abs(P(grid) * g)))
        slope = float(np.max(np.abs((dP(grid) - 2.0 * grid / w**2 * P(grid)) * g)))
        # beyond 10 widths exp(-100) swamps any polynomial of modest degree
        extent = 10.0 * w * max(1.0, math.sqrt(len(c)))
        return cls("gaussian_poly", c + (w,), bound * 1.01, 0.0, slope * 1.01, extent, (),
                   "gaussian_poly:" + ",".join(f"{x:g}" for x in c), fn)

    @classmethod
    def from_table(cls, z, values, bound, decay=0.0, label="table"):
        """Cubic interpolant of samples starting at z = 0.

        Beyond the last sample the profile continues as
        last_value * exp(-decay (z - z_last)).
        """
        z = np.asarray(z, dtype=float)
        v = np.asarray(values, dtype=float)
        if z.ndim != 1 or z.shape != v.shape or len(z) < 4:
            raise DomainError("table needs at least 4 (z, phi0) pairs")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(v))):
            raise DomainError("table values must be finite")
        if abs(z[0]) > 1e-12 or np.any(np.diff(z) <= 0):
            raise DomainError("table depths must start at 0 and increase strictly")
        if np.max(np.abs(v)) > bound * (1 + 1e-12):
            raise DomainError("table exceeds its declared bound")
        spline = CubicSpline(z, v)
        end, last, beta = float(z[-1]), float(v[-1]), float(decay)

        def fn(y):
            y = np.asarray(y, dtype=float)
            inside = spline(np.minimum(y, end))
            outside = last * np.exp(-beta * np.maximum(y - end, 0.0))
            return np.where(y <= end, inside, outside)

        fine = np.linspace(0.0, end, 20001)
        slope = max(float(np.max(np.abs(spline(fine, 1)))), abs(last) * beta)
        extent = end + (40.0 / beta if beta > 0 else 0.0)
        return cls("table", (tuple(z.tolist()), tuple(v.tolist())), float(bound), beta, slope,
                   extent, (end,), label, fn)

    @classmethod
    def from_csv(cls, path, bound, decay=0.0):
        rows = []
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if i == 0:
                        continue
                    raise DomainError(f"{path}: line {i + 1} is not a numeric (z, phi0) pair")
        z, v = zip(*rows) if rows else ((), ())
        return cls.from_table(z, v, bound, decay, label=f"table:{path}")

    def __reduce__(self):
        # the evaluator is a closure; rebuild it from the parameters instead
        if self.kind == "table":
            z, v = self.params
            return (_rebuild_table, (z, v, self.bound, self.decay, self.label))
        if self.kind == "gaussian_poly":
            return (ShearProfile.gaussian_poly, (self.params[:-1], self.params[-1]))
        return (getattr(ShearProfile, self.kind), self.params)

    def odd(self, y):
        """Odd extension of phi0 to the whole line."""
        return np.sign(y) * self._fn(np.abs(y))


def _rebuild_table(z, v, bound, decay, label):
    return ShearProfile.from_table(z, v, bound, decay, label)


@dataclass(frozen=True)
class ShearSolution:
    profile: ShearProfile
    nu: float
    half_width: float = 0.5
    kernel_width: float = KERNEL_WIDTH
    order: int = _ORDER

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise DomainError(f"nu must be positive, got {self.nu!r}")
        if not self.half_width > 0:
            raise DomainError("channel half-width must be positive")

    @property
    def wall_length(self):
        return 2.0 * self.half_width


def shear_solution(profile: ShearProfile, nu: float, half_width: float = 0.5) -> ShearSolution:
    return ShearSolution(profile, float(nu), float(half_width))


# ---------------------------------------------------------------------------
# Kernel quadrature
# ---------------------------------------------------------------------------


def _piece_rule(edges, order):
    """Gauss nodes/weights on [edges[:, i], edges[:, i+1]] split into equal panels.

    ``edges`` has shape (n, P + 1); returns arrays of shape (n, P * panels * order).
    """
    x, w = _reference_rule(order)
    n = edges.shape[0]
    lo = edges[:, :-1]
    width = np.diff(edges, axis=1)
    frac = np.arange(_PANELS_PER_PIECE) / _PANELS_PER_PIECE
    a = lo[:, :, None] + width[:, :, None] * frac  # panel starts
    h = width[:, :, None] / _PANELS_PER_PIECE
    nodes = a[..., None] + 0.5 * h[..., None] * (x + 1.0)
    weights = 0.5 * h[..., None] * w * np.ones_like(nodes)
    return nodes.reshape(n, -1), weights.reshape(n, -1)


def _check_time(t):
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"time must be positive, got {t!r}")


def _check_depth(z):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("depth z must be finite and nonnegative")
    return arr


def _kernel_moments(solution, t, z):
    """(int e^{-w^2} phi0~ dw, int 2w e^{-w^2} phi0~ dw) / sqrt(pi) at each z."""
    sigma = 2.0 * math.sqrt(solution.nu * t)
    W = solution.kernel_width
    flat = z.ravel()
    zeta = flat / sigma
    # phi0~ jumps where its argument crosses 0 and kinks at +-breakpoints
    cuts = [-zeta]
    for y in solution.profile.breakpoints:
        cuts.append(y / sigma - zeta)
        cuts.append(-y / sigma - zeta)
    cuts = np.clip(np.stack(cuts, axis=1), -W, W)
    cuts.sort(axis=1)
    edges = np.concatenate([np.full((len(flat), 1), -W), cuts, np.full((len(flat), 1), W)], axis=1)
    nodes, weights = _piece_rule(edges, solution.order)
    values = solution.profile.odd(sigma * (zeta[:, None] + nodes))
    g = weights * np.exp(-nodes * nodes) * values
    m0 = g.sum(axis=1) / math.sqrt(math.pi)
    m1 = (g * 2.0 * nodes).sum(axis=1) / math.sqrt(math.pi)
    return m0.reshape(z.shape), m1.reshape(z.shape), sigma


def phi(solution: ShearSolution, t: float, z):
    """phi(t, z) by quadrature of the image kernel; exactly 0 at z = 0."""
    _check_time(t)
    z = _check_depth(z)
    m0, _, _ = _kernel_moments(solution, t, z)
    m0 = np.where(z == 0, 0.0, m0)
    return float(m0) if m0.ndim == 0 else m0


def phi_z(solution: ShearSolution, t: float, z):
    """d phi / dz at (t, z) from the differentiated kernel."""
    _check_time(t)
    z = _check_depth(z)
    _, m1, sigma = _kernel_moments(solution, t, z)
    out = m1 / sigma
    return float(out) if out.ndim == 0 else out


def vorticity(solution: ShearSolution, t: float, z):
    """w = d1 u2 - d2 u1 = -d phi / dz."""
    if t == 0:
        if solution.profile.value_at_0 != 0:
            raise InitialLayerError("shear vorticity at t = 0 carries a wall vortex sheet")
        z = _check_depth(z)
        h = 1e-7
        out = -(solution.profile(z + h) - solution.profile(np.maximum(z - h, 0.0))) / (
            h + np.minimum(z, h)
        )
        return float(out) if np.ndim(out) == 0 else out
    out = -np.asarray(phi_z(solution, t, z))
    return float(out) if out.ndim == 0 else out


def boundary_gradient(solution: ShearSolution, t: float) -> float:
    """d phi / dz at z = 0, i.e. (pi nu t)^(-1/2) int_0^inf 2 eta e^{-eta^2} phi0(2 sqrt(nu t) eta) d eta."""
    _check_time(t)
    sigma = 2.0 * math.sqrt(solution.nu * t)
    W = solution.kernel_width
    cuts = sorted(min(y / sigma, W) for y in solution.profile.breakpoints)
    edges = np.array([[0.0, *cuts, W]])
    nodes, weights = _piece_rule(edges, solution.order)
    eta, w = nodes[0], weights[0]
    integral = np.dot(w, 2.0 * eta * np.exp(-eta * eta) * solution.profile(sigma * eta))
    return float(integral / math.sqrt(math.pi * solution.nu * t))


def _time_integral(f, T, panels):
    """int_0^T f(t) dt with t = s^2, Gauss panels in s."""
    rule = composite_gauss(np.linspace(0.0, math.sqrt(T), panels + 1), _ORDER)
    values = np.array([f(s * s) for s in rule.nodes])
    return float(np.dot(rule.weights, values * 2.0 * rule.nodes))


def boundary_integral(solution: ShearSolution, T: float) -> float:
    """nu int_0^T int_Gamma w (u_bar . tau) = -2 L phi0(0) nu int_0^T d_z phi(t, 0) dt.

    The wall has length 2L and tau = (1, 0), so u_bar . tau = phi0(0).
    """
    _check_time(T)
    phi00 = solution.profile.value_at_0
    if phi00 == 0:
        return 0.0
    coarse = _time_integral(lambda t: boundary_gradient(solution, t), T, 8)
    fine = _time_integral(lambda t: boundary_gradient(solution, t), T, 16)
    if abs(fine - coarse) > 1e-8 * max(abs(fine), 1e-300):
        raise QuadratureError(f"boundary time integral unresolved: {coarse!r} vs {fine!r}")
    return -solution.wall_length * phi00 * solution.nu * fine


def ns_velocity(solution: ShearSolution, t: float, z):
    """First velocity component phi(t, z); phi0(z) at t = 0."""
    if t == 0:
        return solution.profile(_check_depth(z))
    return phi(solution, t, z)


def euler_velocity(solution: ShearSolution, z):
    """The stationary Euler shear u_bar = u0."""
    return solution.profile(_check_depth(z))


def depth_rule(solution: ShearSolution, t: float, extra_scale=None):
    """Quadrature rule on [0, Z] resolving the wall layer of width sqrt(nu t).

    Z covers the layer (40 sigma) and the profile's own extent.
    """
    sigma = 2.0 * math.sqrt(solution.nu * t)
    depth = 2.0 * solution.kernel_width * sigma + solution.profile.extent
    edges = graded_edges(depth, sigma if extra_scale is None else min(sigma, extra_scale))
    for y in solution.profile.breakpoints:
        if 0 < y < depth:
            edges = np.union1d(edges, [y])
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14 * depth])]
    return composite_gauss(edges, _ORDER)


def l2_error_squared(solution: ShearSolution, t: float) -> float:
    """||u(t) - u_bar||^2 over the periodic cell: 2L int_0^inf (phi - phi0)^2 dz."""
    if t == 0:
        return 0.0
    rule = depth_rule(solution, t)
    diff = phi(solution, t, rule.nodes) - solution.profile(rule.nodes)
    return solution.wall_length * float(np.dot(rule.weights, diff * diff))
