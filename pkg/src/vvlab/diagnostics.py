"""Boundary-layer and weak-convergence functionals of the exact flows.

Every functional accepts either a disk solution or a shear solution.  Depth
below the wall is measured by d = 1 - r on the disk and d = z in the
channel; area elements are 2 pi r dr and 2L dz respectively.

Time integrals over [0, T] use t = s^2 with Gauss panels in s refined
geometrically toward s = 0, which makes the t^(-1/2) initial-layer
behaviour of the vorticity harmless.  Where a relative accuracy is promised
the integral is repeated on a grid with twice as many panels and the
difference is reported as the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import disk_flow, shear_flow
from .disk_flow import DiskSpectralSolution, EulerDiskSolution
from .errors import DomainError, QuadratureError
from .shear_flow import ShearSolution
from .specfun import (
    Estimate,
    LayerSpec,
    bessel_j,
    composite_gauss,
    graded_edges,
    j1_zeros,
    smooth_cutoff,
)

__all__ = [
    "LayerSpec",
    "TestFunction",
    "MassBudget",
    "SheetPairing",
    "disk_test_library",
    "kato_layer_enstrophy",
    "layer_l1_mass",
    "sheet_pairing",
    "boundary_flux",
    "mass_budget",
    "lp_norm_scan",
    "trace_ratio",
    "weak_velocity_pairing",
]

_ORDER = 16
_KATO_RTOL = 1e-6


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A scalar function of r (disk) or z (channel) with its derivative."""

    __test__ = False  # not a pytest class

    name: str
    value: Callable
    derivative: Callable | None = None

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    @classmethod
    def radial_poly(cls, coeffs, name=None):
        """h(r) = sum_i b_i r^(2i)."""
        b = tuple(float(c) for c in coeffs)
        P = np.polynomial.Polynomial(b)
        dP = P.deriv()
        label = name or "poly:" + ",".join(f"{c:g}" for c in b)
        return cls(label, lambda r: P(r * r) + 0.0 * r, lambda r: 2.0 * r * dP(r * r))

    @classmethod
    def bessel_mode(cls):
        """J0(j_{1,1} r), the first Neumann mode of the disk."""
        j = float(j1_zeros(1).zeros[0])
        return cls("bessel_j0", lambda r: bessel_j(0, j * r), lambda r: -j * bessel_j(1, j * r))

    @classmethod
    def constant(cls, value=1.0):
        v = float(value)
        return cls(f"constant:{v:g}", lambda x: np.full(np.shape(x), v), lambda x: np.zeros(np.shape(x)))


def disk_test_library():
    """The fixed suite {1, r^2, r^4, 1 - r^2, J0(j_11 r)}."""
    return [
        TestFunction.radial_poly([1.0], "one"),
        TestFunction.radial_poly([0.0, 1.0], "r^2"),
        TestFunction.radial_poly([0.0, 0.0, 1.0], "r^4"),
        TestFunction.radial_poly([1.0, -1.0], "1-r^2"),
        TestFunction.bessel_mode(),
    ]


# ---------------------------------------------------------------------------
# Geometry adapters
# ---------------------------------------------------------------------------


class _Disk:
    def __init__(self, solution):
        self.solution = solution
        self.nu = solution.nu
        self.depth = 1.0

    def vorticity(self, t, d):
        return disk_flow.vorticity(self.solution, t, np.clip(1.0 - d, 0.0, 1.0))

    def velocity_error(self, t, d):
        r = np.clip(1.0 - d, 0.0, 1.0)
        return disk_flow.velocity(self.solution, t, r) - self.solution.profile.velocity(r)

    def weight(self, d):
        return 2.0 * math.pi * (1.0 - d)

    def initial_vorticity(self, d):
        return self.solution.profile.vorticity(1.0 - d)

    def whole_depth(self, t):
        return 1.0

    @property
    def wall_speed(self):
        return float(self.solution.profile.velocity(1.0))

    def coordinate(self, d):
        return 1.0 - d

    def wall_vorticity(self, t):
        return disk_flow.boundary_vorticity(self.solution, t)

    wall_measure = 2.0 * math.pi


class _Shear:
    def __init__(self, solution):
        self.solution = solution
        self.nu = solution.nu

    def vorticity(self, t, d):
        return shear_flow.vorticity(self.solution, t, d)

    def velocity_error(self, t, d):
        return shear_flow.phi(self.solution, t, d) - self.solution.profile(d)

    def weight(self, d):
        return np.full(np.shape(d), self.solution.wall_length)

    def initial_vorticity(self, d):
        p = self.solution.profile
        h = 1e-6
        return -(p(d + h) - p(np.maximum(d - h, 0.0))) / (h + np.minimum(d, h))

    def whole_depth(self, t):
        s = self.solution
        return 2.0 * s.kernel_width * 2.0 * math.sqrt(s.nu * t) + s.profile.extent

    @property
    def wall_speed(self):
        return self.solution.profile.value_at_0

    def coordinate(self, d):
        return d

    def wall_vorticity(self, t):
        return -shear_flow.boundary_gradient(self.solution, t)

    @property
    def wall_measure(self):
        return self.solution.wall_length


def _adapter(solution):
    if isinstance(solution, DiskSpectralSolution):
        return _Disk(solution)
    if isinstance(solution, ShearSolution):
        return _Shear(solution)
    raise DomainError(f"unsupported solution type {type(solution).__name__}")


# ---------------------------------------------------------------------------
# Quadrature helpers
# ---------------------------------------------------------------------------


_NOISE = 1e-11


def _time_rule(T, s_scale, ratio, extra=()):
    """Gauss rule in s = sqrt(t) on [0, sqrt(T)], panels growing by ``ratio``.

    ``extra`` holds additional panel edges in s (kinks of the integrand).
    """
    root = math.sqrt(T)
    s_min = 1e-3 * min(s_scale, root)
    edges = [0.0, s_min]
    while edges[-1] * ratio < root * (1 - 1e-12):
        edges.append(edges[-1] * ratio)
    if root - edges[-1] < 0.25 * (edges[-1] - edges[-2]) and len(edges) > 2:
        edges[-1] = root
    else:
        edges.append(root)
    edges = np.union1d(edges, [e for e in extra if 0 < e < root])
    return composite_gauss(edges, _ORDER)


def _time_integral(f, T, s_scale, ratio, extra=()):
    rule = _time_rule(T, s_scale, ratio, extra)
    values = np.array([f(s * s) for s in rule.nodes])
    return float(np.dot(rule.weights, values * 2.0 * rule.nodes))


def _refined_time_integral(f, T, s_scale, rtol, what, extra=()):
    """Integral with grading ratio 2, checked against ratio sqrt(2)."""
    coarse = _time_integral(lambda t: f(t, 2.0), T, s_scale, 2.0, extra)
    fine = _time_integral(lambda t: f(t, math.sqrt(2.0)), T, s_scale, math.sqrt(2.0), extra)
    err = abs(fine - coarse)
    if err > rtol * abs(fine) and err > 1e-300:
        raise QuadratureError(f"{what}: grid refinement changed the value by {err / abs(fine):.3g} (relative)")
    return Estimate(fine, err)


def _signs(vals):
    # values at rounding level relative to the peak carry no sign information
    floor = _NOISE * float(np.max(np.abs(vals))) if len(vals) else 0.0
    return np.where(np.abs(vals) > floor, np.sign(vals), 0.0)


def _sign_change_times(g, T, s_scale):
    """Values of s = sqrt(t) where the scalar function g(t) changes sign."""
    rule = _time_rule(T, s_scale, math.sqrt(2.0))
    s = np.concatenate([rule.nodes, [math.sqrt(T)]])
    vals = _signs(np.array([g(x * x) for x in s]))
    idx = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    return [brentq(lambda x: g(x * x), s[i], s[i + 1], xtol=1e-14, rtol=1e-14) for i in idx]


def _depth_edges(width, scale, ratio, extra=()):
    edges = graded_edges(width, scale, ratio)
    cuts = [c for c in extra if 0 < c < width]
    if cuts:
        edges = np.union1d(edges, cuts)
        edges = edges[np.concatenate([[True], np.diff(edges) > 1e-13 * width])]
    return edges


def _split_at_roots(f, edges):
    """Add the sign changes of f inside [edges[0], edges[-1]] to the edges."""
    rule = composite_gauss(edges, _ORDER)
    pts = np.union1d(edges, rule.nodes)
    s = _signs(np.asarray(f(pts)))
    change = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if len(change) == 0:
        return edges
    roots = []
    for i in change:
        a, b = pts[i], pts[i + 1]
        roots.append(brentq(lambda x: float(np.asarray(f(np.array([x])))[0]), a, b, xtol=1e-15, rtol=1e-15))
    out = np.union1d(edges, roots)
    return out[np.concatenate([[True], np.diff(out) > 0])]


def _abs_integral(flow, t, width, scale, ratio, power=1.0, extra=()):
    """int_0^width |w(t, d)|^power weight(d) dd with kinks at sign changes resolved."""
    edges = _depth_edges(width, scale, ratio, extra)
    edges = _split_at_roots(lambda d: flow.vorticity(t, d), edges)
    rule = composite_gauss(edges, _ORDER)
    w = np.abs(flow.vorticity(t, rule.nodes)) ** power
    return float(np.dot(rule.weights, w * flow.weight(rule.nodes)))


def _layer_scale(nu, t):
    return math.sqrt(nu * t)


# ---------------------------------------------------------------------------
# Layer functionals
# ---------------------------------------------------------------------------


def kato_layer_enstrophy(solution, T: float, layer: LayerSpec) -> Estimate:
    """nu int_0^T ||w(t)||^2 over the strip of width c nu along the wall."""
    if not T > 0:
        raise DomainError("T must be positive")
    flow = _adapter(solution)
    nu = flow.nu
    width = layer.kato_width(nu)
    if isinstance(flow, _Disk) and width >= 1.0:
        raise DomainError(f"Kato layer width c nu = {width:g} is not smaller than the disk radius")

    def inner(t, ratio):
        edges = _depth_edges(width, _layer_scale(nu, t), ratio)
        rule = composite_gauss(edges, _ORDER)
        w = flow.vorticity(t, rule.nodes)
        return float(np.dot(rule.weights, w * w * flow.weight(rule.nodes)))

    # the sheet fills the strip once sqrt(nu t) ~ c nu, i.e. s ~ c sqrt(nu)
    value = _refined_time_integral(inner, T, width / math.sqrt(nu), _KATO_RTOL, "kato_layer_enstrophy")
    return Estimate(nu * value, nu * value.error)


def layer_l1_mass(solution, T: float, delta: float) -> Estimate:
    """(int_0^T (int over the strip of width delta of |w|)^2 dt)^(1/2)."""
    if not T > 0:
        raise DomainError("T must be positive")
    flow = _adapter(solution)
    if not delta > 0 or (isinstance(flow, _Disk) and delta >= 1.0):
        raise DomainError(f"layer width must lie in (0, 1), got {delta!r}")
    nu = flow.nu

    def inner(t, ratio):
        return _abs_integral(flow, t, delta, _layer_scale(nu, t), ratio) ** 2

    # inner(t) loses smoothness when a zero of w crosses the strip edge
    s_scale = delta / math.sqrt(nu)
    kinks = _sign_change_times(lambda t: float(flow.vorticity(t, delta)), T, s_scale)
    value = _refined_time_integral(inner, T, s_scale, 1e-6, "layer_l1_mass", kinks)
    root = math.sqrt(value)
    return Estimate(root, 0.5 * value.error / root if root > 0 else 0.0)


# ---------------------------------------------------------------------------
# Pairings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SheetPairing:
    lhs: float
    rhs: float
    gap: float
    boundary_term: float


def _whole_rule(flow, t, ratio=2.0):
    width = flow.whole_depth(t)
    extra = ()
    if isinstance(flow, _Shear):
        extra = flow.solution.profile.breakpoints
    return composite_gauss(_depth_edges(width, _layer_scale(flow.nu, t), ratio, extra), _ORDER)


def sheet_pairing(ns_solution, euler_solution, f: TestFunction, t: float) -> SheetPairing:
    """(w(t), f) against (w_bar, f) - int_Gamma (u_bar . tau) f."""
    if not t > 0:
        raise DomainError("sheet pairing needs t > 0")
    flow = _adapter(ns_solution)
    rule = _whole_rule(flow, t)
    d = rule.nodes
    x = flow.coordinate(d)
    fx = f(x)
    lhs = float(np.dot(rule.weights, flow.vorticity(t, d) * fx * flow.weight(d)))
    if isinstance(flow, _Disk):
        euler = euler_solution if euler_solution is not None else disk_flow.euler_solution(ns_solution.profile)
        # the Euler vorticity is smooth: a plain Gauss rule on [0, 1] suffices
        plain = composite_gauss(np.linspace(0.0, 1.0, 9), _ORDER)
        bulk = 2.0 * math.pi * float(np.dot(plain.weights, euler.vorticity(t, plain.nodes) * f(plain.nodes) * plain.nodes))
        boundary = 2.0 * math.pi * euler.tangential_boundary_velocity() * float(f(1.0))
    else:
        bulk = float(np.dot(rule.weights, flow.initial_vorticity(d) * fx * flow.weight(d)))
        boundary = flow.wall_measure * flow.wall_speed * float(f(0.0))
    rhs = bulk - boundary
    return SheetPairing(lhs, rhs, abs(lhs - rhs), boundary)


def boundary_flux(solution, T: float, phi=1.0) -> Estimate:
    """nu int_0^T int_Gamma w phi.

    ``phi`` is a constant or a callable phi(t, s) of time and arclength
    coordinate (angle on the disk, x1 in the channel).
    """
    if not T > 0:
        raise DomainError("T must be positive")
    flow = _adapter(solution)
    if callable(phi):
        n = 64
        if isinstance(flow, _Disk):
            coords = 2.0 * math.pi * np.arange(n) / n
            length = 2.0 * math.pi
        else:
            L = solution.half_width
            coords = -L + 2.0 * L * np.arange(n) / n
            length = 2.0 * L

        def wall_mean(t):
            return float(np.mean(np.asarray(phi(t, coords), dtype=float) * np.ones(n))) * length
    else:
        value = float(phi)
        if value == 0.0:
            return Estimate(0.0, 0.0)

        def wall_mean(t):
            return value * flow.wall_measure

    def integrand(t):
        return flow.wall_vorticity(t) * wall_mean(t)

    results = []
    for panels in (8, 16):
        rule = composite_gauss(np.linspace(0.0, math.sqrt(T), panels + 1), _ORDER)
        vals = np.array([integrand(s * s) for s in rule.nodes])
        results.append(float(np.dot(rule.weights, vals * 2.0 * rule.nodes)))
    err = abs(results[1] - results[0])
    if err > 1e-8 * abs(results[1]) and err > 1e-300:
        raise QuadratureError("boundary flux time integral unresolved")
    return Estimate(flow.nu * results[1], flow.nu * err)


def weak_velocity_pairing(ns_solution, euler_solution, v, t: float) -> float:
    """|(u(t) - u_bar, v)| / ||v|| for an azimuthal (disk) or streamwise (channel) field v."""
    flow = _adapter(ns_solution)
    if not t >= 0:
        raise DomainError("time must be nonnegative")
    fn = v if callable(v) else None
    if fn is None:
        raise DomainError("test field must be callable")
    if t == 0:
        diff_rule = _whole_rule(flow, 1e-12 / flow.nu)
    else:
        diff_rule = _whole_rule(flow, t)
    d = diff_rule.nodes
    x = flow.coordinate(d)
    vx = np.asarray(fn(x), dtype=float) * np.ones_like(x)
    norm = math.sqrt(float(np.dot(diff_rule.weights, vx * vx * flow.weight(d))))
    if norm == 0.0:
        raise DomainError("test field has zero norm")
    if t == 0:
        return 0.0
    diff = flow.velocity_error(t, d)
    return abs(float(np.dot(diff_rule.weights, diff * vx * flow.weight(d)))) / norm


# ---------------------------------------------------------------------------
# Mass budget (disk)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassBudget:
    t: float
    m: float
    mass_outside: float
    mass_inside: float
    cutoff_pairing: float
    deviation: float
    delta: float
    delta_star: float

    def bound(self, C, F):
        """C [delta + (delta - delta_star)^(-1/2) F] for given constant and rate."""
        return C * (self.delta + F / math.sqrt(self.delta - self.delta_star))


def mass_budget(ns_solution, euler_solution, layer: LayerSpec, t: float) -> MassBudget:
    """Vorticity mass inside and outside the layer and the cutoff pairing (w, 1 - phi_delta)."""
    if not t > 0:
        raise DomainError("mass budget needs t > 0")
    if not isinstance(ns_solution, DiskSpectralSolution):
        raise DomainError("mass budget is implemented for the disk only")
    if layer.delta >= 1.0:
        raise DomainError("layer must be thinner than the disk radius")
    flow = _Disk(ns_solution)
    euler = euler_solution if euler_solution is not None else disk_flow.euler_solution(ns_solution.profile)
    m = euler.total_mass(t)
    scale = _layer_scale(flow.nu, t)
    edges = _depth_edges(1.0, scale, 2.0, (layer.delta_star, layer.delta))
    rule = composite_gauss(edges, _ORDER)
    d = rule.nodes
    w = flow.vorticity(t, d) * flow.weight(d) * rule.weights
    inside = float(np.sum(w[d < layer.delta]))
    outside = float(np.sum(w[d >= layer.delta]))
    pairing = float(np.dot(w, 1.0 - smooth_cutoff(layer, d)))
    return MassBudget(t, m, outside, inside, pairing, abs(pairing - m), layer.delta, layer.delta_star)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

_SUP_POINTS = 4096


def lp_norm_scan(solution, t: float, p_list) -> list:
    """||w(t)||_p for each p in p_list; p = inf is a max over a clustered grid."""
    if not t > 0:
        raise DomainError("norm scan needs t > 0")
    ps = [float(p) for p in p_list]
    if any(not p >= 1 for p in ps):
        raise DomainError("every p must be at least 1")
    flow = _adapter(solution)
    scale = _layer_scale(flow.nu, t)
    width = flow.whole_depth(t)
    extra = flow.solution.profile.breakpoints if isinstance(flow, _Shear) else ()
    out = []
    for p in ps:
        if math.isinf(p):
            # sine clustering: spacing ~ 1e-7 at the wall
            u = np.sin(0.5 * math.pi * np.arange(_SUP_POINTS) / (_SUP_POINTS - 1))
            d = width * (1.0 - u[::-1])
            d = np.clip(d, 0.0, width)
            out.append(float(np.max(np.abs(flow.vorticity(t, d)))))
        else:
            out.append(_abs_integral(flow, t, width, scale, 2.0, p, extra) ** (1.0 / p))
    return out


def _disk_norm(values, rule, q):
    if math.isinf(q):
        return float(np.max(np.abs(values)))
    return (2.0 * math.pi * float(np.dot(rule.weights, np.abs(values) ** q * rule.nodes))) ** (1.0 / q)


def trace_ratio(f: TestFunction, p: float, q: float) -> float:
    """||f||_{L^p(circle)} / (||f||_{L^{(p-1)q}}^{1-1/p} ||f||_{W^{1,q'}}^{1/p}) on the unit disk."""
    if not p > 1:
        raise DomainError("p must exceed 1")
    if not q >= 1:
        raise DomainError("q must be at least 1")
    if f.derivative is None:
        raise DomainError("trace ratio needs the derivative of f")
    q_dual = math.inf if q == 1 else q / (q - 1.0)
    rule = composite_gauss(np.linspace(0.0, 1.0, 17), 32)
    grid = np.linspace(0.0, 1.0, 4097)
    vals = f(rule.nodes)
    grads = f.derivative(rule.nodes)
    lhs = (2.0 * math.pi) ** (1.0 / p) * abs(float(f(1.0)))
    low = _disk_norm(vals, rule, (p - 1.0) * q)
    if math.isinf(q_dual):
        sobolev = max(float(np.max(np.abs(f(grid)))), float(np.max(np.abs(f.derivative(grid)))))
    else:
        sobolev = (_disk_norm(vals, rule, q_dual) ** q_dual + _disk_norm(grads, rule, q_dual) ** q_dual) ** (
            1.0 / q_dual
        )
    denom = low ** (1.0 - 1.0 / p) * sobolev ** (1.0 / p)
    if not denom > 0:
        raise DomainError("trace ratio denominator vanishes; f is identically zero")
    return lhs / denom
