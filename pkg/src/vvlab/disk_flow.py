"""Exact Navier-Stokes and Euler flows in the unit disk for radial vorticity.

A radially symmetric vorticity w0(r) induces the azimuthal velocity

    u0(r) = (1/r) int_0^r w0(rho) rho d rho

which is a stationary Euler solution.  The Navier-Stokes flow with no-slip
boundary condition is the heat semigroup acting on u0 expanded in the
orthonormal Stokes eigenfunctions

    u_k = J1(j_k r) / (sqrt(pi) |J0(j_k)|) e_theta,   j_k = k-th zero of J1,

so that u(t) = sum_k a_k exp(-nu j_k^2 t) u_k.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline, PPoly

from .disk_layer import SmallTimeExpansion
from .errors import DomainError, InitialLayerError, QuadratureError, TruncationError
from .specfun import BesselTable, bessel_j, composite_gauss, j1_zeros

DEFAULT_K = 2000
TAIL_TOLERANCE = 1e-10
# the small-time expansion is used only below this value of nu * t
SMALL_TIME_LIMIT = 1e-5

# max |J1| on the real line, and a bound with 1/|J0(j_k)| <= C sqrt(pi j_k / 2)
_J1_MAX = 0.5819
_J0_AT_ZERO_FACTOR = 1.02


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """Radial initial vorticity on the unit disk.

    Either ``coeffs`` (w0 = sum_i c_i r^(2i)) or a sampled table
    (``table_r``, ``table_w``) interpolated by a cubic spline.
    """

    coeffs: tuple | None = None
    table_r: tuple | None = None
    table_w: tuple | None = None
    label: str = ""

    def __post_init__(self):
        if (self.coeffs is None) == (self.table_r is None):
            raise DomainError("give either polynomial coefficients or a table")
        if self.coeffs is not None:
            c = tuple(float(x) for x in self.coeffs)
            if not c or not all(math.isfinite(x) for x in c):
                raise DomainError("profile coefficients must be finite and nonempty")
            object.__setattr__(self, "coeffs", c)
            return
        r = np.asarray(self.table_r, dtype=float)
        w = np.asarray(self.table_w, dtype=float)
        if r.ndim != 1 or r.shape != w.shape or len(r) < 4:
            raise DomainError("table needs at least 4 (r, w0) pairs")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(w))):
            raise DomainError("table values must be finite")
        if np.any(np.diff(r) <= 0):
            raise DomainError("table radii must be strictly increasing")
        if abs(r[0]) > 1e-12 or abs(r[-1] - 1.0) > 1e-12:
            raise DomainError("table must span [0, 1]")
        object.__setattr__(self, "table_r", tuple(r.tolist()))
        object.__setattr__(self, "table_w", tuple(w.tolist()))
        spline = CubicSpline(r, w)
        # rho * S(rho) as a piecewise quartic, then integrate exactly
        c = spline.c
        x0 = r[:-1]
        d = np.zeros((5, c.shape[1]))
        d[:4] += c
        d[1:] += x0 * c
        moment = PPoly(d, r).antiderivative()
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_moment", moment)

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, value):
        return cls(coeffs=(value,), label=f"constant:{value:g}")

    @classmethod
    def polynomial(cls, coeffs):
        return cls(coeffs=tuple(coeffs), label="poly:" + ",".join(f"{c:g}" for c in coeffs))

    @classmethod
    def from_table(cls, r, w, label="table"):
        return cls(table_r=tuple(r), table_w=tuple(w), label=label)

    @classmethod
    def from_csv(cls, path):
        """Read a two-column CSV (r, w0); a non-numeric first row is a header."""
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
                    raise DomainError(f"{path}: line {i + 1} is not a numeric (r, w0) pair")
        r, w = zip(*rows) if rows else ((), ())
        return cls.from_table(r, w, label=f"table:{path}")

    # evaluation -------------------------------------------------------------

    @property
    def is_polynomial(self):
        return self.coeffs is not None

    @property
    def velocity_coeffs(self):
        """b_i with u0(r) = sum_i b_i r^(2i+1); polynomial profiles only."""
        return np.array([c / (2 * i + 2) for i, c in enumerate(self.coeffs)])

    def vorticity(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_polynomial:
            out = np.polynomial.polynomial.polyval(r * r, self.coeffs)
        else:
            out = self._spline(r)
        return float(out) if out.ndim == 0 else out

    def velocity(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_polynomial:
            out = r * np.polynomial.polynomial.polyval(r * r, self.velocity_coeffs)
        else:
            safe = np.where(r > 0, r, 1.0)
            out = np.where(r > 0, self._moment(r) / safe, 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def energy(self):
        """||u0||^2 = 2 pi int_0^1 u0^2 r dr."""
        if self.is_polynomial:
            rule = composite_gauss([0.0, 1.0], len(self.coeffs) + 3)
        else:
            rule = composite_gauss(np.asarray(self.table_r), 8)
        g = self.velocity(rule.nodes)
        return 2.0 * math.pi * float(np.dot(rule.weights, g * g * rule.nodes))

    def sup_norm(self):
        r = np.linspace(0.0, 1.0, 4097)
        return float(np.max(np.abs(self.vorticity(r))))


def _check_radius(r):
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise DomainError("radius must lie in [0, 1]")
    return arr


def biot_savart_radial(profile: RadialProfile, r):
    """Azimuthal speed (1/r) int_0^r w0(rho) rho d rho, zero at the centre."""
    _check_radius(r)
    return profile.velocity(r)


def total_mass(profile: RadialProfile) -> float:
    """m = 2 pi int_0^1 w0(r) r dr = 2 pi u0(1)."""
    return 2.0 * math.pi * float(profile.velocity(1.0))


# ---------------------------------------------------------------------------
# Projection onto the eigenfunctions
# ---------------------------------------------------------------------------

_PANEL_ORDER = 16
_CHUNK = 4_000_000


def _projection_rule(jmax, factor=1):
    nodes = max(64, 10 * math.ceil(jmax / (2.0 * math.pi))) * factor
    panels = math.ceil(nodes / _PANEL_ORDER)
    return composite_gauss(np.linspace(0.0, 1.0, panels + 1), _PANEL_ORDER)


def _project(profile, zeros, rule):
    weighted = rule.weights * profile.velocity(rule.nodes) * rule.nodes
    out = np.empty(len(zeros))
    step = max(1, _CHUNK // len(rule.nodes))
    for start in range(0, len(zeros), step):
        z = zeros[start : start + step]
        out[start : start + step] = bessel_j(1, np.outer(z, rule.nodes)) @ weighted
    return out


@lru_cache(maxsize=32)
def _cached_projection(profile, count):
    table = j1_zeros(count)
    rule = _projection_rule(table.zeros[-1])
    integrals = _project(profile, table.zeros, rule)
    # refinement check on the most oscillatory modes
    top = table.zeros[-min(16, count) :]
    finer = _project(profile, top, _projection_rule(table.zeros[-1], factor=2))
    scale = 2.0 * math.sqrt(math.pi) / np.abs(table.j0_at_zeros)
    gap = np.max(np.abs(finer - integrals[-len(top) :]) * scale[-len(top) :])
    if gap > 1e-9:
        raise QuadratureError(f"projection quadrature unresolved: refinement changed a_k by {gap:.3g}")
    coeffs = scale * integrals
    coeffs.setflags(write=False)
    return coeffs


def project_initial(profile: RadialProfile, table: BesselTable) -> np.ndarray:
    """a_k = (2 sqrt(pi) / |J0(j_k)|) int_0^1 u0(r) J1(j_k r) r dr for k = 1..K."""
    if table.count < 1:
        raise DomainError("need at least one mode")
    return _cached_projection(profile, table.count)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskSpectralSolution:
    table: BesselTable
    coeffs: np.ndarray
    nu: float
    profile: RadialProfile
    total_mass: float

    @property
    def amplitude(self):
        """A = max_k |a_k| j_k, so that |a_k| <= A / j_k is assumed for the tail."""
        return float(np.max(np.abs(self.coeffs) * self.table.zeros)) if len(self.coeffs) else 0.0

    @property
    def small_time(self):
        if not self.profile.is_polynomial:
            return None
        return _expansion(self.profile)


@lru_cache(maxsize=32)
def _expansion(profile):
    return SmallTimeExpansion(profile.velocity_coeffs)


def disk_solution(profile: RadialProfile, nu: float, K: int = DEFAULT_K) -> DiskSpectralSolution:
    if not (math.isfinite(nu) and nu > 0):
        raise DomainError(f"nu must be positive, got {nu!r}")
    table = j1_zeros(int(K))
    coeffs = project_initial(profile, table)
    return DiskSpectralSolution(table, coeffs, float(nu), profile, total_mass(profile))


def evolve(solution: DiskSpectralSolution, t: float) -> np.ndarray:
    """Coefficients a_k exp(-nu j_k^2 t); factors below 1e-300 are set to 0."""
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    rate = solution.nu * solution.table.zeros**2 * t
    decay = np.where(rate < 690.0, np.exp(-np.minimum(rate, 690.0)), 0.0)
    return solution.coeffs * decay


def _tail_bound(solution, t, power, constant, count):
    """Bound on sum_{k>count} constant * j_k^power exp(-nu j_k^2 t).

    Uses j_k >= pi k and an integral comparison, valid once
    j^power exp(-nu t j^2) is decreasing beyond pi * count.
    """
    if constant == 0.0:
        return 0.0
    c = solution.nu * t
    if c <= 0:
        return math.inf
    y = math.pi * count
    if power > 2.0 * c * y * y:
        return math.inf
    a = 0.5 * (power + 1.0)
    return constant / (2.0 * math.pi) * c ** (-a) * float(special.gammaincc(a, c * y * y)) * special.gamma(a)


def _modes_needed(solution, t, power, constant, tol=TAIL_TOLERANCE):
    """Smallest K' whose tail bound is below tol, or None if K is not enough."""
    K = solution.table.count
    top = _tail_bound(solution, t, power, constant, K)
    if not top <= tol:
        return None, top
    lo, hi = 0, K  # bound(hi) <= tol; bound is nonincreasing in the count
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail_bound(solution, t, power, constant, mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi, _tail_bound(solution, t, power, constant, hi)


_VELOCITY = (-0.5, _J1_MAX * _J0_AT_ZERO_FACTOR / math.sqrt(2.0))
_VORTICITY = (0.5, _J0_AT_ZERO_FACTOR / math.sqrt(2.0))
_BOUNDARY = (0.0, 1.0 / math.sqrt(math.pi))


def _series(solution, t, r, kind):
    power, const = kind
    count, tail = _modes_needed(solution, t, power, const * solution.amplitude)
    if count is None:
        return None
    a = evolve(solution, t)[:count]
    z = solution.table.zeros[:count]
    norm = a / (math.sqrt(math.pi) * np.abs(solution.table.j0_at_zeros[:count]))
    flat = r.ravel()
    out = np.empty(len(flat))
    step = max(1, _CHUNK // count)
    order = 1 if kind is _VELOCITY else 0
    weights = norm if order == 1 else norm * z
    for start in range(0, len(flat), step):
        arg = np.outer(flat[start : start + step], z)
        out[start : start + step] = bessel_j(order, arg) @ weights
    return out.reshape(r.shape), tail


def _evaluate(solution, t, r, vorticity):
    series = _series(solution, t, r, _VORTICITY if vorticity else _VELOCITY)
    if series is not None:
        return series
    expansion = solution.small_time
    if expansion is not None and solution.nu * t <= SMALL_TIME_LIMIT:
        if vorticity:
            return expansion.vorticity(solution.nu, t, r)
        return expansion.velocity(solution.nu, t, r)
    what = "vorticity" if vorticity else "velocity"
    raise TruncationError(
        f"{what} series with K={solution.table.count} modes does not converge to "
        f"{TAIL_TOLERANCE:g} at t={t:g}, nu={solution.nu:g}; increase K"
    )


def _output(values):
    return float(values) if np.ndim(values) == 0 else values


def velocity_with_error(solution: DiskSpectralSolution, t: float, r):
    """(azimuthal speed, truncation error bound) at time t and radius r."""
    r = _check_radius(r)
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    if t == 0:
        return _output(solution.profile.velocity(r)), 0.0
    values, err = _evaluate(solution, t, r, vorticity=False)
    return _output(values), err


def velocity(solution: DiskSpectralSolution, t: float, r):
    """Azimuthal NS speed; at t = 0 the Biot-Savart integral of the profile."""
    return velocity_with_error(solution, t, r)[0]


def vorticity_with_error(solution: DiskSpectralSolution, t: float, r):
    r = _check_radius(r)
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    if t == 0:
        if solution.total_mass != 0.0 and abs(solution.total_mass) > 1e-12:
            raise InitialLayerError(
                "vorticity at t = 0 is singular for data with nonzero total mass "
                f"(m = {solution.total_mass:.6g}); the boundary carries a vortex sheet"
            )
        return _output(solution.profile.vorticity(r)), 0.0
    values, err = _evaluate(solution, t, r, vorticity=True)
    return _output(values), err


def vorticity(solution: DiskSpectralSolution, t: float, r):
    """NS vorticity (1/r) d(r u)/dr at time t > 0 (t = 0 only when m = 0)."""
    return vorticity_with_error(solution, t, r)[0]


def boundary_vorticity(solution: DiskSpectralSolution, t: float) -> float:
    """w(t, 1) = sum_k a_k exp(-nu j_k^2 t) j_k sign(J0(j_k)) / sqrt(pi)."""
    if not t > 0:
        raise DomainError(f"boundary vorticity needs t > 0, got {t!r}")
    power, const = _BOUNDARY
    count, _ = _modes_needed(solution, t, power, const * solution.amplitude)
    if count is not None:
        a = evolve(solution, t)[:count]
        terms = a * solution.table.zeros[:count] * solution.table.signs[:count]
        return float(np.sum(terms) / math.sqrt(math.pi))
    return float(vorticity(solution, t, 1.0))


def energy(solution: DiskSpectralSolution, t: float) -> float:
    """sum_k a_k^2 exp(-2 nu j_k^2 t) over the retained modes."""
    a = evolve(solution, t)
    return float(np.dot(a, a))


def coefficient_rows(solution: DiskSpectralSolution):
    """(k, j_k, a_k, sign J0(j_k)) for every retained mode."""
    t = solution.table
    return [
        (k + 1, float(t.zeros[k]), float(solution.coeffs[k]), int(t.signs[k]))
        for k in range(t.count)
    ]


# ---------------------------------------------------------------------------
# Euler
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerDiskSolution:
    """Stationary Euler flow u(t) = u0 generated by a radial profile."""

    profile: RadialProfile

    def velocity(self, t, r):
        return biot_savart_radial(self.profile, r)

    def vorticity(self, t, r):
        _check_radius(r)
        return self.profile.vorticity(r)

    def total_mass(self, t=0.0):
        return total_mass(self.profile)

    def tangential_boundary_velocity(self):
        """u . tau on the boundary circle (counterclockwise tangent)."""
        return float(self.profile.velocity(1.0))


def euler_solution(profile: RadialProfile) -> EulerDiskSolution:
    return EulerDiskSolution(profile)


@lru_cache(maxsize=32)
def _energy(profile):
    return profile.energy()


def l2_error_squared_bounds(solution: DiskSpectralSolution, t: float):
    """Lower and upper bounds on ||u(t) - u0||^2.

    The retained modes give sum_k a_k^2 (1 - e_k)^2 exactly; the rest is
    bracketed using the Parseval remainder P = ||u0||^2 - sum_k a_k^2 and
    the slowest neglected decay factor exp(-nu j_{K+1}^2 t).
    """
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    a = solution.coeffs
    decayed = evolve(solution, t)
    head = float(np.sum((a - decayed) ** 2))
    remainder = max(_energy(solution.profile) - float(np.dot(a, a)), 0.0)
    next_zero = j1_zeros(solution.table.count + 1).zeros[-1]
    slowest = -math.expm1(-solution.nu * next_zero**2 * t)
    return head + slowest**2 * remainder, head + remainder
