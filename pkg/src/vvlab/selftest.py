"""Quick built-in checks: each one exercises a case with an obvious answer."""

from __future__ import annotations

import math
import os
import sys
import tempfile

import numpy as np

from . import diagnostics as diag
from . import disk_flow, shear_flow
from .config import parse_data
from .disk_flow import RadialProfile
from .errors import ConfigError, FitError
from .rates import SweepRow, fit_rate, sup_l2_error
from .shear_flow import ShearProfile
from .specfun import LayerSpec, bessel_j, erf, gauss_legendre, j1_zeros, smooth_cutoff
from .vorticity_algebra import VelocityGradientSample, antisym_part, f_map, scalar_curl_2d

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


def _close(a, b, tol=1e-14):
    assert abs(a - b) <= tol, f"{a!r} != {b!r}"


@check
def bessel_at_origin():
    _close(bessel_j(0, 0.0), 1.0, 0.0)
    _close(bessel_j(1, 0.0), 0.0, 0.0)


@check
def erf_limits():
    _close(erf(0.0), 0.0, 0.0)
    _close(erf(6.0), 1.0, 1e-12)


@check
def gauss_exactness():
    _close(gauss_legendre(1, 0.0, 1.0).integrate(lambda x: x), 0.5)
    _close(gauss_legendre(2, 0.0, 1.0).integrate(lambda x: x**3), 0.25)


@check
def cutoff_values():
    layer = LayerSpec(0.1, 0.05)
    _close(smooth_cutoff(layer, 0.0), 1.0, 0.0)
    _close(smooth_cutoff(layer, 0.1), 0.0, 0.0)
    _close(smooth_cutoff(layer, 0.075), 0.5)


@check
def disk_zero_profile():
    zero = RadialProfile.constant(0.0)
    _close(disk_flow.biot_savart_radial(RadialProfile.polynomial([4, -8]), 0.0), 0.0, 0.0)
    _close(disk_flow.total_mass(zero), 0.0, 0.0)
    sol = disk_flow.disk_solution(zero, 1e-3, 50)
    assert not np.any(sol.coeffs), "nonzero coefficients for zero data"
    assert not np.any(disk_flow.vorticity(sol, 0.1, np.linspace(0, 1, 5)))
    assert disk_flow.velocity(sol, 0.1, 0.0) == 0.0
    assert disk_flow.boundary_vorticity(sol, 0.1) == 0.0
    assert not np.any(disk_flow.euler_solution(zero).velocity(0.3, np.linspace(0, 1, 5)))


@check
def evolve_semigroup():
    sol = disk_flow.disk_solution(RadialProfile.constant(2.0), 1e-2, 50)
    assert np.array_equal(disk_flow.evolve(sol, 0.0), sol.coeffs)
    j = sol.table.zeros[0]
    single = disk_flow.DiskSpectralSolution(sol.table, np.eye(1, 50)[0], sol.nu, sol.profile, sol.total_mass)
    _close(disk_flow.evolve(single, math.log(2) / (sol.nu * j * j))[0], 0.5)
    assert not np.any(disk_flow.evolve(sol, 1e6 / (sol.nu * j * j)))


@check
def shear_trivial():
    zero = shear_flow.shear_solution(ShearProfile.constant(0.0), 1e-3)
    assert shear_flow.boundary_gradient(zero, 0.1) == 0.0
    _close(shear_flow.boundary_integral(zero, 1.0), 0.0, 0.0)
    prof = ShearProfile.exponential(1.0, 2.0)
    sol = shear_flow.shear_solution(prof, 1e-3)
    z = np.linspace(0.0, 0.5, 7)
    assert np.array_equal(shear_flow.euler_velocity(sol, z), prof(z))
    _close(float(shear_flow.phi(sol, 1e-9 / sol.nu, 0.3)), float(prof(0.3)), 1e-4)


@check
def algebra_trivial():
    sym = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert not np.any(antisym_part(VelocityGradientSample(sym)))
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert np.array_equal(antisym_part(VelocityGradientSample(rot)), rot)
    m = np.random.default_rng(0).normal(size=(3, 3))
    a = antisym_part(VelocityGradientSample(m))
    assert np.array_equal(a + a.T, np.zeros((3, 3)))
    assert scalar_curl_2d(VelocityGradientSample(sym)) == 0.0
    assert not np.any(f_map(np.zeros(3)))


@check
def diagnostics_zero_data():
    zero = disk_flow.disk_solution(RadialProfile.constant(0.0), 1e-3, 50)
    euler = disk_flow.euler_solution(zero.profile)
    layer = LayerSpec(0.05, 0.025)
    assert float(diag.kato_layer_enstrophy(zero, 1.0, layer)) == 0.0
    assert float(diag.layer_l1_mass(zero, 1.0, 0.01)) == 0.0
    assert float(diag.boundary_flux(zero, 1.0, 0.0)) == 0.0
    b = diag.mass_budget(zero, euler, layer, 0.5)
    assert (b.m, b.mass_inside, b.mass_outside, b.cutoff_pairing, b.deviation) == (0, 0, 0, 0, 0)
    assert diag.lp_norm_scan(zero, 0.5, [1, 2, math.inf]) == [0.0, 0.0, 0.0]


@check
def sheet_pairing_unit():
    sol = disk_flow.disk_solution(RadialProfile.constant(2.0), 1e-3)
    p = diag.sheet_pairing(sol, disk_flow.euler_solution(sol.profile), diag.TestFunction.constant(), 0.5)
    assert p.gap <= 1e-8, p.gap


@check
def weak_pairing_self():
    sol = disk_flow.disk_solution(RadialProfile.constant(2.0), 1e-2, 200)
    euler = disk_flow.euler_solution(sol.profile)
    t = 0.5
    v = lambda r: disk_flow.velocity(sol, t, r) - euler.velocity(t, r)  # noqa: E731
    gap = diag.weak_velocity_pairing(sol, euler, v, t)
    _close(gap, math.sqrt(disk_flow.l2_error_squared_bounds(sol, t)[1]), 1e-9)


@check
def rates_trivial():
    rows = [SweepRow(nu, 3.0 * nu**0.25) for nu in (1e-2, 1e-3, 1e-4, 1e-5)]
    fit = fit_rate(rows)
    _close(fit.alpha, 0.25, 1e-12)
    _close(fit.prefactor, 3.0, 1e-11)
    _close(fit.residual, 0.0, 1e-12)
    zero = disk_flow.disk_solution(RadialProfile.constant(0.0), 1e-3, 50)
    assert float(sup_l2_error(zero, disk_flow.euler_solution(zero.profile), 1.0)) == 0.0
    try:
        fit_rate([SweepRow(nu, 0.0) for nu in (1e-2, 1e-3, 1e-4, 1e-5)])
    except FitError:
        pass
    else:
        raise AssertionError("fit of zero data was accepted")


@check
def config_trivial():
    parse_data({"flow": "disk", "profile": {"type": "constant", "value": 2}, "nu_grid": [1e-3], "T": 1})
    try:
        parse_data({"flow": "disk", "profile": "constant:2", "nu_grid": [0.0]})
    except ConfigError as exc:
        assert any("nu must be positive" in e for e in exc.errors)
    else:
        raise AssertionError("nu = 0 accepted")
    missing = os.path.join(tempfile.gettempdir(), "vvlab_no_such_table.csv")
    try:
        parse_data({"flow": "disk", "profile": {"type": "table", "path": missing}, "nu_grid": [1e-3]})
    except ConfigError as exc:
        assert any(missing in e for e in exc.errors)
    else:
        raise AssertionError("missing table accepted")


@check
def zeros_table():
    j1_zeros(10).check()


def run_selftest(stream=None) -> int:
    stream = stream or sys.stdout
    failures = 0
    for fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # report and continue
            failures += 1
            print(f"FAIL {fn.__name__}: {type(exc).__name__}: {exc}", file=stream)
        else:
            print(f"PASS {fn.__name__}", file=stream)
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed", file=stream)
    return failures
