import math

import numpy as np
import pytest
from scipy import integrate, special

from vvlab import diagnostics as dg
from vvlab import disk_flow as df
from vvlab import shear_flow as sf
from vvlab.diagnostics import TestFunction
from vvlab.disk_flow import RadialProfile
from vvlab.errors import DomainError
from vvlab.shear_flow import ShearProfile
from vvlab.specfun import LayerSpec

RIGID = RadialProfile.constant(2.0)
ZERO = RadialProfile.constant(0.0)


@pytest.fixture(scope="module")
def rigid():
    sol = df.disk_solution(RIGID, 1e-2)
    return sol, df.euler_solution(RIGID)


@pytest.fixture(scope="module")
def unit_shear():
    return sf.shear_solution(ShearProfile.constant(1.0), 1e-2)


def test_zero_data():
    sol = df.disk_solution(ZERO, 1e-3, 50)
    layer = LayerSpec(0.05, 0.025)
    assert float(dg.kato_layer_enstrophy(sol, 1.0, layer)) == 0.0
    assert float(dg.layer_l1_mass(sol, 1.0, 0.01)) == 0.0
    assert dg.lp_norm_scan(sol, 0.5, [1, 2, math.inf]) == [0.0, 0.0, 0.0]
    b = dg.mass_budget(sol, df.euler_solution(ZERO), layer, 0.5)
    assert b.deviation == 0.0 and b.m == 0.0


def test_shear_flux_closed_form(unit_shear):
    v = dg.boundary_flux(unit_shear, 1.0)
    assert float(v) == pytest.approx(-(4 / math.sqrt(math.pi)) * 0.5 * math.sqrt(1e-2), rel=1e-10)
    assert float(v) == pytest.approx(sf.boundary_integral(unit_shear, 1.0), rel=1e-10)


def test_disk_flux_against_mode_sum(rigid):
    sol, _ = rigid
    nu, T = sol.nu, 1.0
    # w(t, 1) = -2 sum_k exp(-nu j_k^2 t) for the rigid profile, so
    # nu int_0^T 2 pi w(t, 1) dt = -4 pi sum_k (1 - exp(-nu j_k^2 T)) / j_k^2
    j = sol.table.zeros
    head = np.sum(-np.expm1(-nu * j * j * T) / (j * j))
    # j_k ~ pi (k + 1/4): the remaining terms sum to trigamma(K + 5/4) / pi^2
    tail = special.polygamma(1, len(j) + 1.25) / math.pi**2
    expected = -4 * math.pi * (head + tail)
    assert float(dg.boundary_flux(sol, T)) == pytest.approx(expected, rel=1e-8)


def test_flux_factorises(rigid):
    sol, _ = rigid
    one = float(dg.boundary_flux(sol, 1.0))
    assert float(dg.boundary_flux(sol, 1.0, 0.5)) == pytest.approx(0.5 * one, rel=1e-12)
    assert float(dg.boundary_flux(sol, 1.0, lambda t, s: 0.5 + 0 * s)) == pytest.approx(0.5 * one, rel=1e-12)
    assert float(dg.boundary_flux(sol, 1.0, 0.0)) == 0.0


def test_shear_kato_against_quad(unit_shear):
    nu, c, L = 1e-2, 1.0, 0.5
    # w = -exp(-z^2 / 4 nu t) / sqrt(pi nu t), so int_0^{c nu} w^2 dz = erf(c nu / sqrt(2 nu t)) / sqrt(2 pi nu t)
    f = lambda t: 2 * L * special.erf(c * nu / math.sqrt(2 * nu * t)) / math.sqrt(2 * math.pi * nu * t)  # noqa: E731
    ref = nu * integrate.quad(lambda s: 2 * s * f(s * s), 0, 1, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    got = dg.kato_layer_enstrophy(unit_shear, 1.0, LayerSpec(0.05, 0.025, c))
    assert float(got) == pytest.approx(ref, rel=1e-8)


def test_shear_layer_l1_against_quad(unit_shear):
    nu, delta, L = 1e-2, 0.05, 0.5
    mass = lambda t: 2 * L * special.erf(delta / math.sqrt(4 * nu * t))  # noqa: E731
    ref = math.sqrt(integrate.quad(lambda s: 2 * s * mass(s * s) ** 2, 0, 1, epsabs=1e-14, limit=200)[0])
    assert float(dg.layer_l1_mass(unit_shear, 1.0, delta)) == pytest.approx(ref, rel=1e-7)


def test_layer_validation(rigid):
    sol, _ = rigid
    with pytest.raises(DomainError):
        dg.layer_l1_mass(sol, 1.0, 1.5)
    with pytest.raises(DomainError):
        dg.kato_layer_enstrophy(sol, 1.0, LayerSpec(0.05, 0.025, 200.0))
    with pytest.raises(DomainError):
        dg.kato_layer_enstrophy(sol, 0.0, LayerSpec(0.05, 0.025))


def test_sheet_pairing(rigid):
    sol, euler = rigid
    one = dg.sheet_pairing(sol, euler, TestFunction.constant(), 0.5)
    assert one.gap <= 1e-8
    t = 0.5
    p = dg.sheet_pairing(sol, euler, TestFunction.radial_poly([0.0, 1.0]), t)
    # (w, r^2) = -4 pi int_0^1 r^2 u dr after integrating by parts with u(1) = 0
    lhs = -4 * math.pi * integrate.quad(lambda r: r * r * df.velocity(sol, t, r), 0, 1, epsabs=1e-13, limit=200)[0]
    assert p.lhs == pytest.approx(lhs, abs=1e-10)
    assert p.rhs == pytest.approx(math.pi - 2 * math.pi, abs=1e-12)
    assert p.gap == pytest.approx(abs(lhs + math.pi), abs=1e-10)


def test_lp_norms_against_parseval(rigid):
    sol, _ = rigid
    t = 0.05
    a = df.evolve(sol, t)
    expected = math.sqrt(np.sum(a * a * sol.table.zeros**2))
    l1, l2, linf = dg.lp_norm_scan(sol, t, [1, 2, math.inf])
    assert l2 == pytest.approx(expected, rel=1e-10)
    assert linf >= abs(df.boundary_vorticity(sol, t)) * (1 - 1e-12)
    assert l1 <= math.sqrt(math.pi) * l2
    with pytest.raises(DomainError):
        dg.lp_norm_scan(sol, t, [0.5])


def test_mass_budget(rigid):
    sol, euler = rigid
    b = dg.mass_budget(sol, euler, LayerSpec(0.2, 0.1), 0.5)
    assert b.m == pytest.approx(2 * math.pi)
    assert b.mass_inside + b.mass_outside == pytest.approx(0.0, abs=1e-8)
    assert b.deviation == pytest.approx(abs(b.cutoff_pairing - b.m))
    assert b.bound(1.0, 0.0) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        dg.mass_budget(sol, euler, LayerSpec(0.2, 0.1), 0.0)


def test_weak_pairing(rigid):
    sol, euler = rigid
    t = 0.5
    diff = lambda r: df.velocity(sol, t, r) - euler.velocity(t, r)  # noqa: E731
    full = math.sqrt(df.l2_error_squared_bounds(sol, t)[1])
    assert dg.weak_velocity_pairing(sol, euler, diff, t) == pytest.approx(full, rel=1e-9)
    # Gram-Schmidt: remove the component along u - u_bar from v = r
    coef = integrate.quad(lambda x: x * diff(x) * x, 0, 1, epsabs=1e-14, limit=200)[0] / integrate.quad(
        lambda x: diff(x) ** 2 * x, 0, 1, epsabs=1e-14, limit=200)[0]
    ortho = lambda x: x - coef * diff(x)  # noqa: E731
    assert dg.weak_velocity_pairing(sol, euler, ortho, t) <= 1e-10
    for f in dg.disk_test_library():
        assert dg.weak_velocity_pairing(sol, euler, f, t) <= full * (1 + 1e-9)
    assert dg.weak_velocity_pairing(sol, euler, lambda x: x, 0.0) == 0.0


def test_trace_ratio_closed_forms():
    one = TestFunction.constant()
    assert dg.trace_ratio(one, 2, 2) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    f = TestFunction.radial_poly([0.0, 1.0])
    # ||r^2||_{L^2(circle)} = sqrt(2 pi); ||r^2||_2 = sqrt(pi/3); ||grad||_2 = sqrt(2 pi)
    lhs = math.sqrt(2 * math.pi)
    l2 = math.sqrt(math.pi / 3)
    h1 = math.sqrt(math.pi / 3 + 2 * math.pi)
    assert dg.trace_ratio(f, 2, 2) == pytest.approx(lhs / (l2**0.5 * h1**0.5), rel=1e-12)
    with pytest.raises(DomainError):
        dg.trace_ratio(TestFunction.constant(0.0), 2, 2)
    with pytest.raises(DomainError):
        dg.trace_ratio(f, 1.0, 2)
