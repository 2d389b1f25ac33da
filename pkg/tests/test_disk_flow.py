import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from vvlab import disk_flow as df
from vvlab.disk_flow import RadialProfile
from vvlab.errors import DomainError, InitialLayerError, TruncationError
from vvlab.specfun import composite_gauss, j1_zeros

RIGID = RadialProfile.constant(2.0)
ZERO_MASS = RadialProfile.polynomial([4.0, -8.0])


def direct_velocity(coeffs, zeros, nu, t, r):
    # independent oracle: scipy Bessel functions, plain sum
    norm = np.sqrt(np.pi) * np.abs(special.j0(zeros))
    a = coeffs * np.exp(-nu * zeros**2 * t) / norm
    return special.j1(np.outer(np.atleast_1d(r), zeros)) @ a


def test_profile_basics():
    assert RIGID.vorticity(0.3) == 2.0
    assert RIGID.velocity(0.5) == pytest.approx(0.5)
    assert df.total_mass(RIGID) == pytest.approx(2 * math.pi)
    assert df.total_mass(ZERO_MASS) == pytest.approx(0.0, abs=1e-15)
    assert RIGID.energy() == pytest.approx(math.pi / 2, rel=1e-14)
    assert df.biot_savart_radial(ZERO_MASS, 0.0) == 0.0


def test_biot_savart_against_quad():
    prof = RadialProfile.polynomial([1.0, -3.0, 0.5])
    for r in (0.1, 0.5, 1.0):
        ref = integrate.quad(lambda s: prof.vorticity(s) * s, 0, r, epsabs=1e-15)[0] / r
        assert df.biot_savart_radial(prof, r) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(DomainError):
        df.biot_savart_radial(prof, 1.5)


def test_table_profile_matches_polynomial(tmp_path):
    r = np.linspace(0, 1, 201)
    poly = RadialProfile.polynomial([1.0, 1.0])
    path = tmp_path / "w.csv"
    path.write_text("r,w0\n" + "".join(f"{float(x)!r},{float(poly.vorticity(x))!r}\n" for x in r))
    tab = RadialProfile.from_csv(str(path))
    x = np.linspace(0, 1, 37)
    assert np.allclose(tab.velocity(x), poly.velocity(x), atol=1e-9)
    assert df.total_mass(tab) == pytest.approx(df.total_mass(poly), rel=1e-9)


def test_table_profile_validation():
    with pytest.raises(DomainError):
        RadialProfile.from_table([0, 0.5, 0.9], [1, 1, 1])
    with pytest.raises(DomainError):
        RadialProfile.from_table([0, 0.5, 0.4, 1.0], [1, 1, 1, 1])
    with pytest.raises(DomainError):
        RadialProfile.polynomial([])


def test_projection_rigid_oracle():
    table = j1_zeros(500)
    a = df.project_initial(RIGID, table)
    oracle = -table.signs * 2 * math.sqrt(math.pi) / table.zeros
    assert np.max(np.abs(a - oracle)) < 1e-12


def test_projection_polynomial_against_quad():
    table = j1_zeros(8)
    a = df.project_initial(ZERO_MASS, table)
    for k in range(8):
        j = table.zeros[k]
        integral = integrate.quad(lambda r: ZERO_MASS.velocity(r) * special.j1(j * r) * r, 0, 1, epsabs=1e-15, limit=200)[0]
        assert a[k] == pytest.approx(2 * math.sqrt(math.pi) / abs(special.j0(j)) * integral, abs=1e-13)


def test_projection_zero_profile():
    assert not np.any(df.project_initial(RadialProfile.constant(0.0), j1_zeros(30)))


def test_evolve():
    sol = df.disk_solution(RIGID, 1e-2, 50)
    assert np.array_equal(df.evolve(sol, 0.0), sol.coeffs)
    j = sol.table.zeros[0]
    half = df.evolve(sol, math.log(2) / (sol.nu * j * j))
    assert half[0] == pytest.approx(sol.coeffs[0] / 2, rel=1e-14)
    assert not np.any(df.evolve(sol, 1e6 / (sol.nu * j * j)))
    with pytest.raises(DomainError):
        df.evolve(sol, -1.0)


def test_velocity_matches_direct_sum():
    sol = df.disk_solution(RIGID, 1e-3)
    r = np.linspace(0, 1, 11)
    for t in (0.05, 0.5):
        ref = direct_velocity(sol.coeffs, sol.table.zeros, sol.nu, t, r)
        got, err = df.velocity_with_error(sol, t, r)
        assert np.max(np.abs(got - ref)) < 1e-10
        assert err <= 1e-10


def test_velocity_properties():
    sol = df.disk_solution(RIGID, 1e-2)
    assert df.velocity(sol, 0.1, 1.0) == pytest.approx(0.0, abs=1e-10)
    assert df.velocity(sol, 0.1, 0.0) == 0.0
    assert df.velocity(sol, 0.0, 0.5) == 0.5
    near = df.disk_solution(RIGID, 1e-5)
    assert df.velocity(near, 0.1, 0.5) == pytest.approx(0.5, abs=5e-3)


def test_small_time_closure_against_series():
    sol = df.disk_solution(RIGID, 1.0)
    r = np.array([0.3, 0.9, 0.99, 0.999, 1.0])
    for tau in (2e-6, 8e-6):
        ref = direct_velocity(sol.coeffs, sol.table.zeros, 1.0, tau, r)
        closed, err = sol.small_time.velocity(1.0, tau, r)
        assert np.max(np.abs(closed - ref)) < 1e-9
        assert err < 1e-9


def test_small_time_closure_polynomial_vorticity():
    prof = RadialProfile.polynomial([1.0, 2.0])
    sol = df.disk_solution(prof, 1.0)
    r = np.array([0.5, 0.95, 0.995, 1.0])
    tau = 6e-6
    closed, _ = sol.small_time.vorticity(1.0, tau, r)
    series, _ = df.vorticity_with_error(sol, tau, r)
    assert np.max(np.abs(closed - series)) < 1e-8 * np.max(np.abs(series))


def test_short_time_evaluation_uses_closure():
    sol = df.disk_solution(RIGID, 1e-5)
    v = df.vorticity(sol, 1e-6, np.array([0.5, 1.0]))
    assert v[0] == pytest.approx(2.0, abs=1e-10)
    # wall vorticity ~ -u0(1)/sqrt(pi nu t)
    assert v[1] == pytest.approx(-1.0 / math.sqrt(math.pi * 1e-11), rel=1e-2)


def test_truncation_error_for_tables_at_tiny_times():
    prof = RadialProfile.from_table(np.linspace(0, 1, 11), np.full(11, 2.0))
    sol = df.disk_solution(prof, 1e-6, 200)
    with pytest.raises(TruncationError):
        df.vorticity(sol, 1e-3, 0.5)


def test_vorticity_at_time_zero():
    with pytest.raises(InitialLayerError):
        df.vorticity(df.disk_solution(RIGID, 1e-2, 50), 0.0, 0.5)
    sol = df.disk_solution(ZERO_MASS, 1e-2, 50)
    assert df.vorticity(sol, 0.0, 0.5) == pytest.approx(ZERO_MASS.vorticity(0.5))


def test_mass_vanishes_at_positive_times():
    sol = df.disk_solution(RIGID, 1e-3)
    rule = composite_gauss(np.concatenate([np.linspace(0, 0.9, 10), 1 - np.geomspace(0.1, 1e-6, 30)[1:], [1.0]]), 20)
    for t in (0.01, 0.3, 1.0):
        mass = 2 * math.pi * np.dot(rule.weights, df.vorticity(sol, t, rule.nodes) * rule.nodes)
        assert abs(mass) < 1e-8


def test_boundary_vorticity_consistent():
    sol = df.disk_solution(RIGID, 1e-3)
    for t in (0.01, 0.5):
        assert df.boundary_vorticity(sol, t) == pytest.approx(df.vorticity(sol, t, 1.0), rel=1e-9)
    with pytest.raises(DomainError):
        df.boundary_vorticity(sol, 0.0)


def test_energy_and_parseval():
    sol = df.disk_solution(RIGID, 1e-2)
    e = [df.energy(sol, t) for t in (0.0, 0.1, 1.0)]
    assert e[0] > e[1] > e[2]
    assert e[0] == pytest.approx(math.pi / 2, abs=2e-3)


def test_l2_error_bracket():
    sol = df.disk_solution(RIGID, 1e-3)
    lo, hi = df.l2_error_squared_bounds(sol, 1.0)
    assert 0 < lo <= hi and hi - lo < 1e-9 * hi


def test_euler_solution():
    e = df.euler_solution(RIGID)
    assert e.total_mass(0.7) == df.total_mass(RIGID)
    assert e.tangential_boundary_velocity() == 1.0
    assert e.velocity(3.0, 0.25) == pytest.approx(0.25)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-4, 1e-1), st.floats(1e-3, 1.0), st.floats(0.0, 1.0))
def test_velocity_bounded_by_initial_sup(nu, t, r):
    # u_t = nu (u_rr + u_r / r - u / r^2) obeys a maximum principle: |u| <= max |u0|
    sol = df.disk_solution(RIGID, nu, 2000)
    assert abs(df.velocity(sol, t, r)) <= 1.0 + 1e-9
