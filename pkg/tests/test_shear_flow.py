import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from vvlab import shear_flow as sf
from vvlab.errors import DomainError, InitialLayerError
from vvlab.shear_flow import ShearProfile

UNIT = ShearProfile.constant(1.0)


def quad_phi(profile, nu, t, z):
    # oracle: image-kernel integral in y by adaptive quadrature
    s = 4 * nu * t
    k = lambda y: (np.exp(-((z - y) ** 2) / s) - np.exp(-((z + y) ** 2) / s)) * profile(y)  # noqa: E731
    lo, hi = max(0.0, z - 12 * math.sqrt(s)), z + 12 * math.sqrt(s)
    return integrate.quad(k, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=400)[0] / math.sqrt(math.pi * s)


def test_constant_profile_is_erf():
    sol = sf.shear_solution(UNIT, 1e-3)
    for t in np.geomspace(1e-4, 1.0, 10):
        z = np.linspace(0, 10 * math.sqrt(1e-3 * t), 10)
        assert np.max(np.abs(sf.phi(sol, t, z) - special.erf(z / math.sqrt(4e-3 * t)))) < 1e-13
    assert sf.phi(sol, 0.5, 0.0) == 0.0


def test_constant_profile_gradient():
    sol = sf.shear_solution(UNIT, 1e-4)
    for t in (1e-3, 0.1, 1.0):
        assert sf.boundary_gradient(sol, t) == pytest.approx(1 / math.sqrt(math.pi * 1e-4 * t), rel=1e-13)
        z = np.array([0.0, 1e-3, 1e-2])
        expected = np.exp(-z * z / (4e-4 * t)) / math.sqrt(math.pi * 1e-4 * t)
        # far from the wall the result is a cancellation, so measure against the peak
        tol = 1e-13 * expected[0]
        assert np.allclose(sf.phi_z(sol, t, z), expected, rtol=1e-12, atol=tol)
        assert np.allclose(sf.vorticity(sol, t, z), -expected, rtol=1e-12, atol=tol)


@pytest.mark.parametrize(
    "profile",
    [ShearProfile.exponential(1.5, 3.0), ShearProfile.gaussian_poly([1.0, -2.0, 0.5], 0.3)],
)
def test_smooth_profiles_against_quad(profile):
    sol = sf.shear_solution(profile, 1e-2)
    for t in (0.01, 0.7):
        for z in (0.01, 0.1, 0.6):
            assert sf.phi(sol, t, z) == pytest.approx(quad_phi(profile, 1e-2, t, z), abs=1e-12)


def test_table_profile(tmp_path):
    z = np.linspace(0, 2, 41)
    path = tmp_path / "phi.csv"
    path.write_text("z,phi0\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(z.tolist(), np.exp(-z).tolist())))
    prof = ShearProfile.from_csv(str(path), bound=1.0, decay=1.0)
    exact = ShearProfile.exponential(1.0, 1.0)
    assert prof(3.0) == pytest.approx(math.exp(-3.0), rel=1e-12)
    a = sf.phi(sf.shear_solution(prof, 1e-3), 0.5, 0.3)
    b = sf.phi(sf.shear_solution(exact, 1e-3), 0.5, 0.3)
    assert a == pytest.approx(b, abs=1e-5)
    with pytest.raises(DomainError):
        ShearProfile.from_table(z, 2 * np.exp(-z), bound=1.0)


def test_small_time_recovers_profile():
    prof = ShearProfile.exponential(1.0, 2.0)
    sol = sf.shear_solution(prof, 1e-3)
    assert sf.phi(sol, 1e-9 / sol.nu, 0.3) == pytest.approx(prof(0.3), abs=1e-4)


def test_boundary_integral_closed_form():
    for nu in (1e-2, 1e-4):
        sol = sf.shear_solution(UNIT, nu, half_width=0.5)
        expected = -(4 / math.sqrt(math.pi)) * 0.5 * math.sqrt(nu)
        assert sf.boundary_integral(sol, 1.0) == pytest.approx(expected, rel=1e-10)
    zero_at_wall = ShearProfile.gaussian_poly([0.0, 1.0], 1.0)
    assert sf.boundary_integral(sf.shear_solution(zero_at_wall, 1e-3), 1.0) == 0.0


def test_l2_error_closed_form():
    for nu in (1e-2, 1e-5):
        sol = sf.shear_solution(UNIT, nu)
        expected = 1.0 * math.sqrt(4 * nu) * (2 - math.sqrt(2)) / math.sqrt(math.pi)
        assert sf.l2_error_squared(sol, 1.0) == pytest.approx(expected, rel=1e-12)


def test_vorticity_at_time_zero():
    with pytest.raises(InitialLayerError):
        sf.vorticity(sf.shear_solution(UNIT, 1e-3), 0.0, 0.1)
    prof = ShearProfile.gaussian_poly([0.0, 1.0], 1.0)
    v = sf.vorticity(sf.shear_solution(prof, 1e-3), 0.0, 0.5)
    assert v == pytest.approx(-(1 - 2 * 0.25) * math.exp(-0.25), rel=1e-6)


def test_euler_and_ns_velocity():
    prof = ShearProfile.exponential(2.0, 1.0)
    sol = sf.shear_solution(prof, 1e-3)
    z = np.linspace(0, 1, 5)
    assert np.array_equal(sf.euler_velocity(sol, z), prof(z))
    assert np.array_equal(sf.ns_velocity(sol, 0.0, z), prof(z))
    assert sf.ns_velocity(sol, 0.2, 0.0) == 0.0


def test_input_validation():
    sol = sf.shear_solution(UNIT, 1e-3)
    with pytest.raises(DomainError):
        sf.phi(sol, -1.0, 0.1)
    with pytest.raises(DomainError):
        sf.phi(sol, 1.0, -0.1)
    with pytest.raises(DomainError):
        sf.shear_solution(UNIT, 0.0)
    with pytest.raises(DomainError):
        ShearProfile.exponential(1.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 1e-1), st.floats(1e-3, 1.0), st.floats(0.0, 2.0))
def test_maximum_principle(nu, t, z):
    prof = ShearProfile.exponential(1.0, 2.0)
    v = sf.phi(sf.shear_solution(prof, nu), t, z)
    assert -1e-14 <= v <= 1.0 + 1e-14
