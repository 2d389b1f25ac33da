import math

import numpy as np
import pytest

from vvlab import disk_flow as df
from vvlab import rates
from vvlab import shear_flow as sf
from vvlab.disk_flow import RadialProfile
from vvlab.errors import DomainError, FitError
from vvlab.experiment import Experiment
from vvlab.rates import SweepRow, fit_rate, nu_sweep, sup_l2_error
from vvlab.shear_flow import ShearProfile

UNIT = ShearProfile.constant(1.0)
RIGID = RadialProfile.constant(2.0)
GRID = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]


def test_time_grid():
    g = rates.time_grid(2.0, 64)
    assert len(g) == 64 and g[0] == pytest.approx(2e-6) and g[-1] == pytest.approx(2.0)
    assert np.allclose(np.diff(np.log(g)), np.log(g[1] / g[0]))
    with pytest.raises(DomainError):
        rates.time_grid(0.0)


def test_exact_power_law():
    rows = [SweepRow(nu, 3.0 * nu**0.25) for nu in (1e-2, 1e-3, 1e-4, 1e-5)]
    fit = fit_rate(rows)
    assert fit.alpha == pytest.approx(0.25, abs=1e-12)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-11)
    assert fit.residual < 1e-12 and fit.points == 4


def test_fit_refusals():
    with pytest.raises(FitError):
        fit_rate([SweepRow(nu, 0.0) for nu in (1e-2, 1e-3, 1e-4, 1e-5)])
    with pytest.raises(FitError):
        fit_rate([SweepRow(nu, nu) for nu in (1e-2, 1e-3, 1e-4)])
    with pytest.raises(FitError):
        fit_rate([SweepRow(1e-3, 1.0)] * 4)
    bent = [SweepRow(nu, e) for nu, e in zip((1e-2, 1e-3, 1e-4, 1e-5), (1.0, 1.0, 1e-3, 1e-3))]
    with pytest.raises(FitError, match="power law"):
        fit_rate(bent)


def test_alpha_running():
    rows = [SweepRow(nu, nu**0.5) for nu in (1e-2, 1e-3, 1e-4)]
    a = rates.alpha_running(rows)
    assert a[0] is None and a[1] == pytest.approx(0.5) and a[2] == pytest.approx(0.5)


def test_shear_sup_error_closed_form():
    for nu in (1e-2, 1e-6):
        sol = sf.shear_solution(UNIT, nu)
        expected = math.sqrt(2 * 0.5 * math.sqrt(4 * nu * 2.0) * (2 - math.sqrt(2)) / math.sqrt(math.pi))
        assert float(sup_l2_error(sol, sol, 2.0)) == pytest.approx(expected, rel=1e-6)


def test_zero_disk_data():
    zero = RadialProfile.constant(0.0)
    sol = df.disk_solution(zero, 1e-3, 50)
    assert float(sup_l2_error(sol, df.euler_solution(zero), 1.0)) == 0.0
    res = nu_sweep(Experiment("disk", zero, K=50), [1e-2, 1e-3, 1e-4, 1e-5])
    assert all(r.sup_error == 0.0 for r in res.rows)
    assert res.fit is None and "positive" in res.fit_message


def test_disk_k_doubling():
    e = df.euler_solution(RIGID)
    a = sup_l2_error(df.disk_solution(RIGID, 1e-4, 4000), e, 1.0)
    b = sup_l2_error(df.disk_solution(RIGID, 1e-4, 8000), e, 1.0)
    assert abs(float(a) - float(b)) <= 1e-8 * float(b)


def test_disk_truncation_detected():
    sol = df.disk_solution(RIGID, 1e-6, 20)
    with pytest.raises(Exception, match="K=20"):
        sup_l2_error(sol, df.euler_solution(RIGID), 1.0)


def test_shear_sweep():
    res = nu_sweep(Experiment("shear", UNIT), list(reversed(GRID)))
    nus = [r.nu for r in res.rows]
    assert nus == sorted(nus, reverse=True)
    errs = np.array([r.sup_error for r in res.rows])
    assert np.allclose(errs[1:] / errs[:-1], 10**-0.25, rtol=1e-2)
    assert res.fit.alpha == pytest.approx(0.25, abs=5e-3)
    assert len(res.fingerprint) == 16


def test_weak_rate_consistency():
    exp = Experiment("disk", RIGID, diagnostics=("weak_pairing",))
    for nu in (1e-2, 1e-4):
        row = rates.compute_row(exp, nu)
        assert row.values["weak_pairing"] <= row.sup_error * (1 + 1e-9)


def test_grid_checks():
    exp = Experiment("shear", UNIT)
    with pytest.raises(DomainError):
        nu_sweep(exp, [1e-2, 1e-3, 1e-4])
    with pytest.raises(DomainError):
        nu_sweep(exp, [1e-2, 5e-3, 2e-3, 1e-3])
    with pytest.raises(DomainError):
        nu_sweep(exp, [1e-2, 1e-3, 1e-4, 0.0])


def test_row_failure_names_nu():
    exp = Experiment("disk", RIGID, K=20)
    # 20 modes already fail to bracket the error at nu = 1e-3
    with pytest.raises(Exception, match=r"^nu=0\.001: "):
        nu_sweep(exp, [1e-3, 1e-4, 1e-5, 1e-6])


def test_worker_count(monkeypatch):
    monkeypatch.delenv("VVLAB_THREADS", raising=False)
    assert rates.worker_count() == 1
    monkeypatch.setenv("VVLAB_THREADS", "3")
    assert rates.worker_count() == 3
    assert rates.worker_count(2) == 2
    assert rates.worker_count(8) == 3
    monkeypatch.setenv("VVLAB_THREADS", "junk")
    assert rates.worker_count() == 1


def test_parallel_matches_serial(monkeypatch):
    monkeypatch.setenv("VVLAB_THREADS", "2")
    exp = Experiment("shear", UNIT)
    grid = [1e-2, 1e-3, 1e-4, 1e-5]
    serial = nu_sweep(exp, grid, workers=1)
    parallel = nu_sweep(exp, grid, workers=2)
    assert serial.rows == parallel.rows and serial.fingerprint == parallel.fingerprint
