"""Viscosity sweeps of the sup-in-time L2 error and power-law rate fits."""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import disk_flow, shear_flow
from .disk_flow import DiskSpectralSolution
from .errors import DomainError, FitError, TruncationError, VVLabError
from .experiment import DIAGNOSTICS, Experiment
from .shear_flow import ShearSolution
from .specfun import Estimate

FIT_RMS_LIMIT = 0.05


def time_grid(T: float, size: int = 64) -> np.ndarray:
    """``size`` times spaced geometrically from T * 1e-6 to T."""
    if not T > 0 or size < 2:
        raise DomainError("time grid needs T > 0 and at least two points")
    return T * np.logspace(-6.0, 0.0, int(size))


def sup_l2_error(ns_solution, euler_solution, T: float, time_grid_size: int = 64) -> Estimate:
    """max over a geometric time grid of ||u(t) - u_bar(t)||_{L2}.

    For the disk the retained modes are summed exactly and the neglected
    ones bracketed by Parseval; the result is the midpoint of the bracket
    and fails if the bracket is wider than 1e-8 of the value.
    """
    times = time_grid(T, time_grid_size)
    if isinstance(ns_solution, DiskSpectralSolution):
        bounds = np.array([disk_flow.l2_error_squared_bounds(ns_solution, t) for t in times])
        low = math.sqrt(float(np.max(bounds[:, 0])))
        high = math.sqrt(float(np.max(bounds[:, 1])))
        value = 0.5 * (low + high)
        if high - low > 1e-8 * value:
            raise TruncationError(
                f"L2 error not resolved with K={ns_solution.table.count}: "
                f"bracket [{low:.10g}, {high:.10g}] at nu={ns_solution.nu:g}"
            )
        return Estimate(value, 0.5 * (high - low))
    if isinstance(ns_solution, ShearSolution):
        values = [shear_flow.l2_error_squared(ns_solution, t) for t in times]
        return Estimate(math.sqrt(max(values)), 0.0)
    raise DomainError(f"unsupported solution type {type(ns_solution).__name__}")


@dataclass(frozen=True)
class Fit:
    alpha: float
    prefactor: float
    residual: float
    points: int


@dataclass(frozen=True)
class SweepRow:
    nu: float
    sup_error: float
    values: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    rows: list
    fit: Fit | None
    fingerprint: str
    fit_message: str = ""

    def alpha_running(self):
        return alpha_running(self.rows)


def _design(rows):
    if len(rows) < 4:
        raise FitError(f"a rate fit needs at least 4 rows, got {len(rows)}")
    nu = np.array([r.nu for r in rows], dtype=float)
    err = np.array([r.sup_error for r in rows], dtype=float)
    if np.any(~np.isfinite(err)) or np.any(err <= 0):
        raise FitError("a rate fit needs strictly positive errors")
    x = np.log10(nu)
    if np.ptp(x) == 0:
        raise FitError("all viscosities are equal; the fit is degenerate")
    return x, np.log10(err)


def fit_rate(sweep) -> Fit:
    """Least squares of log10(error) on log10(nu): error ~ C nu^alpha.

    Refuses data whose RMS residual exceeds 0.05 decades.
    """
    rows = sweep.rows if isinstance(sweep, SweepResult) else list(sweep)
    x, y = _design(rows)
    alpha, intercept = np.polyfit(x, y, 1)
    resid = y - (alpha * x + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    if rms > FIT_RMS_LIMIT:
        raise FitError(f"errors do not follow a power law (RMS residual {rms:.3g} decades)")
    return Fit(float(alpha), float(10.0**intercept), rms, len(rows))


def alpha_running(rows) -> list:
    """Local exponents between consecutive rows; None for the first row."""
    out = [None]
    for a, b in zip(rows[:-1], rows[1:]):
        if a.sup_error > 0 and b.sup_error > 0 and a.nu != b.nu:
            out.append(math.log(b.sup_error / a.sup_error) / math.log(b.nu / a.nu))
        else:
            out.append(None)
    return out


def _fingerprint(experiment, nu_grid):
    payload = {
        "flow": experiment.flow,
        "profile": getattr(experiment.profile, "label", repr(experiment.profile)),
        "T": experiment.T,
        "K": experiment.K,
        "half_width": experiment.half_width,
        "layer": asdict(experiment.layer),
        "diagnostics": list(experiment.diagnostics),
        "time_grid_size": experiment.time_grid_size,
        "nu_grid": sorted(nu_grid, reverse=True),
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def compute_row(experiment: Experiment, nu: float) -> SweepRow:
    try:
        ns, euler = experiment.build(nu)
        err = sup_l2_error(ns, euler, experiment.T, experiment.time_grid_size)
        values = {}
        for name in experiment.diagnostics:
            _, value, _ = DIAGNOSTICS[name](experiment, ns, euler)
            values[name] = value
    except VVLabError as exc:
        raise type(exc)(f"nu={nu:g}: {exc}") from exc
    return SweepRow(float(nu), float(err), values)


def _check_grid(nu_grid):
    grid = [float(v) for v in nu_grid]
    if any(not (math.isfinite(v) and v > 0) for v in grid):
        raise DomainError("every nu must be positive")
    if len(set(grid)) < 4:
        raise DomainError("a sweep needs at least 4 distinct viscosities")
    if math.log10(max(grid) / min(grid)) < 2.0 - 1e-12:
        raise DomainError("the viscosity grid must span at least two decades")
    return sorted(set(grid), reverse=True)


def worker_count(requested=None):
    env = os.environ.get("VVLAB_THREADS")
    cap = int(env) if env and env.isdigit() and int(env) > 0 else 1
    return max(1, min(cap, requested)) if requested else cap


def nu_sweep(experiment: Experiment, nu_grid, workers: int | None = None) -> SweepResult:
    """One row per viscosity, sorted by decreasing nu, plus a rate fit.

    Rows are independent; with more than one worker they run in separate
    processes.  The fit is None (with a message) when it is refused.
    """
    grid = _check_grid(nu_grid)
    n = worker_count(workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=min(n, len(grid))) as pool:
            rows = list(pool.map(compute_row, [experiment] * len(grid), grid))
    else:
        rows = [compute_row(experiment, nu) for nu in grid]
    fit, message = None, ""
    try:
        fit = fit_rate(rows)
    except FitError as exc:
        message = str(exc)
    return SweepResult(rows, fit, _fingerprint(experiment, grid), message)
