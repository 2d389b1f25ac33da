"""Experiment description shared by the sweep harness and the CLI.

An :class:`Experiment` fixes everything except the viscosity; ``build(nu)``
returns the Navier-Stokes and Euler solutions for one row of a sweep and
``DIAGNOSTICS`` maps CSV diagnostic names to functions evaluating them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from . import disk_flow
from .disk_flow import RadialProfile
from .errors import DomainError
from .shear_flow import ShearProfile, shear_solution
from .specfun import LayerSpec


@dataclass(frozen=True)
class Experiment:
    flow: str
    profile: object
    T: float = 1.0
    K: int = disk_flow.DEFAULT_K
    half_width: float = 0.5
    layer: LayerSpec = field(default_factory=lambda: LayerSpec(0.05, 0.025, 1.0))
    diagnostics: tuple = ()
    time_grid_size: int = 64

    def __post_init__(self):
        if self.flow not in ("disk", "shear"):
            raise DomainError(f"flow must be 'disk' or 'shear', got {self.flow!r}")
        want = RadialProfile if self.flow == "disk" else ShearProfile
        if not isinstance(self.profile, want):
            raise DomainError(f"{self.flow} flow needs a {want.__name__}")
        unknown = [d for d in self.diagnostics if d not in DIAGNOSTICS]
        if unknown:
            raise DomainError(f"unknown diagnostics: {', '.join(unknown)}")

    def build(self, nu):
        if self.flow == "disk":
            ns = disk_flow.disk_solution(self.profile, nu, self.K)
            return ns, disk_flow.euler_solution(self.profile)
        ns = shear_solution(self.profile, nu, self.half_width)
        return ns, ns


def _pairing_function(experiment):
    if experiment.flow == "disk":
        return diag.TestFunction.radial_poly([0.0, 1.0], "r^2")
    return diag.TestFunction("exp(-z)", lambda z: np.exp(-z), lambda z: -np.exp(-z))


def _kato(exp, ns, euler):
    v = diag.kato_layer_enstrophy(ns, exp.T, exp.layer)
    return exp.T, float(v), v.error


def _layer_l1(exp, ns, euler):
    v = diag.layer_l1_mass(ns, exp.T, exp.layer.delta)
    return exp.T, float(v), v.error


def _flux(exp, ns, euler):
    v = diag.boundary_flux(ns, exp.T, 1.0)
    return exp.T, float(v), v.error


def _sheet(exp, ns, euler):
    t = 0.5 * exp.T
    p = diag.sheet_pairing(ns, euler, _pairing_function(exp), t)
    return t, p.gap, float("nan")


def _lp(p):
    def run(exp, ns, euler):
        t = 0.5 * exp.T
        return t, diag.lp_norm_scan(ns, t, [p])[0], float("nan")

    return run


def _mass(exp, ns, euler):
    t = 0.5 * exp.T
    b = diag.mass_budget(ns, euler, exp.layer, t)
    return t, b.deviation, float("nan")


def _weak(exp, ns, euler):
    t = exp.T
    if exp.flow == "disk":
        tests = diag.disk_test_library()
    else:
        tests = [_pairing_function(exp)]
    gaps = [diag.weak_velocity_pairing(ns, euler, f, t) for f in tests]
    return t, max(gaps), float("nan")


DIAGNOSTICS = {
    "kato_layer": _kato,
    "layer_l1": _layer_l1,
    "boundary_flux": _flux,
    "sheet_pairing": _sheet,
    "lp_l1": _lp(1.0),
    "lp_l2": _lp(2.0),
    "lp_inf": _lp(math.inf),
    "mass_budget": _mass,
    "weak_pairing": _weak,
}

DIAGNOSTIC_HELP = {
    "kato_layer": "nu int_0^T ||w||^2 over the strip of width c nu (t_or_T = T)",
    "layer_l1": "L2-in-time L1 vorticity mass of the strip of width delta (t_or_T = T)",
    "boundary_flux": "nu int_0^T int_Gamma w (t_or_T = T)",
    "sheet_pairing": "|(w, f) - (w_bar, f) + int_Gamma (u_bar.tau) f| at T/2, f = r^2 or exp(-z)",
    "lp_l1": "||w(T/2)||_1",
    "lp_l2": "||w(T/2)||_2",
    "lp_inf": "max |w(T/2)| on a 4096-point wall-clustered grid",
    "mass_budget": "|(w, 1 - phi_delta) - m| at T/2 (disk only)",
    "weak_pairing": "max over test fields of |(u - u_bar, v)| / ||v|| at T",
}


def evaluate_diagnostic(experiment: Experiment, name: str, nu: float):
    """(t_or_T, value, error_estimate) for one named diagnostic at one viscosity."""
    ns, euler = experiment.build(nu)
    return DIAGNOSTICS[name](experiment, ns, euler)
