"""Small-time expansion of the disk solution for polynomial profiles.

At very short times the eigenfunction series needs far more modes than is
practical, because the initial vorticity sheet has thickness sqrt(nu t).
For vorticity that is a polynomial in r^2 the Laplace transform of the
azimuthal velocity is known exactly,

    u_hat(s, r) = P(s, r) - P(s, 1) I1(q r) / I1(q),    q = sqrt(s / nu),

with P = sum_n nu^n L^n u0 / s^(n+1) and L = d2/dr2 + (1/r) d/dr - 1/r^2.
Expanding I1(qr)/I1(q) for large q and inverting term by term gives the
velocity as a polynomial part plus a sheet made of iterated complementary
error functions of xi = (1 - r) / (2 sqrt(nu t)).  The neglected pieces are
O((nu t)^(M/2)) and reflections through the centre of size exp(-1/(nu t)).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .specfun import iterated_erfc_scaled

# the sheet is dropped where exp(-xi^2) < exp(-1600)
_XI_MAX = 40.0


@lru_cache(maxsize=16)
def _hankel_a(order, count):
    mu = 4.0 * order * order
    out = [1.0]
    for m in range(1, count):
        out.append(out[-1] * (mu - (2 * m - 1) ** 2) / (m * 8.0))
    out = np.array(out)
    out.setflags(write=False)
    return out


def _ratio_series(num_order, r, count):
    """Coefficients of A_num(q r) / A_1(q) in powers of 1/q, as arrays over r.

    A_n(z) = sum_m (-1)^m a_m(n) z^-m is the bracket of the large-argument
    expansion I_n(z) ~ e^z / sqrt(2 pi z) A_n(z).
    """
    signs = (-1.0) ** np.arange(count)
    alpha = (signs * _hankel_a(num_order, count))[:, None] * r[None, :] ** (-np.arange(count)[:, None])
    beta = signs * _hankel_a(1, count)
    c = np.empty_like(alpha)
    for n in range(count):
        acc = alpha[n].copy()
        for i in range(1, n + 1):
            acc -= beta[i] * c[n - i]
        c[n] = acc
    return c


class SmallTimeExpansion:
    """Short-time form of the disk solution started from a polynomial profile.

    ``velocity_coeffs`` are b_i with u0(r) = sum_i b_i r^(2i+1).
    """

    def __init__(self, velocity_coeffs, terms: int = 14):
        b = np.asarray(velocity_coeffs, dtype=float)
        self.terms = int(terms)
        # U_n = L^n u0; L r^(2i+1) = 4 i (i+1) r^(2i-1)
        powers = [b]
        while len(powers[-1]) > 1 and np.any(powers[-1][1:] != 0):
            prev = powers[-1]
            i = np.arange(1, len(prev))
            powers.append(4.0 * i * (i + 1) * prev[1:])
        self.u_coeffs = powers
        self.u_at_1 = np.array([p.sum() for p in powers])

    def _poly(self, coeffs, r, vorticity):
        r2 = r * r
        out = np.zeros_like(r)
        for i in range(len(coeffs) - 1, -1, -1):
            c = coeffs[i] * (2 * i + 2) if vorticity else coeffs[i]
            out = out * r2 + c
        return out if vorticity else out * r

    def _evaluate(self, nu, t, r, vorticity):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        if np.any((flat < 0) | (flat > 1)):
            raise DomainError("r must lie in [0, 1]")
        tau = nu * t
        if not tau > 0:
            raise DomainError("small-time expansion needs nu t > 0")

        regular = np.zeros_like(flat)
        for n, coeffs in enumerate(self.u_coeffs):
            regular += tau**n / math.factorial(n) * self._poly(coeffs, flat, vorticity)

        root = math.sqrt(4.0 * tau)
        xi = (1.0 - flat) / root
        near = xi < _XI_MAX
        sheet = np.zeros_like(flat)
        last = np.zeros_like(flat)
        if np.any(near):
            rn = flat[near]
            xn = xi[near]
            m_count = self.terms
            ratio = _ratio_series(0 if vorticity else 1, rn, m_count)
            shift = -1 if vorticity else 0
            kmax = 2 * (len(self.u_coeffs) - 1) + m_count - 1 + shift
            h = iterated_erfc_scaled(max(kmax, 0), xn) * np.exp(-xn * xn)
            acc = np.zeros_like(rn)
            tail = np.zeros_like(rn)
            for n, u1 in enumerate(self.u_at_1):
                if u1 == 0.0:
                    continue
                for m in range(m_count):
                    k = 2 * n + m + shift
                    term = u1 * ratio[m] * root ** k * h[k + 1]
                    acc += term
                    if m == m_count - 1:
                        tail += np.abs(term)
            sheet[near] = -acc / np.sqrt(rn)
            last[near] = tail / np.sqrt(rn)
        values = (regular + sheet).reshape(r.shape)
        return values, float(np.max(last)) if len(last) else 0.0

    def velocity(self, nu, t, r):
        return self._evaluate(nu, t, r, vorticity=False)

    def vorticity(self, nu, t, r):
        return self._evaluate(nu, t, r, vorticity=True)
