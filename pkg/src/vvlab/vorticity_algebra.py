"""Vorticity as the antisymmetric part of the velocity gradient.

Convention: the gradient matrix has entries (grad u)[i][j] = d_j u^i, so row i
is the gradient of component i.  Getting this backwards flips the sign of
every vorticity below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class VelocityGradientSample:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 3):
            raise DomainError(f"velocity gradient must be 2x2 or 3x3, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("velocity gradient entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self):
        return self.matrix.shape[0]


def _matrix(sample):
    if isinstance(sample, VelocityGradientSample):
        return sample.matrix
    return VelocityGradientSample(sample).matrix


def antisym_part(sample) -> np.ndarray:
    """(M - M^T) / 2, computed entrywise so the result is exactly antisymmetric."""
    m = _matrix(sample)
    return (m - m.T) / 2.0


def scalar_curl_2d(sample) -> float:
    """d_1 u^2 - d_2 u^1 = M[1][0] - M[0][1]."""
    m = _matrix(sample)
    if m.shape != (2, 2):
        raise DomainError("scalar curl needs a 2x2 velocity gradient")
    return float(m[1, 0] - m[0, 1])


def curl_3d(sample) -> np.ndarray:
    """Vector curl (d_2 u^3 - d_3 u^2, d_3 u^1 - d_1 u^3, d_1 u^2 - d_2 u^1)."""
    m = _matrix(sample)
    if m.shape != (3, 3):
        raise DomainError("vector curl needs a 3x3 velocity gradient")
    return np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def _three_vector(v):
    a = np.asarray(v, dtype=float)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise DomainError("expected three finite components")
    return a


def f_map(phi) -> np.ndarray:
    """The antisymmetric matrix F(phi) with F(phi) v = phi x v."""
    p1, p2, p3 = _three_vector(phi)
    return np.array([[0.0, -p3, p2], [p3, 0.0, -p1], [-p2, p1, 0.0]])


def f_inv(matrix, tol: float = 1e-12) -> np.ndarray:
    """Inverse of :func:`f_map`; rejects matrices that are not antisymmetric."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise DomainError("f_inv needs a 3x3 matrix")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m + m.T)) > tol * scale:
        raise DomainError("matrix is not antisymmetric")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def frobenius(a, b) -> float:
    """Entrywise pairing A . B = sum_ij A_ij B_ij."""
    return float(np.sum(np.asarray(a) * np.asarray(b)))
