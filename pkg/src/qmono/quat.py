"""Quaternion arithmetic on plain numpy arrays.

A quaternion ``q = q0*e0 + q1*e1 + q2*e2 + q3*e3`` is stored as a length-4
float array ``[q0, q1, q2, q3]``; ``e0`` is the unit and the imaginary basis
multiplies as ``e_i e_j = -delta_ij e0 + eps_ijk e_k``.  Every function here
broadcasts over leading axes, so a whole field of quaternions is just an
array of shape ``(..., 4)`` and the scalar case is the shape ``(4,)``
special case of the same code.
"""

from __future__ import annotations

import numpy as np

E0 = np.array([1.0, 0.0, 0.0, 0.0])
E1 = np.array([0.0, 1.0, 0.0, 0.0])
E2 = np.array([0.0, 0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 0.0, 1.0])

#: minimum length accepted when normalizing a direction into an imaginary unit
DIRECTION_EPS = 1e-12


def qmul(p, q) -> np.ndarray:
    """Quaternion product ``p q`` (non-commutative), broadcasting over (..., 4)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qconj(q) -> np.ndarray:
    """Conjugate ``q* = [q0, -q1, -q2, -q3]``; anti-automorphism ``(pq)* = q* p*``."""
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm(q) -> np.ndarray:
    """Euclidean norm; multiplicative: ``|pq| = |p||q|``."""
    q = np.asarray(q, dtype=float)
    return np.sqrt(np.sum(q * q, axis=-1))


def real_part(q) -> np.ndarray:
    """The e0 component."""
    return np.asarray(q, dtype=float)[..., 0]


def vector_part(q) -> np.ndarray:
    """The (e1, e2, e3) components as a (..., 3) array."""
    return np.asarray(q, dtype=float)[..., 1:]


def from_vector(v) -> np.ndarray:
    """Embed a 3-vector as the imaginary quaternion ``v . e``."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (4,))
    out[..., 1:] = v
    return out


def qexp(q) -> np.ndarray:
    """Quaternion exponential.

    With ``q = r e0 + v`` (``v`` imaginary),
    ``exp(q) = e^r (cos|v| e0 + (v/|v|) sin|v|)``; the ``sin|v|/|v|`` ratio is
    evaluated as a sinc so the ``v -> 0`` limit is exact.
    """
    q = np.asarray(q, dtype=float)
    r = q[..., 0]
    v = q[..., 1:]
    nv = np.sqrt(np.sum(v * v, axis=-1))
    scale = np.exp(r)
    out = np.empty(q.shape)
    out[..., 0] = scale * np.cos(nv)
    out[..., 1:] = (scale * np.sinc(nv / np.pi))[..., None] * v
    return out


def su2(q) -> np.ndarray:
    """The 2x2 complex matrix of ``q`` under ``e0 -> I``, ``e_k -> -i sigma_k``.

    Real-linear and multiplicative: ``su2(pq) = su2(p) @ su2(q)``; unit
    quaternions map onto SU(2).  Returns shape (..., 2, 2).
    """
    q = np.asarray(q, dtype=float)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    m = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = q0 - 1j * q3
    m[..., 0, 1] = -q2 - 1j * q1
    m[..., 1, 0] = q2 - 1j * q1
    m[..., 1, 1] = q0 + 1j * q3
    return m


def auto(omega, q) -> np.ndarray:
    """Inner automorphism ``q -> omega* q omega`` for a unit quaternion omega.

    Fixes the complex slice of omega pointwise when omega is an imaginary
    unit.  Raises ValueError if omega is not unit length.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(np.abs(qnorm(omega) - 1.0) > 1e-9):
        raise ValueError("auto requires a unit quaternion omega")
    return qmul(qconj(omega), qmul(q, omega))


def imaginary_unit(direction) -> np.ndarray:
    """Normalize a 3-vector direction into an imaginary unit quaternion.

    The result w satisfies ``w* = -w``, ``|w| = 1`` and ``w^2 = -e0``.
    Directions shorter than ``DIRECTION_EPS`` are rejected (undefined axis).
    """
    v = np.asarray(direction, dtype=float)
    if v.shape != (3,):
        raise ValueError("direction must be a 3-vector")
    n = float(np.linalg.norm(v))
    if n < DIRECTION_EPS:
        raise ValueError("direction too short to define an imaginary unit")
    return from_vector(v / n)


def is_imaginary_unit(q, tol: float = 1e-12) -> bool:
    """True if ``q* = -q`` and ``|q| = 1`` within tol."""
    q = np.asarray(q, dtype=float)
    return bool(abs(q[0]) <= tol and abs(qnorm(q) - 1.0) <= tol)
