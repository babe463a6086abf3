"""Pointwise monopole geometry.

Everything here lives on punctured space: the monopole sits at the origin,
positions must have ``|x| > 0``, and the field is ``B(x) = x / (2|x|^3)``
(total flux 2 pi through any surface enclosing the origin).

The parallel-transport quaternion ``transport(a, x)`` carries the fiber from
``x`` to ``x + a`` and is the half-angle rotation about ``x cross a``:

    w = sqrt((1 + c)/2) + j(x cross a) sqrt((1 - c)/2),
    c = (|x|^2 + a.x) / (|x| |x + a|)  = cos(angle(x, x + a)).

Both radicands carry the ``+a.x`` inner sign; this is forced by unitarity
(``w w* = 1``).  The variant with the second radicand's inner sign flipped
circulates in some derivations and is kept as ``transport_sign_variant`` --
it has ``|w|^2 = 1 + a.x/(|x||x+a|)`` and serves as a negative control in
the verification suites.

Functions broadcast over leading axes: pass arrays of shape (..., 3) to
evaluate many configurations at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat

#: reject transports whose segment passes closer to the origin than
#: this fraction of max(|x|, |x+a|) -- the limit is ill-conditioned there.
SEGMENT_MARGIN = 1e-9


class DomainError(ValueError):
    """Input touches the monopole location (or the excluded segment set)."""


def _norm(v):
    return np.sqrt(np.sum(v * v, axis=-1))


def dirq(x) -> np.ndarray:
    """Radial direction quaternion ``j(x) = e . x / |x|``.

    An imaginary unit at every point: ``j(x)^2 = -e0``; scale invariant.
    """
    x = np.asarray(x, dtype=float)
    n = _norm(x)
    if np.any(n == 0.0):
        raise DomainError("dirq undefined at the origin (monopole location)")
    return quat.from_vector(x / n[..., None])


def bfield(x) -> np.ndarray:
    """Monopole field ``B(x) = x / (2 |x|^3)``; radial, magnitude 1/(2|x|^2)."""
    x = np.asarray(x, dtype=float)
    n = _norm(x)
    if np.any(n == 0.0):
        raise DomainError("bfield undefined at the origin")
    return x / (2.0 * n**3)[..., None]


def segment_origin_distance(x, y) -> np.ndarray:
    """Minimum distance from the segment [x, y] to the origin."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - x
    dd = np.sum(d * d, axis=-1)
    # parameter of the closest point, clamped to the segment
    t = np.where(dd > 0.0, -np.sum(x * d, axis=-1) / np.where(dd > 0.0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = x + t[..., None] * d
    return _norm(closest)


def _check_transport_domain(x, y):
    nx = _norm(x)
    ny = _norm(y)
    if np.any(nx == 0.0) or np.any(ny == 0.0):
        raise DomainError("transport endpoint at the origin")
    dist = segment_origin_distance(x, y)
    bad = dist <= SEGMENT_MARGIN * np.maximum(nx, ny)
    if np.any(bad):
        idx = np.argwhere(bad)
        raise DomainError(
            "transport segment passes through (or within margin of) the origin; "
            f"first offending configuration index {tuple(idx[0])}"
        )
    return nx, ny


def transport(a, x) -> np.ndarray:
    """Parallel-transport quaternion from ``x`` to ``x + a``.

    Unit by construction; equals ``e0`` when ``a = 0`` or ``x`` and ``x + a``
    are parallel.  Raises DomainError when the segment [x, x+a] meets the
    origin (within SEGMENT_MARGIN).
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    y = x + a
    nx, ny = _check_transport_domain(x, y)
    # denom = |x||y| (1 + c) > 0 away from the anti-parallel case
    denom = nx * ny + np.sum(x * y, axis=-1)
    v = np.cross(x, y)  # equals x cross a
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = np.sqrt(denom / (2.0 * nx * ny))
    out[..., 1:] = v / np.sqrt(2.0 * nx * ny * denom)[..., None]
    return out


def transport_sign_variant(a, x) -> np.ndarray:
    """Transport with the second radicand's inner sign flipped.

    NOT unitary: ``|w|^2 = 1 + a.x/(|x||x+a|)``.  Kept only as a negative
    control; do not use for physics.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    y = x + a
    nx, ny = _check_transport_domain(x, y)
    ax = np.sum(a * x, axis=-1)
    c_plus = (nx**2 + ax) / (nx * ny)
    c_minus = (nx**2 - ax) / (nx * ny)
    v = np.cross(x, a)
    nv = _norm(v)
    axis = np.where((nv > 0.0)[..., None], v / np.where(nv > 0.0, nv, 1.0)[..., None], 0.0)
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = np.sqrt(np.maximum(1.0 + c_plus, 0.0) / 2.0)
    out[..., 1:] = axis * np.sqrt(np.maximum(1.0 - c_minus, 0.0) / 2.0)[..., None]
    return out


def solid_angle(v1, v2, v3) -> np.ndarray:
    """Signed solid angle subtended at the origin by the triangle (v1, v2, v3).

    Van Oosterom-Strackee: ``Omega = 2 atan2(det[v1 v2 v3], D)`` with
    ``D = |v1||v2||v3| + (v1.v2)|v3| + (v1.v3)|v2| + (v2.v3)|v1|``.
    Sign follows the vertex orientation; swapping two vertices flips it.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    v3 = np.asarray(v3, dtype=float)
    n1, n2, n3 = _norm(v1), _norm(v2), _norm(v3)
    if np.any(n1 == 0.0) or np.any(n2 == 0.0) or np.any(n3 == 0.0):
        raise DomainError("solid_angle: vertex at the origin")
    num = np.sum(np.cross(v1, v2) * v3, axis=-1)
    den = (
        n1 * n2 * n3
        + np.sum(v1 * v2, axis=-1) * n3
        + np.sum(v1 * v3, axis=-1) * n2
        + np.sum(v2 * v3, axis=-1) * n1
    )
    if np.any((num == 0.0) & (den < 0.0)):
        raise DomainError("solid_angle: origin lies on the triangle surface")
    return 2.0 * np.arctan2(num, den)


def triflux(triangle) -> np.ndarray:
    """Flux of the monopole field through an oriented flat triangle.

    ``triangle`` is (..., 3, 3): three vertices along the second-to-last
    axis.  Equals half the signed solid angle the triangle subtends at the
    origin (closed form, no quadrature).
    """
    t = np.asarray(triangle, dtype=float)
    if t.shape[-2:] != (3, 3):
        raise ValueError("triangle must have shape (..., 3, 3)")
    return 0.5 * solid_angle(t[..., 0, :], t[..., 1, :], t[..., 2, :])


def _tet_vertices(x, a, b, c):
    p0 = np.asarray(x, dtype=float)
    p1 = p0 + np.asarray(a, dtype=float)
    p2 = p1 + np.asarray(b, dtype=float)
    p3 = p2 + np.asarray(c, dtype=float)
    return p0, p1, p2, p3


def tetraflux(x, a, b, c) -> np.ndarray:
    """Total outward flux through the tetrahedron with edge walk (a, b, c).

    Vertices are ``x, x+a, x+a+b, x+a+b+c``.  The result is 2 pi when the
    origin lies inside and 0 when outside, independent of vertex labelling.
    """
    p0, p1, p2, p3 = _tet_vertices(x, a, b, c)
    orient = np.sign(np.sum(np.cross(p1 - p0, p2 - p0) * (p3 - p0), axis=-1))
    total = (
        0.5 * solid_angle(p1, p2, p3)
        + 0.5 * solid_angle(p0, p3, p2)
        + 0.5 * solid_angle(p0, p1, p3)
        + 0.5 * solid_angle(p0, p2, p1)
    )
    return orient * total


def origin_inside_tetrahedron(x, a, b, c, margin: float = 0.0) -> np.ndarray:
    """Point-in-tetrahedron test for the origin, by signed sub-volumes.

    Independent of the solid-angle machinery (used as an oracle against
    ``tetraflux``).  With ``margin > 0``, configurations whose barycentric
    coordinates come within ``margin`` of zero count as not inside.
    """
    p0, p1, p2, p3 = _tet_vertices(x, a, b, c)

    def vol(q, r, s, t):
        return np.sum(np.cross(r - q, s - q) * (t - q), axis=-1)

    total = vol(p0, p1, p2, p3)
    o = np.zeros(3)
    lams = np.stack(
        [
            vol(o, p1, p2, p3) / total,
            vol(p0, o, p2, p3) / total,
            vol(p0, p1, o, p3) / total,
            vol(p0, p1, p2, o) / total,
        ],
        axis=-1,
    )
    return np.all(lams > margin, axis=-1)


def multiplier(a, b, x) -> np.ndarray:
    """Composition defect of two transported translations.

    ``m(a, b; x) = transport(a+b; x)* transport(a; x+b) transport(b; x)`` --
    the holonomy of the loop x -> x+b -> x+a+b -> x.  A unit quaternion in
    the complex slice of ``j(x)``; equals ``qexp(j(x) * Phi)`` with ``Phi``
    the flux through ``multiplier_flux_triangle(a, b, x)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    w_ab = transport(a + b, x)
    w_a = transport(a, x + b)
    w_b = transport(b, x)
    return quat.qmul(quat.qconj(w_ab), quat.qmul(w_a, w_b))


def multiplier_flux_triangle(a, b, x) -> np.ndarray:
    """The oriented flat triangle whose flux generates ``multiplier(a, b, x)``.

    Vertices ``(x, x+b, x+a+b)`` -- the loop surface in path order, so that
    ``multiplier(a, b, x) = qexp(dirq(x) * triflux(...))`` holds exactly.
    Returns shape (..., 3, 3).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.stack([x, x + b, x + a + b], axis=-2)


@dataclass(frozen=True)
class CurvatureSample:
    """Curvature of the monopole connection at a point.

    ``kappa[..., i, j] = -eps_ijk x^k / (2 |x|^3)`` is the two-form whose
    sphere integral is the Chern number; ``omega[..., r, i, j] =
    kappa[..., i, j] * x^r / |x|`` are its su(2) components.  Both are
    antisymmetric in (i, j).
    """

    point: np.ndarray
    omega: np.ndarray
    kappa: np.ndarray


def _skew(x):
    # skew(x)[i, j] = eps_ijk x_k
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (3, 3))
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    out[..., 0, 1] = x3
    out[..., 1, 0] = -x3
    out[..., 0, 2] = -x2
    out[..., 2, 0] = x2
    out[..., 1, 2] = x1
    out[..., 2, 1] = -x1
    return out


def curvature(x) -> CurvatureSample:
    """Closed-form curvature two-forms at ``x`` (see CurvatureSample)."""
    x = np.asarray(x, dtype=float)
    n = _norm(x)
    if np.any(n == 0.0):
        raise DomainError("curvature undefined at the origin")
    kappa = -_skew(x) / (2.0 * n**3)[..., None, None]
    omega = kappa[..., None, :, :] * (x / n[..., None])[..., :, None, None]
    return CurvatureSample(point=x, omega=omega, kappa=kappa)


def chern(n_theta: int, n_phi: int, radius: float = 1.0, reverse: bool = False) -> float:
    """Integral of the curvature two-form over a sphere around the origin.

    Product quadrature: composite Simpson in the polar angle (``n_theta``
    intervals, even), periodic trapezoid in azimuth (``n_phi`` points).
    Converges to 2 pi at fourth order in the default orientation (the one
    in which the enclosed monopole charge counts positive); radius drops
    out exactly.
    """
    if n_theta < 8 or n_phi < 8:
        raise ValueError("chern requires n_theta, n_phi >= 8")
    if n_theta % 2 != 0:
        raise ValueError("n_theta must be even (Simpson rule)")
    if radius <= 0.0:
        raise ValueError("radius must be positive")

    theta = np.linspace(0.0, np.pi, n_theta + 1)
    phi = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    tg, pg = np.meshgrid(theta, phi, indexing="ij")

    st, ct = np.sin(tg), np.cos(tg)
    sp, cp = np.sin(pg), np.cos(pg)
    x = radius * np.stack([st * cp, st * sp, ct], axis=-1)
    d_theta = radius * np.stack([ct * cp, ct * sp, -st], axis=-1)
    d_phi = radius * np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1)

    kappa = curvature(x).kappa
    u, v = (d_theta, d_phi) if reverse else (d_phi, d_theta)
    integrand = np.einsum("...ij,...i,...j->...", kappa, u, v)

    w_theta = np.ones(n_theta + 1)
    w_theta[1:-1:2] = 4.0
    w_theta[2:-1:2] = 2.0
    w_theta *= (np.pi / n_theta) / 3.0
    return float(np.sum(integrand * w_theta[:, None]) * (2.0 * np.pi / n_phi))
