"""Quaternion-valued wavefunctions on an origin-avoiding lattice.

The square-integrable quaternion-valued functions on R^3 are discretized on
a cell-centered cubic grid over ``[-L, L]^3``: with ``n`` (even) points per
axis every sample coordinate is an odd multiple of ``L/n``, so the deleted
origin is never sampled and every monopole formula stays finite.

Scalars act on the RIGHT (``rscale``), operators on the left; the inner
product is the cell-volume-weighted Riemann sum

    inner(phi, psi) = h^3 sum_x  phi(x)* psi(x),

conjugate-linear in the first factor and linear in the second:
``inner(phi q1, psi q2) = q1* inner(phi, psi) q2``.

A field is either a callable ``x -> quaternion`` (analytic representation,
evaluable anywhere) or a ``LatticeField`` (samples on a ``LatticeSpec``);
``sample`` converts the former to the latter.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import quat


@dataclass(frozen=True)
class LatticeSpec:
    """Cell-centered cubic grid: ``n`` points per axis on ``[-box, box]^3``.

    ``n`` must be even and >= 4 so that no sample coordinate hits the origin.
    """

    n: int
    box: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError("LatticeSpec.n must be even and >= 4")
        if self.box <= 0.0:
            raise ValueError("LatticeSpec.box must be positive")

    @property
    def step(self) -> float:
        return 2.0 * self.box / self.n

    @property
    def cell_volume(self) -> float:
        return self.step**3

    def axis(self) -> np.ndarray:
        """The n per-axis coordinates, odd multiples of box/n."""
        return (2.0 * np.arange(self.n) + 1.0 - self.n) * (self.box / self.n)

    def points(self) -> np.ndarray:
        """All sample points, shape (n, n, n, 3)."""
        return grid_points(self)

    def commensurate_steps(self, a) -> np.ndarray:
        """Integer grid steps realizing the shift ``a``; raises if off-grid."""
        a = np.asarray(a, dtype=float)
        m = a / self.step
        mi = np.rint(m)
        if np.any(np.abs(m - mi) > 1e-9 * np.maximum(1.0, np.abs(mi))):
            raise ValueError(f"shift {a} is not an integer multiple of the grid step {self.step}")
        return mi.astype(int)


@functools.lru_cache(maxsize=8)
def grid_points(spec: LatticeSpec) -> np.ndarray:
    ax = spec.axis()
    x1, x2, x3 = np.meshgrid(ax, ax, ax, indexing="ij")
    pts = np.stack([x1, x2, x3], axis=-1)
    pts.setflags(write=False)
    return pts


@dataclass
class LatticeField:
    """Quaternion field sampled on a lattice: values of shape (n, n, n, 4).

    Treated as an immutable snapshot; operations allocate new fields.
    """

    spec: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        n = self.spec.n
        if self.values.shape != (n, n, n, 4):
            raise ValueError(f"values must have shape {(n, n, n, 4)}, got {self.values.shape}")

    def copy(self) -> "LatticeField":
        return LatticeField(self.spec, self.values.copy())


def sample(spec: LatticeSpec, fn) -> LatticeField:
    """Sample an analytic field ``fn: (..., 3) -> (..., 4)`` onto the lattice."""
    vals = np.asarray(fn(spec.points()), dtype=float)
    return LatticeField(spec, vals)


def constant(spec: LatticeSpec, q) -> LatticeField:
    """The constant field with value ``q`` at every site."""
    q = np.asarray(q, dtype=float)
    return LatticeField(spec, np.broadcast_to(q, (spec.n, spec.n, spec.n, 4)).copy())


def _require_matching(phi: LatticeField, psi: LatticeField):
    if phi.spec != psi.spec:
        raise ValueError("lattice specs do not match")


def inner(phi: LatticeField, psi: LatticeField) -> np.ndarray:
    """Quaternion-valued inner product (conjugate-linear in ``phi``)."""
    _require_matching(phi, psi)
    prod = quat.qmul(quat.qconj(phi.values), psi.values)
    return prod.sum(axis=(0, 1, 2)) * phi.spec.cell_volume


def norm(psi: LatticeField) -> float:
    """Hilbert norm sqrt(inner(psi, psi))."""
    return float(np.sqrt(np.sum(psi.values**2) * psi.spec.cell_volume))


def rscale(psi: LatticeField, q) -> LatticeField:
    """Right scalar action ``psi -> psi q`` (pointwise right multiplication)."""
    return LatticeField(psi.spec, quat.qmul(psi.values, np.asarray(q, dtype=float)))


def multop(f, psi: LatticeField) -> LatticeField:
    """Pointwise LEFT multiplication by ``f(x)``.

    ``f`` is either a callable on points or a precomputed (n, n, n, 4) symbol
    array.  Commutes with every ``project``.
    """
    if callable(f):
        sym = np.asarray(f(psi.spec.points()), dtype=float)
    else:
        sym = np.asarray(f, dtype=float)
    return LatticeField(psi.spec, quat.qmul(sym, psi.values))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi)`` used as a spectral (Borel) set."""

    lo: tuple
    hi: tuple

    @staticmethod
    def of(lo, hi) -> "Box":
        return Box(tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    def indicator(self, spec: LatticeSpec) -> np.ndarray:
        pts = spec.points()
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts < hi), axis=-1)

    def translate(self, a) -> "Box":
        a = np.asarray(a, dtype=float)
        return Box.of(np.asarray(self.lo) + a, np.asarray(self.hi) + a)

    def intersect(self, other: "Box") -> "Box":
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        return Box.of(lo, np.maximum(lo, hi))


@dataclass(frozen=True)
class BoxUnion:
    """Finite union of boxes; closed under intersection with another union."""

    boxes: tuple

    @staticmethod
    def of(*boxes) -> "BoxUnion":
        return BoxUnion(tuple(boxes))

    def indicator(self, spec: LatticeSpec) -> np.ndarray:
        mask = np.zeros((spec.n,) * 3, dtype=bool)
        for b in self.boxes:
            mask |= b.indicator(spec)
        return mask

    def translate(self, a) -> "BoxUnion":
        return BoxUnion(tuple(b.translate(a) for b in self.boxes))

    def intersect(self, other: "BoxUnion") -> "BoxUnion":
        return BoxUnion(tuple(b.intersect(o) for b in self.boxes for o in other.boxes))


def whole_space(spec: LatticeSpec) -> Box:
    """A box covering every lattice site."""
    return Box.of((-spec.box,) * 3, (spec.box,) * 3)


def project(delta, psi: LatticeField) -> LatticeField:
    """Spectral projection: zero the samples outside ``delta``.

    Idempotent, self-adjoint, multiplicative over intersections; commutes
    bit-exactly with every pointwise left multiplication.
    """
    mask = delta.indicator(psi.spec)
    return LatticeField(psi.spec, np.where(mask[..., None], psi.values, 0.0))


def save_csv(psi: LatticeField, path) -> None:
    """Write a field as CSV rows ``index,q0,q1,q2,q3`` (flat C-order index).

    The lattice is recorded in the header comments, so ``load_csv`` can
    rebuild the field without side information.
    """
    flat = psi.values.reshape(-1, 4)
    idx = np.arange(flat.shape[0])[:, None]
    np.savetxt(
        path,
        np.hstack([idx, flat]),
        fmt=["%d"] + ["%.17g"] * 4,
        delimiter=",",
        header=f"n={psi.spec.n} box={psi.spec.box!r}\nindex,q0,q1,q2,q3",
    )


def load_csv(path) -> LatticeField:
    """Read a field written by ``save_csv``."""
    with open(path) as fh:
        first = fh.readline().strip()
    if not first.startswith("#"):
        raise ValueError("missing lattice header")
    meta = dict(tok.split("=") for tok in first[1:].split())
    spec = LatticeSpec(n=int(meta["n"]), box=float(meta["box"]))
    data = np.loadtxt(path, delimiter=",")
    order = np.argsort(data[:, 0])
    vals = data[order, 1:].reshape(spec.n, spec.n, spec.n, 4)
    return LatticeField(spec, vals)
