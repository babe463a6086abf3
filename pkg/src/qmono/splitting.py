"""Complex-slice reduction of the quaternionic Hilbert space.

For an imaginary unit ``omega`` the slice ``H_omega = {psi : J psi = psi
omega}`` is a complex Hilbert space over the slice field ``{u + v omega}``;
``J`` is the radial complex structure (left multiplication by ``dirq``).
Any field splits uniquely as ``psi = psi1 + psi2 omega_tilde`` with both
components in the slice, where ``omega_tilde`` is a second imaginary unit
anticommuting with ``omega``:

    psi1 =  (psi - J psi omega) / 2
    psi2 = -(psi + J psi omega) omega_tilde / 2.

The doubled map ``psi -> (psi1, psi2)`` is a bijective isometry:
reconstruction is exact and ``|psi|^2 = |psi1|^2 + |psi2|^2``.  Operators
commuting with ``J`` (twisted shifts, the Hamiltonian) map the slice into
itself; a bare axis unit such as ``left_unit(0)`` does not, and
``reduce_check`` reports the order-one residual that proves it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry, hilbert, quat
from .hilbert import LatticeField
from .operators import Operator
from .report import Report, check_from_devs


@dataclass(frozen=True)
class SliceSpec:
    """An anticommuting pair of imaginary units (omega, omega_tilde)."""

    omega: tuple
    omega_tilde: tuple

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        wt = np.asarray(self.omega_tilde, dtype=float)
        for name, u in (("omega", w), ("omega_tilde", wt)):
            if not quat.is_imaginary_unit(u, tol=1e-12):
                raise ValueError(f"{name} must be a unit imaginary quaternion")
        anti = quat.qmul(wt, w) + quat.qmul(w, wt)
        if np.abs(anti).max() > 1e-12:
            raise ValueError("omega_tilde must anticommute with omega")

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.omega, dtype=float)

    @property
    def wt(self) -> np.ndarray:
        return np.asarray(self.omega_tilde, dtype=float)


def default_slice() -> SliceSpec:
    return SliceSpec(omega=tuple(quat.E3), omega_tilde=tuple(quat.E1))


@dataclass
class SplitPair:
    psi1: LatticeField
    psi2: LatticeField


def _jmul(psi: LatticeField) -> np.ndarray:
    return quat.qmul(geometry.dirq(psi.spec.points()), psi.values)


def split(psi: LatticeField, s: SliceSpec) -> SplitPair:
    """Decompose ``psi = psi1 + psi2 omega_tilde`` with both parts in the slice."""
    jpsi_w = quat.qmul(_jmul(psi), s.w)
    psi1 = 0.5 * (psi.values - jpsi_w)
    psi2 = -0.5 * quat.qmul(psi.values + jpsi_w, s.wt)
    return SplitPair(LatticeField(psi.spec, psi1), LatticeField(psi.spec, psi2))


def reconstruct(pair: SplitPair, s: SliceSpec) -> LatticeField:
    """Inverse of ``split``: ``psi1 + psi2 omega_tilde``."""
    return LatticeField(pair.psi1.spec,
                        pair.psi1.values + quat.qmul(pair.psi2.values, s.wt))


def slice_residual(psi: LatticeField, s: SliceSpec) -> float:
    """Max-site norm of ``(J psi)(x) - psi(x) omega``."""
    dev = _jmul(psi) - quat.qmul(psi.values, s.w)
    return float(quat.qnorm(dev).max())


def in_slice(psi: LatticeField, s: SliceSpec, tol: float = 1e-10):
    """Thresholded slice-membership verdict plus the raw residual."""
    res = slice_residual(psi, s)
    return res <= tol, res


def random_slice_member(spec, s: SliceSpec, rng, center=None, width=None) -> LatticeField:
    """A smooth normalized slice member: split of a random Gaussian bump.

    Centers keep a comfortable distance from the monopole so that stencil
    operators applied to the member are well resolved.
    """
    pts = spec.points()
    if center is None:
        center = rng.uniform(-0.45 * spec.box, 0.45 * spec.box, size=3)
        while not 0.3 * spec.box < np.linalg.norm(center) < 0.45 * spec.box:
            center = rng.uniform(-0.45 * spec.box, 0.45 * spec.box, size=3)
    if width is None:
        width = rng.uniform(0.08 * spec.box, 0.12 * spec.box)
    env = np.exp(-np.sum((pts - center) ** 2, axis=-1) / (2.0 * width**2))
    amp = rng.standard_normal(4)
    raw = LatticeField(spec, env[..., None] * amp)
    psi1 = split(raw, s).psi1
    n = hilbert.norm(psi1)
    if n == 0.0:
        raise ValueError("degenerate random slice member")
    return LatticeField(spec, psi1.values / n)


def reduce_check(op: Operator, s: SliceSpec, samples: int = 5, seed: int = 0,
                 tol: float = 1e-10, label: str = "") -> Report:
    """Does ``op`` map slice members back into the slice?

    Applies ``op`` to random smooth slice members and reports the slice
    residual before (membership sanity) and after.  A failing verdict is
    informative: it certifies that ``op`` does not reduce to the slice.
    """
    rng = np.random.default_rng(seed)
    rep = Report(suite=f"reduce:{label or op.__class__.__name__}", seed=seed, n_samples=samples)
    before, after = [], []
    for _ in range(samples):
        psi = random_slice_member(op.spec, s, rng)
        before.append(slice_residual(psi, s) / np.abs(psi.values).max())
        out = op(psi)
        scale = np.abs(out.values).max()
        after.append(slice_residual(out, s) / scale if scale > 0.0 else 0.0)
    rep.checks.append(check_from_devs(
        "membership-before", "J psi = psi omega on inputs", before, 1e-12))
    rep.checks.append(check_from_devs(
        "residual-after", "J (A psi) = (A psi) omega, relative", after, tol))
    return rep
