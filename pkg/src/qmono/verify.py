"""Randomized verification suites behind the CLI.

Each suite draws seeded samples, runs a batch of identity checks at fixed
tolerances, and returns a ``Report``.  Identities fall into three classes:

* algebraic (quaternion algebra, transport unitarity, holonomy = flux
  exponential): tolerances at roundoff scale;
* structural lattice identities (imprimitivity on commensurate shifts,
  multiplier/projection commutation): bit-exact;
* stencil identities (commutators, rotation covariance): O(h^2), verified
  together with their Richardson ratio between steps h and h/2.
"""

from __future__ import annotations

import numpy as np

from . import geometry, hilbert, operators as ops, quat, splitting
from .hilbert import LatticeField, LatticeSpec
from .report import Report, check_from_devs

_AXES = np.eye(3)


# ---------------------------------------------------------------------------
# samplers

def _unit_quats(rng, m):
    q = rng.standard_normal((m, 4))
    return q / quat.qnorm(q)[:, None]


def _imaginary_units(rng, m):
    v = rng.standard_normal((m, 3))
    return quat.from_vector(v / np.linalg.norm(v, axis=-1)[:, None])


def _positions(rng, m, lo=0.4, hi=3.0):
    out = np.empty((0, 3))
    while len(out) < m:
        x = rng.uniform(-hi, hi, size=(2 * m, 3))
        r = np.linalg.norm(x, axis=-1)
        out = np.vstack([out, x[(r > lo) & (r < hi)]])
    return out[:m]


def _transport_pairs(rng, m, margin=1e-2):
    """Random (a, x) with the segment [x, x+a] clear of the origin."""
    a_out, x_out = np.empty((0, 3)), np.empty((0, 3))
    while len(a_out) < m:
        x = _positions(rng, 2 * m)
        a = rng.uniform(-2.0, 2.0, size=(2 * m, 3))
        ok = (np.linalg.norm(x + a, axis=-1) > 0.3) & \
             (geometry.segment_origin_distance(x, x + a) > margin)
        a_out = np.vstack([a_out, a[ok]])
        x_out = np.vstack([x_out, x[ok]])
    return a_out[:m], x_out[:m]


def _cocycle_samples(rng, m, margin=1e-2):
    """(a, x, s, t) with all three cocycle transports admissible."""
    cols = [np.empty((0, 3)), np.empty((0, 3)), np.empty(0), np.empty(0)]
    while len(cols[0]) < m:
        x = _positions(rng, 2 * m)
        a = rng.uniform(-1.5, 1.5, size=(2 * m, 3))
        s = rng.uniform(-1.2, 1.2, size=2 * m)
        t = rng.uniform(-1.2, 1.2, size=2 * m)
        ok = np.ones(2 * m, dtype=bool)
        for start, disp in (
            (x, s[:, None] * a),
            (x + s[:, None] * a, t[:, None] * a),
            (x, (s + t)[:, None] * a),
        ):
            end = start + disp
            ok &= np.linalg.norm(start, axis=-1) > 0.3
            ok &= np.linalg.norm(end, axis=-1) > 0.3
            ok &= geometry.segment_origin_distance(start, end) > margin
        cols[0] = np.vstack([cols[0], a[ok]])
        cols[1] = np.vstack([cols[1], x[ok]])
        cols[2] = np.concatenate([cols[2], s[ok]])
        cols[3] = np.concatenate([cols[3], t[ok]])
    return cols[0][:m], cols[1][:m], cols[2][:m], cols[3][:m]


def _multiplier_triples(rng, m, margin=1e-2):
    """(a, b, x) admissible for all three transports and the flux triangle."""
    a_o, b_o, x_o = (np.empty((0, 3)) for _ in range(3))
    while len(a_o) < m:
        x = _positions(rng, 2 * m)
        a = rng.uniform(-1.5, 1.5, size=(2 * m, 3))
        b = rng.uniform(-1.5, 1.5, size=(2 * m, 3))
        ok = np.ones(2 * m, dtype=bool)
        for start, disp in ((x, b), (x + b, a), (x, a + b)):
            end = start + disp
            ok &= np.linalg.norm(start, axis=-1) > 0.3
            ok &= np.linalg.norm(end, axis=-1) > 0.3
            ok &= geometry.segment_origin_distance(start, end) > margin
        a_o = np.vstack([a_o, a[ok]])
        b_o = np.vstack([b_o, b[ok]])
        x_o = np.vstack([x_o, x[ok]])
    return a_o[:m], b_o[:m], x_o[:m]


def gaussian_field(center, width, amp):
    """Analytic Gaussian bump with a constant quaternion amplitude."""
    center = np.asarray(center, dtype=float)
    amp = np.asarray(amp, dtype=float)

    def fn(x):
        x = np.asarray(x, dtype=float)
        env = np.exp(-np.sum((x - center) ** 2, axis=-1) / (2.0 * width**2))
        return env[..., None] * amp

    return fn


def _random_gaussian_fields(rng, count):
    fields = []
    for _ in range(count):
        center = _positions(rng, 1, lo=1.2, hi=2.5)[0]
        width = rng.uniform(0.6, 1.2)
        amp = rng.standard_normal(4)
        fields.append(gaussian_field(center, width, amp))
    return fields


def _probe_points(rng, m=12):
    return _positions(rng, m, lo=0.8, hi=2.2)


# ---------------------------------------------------------------------------
# algebra suite

def algebra_suite(samples: int = 10000, seed: int = 42, tol: float = 1e-12) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report(suite="algebra", seed=seed, n_samples=samples)
    basis = np.eye(4)

    # structure constants e_i e_j = -delta_ij e0 + eps_ijk e_k
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[j, i, k] = -1.0
    table_dev = []
    for mu in range(4):
        for nu in range(4):
            got = quat.qmul(basis[mu], basis[nu])
            if mu == 0:
                want = basis[nu]
            elif nu == 0:
                want = basis[mu]
            else:
                want = -float(mu == nu) * basis[0]
                want = want + np.concatenate([[0.0], eps[mu - 1, nu - 1]])
            table_dev.append(np.abs(got - want).max())
    rep.checks.append(check_from_devs(
        "multiplication-table", "e_i e_j = -delta_ij e0 + eps_ijk e_k, exact",
        table_dev, 0.0))

    p = rng.standard_normal((samples, 4))
    q = rng.standard_normal((samples, 4))
    r = rng.standard_normal((samples, 4))
    scale = quat.qnorm(p) * quat.qnorm(q) * quat.qnorm(r)
    assoc = quat.qnorm(quat.qmul(quat.qmul(p, q), r) - quat.qmul(p, quat.qmul(q, r)))
    rep.checks.append(check_from_devs(
        "associativity", "(p q) r = p (q r)", assoc / scale, tol))

    anti = quat.qnorm(quat.qconj(quat.qmul(p, q)) - quat.qmul(quat.qconj(q), quat.qconj(p)))
    rep.checks.append(check_from_devs(
        "conjugation", "(p q)* = q* p*", anti / (quat.qnorm(p) * quat.qnorm(q)), tol))

    norm_dev = np.abs(quat.qnorm(quat.qmul(p, q)) - quat.qnorm(p) * quat.qnorm(q))
    rep.checks.append(check_from_devs(
        "norm-multiplicative", "|p q| = |p| |q|",
        norm_dev / (quat.qnorm(p) * quat.qnorm(q)), tol))

    up = _unit_quats(rng, samples)
    uq = _unit_quats(rng, samples)
    hom = np.abs(quat.su2(quat.qmul(up, uq)) - quat.su2(up) @ quat.su2(uq)).max(axis=(-2, -1))
    rep.checks.append(check_from_devs(
        "su2-homomorphism", "su2(p q) = su2(p) su2(q)", hom, tol))

    det_dev = np.abs(np.linalg.det(quat.su2(up)) - 1.0)
    rep.checks.append(check_from_devs(
        "su2-special-unitary", "det su2(p) = 1 for unit p", det_dev, 1e-10))

    w = _imaginary_units(rng, samples)
    sq = quat.qnorm(quat.qmul(w, w) + quat.E0)
    rep.checks.append(check_from_devs(
        "imaginary-square", "w^2 = -e0 for imaginary units", sq, tol))

    m = min(samples, 2000)
    wm = w[:m]
    th = rng.uniform(-6.0, 6.0, size=m)
    ph = rng.uniform(-6.0, 6.0, size=m)
    one_par = quat.qnorm(
        quat.qmul(quat.qexp(th[:, None] * wm), quat.qexp(ph[:, None] * wm))
        - quat.qexp((th + ph)[:, None] * wm))
    rep.checks.append(check_from_devs(
        "exp-one-parameter", "qexp(s w) qexp(t w) = qexp((s+t) w)", one_par, tol))

    aut = quat.qnorm(
        quat.auto(up[:m], quat.qmul(p[:m], q[:m]))
        - quat.qmul(quat.auto(up[:m], p[:m]), quat.auto(up[:m], q[:m])))
    rep.checks.append(check_from_devs(
        "auto-multiplicative", "auto(w, p q) = auto(w, p) auto(w, q)",
        aut / (quat.qnorm(p[:m]) * quat.qnorm(q[:m])), tol))
    return rep


# ---------------------------------------------------------------------------
# geometry suite

def geometry_suite(samples: int = 10000, seed: int = 42, tol: float = 1e-12,
                   tol_multiplier: float = 1e-9, transport_fn=None) -> Report:
    """Transport, cocycle, holonomy-flux and curvature checks.

    ``transport_fn`` overrides the transport used by the unitarity and
    cocycle checks (the sign variant serves as a negative control).
    """
    transport_fn = transport_fn or geometry.transport
    rng = np.random.default_rng(seed)
    rep = Report(suite="geometry", seed=seed, n_samples=samples)

    x = _positions(rng, samples)
    jj = quat.qnorm(quat.qmul(geometry.dirq(x), geometry.dirq(x)) + quat.E0)
    rep.checks.append(check_from_devs("dirq-square", "dirq(x)^2 = -e0", jj, tol))

    a, xt = _transport_pairs(rng, samples)
    w = transport_fn(a, xt)
    rep.checks.append(check_from_devs(
        "transport-unitarity", "|w(a; x)| = 1", np.abs(quat.qnorm(w) - 1.0), tol))

    ac, xc, s, t = _cocycle_samples(rng, samples)
    lhs = quat.qmul(transport_fn(t[:, None] * ac, xc + s[:, None] * ac),
                    transport_fn(s[:, None] * ac, xc))
    rhs = transport_fn((s + t)[:, None] * ac, xc)
    rep.checks.append(check_from_devs(
        "transport-cocycle", "w(ta; x+sa) w(sa; x) = w((s+t)a; x)",
        quat.qnorm(lhs - rhs), tol))

    am, bm, xm = _multiplier_triples(rng, samples)
    m_val = geometry.multiplier(am, bm, xm)
    flux = geometry.triflux(geometry.multiplier_flux_triangle(am, bm, xm))
    pred = quat.qexp(geometry.dirq(xm) * flux[:, None])
    rep.checks.append(check_from_devs(
        "multiplier-flux", "m(a,b;x) = qexp(dirq(x) * flux(x, x+b, x+a+b))",
        quat.qnorm(m_val - pred), tol_multiplier))

    triv = quat.qnorm(geometry.multiplier(am, np.zeros(3), xm) - quat.E0)
    rep.checks.append(check_from_devs(
        "multiplier-trivial", "m(a, 0; x) = e0", triv, 1e-10))

    # coplanar loop: b in span(a, x) keeps the flux triangle radial
    m2 = min(samples, 2000)
    alpha = rng.uniform(-1.0, 1.0, size=m2)
    beta = rng.uniform(-0.8, 0.8, size=m2)
    bcop = alpha[:, None] * am[:m2] + beta[:, None] * xm[:m2]
    ok = np.ones(m2, dtype=bool)
    for start, disp in ((xm[:m2], bcop), (xm[:m2] + bcop, am[:m2]), (xm[:m2], am[:m2] + bcop)):
        ok &= np.linalg.norm(start + disp, axis=-1) > 0.3
        ok &= geometry.segment_origin_distance(start, start + disp) > 1e-2
    cop = quat.qnorm(geometry.multiplier(am[:m2][ok], bcop[ok], xm[:m2][ok]) - quat.E0)
    rep.checks.append(check_from_devs(
        "multiplier-coplanar", "m = e0 when x, a, b are coplanar with the origin",
        cop, 1e-9))

    xq = rng.uniform(-2.0, 2.0, size=(samples, 3))
    aq = rng.uniform(-1.5, 1.5, size=(samples, 3))
    bq = rng.uniform(-1.5, 1.5, size=(samples, 3))
    cq = rng.uniform(-1.5, 1.5, size=(samples, 3))
    keep = ~ops.origin_near_tet_face(xq, aq, bq, cq)
    xq, aq, bq, cq = xq[keep], aq[keep], bq[keep], cq[keep]
    flux = geometry.tetraflux(xq, aq, bq, cq)
    inside = geometry.origin_inside_tetrahedron(xq, aq, bq, cq)
    rep.checks.append(check_from_devs(
        "flux-quantization", "tetraflux = 2pi iff the origin is inside, else 0",
        np.abs(flux - np.where(inside, 2.0 * np.pi, 0.0)), 1e-9))

    # cevian additivity: split (v1, v2, v3) at p on the v2-v3 edge
    m3 = min(samples, 2000)
    tri = _positions(rng, 3 * m3).reshape(m3, 3, 3)
    lam = rng.uniform(0.1, 0.9, size=m3)
    pin = tri[:, 1] + lam[:, None] * (tri[:, 2] - tri[:, 1])
    whole = geometry.triflux(tri)
    part1 = geometry.triflux(np.stack([tri[:, 0], tri[:, 1], pin], axis=1))
    part2 = geometry.triflux(np.stack([tri[:, 0], pin, tri[:, 2]], axis=1))
    rep.checks.append(check_from_devs(
        "triflux-additivity", "flux(whole) = flux(part1) + flux(part2)",
        np.abs(whole - (part1 + part2)), 1e-10))

    cs = geometry.curvature(x)
    anti = np.abs(cs.kappa + np.swapaxes(cs.kappa, -1, -2)).max(axis=(-2, -1))
    rep.checks.append(check_from_devs(
        "curvature-antisymmetry", "kappa_ij = -kappa_ji", anti, 0.0))
    nx = np.linalg.norm(x, axis=-1)
    rel = np.abs(cs.omega - cs.kappa[..., None, :, :] * (x / nx[:, None])[..., :, None, None])
    rep.checks.append(check_from_devs(
        "curvature-su2-radial", "omega^r_ij = kappa_ij x^r / |x|",
        rel.max(axis=(-3, -2, -1)), tol))

    # field strength of the connection by finite differences
    probes = _positions(rng, 50, lo=0.8, hi=2.0)
    h = 1e-4
    fs_dev = []
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            da_j = (ops.connection_value(_AXES[j], probes + h * _AXES[i])
                    - ops.connection_value(_AXES[j], probes - h * _AXES[i])) / (2.0 * h)
            da_i = (ops.connection_value(_AXES[i], probes + h * _AXES[j])
                    - ops.connection_value(_AXES[i], probes - h * _AXES[j])) / (2.0 * h)
            comm = quat.qmul(ops.connection_value(_AXES[i], probes),
                             ops.connection_value(_AXES[j], probes))
            comm = comm - quat.qmul(ops.connection_value(_AXES[j], probes),
                                    ops.connection_value(_AXES[i], probes))
            target = ops.curvature_coefficient(i, j, probes)[:, None] * geometry.dirq(probes)
            fs_dev.append(quat.qnorm(da_j - da_i + comm - target).max())
    rep.checks.append(check_from_devs(
        "curvature-field-strength",
        "dA_j/dx_i - dA_i/dx_j + [A_i, A_j] = kappa_ij dirq(x) (FD)", fs_dev, 1e-6))

    div = []
    for p in probes[:20]:
        d = 0.0
        for i in range(3):
            d += (geometry.bfield(p + h * _AXES[i])[i] - geometry.bfield(p - h * _AXES[i])[i]) / (2.0 * h)
        div.append(abs(d))
    rep.checks.append(check_from_devs(
        "bfield-divergence", "div B = 0 away from the origin (FD)", div, 1e-6))

    c0 = geometry.chern(256, 256)
    c7 = geometry.chern(256, 256, radius=7.0)
    cr = geometry.chern(256, 256, reverse=True)
    rep.checks.append(check_from_devs(
        "chern-integral", "sphere integral of kappa = 2pi",
        [abs(c0 - 2.0 * np.pi)], 1e-6))
    rep.checks.append(check_from_devs(
        "chern-radius", "radius independence of the sphere integral",
        [abs(c7 - 2.0 * np.pi)], 1e-6))
    rep.checks.append(check_from_devs(
        "chern-orientation", "reversed orientation flips the sign",
        [abs(cr + 2.0 * np.pi)], 1e-6))
    return rep


# ---------------------------------------------------------------------------
# operators suite

def _richardson(devs_h, devs_h2):
    return np.asarray(devs_h) / np.maximum(np.asarray(devs_h2), 1e-300)


def operators_suite(n: int = 32, box: float = 6.0, samples: int = 1000,
                    seed: int = 42, tol: float = 1e-12) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report(suite="operators", seed=seed, n_samples=samples)
    spec = LatticeSpec(n=n, box=box)
    psi = LatticeField(spec, rng.standard_normal((n, n, n, 4)))
    phi = LatticeField(spec, rng.standard_normal((n, n, n, 4)))
    jo = ops.jop(spec)

    rep.checks.append(check_from_devs(
        "jop-square", "J^2 = -I",
        [np.abs(jo(jo(psi)).values + psi.values).max()], 1e-14))
    lhs = hilbert.inner(phi, jo(psi))
    rhs = hilbert.inner(jo(phi), psi)
    scale = hilbert.norm(phi) * hilbert.norm(psi)
    rep.checks.append(check_from_devs(
        "jop-antihermitian", "inner(phi, J psi) = -inner(J phi, psi)",
        np.abs(lhs + rhs) / scale, tol))
    rep.checks.append(check_from_devs(
        "jop-isometry", "|J psi| = |psi|",
        [abs(hilbert.norm(jo(psi)) - hilbert.norm(psi)) / hilbert.norm(psi)], tol))

    # [X_i, J] = 0: two left multipliers with a real factor
    xj = []
    for i in range(3):
        xi = ops.position(spec, i)
        diff = xi(jo(psi)).values - jo(xi(psi)).values
        xj.append(np.abs(diff).max() / (spec.box * np.abs(psi.values).max()))
    rep.checks.append(check_from_devs(
        "position-j-commute", "[X_i, J] = 0 (roundoff only)", xj, 1e-14))

    # fields with an empty band at the walls: shifts act without clipping
    interior = hilbert.project(
        hilbert.Box.of((-box * 0.55,) * 3, (box * 0.55,) * 3), psi)

    # imprimitivity, multiplied-through form, bit-exact
    imp_dev, comp_dev = [], []
    for _ in range(min(samples, 200)):
        steps = ops._sample_steps(rng, spec)
        a = steps * spec.step
        box_d = ops._sample_box(rng, spec, margin=1)
        u = ops.twisted_shift(spec, a)
        lhsf = u(hilbert.project(box_d, psi))
        rhsf = hilbert.project(box_d.translate(a), u(psi))
        imp_dev.append(0.0 if np.array_equal(lhsf.values, rhsf.values)
                       else np.abs(lhsf.values - rhsf.values).max())
        s2 = ops._sample_steps(rng, spec)
        v1 = ops.shift(spec, steps * spec.step)
        v2 = ops.shift(spec, s2 * spec.step)
        v12 = ops.shift(spec, (steps + s2) * spec.step)
        comp = v1(v2(interior)).values
        comp_dev.append(0.0 if np.array_equal(comp, v12(interior).values)
                        else np.abs(comp - v12(interior).values).max())
    rep.checks.append(check_from_devs(
        "imprimitivity", "U(a) E(box) = E(box+a) U(a), bit-exact", imp_dev, 0.0))
    rep.checks.append(check_from_devs(
        "shift-composition", "V(a) V(b) = V(a+b), bit-exact", comp_dev, 0.0))

    # twisted shifts: unitary, one-parameter along a line, WPR off it
    un_dev, group_dev = [], []
    for _ in range(20):
        a = ops._sample_steps(rng, spec) * spec.step
        u = ops.twisted_shift(spec, a)
        un_dev.append(abs(hilbert.norm(u(interior)) - hilbert.norm(interior))
                      / hilbert.norm(interior))
        ax = int(rng.integers(0, 3))
        s_steps = int(rng.integers(1, 3))
        t_steps = int(rng.integers(1, 3))
        sa = s_steps * spec.step * _AXES[ax]
        ta = t_steps * spec.step * _AXES[ax]
        left = ops.twisted_shift(spec, sa)(ops.twisted_shift(spec, ta)(interior))
        right = ops.twisted_shift(spec, sa + ta)(interior)
        group_dev.append(np.abs(left.values - right.values).max())
    rep.checks.append(check_from_devs(
        "twisted-unitarity", "|U(a) psi| = |psi| (interior support)", un_dev, tol))
    rep.checks.append(check_from_devs(
        "one-parameter-line", "U(s u) U(t u) = U((s+t) u)", group_dev, tol))

    defect_dev, defect_struct, wpr_size = [], [], []
    pts = spec.points()
    for _ in range(10):
        ma, mb = ops._sample_step_pair(rng, spec)
        a, b = ma * spec.step, mb * spec.step
        defect = ops.compose_defect(spec, a, b)
        defect_struct.append(0.0 if ops.is_pointwise(defect) else 1.0)
        sym = ops.symbol_of(defect)
        core = ops.interior_mask(spec, ops.defect_clip_cells(ma, mb) + 1)
        defect_dev.append(quat.qnorm(sym - geometry.multiplier(a, b, pts))[core].max())
        if np.linalg.norm(np.cross(a, b)) > 1e-9:
            wpr_size.append(quat.qnorm(sym - quat.E0)[core].max())
    rep.checks.append(check_from_devs(
        "defect-symbol", "U(a+b)* U(a) U(b) has symbol w(a+b;x)* w(a;x+b) w(b;x)",
        defect_dev, tol))
    rep.checks.append(check_from_devs(
        "defect-pointwise", "closure defect is a pointwise multiplier", defect_struct, 0.0))
    rep.checks.append(check_from_devs(
        "wpr-nontrivial", "generic closure defect differs from the identity",
        [0.0 if (min(wpr_size) > 1e-3) else 1.0], 0.0))

    # parallel shifts close exactly
    par_dev = []
    core = ops.interior_mask(spec, 6)
    for ax in range(3):
        a = 2 * spec.step * _AXES[ax]
        b = 3 * spec.step * _AXES[ax]
        sym = ops.symbol_of(ops.compose_defect(spec, a, b))
        par_dev.append(quat.qnorm(sym - quat.E0)[core].max())
    rep.checks.append(check_from_devs(
        "wpr-parallel-trivial", "m(a, b; x) = e0 for parallel a, b", par_dev, tol))

    # connection value spot check: u = e1 at x = (0,0,1) -> -e2/2
    conn = ops.connection_value(_AXES[0], np.array([0.0, 0.0, 1.0]))
    rep.checks.append(check_from_devs(
        "connection-value", "connection(e1)(0,0,1) = -e2/2",
        [np.abs(conn - np.array([0.0, 0.0, -0.5, 0.0])).max()], 1e-15))

    # stencil identities on analytic fields, with Richardson ratios
    fields = _random_gaussian_fields(rng, 20)
    probes = _probe_points(rng)
    h = 0.02

    def dev_position(fn, hh):
        devs = []
        for i in range(3):
            for j in range(3):
                grad = ops.covderiv_fn(lambda y, jj=j: y[..., jj, None] * fn(y), _AXES[i], hh)
                direct = ops.covderiv_fn(fn, _AXES[i], hh)
                comm = grad(probes) - probes[:, j, None] * direct(probes)
                target = fn(probes) if i == j else 0.0
                devs.append(quat.qnorm(comm - target).max())
        return max(devs)

    def dev_curv(fn, hh):
        return max(ops.commutator_check(i, j, fn, probes, hh).max_dev
                   for i, j in ((0, 1), (1, 2), (2, 0)))

    def dev_rot_grad(fn, hh):
        devs = []
        for i, j, k, sign in ((2, 0, 1, -1.0), (0, 1, 2, -1.0), (2, 1, 0, 1.0)):
            # [M_i, grad_j] = -eps_ijk grad_k; listed triples have eps = +/-1
            mg = ops.rotgen_fn(ops.covderiv_fn(fn, _AXES[j], hh), i, hh)
            gm = ops.covderiv_fn(ops.rotgen_fn(fn, i, hh), _AXES[j], hh)
            target = sign * ops.covderiv_fn(fn, _AXES[k], hh)(probes)
            devs.append(quat.qnorm(mg(probes) - gm(probes) - target).max())
        return max(devs)

    def dev_rot_j(fn, hh):
        devs = []
        jfn = lambda y: quat.qmul(geometry.dirq(y), fn(y))
        for i in range(3):
            mj = ops.rotgen_fn(jfn, i, hh)(probes)
            jm = quat.qmul(geometry.dirq(probes), ops.rotgen_fn(fn, i, hh)(probes))
            devs.append(quat.qnorm(mj - jm).max())
        return max(devs)

    for name, law, fdev, tol_h in (
        ("grad-position", "[grad_i, X_j] = delta_ij", dev_position, 2e-3),
        ("grad-commutator", "[grad_i, grad_j] = kappa_ij J", dev_curv, 2e-3),
        ("rotation-covariance", "[M_i, grad_j] = -eps_ijk grad_k", dev_rot_grad, 2e-3),
        ("rotation-j-invariance", "[M_i, J] = 0", dev_rot_j, 2e-3),
    ):
        devs_h = [fdev(fn, h) for fn in fields]
        devs_h2 = [fdev(fn, h / 2.0) for fn in fields]
        ratios = _richardson(devs_h, devs_h2)
        rep.checks.append(check_from_devs(name, law + " (step h)", devs_h, tol_h))
        rep.checks.append(check_from_devs(
            name + "-order", law + ": Richardson ratio h vs h/2 in 4 +/- 0.5",
            np.abs(ratios - 4.0), 0.5))

    # [M_3, X_1] = -X_2 on analytic fields
    rotx_dev = []
    for fn in fields[:5]:
        mx = ops.rotgen_fn(lambda y: y[..., 0, None] * fn(y), 2, h)(probes)
        xm = probes[:, 0, None] * ops.rotgen_fn(fn, 2, h)(probes)
        rotx_dev.append(quat.qnorm(mx - xm + probes[:, 1, None] * fn(probes)).max())
    rep.checks.append(check_from_devs(
        "rotation-position", "[M_3, X_1] = -X_2", rotx_dev, 2e-3))

    # full turn: exp(2 pi M_3) = -identity (factored rotation, exact)
    turn_dev = []
    for fn in fields[:5]:
        rot = ops.rotation_exp_fn(fn, 2, 2.0 * np.pi)
        turn_dev.append(quat.qnorm(rot(probes) + fn(probes)).max()
                        / quat.qnorm(fn(probes)).max())
    rep.checks.append(check_from_devs(
        "spin-half-turn", "exp(2 pi M_3) = -I", turn_dev, 1e-12))

    # generator of the twisted shifts: (U(su) psi - psi)/s -> -grad_u psi
    gen_dev_s, gen_dev_s2 = [], []
    s0 = 1e-3
    for fn in fields[:5]:
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        target = ops.covderiv_fn(fn, u, 1e-4)(probes)
        for s_val, out in ((s0, gen_dev_s), (s0 / 2.0, gen_dev_s2)):
            shifted = quat.qmul(geometry.transport(s_val * u, probes - s_val * u),
                                fn(probes - s_val * u))
            fd = (shifted - fn(probes)) / s_val
            out.append(quat.qnorm(fd + target).max())
    rep.checks.append(check_from_devs(
        "twisted-generator", "(U(s u) psi - psi)/s -> -grad_u psi", gen_dev_s, 1e-2))
    rep.checks.append(check_from_devs(
        "twisted-generator-order", "first-order convergence ratio in 2 +/- 0.5",
        np.abs(_richardson(gen_dev_s, gen_dev_s2) - 2.0), 0.5))

    # lattice Hamiltonian: hermitian, commutes with J at O(h^2), Ehrenfest form
    smooth = hilbert.sample(spec, gaussian_field((1.5, 0.8, -0.6), 1.0, (1.0, 0.3, -0.2, 0.5)))
    smooth = LatticeField(spec, smooth.values / hilbert.norm(smooth))
    ham = ops.hamiltonian(spec, 1.0)
    lhs = hilbert.inner(phi, ham(psi))[0]
    rhs = hilbert.inner(ham(phi), psi)[0]
    rep.checks.append(check_from_devs(
        "hamiltonian-hermitian", "inner(phi, H psi) = inner(H phi, psi)",
        [abs(lhs - rhs) / abs(lhs)], tol))

    # the transported-hop forms make both splitting identities exact on the
    # lattice (roundoff only), strictly better than the O(h^2) bound that a
    # multiplier-connection discretization would give
    hj = ham(jo(smooth)).values - jo(ham(smooth)).values
    rep.checks.append(check_from_devs(
        "hamiltonian-j-commute", "[H, J] = 0, exact on the lattice",
        [quat.qnorm(hj).max() / np.abs(ham(smooth).values).max()], 1e-12))

    ehr_dev = []
    for i in range(3):
        xi = ops.position(spec, i)
        comm = ham(xi(smooth)).values - xi(ham(smooth)).values
        target = -ops.covderiv(spec, _AXES[i])(smooth).values
        ehr_dev.append(quat.qnorm(comm - target).max() / quat.qnorm(target).max())
    rep.checks.append(check_from_devs(
        "hamiltonian-velocity", "[H, X_i] = -(1/m) grad_i, exact on the lattice",
        ehr_dev, 1e-12))

    bval = ops.symbol_of(ops.bfield_op(spec, 2))
    pts3 = spec.points()[..., 2]
    r = np.linalg.norm(spec.points(), axis=-1)
    rep.checks.append(check_from_devs(
        "bfield-op", "B_3 symbol = x_3 / (2 |x|^3)",
        [np.abs(bval[..., 0] - 0.5 * pts3 / r**3).max()], 1e-14))

    # adjoint consistency on interior-supported fields
    adj_dev = []
    for op in (jo, ops.position(spec, 1), ops.left_unit(spec, 0),
               ops.shift(spec, spec.step * np.array([2.0, -1.0, 0.0])),
               ops.Diff(spec, 1), ops.covderiv(spec, _AXES[2]),
               ops.twisted_shift(spec, spec.step * np.array([1.0, 2.0, 0.0])), ham):
        lhs = hilbert.inner(interior, op(smooth))[0]
        rhs = hilbert.inner(op.adjoint()(interior), smooth)[0]
        adj_dev.append(abs(lhs - rhs) / max(abs(lhs), 1e-12))
    rep.checks.append(check_from_devs(
        "adjoint-consistency", "inner(phi, A psi) = inner(A* phi, psi)", adj_dev, 1e-10))
    return rep


# ---------------------------------------------------------------------------
# splitting suite

def splitting_suite(n: int = 32, box: float = 6.0, samples: int = 200,
                    seed: int = 42) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report(suite="splitting", seed=seed, n_samples=samples)
    spec = LatticeSpec(n=n, box=box)
    s = splitting.default_slice()

    rec_dev, norm_dev, memb_dev, orth_re, orth_slice, inner_slice = [], [], [], [], [], []
    for _ in range(samples):
        psi = LatticeField(spec, rng.standard_normal((n, n, n, 4)))
        nn = hilbert.norm(psi)
        psi = LatticeField(spec, psi.values / nn)
        pair = splitting.split(psi, s)
        rec = splitting.reconstruct(pair, s)
        rec_dev.append(np.abs(rec.values - psi.values).max())
        n0 = hilbert.norm(psi) ** 2
        n1 = hilbert.norm(pair.psi1) ** 2
        n2 = hilbert.norm(pair.psi2) ** 2
        norm_dev.append(abs(n0 - n1 - n2))
        memb_dev.append(max(splitting.slice_residual(pair.psi1, s),
                            splitting.slice_residual(pair.psi2, s)))
        # orthogonality of the decomposition: inner(psi1, psi2 wt) has no
        # slice component (real part and omega component vanish)
        cross = hilbert.inner(pair.psi1, hilbert.rscale(pair.psi2, s.wt))
        orth_re.append(abs(cross[0]))
        orth_slice.append(abs(np.sum(cross * s.w)))
        # inner product of two slice members lands in the slice field
        q12 = hilbert.inner(pair.psi1, pair.psi2)
        perp = q12 - q12[0] * quat.E0 - np.sum(q12 * s.w) * s.w
        inner_slice.append(quat.qnorm(perp))
    rep.checks.append(check_from_devs(
        "reconstruction", "psi1 + psi2 omega_tilde = psi", rec_dev, 1e-14))
    rep.checks.append(check_from_devs(
        "norm-additivity", "|psi|^2 = |psi1|^2 + |psi2|^2", norm_dev, 1e-12))
    rep.checks.append(check_from_devs(
        "slice-membership", "J psi_k = psi_k omega", memb_dev, 1e-14))
    rep.checks.append(check_from_devs(
        "orthogonality-real", "Re inner(psi1, psi2 omega_tilde) = 0", orth_re, 1e-12))
    rep.checks.append(check_from_devs(
        "orthogonality-slice", "slice part of inner(psi1, psi2 omega_tilde) = 0",
        orth_slice, 1e-12))
    rep.checks.append(check_from_devs(
        "inner-in-slice", "inner on the slice takes slice-field values",
        inner_slice, 1e-12))

    # slice members already in the slice split as (psi, 0)
    member = splitting.random_slice_member(spec, s, rng)
    pair = splitting.split(member, s)
    rep.checks.append(check_from_devs(
        "split-of-member", "psi in slice -> split(psi) = (psi, 0)",
        [np.abs(pair.psi1.values - member.values).max(),
         np.abs(pair.psi2.values).max()], 1e-14))

    # right multiplication by slice scalars stays in the slice
    z = 0.7 * quat.E0 + 0.3 * s.w
    rep.checks.append(check_from_devs(
        "slice-linear", "psi in slice -> psi z in slice for z = u + v omega",
        [splitting.slice_residual(hilbert.rscale(member, z), s)], 1e-12))

    rr = splitting.reduce_check(
        ops.twisted_shift(spec, spec.step * np.array([2.0, 1.0, 0.0])), s,
        samples=5, seed=seed, tol=1e-12, label="twisted-shift")
    rep.checks.append(check_from_devs(
        "reduce-twisted-shift", "U(a) preserves the slice",
        [c.max_dev for c in rr.checks if c.name == "residual-after"], 1e-12))

    rh = splitting.reduce_check(ops.hamiltonian(spec, 1.0), s,
                                samples=5, seed=seed, tol=1e-12, label="hamiltonian")
    rep.checks.append(check_from_devs(
        "reduce-hamiltonian", "H preserves the slice (exact for hop links)",
        [c.max_dev for c in rh.checks if c.name == "residual-after"], 1e-12))

    re1 = splitting.reduce_check(ops.left_unit(spec, 0), s,
                                 samples=3, seed=seed, tol=1e-12, label="left-unit")
    worst = max(c.max_dev for c in re1.checks if c.name == "residual-after")
    rep.checks.append(check_from_devs(
        "reduce-negative-control", "bare e1 multiplier does NOT reduce (residual order 1)",
        [0.0 if worst > 0.1 else 1.0], 0.0))
    return rep


# ---------------------------------------------------------------------------
# gis suite

def gis_suite(n: int = 32, box: float = 6.0, samples: int = 1000,
              seed: int = 42) -> Report:
    spec = LatticeSpec(n=n, box=box)
    rep = ops.gis_verify(spec, samples=samples, seed=seed)
    rep.checks.append(check_from_devs(
        "slice-winding", "qexp(2 pi w) = e0 for every imaginary unit",
        quat.qnorm(quat.qexp(2.0 * np.pi * _imaginary_units(
            np.random.default_rng(seed), 100)) - quat.E0), 1e-12))
    return rep


SUITES = {
    "algebra": lambda cfg: algebra_suite(samples=cfg["samples"], seed=cfg["seed"],
                                         tol=cfg["tol"]),
    "geometry": lambda cfg: geometry_suite(samples=cfg["samples"], seed=cfg["seed"],
                                           tol=cfg["tol"]),
    "operators": lambda cfg: operators_suite(n=cfg["n"], box=cfg["box"],
                                             samples=cfg["samples"], seed=cfg["seed"],
                                             tol=cfg["tol"]),
    "splitting": lambda cfg: splitting_suite(n=cfg["n"], box=cfg["box"],
                                             samples=min(cfg["samples"], 200),
                                             seed=cfg["seed"]),
    "gis": lambda cfg: gis_suite(n=cfg["n"], box=cfg["box"],
                                 samples=cfg["samples"], seed=cfg["seed"]),
}
