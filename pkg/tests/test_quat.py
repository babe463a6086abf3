import numpy as np
import pytest

from qmono import quat


def qmul_ref(p, q):
    """Reference product straight from the structure constants (oracle)."""
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[j, i, k] = -1.0
    out = np.zeros(4)
    for mu in range(4):
        for nu in range(4):
            c = p[mu] * q[nu]
            if mu == 0:
                out[nu] += c
            elif nu == 0:
                out[mu] += c
            else:
                out[0] -= c * (mu == nu)
                out[1:] += c * eps[mu - 1, nu - 1]
    return out


def test_basis_products():
    assert np.array_equal(quat.qmul(quat.E1, quat.E2), quat.E3)
    assert np.array_equal(quat.qmul(quat.E2, quat.E3), quat.E1)
    assert np.array_equal(quat.qmul(quat.E3, quat.E1), quat.E2)
    assert np.array_equal(quat.qmul(quat.E1, quat.E1), -quat.E0)
    assert np.array_equal(quat.qmul(quat.E2, quat.E1), -quat.E3)


def test_unit_is_central():
    rng = np.random.default_rng(0)
    q = rng.standard_normal((50, 4))
    assert np.array_equal(quat.qmul(q, quat.E0), q)
    assert np.array_equal(quat.qmul(quat.E0, q), q)


def test_mul_against_reference():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = rng.standard_normal(4)
        q = rng.standard_normal(4)
        assert np.abs(quat.qmul(p, q) - qmul_ref(p, q)).max() < 1e-14


def test_conjugation():
    assert np.array_equal(quat.qconj(quat.E0 + quat.E1), quat.E0 - quat.E1)
    rng = np.random.default_rng(2)
    p = rng.standard_normal((1000, 4))
    q = rng.standard_normal((1000, 4))
    lhs = quat.qconj(quat.qmul(p, q))
    rhs = quat.qmul(quat.qconj(q), quat.qconj(p))
    assert np.abs(lhs - rhs).max() < 1e-13


def test_norm():
    assert quat.qnorm(quat.E0 + quat.E1) ** 2 == pytest.approx(2.0, abs=1e-15)
    rng = np.random.default_rng(3)
    p = rng.standard_normal((2000, 4))
    q = rng.standard_normal((2000, 4))
    prod_norm = quat.qnorm(quat.qmul(p, q))
    assert np.abs(prod_norm - quat.qnorm(p) * quat.qnorm(q)).max() < 1e-12
    # q* q is the squared norm times the unit
    qq = quat.qmul(quat.qconj(p), p)
    assert np.abs(qq[:, 0] - quat.qnorm(p) ** 2).max() < 1e-12
    assert np.abs(qq[:, 1:]).max() < 1e-13


def test_associativity_bulk():
    rng = np.random.default_rng(4)
    p, q, r = rng.standard_normal((3, 100000, 4))
    dev = quat.qnorm(quat.qmul(quat.qmul(p, q), r) - quat.qmul(p, quat.qmul(q, r)))
    scale = quat.qnorm(p) * quat.qnorm(q) * quat.qnorm(r)
    assert (dev / scale).max() < 4 * np.finfo(float).eps


def test_qexp_special_values():
    assert np.abs(quat.qexp(np.zeros(4)) - quat.E0).max() == 0.0
    assert np.abs(quat.qexp(np.pi * quat.E3) + quat.E0).max() < 1e-15
    assert np.abs(quat.qexp(0.5 * np.pi * quat.E1) - quat.E1).max() < 1e-15


def test_qexp_small_argument_stable():
    tiny = 1e-9 * quat.E2
    out = quat.qexp(tiny)
    assert out[0] == pytest.approx(1.0, abs=1e-15)
    assert out[2] == pytest.approx(1e-9, rel=1e-12)


def test_qexp_one_parameter_group():
    rng = np.random.default_rng(5)
    v = rng.standard_normal((500, 3))
    w = quat.from_vector(v / np.linalg.norm(v, axis=-1)[:, None])
    th = rng.uniform(-8, 8, 500)[:, None]
    ph = rng.uniform(-8, 8, 500)[:, None]
    dev = quat.qnorm(quat.qmul(quat.qexp(th * w), quat.qexp(ph * w))
                     - quat.qexp((th + ph) * w))
    assert dev.max() < 1e-12


def test_su2_basis_images():
    assert np.allclose(quat.su2(quat.E0), np.eye(2), atol=0)
    assert np.allclose(quat.su2(quat.E3), np.diag([-1j, 1j]), atol=0)
    sigma = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]),
             np.array([[1, 0], [0, -1]])]
    for k, e in enumerate((quat.E1, quat.E2, quat.E3)):
        assert np.allclose(quat.su2(e), -1j * sigma[k], atol=0)


def test_su2_homomorphism():
    rng = np.random.default_rng(6)
    p = rng.standard_normal((10000, 4))
    q = rng.standard_normal((10000, 4))
    p /= quat.qnorm(p)[:, None]
    q /= quat.qnorm(q)[:, None]
    dev = np.abs(quat.su2(quat.qmul(p, q)) - quat.su2(p) @ quat.su2(q))
    assert dev.max() < 1e-13
    assert np.array_equal(quat.su2(quat.qmul(quat.E1, quat.E2)),
                          quat.su2(quat.E1) @ quat.su2(quat.E2))


def test_auto_fixed_point_and_values():
    assert np.abs(quat.auto(quat.E3, quat.E3) - quat.E3).max() < 1e-15
    assert np.abs(quat.auto(quat.E3, quat.E1) + quat.E1).max() < 1e-15
    # oracle: expand (-e3) e1 e3 with the reference product
    ref = qmul_ref(qmul_ref(-quat.E3, quat.E1), quat.E3)
    assert np.abs(quat.auto(quat.E3, quat.E1) - ref).max() == 0.0


def test_auto_rejects_non_unit():
    with pytest.raises(ValueError):
        quat.auto(2.0 * quat.E3, quat.E1)


def test_auto_is_automorphism():
    rng = np.random.default_rng(7)
    w = rng.standard_normal((300, 4))
    w /= quat.qnorm(w)[:, None]
    p = rng.standard_normal((300, 4))
    q = rng.standard_normal((300, 4))
    dev = quat.qnorm(quat.auto(w, quat.qmul(p, q))
                     - quat.qmul(quat.auto(w, p), quat.auto(w, q)))
    assert (dev / (quat.qnorm(p) * quat.qnorm(q))).max() < 1e-13


def test_imaginary_unit_construction():
    w = quat.imaginary_unit([0.0, 0.0, 5.0])
    assert np.array_equal(w, quat.E3)
    assert quat.is_imaginary_unit(w)
    assert np.abs(quat.qmul(w, w) + quat.E0).max() < 1e-15
    with pytest.raises(ValueError):
        quat.imaginary_unit([0.0, 0.0, 1e-13])
    with pytest.raises(ValueError):
        quat.imaginary_unit([1.0, 0.0, 0.0, 0.0])
