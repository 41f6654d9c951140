import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parahyper import splitquat as sq
from parahyper.errors import CompatibilityError, DegenerateFormError, InvalidTripleError, IsotropicVectorError

# independent 2x2 real model: j1 = rotation by 90 degrees, j2 = reflection
J1M = np.array([[0.0, -1.0], [1.0, 0.0]])
J2M = np.array([[1.0, 0.0], [0.0, -1.0]])
UNITS = [np.eye(2), J1M, J2M, J1M @ J2M]


def as_2x2(q):
    return sum(c * U for c, U in zip(q.as_array(), UNITS))


coords = st.floats(min_value=-10, max_value=10, allow_nan=False)
quats = st.builds(sq.SplitQuaternion, coords, coords, coords, coords)


@given(quats, quats)
@settings(max_examples=200)
def test_product_matches_matrix_model(p, q):
    assert np.allclose(as_2x2(p * q), as_2x2(p) @ as_2x2(q), atol=1e-9)


@given(quats, quats)
def test_norm_is_multiplicative(p, q):
    assert (p * q).norm2() == pytest.approx(p.norm2() * q.norm2(), rel=1e-9, abs=1e-6)


def test_unit_relations():
    one, j1, j2, j3 = (sq.SplitQuaternion(*e) for e in np.eye(4))
    assert j1 * j2 == j3
    assert j2 * j1 == -j3
    assert (j1 * j1).as_array().tolist() == [-1, 0, 0, 0]
    assert (j2 * j2) == one and (j3 * j3) == one
    assert (one + j1) * (one - j1) == sq.SplitQuaternion(2.0)


def test_associativity_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b, c = (sq.SplitQuaternion.from_array(rng.normal(size=4)) for _ in range(3))
        assert np.max(np.abs(((a * b) * c - a * (b * c)).as_array())) < 1e-12


def test_canonical_triple_images():
    T = sq.canonical_triple()
    e = np.eye(4)
    assert np.array_equal(T.J1 @ e[0], e[1]) and np.array_equal(T.J1 @ e[2], e[3])
    assert np.array_equal(T.J2 @ e[0], e[2]) and np.array_equal(T.J2 @ e[1], -e[3])
    assert np.array_equal(T.J3 @ e[0], e[3]) and np.array_equal(T.J3 @ e[1], e[2])
    assert all(v == 0 for v in sq.triple_residuals(T).values())
    assert sq.verify_triple(T).passed


def test_flipped_j2_product_residual():
    T = sq.canonical_triple()
    bad = sq.ParaHypercomplexTriple(T.J1, -T.J2, T.J3)
    r = sq.triple_residuals(bad)
    assert r["J1^2+Id"] == r["J2^2-Id"] == r["J3^2-Id"] == 0
    assert r["J1J2-J3"] == pytest.approx(2 * np.max(np.abs(T.J3)))
    assert not sq.verify_triple(bad).passed


def test_conjugated_triple():
    rng = np.random.default_rng(1)
    for _ in range(20):
        P = rng.normal(size=(4, 4)) + 3 * np.eye(4)
        assert max(sq.triple_residuals(sq.canonical_triple().conjugated(P)).values()) < 1e-10


def test_eigenbasis_canonical():
    T = sq.canonical_triple()
    u1, u2 = sq.eigenbasis(T, +1)
    assert np.array_equal(u1, [1, 0, 1, 0]) and np.array_equal(u2, [0, 1, 0, -1])
    v1, v2 = sq.eigenbasis(T, -1)
    assert np.array_equal(v1, [1, 0, -1, 0]) and np.array_equal(v2, [0, 1, 0, 1])


def test_eigenbasis_rejects_non_involution():
    T = sq.canonical_triple()
    with pytest.raises(InvalidTripleError):
        sq.eigenbasis(sq.ParaHypercomplexTriple(T.J1, T.J1, T.J3), +1)


def compat(G, T):
    return max(
        np.max(np.abs(T.J1.T @ G @ T.J1 - G)),
        np.max(np.abs(T.J2.T @ G @ T.J2 + G)),
        np.max(np.abs(T.J3.T @ G @ T.J3 + G)),
    )


def test_plus_form_metric_canonical():
    T = sq.canonical_triple()
    g = sq.metric_from_plus_form(T, sq.PlusForm.standard(T, 1.0))
    assert np.allclose(g.matrix, np.diag([1.0, 1.0, -1.0, -1.0]), rtol=0, atol=1e-14)
    assert g.signature() == (2, 2)
    assert compat(g.matrix, T) < 1e-12


@pytest.mark.parametrize("c", [0.3, -1.7, 2.5])
def test_plus_form_roundtrip(c):
    T = sq.canonical_triple()
    h = sq.PlusForm.standard(T, c)
    g = sq.metric_from_plus_form(T, h)
    u1, u2 = h.basis
    assert 0.5 * g(T.J1 @ u1, u2) == pytest.approx(c, abs=1e-12)
    assert sq.plus_form_from_metric(g, T).coefficient == pytest.approx(c, abs=1e-12)
    assert compat(g.matrix, T) < 1e-12
    assert sq.is_compatible(g, T)


def test_plus_form_vanishes_on_minus_space():
    T = sq.canonical_triple()
    h = sq.PlusForm.standard(T, 1.0)
    v1, v2 = sq.eigenbasis(T, -1)
    u1, _ = sq.eigenbasis(T, +1)
    assert h(T, v1, v2) == 0 and h(T, u1, v1) == 0


def test_zero_coefficient_is_degenerate():
    with pytest.raises(DegenerateFormError):
        sq.metric_from_plus_form(sq.canonical_triple(), sq.PlusForm.standard(sq.canonical_triple(), 0.0))


@pytest.mark.parametrize("diag", [[1, 1, 1, 1], [1, -1, 1, -1]])
def test_averaged_form_degenerates(diag):
    h = sq.averaged_form(np.diag(np.array(diag, float)), sq.canonical_triple())
    assert np.array_equal(h.matrix, np.zeros((4, 4)))
    assert h.degenerate and h.rank == 0


def test_averaged_form_of_compatible_metric():
    T = sq.canonical_triple()
    g = sq.metric_from_plus_form(T, sq.PlusForm.standard(T, 1.3))
    assert np.allclose(sq.averaged_form(g, T).matrix, 4 * g.matrix, atol=1e-12)


def test_averaged_form_is_compatible():
    T = sq.canonical_triple()
    rng = np.random.default_rng(5)
    for _ in range(10):
        A = rng.normal(size=(4, 4))
        h = sq.averaged_form(A + A.T, T)
        assert compat(h.matrix, T) < 1e-12


def test_conformal_factor_examples():
    T = sq.canonical_triple()
    h = sq.metric_from_plus_form(T, sq.PlusForm.standard(T, 1.0))
    w = np.array([1.0, 0.2, 0.1, 0.0])
    assert sq.conformal_factor(2 * h.matrix, h, T, w) == pytest.approx(2.0)
    assert sq.conformal_factor(h, h, T, w) == pytest.approx(1.0)
    g1 = sq.metric_from_plus_form(T, sq.PlusForm.standard(T, 0.7))
    g2 = sq.metric_from_plus_form(T, sq.PlusForm.standard(T, -2.1))
    assert sq.conformal_factor(g2, g1, T, w) == pytest.approx(-2.1 / 0.7, rel=1e-12)


def test_conformal_factor_errors():
    T = sq.canonical_triple()
    h = sq.metric_from_plus_form(T, sq.PlusForm.standard(T, 1.0))
    with pytest.raises(IsotropicVectorError):
        sq.conformal_factor(h, h, T, [1.0, 0.0, 1.0, 0.0])
    with pytest.raises(CompatibilityError):
        sq.conformal_factor(np.eye(4), h, T, [1.0, 0.0, 0.0, 0.0])


def test_quaternionic_frame():
    T = sq.canonical_triple()
    g = sq.metric_from_plus_form(T, sq.PlusForm.standard(T, 1.0))
    f = sq.quaternionic_frame(g, T, [1.0, 0.0, 0.0, 0.0])
    assert f.determinant == pytest.approx(1.0)
    f3 = sq.quaternionic_frame(g, T, [0.0, 0.0, 1.0, 0.0])
    assert f3.norm2 == pytest.approx(-1.0) and f3.determinant == pytest.approx(1.0)
    with pytest.raises(IsotropicVectorError):
        sq.quaternionic_frame(g, T, [1.0, 0.0, 1.0, 0.0])


def test_frame_determinant_is_norm_squared():
    T = sq.canonical_triple()
    g = np.diag([1.0, 1.0, -1.0, -1.0])
    rng = np.random.default_rng(9)
    for _ in range(50):
        w = rng.normal(size=4)
        f = sq.quaternionic_frame(g, T, w)
        n2 = w[0] ** 2 + w[1] ** 2 - w[2] ** 2 - w[3] ** 2
        assert f.determinant == pytest.approx(n2**2, rel=1e-9)
        # frame vectors are mutually g-orthogonal
        F = f.as_matrix()
        gram = F.T @ g @ F
        assert np.allclose(gram - np.diag(np.diag(gram)), 0, atol=1e-12)
