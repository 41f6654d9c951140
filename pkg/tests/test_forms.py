from itertools import combinations, permutations
from math import factorial

import numpy as np
import pytest

from parahyper import expr as ex
from parahyper.errors import DegreeError, NotAlmostStructureError
from parahyper.fields import EndomorphismField, ExprField, MetricField, VectorField
from parahyper.forms import (
    BASIS,
    FormField,
    ext_d,
    form_inner,
    hodge_star,
    lie_bracket,
    nijenhuis,
    nijenhuis_coordinate,
    perm_sign,
    star_matrix_jet,
)
from parahyper.sampling import sample_points
from parahyper.surfaces import INOUE_BOX, InoueParams, dz1, dz2, dzb1, dzb2, inoue_forms
from parahyper.walker import WalkerData, proper_structure

from exprgen import random_text

dx, dy, dz, dt = (FormField.differential(k) for k in range(4))
NEUTRAL = MetricField.constant(np.diag([1.0, 1.0, -1.0, -1.0]))
VOL = dx ^ dy ^ dz ^ dt


def random_form(rng, degree):
    coeffs = {I: random_text(rng, 3) for I in BASIS[degree]}
    return FormField.from_coefficients(degree, coeffs)


def random_vector(rng):
    return VectorField.from_components([random_text(rng, 3) for _ in range(4)])


def alt_wedge_oracle(a_dense, b_dense, k, l):
    """(a^b)_{i1..ik+l} from the alternation formula with the 1/(k! l!) normalization."""
    n = a_dense.shape[0]
    out = np.zeros((n,) + (4,) * (k + l), dtype=complex)
    for idx in np.ndindex(*(4,) * (k + l)):
        if len(set(idx)) < k + l:
            continue
        tot = 0
        for perm in permutations(range(k + l)):
            j = tuple(idx[p] for p in perm)
            tot = tot + perm_sign(perm) * a_dense[(slice(None),) + j[:k]] * b_dense[(slice(None),) + j[k:]]
        out[(slice(None),) + idx] = tot / (factorial(k) * factorial(l))
    return out


def test_basic_wedges(pts):
    assert np.all((dx ^ dx).at(pts) == 0)
    e = np.eye(4)
    assert np.all((dx ^ dy).evaluate(pts, e[0], e[1]) == 1)
    assert np.all((dx ^ dy).evaluate(pts, e[1], e[0]) == -1)


def test_repeated_complex_factor_vanishes(pts):
    w = (dz1 ^ dzb2) ^ (dz1 ^ dzb1)
    assert np.max(np.abs(w.at(pts))) == 0


def test_dz_dzbar():
    pts = sample_points(5, 0)
    assert np.allclose((dz1 ^ dzb1).at(pts), (-2j * (dx ^ dy)).at(pts))


def test_degree_overflow():
    with pytest.raises(DegreeError):
        (dx ^ dy ^ dz) ^ (dx ^ dy)
    with pytest.raises(DegreeError):
        dx + (dx ^ dy)


def test_wedge_against_alternation(pts):
    rng = np.random.default_rng(11)
    for k, l in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)]:
        a, b = random_form(rng, k), random_form(rng, l)
        got = (a ^ b).dense(pts[:5])
        want = alt_wedge_oracle(a.dense(pts[:5]), b.dense(pts[:5]), k, l)
        assert np.allclose(got, want, atol=1e-12)


def test_graded_commutativity():
    rng = np.random.default_rng(12)
    pts = sample_points(20, 1)
    for n in range(200):
        k = int(rng.integers(0, 5))
        l = int(rng.integers(0, 5 - k))
        a, b = random_form(rng, k), random_form(rng, l)
        ab, ba = (a ^ b).at(pts), (b ^ a).at(pts)
        assert np.allclose(ab, (-1) ** (k * l) * ba, atol=1e-12)


def test_d_of_x_dy(pts):
    a = FormField.from_coefficients(1, {(1,): "x"})
    assert np.allclose(ext_d(a).at(pts), (dx ^ dy).at(pts))


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_d_squared_vanishes(degree):
    rng = np.random.default_rng(100 + degree)
    pts = sample_points(100, degree)
    for _ in range(5):
        a = random_form(rng, degree)
        scale = max(1.0, np.max(np.abs(ext_d(a).at(pts))))
        assert np.max(np.abs(ext_d(ext_d(a)).at(pts))) < 1e-10 * scale


def test_d_theta_upper_half_plane():
    # z = x + i y on the (x, y) plane of the chart
    dzc = dx + dy * 1j
    theta = dzc * ExprField("1/y")
    p = np.array([[1.0, 2.0, 0.0, 0.0]])
    got = ext_d(theta).at(p)
    want = ((-1 / 2j) * (dzc ^ dzc.conj()) / 4.0).at(p)
    assert np.allclose(got, want, atol=1e-15)


def test_bracket_examples(pts):
    X = VectorField.coordinate(0)
    Y = VectorField.from_components([0, "x", 0, 0])
    assert np.allclose(lie_bracket(X, Y).at(pts), VectorField.coordinate(1).at(pts))
    Z = VectorField.from_components(["y*z", "sin(x)", "t", 1])
    assert np.max(np.abs(lie_bracket(Z, Z).at(pts))) == 0


def test_bracket_antisymmetry_and_jacobi():
    rng = np.random.default_rng(21)
    pts = sample_points(30, 2)
    for _ in range(5):
        X, Y, Z = (random_vector(rng) for _ in range(3))
        assert np.allclose(lie_bracket(X, Y).at(pts), -lie_bracket(Y, X).at(pts), atol=1e-12)
        jac = (
            lie_bracket(X, lie_bracket(Y, Z)).at(pts)
            + lie_bracket(Y, lie_bracket(Z, X)).at(pts)
            + lie_bracket(Z, lie_bracket(X, Y)).at(pts)
        )
        scale = max(1.0, np.max(np.abs(lie_bracket(X, lie_bracket(Y, Z)).at(pts))))
        assert np.max(np.abs(jac)) < 1e-9 * scale


def test_inoue_frame_bracket():
    f = inoue_forms(InoueParams(t=0.3 + 0.2j))
    pts = sample_points(40, 3, INOUE_BOX)
    br = lie_bracket(f.E1, f.E2).at(pts)
    assert np.allclose(br, -(1 / 2j) * f.E2.at(pts), atol=1e-12)


def test_star_of_basis():
    pts = sample_points(3, 0)
    star = hodge_star(dx ^ dy, NEUTRAL, VOL)
    assert np.allclose(star.at(pts), (dz ^ dt).at(pts))
    assert np.allclose(hodge_star(VOL, NEUTRAL, VOL).at(pts), 1.0)


def test_star_squared_is_identity():
    pts = sample_points(10, 0)
    S = np.real(star_matrix_jet(NEUTRAL, VOL, 2, pts).val)
    assert np.allclose(S @ S, np.eye(6), atol=1e-14)
    g = MetricField.from_entries([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, "sin(z*t)", "x"], [0, 1, "x", "y^2"]])
    S = np.real(star_matrix_jet(g, VOL, 2, pts).val)
    assert np.allclose(S @ S, np.eye(6), atol=1e-12)


def test_star_defining_relation():
    rng = np.random.default_rng(31)
    pts = sample_points(10, 4)
    g = MetricField.from_entries([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, "sin(z*t)", "x"], [0, 1, "x", "y^2"]])
    G = g.at(pts)
    root = np.sqrt(np.abs(np.linalg.det(G)))
    for k in range(5):
        a, b = random_form(rng, k), random_form(rng, k)
        lhs = (a ^ hodge_star(b, g, VOL)).top(pts)
        assert np.allclose(lhs, form_inner(a, b, g, pts) * root, atol=1e-10)


def test_inner_product_indefinite():
    pts = sample_points(1, 0)
    norms = [form_inner(FormField.constant(2, e), FormField.constant(2, e), NEUTRAL, pts)[0] for e in np.eye(6)]
    assert min(norms) < 0 < max(norms)
    # Gram determinants on increasing tuples
    assert form_inner(dx ^ dz, dx ^ dz, NEUTRAL, pts)[0] == -1
    assert form_inner(dz ^ dt, dz ^ dt, NEUTRAL, pts)[0] == 1


def test_nijenhuis_constant_structure(pts):
    J = EndomorphismField.constant(np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float))
    X = VectorField.from_components(["x*y", "sin(t)", "z", "1"])
    Y = VectorField.from_components(["exp(z)", "0", "x^2", "y"])
    assert np.max(np.abs(nijenhuis(J, X, Y, pts, -1))) < 1e-14
    assert np.max(np.abs(nijenhuis_coordinate(J, pts, -1))) == 0


def test_nijenhuis_requires_almost_structure(pts):
    with pytest.raises(NotAlmostStructureError):
        nijenhuis(EndomorphismField.constant(np.eye(4)), VectorField.coordinate(0), VectorField.coordinate(1), pts, -1)


def test_nijenhuis_tensorial_and_antisymmetric():
    rng = np.random.default_rng(41)
    pts = sample_points(30, 5)
    S = proper_structure(WalkerData("x^3 + sin(z)", "y*t", "x*y"))
    for J, eps in ((S.J1, -1), (S.J2, 1), (S.J3, 1)):
        X, Y = random_vector(rng), random_vector(rng)
        f = random_text(rng, 3)
        fv = ExprField(f).at(pts)
        N = nijenhuis(J, X, Y, pts, eps)
        assert np.allclose(nijenhuis(J, Y, X, pts, eps), -N, atol=1e-10)
        NfX = nijenhuis(J, X.scaled(f), Y, pts, eps)
        scale = max(1.0, np.max(np.abs(N)))
        assert np.max(np.abs(NfX - fv[:, None] * N)) < 1e-9 * scale


def test_nijenhuis_walker_cubic():
    pts = sample_points(50, 6)
    S = proper_structure(WalkerData("x^3", "0", "0"))
    N = nijenhuis_coordinate(S.J1, pts, -1)
    assert np.max(np.abs(N)) > 1e-3
    ok = proper_structure(WalkerData("x^2*sin(z) + x*t", "y^2*sin(z) + y*z", "x*y*sin(z) + 0.5*x*z + 0.5*y*t"))
    for J, eps in ((ok.J1, -1), (ok.J2, 1), (ok.J3, 1)):
        assert np.max(np.abs(nijenhuis_coordinate(J, pts, eps))) < 1e-8
