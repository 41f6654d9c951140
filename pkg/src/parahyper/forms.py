"""Exterior calculus on a four-dimensional chart.

Forms store one (complex) coefficient per strictly increasing index tuple,
ordered lexicographically; ``BASIS[k]`` lists the tuples for degree ``k``.
Coordinates are indexed 0..3.

Conventions
-----------
* Inner product of k-forms: ``<e^I, e^J> = det(g^{-1}[I, J])`` (Gram
  determinant on increasing tuples, no 1/k! factor).
* Hodge star: ``a ^ *b = <a, b> vol_g`` where ``vol_g = s sqrt|det g| e^0123``
  and ``s = ±1`` is the sign of the declared orientation form.  Only the sign
  of the orientation form matters; in signature (2, 2), ``** = +1`` on 2-forms.
* Nijenhuis tensor of J with J^2 = eps Id:
  ``N(X, Y) = [JX, JY] - J[JX, Y] - J[X, JY] + eps [X, Y]``.
"""

from __future__ import annotations

from itertools import combinations, permutations
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .errors import DegreeError, NotAlmostStructureError, SingularMetricError
from .fields import (
    EndomorphismField,
    ExprField,
    FieldLike,
    MetricField,
    ScalarField,
    TensorField,
    VectorField,
    as_field,
    as_points,
    stack_fields,
)
from .jets import DIM, Jet, jdet, jeinsum, jinv

BASIS = {k: list(combinations(range(DIM), k)) for k in range(DIM + 1)}
INDEX = {k: {I: n for n, I in enumerate(BASIS[k])} for k in BASIS}


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an index repeats."""
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _wedge_table(k: int, l: int) -> np.ndarray:
    table = np.zeros((len(BASIS[k]), len(BASIS[l]), len(BASIS[k + l])))
    for i, I in enumerate(BASIS[k]):
        for j, J in enumerate(BASIS[l]):
            s = perm_sign(I + J)
            if s:
                table[i, j, INDEX[k + l][tuple(sorted(I + J))]] = s
    return table


_WEDGE = {(k, l): _wedge_table(k, l) for k in range(DIM + 1) for l in range(DIM + 1 - k)}


class FormField(TensorField):
    """Complex-valued differential k-form on the chart."""

    def __init__(self, degree: int, fn):
        if not 0 <= degree <= DIM:
            raise DegreeError(f"form degree {degree} outside 0..{DIM}")
        self.degree = degree
        super().__init__(fn, (len(BASIS[degree]),))

    # -- construction -------------------------------------------------------
    @classmethod
    def from_coefficients(
        cls, degree: int, coeffs: Mapping[tuple, FieldLike], variables=ex.REAL_CHART
    ) -> "FormField":
        """Build from ``{index tuple: coefficient}``; unsorted tuples are reordered with sign."""
        fields: list[ScalarField] = [as_field(0.0)] * len(BASIS[degree])
        acc: dict[int, list] = {}
        for I, c in coeffs.items():
            I = tuple(I)
            if len(I) != degree:
                raise DegreeError(f"index {I} does not match degree {degree}")
            s = perm_sign(I)
            if s == 0:
                continue
            f = as_field(c, variables)
            acc.setdefault(INDEX[degree][tuple(sorted(I))], []).append(f if s > 0 else -f)
        for n, parts in acc.items():
            total = parts[0]
            for p in parts[1:]:
                total = total + p
            fields[n] = total
        form = cls(degree, stack_fields(fields, (len(BASIS[degree]),)))
        form.coefficient_fields = fields
        return form

    @classmethod
    def differential(cls, k: int) -> "FormField":
        """The coordinate 1-form dx^k."""
        return cls.from_coefficients(1, {(k,): 1.0})

    @classmethod
    def scalar(cls, f: FieldLike, variables=ex.REAL_CHART) -> "FormField":
        return cls.from_coefficients(0, {(): f}, variables)

    @classmethod
    def constant(cls, degree: int, coeffs) -> "FormField":
        c = np.asarray(coeffs)
        return cls(degree, lambda pts: Jet.constant(np.broadcast_to(c, (pts.shape[0],) + c.shape).copy()))

    @classmethod
    def from_matrix_jet(cls, fn) -> "FormField":
        """2-form from a closure returning the antisymmetric component matrix jet (N, 4, 4)."""
        rows = [I[0] for I in BASIS[2]]
        cols = [I[1] for I in BASIS[2]]
        return cls(2, lambda pts: fn(pts)[:, rows, cols])

    # -- evaluation ---------------------------------------------------------
    def dense(self, pts) -> np.ndarray:
        """Fully antisymmetric component array, shape (N,) + (4,)*k."""
        return to_dense(self.at(pts), self.degree)

    def evaluate(self, pts, *vectors) -> np.ndarray:
        """alpha(X_1, ..., X_k) at each point; vectors are arrays (N, 4) or VectorFields."""
        pts = as_points(pts)
        if len(vectors) != self.degree:
            raise DegreeError(f"a {self.degree}-form takes {self.degree} vectors")
        vals = [v.at(pts) if isinstance(v, TensorField) else np.broadcast_to(np.asarray(v), pts.shape) for v in vectors]
        out = self.dense(pts)
        for v in vals:
            out = np.einsum("ni...,ni->n...", out, v)
        return out

    def top(self, pts) -> np.ndarray:
        """Coefficient of dx^0123 of a 4-form."""
        if self.degree != DIM:
            raise DegreeError("top() needs a 4-form")
        return self.at(pts)[:, 0]

    # -- algebra -------------------------------------------------------------
    def __add__(self, other: "FormField") -> "FormField":
        _same_degree(self, other)
        return FormField(self.degree, lambda pts: self.jet(pts) + other.jet(pts))

    def __sub__(self, other: "FormField") -> "FormField":
        _same_degree(self, other)
        return FormField(self.degree, lambda pts: self.jet(pts) - other.jet(pts))

    def __neg__(self) -> "FormField":
        return FormField(self.degree, lambda pts: -self.jet(pts))

    def __mul__(self, c) -> "FormField":
        if isinstance(c, (ScalarField, ex.Expr, str)):
            f = as_field(c)
            return FormField(self.degree, lambda pts: self.jet(pts) * f.jet(pts)[:, None])
        return FormField(self.degree, lambda pts: self.jet(pts) * c)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "FormField":
        if isinstance(c, (ScalarField, ex.Expr, str)):
            f = as_field(c)
            return FormField(self.degree, lambda pts: self.jet(pts) * f.jet(pts).reciprocal()[:, None])
        return self * (1.0 / c)

    def __xor__(self, other: "FormField") -> "FormField":
        return wedge(self, other)

    def conj(self) -> "FormField":
        return FormField(self.degree, lambda pts: self.jet(pts).conj())

    @property
    def real(self) -> "FormField":
        return FormField(self.degree, lambda pts: _complex(self.jet(pts)).real)

    @property
    def imag(self) -> "FormField":
        return FormField(self.degree, lambda pts: _complex(self.jet(pts)).imag)


def _complex(j: Jet) -> Jet:
    return j if np.iscomplexobj(j.val) else Jet(j.val.astype(complex), j.grad.astype(complex), j.hess.astype(complex))


def _same_degree(a: FormField, b: FormField):
    if a.degree != b.degree:
        raise DegreeError(f"cannot add forms of degree {a.degree} and {b.degree}")


def to_dense(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Expand increasing-tuple coefficients (N, C(4,k)) to an antisymmetric array."""
    n = coeffs.shape[0]
    out = np.zeros((n,) + (DIM,) * degree, dtype=coeffs.dtype)
    for c, I in enumerate(BASIS[degree]):
        for perm in permutations(range(degree)):
            idx = tuple(I[p] for p in perm)
            out[(slice(None),) + idx] = perm_sign(perm) * coeffs[:, c]
    return out


def from_dense(arr: np.ndarray, degree: int) -> np.ndarray:
    cols = [arr[(slice(None),) + I] for I in BASIS[degree]]
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# operations

def wedge(a: FormField, b: FormField) -> FormField:
    """Exterior product; graded-commutative."""
    k, l = a.degree, b.degree
    if k + l > DIM:
        raise DegreeError(f"wedge of degrees {k} and {l} exceeds {DIM}")
    table = _WEDGE[(k, l)]

    def fn(pts):
        outer = jeinsum("ni,nj->nij", a.jet(pts), b.jet(pts))
        return jeinsum("nij,ijk->nk", outer, table)

    return FormField(k + l, fn)


def _d_table(k: int) -> np.ndarray:
    # (d f_I dx^I)_K = sum_j sign(j, I -> K) df_I/dx^j
    table = np.zeros((len(BASIS[k]), DIM, len(BASIS[k + 1])))
    for i, I in enumerate(BASIS[k]):
        for j in range(DIM):
            s = perm_sign((j,) + I)
            if s:
                table[i, j, INDEX[k + 1][tuple(sorted((j,) + I))]] = s
    return table


_D = {k: _d_table(k) for k in range(DIM)}


def ext_d(a: FormField) -> FormField:
    """Exterior derivative.  The result's coefficients carry exact 1-jets only."""
    if a.degree >= DIM:
        raise DegreeError("d of a top-degree form leaves the chart's exterior algebra")
    table = _D[a.degree]
    return FormField(a.degree + 1, lambda pts: jeinsum("nij,ijk->nk", a.jet(pts).derivative(), table))


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^k = X^j d_j Y^k - Y^j d_j X^k.

    Expression-backed components are differentiated symbolically (full jets);
    otherwise the bracket is formed from jets and has exact 1-jets.
    """
    xc = getattr(X, "components", None)
    yc = getattr(Y, "components", None)
    if xc is not None and yc is not None and all(isinstance(c, (ExprField,)) or _is_const(c) for c in xc + yc):
        comps = []
        for k in range(DIM):
            total = as_field(0.0)
            for j in range(DIM):
                total = total + xc[j] * yc[k].partial(j) - yc[j] * xc[k].partial(j)
            comps.append(total)
        return VectorField.from_components(comps)

    def fn(pts):
        A, B = X.jet(pts), Y.jet(pts)
        return jeinsum("nj,nkj->nk", A, B.derivative()) - jeinsum("nj,nkj->nk", B, A.derivative())

    return VectorField(fn)


def _is_const(f) -> bool:
    from .fields import ConstantField

    return isinstance(f, ConstantField)


def bracket_values(A: Jet, B: Jet) -> np.ndarray:
    """Values of [X, Y] from the 1-jets of the component arrays (N, 4)."""
    return np.einsum("nj,nkj->nk", A.val, B.grad) - np.einsum("nj,nkj->nk", B.val, A.grad)


def _checked_jet(J: EndomorphismField, pts, eps: int, tol: float) -> Jet:
    Jj = J.jet(pts)
    sq = np.einsum("nij,njk->nik", Jj.val, Jj.val)
    resid = np.max(np.abs(sq - eps * np.eye(DIM)))
    if resid > tol * max(1.0, np.max(np.abs(Jj.val)) ** 2):
        raise NotAlmostStructureError(f"J^2 != {eps:+d} Id (residual {resid:.3g})")
    return Jj


def _nijenhuis_values(Jj: Jet, Xj: Jet, Yj: Jet, eps: int) -> np.ndarray:
    JX = jeinsum("nij,nj->ni", Jj, Xj)
    JY = jeinsum("nij,nj->ni", Jj, Yj)
    Jv = Jj.val
    out = bracket_values(JX, JY)
    out = out - np.einsum("nij,nj->ni", Jv, bracket_values(JX, Yj))
    out = out - np.einsum("nij,nj->ni", Jv, bracket_values(Xj, JY))
    return out + eps * bracket_values(Xj, Yj)


def nijenhuis(J: EndomorphismField, X: VectorField, Y: VectorField, pts, eps: int, tol: float = 1e-10) -> np.ndarray:
    """Nijenhuis tensor N_J(X, Y) at ``pts``; J must satisfy J^2 = eps Id there."""
    pts = as_points(pts)
    Jj = _checked_jet(J, pts, eps, tol)
    return _nijenhuis_values(Jj, X.jet(pts), Y.jet(pts), eps)


def nijenhuis_coordinate(J: EndomorphismField, pts, eps: int, tol: float = 1e-10) -> np.ndarray:
    """N_J(d_i, d_j) for all coordinate pairs, shape (N, 4, 4, 4) indexed [n, i, j, k]."""
    pts = as_points(pts)
    Jj = _checked_jet(J, pts, eps, tol)
    coords = [VectorField.coordinate(i).jet(pts) for i in range(DIM)]
    out = np.zeros((pts.shape[0], DIM, DIM, DIM), dtype=complex)
    for i in range(DIM):
        for j in range(i + 1, DIM):
            v = _nijenhuis_values(Jj, coords[i], coords[j], eps)
            out[:, i, j] = v
            out[:, j, i] = -v
    return out if np.iscomplexobj(Jj.val) else out.real


# -- Hodge star --------------------------------------------------------------

def _minor_jet(ginv: Jet, K: tuple, I: tuple) -> Jet:
    k = len(K)
    if k == 0:
        return Jet.constant(np.ones(ginv.val.shape[0]))
    total = None
    for perm in permutations(range(k)):
        term = ginv[:, K[0], I[perm[0]]]
        for p in range(1, k):
            term = term * ginv[:, K[p], I[perm[p]]]
        term = term * float(perm_sign(perm))
        total = term if total is None else total + term
    return total


def orientation_sign(orientation, pts) -> np.ndarray:
    """Pointwise sign of a declared orientation (4-form, callable or number)."""
    if isinstance(orientation, FormField):
        c = orientation.top(pts)
    elif callable(orientation):
        c = orientation(pts)
    else:
        c = np.full(pts.shape[0], float(orientation))
    c = np.real_if_close(np.asarray(c))
    if np.any(c == 0):
        raise DegreeError("orientation form vanishes")
    return np.sign(np.real(c))


def volume_jet(g: MetricField, orientation, pts) -> Jet:
    """Coefficient of dx^0123 in the oriented metric volume form."""
    gj = g.jet(pts)
    det = jdet(gj)
    if np.any(det.val == 0):
        raise SingularMetricError("metric is degenerate")
    s = np.sign(det.val)
    return (det * s).sqrt() * orientation_sign(orientation, pts)


def star_matrix_jet(g: MetricField, orientation, degree: int, pts) -> Jet:
    """Jet of the matrix S with (*a)_J = sum_I S[J, I] a_I."""
    pts = as_points(pts)
    gj = g.jet(pts)
    if np.any(np.abs(np.linalg.det(gj.val)) < 1e-300):
        raise SingularMetricError("metric is degenerate")
    ginv = jinv(gj)
    vol = volume_jet(g, orientation, pts)
    rows = []
    comp_of = {K: tuple(sorted(set(range(DIM)) - set(K))) for K in BASIS[degree]}
    n_out = len(BASIS[DIM - degree])
    entries = {}
    for K in BASIS[degree]:
        C = comp_of[K]
        s = float(perm_sign(K + C))
        for i, I in enumerate(BASIS[degree]):
            entries[(INDEX[DIM - degree][C], i)] = _minor_jet(ginv, K, I) * vol * s
    zero = Jet.constant(np.zeros(pts.shape[0]))
    for r in range(n_out):
        rows.append(Jet.stack([entries.get((r, i), zero) for i in range(len(BASIS[degree]))], axis=-1))
    return Jet.stack(rows, axis=1)


def hodge_star(a: FormField, g: MetricField, orientation) -> FormField:
    k = a.degree

    def fn(pts):
        S = star_matrix_jet(g, orientation, k, pts)
        return jeinsum("nji,ni->nj", S, a.jet(pts))

    return FormField(DIM - k, fn)


def form_inner(a: FormField, b: FormField, g: MetricField, pts) -> np.ndarray:
    """Pointwise <a, b>_g (bilinear, no conjugation)."""
    if a.degree != b.degree:
        raise DegreeError("inner product needs equal degrees")
    pts = as_points(pts)
    ginv = np.linalg.inv(g.at(pts))
    ginv_j = Jet.constant(ginv)
    k = a.degree
    G = np.stack(
        [np.stack([_minor_jet(ginv_j, K, I).val for I in BASIS[k]], axis=-1) for K in BASIS[k]], axis=1
    )
    return np.einsum("nk,nki,ni->n", a.at(pts), G, b.at(pts))


# -- pullbacks -----------------------------------------------------------------

class ChartMap:
    """A smooth map of the chart given by point and Jacobian callables."""

    def __init__(self, func, jacobian):
        self.func = func
        self.jacobian = jacobian

    def __call__(self, pts) -> np.ndarray:
        return self.func(as_points(pts))

    @classmethod
    def affine(cls, matrix, offset) -> "ChartMap":
        M = np.asarray(matrix, dtype=float)
        b = np.asarray(offset, dtype=float)
        return cls(lambda p: p @ M.T + b, lambda p: np.broadcast_to(M, (p.shape[0], DIM, DIM)).copy())


def pullback_form(a: FormField, f: ChartMap, pts) -> np.ndarray:
    """Coefficients of f^* a at ``pts`` (values only)."""
    pts = as_points(pts)
    A = a.dense(f(pts))
    D = f.jacobian(pts)
    for _ in range(a.degree):
        # contract the leading form slot with the Jacobian and rotate it to the end
        A = np.einsum("ni...,nij->n...j", A, D)
    return from_dense(A, a.degree)


def pullback_metric(g: TensorField, f: ChartMap, pts) -> np.ndarray:
    pts = as_points(pts)
    D = f.jacobian(pts)
    return np.einsum("nai,nab,nbj->nij", D, g.at(f(pts)), D)


def pullback_endomorphism(J: EndomorphismField, f: ChartMap, pts) -> np.ndarray:
    """(f^*J)_p = (Df_p)^{-1} J_{f(p)} Df_p."""
    pts = as_points(pts)
    D = f.jacobian(pts)
    return np.linalg.solve(D, np.einsum("nij,njk->nik", J.at(f(pts)), D))


def pullback_vector_values(X: VectorField, f: ChartMap, pts) -> np.ndarray:
    pts = as_points(pts)
    D = f.jacobian(pts)
    return np.linalg.solve(D, X.at(f(pts))[..., None])[..., 0]
