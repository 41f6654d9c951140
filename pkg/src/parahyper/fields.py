"""Tensor fields on a single four-dimensional coordinate chart.

Every field is a lazy map from a batch of chart points ``(N, 4)`` to a
:class:`~parahyper.jets.Jet` whose value axes are ``(N,) + shape``.  Fields
backed by expressions differentiate symbolically, so their partial
derivatives keep full second-order jets; closure-backed fields differentiate
through their jets and lose one order.
"""

from __future__ import annotations

from typing import Callable, Sequence, Union

import numpy as np

from . import expr as ex
from .jets import DIM, Jet


def as_points(pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[-1] != DIM:
        raise ValueError(f"chart points must have {DIM} coordinates, got shape {pts.shape}")
    return pts


class TensorField:
    shape: tuple = ()

    def __init__(self, fn: Callable[[np.ndarray], Jet], shape: tuple | None = None):
        self._fn = fn
        if shape is not None:
            self.shape = tuple(shape)

    def jet(self, pts) -> Jet:
        return self._fn(as_points(pts))

    def at(self, pts) -> np.ndarray:
        """Values only."""
        return self.jet(pts).val


# ---------------------------------------------------------------------------
# scalar fields

FieldLike = Union["ScalarField", ex.Expr, str, float, complex, int]


class ScalarField(TensorField):
    """A real- or complex-valued function on the chart."""

    shape = ()

    def partial(self, k: int) -> "ScalarField":
        return ScalarField(lambda pts: self.jet(pts).derivative()[:, k])

    # arithmetic builds closures; expression leaves stay exact
    def _bin(self, other, op) -> "ScalarField":
        o = as_field(other)
        return ScalarField(lambda pts: op(self.jet(pts), o.jet(pts)))

    def __add__(self, other):
        return self._bin(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return as_field(other) - self

    def __mul__(self, other):
        return self._bin(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._bin(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return as_field(other) / self

    def __neg__(self):
        return ScalarField(lambda pts: -self.jet(pts))

    def conj(self) -> "ScalarField":
        return ScalarField(lambda pts: self.jet(pts).conj())


class ExprField(ScalarField):
    """Scalar field given by an expression in the chart variables."""

    def __init__(self, e: ex.Expr | str, variables: Sequence[str] = ex.REAL_CHART):
        if isinstance(e, str):
            e = ex.parse(e, variables)
        self.expr = ex.lower(e)
        self.variables = tuple(variables)
        super().__init__(self._eval)

    def _eval(self, pts) -> Jet:
        return ex.eval_batch(self.expr, pts, self.variables)

    def partial(self, k: int) -> "ExprField":
        return ExprField(ex.diff(self.expr, self.variables[k]), self.variables)

    def __repr__(self):
        return f"ExprField({ex.to_text(self.expr)!r})"


class ConstantField(ScalarField):
    def __init__(self, value):
        self.value = value
        super().__init__(self._eval)

    def _eval(self, pts) -> Jet:
        dtype = complex if isinstance(self.value, complex) else float
        return Jet.constant(np.full(pts.shape[0], self.value, dtype=dtype))

    def partial(self, k: int) -> "ConstantField":
        return ConstantField(0.0)


def as_field(x: FieldLike, variables: Sequence[str] = ex.REAL_CHART) -> ScalarField:
    if isinstance(x, ScalarField):
        return x
    if isinstance(x, (ex.Expr, str)):
        return ExprField(x, variables)
    if isinstance(x, (int, float, complex, np.number)):
        return ConstantField(x)
    raise TypeError(f"cannot interpret {x!r} as a scalar field")


def stack_fields(fields: Sequence[ScalarField], shape: tuple) -> Callable[[np.ndarray], Jet]:
    fields = list(fields)

    def fn(pts):
        jets = [f.jet(pts) for f in fields]
        n = pts.shape[0]
        dtype = np.result_type(*[j.val.dtype for j in jets])
        val = np.empty((n, len(jets)), dtype)
        grad = np.empty((n, len(jets), DIM), dtype)
        hess = np.empty((n, len(jets), DIM, DIM), dtype)
        for i, j in enumerate(jets):
            val[:, i] = j.val
            grad[:, i] = j.grad
            hess[:, i] = j.hess
        return Jet(val, grad, hess).reshape(n, *shape)

    return fn


# ---------------------------------------------------------------------------
# vector, endomorphism and metric fields

class VectorField(TensorField):
    """Vector field with (possibly complex) components along ∂_0..∂_3."""

    shape = (DIM,)

    @classmethod
    def from_components(cls, comps: Sequence[FieldLike], variables=ex.REAL_CHART) -> "VectorField":
        if len(comps) != DIM:
            raise ValueError("a vector field needs four components")
        fields = [as_field(c, variables) for c in comps]
        vf = cls(stack_fields(fields, (DIM,)))
        vf.components = fields
        return vf

    @classmethod
    def coordinate(cls, k: int) -> "VectorField":
        comps = [1.0 if i == k else 0.0 for i in range(DIM)]
        return cls.from_components(comps)

    def scaled(self, f: FieldLike) -> "VectorField":
        f = as_field(f)
        return VectorField(lambda pts: self.jet(pts) * f.jet(pts)[:, None])

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(lambda pts: self.jet(pts) + other.jet(pts))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(lambda pts: self.jet(pts) - other.jet(pts))

    def __mul__(self, c) -> "VectorField":
        if isinstance(c, (ScalarField, ex.Expr, str)):
            return self.scaled(c)
        return VectorField(lambda pts: self.jet(pts) * c)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(lambda pts: -self.jet(pts))


class EndomorphismField(TensorField):
    """(1,1)-tensor; ``jet(pts).val[n, i, j]`` is the i-th component of J(∂_j)."""

    shape = (DIM, DIM)

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[FieldLike]], variables=ex.REAL_CHART):
        fields = [as_field(c, variables) for row in rows for c in row]
        return cls(stack_fields(fields, (DIM, DIM)))

    @classmethod
    def constant(cls, matrix) -> "EndomorphismField":
        m = np.asarray(matrix)
        return cls(lambda pts: Jet.constant(np.broadcast_to(m, (pts.shape[0],) + m.shape).copy()))

    def apply(self, X: VectorField) -> VectorField:
        from .jets import jeinsum

        return VectorField(lambda pts: jeinsum("nij,nj->ni", self.jet(pts), X.jet(pts)))

    def compose(self, other: "EndomorphismField") -> "EndomorphismField":
        from .jets import jmatmul

        return EndomorphismField(lambda pts: jmatmul(self.jet(pts), other.jet(pts)))


class MetricField(TensorField):
    """Symmetric (0,2)-tensor; ``val[n, i, j] = g(∂_i, ∂_j)``."""

    shape = (DIM, DIM)

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[FieldLike]], variables=ex.REAL_CHART):
        fields = [as_field(c, variables) for row in rows for c in row]
        return cls(stack_fields(fields, (DIM, DIM)))

    @classmethod
    def constant(cls, matrix) -> "MetricField":
        m = np.asarray(matrix, dtype=float)
        return cls(lambda pts: Jet.constant(np.broadcast_to(m, (pts.shape[0],) + m.shape).copy()))

    def scaled(self, f: FieldLike) -> "MetricField":
        f = as_field(f)
        return MetricField(lambda pts: self.jet(pts) * f.jet(pts)[:, None, None])
