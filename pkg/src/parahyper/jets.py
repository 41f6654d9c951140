"""Second-order forward-mode differentiation over batches of chart points.

A :class:`Jet` carries the value, gradient and Hessian of a (possibly
tensor-valued, possibly complex) quantity with respect to the four chart
coordinates.  Derivative axes always trail the value axes::

    val  : S
    grad : S + (4,)
    hess : S + (4, 4)

where ``S`` usually starts with the batch axis ``N``.  Arithmetic follows the
product and chain rules exactly, so derivatives are exact to rounding.  A
Hessian filled with NaN marks "second derivatives not available" (see
:meth:`Jet.derivative`); NaNs propagate and make any misuse visible.
"""

from __future__ import annotations

import string
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

DIM = 4


def _as_array(x):
    return np.asarray(x)


class Jet:
    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val)
        self.grad = np.asarray(grad)
        self.hess = np.asarray(hess)

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, shape=()) -> "Jet":
        val = np.broadcast_to(np.asarray(value), shape).copy() if shape else np.asarray(value)
        s = val.shape
        return cls(val, np.zeros(s + (DIM,), val.dtype), np.zeros(s + (DIM, DIM), val.dtype))

    @classmethod
    def coordinates(cls, pts) -> list["Jet"]:
        """Identity jets of the four coordinates at points ``pts`` (N, 4)."""
        pts = np.asarray(pts, dtype=float)
        n = pts.shape[0]
        out = []
        for k in range(DIM):
            grad = np.zeros((n, DIM))
            grad[:, k] = 1.0
            out.append(cls(pts[:, k].copy(), grad, np.zeros((n, DIM, DIM))))
        return out

    @classmethod
    def stack(cls, jets: Sequence["Jet"], axis: int = -1) -> "Jet":
        """Stack jets along a new value axis (negative axes count within the value shape)."""
        nd = jets[0].val.ndim
        ax = axis if axis >= 0 else nd + 1 + axis
        return cls(
            np.stack([j.val for j in jets], axis=ax),
            np.stack([j.grad for j in jets], axis=ax),
            np.stack([j.hess for j in jets], axis=ax),
        )

    # -- shape helpers ------------------------------------------------------
    @property
    def shape(self):
        return self.val.shape

    @property
    def dtype(self):
        return self.val.dtype

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("Jet indexing does not support Ellipsis")
        return Jet(self.val[idx], self.grad[idx], self.hess[idx])

    def reshape(self, *shape) -> "Jet":
        return Jet(
            self.val.reshape(shape),
            self.grad.reshape(shape + (DIM,)),
            self.hess.reshape(shape + (DIM, DIM)),
        )

    def transpose(self, *axes) -> "Jet":
        nd = self.val.ndim
        ax = tuple(axes)
        return Jet(
            self.val.transpose(ax),
            self.grad.transpose(ax + (nd,)),
            self.hess.transpose(ax + (nd, nd + 1)),
        )

    def swap_last(self) -> "Jet":
        nd = self.val.ndim
        ax = list(range(nd))
        ax[-1], ax[-2] = ax[-2], ax[-1]
        return self.transpose(*ax)

    def derivative(self) -> "Jet":
        """Jet of the gradient; its own second derivatives are unavailable (NaN)."""
        return Jet(self.grad, self.hess, np.full(self.hess.shape + (DIM,), np.nan, dtype=self.hess.dtype))

    def conj(self) -> "Jet":
        return Jet(np.conj(self.val), np.conj(self.grad), np.conj(self.hess))

    @property
    def real(self) -> "Jet":
        return Jet(self.val.real, self.grad.real, self.hess.real)

    @property
    def imag(self) -> "Jet":
        return Jet(self.val.imag, self.grad.imag, self.hess.imag)

    def sum(self, axis) -> "Jet":
        nd = self.val.ndim
        ax = axis if axis >= 0 else nd + axis
        return Jet(self.val.sum(ax), self.grad.sum(ax), self.hess.sum(ax))

    # -- arithmetic ---------------------------------------------------------
    @staticmethod
    def _lift(other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(_as_array(other))

    def __add__(self, other):
        o = self._lift(other)
        return Jet(self.val + o.val, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        o = self._lift(other)
        return Jet(self.val - o.val, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = _as_array(other)
            return Jet(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        av, bv = a.val[..., None], b.val[..., None]
        grad = a.grad * bv + av * b.grad
        hess = (
            a.hess * bv[..., None]
            + a.grad[..., :, None] * b.grad[..., None, :]
            + b.grad[..., :, None] * a.grad[..., None, :]
            + av[..., None] * b.hess
        )
        return Jet(a.val * b.val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        if np.any(self.val == 0):
            raise DomainError("division by zero")
        v = self.val
        return self._apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            c = _as_array(other)
            if np.any(c == 0):
                raise DomainError("division by zero")
            return self * (1.0 / c)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("Jet powers must be integers")
        n = int(n)
        if n == 0:
            return Jet.constant(np.ones_like(self.val))
        if n < 0:
            return (self ** (-n)).reciprocal()
        v = self.val
        d1 = n * v ** (n - 1)
        d2 = n * (n - 1) * v ** (n - 2) if n >= 2 else np.zeros_like(v)
        return self._apply(v**n, d1, d2)

    def _apply(self, f0, f1, f2) -> "Jet":
        """Chain rule for an elementwise function with value/derivatives f0, f1, f2."""
        f1e = np.asarray(f1)[..., None]
        f2e = np.asarray(f2)[..., None, None]
        g = self.grad
        hess = f1e[..., None] * self.hess + f2e * (g[..., :, None] * g[..., None, :])
        return Jet(f0, f1e * g, hess)

    # -- elementary functions ----------------------------------------------
    def sin(self):
        v = self.val
        return self._apply(np.sin(v), np.cos(v), -np.sin(v))

    def cos(self):
        v = self.val
        return self._apply(np.cos(v), -np.sin(v), -np.cos(v))

    def exp(self):
        e = np.exp(self.val)
        return self._apply(e, e, e)

    def log(self):
        v = self.val
        _check_positive(v, "ln")
        return self._apply(np.log(v), 1.0 / v, -1.0 / v**2)

    def sqrt(self):
        v = self.val
        _check_positive(v, "sqrt")
        r = np.sqrt(v)
        return self._apply(r, 0.5 / r, -0.25 / (r * v))

    def __repr__(self):
        return f"Jet(shape={self.val.shape}, dtype={self.val.dtype})"


def _check_positive(v, name):
    if np.iscomplexobj(v):
        bad = (np.abs(v.imag) <= 1e-300) & (v.real <= 0)
    else:
        bad = v <= 0
    if np.any(bad):
        raise DomainError(f"{name} of non-positive argument")


def apply_elementwise(j: Jet, f: Callable, df: Callable, d2f: Callable) -> Jet:
    v = j.val
    return j._apply(f(v), df(v), d2f(v))


# -- multilinear algebra on jets --------------------------------------------

def _free_letters(spec: str, k: int) -> str:
    used = set(spec)
    letters = [c for c in string.ascii_letters if c not in used]
    return "".join(letters[:k])


def jeinsum(spec: str, a, b) -> Jet:
    """Bilinear ``numpy.einsum`` with exact first and second derivatives.

    ``spec`` must be explicit (``'nij,njk->nik'``); operands may be Jets or
    constant arrays.
    """
    ins, out = spec.split("->")
    sa, sb = ins.split(",")
    p, q = _free_letters(spec, 2)
    ja = isinstance(a, Jet)
    jb = isinstance(b, Jet)
    av = a.val if ja else np.asarray(a)
    bv = b.val if jb else np.asarray(b)
    val = np.einsum(spec, av, bv)
    grad = 0
    hess = 0
    if ja:
        grad = grad + np.einsum(f"{sa}{p},{sb}->{out}{p}", a.grad, bv)
        hess = hess + np.einsum(f"{sa}{p}{q},{sb}->{out}{p}{q}", a.hess, bv)
    if jb:
        grad = grad + np.einsum(f"{sa},{sb}{p}->{out}{p}", av, b.grad)
        hess = hess + np.einsum(f"{sa},{sb}{p}{q}->{out}{p}{q}", av, b.hess)
    if ja and jb:
        cross = np.einsum(f"{sa}{p},{sb}{q}->{out}{p}{q}", a.grad, b.grad)
        hess = hess + cross + np.swapaxes(cross, -1, -2)
    if not (ja or jb):
        return Jet.constant(val)
    return Jet(val, grad, hess)


def jmatmul(a, b) -> Jet:
    """Batched matrix product over value axes ``(N, n, m)``."""
    return jeinsum("nij,njk->nik", a, b)


def jinv(a: Jet) -> Jet:
    """Inverse of a batch of square matrices (value axes ``(N, n, n)``)."""
    inv = np.linalg.inv(a.val)
    dA = a.grad
    # d(A^-1)_p = -B A_p B
    BdA = np.einsum("nij,njkp->nikp", inv, dA)
    grad = -np.einsum("nikp,nkl->nilp", BdA, inv)
    # d2(A^-1)_pq = B (A_p B A_q + A_q B A_p - A_pq) B
    t = np.einsum("nijp,njkq->nikpq", BdA, BdA)
    t = t + np.swapaxes(t, -1, -2)
    t = t - np.einsum("nij,njkpq->nikpq", inv, a.hess)
    hess = np.einsum("nikpq,nkl->nilpq", t, inv)
    return Jet(inv, grad, hess)


def jdet(a: Jet) -> Jet:
    """Determinant of a batch of square matrices."""
    det = np.linalg.det(a.val)
    inv = np.linalg.inv(a.val)
    BdA = np.einsum("nij,njkp->nikp", inv, a.grad)
    tr = np.einsum("niip->np", BdA)
    grad = det[:, None] * tr
    hess = (
        tr[:, :, None] * tr[:, None, :]
        - np.einsum("nijp,njiq->npq", BdA, BdA)
        + np.einsum("nij,njipq->npq", inv, a.hess)
    )
    return Jet(det, grad, det[:, None, None] * hess)
