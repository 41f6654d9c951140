"""Split quaternions and linear para-hypercomplex structures on R^4.

Pointwise linear algebra: the split-quaternion product, triples
(J1, J2, J3) with J1^2 = -Id, J2^2 = J3^2 = Id, J1 J2 = -J2 J1 = J3, and the
metrics compatible with them (g(J1X, J1Y) = -g(J2X, J2Y) = -g(J3X, J3Y) = g(X, Y)).
Endomorphisms act on column vectors; bilinear forms are ``B(X, Y) = X^T B Y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CompatibilityError,
    DegenerateFormError,
    InvalidTripleError,
    IsotropicVectorError,
)
from .report import VerificationReport

ID4 = np.eye(4)
TRIPLE_TOL = 1e-12
COMPAT_TOL = 1e-10
PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class SplitQuaternion:
    """r + i j1 + s j2 + t j3 with j1^2 = -1, j2^2 = j3^2 = 1, j1 j2 = -j2 j1 = j3."""

    r: float = 0.0
    i: float = 0.0
    s: float = 0.0
    t: float = 0.0

    @classmethod
    def from_array(cls, a) -> "SplitQuaternion":
        a = np.asarray(a, dtype=float)
        return cls(*a.tolist())

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.i, self.s, self.t])

    def __mul__(self, other):
        if isinstance(other, SplitQuaternion):
            return sq_mul(self, other)
        return SplitQuaternion(*(self.as_array() * other))

    def __rmul__(self, c):
        return SplitQuaternion(*(self.as_array() * c))

    def __add__(self, other: "SplitQuaternion") -> "SplitQuaternion":
        return SplitQuaternion(*(self.as_array() + other.as_array()))

    def __sub__(self, other: "SplitQuaternion") -> "SplitQuaternion":
        return SplitQuaternion(*(self.as_array() - other.as_array()))

    def __neg__(self):
        return SplitQuaternion(-self.r, -self.i, -self.s, -self.t)

    def conjugate(self) -> "SplitQuaternion":
        return SplitQuaternion(self.r, -self.i, -self.s, -self.t)

    def norm2(self) -> float:
        """q * conj(q) = r^2 + i^2 - s^2 - t^2 (indefinite)."""
        return self.r**2 + self.i**2 - self.s**2 - self.t**2


ONE = SplitQuaternion(1.0)
J1 = SplitQuaternion(0.0, 1.0)
J2 = SplitQuaternion(0.0, 0.0, 1.0)
J3 = SplitQuaternion(0.0, 0.0, 0.0, 1.0)


def sq_mul(p: SplitQuaternion, q: SplitQuaternion) -> SplitQuaternion:
    a0, a1, a2, a3 = p.r, p.i, p.s, p.t
    b0, b1, b2, b3 = q.r, q.i, q.s, q.t
    return SplitQuaternion(
        a0 * b0 - a1 * b1 + a2 * b2 + a3 * b3,
        a0 * b1 + a1 * b0 - a2 * b3 + a3 * b2,
        a0 * b2 + a2 * b0 - a1 * b3 + a3 * b1,
        a0 * b3 + a3 * b0 + a1 * b2 - a2 * b1,
    )


# ---------------------------------------------------------------------------
# triples

@dataclass(frozen=True, eq=False)
class ParaHypercomplexTriple:
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray

    def __iter__(self):
        return iter((self.J1, self.J2, self.J3))

    def conjugated(self, P) -> "ParaHypercomplexTriple":
        """The triple P J P^{-1} (a change of basis)."""
        P = np.asarray(P, dtype=float)
        Pinv = np.linalg.inv(P)
        return ParaHypercomplexTriple(*(P @ J @ Pinv for J in self))


def _matrix_from_images(images: dict[int, tuple[int, int]]) -> np.ndarray:
    M = np.zeros((4, 4))
    for src, (dst, sign) in images.items():
        M[dst, src] = sign
    return M


def canonical_triple() -> ParaHypercomplexTriple:
    """Standard-basis triple: J1 e1 = e2, J1 e3 = e4, J2 e1 = e3, J2 e2 = -e4, J3 = J1 J2."""
    j1 = _matrix_from_images({0: (1, 1), 1: (0, -1), 2: (3, 1), 3: (2, -1)})
    j2 = _matrix_from_images({0: (2, 1), 1: (3, -1), 2: (0, 1), 3: (1, -1)})
    return ParaHypercomplexTriple(j1, j2, j1 @ j2)


def triple_residuals(T: ParaHypercomplexTriple) -> dict[str, float]:
    j1, j2, j3 = T
    return {
        "J1^2+Id": float(np.max(np.abs(j1 @ j1 + ID4))),
        "J2^2-Id": float(np.max(np.abs(j2 @ j2 - ID4))),
        "J3^2-Id": float(np.max(np.abs(j3 @ j3 - ID4))),
        "J1J2+J2J1": float(np.max(np.abs(j1 @ j2 + j2 @ j1))),
        "J1J2-J3": float(np.max(np.abs(j1 @ j2 - j3))),
    }


def verify_triple(T: ParaHypercomplexTriple, tol: float = TRIPLE_TOL) -> VerificationReport:
    rep = VerificationReport("triple")
    for name, r in triple_residuals(T).items():
        rep.add(name, r, tol)
    return rep


def eigenbasis(T: ParaHypercomplexTriple, sign: int, tol: float = TRIPLE_TOL * 100) -> tuple[np.ndarray, np.ndarray]:
    """Basis of the (sign)-eigenspace of J2.

    Columns of the projector (Id + sign J2)/2 are scanned in index order;
    a column is kept when its component orthogonal to the kept ones exceeds
    ``PIVOT_TOL``.  Each kept column is scaled to have 1 at its pivot index.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    j2 = T.J2
    if np.max(np.abs(j2 @ j2 - ID4)) > tol:
        raise InvalidTripleError("J2^2 != Id")
    P = (ID4 + sign * j2) / 2.0
    kept: list[np.ndarray] = []
    ortho: list[np.ndarray] = []
    scale = max(1.0, float(np.max(np.abs(P))))
    for k in range(4):
        col = P[:, k]
        r = col.copy()
        for q in ortho:
            r -= (q @ r) * q
        nr = np.linalg.norm(r)
        if nr > PIVOT_TOL * scale:
            ortho.append(r / nr)
            kept.append(col / col[k] if abs(col[k]) > PIVOT_TOL * scale else col / np.linalg.norm(col))
        if len(kept) == 2:
            break
    if len(kept) != 2:
        raise InvalidTripleError(f"eigenspace of J2 for {sign:+d} has dimension {len(kept)}, expected 2")
    return kept[0], kept[1]


# ---------------------------------------------------------------------------
# bilinear forms

@dataclass(frozen=True, eq=False)
class BilinearForm4:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)

    def __call__(self, X, Y) -> float:
        return float(np.asarray(X) @ self.matrix @ np.asarray(Y))

    @property
    def rank(self) -> int:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return int(np.sum(np.abs(np.linalg.eigvalsh(self.matrix)) > PIVOT_TOL * scale))

    @property
    def degenerate(self) -> bool:
        return self.rank < 4

    def signature(self) -> tuple[int, int]:
        ev = np.linalg.eigvalsh(self.matrix)
        scale = max(1.0, float(np.max(np.abs(ev))))
        return int(np.sum(ev > PIVOT_TOL * scale)), int(np.sum(ev < -PIVOT_TOL * scale))

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T)))


def _mat(g) -> np.ndarray:
    return g.matrix if isinstance(g, BilinearForm4) else np.asarray(g, dtype=float)


def compatibility_residuals(g, T: ParaHypercomplexTriple) -> dict[str, float]:
    """Residuals of g(J1X,J1Y) = g(X,Y), g(J2X,J2Y) = -g(X,Y), g(J3X,J3Y) = -g(X,Y) on unit-normalized g."""
    G = _mat(g)
    scale = float(np.max(np.abs(G)))
    if scale == 0:
        scale = 1.0
    G = G / scale
    j1, j2, j3 = T
    return {
        "J1-isometry": float(np.max(np.abs(j1.T @ G @ j1 - G))),
        "J2-anti-isometry": float(np.max(np.abs(j2.T @ G @ j2 + G))),
        "J3-anti-isometry": float(np.max(np.abs(j3.T @ G @ j3 + G))),
    }


def is_compatible(g, T: ParaHypercomplexTriple, tol: float = COMPAT_TOL) -> bool:
    G = _mat(g)
    return bool(np.max(np.abs(G - G.T)) <= tol * max(1.0, np.max(np.abs(G)))) and max(
        compatibility_residuals(g, T).values()
    ) <= tol


@dataclass(frozen=True, eq=False)
class PlusForm:
    """Skew form h on V+ with h(u1, u2) = coefficient, extended by zero on V-."""

    coefficient: float
    basis: tuple

    @classmethod
    def standard(cls, T: ParaHypercomplexTriple, coefficient: float) -> "PlusForm":
        return cls(float(coefficient), eigenbasis(T, +1))

    def matrix(self, T: ParaHypercomplexTriple) -> np.ndarray:
        """Matrix H of h on V (h(X, Y) = X^T H Y)."""
        U = np.column_stack(self.basis)
        proj = (ID4 + T.J2) / 2.0
        L = np.linalg.pinv(U) @ proj  # V+ coordinates of the V+ component
        c = self.coefficient
        return L.T @ np.array([[0.0, c], [-c, 0.0]]) @ L

    def __call__(self, T: ParaHypercomplexTriple, X, Y) -> float:
        return float(np.asarray(X) @ self.matrix(T) @ np.asarray(Y))


def metric_from_plus_form(T: ParaHypercomplexTriple, h: PlusForm) -> BilinearForm4:
    """Compatible metric g(X, Y) = 2 (h(X, J1 Y) + h(Y, J1 X)).

    The factor 2 makes the inverse map h(A, B) = g(J1 A, B) / 2 on V+ exact.
    """
    if h.coefficient == 0:
        raise DegenerateFormError("plus-form coefficient is zero")
    H = h.matrix(T)
    HJ = H @ T.J1
    return BilinearForm4(2.0 * (HJ + HJ.T))


def plus_form_from_metric(g, T: ParaHypercomplexTriple) -> PlusForm:
    """Inverse of :func:`metric_from_plus_form`: h(A, B) = g(J1 A, B) / 2 on V+."""
    u1, u2 = eigenbasis(T, +1)
    G = _mat(g)
    return PlusForm(float(0.5 * (T.J1 @ u1) @ G @ u2), (u1, u2))


def averaged_form(g, T: ParaHypercomplexTriple) -> BilinearForm4:
    """h(X,Y) = g(X,Y) + g(J1X,J1Y) - g(J2X,J2Y) - g(J3X,J3Y); may be degenerate."""
    G = _mat(g)
    j1, j2, j3 = T
    return BilinearForm4(G + j1.T @ G @ j1 - j2.T @ G @ j2 - j3.T @ G @ j3)


def _require_compatible(g, T, which: str):
    res = compatibility_residuals(g, T)
    G = _mat(g)
    sym = float(np.max(np.abs(G - G.T))) / max(1.0, float(np.max(np.abs(G))))
    worst = max(max(res.values()), sym)
    if worst > COMPAT_TOL:
        raise CompatibilityError(f"{which} is not compatible with the triple (residual {worst:.3g})")


def _isotropic(G: np.ndarray, w: np.ndarray) -> bool:
    scale = max(float(np.max(np.abs(G))), 1e-300) * float(w @ w)
    return abs(float(w @ G @ w)) <= COMPAT_TOL * scale


def conformal_factor(g, h, T: ParaHypercomplexTriple, w) -> float:
    """lambda = g(w, w) / h(w, w), certified by g = lambda h entrywise."""
    G, H = _mat(g), _mat(h)
    w = np.asarray(w, dtype=float)
    _require_compatible(G, T, "g")
    _require_compatible(H, T, "h")
    if _isotropic(H, w):
        raise IsotropicVectorError("probe vector is isotropic for h")
    lam = float(w @ G @ w) / float(w @ H @ w)
    resid = float(np.max(np.abs(G - lam * H)))
    if resid > 1e-9 * max(float(np.max(np.abs(G))), 1e-300):
        raise CompatibilityError(f"g is not a multiple of h (residual {resid:.3g})")
    if lam == 0:
        raise CompatibilityError("conformal factor vanishes")
    return lam


@dataclass(frozen=True, eq=False)
class QuaternionicFrame:
    vectors: tuple  # (w, J1 w, J2 w, J3 w)
    determinant: float  # transition determinant to a g-orthonormal basis (e, J1 e, J2 e, J3 e)
    norm2: float  # g(w, w)

    def as_matrix(self) -> np.ndarray:
        return np.column_stack(self.vectors)


def quaternionic_frame(g, T: ParaHypercomplexTriple, w) -> QuaternionicFrame:
    G = _mat(g)
    w = np.asarray(w, dtype=float)
    _require_compatible(G, T, "g")
    if _isotropic(G, w):
        raise IsotropicVectorError("w is isotropic; (w, J1w, J2w, J3w) is not a basis")
    n2 = float(w @ G @ w)
    j1, j2, j3 = T
    F = np.column_stack([w, j1 @ w, j2 @ w, j3 @ w])
    # unit vector e with g(e, e) = +1: w itself or J2 w, which has the opposite norm
    e = w / np.sqrt(n2) if n2 > 0 else (j2 @ w) / np.sqrt(-n2)
    E = np.column_stack([e, j1 @ e, j2 @ e, j3 @ e])
    coords = np.linalg.solve(E, F)
    return QuaternionicFrame(tuple(F.T), float(np.linalg.det(coords)), n2)
