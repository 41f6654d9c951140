"""Almost para-hyperhermitian structures on a chart.

A structure is a metric field with three endomorphism fields satisfying
J1^2 = -Id, J2^2 = J3^2 = Id, J1 J2 = -J2 J1 = J3 and the compatibility
relations.  Its fundamental forms are Ω_i(X, Y) = g(J_i X, Y), i.e. the
component matrix of Ω_i is J_i^T g.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CharacterizationError,
    CompatibilityError,
    DegenerateFormError,
    NotParaHyperhermitianError,
)
from .fields import EndomorphismField, MetricField, as_points
from .forms import BASIS, INDEX, FormField, ext_d, nijenhuis_coordinate, wedge
from .jets import Jet, jinv, jmatmul
from .report import VerificationReport
from .sampling import DEFAULT_BOX, sample_points
from .splitquat import ParaHypercomplexTriple

ALGEBRA_TOL = 1e-10
DERIV_TOL = 1e-9
NIJENHUIS_TOL = 1e-8
RECONSTRUCT_TOL = 1e-8
ID4 = np.eye(4)


@dataclass
class AlmostPHStructure:
    g: MetricField
    J1: EndomorphismField
    J2: EndomorphismField
    J3: EndomorphismField
    box: tuple = DEFAULT_BOX

    @classmethod
    def constant(cls, g, T: ParaHypercomplexTriple, box=DEFAULT_BOX) -> "AlmostPHStructure":
        G = g.matrix if hasattr(g, "matrix") else np.asarray(g, dtype=float)
        return cls(
            MetricField.constant(G),
            EndomorphismField.constant(T.J1),
            EndomorphismField.constant(T.J2),
            EndomorphismField.constant(T.J3),
            box,
        )

    def endomorphisms(self) -> tuple[EndomorphismField, EndomorphismField, EndomorphismField]:
        return self.J1, self.J2, self.J3

    def residuals(self, pts) -> dict[str, np.ndarray]:
        """Per-point residuals of the algebra and compatibility relations (relative to |g|)."""
        pts = as_points(pts)
        G = self.g.at(pts)
        j1, j2, j3 = (J.at(pts) for J in self.endomorphisms())
        scale = np.maximum(np.max(np.abs(G), axis=(1, 2)), 1e-300)

        def mx(a):
            return np.max(np.abs(a), axis=(1, 2))

        def gram(J):
            return np.einsum("nai,nab,nbj->nij", J, G, J)

        return {
            "J1^2+Id": mx(j1 @ j1 + ID4),
            "J2^2-Id": mx(j2 @ j2 - ID4),
            "J3^2-Id": mx(j3 @ j3 - ID4),
            "J1J2+J2J1": mx(j1 @ j2 + j2 @ j1),
            "J1J2-J3": mx(j1 @ j2 - j3),
            "g-symmetric": mx(G - np.swapaxes(G, 1, 2)) / scale,
            "J1-isometry": mx(gram(j1) - G) / scale,
            "J2-anti-isometry": mx(gram(j2) + G) / scale,
            "J3-anti-isometry": mx(gram(j3) + G) / scale,
        }

    def check(self, pts, tol: float = ALGEBRA_TOL) -> VerificationReport:
        pts = as_points(pts)
        rep = VerificationReport("structure", samples=pts.shape[0])
        for name, r in self.residuals(pts).items():
            rep.add(name, r, tol)
        return rep

    def validate(self, pts, tol: float = ALGEBRA_TOL) -> None:
        rep = self.check(pts, tol)
        if not rep.passed:
            bad = ", ".join(f"{c.name}={c.max:.3g}" for c in rep.failures())
            raise CompatibilityError(f"not an almost para-hyperhermitian structure: {bad}")


@dataclass
class FormTriple:
    O1: FormField
    O2: FormField
    O3: FormField
    box: tuple = DEFAULT_BOX
    metadata: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.O1, self.O2, self.O3))

    def sample(self, n: int = 50, seed: int = 0) -> np.ndarray:
        return sample_points(n, seed, self.box)


def _form_matrix(J: EndomorphismField, g: MetricField):
    return lambda pts: jmatmul(J.jet(pts).swap_last(), g.jet(pts))


def fundamental_forms(S: AlmostPHStructure, samples=None, tol: float = ALGEBRA_TOL) -> FormTriple:
    """Ω_i(X, Y) = g(J_i X, Y).  When ``samples`` is given the structure is validated there."""
    if samples is not None:
        pts = as_points(samples)
        S.validate(pts, tol)
        for J in S.endomorphisms():
            A = np.einsum("nai,nab->nib", J.at(pts), S.g.at(pts))
            anti = np.max(np.abs(A + np.swapaxes(A, 1, 2)))
            if anti > tol * max(1.0, np.max(np.abs(A))):
                raise CompatibilityError(f"fundamental form is not antisymmetric (residual {anti:.3g})")
    forms = [FormField.from_matrix_jet(_form_matrix(J, S.g)) for J in S.endomorphisms()]
    return FormTriple(*forms, box=S.box)


def antisymmetry_residual(S: AlmostPHStructure, pts) -> np.ndarray:
    pts = as_points(pts)
    G = S.g.at(pts)
    out = np.zeros(pts.shape[0])
    for J in S.endomorphisms():
        A = np.einsum("nai,nab->nib", J.at(pts), G)
        out = np.maximum(out, np.max(np.abs(A + np.swapaxes(A, 1, 2)), axis=(1, 2)))
    return out


def squares(F: FormTriple, pts) -> dict[str, np.ndarray]:
    """Top coefficients of Ω_l ∧ Ω_m."""
    pts = as_points(pts)
    O = list(F)
    out = {}
    for l in range(3):
        for m in range(l, 3):
            out[f"{l + 1}{m + 1}"] = wedge(O[l], O[m]).top(pts)
    return out


def check_phc_algebra(F: FormTriple, pts, tol: float = DERIV_TOL, seed: int | None = None) -> VerificationReport:
    """Residuals of -Ω1² = Ω2² = Ω3² and Ω_l ∧ Ω_m = 0 (l ≠ m), as top-form coefficients."""
    pts = as_points(pts)
    sq = squares(F, pts)
    rep = VerificationReport("phc-algebra", seed=seed, samples=pts.shape[0])
    rep.add("-O1^2-O2^2", -sq["11"] - sq["22"], tol)
    rep.add("O2^2-O3^2", sq["22"] - sq["33"], tol)
    rep.add("O1^O2", sq["12"], tol)
    rep.add("O1^O3", sq["13"], tol)
    rep.add("O2^O3", sq["23"], tol)
    return rep


# ---------------------------------------------------------------------------
# Lee form

def _wedge_one_matrix(omega: np.ndarray) -> np.ndarray:
    """M[n, K, a]: coefficient of dx^K in dx^a ∧ Ω, for 2-form coefficients ``omega`` (N, 6)."""
    n = omega.shape[0]
    M = np.zeros((n, 4, 4), dtype=omega.dtype)
    for a in range(4):
        for p, (i, j) in enumerate(BASIS[2]):
            idx = (a, i, j)
            if len(set(idx)) < 3:
                continue
            order = sorted(idx)
            perm = [order.index(v) for v in idx]
            sign = 1
            for x in range(3):
                for y in range(x + 1, 3):
                    if perm[x] > perm[y]:
                        sign = -sign
            M[:, INDEX[3][tuple(order)], a] += sign * omega[:, p]
    return M


def lee_form_solutions(F: FormTriple, pts) -> list[np.ndarray]:
    """θ_l solving θ ∧ Ω_l = dΩ_l pointwise for l = 1, 2, 3 (each (N, 4))."""
    pts = as_points(pts)
    sols = []
    for O in F:
        om = O.at(pts)
        dO = ext_d(O).at(pts)
        M = _wedge_one_matrix(om)
        det = np.linalg.det(M)
        scale = np.maximum(np.max(np.abs(M), axis=(1, 2)), 1e-300) ** 4
        if np.any(np.abs(det) <= 1e-12 * scale):
            raise DegenerateFormError("θ ↦ θ∧Ω is singular: a fundamental form degenerates at a sample point")
        sols.append(np.linalg.solve(M, dO[..., None])[..., 0])
    return sols


def lee_form(F: FormTriple, pts, tol: float = DERIV_TOL) -> np.ndarray:
    """The Lee form from l = 1, cross-checked against l = 2, 3."""
    sols = lee_form_solutions(F, pts)
    disc = max(float(np.max(np.abs(sols[0] - s))) for s in sols[1:])
    if disc > tol:
        raise NotParaHyperhermitianError(
            f"dΩ_l = θ∧Ω_l has no common solution θ (discrepancy {disc:.3g})"
        )
    return sols[0]


def lee_form_report(F: FormTriple, pts, tol: float = DERIV_TOL, seed: int | None = None) -> VerificationReport:
    sols = lee_form_solutions(F, pts)
    rep = VerificationReport("lee-form", seed=seed, samples=as_points(pts).shape[0])
    rep.add("theta1-theta2", sols[0] - sols[1], tol)
    rep.add("theta1-theta3", sols[0] - sols[2], tol)
    return rep


def hypersymplectic_check(F: FormTriple, pts, tol: float = DERIV_TOL, seed: int | None = None) -> VerificationReport:
    """Closedness of each Ω_l plus the algebraic relations."""
    pts = as_points(pts)
    rep = VerificationReport("hypersymplectic", seed=seed, samples=pts.shape[0])
    for l, O in enumerate(F, start=1):
        rep.add(f"dO{l}", np.max(np.abs(ext_d(O).at(pts)), axis=1), tol)
    rep.extend(check_phc_algebra(F, pts, tol, seed))
    return rep


def integrability_report(
    S: AlmostPHStructure, pts, tol: float = NIJENHUIS_TOL, seed: int | None = None
) -> VerificationReport:
    """Max |N_J| over coordinate pairs for J1 (ε = -1), J2 and J3 (ε = +1)."""
    pts = as_points(pts)
    rep = VerificationReport("integrability", seed=seed, samples=pts.shape[0])
    for name, J, eps in (("N_J1", S.J1, -1), ("N_J2", S.J2, 1), ("N_J3", S.J3, 1)):
        N = nijenhuis_coordinate(J, pts, eps, tol=1e-8)
        rep.add(name, np.max(np.abs(N), axis=(1, 2, 3)), tol)
    return rep


# ---------------------------------------------------------------------------
# reconstruction

def _flat_matrix(O: FormField):
    """Jet of the matrix of X ↦ Ω(X, ·): (Ω♭)_{ba} = Ω_{ab}."""
    rows = [I[0] for I in BASIS[2]]
    cols = [I[1] for I in BASIS[2]]

    def fn(pts):
        c = O.jet(pts)
        n = pts.shape[0]
        zero = Jet.constant(np.zeros(n, dtype=c.dtype))
        entries = [[zero] * 4 for _ in range(4)]
        for p, (i, j) in enumerate(zip(rows, cols)):
            entries[j][i] = c[:, p]
            entries[i][j] = -c[:, p]
        return Jet.stack([Jet.stack(r, axis=-1) for r in entries], axis=1)

    return fn


def structure_from_forms(F: FormTriple, samples=None, tol: float = RECONSTRUCT_TOL) -> AlmostPHStructure:
    """Recover (g, J1, J2, J3) from the fundamental forms.

    J1 = (Ω3♭)^{-1} Ω2♭, g(X, Y) = Ω1(X, J1 Y), J2 = (g♭)^{-1} Ω2♭, J3 = J1 J2,
    where Ω♭ X = Ω(X, ·).  The algebraic relations are checked first at
    ``samples`` (default: 20 points of the triple's box).
    """
    pts = F.sample(20) if samples is None else as_points(samples)
    sq = squares(F, pts)
    scale = max(1.0, float(np.max(np.abs(sq["33"]))))
    rep = check_phc_algebra(F, pts, tol * scale)
    if not rep.passed:
        bad = ", ".join(f"{c.name}={c.max:.3g}" for c in rep.failures())
        raise CharacterizationError(f"forms violate the algebraic relations: {bad}")
    f1, f2, f3 = (_flat_matrix(O) for O in F)
    A3 = f3(pts).val
    if np.any(np.abs(np.linalg.det(A3)) <= 1e-12 * np.maximum(np.max(np.abs(A3), axis=(1, 2)), 1e-300) ** 4):
        raise DegenerateFormError("Ω3 is degenerate at a sample point")

    def j1(p):
        return jmatmul(jinv(f3(p)), f2(p))

    def gmat(p):
        # g_ab = Ω1(∂_a, J1 ∂_b) = (Ω1 matrix) J1, with Ω1 matrix = transpose of Ω1♭
        return _real(jmatmul(f1(p).swap_last(), j1(p)))

    def j2(p):
        return jmatmul(jinv(gmat(p)), f2(p))

    def j3(p):
        return jmatmul(j1(p), j2(p))

    return AlmostPHStructure(
        MetricField(gmat),
        EndomorphismField(lambda p: _real(j1(p))),
        EndomorphismField(lambda p: _real(j2(p))),
        EndomorphismField(lambda p: _real(j3(p))),
        F.box,
    )


def _real(j: Jet) -> Jet:
    if np.iscomplexobj(j.val):
        return j.real
    return j
