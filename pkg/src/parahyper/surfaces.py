"""Explicit structures on Inoue surfaces S± and Kamada's torus / Kodaira families.

All charts use real coordinates (x1, y1, x2, y2).  On H × C these are
z = x1 + i y1, w = x2 + i y2; on C² they are z1 = x1 + i y1, z2 = x2 + i y2.
Forms are complex-valued ``FormField`` objects in this real chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import DomainError, LatticeError, ValidationError
from .fields import ExprField, VectorField, as_points
from .forms import ChartMap, FormField, ext_d, lie_bracket, pullback_endomorphism, pullback_form, pullback_metric
from .report import VerificationReport
from .splitquat import ParaHypercomplexTriple, conformal_factor
from .structures import (
    AlmostPHStructure,
    FormTriple,
    check_phc_algebra,
    lee_form_solutions,
    structure_from_forms,
)

CHART = ex.COMPLEX_CHART
INOUE_BOX = ((-1.0, 1.0), (0.5, 2.0), (-0.7, 0.7), (-0.7, 0.7))
KAMADA_BOX = ((-1.0, 1.0),) * 4

# ---------------------------------------------------------------------------
# complex coordinate forms

dx1, dy1, dx2, dy2 = (FormField.differential(k) for k in range(4))
dz1 = dx1 + dy1 * 1j
dz2 = dx2 + dy2 * 1j
dzb1 = dx1 - dy1 * 1j
dzb2 = dx2 - dy2 * 1j


def _field(text_or_expr) -> ExprField:
    return ExprField(text_or_expr, CHART)


def _v(name: str) -> ex.Expr:
    return ex.Var(name)


# ---------------------------------------------------------------------------
# Inoue surfaces

@dataclass
class InoueParams:
    p: int = 1
    q: int = 1
    r: int = 1
    t: complex = 0j
    N: tuple = ((2, 1), (1, 1))
    c: tuple = (0.0, 0.0)
    alpha: float = field(init=False)
    a: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)
    s: float = field(init=False)
    A: float = field(init=False)

    def __post_init__(self):
        N = np.asarray(self.N, dtype=float)
        if N.shape != (2, 2) or np.any(N != np.round(N)):
            raise ValidationError("N must be a 2x2 integer matrix")
        if round(np.linalg.det(N)) != 1:
            raise ValidationError("N must have determinant 1")
        if self.r == 0:
            raise ValidationError("r must be nonzero")
        ev, vecs = np.linalg.eig(N)
        if np.any(np.abs(ev.imag) > 0):
            raise ValidationError("N has no real eigenvalue > 1")
        ev = ev.real
        k = int(np.argmax(ev))
        if ev[k] <= 1:
            raise ValidationError("N has no real eigenvalue > 1")
        self.alpha = float(ev[k])
        self.a = _fix_sign(vecs[:, k].real)
        self.b = _fix_sign(vecs[:, 1 - k].real)
        self.t = complex(self.t)
        self.c = tuple(float(v) for v in self.c)
        self.s = self.t.imag / math.log(self.alpha)
        self.A = float((self.b[0] * self.a[1] - self.b[1] * self.a[0]) / self.r)

    def eigen_residuals(self) -> tuple[float, float]:
        N = np.asarray(self.N, dtype=float)
        return (
            float(np.max(np.abs(N @ self.a - self.alpha * self.a))),
            float(np.max(np.abs(N @ self.b - self.b / self.alpha))),
        )


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Unit eigenvector with its first nonzero entry positive."""
    v = v / np.linalg.norm(v)
    nz = v[np.abs(v) > 1e-14]
    return -v if nz.size and nz[0] < 0 else v


@dataclass
class InoueForms:
    theta1: FormField
    theta2: FormField
    E1: VectorField
    E2: VectorField


def _u(P: InoueParams) -> ex.Expr:
    """Im w - s ln(Im z)."""
    return ex.sub(_v("y2"), ex.mul(ex.Const(P.s), ex.call("ln", _v("y1"))))


def inoue_forms(P: InoueParams) -> InoueForms:
    inv_y1 = _field(ex.div(ex.ONE, _v("y1")))
    coef = _field(ex.div(_u(P), _v("y1")))
    theta1 = dz1 * inv_y1
    theta2 = dz2 - dz1 * coef
    y1 = _field("y1")
    u = _field(_u(P))
    # ∂z = ½(∂x1 - i ∂y1), ∂w = ½(∂x2 - i ∂y2)
    E1 = VectorField.from_components([y1 * 0.5, y1 * (-0.5j), u * 0.5, u * (-0.5j)])
    E2 = VectorField.from_components([0.0, 0.0, 0.5, -0.5j])
    return InoueForms(theta1, theta2, E1, E2)


def _check_domain(pts):
    if np.any(pts[:, 1] <= 0):
        raise DomainError("Inoue forms need Im z > 0", "y1")


def inoue_triple(P: InoueParams) -> FormTriple:
    f = inoue_forms(P)
    Om = f.theta1 ^ f.theta2
    O1 = (f.theta1 ^ f.theta2.conj()).real
    return FormTriple(O1, Om.real, Om.imag, box=INOUE_BOX)


def inoue_structure(P: InoueParams) -> tuple[FormTriple, FormField]:
    """The triple (Ω1, Re Ω, Im Ω) and the Lee form θ = -Im θ1."""
    F = inoue_triple(P)
    theta1 = inoue_forms(P).theta1
    return F, -theta1.imag


def inoue_phh_structure(P: InoueParams) -> AlmostPHStructure:
    F = inoue_triple(P)
    return structure_from_forms(F, _default_inoue_points())


def _default_inoue_points():
    from .sampling import sample_points

    return sample_points(20, 0, INOUE_BOX)


def complex_structure_from_forms(forms, pts) -> np.ndarray:
    """J with θ∘J = iθ for the given (1,0)-forms (real 4×4 per point)."""
    pts = as_points(pts)
    rows = [f.at(pts) for f in forms]
    Theta = np.stack(rows + [np.conj(r) for r in rows], axis=1)
    D = np.diag([1j, 1j, -1j, -1j])
    J = np.linalg.solve(Theta, D @ Theta)
    return J.real


def inoue_structure_report(P: InoueParams, pts, tol: float = 1e-9, seed: int | None = None) -> VerificationReport:
    """Structure equations, (phc) algebra and Lee form for S+."""
    pts = as_points(pts)
    _check_domain(pts)
    f = inoue_forms(P)
    t1, t2 = f.theta1, f.theta2
    t1b, t2b = t1.conj(), t2.conj()
    half_i = 1.0 / 2j
    rep = VerificationReport("inoue-splus", seed=seed, samples=pts.shape[0])

    def add(name, form):
        rep.add(name, np.max(np.abs(form.at(pts)), axis=1), tol)

    rep.add("theta_i(E_j)-delta_ij", _duality(f, pts), tol)
    add("d_theta1", ext_d(t1) - (t1 ^ t1b) * (-half_i))
    add("d_theta2", ext_d(t2) - ((t1 ^ t2) - (t1 ^ t2b) + (t1 ^ t1b) * P.s) * half_i)
    Om = t1 ^ t2
    lee = -t1.imag
    add("dOmega+Im_theta1^Omega", ext_d(Om) - (lee ^ Om))
    F, _ = inoue_structure(P)
    add("dO1+Im_theta1^O1", ext_d(F.O1) - (lee ^ F.O1))
    vol = (t1 ^ t1b ^ t2 ^ t2b) * 0.5
    add("O1^2-half_vol", (F.O1 ^ F.O1) - vol)
    rep.extend(check_phc_algebra(F, pts, tol, seed))
    sols = lee_form_solutions(F, pts)
    target = lee.at(pts)
    for l, s_ in enumerate(sols, start=1):
        rep.add(f"lee{l}+Im_theta1", np.max(np.abs(s_ - target), axis=1), tol)
    E12 = lie_bracket(f.E1, f.E2).at(pts)
    rep.add("[E1,E2]+E2/2i", np.max(np.abs(E12 + half_i * f.E2.at(pts)), axis=1), tol)
    return rep


def _duality(f: InoueForms, pts) -> np.ndarray:
    out = np.zeros(pts.shape[0])
    for i, th in enumerate((f.theta1, f.theta2)):
        for j, E in enumerate((f.E1, f.E2)):
            val = th.evaluate(pts, E.at(pts))
            out = np.maximum(out, np.abs(val - (1.0 if i == j else 0.0)))
    return out


def inoue_generators(P: InoueParams) -> dict[str, ChartMap]:
    """φ0(z,w) = (αz, w+t), φi(z,w) = (z+a_i, w+b_i z+c_i), φ3(z,w) = (z, w+A), as real affine maps."""
    al = P.alpha
    gens = {"phi0": ChartMap.affine(np.diag([al, al, 1.0, 1.0]), [0.0, 0.0, P.t.real, P.t.imag])}
    for i in (0, 1):
        ai, bi, ci = float(P.a[i]), float(P.b[i]), P.c[i]
        M = np.eye(4)
        M[2, 0] = bi
        M[3, 1] = bi
        gens[f"phi{i + 1}"] = ChartMap.affine(M, [ai, 0.0, ci, 0.0])
    gens["phi3"] = ChartMap.affine(np.eye(4), [0.0, 0.0, P.A, 0.0])
    return gens


def inoue_invariance_report(P: InoueParams, pts, tol: float = 1e-9, seed: int | None = None) -> VerificationReport:
    pts = as_points(pts)
    f = inoue_forms(P)
    rep = VerificationReport("inoue-invariance", seed=seed, samples=pts.shape[0])
    for name, phi in inoue_generators(P).items():
        for tn, th in (("theta1", f.theta1), ("theta2", f.theta2)):
            diff = pullback_form(th, phi, pts) - th.at(pts)
            rep.add(f"{name}*{tn}-{tn}", np.max(np.abs(diff), axis=1), tol)
    return rep


SIGMA = ChartMap.affine(np.diag([1.0, 1.0, -1.0, -1.0]), [0.0, 0.0, 0.0, 0.0])


def sigma_obstruction_report(P: InoueParams, pts, tol: float = 1e-9, seed: int | None = None) -> VerificationReport:
    """σ(z, w) = (z, -w): sign checks, preserved triple, and the anti-isometry factor."""
    if P.t != 0:
        raise ValidationError("the S- involution needs t = 0")
    pts = as_points(pts)
    _check_domain(pts)
    f = inoue_forms(P)
    F, _ = inoue_structure(P)
    Om = f.theta1 ^ f.theta2
    rep = VerificationReport("inoue-sminus", seed=seed, samples=pts.shape[0])

    def pb(form, sign, name, tol_=tol * 0.1):
        diff = pullback_form(form, SIGMA, pts) - sign * form.at(pts)
        rep.add(name, np.max(np.abs(diff), axis=1), tol_)

    pb(f.theta1, 1, "s*theta1-theta1")
    pb(f.theta2, -1, "s*theta2+theta2")
    pb(F.O1, -1, "s*O1+O1")
    pb(Om, -1, "s*Omega+Omega")
    twice = SIGMA(SIGMA(pts))
    rep.add("sigma^2-id", np.max(np.abs(twice - pts), axis=1), tol * 0.1)
    S = structure_from_forms(F, pts[: min(20, len(pts))])
    for name, J in (("J1", S.J1), ("J2", S.J2), ("J3", S.J3)):
        diff = pullback_endomorphism(J, SIGMA, pts) - J.at(pts)
        rep.add(f"s*{name}-{name}", np.max(np.abs(diff), axis=(1, 2)), tol)
    g_pb = pullback_metric(S.g, SIGMA, pts)
    G = S.g.at(pts)
    Js = [J.at(pts) for J in (S.J1, S.J2, S.J3)]
    factors = np.empty(pts.shape[0])
    for n in range(pts.shape[0]):
        T = ParaHypercomplexTriple(Js[0][n], Js[1][n], Js[2][n])
        w = _probe(G[n])
        factors[n] = conformal_factor(g_pb[n], G[n], T, w)
    rep.add("conformal_factor+1", factors + 1.0, tol)
    rep.add_flag("no_invariant_compatible_metric", bool(np.all(factors < 0)), float(np.max(factors)))
    rep.metadata = {"conformal_factor_min": float(np.min(factors)), "conformal_factor_max": float(np.max(factors))}
    return rep


def _probe(G: np.ndarray) -> np.ndarray:
    """A coordinate direction (or sum of two) that is not isotropic for G."""
    cands = [np.eye(4)[k] for k in range(4)] + [np.eye(4)[i] + np.eye(4)[j] for i in range(4) for j in range(i + 1, 4)]
    scale = np.max(np.abs(G))
    for w in cands:
        if abs(w @ G @ w) > 1e-6 * scale * (w @ w):
            return w
    raise ValidationError("no non-isotropic probe direction found")


# ---------------------------------------------------------------------------
# Kamada families

def ddbar(phi: ex.Expr | str) -> FormField:
    """∂∂̄φ = Σ φ_{a b̄} dz_a ∧ dz̄_b from the real Hessian."""
    e = ex.lower(ex.parse(phi, CHART) if isinstance(phi, str) else phi)
    xs, ys = ("x1", "x2"), ("y1", "y2")
    dz, dzb = (dz1, dz2), (dzb1, dzb2)
    total = None

    def d2(u, v):
        return ex.diff(ex.diff(e, u), v)

    for a in range(2):
        for b in range(2):
            re_part = ex.add(d2(xs[a], xs[b]), d2(ys[a], ys[b]))
            im_part = ex.sub(d2(xs[a], ys[b]), d2(ys[a], xs[b]))
            coef = _field(re_part) * 0.25 + _field(im_part) * 0.25j
            term = (dz[a] ^ dzb[b]) * coef
            total = term if total is None else total + term
    return total


def _phi_expr(phi) -> ex.Expr:
    if isinstance(phi, ex.Expr):
        return phi
    if isinstance(phi, (int, float)):
        return ex.Const(float(phi))
    return ex.parse(str(phi), CHART)


def kamada_torus_forms(phi="0") -> FormTriple:
    """Ω1 = Im(dz1∧dz̄2) + (i/2)∂∂̄φ, Ω2 = Re(dz1∧dz2), Ω3 = Im(dz1∧dz2)."""
    base = (dz1 ^ dzb2).imag
    O1 = base + (ddbar(_phi_expr(phi)) * 0.5j).real
    w = dz1 ^ dz2
    return FormTriple(O1, w.real, w.imag, box=KAMADA_BOX, metadata={"kind": "torus"})


@dataclass
class KodairaLattice:
    a: tuple = (0j, 0j, 1 + 0j, 1j)
    b: tuple = (-1 + 0j, 0j, 0j, 0j)
    theta_angle: float = 0.0

    def __post_init__(self):
        self.a = tuple(complex(v) for v in self.a)
        self.b = tuple(complex(v) for v in self.b)
        if len(self.a) != 4 or len(self.b) != 4:
            raise ValidationError("a Kodaira lattice needs four a_i and four b_i")

    def residuals(self) -> dict[str, float]:
        a, b = self.a, self.b
        return {
            "a1": abs(a[0]),
            "a2": abs(a[1]),
            "Im(a3*conj(a4))-b1": abs((a[2] * a[3].conjugate()).imag - b[0]),
        }

    def generator(self, i: int) -> ChartMap:
        """ρ_i(z1, z2) = (z1 + a_i, z2 + conj(a_i) z1 + b_i) as a real affine map."""
        ai, bi = self.a[i], self.b[i]
        ar, aim = ai.real, ai.imag
        M = np.eye(4)
        M[2, 0], M[2, 1] = ar, aim
        M[3, 0], M[3, 1] = -aim, ar
        return ChartMap.affine(M, [ar, aim, bi.real, bi.imag])


def kodaira_lattice_check(L: KodairaLattice, tol: float = 1e-10) -> VerificationReport:
    rep = VerificationReport("kodaira-lattice", samples=1)
    for name, r in L.residuals().items():
        rep.add(name, r, tol)
    return rep


def kamada_kodaira_forms(phi="0", L: KodairaLattice | None = None, tol: float = 1e-10) -> FormTriple:
    """Ω1 = Im(dz1∧dz̄2) + i Re(z1) dz1∧dz̄1 + (i/2)∂∂̄φ, Ω2 + iΩ3 = e^{iθ} dz1∧dz2."""
    L = KodairaLattice() if L is None else L
    rep = kodaira_lattice_check(L, tol)
    if not rep.passed:
        bad = ", ".join(f"{c.name}={c.max:.3g}" for c in rep.failures())
        raise LatticeError(f"Kodaira lattice constraints violated: {bad}")
    base = (dz1 ^ dzb2).imag
    shear = ((dz1 ^ dzb1) * (_field("x1") * 1j)).real
    O1 = base + shear + (ddbar(_phi_expr(phi)) * 0.5j).real
    w = (dz1 ^ dz2) * complex(np.exp(1j * L.theta_angle))
    return FormTriple(O1, w.real, w.imag, box=KAMADA_BOX, metadata={"kind": "kodaira"})


def monge_ampere_residual(kind: str, phi, pts) -> np.ndarray:
    """Top coefficient of 4i(ω0 ∧ ∂∂̄φ) − ∂∂̄φ ∧ ∂∂̄φ, where ω0 = Im(dz1∧dz̄2) [+ i Re(z1) dz1∧dz̄1]."""
    pts = as_points(pts)
    D = ddbar(_phi_expr(phi))
    omega0 = (dz1 ^ dzb2).imag
    if kind == "kodaira":
        omega0 = omega0 + (dz1 ^ dzb1) * (_field("x1") * 1j)
    elif kind != "torus":
        raise ValidationError(f"unknown Monge-Ampere kind {kind!r}")
    val = ((omega0 ^ D) * 4j - (D ^ D)).top(pts)
    return np.real(val)


def kamada_generators(kind: str, L: KodairaLattice | None = None, periods=None) -> dict[str, ChartMap]:
    if kind == "kodaira":
        L = KodairaLattice() if L is None else L
        return {f"rho{i + 1}": L.generator(i) for i in range(4)}
    periods = np.eye(4) if periods is None else np.asarray(periods, dtype=float)
    return {f"tau{i + 1}": ChartMap.affine(np.eye(4), v) for i, v in enumerate(periods)}


def kamada_invariance_report(
    F: FormTriple, gens: dict[str, ChartMap], pts, phi=None, tol: float = 1e-9, seed: int | None = None
) -> VerificationReport:
    """Pullback residuals of the three forms (and of φ, when given) under the group generators."""
    pts = as_points(pts)
    rep = VerificationReport("kamada-invariance", seed=seed, samples=pts.shape[0])
    pf = _field(_phi_expr(phi)) if phi is not None else None
    for name, g in gens.items():
        if pf is not None:
            rep.add(f"phi*{name}-phi", pf.at(g(pts)) - pf.at(pts), tol)
        for l, O in enumerate(F, start=1):
            diff = pullback_form(O, g, pts) - O.at(pts)
            rep.add(f"{name}*O{l}-O{l}", np.max(np.abs(diff), axis=1), tol)
    return rep
