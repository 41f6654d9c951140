"""Walker metrics in (x, y, z, t) coordinates and their proper structure.

The metric has the block form

    0 0 1 0
    0 0 0 1
    1 0 a c
    0 1 c b

so ∂x, ∂y span a null plane.  The frame

    e1 = ((1-a)/2) ∂x + ∂z,          e3 = -((1+a)/2) ∂x + ∂z,
    e2 = -c ∂x + ((1-b)/2) ∂y + ∂t,  e4 = -c ∂x - ((1+b)/2) ∂y + ∂t

is orthonormal with g(e1,e1) = g(e2,e2) = 1, g(e3,e3) = g(e4,e4) = -1, and
the proper structure acts on it as the canonical triple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .curvature import christoffel, ricci, weyl_split
from .errors import ValidationError
from .fields import EndomorphismField, ExprField, MetricField, as_points
from .forms import ext_d
from .jets import Jet, jmatmul
from .report import VerificationReport
from .splitquat import canonical_triple
from .structures import AlmostPHStructure, fundamental_forms, integrability_report
from .sampling import DEFAULT_BOX

ETA = np.diag([1.0, 1.0, -1.0, -1.0])


def _expr(e) -> ex.Expr:
    if isinstance(e, ex.Expr):
        return e
    if isinstance(e, (int, float)):
        return ex.Const(float(e))
    return ex.parse(str(e), ex.REAL_CHART)


@dataclass(frozen=True)
class WalkerData:
    a: ex.Expr
    b: ex.Expr
    c: ex.Expr

    def __init__(self, a="0", b="0", c="0"):
        object.__setattr__(self, "a", _expr(a))
        object.__setattr__(self, "b", _expr(b))
        object.__setattr__(self, "c", _expr(c))

    def texts(self) -> dict[str, str]:
        return {"a": ex.to_text(self.a), "b": ex.to_text(self.b), "c": ex.to_text(self.c)}


@dataclass(frozen=True)
class PCFamily:
    K: ex.Expr
    P: ex.Expr
    T: ex.Expr
    xi: ex.Expr
    eta: ex.Expr
    gamma: ex.Expr

    def __init__(self, K="0", P="0", T="0", xi="0", eta="0", gamma="0"):
        vals = {"K": K, "P": P, "T": T, "xi": xi, "eta": eta, "gamma": gamma}
        for name, v in vals.items():
            e = _expr(v)
            bad = ex.free_variables(e) & {"x", "y"}
            if bad:
                raise ValidationError(f"{name} must depend on (z, t) only; found {', '.join(sorted(bad))}")
            object.__setattr__(self, name, e)


def random_zt_expression(rng: np.random.Generator) -> str:
    """Random polynomial of degree <= 2 in (z, t) plus one sin/cos term."""
    c = np.round(rng.uniform(-1, 1, 8), 3)
    trig = rng.choice(["sin", "cos"])
    return (
        f"{c[0]} + {c[1]}*z + {c[2]}*t + {c[3]}*z*t + {c[4]}*z^2 + {c[5]}*t^2"
        f" + {c[6]}*{trig}({c[7]}*z + {c[6]}*t + 0.5)"
    )


def random_pc_family(rng: np.random.Generator) -> PCFamily:
    return PCFamily(*(random_zt_expression(rng) for _ in range(6)))


def random_hk_data(rng: np.random.Generator) -> WalkerData:
    return WalkerData(*(random_zt_expression(rng) for _ in range(3)))


def pc_family(f: PCFamily) -> WalkerData:
    """a = x²K + xP + ξ, b = y²K + yT + η, c = xyK + ½xT + ½yP + γ."""
    x, y = ex.Var("x"), ex.Var("y")
    half = ex.Const(0.5)
    a = ex.add(ex.add(ex.mul(ex.power(x, 2), f.K), ex.mul(x, f.P)), f.xi)
    b = ex.add(ex.add(ex.mul(ex.power(y, 2), f.K), ex.mul(y, f.T)), f.eta)
    c = ex.add(
        ex.add(ex.add(ex.mul(ex.mul(x, y), f.K), ex.mul(ex.mul(half, x), f.T)), ex.mul(ex.mul(half, y), f.P)),
        f.gamma,
    )
    return WalkerData(a, b, c)


def walker_metric(d: WalkerData) -> MetricField:
    return MetricField.from_entries(
        [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, d.a, d.c], [0, 1, d.c, d.b]]
    )


def frame(d: WalkerData):
    """Jet closure of the frame matrix E (columns e1..e4)."""
    fa, fb, fc = ExprField(d.a), ExprField(d.b), ExprField(d.c)

    def fn(pts):
        a, b, c = fa.jet(pts), fb.jet(pts), fc.jet(pts)
        n = pts.shape[0]
        zero = Jet.constant(np.zeros(n))
        one = Jet.constant(np.ones(n))
        cols = [
            [(1 - a) * 0.5, zero, one, zero],
            [-c, (1 - b) * 0.5, zero, one],
            [-(1 + a) * 0.5, zero, one, zero],
            [-c, -(1 + b) * 0.5, zero, one],
        ]
        # E[n, i, k] = i-th component of e_k
        return Jet.stack([Jet.stack(col, axis=-1) for col in cols], axis=-1)

    return fn


def proper_structure(d: WalkerData, box=DEFAULT_BOX) -> AlmostPHStructure:
    """J_i = E C_i E^{-1} with E^{-1} = η E^T g and C_i the canonical triple."""
    g = walker_metric(d)
    E = frame(d)
    T = canonical_triple()

    def endo(C):
        C = np.asarray(C)

        def fn(pts):
            Ej = E(pts)
            Einv = jmatmul(Jet.constant(np.broadcast_to(ETA, (pts.shape[0], 4, 4)).copy()), jmatmul(Ej.swap_last(), g.jet(pts)))
            return jmatmul(jmatmul(Ej, Jet.constant(np.broadcast_to(C, (pts.shape[0], 4, 4)).copy())), Einv)

        return EndomorphismField(fn)

    return AlmostPHStructure(g, endo(T.J1), endo(T.J2), endo(T.J3), box)


def frame_gram(d: WalkerData, pts) -> np.ndarray:
    """g(e_i, e_j) at ``pts``; should equal diag(1, 1, -1, -1)."""
    pts = as_points(pts)
    E = frame(d)(pts).val
    return np.einsum("nai,nab,nbj->nij", E, walker_metric(d).at(pts), E)


def _values(e: ex.Expr, pts) -> np.ndarray:
    return np.real_if_close(ex.eval_batch(ex.lower(e), pts, ex.REAL_CHART).val)


def _d(e: ex.Expr, *vars_: str) -> ex.Expr:
    for v in vars_:
        e = ex.diff(e, v)
    return e


def pc_form_check(d: WalkerData, pts, tol: float = 1e-9, seed: int | None = None) -> VerificationReport:
    """Shape residuals for the polynomial form of the integrable (PC) case."""
    pts = as_points(pts)
    a, b, c = d.a, d.b, d.c
    rep = VerificationReport("pc-form", seed=seed, samples=pts.shape[0])
    v = lambda e: _values(e, pts)  # noqa: E731
    rep.add("d3a/dx3", v(_d(a, "x", "x", "x")), tol)
    rep.add("da/dy", v(_d(a, "y")), tol)
    rep.add("d3b/dy3", v(_d(b, "y", "y", "y")), tol)
    rep.add("db/dx", v(_d(b, "x")), tol)
    rep.add("d2b/dx2", v(_d(b, "x", "x")), tol)
    rep.add("d2a/dx2-d2b/dy2", v(_d(a, "x", "x")) - v(_d(b, "y", "y")), tol)
    rep.add("d2a/dx2-2d2c/dxdy", v(_d(a, "x", "x")) - 2 * v(_d(c, "x", "y")), tol)
    rep.add("d2c/dx2", v(_d(c, "x", "x")), tol)
    rep.add("d2c/dy2", v(_d(c, "y", "y")), tol)
    rep.add("dc/dy-da/dx/2", v(_d(c, "y")) - 0.5 * v(_d(a, "x")), tol)
    rep.add("dc/dx-db/dy/2", v(_d(c, "x")) - 0.5 * v(_d(b, "y")), tol)
    return rep


def declared_orientation(d: WalkerData):
    """vol = -Ω1²/2 for the proper structure, as a 4-form field."""
    F = fundamental_forms(proper_structure(d))
    return (F.O1 ^ F.O1) * (-0.5)


def hk_check(
    d: WalkerData,
    pts,
    tol: float = 1e-9,
    curvature_tol: float = 1e-8,
    seed: int | None = None,
) -> VerificationReport:
    """Residuals certifying the para-hyperkähler (HK) case."""
    pts = as_points(pts)
    rep = VerificationReport("walker-hk", seed=seed, samples=pts.shape[0])
    for name, e in (("a", d.a), ("b", d.b), ("c", d.c)):
        for var in ("x", "y"):
            rep.add(f"d{name}/d{var}", _values(ex.diff(e, var), pts), tol)
    S = proper_structure(d)
    F = fundamental_forms(S)
    for l, O in enumerate(F, start=1):
        rep.add(f"dO{l}", np.max(np.abs(ext_d(O).at(pts)), axis=1), tol)
    g = walker_metric(d)
    gamma = christoffel(g, pts)
    rep.add("nabla_dx", np.max(np.abs(gamma[:, :, :, 0]), axis=(1, 2)), curvature_tol)
    rep.add("nabla_dy", np.max(np.abs(gamma[:, :, :, 1]), axis=(1, 2)), curvature_tol)
    Ric, _ = ricci(g, pts)
    rep.add("ricci", np.max(np.abs(Ric), axis=(1, 2)), curvature_tol)
    vol = declared_orientation(d)
    rep.add("weyl_minus", weyl_split(g, vol, pts).norm_minus, curvature_tol)
    return rep


def pc_check(d: WalkerData, pts, tol: float = 1e-8, seed: int | None = None) -> VerificationReport:
    """Shape residuals, Nijenhuis maxima and W- for a candidate PC instance."""
    pts = as_points(pts)
    rep = VerificationReport("walker-pc", seed=seed, samples=pts.shape[0])
    rep.extend(pc_form_check(d, pts, seed=seed))
    rep.extend(integrability_report(proper_structure(d), pts, tol, seed))
    g = walker_metric(d)
    rep.add("weyl_minus", weyl_split(g, declared_orientation(d), pts).norm_minus, tol)
    return rep
