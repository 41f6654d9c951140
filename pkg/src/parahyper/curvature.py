"""Levi-Civita connection and curvature of a metric field on a chart.

Conventions:

* ``gamma[n, k, i, j] = Γ^k_ij`` with Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)
* ``R[n, l, i, j, k] = R^l_ijk``, the components of R(∂_i, ∂_j)∂_k with
  R(X, Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]
* ``Ric_jk = R^i_ijk`` and ``s = g^jk Ric_jk``; the round sphere has s > 0
* ``Rm[n, i, j, k, l] = g(R(∂_i, ∂_j)∂_k, ∂_l)``, so the unit sphere has
  Rm = ½ g ⊙ g (Kulkarni–Nomizu)

All functions are batched over points ``(N, 4)``; metric derivatives come
from the second-order jets of the metric field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMetricError
from .fields import MetricField, as_points
from .forms import BASIS, star_matrix_jet
from .report import VerificationReport

SINGULAR_TOL = 1e-12

# tolerance ladder
TOL_FLAT = 1e-8
TOL_RICCI = 1e-8
TOL_WEYL = 1e-8


def metric_derivatives(g: MetricField, pts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(g_ij, ∂_m g_ij, ∂_m∂_p g_ij) with derivative indices last."""
    j = g.jet(as_points(pts))
    G = np.real_if_close(j.val)
    if np.iscomplexobj(G):
        raise ValueError("metric field must be real")
    dG, ddG = np.real(j.grad), np.real(j.hess)
    det = np.linalg.det(G)
    scale = np.max(np.abs(G), axis=(1, 2)) ** 4
    if np.any(np.abs(det) <= SINGULAR_TOL * scale):
        raise SingularMetricError("metric is degenerate at a sample point")
    return G, dG, ddG


def _christoffel_parts(G, dG):
    ginv = np.linalg.inv(G)
    # lowered: gl[n, l, i, j] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    d = dG  # d[n, a, b, m] = ∂_m g_ab
    gl = 0.5 * (
        np.einsum("njli->nlij", d) + np.einsum("nilj->nlij", d) - np.einsum("nijl->nlij", d)
    )
    return ginv, gl


def christoffel(g: MetricField, pts) -> np.ndarray:
    G, dG, _ = metric_derivatives(g, pts)
    ginv, gl = _christoffel_parts(G, dG)
    return np.einsum("nkl,nlij->nkij", ginv, gl)


def _riemann_from_derivatives(G, dG, ddG):
    ginv, gl = _christoffel_parts(G, dG)
    gamma = np.einsum("nkl,nlij->nkij", ginv, gl)
    # ∂_m of the lowered symbols
    dgl = 0.5 * (
        np.einsum("njlim->nlijm", ddG) + np.einsum("niljm->nlijm", ddG) - np.einsum("nijlm->nlijm", ddG)
    )
    dginv = -np.einsum("nka,nabm,nbl->nklm", ginv, dG, ginv)
    dgamma = np.einsum("nklm,nlij->nkijm", dginv, gl) + np.einsum("nkl,nlijm->nkijm", ginv, dgl)
    # R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
    R = (
        np.einsum("nljki->nlijk", dgamma)
        - np.einsum("nlikj->nlijk", dgamma)
        + np.einsum("nlim,nmjk->nlijk", gamma, gamma)
        - np.einsum("nljm,nmik->nlijk", gamma, gamma)
    )
    return gamma, R, ginv


def riemann(g: MetricField, pts) -> np.ndarray:
    """R^l_ijk as ``R[n, l, i, j, k]``."""
    G, dG, ddG = metric_derivatives(g, pts)
    return _riemann_from_derivatives(G, dG, ddG)[1]


def lowered_riemann(g: MetricField, pts) -> np.ndarray:
    G, dG, ddG = metric_derivatives(g, pts)
    R = _riemann_from_derivatives(G, dG, ddG)[1]
    return np.einsum("nlm,nmijk->nijkl", G, R)


def ricci(g: MetricField, pts) -> tuple[np.ndarray, np.ndarray]:
    G, dG, ddG = metric_derivatives(g, pts)
    _, R, ginv = _riemann_from_derivatives(G, dG, ddG)
    Ric = np.einsum("niijk->njk", R)
    return Ric, np.einsum("njk,njk->n", ginv, Ric)


def kulkarni_nomizu(h: np.ndarray, k: np.ndarray) -> np.ndarray:
    """(h ⊙ k)_ijkl = h_il k_jk + h_jk k_il − h_ik k_jl − h_jl k_ik (batched)."""
    return (
        np.einsum("nil,njk->nijkl", h, k)
        + np.einsum("njk,nil->nijkl", h, k)
        - np.einsum("nik,njl->nijkl", h, k)
        - np.einsum("njl,nik->nijkl", h, k)
    )


def weyl_from_parts(G, Rm, Ric, s) -> np.ndarray:
    """Fully covariant Weyl tensor W = Rm − ½ (Ric − s/6 g) ⊙ g."""
    A = Ric - (s / 6.0)[:, None, None] * G
    return Rm - 0.5 * kulkarni_nomizu(A, G)


def weyl(g: MetricField, pts) -> np.ndarray:
    G, dG, ddG = metric_derivatives(g, pts)
    _, R, ginv = _riemann_from_derivatives(G, dG, ddG)
    Rm = np.einsum("nlm,nmijk->nijkl", G, R)
    Ric = np.einsum("niijk->njk", R)
    s = np.einsum("njk,njk->n", ginv, Ric)
    return weyl_from_parts(G, Rm, Ric, s)


def weyl_operator(W: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """6×6 matrix of the Weyl operator on 2-form coefficients (basis dx^a∧dx^b, a<b).

    (W ω)_ab = Σ_{c<d} W_ab^cd ω_cd.
    """
    Wup = np.einsum("nabkl,nkc,nld->nabcd", W, ginv, ginv)
    pairs = BASIS[2]
    M = np.empty(W.shape[:1] + (6, 6))
    for r, (a, b) in enumerate(pairs):
        for c_, (c, d) in enumerate(pairs):
            M[:, r, c_] = Wup[:, a, b, c, d]
    return M


def _block_basis(P: np.ndarray) -> np.ndarray:
    """Three independent columns of a rank-3 projector, chosen in index order."""
    cols: list[int] = []
    for k in range(6):
        trial = cols + [k]
        if np.linalg.matrix_rank(P[:, trial], tol=1e-9 * max(1.0, np.max(np.abs(P)))) == len(trial):
            cols = trial
        if len(cols) == 3:
            break
    return P[:, cols]


@dataclass
class WeylSplit:
    plus: np.ndarray  # (N, 6, 6) P+ W P+ on 2-form coefficients
    minus: np.ndarray
    plus_block: np.ndarray  # (N, 3, 3) in the basis P+ dx^ab of Λ+
    minus_block: np.ndarray

    @property
    def norm_plus(self) -> np.ndarray:
        return np.max(np.abs(self.plus), axis=(1, 2))

    @property
    def norm_minus(self) -> np.ndarray:
        return np.max(np.abs(self.minus), axis=(1, 2))


def weyl_split(g: MetricField, orientation, pts) -> WeylSplit:
    """Self-dual and anti-self-dual parts of the Weyl operator, P± = (Id ± ★)/2."""
    pts = as_points(pts)
    G, dG, ddG = metric_derivatives(g, pts)
    _, R, ginv = _riemann_from_derivatives(G, dG, ddG)
    Rm = np.einsum("nlm,nmijk->nijkl", G, R)
    Ric = np.einsum("niijk->njk", R)
    s = np.einsum("njk,njk->n", ginv, Ric)
    M = weyl_operator(weyl_from_parts(G, Rm, Ric, s), ginv)
    S = np.real(star_matrix_jet(g, orientation, 2, pts).val)
    I6 = np.eye(6)
    parts, blocks = [], []
    for sign in (1.0, -1.0):
        P = 0.5 * (I6 + sign * S)
        Wp = P @ M @ P
        parts.append(Wp)
        bl = []
        for n in range(pts.shape[0]):
            B = _block_basis(P[n])
            bl.append(np.linalg.pinv(B) @ Wp[n] @ B)
        blocks.append(np.array(bl))
    return WeylSplit(parts[0], parts[1], blocks[0], blocks[1])


@dataclass
class CurvatureAtPoint:
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    weyl_plus: np.ndarray
    weyl_minus: np.ndarray


def curvature_at(g: MetricField, orientation, p) -> CurvatureAtPoint:
    p = as_points(p)[:1]
    G, dG, ddG = metric_derivatives(g, p)
    gamma, R, ginv = _riemann_from_derivatives(G, dG, ddG)
    Ric = np.einsum("niijk->njk", R)
    s = np.einsum("njk,njk->n", ginv, Ric)
    ws = weyl_split(g, orientation, p)
    return CurvatureAtPoint(gamma[0], R[0], Ric[0], float(s[0]), ws.plus_block[0], ws.minus_block[0])


def metric_compatibility_residual(g: MetricField, pts) -> np.ndarray:
    """|∇_m g_ij| = |∂_m g_ij − Γ^a_mi g_aj − Γ^a_mj g_ia| per point."""
    G, dG, _ = metric_derivatives(g, pts)
    ginv, gl = _christoffel_parts(G, dG)
    gamma = np.einsum("nkl,nlij->nkij", ginv, gl)
    nab = dG - np.einsum("nami,naj->nijm", gamma, G) - np.einsum("namj,nia->nijm", gamma, G)
    return np.max(np.abs(nab), axis=(1, 2, 3))


def covariant_derivative_coordinate(g: MetricField, k: int, pts) -> np.ndarray:
    """∇ ∂_k as ``[n, i, j]`` = component i of ∇_{∂_j} ∂_k = Γ^i_jk."""
    gamma = christoffel(g, pts)
    return gamma[:, :, :, k]


def curvature_report(
    g: MetricField,
    orientation,
    pts,
    tol_flat: float = TOL_FLAT,
    tol_ricci: float = TOL_RICCI,
    tol_weyl: float = TOL_WEYL,
    seed: int | None = None,
) -> VerificationReport:
    """Max |R|, |Ric|, |s|, |W+|, |W−| over the sample points plus flatness flags."""
    pts = as_points(pts)
    G, dG, ddG = metric_derivatives(g, pts)
    _, R, ginv = _riemann_from_derivatives(G, dG, ddG)
    Ric = np.einsum("niijk->njk", R)
    s = np.einsum("njk,njk->n", ginv, Ric)
    ws = weyl_split(g, orientation, pts)
    rep = VerificationReport("curvature", seed=seed, samples=pts.shape[0])
    rmax = np.max(np.abs(R), axis=(1, 2, 3, 4))
    ricmax = np.max(np.abs(Ric), axis=(1, 2))
    rep.add("riemann", rmax, tol_flat)
    rep.add("ricci", ricmax, tol_ricci)
    rep.add("scalar", s, tol_ricci)
    rep.add("weyl_minus", ws.norm_minus, tol_weyl)
    rep.add("weyl_plus", ws.norm_plus, tol_weyl)
    rep.metadata = {
        "flat": bool(np.max(rmax) <= tol_flat),
        "ricci_flat": bool(np.max(ricmax) <= tol_ricci),
        "self_dual": bool(np.max(ws.norm_minus) <= tol_weyl),
        "anti_self_dual": bool(np.max(ws.norm_plus) <= tol_weyl),
    }
    return rep

