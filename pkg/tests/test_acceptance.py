"""Acceptance criteria 1-11, one test per criterion."""

import json
from itertools import combinations
from pathlib import Path

import numpy as np

from parahyper import splitquat as sq
from parahyper.cli import SuiteConfig, run_suite
from parahyper.curvature import curvature_report, lowered_riemann, riemann, weyl
from parahyper.fields import ExprField, MetricField
from parahyper.forms import FormField, ext_d, star_matrix_jet
from parahyper.sampling import sample_points
from parahyper.structures import fundamental_forms, integrability_report, structure_from_forms
from parahyper.surfaces import (
    INOUE_BOX,
    KAMADA_BOX,
    InoueParams,
    KodairaLattice,
    inoue_invariance_report,
    inoue_structure_report,
    kamada_kodaira_forms,
    kamada_torus_forms,
    kodaira_lattice_check,
    monge_ampere_residual,
    sigma_obstruction_report,
)
from parahyper.walker import WalkerData, hk_check, pc_family, proper_structure, random_hk_data, random_pc_family

from acceptance_log import criterion
from exprgen import random_text
from families import random_metric_entries
from oracles import fd_riemann

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
PTS200 = sample_points(200, 0)
T = sq.canonical_triple()


def run_config(name: str):
    return run_suite(SuiteConfig.from_dict(json.loads((CONFIGS / name).read_text())))


def random_v_plus_form(rng) -> sq.PlusForm:
    u1, u2 = np.array([1.0, 0, 1, 0]), np.array([0, 1.0, 0, -1])
    while True:
        M = rng.uniform(-1, 1, (2, 2))
        if np.linalg.cond(M) < 4:
            break
    c = rng.uniform(0.2, 3.0) * rng.choice([-1, 1])
    return sq.PlusForm(float(c), (M[0, 0] * u1 + M[1, 0] * u2, M[0, 1] * u1 + M[1, 1] * u2))


def compat_residual(G):
    return max(
        np.max(np.abs(T.J1.T @ G @ T.J1 - G)),
        np.max(np.abs(T.J2.T @ G @ T.J2 + G)),
        np.max(np.abs(T.J3.T @ G @ T.J3 + G)),
    )


def test_criterion_01_split_quaternion_algebra():
    with criterion(1, "canonical triple exact; 1000 products associate to 1e-12"):
        j1, j2, j3 = T
        I = np.eye(4)
        assert np.array_equal(j1 @ j1, -I) and np.array_equal(j2 @ j2, I) and np.array_equal(j3 @ j3, I)
        assert np.array_equal(j1 @ j2, j3) and np.array_equal(j2 @ j1, -j3)
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(1000):
            a, b, c = (sq.SplitQuaternion.from_array(rng.uniform(-1, 1, 4)) for _ in range(3))
            worst = max(worst, np.max(np.abs(((a * b) * c - a * (b * c)).as_array())))
        assert worst < 1e-12, worst
        assert run_config("algebra.json").passed


def test_criterion_02_plus_form_roundtrip():
    with criterion(2, "100 random plus-forms: roundtrip, compatibility to 1e-12, signature (2,2)"):
        rng = np.random.default_rng(2)
        for _ in range(100):
            h = random_v_plus_form(rng)
            g = sq.metric_from_plus_form(T, h)
            G = g.matrix
            for A in h.basis:
                for B in h.basis:
                    assert abs(h(T, A, B) - 0.5 * (T.J1 @ A) @ G @ B) < 1e-12
            assert compat_residual(G) < 1e-12
            ev = np.linalg.eigvalsh(G)
            assert (np.sum(ev > 0), np.sum(ev < 0)) == (2, 2)


def test_criterion_03_conformal_equivalence():
    with criterion(3, "20 compatible pairs x 50 probes: lambda probe-independent, g = lambda h to 1e-9"):
        rng = np.random.default_rng(3)
        for _ in range(20):
            g = sq.metric_from_plus_form(T, random_v_plus_form(rng))
            h = sq.metric_from_plus_form(T, random_v_plus_form(rng))
            lams = np.array([sq.conformal_factor(g, h, T, rng.normal(size=4)) for _ in range(50)])
            assert np.max(np.abs(lams - lams[0])) < 1e-9 * abs(lams[0])
            assert np.max(np.abs(g.matrix - lams[0] * h.matrix)) < 1e-9


def test_criterion_04_degenerate_averaged_form():
    with criterion(4, "averaged form of Euclidean and diag(1,-1,1,-1) is exactly zero"):
        for G in (np.eye(4), np.diag([1.0, -1.0, 1.0, -1.0])):
            assert np.array_equal(sq.averaged_form(G, T).matrix, np.zeros((4, 4)))


def test_criterion_05_walker_pc_forward_and_falsifiers():
    with criterion(5, "10 PC families Nijenhuis < 1e-8; x^3 and exp(x) > 1e-4"):
        rng = np.random.default_rng(5)
        for _ in range(10):
            rep = integrability_report(proper_structure(pc_family(random_pc_family(rng))), PTS200)
            assert max(c.max for c in rep.checks) < 1e-8
        for a in ("x^3", "exp(x)"):
            rep = integrability_report(proper_structure(WalkerData(a)), PTS200)
            assert max(c.max for c in rep.checks) > 1e-4, a


def test_criterion_06_walker_hk():
    with criterion(6, "10 HK families: dO < 1e-9, Ricci, W-, nabla dx, nabla dy < 1e-8"):
        rng = np.random.default_rng(6)
        for _ in range(10):
            rep = hk_check(random_hk_data(rng), PTS200)
            assert max(rep[f"dO{l}"].max for l in (1, 2, 3)) < 1e-9
            assert rep["ricci"].max < 1e-8 and rep["weyl_minus"].max < 1e-8
            assert rep["nabla_dx"].max < 1e-8 and rep["nabla_dy"].max < 1e-8


def test_criterion_07_inoue_splus():
    with criterion(7, "Inoue S+ structure equations and generator invariance < 1e-9"):
        pts = sample_points(200, 7, INOUE_BOX)
        for P in (InoueParams(t=0.3 + 0.7j, c=(0.4, -1.2), r=2), InoueParams(t=-0.5j), InoueParams(N=((3, 2), (1, 1)), t=0.2 + 0.9j)):
            rep = inoue_structure_report(P, pts)
            for name in ("d_theta1", "d_theta2", "dOmega+Im_theta1^Omega", "dO1+Im_theta1^O1", "-O1^2-O2^2", "O2^2-O3^2", "O1^O2", "O1^O3", "O2^O3", "lee1+Im_theta1"):
                assert rep[name].max < 1e-9, (name, rep[name].max)
            inv = inoue_invariance_report(P, pts)
            assert len(inv.checks) == 8 and all(c.max < 1e-9 for c in inv.checks)


def test_criterion_08_inoue_sminus_obstruction():
    with criterion(8, "sigma pullback signs to 1e-10; conformal factor -1 +- 1e-9; J's preserved"):
        rep = sigma_obstruction_report(InoueParams(), sample_points(200, 8, INOUE_BOX))
        for name in ("s*theta1-theta1", "s*theta2+theta2", "s*O1+O1", "s*Omega+Omega"):
            assert rep[name].max < 1e-10, name
        assert rep["conformal_factor+1"].max < 1e-9
        for J in ("J1", "J2", "J3"):
            assert rep[f"s*{J}-{J}"].max < 1e-9


def test_criterion_09_kamada_residuals():
    with criterion(9, "Monge-Ampere residuals and Kodaira lattice checker"):
        pts = sample_points(200, 9, KAMADA_BOX)
        clauses = {}
        for kind in ("torus", "kodaira"):
            for phi in ("0", "sin(x1)*exp(y1)", "sin(2*pi*x1)+cos(2*pi*y1)"):
                clauses[f"{kind} phi={phi} = 0"] = np.max(np.abs(monge_ampere_residual(kind, phi, pts))) <= 1e-10
            clauses[f"{kind} phi=x2^2 nonzero"] = np.max(np.abs(monge_ampere_residual(kind, "x2^2", pts))) > 1e-4
        clauses["lattice accepted"] = kodaira_lattice_check(KodairaLattice((0, 0, 1, 1j), (-1, 0, 0, 0))).passed
        clauses["lattice rejected"] = not kodaira_lattice_check(KodairaLattice((0, 0, 1, 1j), (1, 0, 0, 0))).passed
        failed = [k for k, ok in clauses.items() if not ok]
        assert not failed, f"failed clauses: {', '.join(failed)}"


def reconstructed(F, pts):
    S = structure_from_forms(F, pts[:20])
    return curvature_report(S.g, (F.O1 ^ F.O1) * -0.5, pts)


def test_criterion_10_flatness_dichotomy():
    with criterion(10, "phi constant flat; nonconstant pullback curved, Ricci-flat, W- = 0"):
        pts = sample_points(200, 10, KAMADA_BOX)
        for make, phi in ((kamada_torus_forms, "sin(2*pi*x1)*cos(2*pi*y1)"), (kamada_kodaira_forms, "sin(2*pi*x1)+cos(2*pi*y1)")):
            for const in ("0", "2.5"):
                assert reconstructed(make(const), pts)["riemann"].max < 1e-8
            rep = reconstructed(make(phi), pts)
            assert rep["riemann"].max > 1e-4
            assert rep["ricci"].max < 1e-8 and rep["weyl_minus"].max < 1e-8


def test_criterion_11_engine_self_checks():
    with criterion(11, "d^2 = 0, ** = Id, Riemann symmetries, Weyl invariance, FD agreement, roundtrip"):
        rng = np.random.default_rng(11)
        pts = sample_points(100, 11)
        for degree in (0, 1, 2):
            a = FormField.from_coefficients(degree, {I: random_text(rng, 3) for I in combinations(range(4), degree)})
            scale = max(1.0, np.max(np.abs(ext_d(a).at(pts))))
            assert np.max(np.abs(ext_d(ext_d(a)).at(pts))) < 1e-10 * scale

        metrics = [MetricField.from_entries(random_metric_entries(rng, lambda r: random_text(r, 3))) for _ in range(5)]
        vol = FormField.from_coefficients(4, {(0, 1, 2, 3): 1.0})
        p50 = pts[:50]
        for g in metrics:
            S = np.real(star_matrix_jet(g, vol, 2, p50).val)
            assert np.max(np.abs(S @ S - np.eye(6))) < 1e-10
            Rm = lowered_riemann(g, p50)
            sc = max(1.0, np.max(np.abs(Rm)))
            assert np.max(np.abs(Rm + np.swapaxes(Rm, 1, 2))) < 1e-8 * sc
            assert np.max(np.abs(Rm + np.swapaxes(Rm, 3, 4))) < 1e-8 * sc
            assert np.max(np.abs(Rm - Rm.transpose(0, 3, 4, 1, 2))) < 1e-8 * sc
            assert np.max(np.abs(Rm + Rm.transpose(0, 2, 3, 1, 4) + Rm.transpose(0, 3, 1, 2, 4))) < 1e-8 * sc

            ef = ExprField(f"exp(0.6*sin({random_text(rng, 2)}))")
            g2 = MetricField(lambda q, g=g, ef=ef: g.jet(q) * ef.jet(q)[:, None, None])
            W1 = np.einsum("nlm,nijkm->nlijk", np.linalg.inv(g.at(p50)), weyl(g, p50))
            W2 = np.einsum("nlm,nijkm->nlijk", np.linalg.inv(g2.at(p50)), weyl(g2, p50))
            assert np.max(np.abs(W1 - W2)) < 1e-7 * max(1.0, np.max(np.abs(W1)))

            p = pts[0]
            want = fd_riemann(lambda q, g=g: g.at(q[None])[0], p, h=1e-4)
            got = riemann(g, p[None])[0]
            assert np.max(np.abs(got - want)) < 1e-5 * max(1.0, np.max(np.abs(want)))

        for k in range(5):
            S0 = proper_structure(WalkerData(random_text(rng, 3), random_text(rng, 3), random_text(rng, 3)))
            S = structure_from_forms(fundamental_forms(S0), p50)
            for a, b in ((S.g, S0.g), (S.J1, S0.J1), (S.J2, S0.J2), (S.J3, S0.J3)):
                B = b.at(p50)
                assert np.max(np.abs(a.at(p50) - B)) < 1e-9 * max(1.0, np.max(np.abs(B)))
