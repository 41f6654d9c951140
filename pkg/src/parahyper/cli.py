"""Command-line driver: ``parahyper verify <suite> --config cfg.json`` and ``parahyper report --pretty out.json``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import splitquat as sq
from .errors import ParaHyperError, ValidationError
from .fields import EndomorphismField, MetricField
from .report import VerificationReport, render_table
from .sampling import DEFAULT_BOX, DEFAULT_SAMPLES, DEFAULT_SEED, normalize_box, sample_points

SUITES = ("walker-pc", "walker-hk", "inoue-splus", "inoue-sminus", "kamada-torus", "kamada-kodaira", "algebra", "custom")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class SuiteConfig:
    suite: str
    params: dict = field(default_factory=dict)
    box: tuple | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    tolerances: dict = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValidationError(f"unknown suite {self.suite!r}; expected one of {', '.join(SUITES)}")
        if not isinstance(self.samples, int) or isinstance(self.samples, bool) or self.samples < 1:
            raise ValidationError("sample count must be an integer >= 1")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValidationError("seed must be an integer")
        if self.box is not None:
            self.box = normalize_box(self.box)

    @classmethod
    def from_dict(cls, d: dict, suite: str | None = None) -> "SuiteConfig":
        if not isinstance(d, dict):
            raise ValidationError("config must be a JSON object")
        if d.get("schema", 1) != 1:
            raise ValidationError(f"unsupported config schema {d.get('schema')!r}")
        name = d.get("suite", suite)
        if suite is not None and name != suite:
            raise ValidationError(f"config is for suite {name!r}, not {suite!r}")
        box = None
        if "domain" in d:
            dom = d["domain"]
            try:
                box = list(zip(dom["min"], dom["max"]))
            except (KeyError, TypeError) as exc:
                raise ValidationError("domain needs 'min' and 'max' lists of four reals") from exc
        params = d.get("params", {})
        tols = d.get("tolerances", {})
        if not isinstance(params, dict) or not isinstance(tols, dict):
            raise ValidationError("'params' and 'tolerances' must be objects")
        return cls(
            name,
            params,
            box,
            d.get("samples", DEFAULT_SAMPLES),
            d.get("seed", DEFAULT_SEED),
            tols,
            d.get("out"),
        )


# ---------------------------------------------------------------------------
# parameter helpers

def _complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ValidationError(f"cannot read complex number {v!r}") from exc
    if isinstance(v, (int, float)):
        return complex(v)
    raise ValidationError(f"cannot read complex number {v!r}")


def _text(params: dict, key: str, default: str = "0") -> str:
    v = params.get(key, default)
    if not isinstance(v, (str, int, float)):
        raise ValidationError(f"parameter {key!r} must be an expression string")
    return str(v)


def _points(cfg: SuiteConfig, default_box=DEFAULT_BOX) -> np.ndarray:
    return sample_points(cfg.samples, cfg.seed, cfg.box or default_box)


# ---------------------------------------------------------------------------
# suites

def _suite_algebra(cfg: SuiteConfig) -> VerificationReport:
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    rep = VerificationReport()
    T = sq.canonical_triple()
    rep.extend(sq.verify_triple(T, tol=0.0), "canonical:")
    # associativity of the split-quaternion product
    n = int(p.get("products", 1000))
    assoc = np.empty(n)
    for k in range(n):
        a, b, c = (sq.SplitQuaternion.from_array(rng.uniform(-1, 1, 4)) for _ in range(3))
        assoc[k] = np.max(np.abs(((a * b) * c).as_array() - (a * (b * c)).as_array()))
    rep.add("associativity", assoc, 1e-12)
    # plus-form roundtrip
    m = int(p.get("plus_forms", 100))
    rt, compat, sig = np.empty(m), np.empty(m), np.empty(m)
    for k in range(m):
        Tk = T
        h = random_plus_form(Tk, rng)
        g = sq.metric_from_plus_form(Tk, h)
        u1, u2 = h.basis
        vals = [abs(h(Tk, A, B) - 0.5 * (Tk.J1 @ A) @ g.matrix @ B) for A in (u1, u2) for B in (u1, u2)]
        rt[k] = max(vals)
        compat[k] = max(sq.compatibility_residuals(g, Tk).values())
        sig[k] = 0.0 if g.signature() == (2, 2) else 1.0
    rep.add("plus_form_roundtrip", rt, 1e-12)
    rep.add("plus_form_compatibility", compat, 1e-12)
    rep.add("plus_form_signature_2_2", sig, 0.0)
    # conformal factor
    pairs, probes = int(p.get("conformal_pairs", 20)), int(p.get("probes", 50))
    spread, resid = np.empty(pairs), np.empty(pairs)
    for k in range(pairs):
        Tk = T
        g = sq.metric_from_plus_form(Tk, random_plus_form(Tk, rng))
        h = sq.metric_from_plus_form(Tk, random_plus_form(Tk, rng))
        lams = []
        for _ in range(probes):
            w = rng.normal(size=4)
            lams.append(sq.conformal_factor(g, h, Tk, w))
        lams = np.array(lams)
        spread[k] = np.max(np.abs(lams - lams[0])) / abs(lams[0])
        resid[k] = np.max(np.abs(g.matrix - lams[0] * h.matrix))
    rep.add("conformal_factor_probe_spread", spread, 1e-9)
    rep.add("conformal_g-lambda_h", resid, 1e-9)
    # degenerate averaged forms
    for name, G in (("euclidean", np.eye(4)), ("diag(1,-1,1,-1)", np.diag([1.0, -1.0, 1.0, -1.0]))):
        rep.add(f"averaged_form_{name}", sq.averaged_form(G, T).matrix, 0.0)
    return rep


def random_plus_form(T: sq.ParaHypercomplexTriple, rng) -> sq.PlusForm:
    """Random coefficient and random (well-conditioned) basis of V+."""
    u1, u2 = sq.eigenbasis(T, +1)
    while True:
        M = rng.uniform(-1, 1, (2, 2))
        if np.linalg.cond(M) < 4:
            break
    basis = (M[0, 0] * u1 + M[1, 0] * u2, M[0, 1] * u1 + M[1, 1] * u2)
    return sq.PlusForm(float(rng.uniform(0.2, 3.0) * rng.choice([-1, 1])), basis)


def _walker_data(p: dict):
    from .walker import PCFamily, WalkerData, pc_family

    if any(k in p for k in ("K", "P", "T", "xi", "eta", "gamma")):
        return pc_family(PCFamily(*(_text(p, k) for k in ("K", "P", "T", "xi", "eta", "gamma"))))
    return WalkerData(_text(p, "a"), _text(p, "b"), _text(p, "c"))


def _suite_walker_pc(cfg: SuiteConfig) -> VerificationReport:
    from .structures import integrability_report
    from .walker import WalkerData, pc_check, pc_family, proper_structure, random_pc_family

    p, pts = cfg.params, _points(cfg)
    n = int(p.get("random", 0))
    if n:
        rng = np.random.default_rng(cfg.seed)
        rep = VerificationReport()
        for k in range(n):
            rep.extend(pc_check(pc_family(random_pc_family(rng)), pts, seed=cfg.seed), f"family{k}:")
    else:
        rep = pc_check(_walker_data(p), pts, seed=cfg.seed)
    falsifiers = p.get("falsifiers", [])
    if not isinstance(falsifiers, list):
        raise ValidationError("'falsifiers' must be a list of expressions for a")
    for a in falsifiers:
        ir = integrability_report(proper_structure(WalkerData(str(a))), pts)
        rep.add(f"falsifier a={a}: max N", [max(c.max for c in ir.checks)], 1e-4, expect="above")
    return rep


def _suite_walker_hk(cfg: SuiteConfig) -> VerificationReport:
    from .walker import hk_check, random_hk_data

    p, pts = cfg.params, _points(cfg)
    n = int(p.get("random", 0))
    if not n:
        return hk_check(_walker_data(p), pts, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    rep = VerificationReport()
    for k in range(n):
        rep.extend(hk_check(random_hk_data(rng), pts, seed=cfg.seed), f"family{k}:")
    return rep


def _inoue_params(p: dict, force_t0: bool = False):
    from .surfaces import InoueParams

    kw = {k: p[k] for k in ("p", "q", "r") if k in p}
    if "t" in p:
        kw["t"] = _complex(p["t"])
    if "N" in p:
        kw["N"] = tuple(tuple(row) for row in p["N"])
    if "c" in p:
        kw["c"] = tuple(p["c"])
    P = InoueParams(**kw)
    if force_t0 and P.t != 0:
        raise ValidationError("inoue-sminus needs t = 0")
    return P


def _suite_inoue_splus(cfg: SuiteConfig) -> VerificationReport:
    from .surfaces import INOUE_BOX, inoue_invariance_report, inoue_structure_report

    P = _inoue_params(cfg.params)
    pts = _points(cfg, INOUE_BOX)
    rep = inoue_structure_report(P, pts, seed=cfg.seed)
    return rep.extend(inoue_invariance_report(P, pts, seed=cfg.seed))


def _suite_inoue_sminus(cfg: SuiteConfig) -> VerificationReport:
    from .surfaces import INOUE_BOX, sigma_obstruction_report

    P = _inoue_params(cfg.params, force_t0=True)
    return sigma_obstruction_report(P, _points(cfg, INOUE_BOX), seed=cfg.seed)


def _kamada_common(rep, F, kind, phi, pts, p, seed):
    from .curvature import curvature_report
    from .structures import hypersymplectic_check, structure_from_forms
    from .surfaces import monge_ampere_residual

    rep.add("monge_ampere", monge_ampere_residual(kind, phi, pts), float(p.get("ma_tol", 1e-10)))
    rep.extend(hypersymplectic_check(F, pts, seed=seed))
    S = structure_from_forms(F, pts[: min(20, len(pts))])
    vol = (F.O1 ^ F.O1) * (-0.5)
    cr = curvature_report(S.g, vol, pts, seed=seed)
    rep.checks.append(cr["ricci"])
    rep.checks.append(cr["weyl_minus"])
    flat = p.get("flat")
    R = cr["riemann"]
    if flat is True:
        rep.checks.append(R)
    elif flat is False:
        rep.add("riemann_nonzero", [R.max], 1e-4, expect="above")
    rep.metadata = dict(cr.metadata)
    return rep


def _suite_kamada_torus(cfg: SuiteConfig) -> VerificationReport:
    from .surfaces import kamada_generators, kamada_invariance_report, kamada_torus_forms

    p = cfg.params
    phi = _text(p, "phi")
    pts = _points(cfg)
    F = kamada_torus_forms(phi)
    rep = VerificationReport()
    if p.get("periodic"):
        periods = p.get("periods")
        rep.extend(kamada_invariance_report(F, kamada_generators("torus", periods=periods), pts, phi=phi, seed=cfg.seed))
    return _kamada_common(rep, F, "torus", phi, pts, p, cfg.seed)


def _suite_kamada_kodaira(cfg: SuiteConfig) -> VerificationReport:
    from .surfaces import (
        KodairaLattice,
        kamada_generators,
        kamada_invariance_report,
        kamada_kodaira_forms,
        kodaira_lattice_check,
    )

    p = cfg.params
    kw = {}
    if "a" in p:
        kw["a"] = tuple(_complex(v) for v in p["a"])
    if "b" in p:
        kw["b"] = tuple(_complex(v) for v in p["b"])
    if "theta" in p:
        kw["theta_angle"] = float(p["theta"])
    L = KodairaLattice(**kw)
    rep = VerificationReport()
    rep.extend(kodaira_lattice_check(L), "lattice:")
    if not rep.passed:
        return rep
    phi = _text(p, "phi")
    pts = _points(cfg)
    F = kamada_kodaira_forms(phi, L)
    rep.extend(kamada_invariance_report(F, kamada_generators("kodaira", L), pts, phi=phi, seed=cfg.seed))
    return _kamada_common(rep, F, "kodaira", phi, pts, p, cfg.seed)


def _suite_custom(cfg: SuiteConfig) -> VerificationReport:
    from .curvature import curvature_report
    from .structures import AlmostPHStructure, fundamental_forms, integrability_report

    p = cfg.params
    if "g" not in p:
        raise ValidationError("custom suite needs a 4x4 metric 'g' of expression strings")
    g = MetricField.from_entries(_matrix(p["g"], "g"))
    pts = _points(cfg)
    rep = VerificationReport()
    if all(k in p for k in ("J1", "J2", "J3")):
        S = AlmostPHStructure(g, *(EndomorphismField.from_entries(_matrix(p[k], k)) for k in ("J1", "J2", "J3")))
        rep.extend(S.check(pts))
        rep.extend(integrability_report(S, pts, seed=cfg.seed))
        F = fundamental_forms(S)
        orientation = (F.O1 ^ F.O1) * (-0.5)
    else:
        orientation = float(p.get("orientation", 1.0))
    cr = curvature_report(g, orientation, pts, seed=cfg.seed)
    rep.extend(cr)
    rep.metadata = dict(cr.metadata)
    return rep


def _matrix(rows, name) -> list:
    if not (isinstance(rows, list) and len(rows) == 4 and all(isinstance(r, list) and len(r) == 4 for r in rows)):
        raise ValidationError(f"{name} must be a 4x4 list of expression strings")
    return [[str(v) for v in r] for r in rows]


RUNNERS: dict[str, Callable[[SuiteConfig], VerificationReport]] = {
    "algebra": _suite_algebra,
    "walker-pc": _suite_walker_pc,
    "walker-hk": _suite_walker_hk,
    "inoue-splus": _suite_inoue_splus,
    "inoue-sminus": _suite_inoue_sminus,
    "kamada-torus": _suite_kamada_torus,
    "kamada-kodaira": _suite_kamada_kodaira,
    "custom": _suite_custom,
}


def apply_tolerances(rep: VerificationReport, overrides: dict, global_tol: float | None = None) -> None:
    """Re-judge checks against tolerance overrides (by check name, or a global one)."""
    for c in rep.checks:
        if c.expect == "flag":
            continue
        tol = overrides.get(c.name, global_tol)
        if tol is None:
            continue
        c.tol = float(tol)
        c.passed = bool(c.max <= c.tol) if c.expect == "below" else bool(c.max > c.tol)


def run_suite(cfg: SuiteConfig, global_tol: float | None = None) -> VerificationReport:
    rep = RUNNERS[cfg.suite](cfg)
    rep.suite = cfg.suite
    rep.seed = cfg.seed
    rep.samples = cfg.samples
    for c in rep.checks:
        c.seed = cfg.seed
    apply_tolerances(rep, cfg.tolerances, global_tol)
    return rep


# ---------------------------------------------------------------------------
# entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="parahyper", description="Verify para-hypercomplex structures on 4-dimensional charts.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--config", required=True)
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float)
    v.add_argument("--out")
    r = sub.add_parser("report", help="render a JSON report")
    r.add_argument("--pretty", required=True, metavar="PATH")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "report":
        try:
            with open(args.pretty, encoding="utf-8") as fh:
                rep = VerificationReport.from_dict(json.load(fh))
        except (OSError, ValueError, KeyError) as exc:
            print(f"parahyper: cannot read report: {exc}", file=sys.stderr)
            return EXIT_USAGE
        sys.stdout.write(render_table(rep))
        return EXIT_PASS if rep.passed else EXIT_FAIL
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        cfg = SuiteConfig.from_dict(raw, args.suite)
        if args.samples is not None:
            cfg.samples = args.samples
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.__post_init__()
        rep = run_suite(cfg, args.tol)
    except (OSError, ValueError) as exc:
        print(f"parahyper: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParaHyperError as exc:
        print(f"parahyper: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = rep.to_json()
    out = args.out or cfg.out
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
