"""Built-in verification suite: one named claim per verified result, run on seeded points."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import errors as E
from .catalog import CONSTANTS, catalog_get, catalog_parts
from .curvature import SCurvatureField, curvature_at, riemann, riemann3
from .expr import parse
from .funk_solver import solve_funk, verify_funk_pde
from .hamel import is_funk, is_hamel, is_weak_funk, projective_invariant_T
from .models import Domain, ExprField, GeodesicSpray, LinearCombination, integrate_geodesic
from .projective import (
    chfs001_residual,
    curvature_transform_oracle,
    deform,
    funk_obstruction,
    hfs_system_residual,
    lambda_at,
    mth1_curvature_sides,
    mth1_family,
    pm_spray,
    ratio_derivatives,
)
from .report import Report, make_record
from .sampling import sample_points

PROFILES = {"quick": 20, "full": 200}
TOL = 1e-8
NEG = 1e-3


@dataclass
class Item:
    name: str
    value: float
    tol: float
    above: bool = False  # pass when value > tol instead of value < tol

    @property
    def passed(self) -> bool:
        if math.isnan(self.value):
            return False
        return self.value > self.tol if self.above else self.value < self.tol


def _pts(obj, count: int, seed: int, **kw):
    return sample_points(obj.domain, count, seed, **kw)


def _max(values) -> float:
    return float(max(values)) if len(values) else 0.0


# claims -------------------------------------------------------------------------

def funk_closed_forms(count, seed):
    s = catalog_get("minkowski")
    out = []
    for cid in ("ball_funk", "oneform_funk"):
        Q = catalog_get(cid)
        out.append(Item(f"funk[{cid}]", is_funk(Q, s, _pts(Q, count, seed)).max_residual, TOL))
    return out


def funk_implications(count, seed):
    flat = catalog_get("minkowski")
    mu = catalog_parts("mu_family")
    pairs = [
        (catalog_get("ball_funk"), flat),
        (catalog_get("oneform_funk"), flat),
        (catalog_get("klein_metric"), flat),
        (catalog_get("funk_metric"), flat),
        (catalog_get("complex_funk_pair:P"), flat),
        (catalog_get("eehf1:Q"), catalog_get("eehf1:spray")),
        (catalog_get("eehf3:Q"), catalog_get("eehf3:spray")),
        (mu["Q"], flat),
        (catalog_get("ball_funk").reflected(), catalog_get("funk_spray")),
    ]
    violations = 0
    funk_seen = 0
    for Q, s in pairs:
        pts = sample_points(Q.domain.intersect(s.domain), count, seed)
        f = is_funk(Q, s, pts).passed
        funk_seen += f
        if f and not (is_hamel(Q, s, pts).passed and is_weak_funk(Q, s, pts).passed):
            violations += 1
    return [Item("violations", violations, 0.5), Item("funk_pairs_tested", funk_seen, 0.5, above=True)]


MTH1_CS = (0.0, -0.5, 0.3, 1.0, -1.0)


def mth1_dichotomy(count, seed):
    out = []
    for c in MTH1_CS:
        s = mth1_family(c)
        pts = _pts(s, count, seed)
        reps = [curvature_at(s, p) for p in pts]
        out.append(Item(f"isotropic[c={c:g}]", _max([r.residual_isotropic for r in reps]), TOL))
        const = _max([r.residual_constant for r in reps])
        if c in (0.0, -0.5):
            out.append(Item(f"constant[c={c:g}]", const, 1e-7))
        else:
            out.append(Item(f"not_constant[c={c:g}]", const, NEG, above=True))
        eq = []
        for p in pts:
            lhs, rhs = mth1_curvature_sides(c, p)
            eq.append(float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(rhs)))))
        out.append(Item(f"derivative_identity[c={c:g}]", _max(eq), 1e-6))
    return out


def klein_agreement(count, seed):
    K = catalog_get("klein_metric")
    geo = GeodesicSpray(K)
    s = mth1_family(CONSTANTS["klein_c"])
    pts = _pts(K, count, seed)
    diff, curv = [], []
    for p in pts:
        a = np.array([g.value for g in geo.coefficients(p, geo.consumed)])
        b = s.values(p)
        diff.append(float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a)))))
        F2 = K.value(p) ** 2
        R = riemann(geo, p).ric / (K.n - 1)
        curv.append(abs(R + F2) / max(1.0, F2))
    return [Item("coefficients", _max(diff), TOL), Item("R_plus_F2", _max(curv), 1e-7)]


def _transform_pairs():
    flat = catalog_get("minkowski")
    mu = catalog_parts("mu_family")
    bump = ExprField.from_string("x1*y2 + x2^2*y1", 2, 1, label="non_hamel")
    return [
        ("flat+ball_funk", flat, catalog_get("ball_funk")),
        ("funk+klein", catalog_get("funk_spray"), catalog_get("klein_metric")),
        ("eehf1+Q", catalog_get("eehf1:spray"), catalog_get("eehf1:Q")),
        ("mu+P", mu["spray"], mu["P"]),
        ("funk+non_hamel", catalog_get("funk_spray"), bump),
    ]


def transform_oracle(count, seed):
    out = []
    for name, s, P in _transform_pairs():
        pts = sample_points(s.domain.intersect(P.domain), count, seed)
        worst = 0.0
        for p in pts:
            Rb, _ = curvature_transform_oracle(s, P, p)
            direct = riemann(deform(s, P), p).R_mat
            worst = max(worst, float(np.max(np.abs(Rb - direct))) / max(1.0, float(np.max(np.abs(direct)))))
        out.append(Item(name, worst, 1e-7))
    return out


def hamel_projective_invariance(count, seed):
    flat = catalog_get("minkowski")
    mu = catalog_parts("mu_family")
    cases = [
        ("klein", catalog_get("klein_metric"), flat, catalog_get("ball_funk")),
        ("Q_mu", mu["Q"], flat, mu["P"]),
        ("eehf1", catalog_get("eehf1:Q"), catalog_get("eehf1:spray"), catalog_get("oneform_funk")),
        ("non_hamel", ExprField.from_string("x2*y1 + x1*x2*y2", 2, 1, label="q"),
         flat, catalog_get("ball_funk")),
    ]
    out = []
    mismatches = 0
    for name, Q, s, P in cases:
        sb = deform(s, P)
        pts = sample_points(Q.domain.intersect(s.domain).intersect(P.domain), count, seed)
        worst = 0.0
        for p in pts:
            a, b = projective_invariant_T(Q, s, p), projective_invariant_T(Q, sb, p)
            worst = max(worst, float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a)))))
        out.append(Item(f"T[{name}]", worst, 1e-9))
        mismatches += is_hamel(Q, s, pts).passed != is_hamel(Q, sb, pts).passed
    out.append(Item("verdict_mismatches", mismatches, 0.5))
    return out


def _c_closed_eehf3(p, c1=1.0, c2=2.0):
    return (c1 / (c1 * math.atan(p[1] / p[0]) + c2)) ** 2


def _lambda_closed_eehf3(p, c1=1.0, c2=2.0):
    return (math.atan(p[1] / p[0]) + c2 / c1) ** 2 - 0.25


def funk_obstruction_claim(count, seed):
    s, Q = catalog_get("eehf1:spray"), catalog_get("eehf1:Q")
    rep = funk_obstruction(s, Q, _pts(s, count, seed))
    out = [Item("eehf1_c", _max([abs(c + 0.5) for c in rep.c_values]), 1e-9)]
    s3, Q3 = catalog_get("eehf3:spray"), catalog_get("eehf3:Q")
    pts = _pts(s3, count, seed)
    rep3 = funk_obstruction(s3, Q3, pts)
    err = [abs(c - _c_closed_eehf3(p)) / max(1.0, abs(c)) for c, p in zip(rep3.c_values, pts)]
    out.append(Item("eehf3_c", _max(err), 1e-7))
    return out


def _isotropic_examples():
    mu = catalog_parts("mu_family")
    return [
        ("eehf1", catalog_get("eehf1:spray"), catalog_get("eehf1:Q")),
        ("eehf3", catalog_get("eehf3:spray"), catalog_get("eehf3:Q")),
        ("mu", catalog_get("minkowski"), mu["Q"]),
    ]


def _lambda_table(count, seed):
    table = {}
    for name, s, Q in _isotropic_examples():
        pts = sample_points(s.domain.intersect(Q.domain), count, seed)
        table[name] = (pts, [lambda_at(s, Q, p) for p in pts])
    return table


def lambda_extraction(count, seed):
    t = _lambda_table(count, seed)
    lam1 = np.array([r[0] for r in t["eehf1"][1]])
    pts3, rows3 = t["eehf3"]
    err3 = [abs(r[0] - _lambda_closed_eehf3(p)) / max(1.0, abs(r[0])) for r, p in zip(rows3, pts3)]
    lam_mu = np.array([r[0] for r in t["mu"][1]])
    return [
        Item("eehf1_spread", float(lam1.max() - lam1.min()), TOL),
        Item("eehf1_value", float(np.max(np.abs(lam1 + 2.25))), TOL),
        Item("eehf3_closed_form", _max(err3), 1e-7),
        Item("mu_value", float(np.max(np.abs(lam_mu - 1.0))), TOL),
    ]


def isotropic_lambda_form(count, seed):
    t = _lambda_table(count, seed)
    return [Item(f"form[{name}]", _max([r[2] for r in rows]), 1e-7) for name, (_, rows) in t.items()]


def weak_funk_blowup(count, seed):
    s, Q = catalog_get("minkowski"), catalog_get("ball_funk")
    worst = 0.0
    for p in _pts(Q, max(3, count // 5), seed):
        q0 = Q.value(p)
        if q0 <= 0:
            continue
        n = s.n
        tr = integrate_geodesic(s, p[:n], p[n:], 0.9 / q0, 1000)
        for t, x, v in zip(tr.t, tr.x, tr.v):
            q = Q.value(tuple(x) + tuple(v))
            exact = q0 / (1.0 - q0 * t)
            worst = max(worst, abs(q - exact) / max(1.0, abs(exact)))
    return [Item("trajectory", worst, 1e-6)]


def solver_accuracy(count, seed):
    phi = parse("sqrt(y1^2+y2^2)", 2)
    sol = solve_funk(phi, (0.1, 0.0), (1.0, 0.0))
    g = np.linspace(-0.3, 0.3, 10)
    grid = [(a, b, 1.0, 0.5) for a in g for b in g]
    rep = verify_funk_pde(phi, grid)
    return [Item("value", abs(sol.P - 10.0 / 9.0), 1e-10), Item("pde_grid", rep.funk_residual, 1e-5)]


def integrability_obstruction(count, seed):
    out = []
    for cid, above in (("minkowski", False), ("eehf1_rflat:spray", False), ("funk_spray", True)):
        s = catalog_get(cid)
        v = _max([float(np.max(np.abs(riemann3(s, p)))) for p in _pts(s, count, seed)])
        out.append(Item(f"r3[{cid.split(':')[0]}]", v, NEG if above else 1e-9, above=above))
    return out


def sigma_condition(count, seed):
    pts = sample_points(Domain.box(2), count, seed)
    lin = parse("0.7*x1 - 1.3*x2", 2)
    sq = parse("x1^2+x2^2", 2)
    r_lin = _max([abs(chfs001_residual(lin, p, 2)) for p in pts])
    rel = []
    for p in pts:
        y4 = (p[2] ** 2 + p[3] ** 2) ** 2
        rel.append(abs(chfs001_residual(sq, p, 2) - 12 * y4) / (12 * y4))
    return [Item("linear", r_lin, 1e-12), Item("quadratic_12y4", _max(rel), 1e-9)]


def nonuniqueness_uniqueness(count, seed):
    fs = ("sqrt(1+s^2+t^2)", "1+s^2")
    parts = [catalog_parts("hfs002", f=f) for f in fs]
    pts = sample_points(parts[0]["Q"].domain, count, seed)
    out = []
    for f, d in zip(fs, parts):
        out.append(Item(f"system[f={f}]", _max([hfs_system_residual(d["spray"], d["P"], d["Q"], p) for p in pts]), TOL))
    out.append(Item("distinct_solutions", _max([ratio_derivatives(parts[1]["Q"], parts[0]["Q"], p) for p in pts]),
                    NEG, above=True))
    mu = catalog_parts("mu_family")
    flat = catalog_get("minkowski")
    mpts = _pts(mu["Q"], count, seed)
    out.append(Item("mu_system", _max([hfs_system_residual(flat, mu["P"], mu["Q"], p) for p in mpts]), TOL))
    out.append(Item("mu_hamel", is_hamel(mu["Q"], flat, mpts).max_residual, TOL))
    out.append(Item("mu_curvature_nonzero", min(abs(riemann(mu["spray"], p).ric) for p in mpts), NEG, above=True))
    scaled = LinearCombination(((2.5, mu["Q"]),), label="2.5 Q_mu")
    out.append(Item("mu_ratio", _max([ratio_derivatives(scaled, mu["Q"], p) for p in mpts]), TOL))
    return out


def s_curvature_hamel(count, seed):
    out = []
    one = parse("1", 2)
    for name, s in (("eehf1", catalog_get("eehf1:spray")), ("mth1", mth1_family(0.3)),
                    ("mu", catalog_get("mu_family:spray"))):
        S = SCurvatureField(s, one)
        out.append(Item(f"hamel[{name}]", is_hamel(S, s, _pts(s, count, seed)).max_residual, TOL))
    return out


def pm_klein(count, seed):
    K = catalog_get("klein_metric")
    flat = catalog_get("minkowski")
    pts = _pts(K, count, seed)
    s = pm_spray(flat, K, pts)
    geo = GeodesicSpray(K)
    diff = []
    for p in pts:
        a = np.array([g.value for g in geo.coefficients(p, geo.consumed)])
        diff.append(float(np.max(np.abs(a - s.values(p)))) / max(1.0, float(np.max(np.abs(a)))))
    return [Item("coefficients", _max(diff), TOL), Item("tag_is_hamel", float(s.tag != "hamel"), 0.5)]


CLAIMS: dict[str, Callable] = {
    "funk_closed_forms": funk_closed_forms,
    "funk_implications": funk_implications,
    "mth1_dichotomy": mth1_dichotomy,
    "klein_agreement": klein_agreement,
    "transform_oracle": transform_oracle,
    "hamel_projective_invariance": hamel_projective_invariance,
    "funk_obstruction": funk_obstruction_claim,
    "lambda_extraction": lambda_extraction,
    "isotropic_lambda_form": isotropic_lambda_form,
    "weak_funk_blowup": weak_funk_blowup,
    "solver_accuracy": solver_accuracy,
    "integrability_obstruction": integrability_obstruction,
    "sigma_condition": sigma_condition,
    "nonuniqueness_uniqueness": nonuniqueness_uniqueness,
    "s_curvature_hamel": s_curvature_hamel,
    "pm_klein": pm_klein,
}


def run_claim(name: str, count: int, seed: int = 0) -> list[Item]:
    """Evaluate one claim; library errors become a single failing item."""
    try:
        return CLAIMS[name](count, seed)
    except (E.SprayLabError, ArithmeticError, ValueError) as exc:
        return [Item(f"error:{type(exc).__name__}", float("nan"), 0.0)]


def verify_paper(profile: str = "quick", points: int | None = None, seed: int = 0,
                 claims: list[str] | None = None) -> Report:
    if profile not in PROFILES:
        raise E.ConfigError(f"unknown profile {profile!r}", "profile")
    count = points if points is not None else PROFILES[profile]
    t0 = time.perf_counter()
    report = Report({"suite": "verify-paper", "profile": profile, "points": count, "seed": seed})
    for name in claims or CLAIMS:
        for it in run_claim(name, count, seed):
            report.records.append(make_record(name, None, it.name, it.value, it.tol, "pass" if it.passed else "fail"))
    report.tally()
    report.aggregate.wall_time = time.perf_counter() - t0
    return report


__all__ = ["CLAIMS", "Item", "PROFILES", "run_claim", "verify_paper"]
