"""Execute a RunConfig: build models, sample points, run checks, collect records."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import errors as E
from .catalog import catalog_get
from .config import RunConfig
from .curvature import SCurvatureField, curvature_at, riemann, riemann3
from .expr import parse
from .hamel import (
    check_complex_funk_pair,
    funk_residual,
    hamel_residual,
    lift_order,
    projective_invariant_T,
    reversibility_residual,
    second_h_derivative,
    vertical_of_horizontal,
    weak_funk_residual,
)
from .models import ClosedOneForm, Domain, ExprField, FinslerModel, ScalarField, Spray, SprayModel, euler_residual
from .projective import (
    curvature_transform_oracle,
    deform,
    funk_obstruction,
    hamel_spray_residual,
    lambda_at,
    metrizability_conditions,
    pm_spray,
)
from .report import Report, make_record
from .sampling import sample_points

# errors that mean "this configuration cannot be run" (exit 2)
USAGE_ERRORS = (E.ConfigError, E.UnknownCatalogId, E.MissingParam, E.ExprSyntaxError, E.UnknownIdentifier,
                E.IndexOutOfRange, E.DegreeMismatch, E.KindMismatch, E.UnsupportedOrder)


class RunAbort(Exception):
    """A domain or singularity failure while evaluating at a point (exit 3)."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


# model building -------------------------------------------------------------

def _domain(spec: dict, n: int) -> Domain:
    box = spec.get("x_box")
    base = Domain.box(n) if box is None else Domain(tuple(tuple(map(float, b)) for b in box))
    cons = tuple(parse(c, n, spec.get("params")) for c in spec.get("constraints", []))
    return Domain(base.x_box, spec.get("x_radius"), cons)


def build_field(spec: dict, n: int, path: str) -> ScalarField:
    params = spec.get("params", {})
    if "catalog" in spec:
        obj = catalog_get(spec["catalog"], **params)
        if not isinstance(obj, ScalarField):
            raise E.ConfigError(f"catalog entry {spec['catalog']!r} is not a scalar field", path)
    elif "potential" in spec:
        obj = ClosedOneForm(n, parse(spec["potential"], n, params), _domain(spec, n), spec.get("label", "sigma_0"))
    elif "expr" in spec:
        dom = _domain(spec, n)
        label = spec.get("label", spec["expr"])
        if spec.get("kind") == "finsler":
            obj = FinslerModel(n, parse(spec["expr"], n, params), 1, dom, label)
        else:
            obj = ExprField(n, parse(spec["expr"], n, params), int(spec.get("degree", 1)), dom, label)
    else:
        raise E.ConfigError("field needs catalog, expr or potential", path)
    if obj.n != n:
        raise E.ConfigError(f"field has dimension {obj.n}, config dimension is {n}", path)
    return obj


def build_spray(spec: dict, n: int, fields: dict[str, ScalarField]) -> Spray:
    params = spec.get("params", {})
    if "catalog" in spec:
        s = catalog_get(spec["catalog"], **params)
        if not isinstance(s, Spray):
            raise E.ConfigError(f"catalog entry {spec['catalog']!r} is not a spray", "spray.catalog")
    else:
        s = SprayModel(n, tuple(parse(g, n, params) for g in spec["G"]), _domain(spec, n), spec.get("label", "spray"))
    if s.n != n:
        raise E.ConfigError(f"spray has dimension {s.n}, config dimension is {n}", "spray")
    if "deform" in spec:
        s = deform(s, fields[spec["deform"]])
    if "pm" in spec:
        s = pm_spray(s, fields[spec["pm"]])
    return s


# checks ---------------------------------------------------------------------

@dataclass
class Ctx:
    spray: Spray
    fields: dict[str, ScalarField]
    spec: dict[str, Any]
    tol: dict[str, float]

    def f(self, key: str = "field") -> ScalarField:
        return self.fields[self.spec[key]]


@dataclass(frozen=True)
class CheckDef:
    name: str
    evaluate: Callable[[Ctx, tuple], dict[str, float]]
    need: Callable[[Ctx], int]
    field_keys: tuple[str, ...] = ()
    expectations: tuple[str, ...] = ("pass", "fail")
    tol_key: str = "tol"

    def judged(self, expect: str, names: list[str]) -> tuple[list[str], bool]:
        """(residual names that are judged, positive?) for an expectation."""
        if self.name == "classify":
            positive = not expect.startswith("not_")
            kind = expect[4:] if not positive else expect
            chain = {"scalar": ["residual_scalar"],
                     "isotropic": ["residual_scalar", "residual_isotropic"],
                     "constant": ["residual_scalar", "residual_isotropic", "residual_constant"],
                     "r_flat": ["norm_R"]}[kind]
            return (chain if positive else chain[-1:]), positive
        return [n for n in names if not n.startswith("info_")], expect == "pass"


def _maxabs(a) -> float:
    return float(np.max(np.abs(a)))


def _classify(c: Ctx, p):
    r = curvature_at(c.spray, p, c.tol["tol"])
    return {"residual_scalar": r.residual_scalar, "residual_isotropic": r.residual_isotropic,
            "residual_constant": r.residual_constant, "norm_R": r.norm_R}


def _lambda(c: Ctx, p):
    lam, lam_funk, res, _ = lambda_at(c.spray, c.f(), p, c.tol["tol"])
    out = {"form_residual": res, "info_lambda": lam, "info_lambda_funk": lam_funk}
    if "lambda" in c.spec:
        out["lambda_error"] = abs(lam - float(c.spec["lambda"]))
    return out


def _commutator(c: Ctx, p):
    Q, s = c.f(), c.spray
    n = s.n
    qq = second_h_derivative(Q, s, p)
    r3 = riemann3(s, p)
    qdot = np.array([Q.jet(p, Q.consumed + 1).diff(n + r).value for r in range(n)])
    resid = qq - qq.T + np.einsum("r,rij->ij", qdot, r3)
    return {"commutator": _maxabs(resid) / max(1.0, _maxabs(qq))}


def _s_curvature(c: Ctx, p):
    S = SCurvatureField(c.spray, parse(c.spec.get("density", "1"), c.spray.n))
    return {"hamel": hamel_residual(S, c.spray, p)}


def _metrizability(c: Ctx, p):
    rep = metrizability_conditions(c.f(), c.spray, [p], c.tol["tol"])
    return {"hamel_form": rep.residuals["hamel_form"][0], "half_form": rep.residuals["half_form"][0],
            "info_factor": rep.factors[0]}


def _obstruction(c: Ctx, p):
    rep = funk_obstruction(c.spray, c.f(), [p], c.tol["tol"], check_preconditions=False)
    out = {"tau_residual": rep.tau_residuals[0]}
    if rep.c_y_derivative:
        out["c_y_derivative"] = rep.c_y_derivative[0]
        out["info_c"] = rep.c_values[0]
    return out


def _oracle(c: Ctx, p):
    P = c.f()

    Rb, ricb = curvature_transform_oracle(c.spray, P, p)
    direct = riemann(deform(c.spray, P), p)
    return {"oracle_diff": _maxabs(Rb - direct.R_mat) / max(1.0, _maxabs(direct.R_mat)),
            "ricci_diff": abs(ricb - direct.ric) / max(1.0, abs(direct.ric))}


def _pair(c: Ctx, p):
    rep = check_complex_funk_pair(c.f("P"), c.f("Q"), c.spray, [p], c.tol["tol"])
    return {"Q_eq": rep.residuals["Q_eq"][0], "P_eq": rep.residuals["P_eq"][0]}


def _sc(c: Ctx, k=1):
    return c.spray.consumed + k


def _sq(c: Ctx, ks, kq, key="field"):
    return lift_order(c.spray, c.f(key), ks, kq)


CHECKS: dict[str, CheckDef] = {d.name: d for d in [
    CheckDef("euler", lambda c, p: {"euler": euler_residual(c.spray, p)}, lambda c: _sc(c, 1)),
    CheckDef("classify", _classify, lambda c: _sc(c, 3),
             expectations=("scalar", "isotropic", "constant", "r_flat",
                           "not_scalar", "not_isotropic", "not_constant", "not_r_flat")),
    CheckDef("is_hamel", lambda c, p: {"hamel": hamel_residual(c.f(), c.spray, p)},
             lambda c: _sq(c, 1, 2), ("field",)),
    CheckDef("is_funk", lambda c, p: {"funk": funk_residual(c.f(), c.spray, p)},
             lambda c: _sq(c, 1, 1), ("field",)),
    CheckDef("is_weak_funk", lambda c, p: {"weak_funk": weak_funk_residual(c.f(), c.spray, p)},
             lambda c: _sq(c, 1, 1), ("field",)),
    CheckDef("hamel_T", lambda c, p: {"T": _maxabs(projective_invariant_T(c.f(), c.spray, p))},
             lambda c: _sq(c, 1, 2), ("field",)),
    CheckDef("funk_symmetry",
             lambda c, p: {"asymmetry": _maxabs((lambda a: a - a.T)(vertical_of_horizontal(c.f(), c.spray, p)))},
             lambda c: _sq(c, 2, 2), ("field",)),
    CheckDef("commutator", _commutator, lambda c: max(_sq(c, 2, 2), _sc(c, 3)), ("field",)),
    CheckDef("complex_funk_pair", _pair, lambda c: max(_sq(c, 1, 1, "P"), _sq(c, 1, 1, "Q")), ("P", "Q")),
    CheckDef("reversibility", lambda c, p: {"reversibility": _maxabs(reversibility_residual(c.f(), c.spray, p))},
             lambda c: _sq(c, 1, 2), ("field",)),
    CheckDef("transform_oracle", _oracle, lambda c: _sq(c, 2, 2), ("field",)),
    CheckDef("hamel_spray", lambda c, p: {"hamel_spray": _maxabs(hamel_spray_residual(c.spray, c.f(), p))},
             lambda c: _sq(c, 2, 2), ("field",)),
    CheckDef("lambda", _lambda, lambda c: max(_sq(c, 2, 2), max(c.spray.consumed, c.f().consumed) + 4),
             ("field",)),
    CheckDef("r3_obstruction", lambda c, p: {"r3_norm": _maxabs(riemann3(c.spray, p))}, lambda c: _sc(c, 3)),
    CheckDef("metrizability", _metrizability, lambda c: _sq(c, 1, 2), ("field",)),
    CheckDef("funk_obstruction", _obstruction, lambda c: max(_sc(c, 3), c.f().consumed + 2), ("field",)),
    CheckDef("s_curvature_hamel", _s_curvature, lambda c: _sc(c, 3)),
]}


# running ----------------------------------------------------------------------

def _eval_point(defn: CheckDef, ctx: Ctx, p):
    try:
        return defn.evaluate(ctx, p)
    except USAGE_ERRORS:
        raise
    except (E.SprayLabError, ArithmeticError) as exc:
        raise RunAbort(f"{defn.name}: {type(exc).__name__}: {exc}", p) from exc


def build(cfg: RunConfig):
    n = cfg.dimension
    fields = {name: build_field(spec, n, f"fields.{name}") for name, spec in cfg.fields.items()}
    spray = build_spray(cfg.spray, n, fields)
    return spray, fields


def sample_for(cfg: RunConfig, spray: Spray, fields: dict[str, ScalarField]):
    dom = spray.domain
    for f in fields.values():
        dom = dom.intersect(f.domain)
    s = cfg.sampling
    return sample_points(dom, s["count"], s["seed"], s["x_box"], s["y_mode"])


def run(cfg: RunConfig) -> Report:
    """Run every check; raises usage errors, returns an aborted report on RunAbort."""
    t0 = time.perf_counter()
    report = Report(cfg.raw)
    spray, fields = build(cfg)
    ctxs = []
    for i, spec in enumerate(cfg.checks):
        defn = CHECKS[spec["name"]]
        ctx = Ctx(spray, fields, spec, cfg.tolerances)
        need = defn.need(ctx)
        if need > cfg.order:
            raise E.ConfigError(f"check {defn.name!r} needs jet order {need}, configured order is {cfg.order}",
                                f"checks[{i}]")
        ctxs.append((defn, ctx, spec.get("expect", "pass" if defn.name != "classify" else "scalar")))
    try:
        points = sample_for(cfg, spray, fields)
    except E.EmptyDomain as exc:
        report.aggregate.aborted = True
        report.aggregate.message = f"EmptyDomain: {exc}"
        report.aggregate.wall_time = time.perf_counter() - t0
        return report
    tol, neg = cfg.tolerances["tol"], cfg.tolerances["neg_threshold"]
    try:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for defn, ctx, expect in ctxs:
                results = list(pool.map(lambda p: _eval_point(defn, ctx, p), points))
                names = sorted({k for r in results for k in r})
                judged, positive = defn.judged(expect, names)
                for p, res in zip(points, results):
                    for name in sorted(res):
                        if name in judged and positive:
                            verdict = "pass" if res[name] < tol else "fail"
                        else:
                            verdict = "info"
                        report.records.append(make_record(defn.name, p, name, res[name], tol, verdict))
                if not positive:
                    for name in judged:
                        worst = max((r[name] for r in results if name in r), default=0.0)
                        report.records.append(make_record(
                            defn.name, None, f"max_{name}", worst, neg, "pass" if worst > neg else "fail"))
    except RunAbort as exc:
        report.aggregate.aborted = True
        msg = str(exc)
        if exc.point is not None and str(tuple(exc.point)) not in msg:
            msg += f" at point {tuple(exc.point)}"
        report.aggregate.message = msg
    report.tally()
    report.aggregate.wall_time = time.perf_counter() - t0
    return report
