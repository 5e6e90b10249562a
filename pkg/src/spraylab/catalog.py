"""Named sprays, metrics and fields.

``catalog_get("id", **params)`` returns the entry's main model;
``catalog_get("id:part", ...)`` returns a named part (e.g. ``"eehf1:Q"``).
Parameter names are part of the config-file contract.

``CONSTANTS`` holds the numeric constants the built-in verification relies on.
Changing one of them breaks the corresponding claims, which is how the
verification suite's sensitivity is tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

from .errors import MissingParam, UnknownCatalogId
from .expr import Expr, parse, substitute
from .models import ClosedOneForm, DeformedSpray, Domain, ExprField, FinslerModel, ScalarField, SprayModel

CONSTANTS: dict[str, float] = {
    "funk_spray_factor": 0.5,   # G = factor * F * y on the unit ball
    "eehf1_coefficient": -1.0 / 3.0,  # G = coefficient * <a,y>/(<a,x>+b) * y for f(t) = t
    "klein_c": -0.5,            # the c at which the c-family meets the Klein spray
}

REQUIRED = object()

BALL_FUNK = "(sqrt((1-dot_xx)*dot_yy+dot_xy^2)+dot_xy)/(1-dot_xx)"
KLEIN = "sqrt((1-dot_xx)*dot_yy+dot_xy^2)/(1-dot_xx)"


@dataclass(frozen=True)
class Entry:
    id: str
    summary: str
    params: dict[str, Any]
    parts: tuple[str, ...]
    build: Callable[[dict[str, Any]], dict[str, Any]]


_ENTRIES: dict[str, Entry] = {}


def _entry(id: str, summary: str, parts: tuple[str, ...], **params):
    def deco(fn):
        _ENTRIES[id] = Entry(id, summary, params, parts, fn)
        return fn
    return deco


def _ball(n: int) -> Domain:
    return Domain.box(n, -1.0, 1.0, x_radius=1.0)


def _ys(n: int) -> list[str]:
    return [f"y{i + 1}" for i in range(n)]


def _projectively_flat(factor: str, n: int, params: dict, domain: Domain, label: str) -> SprayModel:
    return SprayModel.from_strings([f"({factor})*{y}" for y in _ys(n)], n, params, domain, label)


def _vec(v, n: int, name: str) -> tuple[float, ...]:
    v = tuple(float(c) for c in v)
    if len(v) != n:
        raise ValueError(f"parameter {name!r} has {len(v)} components, expected {n}")
    return v


# flat and Funk ----------------------------------------------------------------

@_entry("minkowski", "flat spray G = 0", ("spray",), n=2)
def _minkowski(p):
    n = p["n"]
    return {"spray": SprayModel.from_strings(["0"] * n, n, domain=Domain.box(n, -2.0, 2.0), label="minkowski")}


@_entry("euclidean", "Euclidean norm F = |y|", ("metric",), n=2)
def _euclidean(p):
    n = p["n"]
    return {"metric": FinslerModel.from_string("sqrt(dot_yy)", n, domain=Domain.box(n, -2.0, 2.0), label="|y|")}


@_entry("funk_metric", "Funk metric of the unit ball and its spray G = F y / 2",
        ("metric", "spray"), n=2)
def _funk_metric(p):
    n = p["n"]
    F = FinslerModel.from_string(BALL_FUNK, n, domain=_ball(n), label="funk")
    k = CONSTANTS["funk_spray_factor"]
    spray = _projectively_flat(f"{k!r}*{BALL_FUNK}", n, None, _ball(n), "funk_spray")
    return {"metric": F, "spray": spray}


@_entry("funk_spray", "spray G = F y / 2 of the unit-ball Funk metric", ("spray",), n=2)
def _funk_spray(p):
    return {"spray": _funk_metric(p)["spray"]}


@_entry("klein_metric", "Klein metric (F(y) + F(-y))/2 of the unit ball", ("metric",), n=2)
def _klein(p):
    n = p["n"]
    return {"metric": FinslerModel.from_string(KLEIN, n, domain=_ball(n), label="klein")}


@_entry("ball_funk", "Funk function of G = 0 with seed |y| (unit-ball Funk metric)", ("Q",), n=2)
def _ball_funk(p):
    n = p["n"]
    return {"Q": ExprField.from_string(BALL_FUNK, n, 1, domain=_ball(n), label="ball_funk")}


@_entry("oneform_funk", "Funk function -<a,y>/(1+<a,x>) of G = 0", ("Q",), n=2, a=(1.0, 0.0))
def _oneform_funk(p):
    n = p["n"]
    a = _vec(p["a"], n, "a")
    dom = Domain(Domain.box(n).x_box, constraints=(parse("1+dot_a_x", n, {"a": a}),))
    return {"Q": ExprField.from_string("-dot_a_y/(1+dot_a_x)", n, 1, {"a": a}, dom, "oneform_funk")}


# projectively flat Berwald sprays G = tau_0 y, tau = f(sigma) ------------------------

def _flat_berwald(n: int, tau: Expr, sigma: Expr, domain: Domain, label: str) -> dict:
    zero = SprayModel.from_strings(["0"] * n, n, domain=domain, label="minkowski")
    spray = DeformedSpray(zero, ClosedOneForm(n, tau, domain, "tau_0"), label)
    return {"spray": spray, "Q": ClosedOneForm(n, sigma, domain, "sigma_0"), "sigma": sigma}


@_entry("eehf1", "G = tau_0 y with tau = f(sigma) and Funk function Q = sigma_0; "
        "f = 't' uses the closed form, other f need sigma", ("spray", "Q"),
        a=(1.0, 0.0), b=1.0, f="t", sigma=None)
def _eehf1(p):
    a = tuple(float(c) for c in p["a"])
    n = len(a)
    params = {"a": a, "b": float(p["b"])}
    L = parse("dot_a_x+b", n, params)
    dom = Domain(Domain.box(n).x_box, constraints=(L,))
    f = str(p["f"]).replace(" ", "")
    if f == "t" and p["sigma"] is None:
        k = CONSTANTS["eehf1_coefficient"]
        factor = f"{k!r}*dot_a_y/(dot_a_x+b)"
        sigma = parse("-ln(dot_a_x+b)/3", n, params)
        return {
            "spray": _projectively_flat(factor, n, params, dom, "eehf1"),
            "Q": ExprField.from_string("-dot_a_y/(3*(dot_a_x+b))", n, 1, params, dom, "sigma_0"),
            "sigma": sigma,
        }
    if p["sigma"] is None:
        raise MissingParam("eehf1 with a general f needs 'sigma' (a solution of the sigma equation)")
    sigma = parse(str(p["sigma"]), n, params)
    tau = substitute(parse(f, n, params, locals=("t",)), {"t": sigma})
    return _flat_berwald(n, tau, sigma, dom, "eehf1")


@_entry("eehf2", "constant-curvature member of eehf1: f = -c1 e^-t + ln(1 + c2 e^(2 c1 e^-t)) + c3",
        ("spray", "Q"), a=(0.5, 0.0), b=0.1, c1=1.0, c2=1.0, c3=0.0)
def _eehf2(p):
    a = tuple(float(c) for c in p["a"])
    n = len(a)
    c1, c2, c3 = float(p["c1"]), float(p["c2"]), float(p["c3"])
    params = {"a": a, "b": float(p["b"]), "c1": c1, "c2": c2, "c3": c3, "k": 2 * c1 * c2 * math.exp(2 * c3)}
    # integrating exp(-sigma - 2 f(sigma)) in closed form gives
    # sigma = -ln(ln((1-u)/(c2 u)) / (2 c1)) with u = 2 c1 c2 e^(2 c3) (<a,x> + b)
    u = "(k*(dot_a_x+b))"
    inner = f"ln((1-{u})/(c2*{u}))/(2*c1)"
    sigma = parse(f"-ln({inner})", n, params)
    f = parse("-c1*exp(-t)+ln(1+c2*exp(2*c1*exp(-t)))+c3", n, params, locals=("t",))
    tau = substitute(f, {"t": sigma})
    cons = (parse(u, n, params), parse(f"1-{u}", n, params), parse(inner, n, params))
    lo, hi = _eehf2_box(a, params["b"], params["k"], c1, c2)
    dom = Domain(tuple([(lo, hi)] + [(-1.0, 1.0)] * (n - 1)), constraints=cons)
    return _flat_berwald(n, tau, sigma, dom, "eehf2")


def _eehf2_box(a, b, k, c1, c2) -> tuple[float, float]:
    """x1-interval (others at 0) where sigma is defined, clipped to [-1, 1]."""
    # need 0 < u < 1 and ln((1-u)/(c2 u))/(2 c1) > 0
    if c1 > 0:
        u_hi = 1.0 / (1.0 + c2)
    else:
        u_hi = 1.0
    u_lo = 0.0 if c1 > 0 else 1.0 / (1.0 + c2)
    if a[0] == 0:
        return -1.0, 1.0
    x_a, x_b = (u_lo / k - b) / a[0], (u_hi / k - b) / a[0]
    lo, hi = min(x_a, x_b), max(x_a, x_b)
    return max(lo, -1.0), min(hi, 1.0)


@_entry("eehf1_rflat", "R-flat member of eehf1: f = ln(p + q e^-t)", ("spray", "Q"),
        a=(0.5, 0.0), b=0.5, p=1.0, q=1.0)
def _eehf1_rflat(p):
    a = tuple(float(c) for c in p["a"])
    n = len(a)
    params = {"a": a, "b": float(p["b"]), "p": float(p["p"]), "q": float(p["q"])}
    # sigma = -ln((1/(q L) - p)/q), L = <a,x> + b
    inner = "(1/(q*(dot_a_x+b))-p)/q"
    sigma = parse(f"-ln({inner})", n, params)
    tau = substitute(parse("ln(p+q*exp(-t))", n, params, locals=("t",)), {"t": sigma})
    cons = (parse("dot_a_x+b", n, params), parse(inner, n, params))
    return _flat_berwald(n, tau, sigma, Domain(Domain.box(n).x_box, constraints=cons), "eehf1_rflat")


@_entry("eehf3", "G = -<x,y>/|x|^2 y with Funk function sigma_0, "
        "sigma = ln(c1/(c1 atan(x2/x1) + c2)) on x1 > 0", ("spray", "Q"), n=2, c1=1.0, c2=2.0)
def _eehf3(p):
    n = p["n"]
    box = ((0.5, 2.0),) + ((-1.0, 1.0),) * (n - 1)
    dom = Domain(box)
    spray = _projectively_flat("-dot_xy/dot_xx", n, None, dom, "eehf3")
    out = {"spray": spray}
    if n == 2:
        params = {"c1": float(p["c1"]), "c2": float(p["c2"])}
        den = parse("c1*atan(x2/x1)+c2", 2, params)
        sigma = parse("ln(c1/(c1*atan(x2/x1)+c2))", 2, params)
        dom = Domain(box, constraints=(parse("c1/(c1*atan(x2/x1)+c2)", 2, params),))
        out["spray"] = _projectively_flat("-dot_xy/dot_xx", n, None, dom, "eehf3")
        out["Q"] = ClosedOneForm(2, sigma, dom, "sigma_0")
        out["sigma"] = sigma
        out["denominator"] = den
    return out


# sprays of the form G = P y with a known adjoint ------------------------------------

@_entry("mu_family", "G = P y with P = -mu<x,y>/(1+mu|x|^2) and adjoint Q0", ("spray", "P", "Q"),
        n=2, mu=1.0)
def _mu_family(p):
    n = p["n"]
    params = {"mu": float(p["mu"])}
    dom = Domain(Domain.box(n).x_box, constraints=(parse("1+mu*dot_xx", n, params),))
    P = "-mu*dot_xy/(1+mu*dot_xx)"
    Q = "sqrt((1+mu*dot_xx)*dot_yy-mu*dot_xy^2)/(1+mu*dot_xx)"
    return {
        "spray": _projectively_flat(P, n, params, dom, "mu_family"),
        "P": ExprField.from_string(P, n, 1, params, dom, "P_mu"),
        "Q": ExprField.from_string(Q, n, 1, params, dom, "Q_mu"),
    }


@_entry("complex_funk_pair", "real and imaginary parts of the Funk function with seed i|y|",
        ("P", "Q"), n=2)
def _complex_pair(p):
    n = p["n"]
    dom = Domain.box(n)
    return {
        "P": ExprField.from_string("-dot_xy/(1+dot_xx)", n, 1, domain=dom, label="P_c"),
        "Q": ExprField.from_string("sqrt((1+dot_xx)*dot_yy-dot_xy^2)/(1+dot_xx)", n, 1, domain=dom, label="Q_c"),
    }


@_entry("hfs002", "Q = f(y2/y1, (x2 y1 - x1 y2)/y1)/(1+|x|^2) y1 with P = -<x,y>/(1+|x|^2); "
        "f is an expression in s, t", ("Q", "P", "spray"), f="sqrt(1+s^2+t^2)")
def _hfs002(p):
    n = 2
    dom = Domain(Domain.box(n).x_box, constraints=(parse("y1", n),))
    fexpr = parse(str(p["f"]), n, locals=("s", "t"))
    s = parse("y2/y1", n)
    t = parse("(x2*y1-x1*y2)/y1", n)
    body = substitute(fexpr, {"s": s, "t": t})
    Q = ExprField(n, substitute(parse("F/(1+dot_xx)*y1", n, locals=("F",)), {"F": body}), 1, dom,
                  f"hfs002[{p['f']}]")
    P = ExprField.from_string("-dot_xy/(1+dot_xx)", n, 1, domain=dom, label="P_hfs")
    zero = SprayModel.from_strings(["0", "0"], n, domain=dom, label="minkowski")
    return {"Q": Q, "P": P, "spray": zero}


@_entry("sigma_pm", "G = sigma_00/(2 sigma_0) y for a potential sigma(x)", ("spray", "Q"),
        sigma=REQUIRED, n=2)
def _sigma_pm(p):
    from .projective import pm_spray

    n = p["n"]
    sigma = parse(str(p["sigma"]), n)
    dom = Domain.box(n)
    Q = ClosedOneForm(n, sigma, dom, "sigma_0")
    zero = SprayModel.from_strings(["0"] * n, n, domain=dom, label="minkowski")
    return {"spray": pm_spray(zero, Q), "Q": Q, "sigma": sigma}


@_entry("mth1_family", "G + c F(-y) y over the unit-ball Funk spray", ("spray",), c=REQUIRED, n=2)
def _mth1(p):
    from .projective import mth1_family

    return {"spray": mth1_family(float(p["c"]), p["n"])}


# access -----------------------------------------------------------------------

def catalog_ids() -> list[str]:
    return sorted(_ENTRIES)


def catalog_entry(id: str) -> Entry:
    try:
        return _ENTRIES[id]
    except KeyError:
        raise UnknownCatalogId(f"unknown catalog id {id!r}; known: {', '.join(catalog_ids())}") from None


def _resolve(id: str, params: dict) -> tuple[Entry, str | None, dict]:
    base, _, part = id.partition(":")
    e = catalog_entry(base)
    unknown = set(params) - set(e.params)
    if unknown:
        raise MissingParam(f"{base}: unknown parameter(s) {sorted(unknown)}; accepted: {sorted(e.params)}")
    full = {}
    for k, default in e.params.items():
        if k in params:
            full[k] = params[k]
        elif default is REQUIRED:
            raise MissingParam(f"{base}: missing required parameter {k!r}")
        else:
            full[k] = default
    return e, part or None, full


def catalog_parts(id: str, **params) -> dict[str, Any]:
    e, _, full = _resolve(id, params)
    return e.build(full)


def catalog_get(id: str, **params):
    e, part, full = _resolve(id, params)
    parts = e.build(full)
    key = part or e.parts[0]
    if key not in parts:
        raise UnknownCatalogId(f"{e.id} has no part {key!r} (parts: {', '.join(parts)})")
    return parts[key]


def catalog_list() -> list[tuple[str, str, dict]]:
    return [(e.id, e.summary, {k: ("<required>" if v is REQUIRED else v) for k, v in e.params.items()})
            for e in (_ENTRIES[i] for i in catalog_ids())]


__all__ = ["CONSTANTS", "Entry", "catalog_entry", "catalog_get", "catalog_ids", "catalog_list",
           "catalog_parts", "ScalarField"]
