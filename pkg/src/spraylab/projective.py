"""Projective deformations, PM-sprays and their curvature.

``G -> G + P y`` keeps geodesics as point sets.  For a degree-one Q the
PM-spray is ``G + Q_{;0}/(2Q) y``; it is a Hamel (Funk) spray when Q is a
Hamel (Funk) function of G.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .connection import Connection
from .curvature import DEFAULT_TOL, classify, curvature_at, ricci, riemann_jets
from .errors import (
    DegreeMismatch,
    EmptyPointSet,
    NonpositiveMetric,
    NotScalarCurvature,
    PreconditionFailed,
    ZeroAdjointFunction,
    ZeroOneForm,
)
from .expr import Expr, evaluate_jet
from .hamel import (
    Q_FLOOR,
    CheckReport,
    _hamel_sides,
    _scale,
    _vals,
    h_derivative,
    is_funk,
    is_hamel,
    lift_order,
)
from .jet import Jet
from .models import (
    DeformedSpray,
    FinslerModel,
    LinearCombination,
    ScalarField,
    Spray,
    lift,
    reflect_point,
    split,
)


def deform(s: Spray, P: ScalarField, label: str = "") -> DeformedSpray:
    """G^i + P y^i."""
    if P.degree != 1:
        raise DegreeMismatch(f"projective factor {P.label} has degree {P.degree}, expected 1")
    return DeformedSpray(s, P, label)


# curvature under a projective change ---------------------------------------

def curvature_transform_oracle(s: Spray, P: ScalarField, point: Sequence[float]):
    """(Rbar^i_k, Ric-bar) predicted from the curvature of s and P alone.

    Rbar^i_k = R^i_k + (3 Q_k - Q_{0.k}) y^i - Q_0 delta^i_k,
    Ric-bar  = Ric - (n-1) Q_0,   with Q_j = P_{;j} - P P_{.j}.
    """
    n = s.n
    d = lift_order(s, P, 2, 2)
    conn = Connection(s, point, d)
    R = np.array([[c.value for c in row] for row in riemann_jets(conn)])
    p = P.jet(point, d)
    Qj = [h - p * v for h, v in zip(conn.horizontal(p), conn.vertical(p))]
    Q0 = conn.contract(Qj)
    _, y = split(point)
    Qk = _vals(Qj)
    Q0k = np.array([Q0.diff(n + k).value for k in range(n)])
    Rbar = R + np.outer(y, 3.0 * Qk - Q0k) - Q0.value * np.eye(n)
    ric_bar = float(np.trace(R)) - (n - 1) * Q0.value
    return Rbar, ric_bar


# PM-sprays -------------------------------------------------------------------

def pm_factor_jet(conn: Connection, q: Jet) -> Jet:
    """Q_{;0} / (2Q)"""
    return conn.horizontal0(q) / (2.0 * q)


class PMFactorField(ScalarField):
    """The degree-one factor Q_{;0}/(2Q) of a PM-spray."""

    def __init__(self, s: Spray, Q: ScalarField, floor: float = Q_FLOOR):
        if Q.degree != 1:
            raise DegreeMismatch(f"adjoint function {Q.label} has degree {Q.degree}, expected 1")
        self.s, self.Q, self.floor = s, Q, floor
        self.n, self.degree = s.n, 1
        self.domain = s.domain.intersect(Q.domain)
        self.consumed = max(s.consumed, Q.consumed) + 1
        self.label = f"{Q.label};0/(2{Q.label})"

    def jet(self, point, order):
        self._check_order(order)
        q = self.Q.jet(point, order)
        if abs(q.value) <= self.floor:
            raise ZeroAdjointFunction(f"|{self.Q.label}| = {abs(q.value):.3g} <= {self.floor:g} at {tuple(point)}")
        return pm_factor_jet(Connection(self.s, point, order), q)


def pm_spray(s: Spray, Q: ScalarField, points: Sequence | None = None, tol: float = DEFAULT_TOL,
             floor: float = Q_FLOOR) -> DeformedSpray:
    """G + Q_{;0}/(2Q) y.

    With ``points`` the result's ``tag`` is "funk", "hamel" or "pm" according
    to the checks on those points; otherwise it is "pm".
    """
    out = DeformedSpray(s, PMFactorField(s, Q, floor), f"PM({s.label}, {Q.label})")
    out.adjoint = Q
    out.tag = "pm"
    if points is not None:
        pts = [p for p in points if abs(Q.value(p)) > floor]
        if not pts:
            raise ZeroAdjointFunction(f"{Q.label} vanishes at every sampled point")
        if is_funk(Q, s, pts, tol).passed:
            out.tag = "funk"
        elif is_hamel(Q, s, pts, tol).passed:
            out.tag = "hamel"
    return out


def hamel_spray_residual(s: Spray, Q: ScalarField, point: Sequence[float]) -> np.ndarray:
    """Q's horizontal derivative with respect to its own PM-spray."""
    pm = pm_spray(s, Q)
    return _vals(h_derivative(Q, pm, point))


# lambda of a Hamel / Funk spray ------------------------------------------------

@dataclass
class LambdaReport:
    points: list
    lambdas: np.ndarray
    lambdas_funk: np.ndarray
    form_residuals: np.ndarray
    flags: dict[str, bool]
    skipped: int = 0

    @property
    def spread(self) -> float:
        return float(np.ptp(self.lambdas)) if len(self.lambdas) else 0.0


def lambda_at(s: Spray, Q: ScalarField, point: Sequence[float], tol: float = DEFAULT_TOL):
    """(lambda, lambda_funk, form residual, curvature report of the PM-spray) at one point.

    lambda = (R + P^2 - P_{;0}) / Q^2 with P = Q_{;0}/(2Q) and R the scalar
    curvature of s; lambda_funk = R/Q^2 - 1/4 agrees with it when Q is Funk.
    The form residual measures Rbar^i_k - lambda (Q^2 delta^i_k - Q Q_{.k} y^i)
    against the directly computed curvature of the PM-spray.
    """
    n = s.n
    pm = pm_spray(s, Q)
    rep = curvature_at(pm, point, tol)
    d = lift_order(s, Q, 2, 2)
    conn = Connection(s, point, d)
    q = Q.jet(point, d)
    P = pm_factor_jet(conn, q)
    R = ricci(riemann_jets(conn)).value / (n - 1)
    qv = q.value
    lam = (R + P.value ** 2 - conn.horizontal0(P).value) / qv ** 2
    lam_funk = R / qv ** 2 - 0.25
    _, y = split(point)
    qdot = _vals(conn.vertical(q))
    model = lam * (qv ** 2 * np.eye(n) - qv * np.outer(y, qdot))
    resid = float(np.abs(rep.R_mat - model).max()) / max(1.0, float(np.abs(rep.R_mat).max()))
    return lam, lam_funk, resid, rep


def lambda_extract(s: Spray, Q: ScalarField, points, tol: float = DEFAULT_TOL,
                   floor: float = Q_FLOOR) -> LambdaReport:
    if len(points) == 0:
        raise EmptyPointSet("lambda_extract needs at least one point")
    kept, lams, lamf, res, reps, skipped = [], [], [], [], [], 0
    for p in points:
        if abs(Q.value(p)) <= floor:
            skipped += 1
            continue
        lam, lf, r, rep = lambda_at(s, Q, p, tol)
        if not rep.flags["scalar"]:
            raise NotScalarCurvature(
                f"PM-spray of {Q.label} is not of scalar curvature at {tuple(p)} "
                f"(residual {rep.residual_scalar:.3g})")
        kept.append(p)
        lams.append(lam)
        lamf.append(lf)
        res.append(r)
        reps.append(rep)
    flags = {
        "scalar": True,
        "isotropic": all(r.flags["isotropic"] for r in reps),
        "constant": all(r.flags["constant"] for r in reps),
    }
    return LambdaReport(kept, np.array(lams), np.array(lamf), np.array(res), flags, skipped)


# the c-family built on the Funk spray -------------------------------------------

def mth1_family(c: float, n: int = 2) -> DeformedSpray:
    """G^i + c F(-y) y^i over the Funk spray G^i = F y^i / 2 of the unit ball."""
    from .catalog import catalog_get

    base = catalog_get("funk_spray", n=n)
    F = catalog_get("ball_funk", n=n)
    P = LinearCombination(((float(c), F.reflected()),), label=f"{c:g}*F(-y)")
    return DeformedSpray(base, P, f"mth1(c={c:g})")


def mth1_R_closed(c: float, point: Sequence[float], n: int = 2) -> float:
    """-F^2/4 + c^2 F(-y)^2 + c [F(y) F(-y) + F(-y)^2]"""
    from .catalog import catalog_get

    F = catalog_get("ball_funk", n=n)
    f, fr = F.value(point), F.reflected().value(point)
    return -0.25 * f * f + c * c * fr * fr + c * (f * fr + fr * fr)


def mth1_curvature_sides(c: float, point: Sequence[float], n: int = 2):
    """(Rbar_{;i} taken in the deformed spray, c(1+2c) F(-y) T_i).

    T_i = 2(1+c) F(-y) F_{.i}(-y) + 2 F(y) F_{.i}(-y) - F(-y) F_{.i}(y), where
    F_{.i}(-y) is the y-gradient of F evaluated at (x, -y).
    """
    from .catalog import catalog_get

    s = mth1_family(c, n)
    d = s.consumed + 3
    conn = Connection(s, point, d)
    Rs = ricci(riemann_jets(conn)) * (1.0 / (n - 1))
    lhs = np.array([conn.delta(Rs, k).value for k in range(n)])
    F = catalog_get("ball_funk", n=n)
    fj = F.jet(point, 1)
    rj = F.jet(reflect_point(point), 1)
    f, fr = fj.value, rj.value
    g = np.array([fj.diff(n + i).value for i in range(n)])
    gr = np.array([rj.diff(n + i).value for i in range(n)])
    T = 2 * (1 + c) * fr * gr + 2 * f * gr - fr * g
    return lhs, c * (1 + 2 * c) * fr * T


def mth1_classify(c: float, points, tol: float = DEFAULT_TOL, n: int = 2) -> str:

    cl = classify(mth1_family(c, n), points, tol)
    if cl.flags["constant"]:
        return "constant"
    if cl.flags["isotropic"]:
        return "isotropic_only"
    return "not_isotropic"


# metrizability -----------------------------------------------------------------

def metrizability_conditions(F: FinslerModel, s: Spray, points, tol: float = DEFAULT_TOL) -> CheckReport:
    """F_{;i} = F_{.i;0} and F_{;i} = F_{;0.i}/2, plus the factor F_{;0}/(2F).

    Passing means F is a Finsler-Hamel function of s, so s is projectively
    metrizable by F.
    """
    n = s.n
    c2, c3, factors = [], [], []
    for p in points:
        if not F.value(p) > 0:
            raise NonpositiveMetric(f"{F.label} <= 0 at {tuple(p)}")
        conn, q, lhs, rhs = _hamel_sides(F, s, p)
        a, b = _vals(lhs), _vals(rhs)
        h0 = conn.horizontal0(q)
        c = 0.5 * np.array([h0.diff(n + i).value for i in range(n)])
        c2.append(float(np.max(np.abs(a - b))) / _scale(a, b))
        c3.append(float(np.max(np.abs(a - c))) / _scale(a, c))
        factors.append(h0.value / (2.0 * q.value))
    rep = CheckReport("metrizability", {"hamel_form": c2, "half_form": c3}, tol)
    rep.factors = factors
    return rep


def chfs001_residual(sigma: Expr, point: Sequence[float], n: int, floor: float = Q_FLOOR) -> float:
    """3 sigma_00^2 - 2 sigma_0 sigma_000 (x-derivatives contracted with y)."""
    jets = lift(point, 3)
    s = evaluate_jet(sigma, jets)
    _, y = split(point)

    def along(j: Jet) -> Jet:
        out = j.diff(0) * y[0]
        for i in range(1, n):
            out = out + j.diff(i) * y[i]
        return out

    s0 = along(s)
    s00 = along(s0)
    s000 = along(s00)
    if abs(s0.value) <= floor:
        raise ZeroOneForm(f"sigma_0 = {s0.value:.3g} at {tuple(point)}")
    return 3.0 * s00.value ** 2 - 2.0 * s0.value * s000.value


@dataclass
class MetrizabilityVerdict:
    verdict: str
    residuals: list[float]
    statement: str


def chfs001_check(sigma: Expr, points, n: int, tol: float = DEFAULT_TOL,
                  floor: float = Q_FLOOR) -> MetrizabilityVerdict:
    """Decide metrizability of G^i = sigma_00/(2 sigma_0) y^i from the sigma condition."""
    res = [chfs001_residual(sigma, p, n, floor) for p in points]
    rel = [abs(r) / max(1.0, float(np.linalg.norm(split(p)[1])) ** 4) for r, p in zip(res, points)]
    if all(r < tol for r in rel):
        return MetrizabilityVerdict("metrizable_zero_curvature", res,
                                    "condition holds at every sampled point: zero scalar curvature")
    return MetrizabilityVerdict("non_metrizable", res,
                                "nonzero scalar curvature and the adjoint 1-form is not a Finsler metric, "
                                "so the spray is not metrizable (conditional on the sampled points)")


# Funk functions on curved sprays --------------------------------------------------

@dataclass
class ObstructionReport:
    tau_residuals: list[float]
    c_values: list[float]
    c_y_derivative: list[float]
    closedness: list[float] = field(default_factory=list)


def funk_obstruction(s: Spray, Q: ScalarField, points, tol: float = DEFAULT_TOL,
                     check_preconditions: bool = True) -> ObstructionReport:
    """R Q_{.k} = Q tau_k, and c = Q^2/R with its y-derivative.

    On a constant-curvature spray a nonzero Funk Q is closed; the x-curl of its
    coefficient covector Q_{.i} is reported as ``closedness``.
    """

    if check_preconditions:
        cl = classify(s, points, tol)
        if not cl.flags["scalar"]:
            raise PreconditionFailed(f"{s.label} is not of scalar curvature on the sample")
        if not is_funk(Q, s, points, tol).passed:
            raise PreconditionFailed(f"{Q.label} is not a Funk function of {s.label} on the sample")
        isotropic, constant = cl.flags["isotropic"], cl.flags["constant"]
    else:
        isotropic = constant = True
    n = s.n
    out = ObstructionReport([], [], [])
    for p in points:
        rep = curvature_at(s, p, tol)
        d = max(s.consumed + 3, Q.consumed + 2)
        conn = Connection(s, p, d)
        Rs = ricci(riemann_jets(conn)) * (1.0 / (n - 1))
        q = Q.jet(p, d)
        qdot = _vals(conn.vertical(q))
        lhs, rhs = rep.R_scalar * qdot, q.value * rep.tau
        out.tau_residuals.append(float(np.max(np.abs(lhs - rhs))) / _scale(lhs, rhs))
        if isotropic and abs(rep.R_scalar) > tol:
            cj = q * q / Rs
            out.c_values.append(cj.value)
            out.c_y_derivative.append(max(abs(cj.diff(n + k).value) for k in range(n)))
        if constant and abs(q.value) > tol:
            curl = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    curl = max(curl, abs(q.diff(n + i).diff(j).value - q.diff(n + j).diff(i).value))
            out.closedness.append(curl)
    return out


# further identities ------------------------------------------------------------------

def deformed_funk_identity(P: ScalarField, s: Spray, point: Sequence[float]) -> float:
    """|P_{;k} (in G + P y) + P P_{.k}|; zero when P is a Funk function of G."""
    sb = deform(s, P)
    d = max(sb.consumed + 1, P.consumed + 1)
    conn = Connection(sb, point, d)
    p = P.jet(point, d)
    a = _vals(conn.horizontal(p))
    b = -p.value * _vals(conn.vertical(p))
    return float(np.max(np.abs(a - b))) / _scale(a, b)


def degree_zero_hamel_residual(Q: ScalarField, lam: ScalarField, s: Spray, point: Sequence[float]):
    """(lambda_{;0}, max_i |2 Q lambda_{;i} - Q_{;0} lambda_{.i}|) for a degree-zero lambda."""
    d = max(lift_order(s, Q, 1, 1), lift_order(s, lam, 1, 1))
    conn = Connection(s, point, d)
    q, l = Q.jet(point, d), lam.jet(point, d)
    lh = _vals(conn.horizontal(l))
    lv = _vals(conn.vertical(l))
    q0 = conn.horizontal0(q).value
    _, y = split(point)
    r = 2.0 * q.value * lh - q0 * lv
    return float(lh @ y), float(np.max(np.abs(r))) / max(1.0, abs(q.value) * float(np.max(np.abs(lh))), abs(q0) * float(np.max(np.abs(lv))))


class RatioField(ScalarField):
    """Q1 / Q2, degree = deg Q1 - deg Q2."""

    def __init__(self, num: ScalarField, den: ScalarField):
        self.num, self.den = num, den
        self.n = num.n
        self.degree = num.degree - den.degree
        self.domain = num.domain.intersect(den.domain)
        self.consumed = max(num.consumed, den.consumed)
        self.label = f"({num.label})/({den.label})"

    def jet(self, point, order):
        self._check_order(order)
        return self.num.jet(point, order) / self.den.jet(point, order)


def ratio_derivatives(Q: ScalarField, Q0: ScalarField, point: Sequence[float]) -> float:
    """max over x- and y-derivatives of Q/Q0; zero when Q is a constant multiple of Q0."""
    r = RatioField(Q, Q0).jet(point, max(Q.consumed, Q0.consumed) + 1)
    return max(abs(r.diff(v).value) for v in range(2 * Q.n)) / max(1.0, abs(r.value))


def hfs_system_residual(s: Spray, P: ScalarField, Q: ScalarField, point: Sequence[float]) -> float:
    """Residual of y^i delta_i Q = 2 P Q and y^i dot_i Q = Q."""
    d = max(lift_order(s, Q, 1, 1), P.consumed)
    conn = Connection(s, point, d)
    q = Q.jet(point, d)
    a = conn.horizontal0(q).value
    b = 2.0 * P.value(point) * q.value
    e = conn.contract(conn.vertical(q)).value
    return max(abs(a - b) / max(1.0, abs(a), abs(b)), abs(e - q.value) / max(1.0, abs(q.value)))


__all__ = [
    "LambdaReport", "MetrizabilityVerdict", "ObstructionReport", "PMFactorField", "RatioField",
    "chfs001_check", "chfs001_residual", "curvature_transform_oracle", "deform",
    "deformed_funk_identity", "degree_zero_hamel_residual", "funk_obstruction",
    "hamel_spray_residual", "hfs_system_residual", "lambda_at", "lambda_extract",
    "metrizability_conditions", "mth1_R_closed", "mth1_classify", "mth1_curvature_sides",
    "mth1_family", "pm_factor_jet", "pm_spray", "ratio_derivatives",
]
