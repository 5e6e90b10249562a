"""Horizontal calculus of scalar fields and the Hamel / Funk predicates.

For a degree-one field Q on a spray G:

* Hamel:      Q_{;k} = Q_{.k;0}
* Funk:       Q_{;k} = Q Q_{.k}
* weak Funk:  Q_{;0} = Q^2

with ``Q_{.k;0} = y^j d_j Q_{.k} - 2 G^s dot_s Q_{.k} - Q_{.r} N^r_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .connection import Connection
from .curvature import NEG_THRESHOLD, DEFAULT_TOL
from .errors import DegreeMismatch, EmptyPointSet, KindMismatch, UnsupportedOrder
from .expr import Expr, evaluate_jet
from .jet import Jet
from .models import LinearCombination, ScalarField, Spray, lift, reflect_point

Q_FLOOR = 1e-6


def lift_order(s: Spray, Q: ScalarField, spray_need: int, field_need: int) -> int:
    """Lift order giving ``spray_need`` derivatives of G and ``field_need`` of Q."""
    return max(s.consumed + spray_need, Q.consumed + field_need)


def _vals(js: Sequence[Jet]) -> np.ndarray:
    return np.array([j.value for j in js])


def _scale(*arrays) -> float:
    return max([1.0] + [float(np.max(np.abs(a))) for a in arrays])


# derivatives --------------------------------------------------------------

def h_derivative(Q: ScalarField, s: Spray, point: Sequence[float], order: int | None = None) -> list[Jet]:
    """Q_{;i} as jets; contract with y (``Connection.contract``) for Q_{;0}."""
    d = lift_order(s, Q, 1, 1) if order is None else order
    conn = Connection(s, point, d)
    return conn.horizontal(Q.jet(point, d))


def h_derivative0(Q: ScalarField, s: Spray, point: Sequence[float]) -> float:
    d = lift_order(s, Q, 1, 1)
    conn = Connection(s, point, d)
    return conn.horizontal0(Q.jet(point, d)).value


def second_h_derivative(Q: ScalarField, s: Spray, point: Sequence[float]) -> np.ndarray:
    """Q_{;i;j} indexed [i, j]."""
    d = lift_order(s, Q, 2, 2)
    conn = Connection(s, point, d)
    return np.array([[c.value for c in row]
                     for row in conn.horizontal_covector(conn.horizontal(Q.jet(point, d)))])


def vertical_of_horizontal(Q: ScalarField, s: Spray, point: Sequence[float]) -> np.ndarray:
    """Q_{;i.j} indexed [i, j]; symmetric when Q is a Funk function."""
    d = lift_order(s, Q, 2, 2)
    conn = Connection(s, point, d)
    n = s.n
    h = conn.horizontal(Q.jet(point, d))
    return np.array([[h[i].diff(n + j).value for j in range(n)] for i in range(n)])


def _hamel_sides(Q: ScalarField, s: Spray, point: Sequence[float]):
    d = lift_order(s, Q, 1, 2)
    conn = Connection(s, point, d)
    q = Q.jet(point, d)
    lhs = conn.horizontal(q)
    rhs = conn.horizontal0_covector(conn.vertical(q))
    return conn, q, lhs, rhs


def projective_invariant_T(Q: ScalarField, s: Spray, point: Sequence[float]) -> np.ndarray:
    """T_i = Q_{.i;0} - Q_{;i}; vanishes identically iff Q is Hamel."""
    _, _, lhs, rhs = _hamel_sides(Q, s, point)
    return _vals(rhs) - _vals(lhs)


# predicates ---------------------------------------------------------------

@dataclass
class HamelCheck:
    field_label: str
    spray_label: str
    kind: str
    residuals: list[float]
    tol: float
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return all(r < self.tol for r in self.residuals)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def hamel_residual(Q: ScalarField, s: Spray, point: Sequence[float]) -> float:
    _, _, lhs, rhs = _hamel_sides(Q, s, point)
    a, b = _vals(lhs), _vals(rhs)
    return float(np.max(np.abs(a - b))) / _scale(a, b)


def funk_residual(Q: ScalarField, s: Spray, point: Sequence[float]) -> float:
    d = lift_order(s, Q, 1, 1)
    conn = Connection(s, point, d)
    q = Q.jet(point, d)
    a = _vals(conn.horizontal(q))
    b = q.value * _vals(conn.vertical(q))
    return float(np.max(np.abs(a - b))) / _scale(a, b)


def weak_funk_residual(Q: ScalarField, s: Spray, point: Sequence[float]) -> float:
    d = lift_order(s, Q, 1, 1)
    conn = Connection(s, point, d)
    q = Q.jet(point, d)
    a = conn.horizontal0(q).value
    b = q.value ** 2
    return abs(a - b) / max(1.0, abs(a), abs(b))


_RESIDUALS = {"hamel": hamel_residual, "funk": funk_residual, "weak_funk": weak_funk_residual}


def _check(kind: str, Q: ScalarField, s: Spray, points, tol: float) -> HamelCheck:
    if Q.degree != 1:
        raise DegreeMismatch(f"{Q.label} has degree {Q.degree}; {kind} checks need degree 1")
    if len(points) == 0:
        raise EmptyPointSet(f"{kind} check needs at least one point")
    fn = _RESIDUALS[kind]
    return HamelCheck(Q.label, s.label, kind, [fn(Q, s, p) for p in points], tol)


def is_hamel(Q: ScalarField, s: Spray, points, tol: float = DEFAULT_TOL) -> HamelCheck:
    return _check("hamel", Q, s, points, tol)


def is_funk(Q: ScalarField, s: Spray, points, tol: float = DEFAULT_TOL) -> HamelCheck:
    return _check("funk", Q, s, points, tol)


def is_weak_funk(Q: ScalarField, s: Spray, points, tol: float = DEFAULT_TOL) -> HamelCheck:
    return _check("weak_funk", Q, s, points, tol)


def funk_ratios(Q: ScalarField, s: Spray, points, floor: float = Q_FLOOR):
    """Per point (Q_{;0}/(2Q) - Q/2, (P^2 - P_{;0})/Q^2 + 1/4), P = Q_{;0}/(2Q).

    Both vanish for a Funk function.  Points with |Q| <= floor are skipped;
    returns (residual pairs, skipped count).
    """
    from .projective import pm_factor_jet

    out, skipped = [], 0
    for p in points:
        if abs(Q.value(p)) <= floor:
            skipped += 1
            continue
        d = lift_order(s, Q, 2, 2)
        conn = Connection(s, p, d)
        P = pm_factor_jet(conn, Q.jet(p, d))
        q = Q.value(p)
        out.append((P.value - q / 2.0, (P.value ** 2 - conn.horizontal0(P).value) / q ** 2 + 0.25))
    return out, skipped


# constructions -------------------------------------------------------------

class PowerField(ScalarField):
    """(P^{k+1})_{y^{i_1}..y^{i_k}} x^{i_1}..x^{i_k}, i.e. (x . dot)^k applied to P^{k+1}."""

    def __init__(self, P: ScalarField, k: int):
        if k < 0:
            raise UnsupportedOrder(f"power construction needs k >= 0, got {k}")
        self.P, self.k = P, k
        self.n, self.degree, self.domain = P.n, 1, P.domain
        self.consumed = P.consumed + k
        self.label = f"power{k}({P.label})"

    def jet(self, point, order):
        self._check_order(order)
        n = self.n
        xs = lift(point, order)[:n]
        out = self.P.jet(point, order) ** (self.k + 1)
        for _ in range(self.k):
            acc = xs[0] * out.diff(n)
            for i in range(1, n):
                acc = acc + xs[i] * out.diff(n + i)
            out = acc
        return out


class TransportField(ScalarField):
    """psi(y + P x) (1 + P_{y^m} x^m) for a flat Funk function P and a seed psi(y)."""

    def __init__(self, P: ScalarField, psi: Expr, label: str | None = None):
        self.P, self.psi = P, psi
        self.n, self.degree, self.domain = P.n, 1, P.domain
        self.consumed = P.consumed + 1
        self.label = label or f"transport({P.label})"

    def jet(self, point, order):
        self._check_order(order)
        n = self.n
        jets = lift(point, order)
        xs = jets[:n]
        p = self.P.jet(point, order)
        args = list(xs) + [jets[n + i] + p * xs[i] for i in range(n)]
        factor = 1.0 + xs[0] * p.diff(n)
        for m in range(1, n):
            factor = factor + xs[m] * p.diff(n + m)
        return evaluate_jet(self.psi, args) * factor


def construct_hamel(kind: str, **inputs) -> ScalarField:
    """Build a Hamel function by one of the standard constructions.

    power(P, k), symmetrized(Q), difference(Q, Qbar), transport(P, psi),
    linear_combo(fields, coeffs).
    """
    def need(name):
        if name not in inputs:
            raise KindMismatch(f"construction {kind!r} needs input {name!r}")
        return inputs[name]

    if kind == "power":
        P, k = need("P"), need("k")
        if P.degree != 1:
            raise DegreeMismatch("power construction needs a degree-one P")
        if int(k) != k:
            raise KindMismatch(f"power construction needs an integer k, got {k!r}")
        return PowerField(P, int(k))
    if kind == "symmetrized":
        Q = need("Q")
        return LinearCombination(((0.5, Q), (0.5, Q.reflected())), label=f"sym({Q.label})")
    if kind == "difference":
        Q, Qb = need("Q"), need("Qbar")
        return LinearCombination(((0.5, Q), (-0.5, Qb)), label=f"({Q.label}-{Qb.label})/2")
    if kind == "transport":
        return TransportField(need("P"), need("psi"))
    if kind == "linear_combo":
        fields, coeffs = need("fields"), need("coeffs")
        if len(fields) != len(coeffs) or not fields:
            raise KindMismatch("linear_combo needs matching nonempty fields and coeffs")
        return LinearCombination(tuple((float(c), f) for c, f in zip(coeffs, fields)))
    raise KindMismatch(f"unknown construction {kind!r}")


# complex pairs and reversibility ---------------------------------------------

@dataclass
class CheckReport:
    name: str
    residuals: dict[str, list[float]]
    tol: float
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r < self.tol for rs in self.residuals.values() for r in rs)

    def max_residual(self, key: str | None = None) -> float:
        keys = [key] if key else list(self.residuals)
        return max((r for k in keys for r in self.residuals[k]), default=0.0)


def check_complex_funk_pair(P: ScalarField, Q: ScalarField, s: Spray, points,
                            tol: float = DEFAULT_TOL) -> CheckReport:
    """Q_{;k} = (PQ)_{.k} and P_{;k} = P P_{.k} - Q Q_{.k}."""
    if P.degree != 1 or Q.degree != 1:
        raise DegreeMismatch("complex Funk pair needs two degree-one fields")
    first, second = [], []
    for p in points:
        d = max(lift_order(s, P, 1, 1), lift_order(s, Q, 1, 1))
        conn = Connection(s, p, d)
        pj, qj = P.jet(p, d), Q.jet(p, d)
        qh, ph = _vals(conn.horizontal(qj)), _vals(conn.horizontal(pj))
        pq_dot = _vals(conn.vertical(pj * qj))
        pdot, qdot = _vals(conn.vertical(pj)), _vals(conn.vertical(qj))
        rhs2 = pj.value * pdot - qj.value * qdot
        first.append(float(np.max(np.abs(qh - pq_dot))) / _scale(qh, pq_dot))
        second.append(float(np.max(np.abs(ph - rhs2))) / _scale(ph, rhs2))
    return CheckReport("complex_funk_pair", {"Q_eq": first, "P_eq": second}, tol)


def reversibility_residual(Q: ScalarField, s: Spray, point: Sequence[float]) -> np.ndarray:
    """(P_{;i} - P_{.i;0})(y) - 2[G^r(y) - G^r(-y)] Q_{.r.i}(-y) with P(y) = Q(-y).

    Vanishes whenever Q is Hamel; the bracket term alone decides whether the
    reverse of Q is Hamel too.
    """
    R = Q.reflected()
    _, _, lhs, rhs = _hamel_sides(R, s, point)
    first = _vals(lhs) - _vals(rhs)
    bracket = reversal_bracket(Q, s, point)
    return first - 2.0 * bracket


def reversal_bracket(Q: ScalarField, s: Spray, point: Sequence[float]) -> np.ndarray:
    """[G^r(y) - G^r(-y)] Q_{.r.i}(-y)"""
    n = s.n
    rp = reflect_point(point)
    dG = s.values(point) - s.values(rp)
    q = Q.jet(rp, Q.consumed + 2)
    hess = np.array([[q.diff(n + r).diff(n + i).value for i in range(n)] for r in range(n)])
    return dG @ hess


__all__ = [
    "CheckReport", "HamelCheck", "NEG_THRESHOLD", "PowerField", "Q_FLOOR", "TransportField",
    "check_complex_funk_pair", "construct_hamel", "funk_ratios", "funk_residual", "h_derivative",
    "h_derivative0", "hamel_residual", "is_funk", "is_hamel", "is_weak_funk", "lift_order",
    "projective_invariant_T", "reversal_bracket", "reversibility_residual", "second_h_derivative",
    "vertical_of_horizontal", "weak_funk_residual",
]
