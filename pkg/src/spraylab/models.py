"""Spray, Finsler-metric and scalar-field models.

Every model is evaluated through jets.  ``coefficients(point, order)`` lifts the
point at ``order`` and returns jets of order ``order - consumed``: derived
models (geodesic sprays, PM-sprays, fields built from derivatives) use up part
of the jet order, and ``consumed`` says how much.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import jet as _jet
from .errors import DegenerateMetric, DegreeMismatch, OrderExceeded, StepUnderflow
from .expr import Expr, evaluate, evaluate_jet, parse, reverse_field
from .jet import Jet


@lru_cache(maxsize=4096)
def _lift_cached(point: tuple[float, ...], order: int) -> tuple[Jet, ...]:
    return tuple(_jet.lift_point(point, order))


def lift(point: Sequence[float], order: int) -> tuple[Jet, ...]:
    if order < 0:
        raise OrderExceeded(f"jet order {order} < 0")
    return _lift_cached(tuple(float(v) for v in point), order)


def split(point: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(point, dtype=float)
    n = len(p) // 2
    return p[:n], p[n:]


def reflect_point(point: Sequence[float]) -> tuple[float, ...]:
    x, y = split(point)
    return tuple(np.concatenate([x, -y]))


def y_indices(n: int) -> tuple[int, ...]:
    return tuple(range(n, 2 * n))


# domains ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Domain:
    """Where a model may be sampled.

    ``x_box`` bounds each x-coordinate, ``x_radius`` (if set) bounds |x|, and
    every constraint expression must be strictly positive.
    """

    x_box: tuple[tuple[float, float], ...]
    x_radius: float | None = None
    constraints: tuple[Expr, ...] = ()

    @classmethod
    def box(cls, n: int, lo: float = -1.0, hi: float = 1.0, **kw) -> Domain:
        return cls(tuple((lo, hi) for _ in range(n)), **kw)

    @property
    def n(self) -> int:
        return len(self.x_box)

    def contains(self, point: Sequence[float]) -> bool:
        x, _ = split(point)
        if any(not lo < v < hi for v, (lo, hi) in zip(x, self.x_box)):
            return False
        if self.x_radius is not None and float(np.linalg.norm(x)) >= self.x_radius:
            return False
        for g in self.constraints:
            try:
                if not evaluate(g, point) > 0:
                    return False
            except (ArithmeticError, ValueError):
                return False
        return True

    def intersect(self, other: Domain) -> Domain:
        if other.n != self.n:
            raise ValueError("domains of different dimension")
        box = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(self.x_box, other.x_box))
        radii = [r for r in (self.x_radius, other.x_radius) if r is not None]
        return Domain(box, min(radii) if radii else None, self.constraints + other.constraints)


def _intersect_all(domains: Sequence[Domain]) -> Domain:
    out = domains[0]
    for d in domains[1:]:
        out = out.intersect(d)
    return out


# sprays -------------------------------------------------------------------

class Spray:
    """A spray: n coefficient functions G^i, homogeneous of degree two in y."""

    n: int
    label: str
    domain: Domain
    consumed: int = 0

    def coefficients(self, point: Sequence[float], order: int) -> list[Jet]:
        raise NotImplementedError

    def values(self, point: Sequence[float]) -> np.ndarray:
        """Plain G^i at ``point``."""
        return np.array([g.value for g in self.coefficients(point, self.consumed)])

    def _check_order(self, order: int) -> None:
        if order < self.consumed:
            raise OrderExceeded(
                f"{self.label}: lift order {order} below the {self.consumed} orders this spray consumes"
            )


@dataclass(eq=False)
class SprayModel(Spray):
    n: int
    G: tuple[Expr, ...]
    domain: Domain
    label: str = "spray"

    def __post_init__(self):
        if len(self.G) != self.n:
            raise ValueError(f"{self.label}: {len(self.G)} coefficients for dimension {self.n}")
        self.G = tuple(self.G)

    @classmethod
    def from_strings(cls, G: Sequence[str], n: int, params=None, domain: Domain | None = None,
                     label: str = "spray") -> SprayModel:
        return cls(n, tuple(parse(g, n, params) for g in G), domain or Domain.box(n), label)

    def coefficients(self, point, order):
        self._check_order(order)
        jets = lift(point, order)
        return [evaluate_jet(g, jets) for g in self.G]

    def values(self, point):
        return np.array([evaluate(g, point) for g in self.G])


@dataclass(eq=False)
class DeformedSpray(Spray):
    """G^i + P y^i for a degree-one projective factor P."""

    base: Spray
    P: "ScalarField"
    label: str = ""

    def __post_init__(self):
        if self.P.degree != 1:
            raise DegreeMismatch(f"projective factor {self.P.label} has degree {self.P.degree}, expected 1")
        if self.P.n != self.base.n:
            raise DegreeMismatch("projective factor and spray have different dimensions")
        self.n = self.base.n
        self.domain = self.base.domain.intersect(self.P.domain)
        self.consumed = max(self.base.consumed, self.P.consumed)
        if not self.label:
            self.label = f"{self.base.label}+({self.P.label})y"

    def coefficients(self, point, order):
        self._check_order(order)
        G = self.base.coefficients(point, order)
        P = self.P.jet(point, order)
        ys = lift(point, order)[self.n:]
        return [g + P * y for g, y in zip(G, ys)]


# scalar fields ------------------------------------------------------------

class ScalarField:
    """A function Q(x, y) positively homogeneous of a declared degree in y."""

    n: int
    degree: int
    label: str
    domain: Domain
    consumed: int = 0

    def jet(self, point: Sequence[float], order: int) -> Jet:
        raise NotImplementedError

    def value(self, point: Sequence[float]) -> float:
        return self.jet(point, self.consumed).value

    def _check_order(self, order: int) -> None:
        if order < self.consumed:
            raise OrderExceeded(
                f"{self.label}: lift order {order} below the {self.consumed} orders this field consumes"
            )

    # small algebra used by the constructions
    def __add__(self, other: ScalarField) -> ScalarField:
        return LinearCombination(((1.0, self), (1.0, other)))

    def __sub__(self, other: ScalarField) -> ScalarField:
        return LinearCombination(((1.0, self), (-1.0, other)))

    def __rmul__(self, c: float) -> ScalarField:
        return LinearCombination(((float(c), self),))

    def reflected(self) -> ScalarField:
        return ReflectedField(self)


@dataclass(eq=False)
class ExprField(ScalarField):
    n: int
    expr: Expr
    degree: int
    domain: Domain
    label: str = "Q"

    @classmethod
    def from_string(cls, src: str, n: int, degree: int = 1, params=None,
                    domain: Domain | None = None, label: str | None = None) -> ExprField:
        return cls(n, parse(src, n, params), degree, domain or Domain.box(n), label or src)

    def jet(self, point, order):
        return evaluate_jet(self.expr, lift(point, order))

    def value(self, point):
        return evaluate(self.expr, point)

    def reflected(self) -> ScalarField:
        return ExprField(self.n, reverse_field(self.expr), self.degree, self.domain, f"{self.label}(-y)")


@dataclass(eq=False)
class FinslerModel(ExprField):
    """A Finsler metric F (degree one, positive on its domain)."""

    def __post_init__(self):
        if self.degree != 1:
            raise DegreeMismatch("a Finsler metric is homogeneous of degree one")

    @classmethod
    def from_string(cls, src: str, n: int, params=None, domain: Domain | None = None,
                    label: str | None = None) -> FinslerModel:
        return cls(n, parse(src, n, params), 1, domain or Domain.box(n), label or src)

    def fundamental_tensor(self, point) -> np.ndarray:
        """g_ij = (1/2) d^2 F^2 / dy^i dy^j at ``point``."""
        L = self.jet(point, 2) ** 2
        n = self.n
        g = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                g[i, j] = 0.5 * L.diff(n + i).diff(n + j).value
        return g


@dataclass(eq=False)
class ClosedOneForm(ScalarField):
    """The differential sigma_0 = sigma_{x^i} y^i of a potential sigma(x)."""

    n: int
    potential: Expr
    domain: Domain
    label: str = "sigma_0"
    degree: int = 1
    consumed: int = 1

    def jet(self, point, order):
        self._check_order(order)
        jets = lift(point, order)
        s = evaluate_jet(self.potential, jets)
        out = 0.0
        for i in range(self.n):
            out = s.diff(i) * jets[self.n + i] + out
        return out


@dataclass(eq=False)
class ReflectedField(ScalarField):
    """Q(x, -y) for any field Q, via jet reflection."""

    inner: ScalarField

    def __post_init__(self):
        self.n = self.inner.n
        self.degree = self.inner.degree
        self.domain = self.inner.domain
        self.consumed = self.inner.consumed
        self.label = f"{self.inner.label}(-y)"

    def jet(self, point, order):
        j = self.inner.jet(reflect_point(point), order)
        return j.reflect(y_indices(self.n))


@dataclass(eq=False)
class LinearCombination(ScalarField):
    terms: tuple[tuple[float, ScalarField], ...]
    label: str = ""

    def __post_init__(self):
        fields = [f for _, f in self.terms]
        degs = {f.degree for f in fields}
        if len(degs) != 1:
            raise DegreeMismatch(f"cannot combine fields of degrees {sorted(degs)}")
        self.n = fields[0].n
        self.degree = fields[0].degree
        self.domain = _intersect_all([f.domain for f in fields])
        self.consumed = max(f.consumed for f in fields)
        if not self.label:
            self.label = " + ".join(f"{c:g}*{f.label}" for c, f in self.terms)

    def jet(self, point, order):
        self._check_order(order)
        out = 0.0
        for c, f in self.terms:
            out = f.jet(point, order) * c + out
        return out


@dataclass(eq=False)
class ProductField(ScalarField):
    """Pointwise product of fields; degrees add."""

    factors: tuple[ScalarField, ...]
    label: str = ""

    def __post_init__(self):
        self.n = self.factors[0].n
        self.degree = sum(f.degree for f in self.factors)
        self.domain = _intersect_all([f.domain for f in self.factors])
        self.consumed = max(f.consumed for f in self.factors)
        if not self.label:
            self.label = "*".join(f"({f.label})" for f in self.factors)

    def jet(self, point, order):
        self._check_order(order)
        out = self.factors[0].jet(point, order)
        for f in self.factors[1:]:
            out = out * f.jet(point, order)
        return out


def zero_field(n: int, degree: int = 1) -> ExprField:
    return ExprField(n, parse("0", n), degree, Domain.box(n, -math.inf, math.inf), "0")


# homogeneity --------------------------------------------------------------

def euler_residual(obj: Spray | ScalarField, point: Sequence[float]) -> float:
    """max |y^j d/dy^j f - m f| / max(1, |f|) over the components of ``obj``."""
    if isinstance(obj, Spray):
        comps, deg = obj.coefficients(point, obj.consumed + 1), 2
    else:
        comps, deg = [obj.jet(point, obj.consumed + 1)], obj.degree
    n = obj.n
    _, y = split(point)
    worst = 0.0
    for f in comps:
        lhs = sum(y[j] * f.diff(n + j).value for j in range(n))
        worst = max(worst, abs(lhs - deg * f.value) / max(1.0, abs(f.value)))
    return worst


# geodesic spray of a metric ----------------------------------------------

def _solve_jet_system(A: list[list[Jet]], b: list[Jet]) -> list[Jet]:
    """Gaussian elimination with partial pivoting on degree-0 coefficients."""
    n = len(b)
    A = [row[:] for row in A]
    b = b[:]
    floor = _jet.singular_floor()
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col].value))
        if abs(A[piv][col].value) <= floor:
            raise DegenerateMetric(f"pivot {A[piv][col].value!r} below singular floor")
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        inv = _jet.reciprocal(A[col][col])
        for r in range(col + 1, n):
            f = A[r][col] * inv
            for c in range(col, n):
                A[r][c] = A[r][c] - f * A[col][c]
            b[r] = b[r] - f * b[col]
    out: list[Jet] = [None] * n  # type: ignore[list-item]
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, n):
            acc = acc - A[r][c] * out[c]
        out[r] = acc / A[r][r]
    return out


@dataclass(eq=False)
class GeodesicSpray(Spray):
    """Spray induced by a Finsler metric F (with L = F^2).

    G^i = (1/4) g^{il} (L_{x^k y^l} y^k - L_{x^l}); consumes two jet orders.
    """

    metric: FinslerModel

    def __post_init__(self):
        self.n = self.metric.n
        self.domain = self.metric.domain
        self.consumed = self.metric.consumed + 2
        self.label = f"spray({self.metric.label})"

    def coefficients(self, point, order):
        self._check_order(order)
        n = self.n
        L = self.metric.jet(point, order) ** 2
        jets = lift(point, order)
        Ly = [L.diff(n + l) for l in range(n)]
        g = [[0.5 * Ly[i].diff(n + j) for j in range(n)] for i in range(n)]
        rhs = []
        for l in range(n):
            acc = -L.diff(l)
            for k in range(n):
                acc = Ly[l].diff(k) * jets[n + k] + acc
            rhs.append(0.25 * acc)
        return _solve_jet_system(g, rhs)


def geodesic_spray(m: FinslerModel, point: Sequence[float], order: int = 2) -> list[Jet]:
    """G^i of the metric's spray as jets of order ``order - 2``."""
    return GeodesicSpray(m).coefficients(point, order)


# geodesic integration -----------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    left_domain: bool = False
    exit_time: float | None = None
    notes: list[str] = field(default_factory=list)


def integrate_geodesic(s: Spray, x0: Sequence[float], y0: Sequence[float], t_max: float,
                       steps: int) -> Trajectory:
    """Classical RK4 for x'' = -2 G(x, x'); stops early if the state leaves the domain."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = float(t_max) / steps
    if dt == 0.0 or not math.isfinite(dt):
        raise StepUnderflow(f"step size {dt!r} from t_max={t_max!r}, steps={steps}")
    n = s.n

    def rhs(state: np.ndarray) -> np.ndarray:
        return np.concatenate([state[n:], -2.0 * s.values(state)])

    state = np.concatenate([np.asarray(x0, float), np.asarray(y0, float)])
    if not s.domain.contains(state):
        raise ValueError("initial state outside the spray domain")
    ts, states = [0.0], [state]
    traj = Trajectory(np.empty(0), np.empty((0, n)), np.empty((0, n)))
    for k in range(steps):
        try:
            k1 = rhs(state)
            k2 = rhs(state + 0.5 * dt * k1)
            k3 = rhs(state + 0.5 * dt * k2)
            k4 = rhs(state + dt * k3)
        except (ArithmeticError, ValueError) as exc:
            traj.left_domain, traj.exit_time = True, ts[-1]
            traj.notes.append(f"evaluation failed: {exc}")
            break
        new = state + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        if not s.domain.contains(new):
            traj.left_domain, traj.exit_time = True, ts[-1]
            break
        state = new
        ts.append((k + 1) * dt)
        states.append(state)
    arr = np.array(states)
    traj.t, traj.x, traj.v = np.array(ts), arr[:, :n], arr[:, n:]
    return traj
