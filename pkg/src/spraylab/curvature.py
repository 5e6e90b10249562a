"""Riemann, Ricci, Berwald and S-curvature of a spray, plus curvature classification.

The Riemann curvature is

    R^i_k = 2 d_k G^i - y^j d_j dot_k G^i + 2 G^j dot_j dot_k G^i - dot_j G^i dot_k G^j,

Ric is its trace, and a spray is of scalar curvature when
``R^i_k = R delta^i_k - tau_k y^i``.  Contracting with y^k forces
``tau_0 = R``, hence ``R = Ric / (n - 1)``.  Isotropic adds ``R_{.k} = 2 tau_k``;
constant adds ``R_{;k} = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .connection import Connection
from .errors import EmptyPointSet, NonpositiveDensity
from .expr import Expr, evaluate, evaluate_jet
from .jet import Jet, log
from .models import ScalarField, Spray, lift, split

DEFAULT_TOL = 1e-8
NEG_THRESHOLD = 1e-3


@dataclass
class CurvatureReport:
    point: tuple[float, ...]
    R_mat: np.ndarray
    ric: float
    R_scalar: float = float("nan")
    tau: np.ndarray | None = None
    residual_scalar: float = float("nan")
    residual_isotropic: float = float("nan")
    residual_constant: float = float("nan")
    norm_R: float = float("nan")
    flags: dict[str, bool] = field(default_factory=dict)


def _values(M) -> np.ndarray:
    return np.array([[m.value for m in row] for row in M])


def berwald_connection(s: Spray, point: Sequence[float], order: int | None = None):
    """(N^i_j, G^i_{jk}) as jets; needs ``order >= consumed + 2``."""
    conn = Connection(s, point, s.consumed + 2 if order is None else order)
    return conn.N, conn.gamma


def riemann_jets(conn: Connection) -> list[list[Jet]]:
    n, G, N, y = conn.n, conn.G, conn.N, conn.y
    gam = conn.gamma
    R = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = 2.0 * G[i].diff(k)
            for j in range(n):
                acc = acc - y[j] * N[i][k].diff(j)
                acc = acc + 2.0 * G[j] * gam[i][j][k]
                acc = acc - N[i][j] * N[j][k]
            row.append(acc)
        R.append(row)
    return R


def ricci(R: list[list[Jet]]) -> Jet:
    out = R[0][0]
    for i in range(1, len(R)):
        out = out + R[i][i]
    return out


def riemann(s: Spray, point: Sequence[float]) -> CurvatureReport:
    """R^i_k and Ric at ``point`` (decomposition fields left unset)."""
    conn = Connection(s, point, s.consumed + 2)
    R = riemann_jets(conn)
    Rm = _values(R)
    return CurvatureReport(tuple(conn.point), Rm, float(np.trace(Rm)), norm_R=float(np.abs(Rm).max()))


def berwald_curvature(s: Spray, point: Sequence[float]) -> np.ndarray:
    """G^i_{hjk} = dot_h dot_j dot_k G^i, indexed [i, h, j, k]."""
    n = s.n
    G = s.coefficients(point, s.consumed + 3)
    out = np.empty((n, n, n, n))
    for i in range(n):
        for h in range(n):
            gh = G[i].diff(n + h)
            for j in range(n):
                ghj = gh.diff(n + j)
                for k in range(n):
                    out[i, h, j, k] = ghj.diff(n + k).value
    return out


def riemann3_jets(conn: Connection, R: list[list[Jet]] | None = None) -> list[list[list[Jet]]]:
    """R^i_{jk} = (1/3)(dot_j R^i_k - dot_k R^i_j).

    Expanding with R^i_k = R delta^i_k - (1/2) R_{.k} y^i gives
    (1/2)(R_{.j} delta^i_k - R_{.k} delta^i_j), the usual form for sprays of
    isotropic curvature; it also equals delta_k N^i_j - delta_j N^i_k.
    """
    n = conn.n
    if R is None:
        R = riemann_jets(conn)
    out = []
    for i in range(n):
        mat = []
        for j in range(n):
            row = []
            for k in range(n):
                row.append((R[i][k].diff(n + j) - R[i][j].diff(n + k)) * (1.0 / 3.0))
            mat.append(row)
        out.append(mat)
    return out


def riemann3(s: Spray, point: Sequence[float]) -> np.ndarray:
    """R^i_{jk} indexed [i, j, k]; antisymmetric in j, k."""
    conn = Connection(s, point, s.consumed + 3)
    return np.array([[[c.value for c in row] for row in mat] for mat in riemann3_jets(conn)])


def riemann3_from_nonlinear(s: Spray, point: Sequence[float]) -> np.ndarray:
    """delta_k N^i_j - delta_j N^i_k: an independent route to R^i_{jk}."""
    conn = Connection(s, point, s.consumed + 2)
    n = conn.n
    out = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j, k] = (conn.delta(conn.N[i][j], k) - conn.delta(conn.N[i][k], j)).value
    return out


# S-curvature -------------------------------------------------------------

class SCurvatureField(ScalarField):
    """S = N^i_i - y^m d_m ln sigma(x) for a volume density sigma."""

    def __init__(self, spray: Spray, density: Expr, label: str | None = None):
        self.spray = spray
        self.density = density
        self.n = spray.n
        self.degree = 1
        self.domain = spray.domain
        self.consumed = spray.consumed + 1
        self.label = label or f"S({spray.label})"

    def jet(self, point, order):
        self._check_order(order)
        sig = evaluate(self.density, point)
        if not sig > 0:
            raise NonpositiveDensity(f"volume density {sig!r} <= 0 at {tuple(point)}")
        n = self.n
        G = self.spray.coefficients(point, order)
        jets = lift(point, order)
        ln_sigma = evaluate_jet(self.density, jets)
        ln_sigma = log(ln_sigma)
        out = G[0].diff(n)
        for i in range(1, n):
            out = out + G[i].diff(n + i)
        for m in range(n):
            out = out - jets[n + m] * ln_sigma.diff(m)
        return out


def s_curvature(s: Spray, sigma: Expr, point: Sequence[float]) -> float:
    return SCurvatureField(s, sigma).value(point)


# classification ------------------------------------------------------------

def curvature_at(s: Spray, point: Sequence[float], tol: float = DEFAULT_TOL) -> CurvatureReport:
    """Full report at one point: R^i_k, Ric, (R, tau) decomposition and residuals."""
    n = s.n
    if n < 2:
        raise ValueError("curvature classification needs n >= 2")
    conn = Connection(s, point, s.consumed + 3)
    Rj = riemann_jets(conn)
    ric = ricci(Rj)
    Rs = ric * (1.0 / (n - 1))
    Rm = _values(Rj)
    _, y = split(point)
    m = int(np.argmax(np.abs(y)))
    # tau_k from row m of R^m_k = R delta^m_k - tau_k y^m
    tau = np.array([((Rs.value if k == m else 0.0) - Rm[m, k]) / y[m] for k in range(n)])
    scale = max(1.0, float(np.abs(Rm).sum(axis=1).max()))
    decomposed = Rs.value * np.eye(n) - np.outer(y, tau)
    res_scalar = float(np.abs(Rm - decomposed).max()) / scale
    Rdot = np.array([Rs.diff(n + k).value for k in range(n)])
    res_iso = float(np.abs(Rdot - 2.0 * tau).max()) / scale
    Rsemi = np.array([conn.delta(Rs, k).value for k in range(n)])
    res_const = float(np.abs(Rsemi).max()) / scale
    norm_R = float(np.abs(Rm).max())
    scalar = res_scalar < tol
    isotropic = scalar and res_iso < tol
    flags = {
        "scalar": scalar,
        "isotropic": isotropic,
        "constant": isotropic and res_const < tol,
        "r_flat": norm_R < tol,
    }
    return CurvatureReport(conn.point, Rm, ric.value, Rs.value, tau, res_scalar, res_iso,
                           res_const, norm_R, flags)


@dataclass
class Classification:
    flags: dict[str, bool]
    max_residuals: dict[str, float]
    reports: list[CurvatureReport]

    def definitely_not(self, kind: str, threshold: float = NEG_THRESHOLD) -> bool:
        """True if the residual for ``kind`` exceeds ``threshold`` somewhere."""
        return self.max_residuals[kind] > threshold


def classify(s: Spray, points: Sequence[Sequence[float]], tol: float = DEFAULT_TOL) -> Classification:
    if len(points) == 0:
        raise EmptyPointSet("classify needs at least one point")
    reports = [curvature_at(s, p, tol) for p in points]
    flags = {k: all(r.flags[k] for r in reports) for k in ("scalar", "isotropic", "constant", "r_flat")}
    maxres = {
        "scalar": max(r.residual_scalar for r in reports),
        "isotropic": max(r.residual_isotropic for r in reports),
        "constant": max(r.residual_constant for r in reports),
        "r_flat": max(r.norm_R for r in reports),
    }
    return Classification(flags, maxres, reports)
