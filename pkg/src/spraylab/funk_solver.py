"""Numerical Funk functions of the flat spray and the local integrability obstruction.

For a degree-one seed phi(y), the Funk function P of G = 0 with P(0, y) = phi(y)
solves ``P = phi(y + P x)`` near x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curvature import riemann3
from .errors import NoConvergence, OutsideNeighborhood
from .expr import Expr, evaluate
from .models import Spray

RADIUS = 0.5
SOLVER_TOL = 1e-12
MAX_ITER = 200
FD_STEP = 1e-5


@dataclass
class FunkSolve:
    phi: Expr
    x: tuple[float, ...]
    y: tuple[float, ...]
    P: float
    iterations: int
    residual: float
    method: str = "fixed-point"


def _phi(phi: Expr, y: np.ndarray) -> float:
    # phi only depends on y; the x-slots are filled with zeros
    return evaluate(phi, np.concatenate([np.zeros_like(y), y]))


def solve_funk(phi: Expr, x: Sequence[float], y: Sequence[float], radius: float = RADIUS,
               tol: float = SOLVER_TOL, max_iter: int = MAX_ITER) -> FunkSolve:
    """Solve P = phi(y + P x): fixed-point iteration, then damped Newton if it stalls."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if float(np.linalg.norm(x)) > radius:
        raise OutsideNeighborhood(f"|x| = {np.linalg.norm(x):.3g} exceeds the contraction radius {radius}")
    if not np.any(y):
        raise ValueError("y must be nonzero")

    def g(P: float) -> float:
        return P - _phi(phi, y + P * x)

    P = _phi(phi, y)
    res = abs(g(P))
    it = 1  # the initial guess phi(y) counts as the first iterate
    stall = 0
    while res >= tol and it < max_iter:
        newP = _phi(phi, y + P * x)
        newres = abs(g(newP))
        it += 1
        stall = stall + 1 if newres > 0.5 * res else 0
        P, res = newP, newres
        if stall >= 3:
            break
    method = "fixed-point"
    while res >= tol and it < max_iter:
        method = "newton"
        h = 1e-7 * max(1.0, abs(P))
        dg = (g(P + h) - g(P - h)) / (2 * h)
        if dg == 0 or not math.isfinite(dg):
            break
        step = g(P) / dg
        lam = 1.0
        while lam > 1e-6:
            trial = P - lam * step
            try:
                tres = abs(g(trial))
            except (ArithmeticError, ValueError):
                tres = math.inf
            if tres < res:
                P, res = trial, tres
                break
            lam *= 0.5
        else:
            break
        it += 1
    if not res < tol:
        raise NoConvergence(f"no convergence after {it} iterations (residual {res:.3g}) at x={tuple(x)}, y={tuple(y)}")
    return FunkSolve(phi, tuple(x), tuple(y), P, it, res, method)


def _solved(phi, x, y, **kw) -> float:
    return solve_funk(phi, x, y, **kw).P


@dataclass
class FunkPDEReport:
    funk_residual: float
    power_residual: float
    points: int


def verify_funk_pde(phi: Expr, points: Sequence[Sequence[float]], h: float = FD_STEP, **kw) -> FunkPDEReport:
    """max |P_{x^k} - P P_{y^k}| and max |P_{x^k} - (P^2)_{y^k}/2| by central differences.

    The two agree identically; both are reported since the second is the m = 1
    instance of the higher-derivative identity for flat Funk functions.
    """
    worst_f = worst_p = 0.0
    for p in points:
        p = np.asarray(p, float)
        n = len(p) // 2
        x, y = p[:n], p[n:]
        P = _solved(phi, x, y, **kw)
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            hx = h * max(1.0, abs(x[k]))
            hy = h * max(1.0, abs(y[k]))
            Px = (_solved(phi, x + hx * e, y, **kw) - _solved(phi, x - hx * e, y, **kw)) / (2 * hx)
            Pp, Pm = _solved(phi, x, y + hy * e, **kw), _solved(phi, x, y - hy * e, **kw)
            Py = (Pp - Pm) / (2 * hy)
            P2y = (Pp * Pp - Pm * Pm) / (2 * hy)
            scale = max(1.0, abs(P) ** 2)
            worst_f = max(worst_f, abs(Px - P * Py) / scale)
            worst_p = max(worst_p, abs(Px - 0.5 * P2y) / scale)
    return FunkPDEReport(worst_f, worst_p, len(points))


def flat_funk_integrability(s: Spray, points: Sequence[Sequence[float]]) -> list[float]:
    """||R^i_{jk}||_inf per point; zero where local Funk functions are unobstructed."""
    return [float(np.abs(riemann3(s, p)).max()) for p in points]


__all__ = ["FunkPDEReport", "FunkSolve", "MAX_ITER", "RADIUS", "SOLVER_TOL", "flat_funk_integrability",
           "solve_funk", "verify_funk_pde"]
