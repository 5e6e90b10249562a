"""Berwald connection of a spray at a point, in jet form.

Conventions: ``d_k = d/dx^k``, ``dot_k = d/dy^k``, ``N^i_j = dot_j G^i``,
``G^i_{jk} = dot_k dot_j G^i`` and ``delta_k = d_k - N^r_k dot_r``.  For a scalar
``f`` the horizontal derivative is ``f_{;k} = delta_k f``; for a covector
``T_{i;k} = delta_k T_i - T_r G^r_{ik}``.  Index 0 means contraction with y.
"""

from __future__ import annotations

from typing import Sequence

from .jet import Jet
from .models import Spray, lift


class Connection:
    """G^i, N^i_j and G^i_{jk} of a spray as jets at one point.

    ``G`` has order ``order - spray.consumed``; N and the connection
    coefficients lose one and two more orders.
    """

    def __init__(self, spray: Spray, point: Sequence[float], order: int):
        self.spray = spray
        self.n = n = spray.n
        self.point = tuple(float(v) for v in point)
        self.order = order
        self.G = spray.coefficients(point, order)
        self.vars = lift(point, order)
        self.y = self.vars[n:]
        self.N = [[self.G[i].diff(n + j) for j in range(n)] for i in range(n)]
        self._gamma = None

    @property
    def gamma(self) -> list[list[list[Jet]]]:
        """G^i_{jk}, symmetric in j, k by construction."""
        if self._gamma is None:
            n = self.n
            gam = [[[None] * n for _ in range(n)] for _ in range(n)]
            for i in range(n):
                for j in range(n):
                    for k in range(j, n):
                        gam[i][j][k] = gam[i][k][j] = self.N[i][j].diff(n + k)
            self._gamma = gam
        return self._gamma

    # scalar derivatives ---------------------------------------------------

    def vertical(self, f: Jet) -> list[Jet]:
        """f_{.k}"""
        return [f.diff(self.n + k) for k in range(self.n)]

    def delta(self, f: Jet, k: int) -> Jet:
        out = f.diff(k)
        for r in range(self.n):
            out = out - self.N[r][k] * f.diff(self.n + r)
        return out

    def horizontal(self, f: Jet) -> list[Jet]:
        """f_{;k}"""
        return [self.delta(f, k) for k in range(self.n)]

    def contract(self, cov: Sequence[Jet]) -> Jet:
        """T_0 = T_k y^k"""
        out = cov[0] * self.y[0]
        for k in range(1, self.n):
            out = out + cov[k] * self.y[k]
        return out

    def horizontal0(self, f: Jet) -> Jet:
        """f_{;0}"""
        return self.contract(self.horizontal(f))

    # covector derivatives -------------------------------------------------

    def horizontal_covector(self, T: Sequence[Jet]) -> list[list[Jet]]:
        """T_{i;j} as a nested list indexed [i][j]."""
        n, gam = self.n, self.gamma
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = self.delta(T[i], j)
                for r in range(n):
                    acc = acc - T[r] * gam[r][i][j]
                row.append(acc)
            out.append(row)
        return out

    def horizontal0_covector(self, T: Sequence[Jet]) -> list[Jet]:
        """T_{i;0} = y^j delta_j T_i - T_r N^r_i, using y^j G^r_{ij} = N^r_i."""
        n = self.n
        out = []
        for i in range(n):
            acc = self.contract([T[i].diff(j) for j in range(n)])
            for s in range(n):
                acc = acc - 2.0 * self.G[s] * T[i].diff(n + s)
            for r in range(n):
                acc = acc - T[r] * self.N[r][i]
            out.append(acc)
        return out
