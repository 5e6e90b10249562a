"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A :class:`Jet` stores the Taylor coefficients of a scalar function of ``m``
variables around a base point, truncated at total degree ``d``.  The
coefficient of the multi-index ``alpha`` is ``(d^alpha f)(p) / alpha!``, so
multiplication is a plain truncated convolution and a partial derivative is
``coeffs[alpha] * alpha!``.

Coefficients are stored densely in graded-lexicographic order: all degree-0
entries, then degree 1, and so on.  The basis for a lower order is therefore a
prefix of the basis for a higher order and truncation is a slice.

In spraylab the variables are always ``(x^1..x^n, y^1..y^n)``, i.e.
``m = 2n``, with the x-block first.
"""

from __future__ import annotations

import contextlib
import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterator, Sequence

import numpy as np

from .errors import OrderExceeded, SingularJet

DEFAULT_ORDER = 4
_singular_floor = 1e-12


def singular_floor() -> float:
    return _singular_floor


@contextlib.contextmanager
def floor_override(value: float) -> Iterator[None]:
    """Temporarily change the singular floor used by div/sqrt/ln."""
    global _singular_floor
    old = _singular_floor
    _singular_floor = float(value)
    try:
        yield
    finally:
        _singular_floor = old


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    # lexicographically descending, so x^1 comes first within a degree
    out = []
    for combo in combinations_with_replacement(range(parts), total):
        alpha = [0] * parts
        for v in combo:
            alpha[v] += 1
        out.append(tuple(alpha))
    out.sort(reverse=True)
    return out


class JetBasis:
    """Multi-index enumeration plus the index tables used by jet arithmetic."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1:
            raise ValueError("a jet needs at least one variable")
        if order < 0:
            raise OrderExceeded(f"negative jet order {order}")
        self.nvars = nvars
        self.order = order
        multi: list[tuple[int, ...]] = []
        for k in range(order + 1):
            multi.extend(_compositions(k, nvars))
        self.multi = multi
        self.size = len(multi)
        self.index = {alpha: i for i, alpha in enumerate(multi)}
        self.degree = np.array([sum(a) for a in multi], dtype=int)
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in a) for a in multi], dtype=float
        )
        # prefix lengths: number of basis entries of degree <= k
        self.prefix = [int(np.sum(self.degree <= k)) for k in range(order + 1)]

        I, J, K = [], [], []
        for i, a in enumerate(multi):
            room = order - self.degree[i]
            for j in range(self.prefix[room]):
                b = multi[j]
                I.append(i)
                J.append(j)
                K.append(self.index[tuple(p + q for p, q in zip(a, b))])
        self._mul = (np.array(I), np.array(J), np.array(K))
        self._diff: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def diff_table(self, var: int):
        """(source index, target index into order-1 basis, factor) for d/dv."""
        if var not in self._diff:
            src, dst, fac = [], [], []
            for i, a in enumerate(self.multi):
                if a[var] == 0:
                    continue
                b = list(a)
                b[var] -= 1
                src.append(i)
                dst.append(self.index[tuple(b)])
                fac.append(float(a[var]))
            self._diff[var] = (np.array(src, dtype=int), np.array(dst, dtype=int), np.array(fac))
        return self._diff[var]

    def y_parity(self, flip: Sequence[int]) -> np.ndarray:
        """Sign (-1)^(sum of alpha over flipped variables) for each basis entry."""
        counts = np.array([sum(a[v] for v in flip) for a in self.multi], dtype=int)
        return np.where(counts % 2 == 0, 1.0, -1.0)


@lru_cache(maxsize=None)
def get_basis(nvars: int, order: int) -> JetBasis:
    return JetBasis(nvars, order)


def jet_size(nvars: int, order: int) -> int:
    """Number of dense coefficients, C(nvars + order, order)."""
    return math.comb(nvars + order, order)


class Jet:
    """Immutable truncated Taylor expansion of a scalar at a base point."""

    __slots__ = ("basis", "coeffs")
    __array_priority__ = 1000  # keep numpy scalars from hijacking operators

    def __init__(self, basis: JetBasis, coeffs: np.ndarray):
        self.basis = basis
        self.coeffs = coeffs

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, value: float, nvars: int, order: int) -> Jet:
        basis = get_basis(nvars, order)
        c = np.zeros(basis.size)
        c[0] = value
        return cls(basis, c)

    @classmethod
    def variable(cls, value: float, var: int, nvars: int, order: int) -> Jet:
        basis = get_basis(nvars, order)
        c = np.zeros(basis.size)
        c[0] = value
        if order >= 1:
            unit = [0] * nvars
            unit[var] = 1
            c[basis.index[tuple(unit)]] = 1.0
        return cls(basis, c)

    @classmethod
    def from_derivatives(cls, derivs: dict[tuple[int, ...], float], nvars: int, order: int) -> Jet:
        """Build a jet from raw partial derivatives keyed by multi-index."""
        basis = get_basis(nvars, order)
        c = np.zeros(basis.size)
        for alpha, val in derivs.items():
            i = basis.index[tuple(alpha)]
            c[i] = val / basis.factorial[i]
        return cls(basis, c)

    # introspection --------------------------------------------------------

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def nvars(self) -> int:
        return self.basis.nvars

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, nvars={self.nvars}, order={self.order})"

    def coefficient(self, alpha: Sequence[int]) -> float:
        return float(self.coeffs[self.basis.index[tuple(alpha)]]) if sum(alpha) <= self.order else 0.0

    def partial(self, alpha: Sequence[int]) -> float:
        """Raw partial derivative d^alpha f at the base point."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.nvars:
            raise ValueError(f"multi-index has {len(alpha)} entries, jet has {self.nvars} variables")
        if sum(alpha) > self.order:
            raise OrderExceeded(f"|alpha| = {sum(alpha)} exceeds jet order {self.order}")
        i = self.basis.index[alpha]
        return float(self.coeffs[i] * self.basis.factorial[i])

    def truncate(self, order: int) -> Jet:
        if order == self.order:
            return self
        if order > self.order:
            raise OrderExceeded(f"cannot raise jet order {self.order} to {order}")
        if order < 0:
            raise OrderExceeded("negative jet order")
        basis = get_basis(self.nvars, order)
        return Jet(basis, self.coeffs[: basis.size])

    def diff(self, var: int) -> Jet:
        """Exact partial derivative d/dv as a jet of order d-1."""
        if self.order == 0:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        src, dst, fac = self.basis.diff_table(var)
        lower = get_basis(self.nvars, self.order - 1)
        c = np.zeros(lower.size)
        keep = dst < lower.size
        c[dst[keep]] = self.coeffs[src[keep]] * fac[keep]
        return Jet(lower, c)

    def reflect(self, flip: Sequence[int]) -> Jet:
        """Jet of f(..., -v, ...) at the reflected point, given f's jet at the point.

        If this jet expands ``f`` at ``(x, -y)`` then the result expands
        ``g(x, y) = f(x, -y)`` at ``(x, y)``.
        """
        return Jet(self.basis, self.coeffs * self.basis.y_parity(tuple(flip)))

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> tuple[Jet, Jet] | None:
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable sets")
            if other.order == self.order:
                return self, other
            d = min(self.order, other.order)
            return self.truncate(d), other.truncate(d)
        return None

    def __add__(self, other) -> Jet:
        pair = self._coerce(other)
        if pair is None:
            c = self.coeffs.copy()
            c[0] += other
            return Jet(self.basis, c)
        a, b = pair
        return Jet(a.basis, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self) -> Jet:
        return Jet(self.basis, -self.coeffs)

    def __pos__(self) -> Jet:
        return self

    def __sub__(self, other) -> Jet:
        return self + (-other)

    def __rsub__(self, other) -> Jet:
        return (-self) + other

    def __mul__(self, other) -> Jet:
        pair = self._coerce(other)
        if pair is None:
            return Jet(self.basis, self.coeffs * other)
        a, b = pair
        I, J, K = a.basis._mul
        c = np.bincount(K, weights=a.coeffs[I] * b.coeffs[J], minlength=a.basis.size)
        return Jet(a.basis, c)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Jet:
        if isinstance(other, Jet):
            return self * reciprocal(other)
        if abs(other) <= _singular_floor:
            raise SingularJet(f"division by {other!r}")
        return Jet(self.basis, self.coeffs / other)

    def __rtruediv__(self, other) -> Jet:
        return reciprocal(self) * other

    def __pow__(self, k) -> Jet:
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
            raise TypeError("jets only support integer powers")
        k = int(k)
        if k < 0:
            return reciprocal(self) ** (-k)
        result = Jet.constant(1.0, self.nvars, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result


def lift_point(point: Sequence[float], order: int = DEFAULT_ORDER) -> list[Jet]:
    """One variable jet per coordinate of ``point``."""
    if order < 0:
        raise OrderExceeded("jet order must be >= 0")
    m = len(point)
    return [Jet.variable(float(v), i, m, order) for i, v in enumerate(point)]


def constant_like(j: Jet, value: float) -> Jet:
    return Jet.constant(value, j.nvars, j.order)


# univariate composition ---------------------------------------------------

def _compose(a: Jet, series: Sequence[float]) -> Jet:
    """f(a) from the Taylor coefficients of f at a's value (Horner in a - a0)."""
    h = Jet(a.basis, a.coeffs.copy())
    h.coeffs[0] = 0.0
    d = a.order
    c = np.zeros(a.basis.size)
    c[0] = series[d]
    out = Jet(a.basis, c)
    for k in range(d - 1, -1, -1):
        out = out * h + series[k]
    return out


def _check_positive(a: Jet, what: str) -> float:
    a0 = a.value
    if a0 <= _singular_floor:
        raise SingularJet(f"{what} of {a0!r}")
    return a0


def reciprocal(a: Jet) -> Jet:
    a0 = a.value
    if abs(a0) <= _singular_floor:
        raise SingularJet(f"reciprocal of {a0!r}")
    return _compose(a, [(-1.0) ** k / a0 ** (k + 1) for k in range(a.order + 1)])


def sqrt(a: Jet) -> Jet:
    a0 = _check_positive(a, "sqrt")
    r = math.sqrt(a0)
    series, coef = [], 1.0
    for k in range(a.order + 1):
        series.append(r * coef / a0 ** k)
        coef *= (0.5 - k) / (k + 1)
    return _compose(a, series)


def exp(a: Jet) -> Jet:
    e = math.exp(a.value)
    return _compose(a, [e / math.factorial(k) for k in range(a.order + 1)])


def log(a: Jet) -> Jet:
    a0 = _check_positive(a, "ln")
    series = [math.log(a0)]
    series += [(-1.0) ** (k + 1) / (k * a0 ** k) for k in range(1, a.order + 1)]
    return _compose(a, series)


def sin(a: Jet) -> Jet:
    s, c = math.sin(a.value), math.cos(a.value)
    cycle = [s, c, -s, -c]
    return _compose(a, [cycle[k % 4] / math.factorial(k) for k in range(a.order + 1)])


def cos(a: Jet) -> Jet:
    s, c = math.sin(a.value), math.cos(a.value)
    cycle = [c, -s, -c, s]
    return _compose(a, [cycle[k % 4] / math.factorial(k) for k in range(a.order + 1)])


def atan(a: Jet) -> Jet:
    a0 = a.value
    d = a.order
    # 1/(1 + (a0+s)^2) = 1/(q0 + q1 s + s^2) as a power series in s
    q0, q1 = 1.0 + a0 * a0, 2.0 * a0
    g = [0.0] * max(d, 1)
    g[0] = 1.0 / q0
    for k in range(1, d):
        acc = q1 * g[k - 1]
        if k >= 2:
            acc += g[k - 2]
        g[k] = -acc / q0
    series = [math.atan(a0)] + [g[k - 1] / k for k in range(1, d + 1)]
    return _compose(a, series)
