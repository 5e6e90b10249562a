"""Deterministic sample points from a seeded Halton sequence.

x is drawn in the domain's box shrunk by 10% about its centre (and inside
0.9 times the radius, if any); y is a direction scaled by a draw in [0.5, 2].
Points violating a domain constraint are rejected.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import norm, qmc

from .errors import EmptyDomain
from .models import Domain

MARGIN = 0.9
Y_SCALE = (0.5, 2.0)
COMPANIONS = (0.5, 2.0)


def shrunk_box(box: Sequence[tuple[float, float]], margin: float = MARGIN) -> list[tuple[float, float]]:
    out = []
    for lo, hi in box:
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo) * margin
        out.append((c - h, c + h))
    return out


def sample_points(domain: Domain, count: int, seed: int = 0, x_box: Sequence[tuple[float, float]] | None = None,
                  y_mode: str = "sphere", max_draws: int | None = None) -> list[tuple[float, ...]]:
    """``count`` points (x, y) inside ``domain``.

    ``y_mode="sphere_scaled"`` follows every point with its companions
    (x, 0.5 y) and (x, 2 y), so the result has 3 * count points.
    """
    if y_mode not in ("sphere", "sphere_scaled"):
        raise ValueError(f"unknown y_mode {y_mode!r}")
    if count < 1:
        raise ValueError("count must be >= 1")
    n = domain.n
    box = list(domain.x_box if x_box is None else x_box)
    if len(box) != n:
        raise ValueError(f"x_box has {len(box)} intervals for dimension {n}")
    box = [(max(lo, dlo), min(hi, dhi)) for (lo, hi), (dlo, dhi) in zip(box, domain.x_box)]
    if any(not lo < hi for lo, hi in box):
        raise EmptyDomain(f"sampling box {box} is empty")
    box = shrunk_box(box)
    radius = None if domain.x_radius is None else MARGIN * domain.x_radius
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    sampler = qmc.Halton(2 * n + 1, scramble=True, seed=seed)
    limit = max_draws or 200 * count + 1000
    out: list[tuple[float, ...]] = []
    drawn = 0
    while len(out) < count and drawn < limit:
        batch = sampler.random(max(64, 2 * (count - len(out))))
        drawn += len(batch)
        for u in batch:
            x = lo + (hi - lo) * u[:n]
            if radius is not None and float(np.linalg.norm(x)) > radius:
                continue
            d = norm.ppf(np.clip(u[n:2 * n], 1e-9, 1 - 1e-9))
            nd = float(np.linalg.norm(d))
            if nd < 1e-9:
                continue
            y = d / nd * (Y_SCALE[0] + (Y_SCALE[1] - Y_SCALE[0]) * u[2 * n])
            group = [np.concatenate([x, y])]
            if y_mode == "sphere_scaled":
                group += [np.concatenate([x, lam * y]) for lam in COMPANIONS]
            if all(domain.contains(p) for p in group):
                out.extend(tuple(float(v) for v in p) for p in group)
                if len(out) >= count * len(group):
                    break
    need = count * (3 if y_mode == "sphere_scaled" else 1)
    if len(out) < need:
        raise EmptyDomain(f"found only {len(out)} of {need} points after {drawn} draws")
    return out[:need]
