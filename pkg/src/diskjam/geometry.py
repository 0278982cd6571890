"""Flat-torus lattices, periodic image enumeration, and the tricusp container."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

Point = Tuple[float, float]
Lift = Tuple[int, int]


@dataclass(frozen=True)
class LatticeBasis:
    """Lattice spanned by (a, 0) and (b, c), with 0 <= b < a enforced on construction."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = float(self.a), float(self.b), float(self.c)
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
            raise ValueError("lattice parameters must be finite")
        if a <= 0 or c <= 0:
            raise ValueError(f"lattice needs a > 0 and c > 0, got a={a}, c={c}")
        # replacing (b, c) by (b - k a, c) is a change of basis of the same lattice
        b = b - math.floor(b / a) * a
        if b >= a:
            b = 0.0
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def matrix(self) -> np.ndarray:
        """Columns are the two basis vectors."""
        return np.array([[self.a, self.b], [0.0, self.c]])

    @property
    def determinant(self) -> float:
        return self.a * self.c

    def vector(self, z1: int, z2: int) -> np.ndarray:
        return np.array([z1 * self.a + z2 * self.b, z2 * self.c])

    def shortest_vector_length(self) -> float:
        best = math.inf
        for z1 in range(-3, 4):
            for z2 in range(-3, 4):
                if z1 or z2:
                    best = min(best, float(np.hypot(*self.vector(z1, z2))))
        return best

    def as_list(self) -> List[float]:
        return [self.a, self.b, self.c]


def lattice_area(lattice: LatticeBasis) -> float:
    return lattice.a * lattice.c


def reduce_point(p, lattice: LatticeBasis) -> np.ndarray:
    """Representative of ``p`` in the half-open cell [0,1)*lambda1 + [0,1)*lambda2."""
    x, y = float(p[0]), float(p[1])
    # repeat until stable so that reducing a reduced point changes no bits
    for _ in range(8):
        nx, ny = _reduce_once(x, y, lattice)
        if nx == x and ny == y:
            break
        x, y = nx, ny
    return np.array([x, y])


def _reduce_once(x: float, y: float, lattice: LatticeBasis) -> Tuple[float, float]:
    a, b, c = lattice.a, lattice.b, lattice.c
    y, k2 = _wrap(y, c)
    if k2:
        x -= k2 * b
    shift = y * b / c  # the cell's left edge at height y
    u, _ = _wrap(x - shift, a)
    if u >= a - 4.0 * EPS * (a + abs(shift)):
        u = 0.0  # a rounding error away from the right edge is the left edge
    return u + shift, y


EPS = float(np.finfo(float).eps)


def _wrap(v: float, period: float) -> Tuple[float, int]:
    k = math.floor(v / period)
    w = v - k * period
    if w >= period:
        k += 1
        w = v - k * period
    if w < 0.0:
        k -= 1
        w = v - k * period
    if w >= period:
        # v sits a rounding error below a multiple of the period
        k += 1
        w = 0.0
    return w, k


def lift_key(lift: Lift) -> Tuple[int, int]:
    return (int(lift[0]), int(lift[1]))


def is_positive_lift(lift: Lift) -> bool:
    """Lexicographic positivity, used as the canonical orientation of loops."""
    z1, z2 = lift
    return z1 > 0 or (z1 == 0 and z2 > 0)


def minimal_images(p, q, lattice: LatticeBasis, cutoff: float) -> List[Tuple[np.ndarray, Lift]]:
    """All displacements ``p - q + z1*lambda1 + z2*lambda2`` no longer than ``cutoff``.

    The zero lift is skipped when ``p`` and ``q`` coincide. Results are ordered by
    length, then by lift.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    if cutoff > 3.0 * max(lattice.a, lattice.c):
        raise ValueError(
            f"cutoff {cutoff} exceeds 3*max(a, c) = {3.0 * max(lattice.a, lattice.c)}"
        )
    a, b, c = lattice.a, lattice.b, lattice.c
    dx = float(p[0]) - float(q[0])
    dy = float(p[1]) - float(q[1])
    same = dx == 0.0 and dy == 0.0
    out = []
    z2_lo = math.floor((-cutoff - dy) / c) - 1
    z2_hi = math.ceil((cutoff - dy) / c) + 1
    for z2 in range(z2_lo, z2_hi + 1):
        ey = dy + z2 * c
        if abs(ey) > cutoff:
            continue
        base = dx + z2 * b
        z1_lo = math.floor((-cutoff - base) / a) - 1
        z1_hi = math.ceil((cutoff - base) / a) + 1
        for z1 in range(z1_lo, z1_hi + 1):
            if same and z1 == 0 and z2 == 0:
                continue
            ex = base + z1 * a
            length = math.hypot(ex, ey)
            if length <= cutoff:
                out.append((length, (z1, z2), np.array([ex, ey])))
    out.sort(key=lambda item: (item[0], item[1]))
    return [(vec, lift) for _, lift, vec in out]


SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class TricuspContainer:
    """Region bounded by three mutually tangent circles of radius ``R``.

    Circle centers sit on an equilateral triangle of side 2R whose centroid is the
    origin. Internally R is 1; packings in other units are rescaled onto it.
    """

    R: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("tricusp boundary radius must be positive")

    @property
    def centers(self) -> np.ndarray:
        R = self.R
        return np.array(
            [
                [0.0, 2.0 * R / SQRT3],
                [-R, -R / SQRT3],
                [R, -R / SQRT3],
            ]
        )

    @property
    def area(self) -> float:
        return (SQRT3 - math.pi / 2.0) * self.R ** 2

    @property
    def soddy_radius(self) -> float:
        """Radius of the inner circle tangent to all three boundary circles."""
        return self.R * (2.0 / SQRT3 - 1.0)

    def contains(self, p) -> bool:
        """Whether ``p`` lies in the closed triangle spanned by the boundary centers."""
        c = self.centers
        x, y = float(p[0]), float(p[1])
        for k in range(3):
            (x1, y1), (x2, y2) = c[k], c[(k + 1) % 3]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) < -1e-12 * self.R:
                return False
        return True


def tricusp_clearances(p, r: float, container: TricuspContainer) -> np.ndarray:
    """Signed gaps ``|p - c_k| - (R + r)`` to the three boundary circles."""
    if not r > 0:
        raise ValueError("radius must be positive")
    d = np.hypot(*(np.asarray(p, dtype=float) - container.centers).T)
    return d - (container.R + r)
