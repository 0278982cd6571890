"""Named packings.

Entries with a closed-form construction are built from exact formulas. Entries
found by the jamming driver were produced by ``scripts/derive_catalog.py`` and
are frozen as literal constants in ``_catalog_data``.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List

import numpy as np

from ._catalog_data import FROZEN
from .geometry import LatticeBasis, TricuspContainer
from .packing import Packing

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def grid5() -> Packing:
    r = 1.0 / (2.0 * math.sqrt(5.0))
    centers = [(k * 2.0 / 5.0, k * 1.0 / 5.0) for k in range(5)]
    return Packing(LatticeBasis(1.0, 0.0, 1.0), centers, [r] * 5, {"name": "grid5"})


def square1() -> Packing:
    return Packing(LatticeBasis(1.0, 0.0, 1.0), [(0.0, 0.0)], [0.5], {"name": "square1"})


def triangular1() -> Packing:
    return Packing(LatticeBasis(1.0, 0.5, SQRT3 / 2.0), [(0.0, 0.0)], [0.5], {"name": "triangular1"})


def heppes() -> Packing:
    """Large disk of radius 1 and small disk of radius sqrt(2)-1 in a 2x2 square cell."""
    return Packing(
        LatticeBasis(2.0, 0.0, 2.0),
        [(0.0, 0.0), (1.0, 1.0)],
        [1.0, SQRT2 - 1.0],
        {"name": "heppes"},
    )


def stellar124() -> Packing:
    """Heppes graph with its horizontal large-large edges stellar-subdivided.

    In units where the radii are 3:2:1 the cell is 8 x 6: the large disk sits at a
    corner, the medium one at the cell center and the small one at the midpoint of
    the bottom edge. Every triangle of the contact graph is a 3-4-5 triangle.
    """
    s = 1.0 / 8.0
    return Packing(
        LatticeBasis(8.0 * s, 0.0, 6.0 * s),
        [(0.0, 0.0), (4.0 * s, 3.0 * s), (4.0 * s, 0.0)],
        [3.0 * s, 2.0 * s, 1.0 * s],
        {"name": "stellar124"},
    )


def twodisk_rect(c: float = 1.17, ratio: float = 0.77) -> Packing:
    """Second disk at the center of a rectangular cell, touching four copies of the first."""
    total = 0.5 * math.hypot(1.0, c)
    r1 = total / (1.0 + ratio)
    return Packing(
        LatticeBasis(1.0, 0.0, c),
        [(0.0, 0.0), (0.5, 0.5 * c)],
        [r1, ratio * r1],
        {"name": "twodisk_rect", "ratio": ratio},
    )


def _circumcenter(p, q, r) -> np.ndarray:
    (ax, ay), (bx, by), (cx, cy) = p, q, r
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    return np.array([ux, uy])


def twodisk_slanted(a: float = 1.06, b: float = 0.31, ratio: float = 0.83) -> Packing:
    """Second disk in the deep hole of an oblique determinant-1 lattice (three contacts)."""
    L = LatticeBasis(a, b, 1.0 / a)
    hole = _circumcenter((0.0, 0.0), (L.a, 0.0), (L.b, L.c))
    total = float(np.hypot(*hole))
    r1 = total / (1.0 + ratio)
    return Packing(L, [(0.0, 0.0), hole], [r1, ratio * r1], {"name": "twodisk_slanted", "ratio": ratio})


def soddy() -> Packing:
    T = TricuspContainer(1.0)
    return Packing(T, [(0.0, 0.0)], [T.soddy_radius], {"name": "soddy"})


def tricusp4() -> Packing:
    """Soddy disk plus one disk in each cusp tangent to two walls and the Soddy disk."""
    T = TricuspContainer(1.0)
    rc = T.soddy_radius
    h = 1.0 / SQRT3  # centroid-to-edge-midpoint distance for side 2
    rs = (rc - h) ** 2 / (2.0 * (1.0 - rc + h))
    centers = [np.zeros(2)]
    w = T.centers
    for k, l in ((1, 2), (2, 0), (0, 1)):
        mid = 0.5 * (w[k] + w[l])
        u = mid / np.hypot(*mid)
        centers.append((rc + rs) * u)
    return Packing(T, centers, [rc, rs, rs, rs], {"name": "tricusp4"})


# Coordinates in _catalog_data come from scripts/derive_catalog.py (driver run,
# then a Gauss-Newton polish of the tangency system); they are frozen so catalog
# lookups do not depend on the driver.
_FROZEN: Dict[str, dict] = FROZEN


def _frozen(name: str) -> Callable[[], Packing]:
    def build() -> Packing:
        spec = _FROZEN[name]
        meta = {"name": name, "provenance": spec["provenance"]}
        if spec["container"] == "tricusp":
            return Packing(TricuspContainer(1.0), spec["centers"], spec["radii"], meta)
        return Packing(LatticeBasis(*spec["lattice"]), spec["centers"], spec["radii"], meta)

    build.__name__ = name
    return build


ENTRIES: Dict[str, Callable[[], Packing]] = {
    "grid5": grid5,
    "square1": square1,
    "triangular1": triangular1,
    "heppes": heppes,
    "stellar124": stellar124,
    "twodisk_slanted": twodisk_slanted,
    "twodisk_rect": twodisk_rect,
    "soddy": soddy,
    "tricusp4": tricusp4,
}
for _name in _FROZEN:
    ENTRIES[_name] = _frozen(_name)


def names() -> List[str]:
    return sorted(ENTRIES)


def catalog(name: str) -> Packing:
    try:
        return ENTRIES[name]()
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(names())}") from None
