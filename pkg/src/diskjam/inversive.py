"""Inversive distances and completion of contact graphs to triangulations.

Faces are traced from the rotation system of the contact graph, working in the
universal cover: every half-edge carries its plane vector, so loops and
multiple edges on the torus become ordinary edges of a planar picture. Each
non-triangular face is split by a fan of diagonals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import LatticeBasis, TricuspContainer, is_positive_lift
from .packing import ContactGraph, OverlapError, Packing, detect_contacts, dumps
from .rigidity import extract_spine

SIGMA_TOL = 1e-8
CLOSURE_TOL = 1e-9


class TriangulationError(ValueError):
    """The contact graph does not cellularly embed (a face is not a disk)."""


def inversive_distance(p1, r1: float, p2, r2: float, lift=(0, 0), L: Optional[LatticeBasis] = None) -> float:
    """(|d|^2 - r1^2 - r2^2) / (2 r1 r2) with d = p1 - p2 + lift."""
    if not (r1 > 0 and r2 > 0):
        raise ValueError("radii must be positive")
    d = np.asarray(p1, dtype=float) - np.asarray(p2, dtype=float)
    if L is not None:
        d = d + L.vector(*lift)
    return (float(d @ d) - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)


@dataclass(frozen=True)
class Edge:
    """Vector p_i - p_j + z1*lambda1 + z2*lambda2 (indices >= n are tricusp walls)."""

    i: int
    j: int
    lift: Tuple[int, int]
    kind: str  # "contact" | "diagonal"

    def as_list(self) -> list:
        return [self.i, self.j, self.lift[0], self.lift[1], self.kind]


@dataclass
class Triangulation:
    n: int
    vertices: List[int]  # packing indices in the triangulation; walls are n, n+1, n+2
    positions: np.ndarray  # plane positions indexed like packing (then walls)
    edges: List[Edge]
    faces: List[Tuple[Tuple[int, int, int], ...]]  # ((v, z1, z2), x3), ccw
    tricusp: bool = False
    lattice: Optional[LatticeBasis] = None

    @property
    def contact_edges(self) -> List[Edge]:
        return [e for e in self.edges if e.kind == "contact"]

    @property
    def diagonals(self) -> List[Edge]:
        return [e for e in self.edges if e.kind == "diagonal"]

    def edge_vector(self, e: Edge) -> np.ndarray:
        v = self.positions[e.i] - self.positions[e.j]
        if self.lattice is not None:
            v = v + self.lattice.vector(*e.lift)
        return v

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "container": "tricusp" if self.tricusp else "torus",
            "vertices": list(self.vertices),
            "edges": [e.as_list() for e in self.edges],
            "faces": [[list(v) for v in f] for f in self.faces],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


@dataclass
class _HalfEdge:
    u: int
    v: int
    lift: Tuple[int, int]  # head sits at p_v + lift
    vec: np.ndarray
    kind: str
    twin: int = -1


def _canonical_edge(i: int, j: int, lift: Tuple[int, int], kind: str) -> Edge:
    if i > j or (i == j and not is_positive_lift(lift)):
        i, j, lift = j, i, (-lift[0], -lift[1])
    return Edge(i, j, (int(lift[0]), int(lift[1])), kind)


def _angle(v: np.ndarray) -> float:
    return math.atan2(v[1], v[0])


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _tri_angles(a, b, c) -> List[float]:
    out = []
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        u, w = q - p, r - p
        out.append(math.atan2(abs(u[0] * w[1] - u[1] * w[0]), float(u @ w)))
    return out


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1, d2 = _orient(q1, q2, p1), _orient(q1, q2, p2)
    d3, d4 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _best_fan(q: np.ndarray, labels: Sequence[int]) -> Optional[int]:
    """Apex of the admissible fan with the largest minimum angle."""
    m = len(q)
    scale = max(float(np.ptp(q[:, 0])), float(np.ptp(q[:, 1])), 1e-300)
    best, best_key = None, None
    for a in range(m):
        ok = True
        worst = math.inf
        for k in range(1, m - 1):
            A, B, C = q[a], q[(a + k) % m], q[(a + k + 1) % m]
            if _orient(A, B, C) <= 1e-12 * scale * scale:
                ok = False
                break
            worst = min(worst, min(_tri_angles(A, B, C)))
        if not ok:
            continue
        # diagonals must not cross the boundary
        for k in range(2, m - 1):
            A, B = q[a], q[(a + k) % m]
            for s in range(m):
                e1, e2 = s, (s + 1) % m
                if a in (e1, e2) or (a + k) % m in (e1, e2):
                    continue
                if _segments_cross(A, B, q[e1], q[e2]):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        key = (-round(worst, 12), labels[a], a)
        if best_key is None or key < best_key:
            best, best_key = a, key
    return best


def complete_to_triangulation(P: Packing, G: Optional[ContactGraph] = None,
                              vertices: Optional[Sequence[int]] = None) -> Triangulation:
    """Add fan diagonals until every face of the contact graph is a triangle.

    By default the spine is triangulated; rattlers carry no faces.
    """
    G = detect_contacts(P) if G is None else G
    if vertices is None:
        vertices, _ = extract_spine(P, G)
    verts = sorted(set(vertices))
    if not verts:
        raise TriangulationError("nothing to triangulate: empty spine")
    inside = set(verts)
    tricusp = not P.is_torus
    L = P.lattice if P.is_torus else None
    n = P.n
    pos = P.centers.copy()
    if tricusp:
        pos = np.vstack([pos, P.container.centers])

    half: List[_HalfEdge] = []

    def add(i: int, j: int, lift: Tuple[int, int], kind: str) -> None:
        # edge vector p_i - p_j + lift points from j to i
        vec = pos[i] - pos[j]
        if L is not None:
            vec = vec + L.vector(*lift)
        a = _HalfEdge(j, i, lift, vec, kind)
        b = _HalfEdge(i, j, (-lift[0], -lift[1]), -vec, kind)
        a.twin, b.twin = len(half) + 1, len(half)
        half.extend([a, b])

    contact_edges = []
    for c in G.contacts:
        if c.i not in inside:
            continue
        if c.is_wall:
            add(c.i, n + c.boundary - 1, (0, 0), "contact")
            contact_edges.append(Edge(c.i, n + c.boundary - 1, (0, 0), "contact"))
        elif c.j in inside:
            add(c.i, c.j, c.lift, "contact")
            contact_edges.append(Edge(c.i, c.j, c.lift, "contact"))
    if tricusp:
        for k, l in ((0, 1), (1, 2), (0, 2)):
            add(n + k, n + l, (0, 0), "contact")
            contact_edges.append(Edge(n + k, n + l, (0, 0), "contact"))

    out: Dict[int, List[int]] = {}
    for h, he in enumerate(half):
        out.setdefault(he.u, []).append(h)
    all_vertices = verts + ([n, n + 1, n + 2] if tricusp else [])
    for v in all_vertices:
        if v not in out:
            raise TriangulationError(f"vertex {v} has no edges")
        out[v].sort(key=lambda h: (_angle(half[h].vec), h))
    where = {h: (v, k) for v, hs in out.items() for k, h in enumerate(hs)}

    def nxt(h: int) -> int:
        r = half[h].twin
        v, k = where[r]
        return out[v][(k - 1) % len(out[v])]

    seen = [False] * len(half)
    faces_raw = []
    for h0 in range(len(half)):
        if seen[h0]:
            continue
        cycle = []
        h = h0
        while not seen[h]:
            seen[h] = True
            cycle.append(h)
            h = nxt(h)
        if h != h0:
            raise TriangulationError("rotation system is inconsistent")
        faces_raw.append(cycle)

    diagonals: List[Edge] = []
    faces = []
    for cycle in faces_raw:
        q = [pos[half[cycle[0]].u]]
        lifts = [(0, 0)]
        for h in cycle:
            q.append(q[-1] + half[h].vec)
            z = lifts[-1]
            lifts.append((z[0] + half[h].lift[0], z[1] + half[h].lift[1]))
        q = np.array(q)
        span = max(1.0, float(np.max(np.abs(q))))
        if np.max(np.abs(q[-1] - q[0])) > CLOSURE_TOL * span:
            raise TriangulationError("a face does not close in the universal cover")
        q = q[:-1]
        labels = [half[h].u for h in cycle]
        lifts = lifts[:-1]
        area = 0.5 * sum(_orient(q[0], q[k], q[k + 1]) for k in range(1, len(q) - 1))
        if tricusp and area < 0:
            continue  # the outer face, outside the three boundary circles
        if area <= 0:
            raise TriangulationError("a face has non-positive area; graph is not cellular")
        m = len(q)
        if m == 3:
            faces.append(_face(labels, lifts, [0, 1, 2]))
            continue
        a = _best_fan(q, labels)
        if a is None:
            raise TriangulationError(f"no admissible fan for a {m}-gon face")
        for k in range(1, m - 1):
            b, c = (a + k) % m, (a + k + 1) % m
            faces.append(_face(labels, lifts, [a, b, c]))
            if k >= 2:
                ua, ub = labels[a], labels[b]
                za, zb = lifts[a], lifts[b]
                lift = (zb[0] - za[0], zb[1] - za[1])
                diagonals.append(_canonical_edge(ub, ua, lift, "diagonal"))

    edges = contact_edges + sorted(diagonals, key=lambda e: (e.i, e.j, e.lift))
    T = Triangulation(n, verts, pos, edges, sorted(faces), tricusp, L)
    _check_counts(T, len(verts))
    return T


def _face(labels, lifts, idx) -> Tuple[Tuple[int, int, int], ...]:
    """Triangle with lifts taken relative to its smallest (vertex, lift) entry, rotated to start there."""
    pts = [(labels[k], lifts[k][0], lifts[k][1]) for k in idx]
    s = min(range(3), key=lambda k: pts[k])
    pts = pts[s:] + pts[:s]
    base = pts[0]
    return tuple((v, z1 - base[1], z2 - base[2]) for v, z1, z2 in pts)


def _check_counts(T: Triangulation, nv: int) -> None:
    e = len(T.edges)
    want = 3 * nv + 3 if T.tricusp else 3 * nv
    if e != want:
        raise TriangulationError(f"triangulation has {e} edges, expected {want}")
    faces = len(T.faces)
    want_f = 2 * nv + 1 if T.tricusp else 2 * nv
    if faces != want_f:
        raise TriangulationError(f"triangulation has {faces} faces, expected {want_f}")


def face_closure(T: Triangulation) -> float:
    """Largest |sum of lifted edge vectors| over all triangles."""
    worst = 0.0
    for f in T.faces:
        pts = []
        for v, z1, z2 in f:
            p = T.positions[v]
            if T.lattice is not None:
                p = p + T.lattice.vector(z1, z2)
            pts.append(p)
        s = (pts[1] - pts[0]) + (pts[2] - pts[1]) + (pts[0] - pts[2])
        worst = max(worst, float(np.max(np.abs(s))))
    return worst


@dataclass
class DimensionReport:
    n: int
    k: int
    bound: int  # 3n - k
    slack: int  # (3n - k) - (n + 1)
    isostatic_count: bool  # k == 2n - 1

    def to_dict(self) -> dict:
        return dict(n=self.n, k=self.k, bound=self.bound, slack=self.slack, isostatic_count=self.isostatic_count)


def dimension_report(P: Packing, G: Optional[ContactGraph] = None) -> DimensionReport:
    G = detect_contacts(P) if G is None else G
    n, k = P.n, G.k
    bound = 3 * n - k
    return DimensionReport(n, k, bound, bound - (n + 1), k == 2 * n - 1)


def _radius(P: Packing, v: int) -> float:
    return float(P.radii[v]) if v < P.n else P.container.R


def inversive_profile(P: Packing, T: Triangulation) -> List[Tuple[Edge, float]]:
    """Inversive distance of every triangulation edge (boundary circles included)."""
    out = []
    for e in T.edges:
        d = T.edge_vector(e)
        r1, r2 = _radius(P, e.i), _radius(P, e.j)
        sigma = (float(d @ d) - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
        if e.kind == "contact" and abs(sigma - 1.0) > SIGMA_TOL:
            raise OverlapError(f"contact edge {e.as_list()} has sigma {sigma!r}")
        if e.kind == "diagonal" and sigma < 1.0 - SIGMA_TOL:
            raise OverlapError(f"diagonal {e.as_list()} has sigma {sigma!r} < 1: disks overlap")
        out.append((e, sigma))
    return out


def profile_to_dict(profile: Sequence[Tuple[Edge, float]], T: Triangulation) -> dict:
    d = T.to_dict()
    d["sigma"] = [float(s) for _, s in profile]
    return d
