"""Packing value type, contact graphs, density and validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .geometry import (
    LatticeBasis,
    TricuspContainer,
    is_positive_lift,
    lattice_area,
    minimal_images,
    reduce_point,
    tricusp_clearances,
)

Container = Union[LatticeBasis, TricuspContainer]

CONTACT_TOL_FACTOR = 1e-8
OVERLAP_TOL_FACTOR = 1e-9


class OverlapError(ValueError):
    """Two disks (or a disk and a wall) overlap beyond tolerance."""


class SchemaError(ValueError):
    """A packing file does not follow the packing JSON schema."""


class Packing:
    """Disks with fixed centers and radii in a flat torus or the tricusp.

    Torus packings are stored with disk 0 at the origin and every center reduced
    to the fundamental cell. Tricusp packings are stored at boundary radius 1.
    Instances are immutable.
    """

    __slots__ = ("container", "centers", "radii", "meta")

    def __init__(self, container: Container, centers, radii, meta: Optional[dict] = None):
        centers = np.array(centers, dtype=float).reshape(-1, 2)
        radii = np.array(radii, dtype=float).ravel()
        if centers.shape[0] < 1:
            raise ValueError("a packing needs at least one disk")
        if centers.shape[0] != radii.size:
            raise ValueError("centers and radii have different lengths")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(radii))):
            raise ValueError("centers and radii must be finite")
        if np.any(radii <= 0):
            raise ValueError("radii must be positive")
        if isinstance(container, LatticeBasis):
            origin = centers[0].copy()
            centers = np.array([reduce_point(p - origin, container) for p in centers])
            centers[0] = 0.0
        elif isinstance(container, TricuspContainer):
            if container.R != 1.0:
                scale = 1.0 / container.R
                centers = centers * scale
                radii = radii * scale
                container = TricuspContainer(1.0)
        else:
            raise TypeError(f"unsupported container {container!r}")
        centers.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, "container", container)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "meta", dict(meta or {}))

    def __setattr__(self, name, value):
        raise AttributeError("Packing is immutable")

    def __repr__(self):
        return f"Packing(n={self.n}, container={self.container!r})"

    @property
    def n(self) -> int:
        return self.radii.size

    @property
    def is_torus(self) -> bool:
        return isinstance(self.container, LatticeBasis)

    @property
    def lattice(self) -> LatticeBasis:
        if not self.is_torus:
            raise TypeError("tricusp packings have no lattice")
        return self.container

    def geometric_mean_radius(self) -> float:
        return float(np.exp(np.mean(np.log(self.radii))))

    def default_contact_tol(self) -> float:
        return CONTACT_TOL_FACTOR * self.geometric_mean_radius()

    def default_overlap_tol(self) -> float:
        return OVERLAP_TOL_FACTOR * self.geometric_mean_radius()

    def replace(self, container=None, centers=None, radii=None, meta=None) -> "Packing":
        return Packing(
            self.container if container is None else container,
            self.centers if centers is None else centers,
            self.radii if radii is None else radii,
            self.meta if meta is None else meta,
        )

    def scaled(self, s: float) -> "Packing":
        """Uniform similarity by ``s`` (torus only; the tricusp has fixed size)."""
        if not self.is_torus:
            raise TypeError("tricusp packings live at a fixed scale")
        L = self.lattice
        return Packing(LatticeBasis(s * L.a, s * L.b, s * L.c), s * self.centers, s * self.radii, self.meta)

    def permuted(self, order: Sequence[int]) -> "Packing":
        order = list(order)
        return Packing(self.container, self.centers[order], self.radii[order], self.meta)


@dataclass(frozen=True)
class Contact:
    """A touching pair, or a disk touching a tricusp wall when ``boundary`` is set.

    ``vector`` is the edge vector p_i - p_j + z1*lambda1 + z2*lambda2 (or p_i - c_k
    for walls), pointing from the partner towards disk ``i``.
    """

    i: int
    j: int
    lift: Tuple[int, int]
    gap: float
    boundary: Optional[int] = None
    vector: Tuple[float, float] = field(default=(0.0, 0.0), compare=False)

    @property
    def is_loop(self) -> bool:
        return self.boundary is None and self.i == self.j

    @property
    def is_wall(self) -> bool:
        return self.boundary is not None

    @property
    def key(self) -> tuple:
        return (self.i, self.j, 0 if self.boundary is None else self.boundary, self.lift)

    @property
    def edge(self) -> np.ndarray:
        return np.array(self.vector)


@dataclass
class ContactGraph:
    n: int
    contacts: List[Contact]
    tol: float

    def __post_init__(self):
        keys = [c.key for c in self.contacts]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate contacts")

    @property
    def k(self) -> int:
        return len(self.contacts)

    def adjacency(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {v: [] for v in range(self.n)}
        for idx, c in enumerate(self.contacts):
            adj[c.i].append(idx)
            if c.j != c.i and not c.is_wall:
                adj[c.j].append(idx)
        return adj

    def degree(self, v: int, include_loops: bool = True) -> int:
        d = 0
        for c in self.contacts:
            if c.is_loop:
                d += 2 if (include_loops and c.i == v) else 0
            elif c.i == v or (not c.is_wall and c.j == v):
                d += 1
        return d

    def restricted(self, vertices: Sequence[int]) -> "ContactGraph":
        """Contacts with both ends in ``vertices`` (walls count as always present)."""
        keep = set(vertices)
        cs = [c for c in self.contacts if c.i in keep and (c.is_wall or c.j in keep)]
        return ContactGraph(self.n, cs, self.tol)


def density(P: Packing) -> float:
    area = lattice_area(P.container) if P.is_torus else P.container.area
    return math.pi * float(np.sum(P.radii ** 2)) / area


def _canonical(i, j, lift, vec):
    """Orient a pair so that i <= j and loops carry a lexicographically positive lift."""
    if i > j or (i == j and not is_positive_lift(lift)):
        return j, i, (-lift[0], -lift[1]), -vec
    return i, j, lift, vec


def pair_gaps(P: Packing, slack: float) -> List[Contact]:
    """Every pair/lift (and wall) whose gap is at most ``slack``, canonically ordered."""
    out: List[Contact] = []
    c, r = P.centers, P.radii
    if P.is_torus:
        L = P.lattice
        for i in range(P.n):
            for j in range(i, P.n):
                cutoff = r[i] + r[j] + slack
                if cutoff <= 0:
                    continue
                for vec, lift in minimal_images(c[i], c[j], L, cutoff):
                    if i == j and not is_positive_lift(lift):
                        continue
                    gap = float(np.hypot(*vec)) - (r[i] + r[j])
                    ii, jj, zz, vv = _canonical(i, j, lift, vec)
                    out.append(Contact(ii, jj, zz, gap, None, (float(vv[0]), float(vv[1]))))
    else:
        T = P.container
        for i in range(P.n):
            for j in range(i + 1, P.n):
                vec = c[i] - c[j]
                gap = float(np.hypot(*vec)) - (r[i] + r[j])
                if gap <= slack:
                    out.append(Contact(i, j, (0, 0), gap, None, (float(vec[0]), float(vec[1]))))
            gaps = tricusp_clearances(c[i], r[i], T)
            for k in range(3):
                if gaps[k] <= slack:
                    vec = c[i] - T.centers[k]
                    out.append(Contact(i, i, (0, 0), float(gaps[k]), k + 1, (float(vec[0]), float(vec[1]))))
    out.sort(key=lambda ct: ct.key)
    return out


def detect_contacts(P: Packing, contact_tol: Optional[float] = None) -> ContactGraph:
    """Contact graph at tolerance ``contact_tol`` (default 1e-8 x geometric-mean radius)."""
    tol = P.default_contact_tol() if contact_tol is None else float(contact_tol)
    if tol < 0:
        raise ValueError("contact_tol must be non-negative")
    guard = max(10.0 * tol, 1e-300)
    near = pair_gaps(P, tol)
    bad = [ct for ct in near if ct.gap < -guard]
    if bad:
        worst = min(bad, key=lambda ct: ct.gap)
        raise OverlapError(
            f"{len(bad)} overlapping pair(s); worst {worst.i},{worst.j} lift={worst.lift} "
            f"boundary={worst.boundary} gap={worst.gap:.3e}"
        )
    return ContactGraph(P.n, [ct for ct in near if abs(ct.gap) <= tol], tol)


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    lift: Tuple[int, int]
    gap: float
    boundary: Optional[int] = None
    kind: str = "overlap"


def validate(P: Packing, overlap_tol: Optional[float] = None) -> List[Violation]:
    """All pairs (and walls) closer than ``-overlap_tol``; empty means ``P`` is a packing."""
    tol = P.default_overlap_tol() if overlap_tol is None else float(overlap_tol)
    out = [
        Violation(ct.i, ct.j, ct.lift, ct.gap, ct.boundary)
        for ct in pair_gaps(P, 0.0)
        if ct.gap < -tol
    ]
    if not P.is_torus:
        for i, p in enumerate(P.centers):
            if not P.container.contains(p):
                out.append(Violation(i, i, (0, 0), float("nan"), None, "outside"))
    return out


def is_valid(P: Packing, overlap_tol: Optional[float] = None) -> bool:
    return not validate(P, overlap_tol)


# ------------------------------------------------------------------ serialization


def _fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("refusing to serialize a non-finite number")
    return format(x, ".16e")


def _emit(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_emit(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _emit(obj)


def packing_to_dict(P: Packing) -> dict:
    if P.is_torus:
        container = {"type": "torus", "lattice": [float(v) for v in P.lattice.as_list()]}
    else:
        container = {"type": "tricusp", "R": 1.0}
    return {
        "container": container,
        "centers": [[float(x), float(y)] for x, y in P.centers],
        "radii": [float(r) for r in P.radii],
        "meta": P.meta,
    }


def packing_to_json(P: Packing) -> str:
    return dumps(packing_to_dict(P)) + "\n"


def _number(v, what):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{what} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise SchemaError(f"{what} must be finite")
    return v


def packing_from_dict(data) -> Packing:
    if not isinstance(data, dict):
        raise SchemaError("packing must be a JSON object")
    for key in ("container", "centers", "radii"):
        if key not in data:
            raise SchemaError(f"missing field {key!r}")
    cont = data["container"]
    if not isinstance(cont, dict) or cont.get("type") not in ("torus", "tricusp"):
        raise SchemaError("container.type must be 'torus' or 'tricusp'")
    try:
        if cont["type"] == "torus":
            lat = cont.get("lattice")
            if not isinstance(lat, list) or len(lat) != 3:
                raise SchemaError("torus container needs lattice [a, b, c]")
            container = LatticeBasis(*[_number(v, "lattice entry") for v in lat])
        else:
            container = TricuspContainer(_number(cont.get("R", 1.0), "R"))
        centers = data["centers"]
        radii = data["radii"]
        if not isinstance(centers, list) or not isinstance(radii, list):
            raise SchemaError("centers and radii must be arrays")
        pts = []
        for p in centers:
            if not isinstance(p, list) or len(p) != 2:
                raise SchemaError("each center must be [x, y]")
            pts.append([_number(p[0], "center"), _number(p[1], "center")])
        rs = [_number(r, "radius") for r in radii]
        meta = data.get("meta", {})
        if not isinstance(meta, dict):
            raise SchemaError("meta must be an object")
        return Packing(container, pts, rs, meta)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def packing_from_json(text: str) -> Packing:
    try:
        data = json.loads(text, parse_constant=lambda name: float(name))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return packing_from_dict(data)


def write_packing(P: Packing, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(packing_to_json(P))


def read_packing(path) -> Packing:
    with open(path, encoding="utf-8") as fh:
        return packing_from_json(fh.read())
