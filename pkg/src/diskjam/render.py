"""Deterministic SVG drawings of packings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .inversive import complete_to_triangulation
from .packing import Packing, detect_contacts
from .rigidity import analyze


@dataclass
class RenderSpec:
    copies: int = 1
    contacts: bool = True
    stress: bool = False
    rattlers: bool = True
    diagonals: bool = False
    size: int = 800
    margin: int = 20

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError("copies must be at least 1")
        if self.size < 10:
            raise ValueError("canvas too small")


def _f(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


class _Canvas:
    def __init__(self, lo: np.ndarray, hi: np.ndarray, size: int, margin: int):
        span = float(max(hi - lo))
        self.scale = (size - 2 * margin) / span
        self.lo, self.hi = lo, hi
        self.margin = margin
        self.width = int(round(2 * margin + self.scale * (hi[0] - lo[0])))
        self.height = int(round(2 * margin + self.scale * (hi[1] - lo[1])))
        self.items: List[str] = []

    def pt(self, p) -> tuple:
        x = self.margin + self.scale * (p[0] - self.lo[0])
        y = self.margin + self.scale * (self.hi[1] - p[1])
        return x, y

    def circle(self, p, r, cls):
        x, y = self.pt(p)
        self.items.append(f'<circle class="{cls}" cx="{_f(x)}" cy="{_f(y)}" r="{_f(r * self.scale)}"/>')

    def line(self, p, q, cls, width=1.0):
        (x1, y1), (x2, y2) = self.pt(p), self.pt(q)
        self.items.append(
            f'<line class="{cls}" x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke-width="{_f(width)}"/>'
        )

    def polygon(self, pts, cls):
        s = " ".join(f"{_f(x)},{_f(y)}" for x, y in (self.pt(p) for p in pts))
        self.items.append(f'<polygon class="{cls}" points="{s}"/>')

    def svg(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        style = (
            "<style>.cell{fill:none;stroke:#999;stroke-width:0.5}.disk{fill:#cfe3f5;stroke:#24527a}"
            ".rattler{fill:#f5d6cf;stroke:#a04030}.wall{fill:#ddd;stroke:#555}"
            ".contact{stroke:#222}.diagonal{stroke:#777;stroke-dasharray:4 3}"
            ".stress-neg{stroke:#b02020}.stress-pos{stroke:#2040b0}</style>"
        )
        return "\n".join([head, style] + self.items + ["</svg>"]) + "\n"


def render_svg(P: Packing, spec: Optional[RenderSpec] = None) -> str:
    spec = RenderSpec() if spec is None else spec
    G = detect_contacts(P)
    report = analyze(P) if (spec.stress or spec.rattlers) else None
    rattlers = set(report.rattlers) if (report and spec.rattlers) else set()
    stress = {}
    if spec.stress and report and report.jammed and report.witness.get("kind") == "stress":
        spine = set(report.spine)
        kept = [c for c in G.contacts if c.i in spine and (c.is_wall or c.j in spine)]
        for c, w in zip(kept, report.witness["stress"]):
            stress[c.key] = w
    tri = complete_to_triangulation(P, G) if spec.diagonals else None

    if P.is_torus:
        L = P.lattice
        m = spec.copies
        offsets = [L.vector(i, j) for j in range(m) for i in range(m)]
        corners = np.array([L.vector(0, 0), L.vector(m, 0), L.vector(0, m), L.vector(m, m)])
        rmax = float(P.radii.max())
        lo, hi = corners.min(axis=0) - rmax, corners.max(axis=0) + rmax
    else:
        offsets = [np.zeros(2)]
        w = P.container.centers
        lo, hi = w.min(axis=0) - 1.0, w.max(axis=0) + 1.0
    cv = _Canvas(lo, hi, spec.size, spec.margin)

    if P.is_torus:
        for o in offsets:
            cv.polygon([o, o + L.vector(1, 0), o + L.vector(1, 1), o + L.vector(0, 1)], "cell")
    else:
        for c in P.container.centers:
            cv.circle(c, P.container.R, "wall")

    for o in offsets:
        for i, (p, r) in enumerate(zip(P.centers, P.radii)):
            cv.circle(p + o, r, "rattler" if i in rattlers else "disk")

    wmax = max((abs(v) for v in stress.values()), default=0.0)
    for o in offsets:
        if spec.contacts or stress:
            for c in G.contacts:
                base = P.container.centers[c.boundary - 1] if c.is_wall else P.centers[c.j]
                a, b = base + o, base + o + c.edge
                if c.key in stress and wmax > 0:
                    w = stress[c.key]
                    cls = "stress-neg" if w < 0 else "stress-pos"
                    cv.line(a, b, cls, 0.5 + 3.5 * abs(w) / wmax)
                elif spec.contacts:
                    cv.line(a, b, "contact", 1.0)
        if tri is not None:
            for e in tri.diagonals:
                a = tri.positions[e.j] + o
                cv.line(a, a + tri.edge_vector(e), "diagonal", 1.0)
    return cv.svg()
