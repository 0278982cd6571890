"""Rigidity matrices, equilibrium stresses and jamming verdicts.

Jamming is certified with the Roth-Whiteley pair: the bar framework on the
spine has full rank and admits a strictly negative (strut) equilibrium stress.
An independent direct test searches for non-trivial infinitesimal flexes with
linear programs and is used as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .numerics import LinearProgram, rank_and_nullspace, solve_lp
from .packing import Contact, ContactGraph, Packing, detect_contacts

MODES = ("collective", "strict", "tricusp")
GUARD_FACTOR = 100.0
SUPPORT_TOL = 1e-8
FLEX_TOL = 1e-9


@dataclass
class RigidityMatrix:
    """One row per contact; columns are free center velocities (+ lattice rates).

    Rows are scaled by 1/|e|. In collective mode loop rows are identically zero and
    are kept so that row indices match contact indices; ``effective`` drops them.
    """

    matrix: np.ndarray
    contacts: List[Contact]
    mode: str
    vertices: List[int]
    pinned: Optional[int]
    lengths: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def effective(self) -> np.ndarray:
        keep = np.any(self.matrix != 0.0, axis=1) if self.matrix.size else np.zeros(0, bool)
        return self.matrix[keep] if self.matrix.shape[0] else self.matrix

    def column_of(self, v: int) -> Optional[int]:
        return self._colmap.get(v)

    def __post_init__(self):
        free = [v for v in self.vertices if v != self.pinned]
        self._colmap = {v: 2 * k for k, v in enumerate(free)}


def _mode_for(P: Packing, mode: Optional[str]) -> str:
    if mode is None:
        return "collective" if P.is_torus else "tricusp"
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if (mode == "tricusp") == P.is_torus:
        raise ValueError(f"mode {mode!r} does not match the container")
    return mode


def build_rigidity_matrix(
    P: Packing,
    G: ContactGraph,
    mode: Optional[str] = None,
    vertices: Optional[Sequence[int]] = None,
) -> RigidityMatrix:
    mode = _mode_for(P, mode)
    verts = sorted(range(P.n) if vertices is None else set(vertices))
    inside = set(verts)
    contacts = [c for c in G.contacts if c.i in inside and (c.is_wall or c.j in inside)]
    pinned = verts[0] if (mode != "tricusp" and verts) else None
    free = [v for v in verts if v != pinned]
    col = {v: 2 * k for k, v in enumerate(free)}
    ncols = 2 * len(free) + (3 if mode == "strict" else 0)
    M = np.zeros((len(contacts), ncols))
    lengths = np.zeros(len(contacts))
    for r, c in enumerate(contacts):
        e = c.edge
        length = float(np.hypot(*e))
        lengths[r] = length
        u = e / length
        if c.is_wall:
            if c.i in col:
                M[r, col[c.i]:col[c.i] + 2] = u
            continue
        if c.i != c.j:
            if c.i in col:
                M[r, col[c.i]:col[c.i] + 2] += u
            if c.j in col:
                M[r, col[c.j]:col[c.j] + 2] -= u
        if mode == "strict":
            z1, z2 = c.lift
            M[r, -3:] = [z1 * u[0], z2 * u[0], z2 * u[1]]
    return RigidityMatrix(M, contacts, mode, verts, pinned, lengths)


def area_row(P: Packing, ncols: int) -> np.ndarray:
    """Row g with g.x >= 0 iff the lattice rate does not increase the cell area."""
    L = P.lattice
    row = np.zeros(ncols)
    row[-3:] = [-L.c, 0.0, -L.a]
    return row / math.hypot(L.a, L.c)


def constraint_matrix(P: Packing, R: RigidityMatrix) -> np.ndarray:
    """Rows that every admissible flex x must keep non-negative."""
    if R.mode == "strict":
        return np.vstack([R.matrix, area_row(P, R.matrix.shape[1])]) if R.matrix.shape[1] else R.matrix
    return R.matrix


# ----------------------------------------------------------------- stresses


@dataclass
class StressSpace:
    dim: int
    basis: np.ndarray  # rows x dim, in unnormalized convention
    residual: float


def row_scales(P: Packing, R: RigidityMatrix) -> np.ndarray:
    """Norms that were divided out of each constraint row."""
    if R.mode == "strict":
        return np.concatenate([R.lengths, [math.hypot(P.lattice.a, P.lattice.c)]])
    return R.lengths


def _to_unnormalized(omega_scaled: np.ndarray, scales: np.ndarray) -> np.ndarray:
    if omega_scaled.ndim == 2:
        return omega_scaled / scales[:, None]
    return omega_scaled / scales


def stress_space(R: RigidityMatrix, P: Optional[Packing] = None, rank_tol: Optional[float] = None) -> StressSpace:
    """Equilibrium stresses: the left nullspace of the rigidity matrix.

    With ``P`` given in strict mode, the area row is included and the last basis
    entry is its multiplier.
    """
    with_area = P is not None and R.mode == "strict"
    M = constraint_matrix(P, R) if with_area else R.matrix
    scales = row_scales(P, R) if with_area else R.lengths
    rows = M.shape[0]
    if rows == 0:
        return StressSpace(0, np.zeros((0, 0)), 0.0)
    if M.shape[1] == 0:
        basis = np.eye(rows)
    else:
        basis = rank_and_nullspace(M.T, rank_tol).nullspace
    resid = float(np.max(np.abs(M.T @ basis))) if basis.size and M.shape[1] else 0.0
    omega = _to_unnormalized(basis, scales)
    if omega.size:
        omega = omega / np.max(np.abs(omega), axis=0)
    return StressSpace(basis.shape[1], omega, resid)


def equilibrium_residual(P: Packing, contacts: Sequence[Contact], omega: Sequence[float], mode: str,
                         area_multiplier: float = 0.0) -> float:
    """Max-norm force imbalance of ``omega`` (unnormalized convention), computed from
    edge vectors directly. In strict mode lattice-balance rows are included."""
    force = np.zeros((P.n, 2))
    lat = np.zeros(3)
    for w, c in zip(omega, contacts):
        e = c.edge
        if c.is_wall:
            force[c.i] += w * e
            continue
        if c.i != c.j:
            force[c.i] += w * e
            force[c.j] -= w * e
        z1, z2 = c.lift
        lat += w * np.array([z1 * e[0], z2 * e[0], z2 * e[1]])
    out = float(np.max(np.abs(force)))
    if mode == "strict":
        L = P.lattice
        lat += area_multiplier * np.array([-L.c, 0.0, -L.a])
        out = max(out, float(np.max(np.abs(lat))))
    return out


def _proper_stress(N: np.ndarray):
    """Feasibility of omega = N y with omega <= -1 everywhere; returns omega or None."""
    k, s = N.shape
    if k == 0:
        return np.zeros(0)
    if s == 0:
        return None
    lp = LinearProgram(
        c=N.sum(axis=0),
        A_ub=N,
        b_ub=-np.ones(k),
        lb=np.full(s, -np.inf),
        ub=np.full(s, np.inf),
    )
    res = solve_lp(lp)
    if res.status != "optimal":
        return None
    omega = N @ res.x
    if np.max(omega) > -1.0 + 1e-7:
        return None
    return omega


def max_support(N: np.ndarray, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Rows that carry weight in some non-positive vector of the column span of ``N``."""
    k, s = N.shape
    support = np.zeros(k, dtype=bool)
    if k == 0 or s == 0:
        return support
    while True:
        open_rows = ~support
        if not open_rows.any():
            break
        lp = LinearProgram(
            c=-(N[open_rows].sum(axis=0)),
            A_ub=np.vstack([N, -N]),
            b_ub=np.concatenate([np.zeros(k), np.ones(k)]),
            lb=np.full(s, -np.inf),
            ub=np.full(s, np.inf),
        )
        res = solve_lp(lp)
        if res.status != "optimal" or res.value <= tol:
            break
        omega = N @ res.x
        new = open_rows & (omega < -tol)
        if not new.any():
            break
        support |= new
    return support


# --------------------------------------------------------------------- spine


def _open_half_plane(dirs: np.ndarray) -> bool:
    if len(dirs) == 0:
        return True
    ang = np.sort(np.arctan2(dirs[:, 1], dirs[:, 0]))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
    return bool(gaps.max() > math.pi + 1e-12)


def _directions(v: int, contacts: Sequence[Contact]) -> np.ndarray:
    out = []
    for c in contacts:
        if c.is_loop:
            continue
        if c.i == v:
            out.append(c.edge)
        elif c.j == v and not c.is_wall:
            out.append(-c.edge)
    return np.array(out).reshape(-1, 2)


def _prune(P: Packing, G: ContactGraph, active: List[int], mode: str) -> List[int]:
    active = list(active)
    changed = True
    while changed and active:
        changed = False
        if mode != "tricusp" and len(active) < 2:
            break
        Gs = G.restricted(active)
        for v in list(active):
            dirs = _directions(v, Gs.contacts)
            if len(dirs) < 3 or _open_half_plane(dirs):
                active.remove(v)
                changed = True
                break
    return active


def extract_spine(P: Packing, G: Optional[ContactGraph] = None, mode: Optional[str] = None):
    """Split disks into (spine, rattlers) by stress support."""
    mode = _mode_for(P, mode)
    G = detect_contacts(P) if G is None else G
    active = list(range(P.n))
    while True:
        active = _prune(P, G, active, mode)
        if not active:
            break
        R = build_rigidity_matrix(P, G, mode, active)
        M = constraint_matrix(P, R)
        if M.shape[0] == 0:
            active = []
            break
        N = np.eye(M.shape[0]) if M.shape[1] == 0 else rank_and_nullspace(M.T).nullspace
        supp = max_support(N)
        keep = set()
        for r, c in enumerate(R.contacts):
            if not supp[r]:
                continue
            if c.is_loop:
                if len(active) == 1 or mode == "strict":
                    keep.add(c.i)
            else:
                keep.add(c.i)
                if not c.is_wall:
                    keep.add(c.j)
        nxt = [v for v in active if v in keep]
        if nxt == active:
            break
        active = nxt
    rattlers = [v for v in range(P.n) if v not in set(active)]
    return active, rattlers


# ------------------------------------------------------------------- reports


@dataclass
class JammingReport:
    mode: str
    n: int
    k: int
    n_spine: int
    k_spine: int
    rank: int
    cols: int
    stress_dim: int
    spine: List[int]
    rattlers: List[int]
    jammed: bool
    isostatic: bool
    ambiguous: bool
    tolerances: dict
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "k": self.k,
            "rank": self.rank,
            "stress_dim": self.stress_dim,
            "rattlers": list(self.rattlers),
            "jammed": self.jammed,
            "isostatic": self.isostatic,
            "tolerances": dict(self.tolerances),
            "witness": self.witness,
            "n_spine": self.n_spine,
            "k_spine": self.k_spine,
            "cols": self.cols,
            "ambiguous": self.ambiguous,
        }


def _lp_flex(M: np.ndarray):
    """A flex x with Mx >= 0 and Mx != 0 inside the unit box, if one exists."""
    rows, cols = M.shape
    if cols == 0:
        return None
    lp = LinearProgram(
        c=M.sum(axis=0),
        A_ub=-M,
        b_ub=np.zeros(rows),
        lb=-np.ones(cols),
        ub=np.ones(cols),
    )
    res = solve_lp(lp)
    if res.status == "optimal" and res.value > FLEX_TOL:
        return res.x
    return None


def _analyze(P: Packing, G: Optional[ContactGraph], mode: str, rank_tol: Optional[float]) -> JammingReport:
    G = detect_contacts(P) if G is None else G
    spine, rattlers = extract_spine(P, G, mode)
    tolerances = {
        "contact_tol": G.tol,
        "support_tol": SUPPORT_TOL,
        "flex_tol": FLEX_TOL,
        "guard_factor": GUARD_FACTOR,
    }
    if not spine:
        R = build_rigidity_matrix(P, G, mode)
        M = constraint_matrix(P, R)
        info = rank_and_nullspace(M, rank_tol) if M.size else None
        tolerances["rank_tol"] = info.tol if info else 0.0
        witness = {"kind": "no_spine"}
        if M.shape[1]:
            if info is not None and info.rank < M.shape[1]:
                witness = {"kind": "nullspace", "flex": info.nullspace[:, 0].tolist()}
            elif info is None:
                x = np.zeros(M.shape[1])
                x[-1] = 1.0
                witness = {"kind": "free", "flex": x.tolist()}
            else:
                x = _lp_flex(M)
                if x is not None:
                    witness = {"kind": "lp", "flex": x.tolist()}
        return JammingReport(mode, P.n, G.k, 0, 0, 0 if info is None else info.rank, M.shape[1], 0,
                             [], rattlers, False, False, False, tolerances, witness)

    R = build_rigidity_matrix(P, G, mode, spine)
    M = constraint_matrix(P, R)
    rows, cols = M.shape
    k_spine = len(R.contacts)
    if cols:
        info = rank_and_nullspace(M, rank_tol)
        rank = info.rank
        ambiguous = info.near_threshold(GUARD_FACTOR)
        N = rank_and_nullspace(M.T, info.tol).nullspace
        tolerances["rank_tol"] = info.tol
    else:
        rank, ambiguous = 0, False
        N = np.eye(rows)
        tolerances["rank_tol"] = 0.0
    stress_dim = N.shape[1]
    omega = _proper_stress(N) if rank == cols else None
    jammed = rank == cols and omega is not None
    if jammed:
        w = _to_unnormalized(omega, row_scales(P, R))
        w = w / np.max(np.abs(w))
        witness = {"kind": "stress", "stress": w.tolist()}
    elif rank < cols:
        info_flex = rank_and_nullspace(M, tolerances["rank_tol"])
        witness = {"kind": "nullspace", "flex": info_flex.nullspace[:, 0].tolist()}
    else:
        x = _lp_flex(M)
        witness = {"kind": "lp", "flex": None if x is None else x.tolist()}
    if mode == "collective":
        isostatic = jammed and stress_dim == 1
    else:
        isostatic = jammed and k_spine == 2 * len(spine) + 1
    return JammingReport(mode, P.n, G.k, len(spine), k_spine, rank, cols, stress_dim, spine, rattlers,
                         jammed, isostatic, ambiguous, tolerances, witness)


def test_collective_jamming(P: Packing, G: Optional[ContactGraph] = None,
                            rank_tol: Optional[float] = None) -> JammingReport:
    if not P.is_torus:
        raise ValueError("collective jamming is defined for torus packings")
    return _analyze(P, G, "collective", rank_tol)


def test_strict_jamming(P: Packing, G: Optional[ContactGraph] = None,
                        rank_tol: Optional[float] = None) -> JammingReport:
    if not P.is_torus:
        raise ValueError("strict jamming is defined for torus packings")
    return _analyze(P, G, "strict", rank_tol)


def test_tricusp_jamming(P: Packing, G: Optional[ContactGraph] = None,
                         rank_tol: Optional[float] = None) -> JammingReport:
    if P.is_torus:
        raise ValueError("tricusp jamming needs a tricusp packing")
    return _analyze(P, G, "tricusp", rank_tol)


def analyze(P: Packing, mode: Optional[str] = None, G: Optional[ContactGraph] = None,
            rank_tol: Optional[float] = None) -> JammingReport:
    mode = _mode_for(P, mode)
    return _analyze(P, G, mode, rank_tol)


# these are library functions, not pytest tests
for _fn in (test_collective_jamming, test_strict_jamming, test_tricusp_jamming):
    _fn.__test__ = False


# --------------------------------------------------------- direct flex route


@dataclass
class FlexTestResult:
    jammed: bool
    min_slack: float
    witness: Optional[np.ndarray]
    lps: int


def max_min_slack(M: np.ndarray):
    """max t s.t. Mx >= t, |x| <= 1, t <= 1; returns (t*, x)."""
    rows, cols = M.shape
    if rows == 0:
        return 1.0, np.zeros(cols)
    A = np.hstack([-M, np.ones((rows, 1))])
    c = np.zeros(cols + 1)
    c[-1] = 1.0
    lb = np.concatenate([-np.ones(cols), [-np.inf]])
    ub = np.concatenate([np.ones(cols), [1.0]])
    res = solve_lp(LinearProgram(c=c, A_ub=A, b_ub=np.zeros(rows), lb=lb, ub=ub))
    return float(res.x[-1]), res.x[:-1]


def direct_flex_test(P: Packing, G: Optional[ContactGraph] = None, mode: Optional[str] = None,
                     vertices: Optional[Sequence[int]] = None) -> FlexTestResult:
    """Decide infinitesimal rigidity from the flex inequalities alone.

    First the uniformly opening flex (max-min slack) is tried; if none exists,
    each coordinate direction is probed for a flex that keeps every contact from
    shrinking.
    """
    mode = _mode_for(P, mode)
    G = detect_contacts(P) if G is None else G
    R = build_rigidity_matrix(P, G, mode, vertices)
    M = constraint_matrix(P, R)
    rows, cols = M.shape
    if len(R.contacts) == 0:
        return FlexTestResult(False, math.inf, None, 0)
    if cols == 0:
        return FlexTestResult(True, 0.0, None, 0)
    t, x = max_min_slack(M)
    lps = 1
    if t > FLEX_TOL:
        return FlexTestResult(False, t, x, lps)
    for k in range(cols):
        for sign in (1.0, -1.0):
            c = np.zeros(cols)
            c[k] = sign
            res = solve_lp(LinearProgram(c=c, A_ub=-M, b_ub=np.zeros(rows),
                                         lb=-np.ones(cols), ub=np.ones(cols)))
            lps += 1
            if res.status == "optimal" and res.value > FLEX_TOL:
                return FlexTestResult(False, t, res.x, lps)
    return FlexTestResult(True, t, None, lps)
