"""Drivers that push packings towards jammed states.

Three linear-programming moves are available: uniform inflation with the lattice
fixed (``danzer_step``), lattice deformation that shrinks the cell with radii
fixed (``swinnerton_dyer_step``) and radius redistribution with centers fixed
(``thurston_step``). ``jam`` combines them with a hard-disk Monte Carlo jiggle.

All non-overlap constraints are linearized with the current unit edge vector u:
since |e + delta| >= u.(e + delta) = |e| + u.delta, the linear constraint is a
conservative stand-in for the true one.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import LatticeBasis, TricuspContainer, lattice_area, minimal_images, tricusp_clearances
from .numerics import LinearProgram, solve_lp
from .packing import Contact, Packing, density, detect_contacts, is_valid, pair_gaps
from .rigidity import JammingReport, analyze

LINE_SEARCH_HALVINGS = 30


@dataclass
class DriverConfig:
    seed: int
    mode: Optional[str] = None  # collective | strict | tricusp; None picks from the container
    activation: float = 0.5  # near-contact distance, in units of the smallest radius
    step_cap: float = 0.05  # box bound on moves, in units of the smallest radius
    jiggle_amplitude: float = 0.01  # in units of the smallest radius
    jiggle_decay: float = 0.5
    max_escalations: int = 8
    jiggle_sweeps: int = 20
    max_iter: int = 2000
    threshold: float = 1e-10
    sd_every: int = 5

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("a seed is required")
        for name in ("activation", "step_cap", "jiggle_amplitude", "jiggle_decay", "threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1 or self.sd_every < 1 or self.max_escalations < 0:
            raise ValueError("iteration counts must be positive")
        if 2.0 * math.sqrt(2.0) * self.step_cap >= self.activation:
            raise ValueError("activation distance must exceed the largest relative move")


@dataclass
class Trajectory:
    rows: List[Tuple[int, float, float, int]] = field(default_factory=list)
    phases: List[str] = field(default_factory=list)
    areas: List[float] = field(default_factory=list)
    final: Optional[Packing] = None
    reason: str = ""

    def record(self, it: int, t: float, P: Packing, phase: str) -> None:
        k = detect_contacts(P).k
        self.rows.append((it, float(t), density(P), k))
        self.phases.append(phase)
        self.areas.append(lattice_area(P.lattice) if P.is_torus else P.container.area)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "t", "density", "contacts"])
        for it, t, rho, k in self.rows:
            w.writerow([it, repr(t), repr(rho), k])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


class JamFailure(RuntimeError):
    """The driver hit its iteration cap without a jamming certificate."""

    def __init__(self, message: str, packing: Packing, trajectory: Trajectory, report: Optional[JammingReport]):
        super().__init__(message)
        self.packing = packing
        self.trajectory = trajectory
        self.report = report


def _mode(P: Packing, cfg: DriverConfig) -> str:
    if cfg.mode is not None:
        return cfg.mode
    return "collective" if P.is_torus else "tricusp"


def _free_vertices(P: Packing) -> List[int]:
    return list(range(1, P.n)) if P.is_torus else list(range(P.n))


def _near(P: Packing, cfg: DriverConfig) -> List[Contact]:
    return pair_gaps(P, cfg.activation * float(P.radii.min()))


class _Vars:
    """Column layout: every free quantity q is split as q = q_plus - q_minus."""

    def __init__(self, free: Sequence[int], lattice: bool, extra: int):
        self.col = {v: 2 * k for k, v in enumerate(free)}
        self.nd = 2 * len(free)
        self.nl = 3 if lattice else 0
        self.nsplit = self.nd + self.nl
        self.extra = extra
        self.n = 2 * self.nsplit + extra

    def row(self) -> np.ndarray:
        return np.zeros(self.n)

    def add(self, row: np.ndarray, k: int, coef: float) -> None:
        row[k] += coef
        row[self.nsplit + k] -= coef

    def value(self, x: np.ndarray) -> np.ndarray:
        return x[: self.nsplit] - x[self.nsplit: 2 * self.nsplit]


def _separation_row(V: _Vars, c: Contact, with_lattice: bool) -> np.ndarray:
    """Coefficients of u.(d_i - d_j [+ lattice change of the lift])."""
    row = V.row()
    u = c.edge / float(np.hypot(*c.edge))
    if c.is_wall:
        if c.i in V.col:
            V.add(row, V.col[c.i], u[0])
            V.add(row, V.col[c.i] + 1, u[1])
        return row
    if c.i != c.j:
        for v, s in ((c.i, 1.0), (c.j, -1.0)):
            if v in V.col:
                V.add(row, V.col[v], s * u[0])
                V.add(row, V.col[v] + 1, s * u[1])
    if with_lattice:
        z1, z2 = c.lift
        base = V.nd
        V.add(row, base, z1 * u[0])
        V.add(row, base + 1, z2 * u[0])
        V.add(row, base + 2, z2 * u[1])
    return row


def _displace(P: Packing, V: _Vars, x: np.ndarray, scale: float) -> np.ndarray:
    d = V.value(x)
    centers = P.centers.copy()
    for v, k in V.col.items():
        centers[v] = centers[v] + scale * d[k:k + 2]
    return centers


# ------------------------------------------------------------------ Danzer


def danzer_step(P: Packing, cfg: DriverConfig) -> Tuple[Packing, float]:
    """Move centers and inflate all radii by a common factor (1 + t)."""
    rmin, rmax = float(P.radii.min()), float(P.radii.max())
    cap = cfg.step_cap * rmin
    t_cap = (cfg.activation * rmin - 2.0 * math.sqrt(2.0) * cap) / (2.0 * rmax)
    V = _Vars(_free_vertices(P), False, 1)
    rows, rhs = [], []
    for c in _near(P, cfg):
        row = -_separation_row(V, c, False)
        row[-1] = P.radii[c.i] if c.is_wall else P.radii[c.i] + P.radii[c.j]
        rows.append(row)
        rhs.append(max(c.gap, 0.0))
    obj = np.zeros(V.n)
    obj[-1] = 1.0
    ub = np.concatenate([np.full(2 * V.nsplit, cap), [t_cap]])
    A = np.array(rows).reshape(-1, V.n)
    res = solve_lp(LinearProgram(c=obj, A_ub=A, b_ub=np.array(rhs), lb=np.zeros(V.n), ub=ub))
    if res.status != "optimal":
        raise RuntimeError(f"inflation LP {res.status}; tolerance fault")
    t = float(res.x[-1])
    if t <= 0.0:
        return P, 0.0
    scale = 1.0
    for _ in range(LINE_SEARCH_HALVINGS):
        Q = P.replace(centers=_displace(P, V, res.x, scale), radii=P.radii * (1.0 + scale * t))
        if is_valid(Q):
            return Q, scale * t
        scale *= 0.5
    return P, 0.0


# --------------------------------------------------------- Swinnerton-Dyer


def swinnerton_dyer_step(P: Packing, cfg: DriverConfig) -> Tuple[Packing, float]:
    """Deform the lattice (and centers) to shrink the cell with radii fixed.

    Returns the new packing and the realized (negative or zero) area change.
    """
    if not P.is_torus:
        raise TypeError("lattice deformation needs a torus packing")
    L = P.lattice
    cap = cfg.step_cap * float(P.radii.min())
    V = _Vars(_free_vertices(P), True, 0)
    rows, rhs = [], []
    for c in _near(P, cfg):
        rows.append(-_separation_row(V, c, True))
        rhs.append(max(c.gap, 0.0))
    obj = V.row()
    V.add(obj, V.nd, -L.c)
    V.add(obj, V.nd + 2, -L.a)
    A = np.array(rows).reshape(-1, V.n)
    res = solve_lp(LinearProgram(c=obj, A_ub=A, b_ub=np.array(rhs), lb=np.zeros(V.n), ub=np.full(V.n, cap)))
    if res.status != "optimal":
        raise RuntimeError(f"lattice LP {res.status}; tolerance fault")
    area0 = lattice_area(L)
    if res.value <= cfg.threshold * area0:
        return P, 0.0
    rates = V.value(res.x)[V.nd:]
    scale = 1.0
    for _ in range(LINE_SEARCH_HALVINGS):
        da, db, dc = scale * rates
        a, c = L.a + da, L.c + dc
        if a > 0 and c > 0 and a * c < area0:
            # centers keep their plane coordinates; LatticeBasis re-reduces b
            Q = Packing(LatticeBasis(a, L.b + db, c), _displace(P, V, res.x, scale), P.radii, P.meta)
            if is_valid(Q):
                return Q, a * c - area0
        scale *= 0.5
    return P, 0.0


# ---------------------------------------------------------------- Thurston


def thurston_step(P: Packing, cfg: DriverConfig) -> Tuple[Packing, float]:
    """Redistribute radii with centers fixed to increase sum r^2.

    Returns the new packing and the realized increase of sum r^2.
    """
    r = P.radii
    cap = cfg.step_cap * float(r.max())
    n = P.n
    rows, rhs = [], []
    for c in pair_gaps(P, 2.0 * cap + cfg.activation * float(r.min())):
        row = np.zeros(n)
        row[c.i] += 1.0
        if not c.is_wall:
            row[c.j] += 1.0
        rows.append(row)
        rhs.append(max(c.gap, 0.0))
    lb = np.maximum(-cap, -0.5 * r)
    res = solve_lp(LinearProgram(c=r.copy(), A_ub=np.array(rows).reshape(-1, n), b_ub=np.array(rhs),
                                 lb=lb, ub=np.full(n, cap)))
    if res.status != "optimal":
        raise RuntimeError(f"radius LP {res.status}; tolerance fault")
    base = float(np.sum(r ** 2))
    scale = 1.0
    for _ in range(LINE_SEARCH_HALVINGS):
        nr = r + scale * res.x
        gain = float(np.sum(nr ** 2)) - base
        if gain <= cfg.threshold * base:
            break
        Q = P.replace(radii=nr)
        if is_valid(Q):
            return Q, gain
        scale *= 0.5
    return P, 0.0


def thurston(P: Packing, cfg: DriverConfig, max_iter: int = 1000) -> Tuple[Packing, List[float]]:
    """Iterate ``thurston_step`` until sum r^2 stops increasing."""
    history = [float(np.sum(P.radii ** 2))]
    for _ in range(max_iter):
        P, gain = thurston_step(P, cfg)
        if gain <= 0.0:
            break
        history.append(float(np.sum(P.radii ** 2)))
    return P, history


# ------------------------------------------------------------------ jiggle


def _disk_clear(centers: np.ndarray, radii: np.ndarray, i: int, container) -> bool:
    p, ri = centers[i], radii[i]
    if isinstance(container, TricuspContainer):
        if not container.contains(p) or np.any(tricusp_clearances(p, ri, container) < 0.0):
            return False
        d = np.hypot(*(centers - p).T) - (radii + ri)
        d[i] = 1.0
        return bool(np.all(d >= 0.0))
    for j in range(len(radii)):
        cutoff = ri + radii[j]
        if minimal_images(p, centers[j], container, cutoff):
            return False
    return True


def jiggle(P: Packing, amplitude: float, rng: np.random.Generator, sweeps: int = 1,
           lattice: bool = False) -> Packing:
    """Hard-disk Monte Carlo: random moves, each kept only if it leaves the packing valid."""
    centers = P.centers.copy()
    free = _free_vertices(P)
    container = P.container
    for _ in range(sweeps):
        for i in free:
            step = rng.uniform(-amplitude, amplitude, size=2)
            old = centers[i].copy()
            centers[i] = old + step
            if not _disk_clear(centers, P.radii, i, container):
                centers[i] = old
        if lattice and P.is_torus:
            db = float(rng.uniform(-amplitude, amplitude))
            L = container
            trial = Packing(LatticeBasis(L.a, L.b + db, L.c), centers, P.radii, P.meta)
            if is_valid(trial, 0.0):
                container = trial.container
                centers = trial.centers.copy()
    return Packing(container, centers, P.radii, P.meta)


# ------------------------------------------------------------------- seeding


def seed_random(n: int, ratios: Optional[Sequence[float]], container, seed: int,
                start_density: float = 0.02, max_tries: int = 10000) -> Packing:
    """Random non-overlapping start at low density; disk 0 at the origin."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ratios = np.ones(n) if ratios is None else np.asarray(ratios, dtype=float)
    if ratios.shape != (n,) or np.any(~np.isfinite(ratios)) or np.any(ratios <= 0):
        raise ValueError(f"need {n} positive ratios")
    rng = np.random.default_rng(seed)
    area = lattice_area(container) if isinstance(container, LatticeBasis) else container.area
    s = math.sqrt(start_density * area / (math.pi * float(np.sum(ratios ** 2))))
    radii = s * ratios
    centers = np.zeros((n, 2))
    if isinstance(container, TricuspContainer):
        w = container.centers
    for i in range(1, n + 1):
        if i == n:
            break
        for _ in range(max_tries):
            if isinstance(container, LatticeBasis):
                u = rng.uniform(0.0, 1.0, size=2)
                centers[i] = container.matrix @ u
            else:
                u = rng.dirichlet(np.ones(3))
                centers[i] = u @ w
            if _disk_clear(centers[: i + 1], radii[: i + 1], i, container):
                break
        else:
            raise RuntimeError(f"could not place disk {i} after {max_tries} tries")
    if isinstance(container, TricuspContainer) and not _disk_clear(centers, radii, 0, container):
        raise RuntimeError("disk 0 does not fit at the tricusp center")
    return Packing(container, centers, radii, {"seed": seed})


# -------------------------------------------------------------- full driver


def jam(P: Packing, cfg: DriverConfig) -> Tuple[Packing, Trajectory, JammingReport]:
    """Inflate (and in strict mode deform the lattice) until certified jammed."""
    mode = _mode(P, cfg)
    if mode == "strict" and not P.is_torus:
        raise ValueError("strict mode needs a torus packing")
    rng = np.random.default_rng(cfg.seed)
    traj = Trajectory()
    traj.record(0, 0.0, P, "start")
    escalation = 0
    report = None
    for it in range(1, cfg.max_iter + 1):
        if mode == "strict" and it % cfg.sd_every == 0:
            P, _ = swinnerton_dyer_step(P, cfg)
            traj.record(it, 0.0, P, "lattice")
            continue
        P, t = danzer_step(P, cfg)
        if t >= cfg.threshold:
            traj.record(it, t, P, "inflate")
            continue
        if mode == "strict":
            Q, dA = swinnerton_dyer_step(P, cfg)
            if dA < 0.0:
                P = Q
                traj.record(it, 0.0, P, "lattice")
                continue
        report = analyze(P, mode)
        if report.jammed:
            traj.record(it, t, P, "certified")
            traj.final = P
            traj.reason = "jammed"
            return P, traj, report
        amp = cfg.jiggle_amplitude * float(P.radii.min()) * cfg.jiggle_decay ** escalation
        escalation = min(escalation + 1, cfg.max_escalations)
        P = jiggle(P, amp, rng, cfg.jiggle_sweeps, lattice=(mode == "strict"))
        traj.record(it, 0.0, P, "jiggle")
    traj.final = P
    traj.reason = "iteration_cap"
    raise JamFailure(f"no jamming certificate after {cfg.max_iter} iterations", P, traj, report)
