"""Closed-form densities, density sweeps and the generic-radii isostatic experiment."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .catalog import catalog
from .dynamics import DriverConfig, JamFailure, jam, seed_random
from .geometry import LatticeBasis
from .packing import Packing, density

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
HEPPES_DENSITY = math.pi * (2.0 - SQRT2) / 2.0
STELLAR_DENSITY = 7.0 * math.pi / 24.0
LATTICE_MODES = ("generic", "square", "rect")


def binary_density(r: float) -> float:
    """Density of the two-disk family interpolating square-with-center and triangular."""
    if not 0.0 < r <= 1.0:
        raise ValueError("radius ratio must lie in (0, 1]")
    return math.pi * (1.0 + r * r) / (4.0 * math.sqrt(r * r + 2.0 * r))


def binary_packing(r: float) -> Packing:
    """Unit disk at the corner of a 2 x c rectangle, disk of radius r at its center.

    The small disk touches four large ones, which forces c = 2 sqrt(r^2 + 2r); the
    large disks stay apart only while r >= sqrt(2) - 1.
    """
    if not SQRT2 - 1.0 - 1e-15 <= r <= 1.0:
        raise ValueError("the construction needs sqrt(2)-1 <= r <= 1")
    c = 2.0 * math.sqrt(r * r + 2.0 * r)
    return Packing(LatticeBasis(2.0, 0.0, c), [(0.0, 0.0), (1.0, c / 2.0)], [1.0, r])


def heppes_bound(n1: int, n2: int) -> float:
    """Conjectured maximum density with n1 unit disks and n2 disks of radius sqrt(2)-1."""
    if not (n1 > 0 and n1 >= n2 >= 0):
        raise ValueError("need n1 >= n2 >= 0 and n1 > 0")
    small = (SQRT2 - 1.0) ** 2
    return math.pi * (n1 + n2 * small) / (2.0 * SQRT3 * (n1 - n2) + 4.0 * n2)


@dataclass
class SweepResult:
    r: np.ndarray
    density: np.ndarray
    second_diff: np.ndarray  # len(r) - 2 interior values

    @property
    def concave_up(self) -> bool:
        return bool(np.all(self.second_diff >= -1e-9))

    def to_csv(self) -> str:
        lines = ["r,density,second_diff"]
        for k, (r, rho) in enumerate(zip(self.r, self.density)):
            sd = "" if k == 0 or k == len(self.r) - 1 else repr(float(self.second_diff[k - 1]))
            lines.append(f"{float(r)!r},{float(rho)!r},{sd}")
        return "\n".join(lines) + "\n"


def binary_sweep(r_min: float, r_max: float, steps: int) -> SweepResult:
    if not 0.0 < r_min < r_max <= 1.0:
        raise ValueError("need 0 < r_min < r_max <= 1")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    grid = np.linspace(r_min, r_max, steps + 1)
    rho = np.array([binary_density(float(r)) for r in grid])
    second = rho[2:] - 2.0 * rho[1:-1] + rho[:-2]
    return SweepResult(grid, rho, second)


def stellar_density_check() -> dict:
    P = catalog("stellar124")
    rho = density(P)
    heppes = density(catalog("heppes"))
    r = np.sort(P.radii)
    record = {
        "stellar_density": rho,
        "expected": STELLAR_DENSITY,
        "error": abs(rho - STELLAR_DENSITY),
        "heppes_density": heppes,
        "radius_ratio": [float(x) for x in r / r[0]],
    }
    record["ok"] = bool(record["error"] <= 1e-6 and rho < HEPPES_DENSITY)
    return record


# ------------------------------------------------------------- experiment


@dataclass
class TrialRecord:
    trial: int
    seed: int
    n: int
    ratios: List[float]
    lattice: List[float]
    success: bool
    k: int = 0
    n_spine: int = 0
    k_spine: int = 0
    isostatic: bool = False
    ambiguous: bool = False
    density: float = 0.0
    iterations: int = 0
    reason: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class ExperimentSummary:
    trials: int
    successes: int
    unambiguous: int
    isostatic: int
    fraction_isostatic: float
    violations: List[int] = field(default_factory=list)  # trial indices breaking the count


def sample_lattice(rng: np.random.Generator, mode: str) -> LatticeBasis:
    """Determinant-1 lattice: random shape (generic), b = 0 (rect) or the unit square."""
    if mode == "square":
        return LatticeBasis(1.0, 0.0, 1.0)
    a = math.exp(rng.uniform(-0.2, 0.2))
    if mode == "rect":
        return LatticeBasis(a, 0.0, 1.0 / a)
    if mode == "generic":
        return LatticeBasis(a, rng.uniform(0.05, 0.45) * a, 1.0 / a)
    raise ValueError(f"unknown lattice mode {mode!r}")


def _run_trial(args) -> TrialRecord:
    n, t, spread, lattice_mode, seed, jam_mode = args
    s = seed + t
    rng = np.random.default_rng(s)
    ratios = np.exp(rng.uniform(math.log(1.0 - spread), math.log(1.0 + spread), size=n))
    L = sample_lattice(rng, lattice_mode)
    rec = TrialRecord(t, s, n, [float(x) for x in ratios], L.as_list(), False)
    try:
        P = seed_random(n, ratios, L, s)
        Q, traj, rep = jam(P, DriverConfig(seed=s, mode=jam_mode))
    except JamFailure as exc:
        rec.reason = "jam_failure"
        rec.iterations = len(exc.trajectory.rows)
        return rec
    except RuntimeError as exc:
        rec.reason = f"error: {exc}"
        return rec
    rec.success = True
    rec.k, rec.n_spine, rec.k_spine = rep.k, rep.n_spine, rep.k_spine
    rec.isostatic, rec.ambiguous = rep.isostatic, rep.ambiguous
    rec.density = density(Q)
    rec.iterations = len(traj.rows)
    rec.reason = traj.reason
    return rec


def isostatic_experiment(n: int, trials: int, ratio_spread: float = 0.1, lattice_mode: str = "generic",
                         seed: int = 0, mode: str = "collective", workers: int = 1):
    """Jam ``trials`` random seeds and count isostatic spines.

    Trial ``t`` uses seed ``seed + t`` for every random choice, so the records do
    not depend on ``workers``. Returns (records, summary).
    """
    if trials < 1 or n < 1:
        raise ValueError("need n >= 1 and trials >= 1")
    if not 0.0 <= ratio_spread < 1.0:
        raise ValueError("ratio_spread must lie in [0, 1)")
    if lattice_mode not in LATTICE_MODES:
        raise ValueError(f"unknown lattice mode {lattice_mode!r}")
    jobs = [(n, t, ratio_spread, lattice_mode, seed, mode) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, jobs))
    else:
        records = [_run_trial(j) for j in jobs]
    return records, summarize(records, mode)


def expected_contacts(n_spine: int, mode: str) -> int:
    return 2 * n_spine - 1 if mode == "collective" else 2 * n_spine + 1


def summarize(records: Sequence[TrialRecord], mode: str = "collective") -> ExperimentSummary:
    ok = [r for r in records if r.success]
    clean = [r for r in ok if not r.ambiguous]
    iso = [r for r in clean if r.isostatic]
    bad = [r.trial for r in clean if r.k_spine != expected_contacts(r.n_spine, mode)]
    frac = len(iso) / len(clean) if clean else 0.0
    return ExperimentSummary(len(records), len(ok), len(clean), len(iso), frac, bad)


def write_jsonl(records: Sequence[TrialRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")
