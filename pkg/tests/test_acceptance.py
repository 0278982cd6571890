"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python tests/test_acceptance.py`` or ``pytest tests/test_acceptance.py -s``.
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from diskjam.catalog import catalog, names
from diskjam.dynamics import DriverConfig, jam, seed_random
from diskjam.experiments import binary_density, binary_sweep, isostatic_experiment
from diskjam.geometry import LatticeBasis, TricuspContainer, lattice_area, minimal_images, reduce_point
from diskjam.inversive import complete_to_triangulation, inversive_profile
from diskjam.numerics import LinearProgram, solve_lp
from diskjam.packing import density, detect_contacts
from diskjam.rigidity import analyze, direct_flex_test


def test_criterion_01_grid5_counts(report_criterion):
    P = catalog("grid5")
    rep = analyze(P, "collective")
    ok = (rep.k == 10 and rep.n == 5 and rep.jammed and rep.stress_dim == 2
          and rep.stress_dim == rep.k - (2 * rep.n - 2))
    report_criterion(1, ok, f"grid5 k={rep.k} n={rep.n} jammed={rep.jammed} s={rep.stress_dim}")
    assert ok


def test_criterion_02_isostatic_experiment(report_criterion):
    parts, ok = [], True
    for n in (3, 5, 8):
        _, summ = isostatic_experiment(n, 20, lattice_mode="generic", seed=1)
        parts.append(f"n={n}: {summ.isostatic}/{summ.unambiguous} isostatic, violations={summ.violations}")
        ok = ok and not summ.violations and summ.unambiguous > 0
    report_criterion(2, ok, "; ".join(parts))
    assert ok


def test_criterion_03_rectangular_exception(report_criterion):
    rect, _ = isostatic_experiment(2, 10, lattice_mode="rect", seed=1)
    gen, _ = isostatic_experiment(2, 10, lattice_mode="generic", seed=1)
    kr = [r.k for r in rect if r.success]
    kg = [r.k for r in gen if r.success]
    ok = bool(kr) and bool(kg) and all(k == 4 for k in kr) and all(k == 3 for k in kg)
    report_criterion(3, ok, f"rect k={sorted(set(kr))} ({len(kr)}/10), generic k={sorted(set(kg))} ({len(kg)}/10)")
    assert ok


def test_criterion_04_densities(report_criterion):
    want = {
        "square1": math.pi / 4,
        "triangular1": math.pi / math.sqrt(12),
        "heppes": math.pi * (2 - math.sqrt(2)) / 2,
        "stellar124": 7 * math.pi / 24,
    }
    got = {name: density(catalog(name)) for name in want}
    ok = all(abs(got[k] - want[k]) <= 1e-6 for k in want)
    report_criterion(4, ok, ", ".join(f"{k}={got[k]:.6f}" for k in want))
    assert ok


def test_criterion_05_binary_curve(report_criterion):
    lo, hi = binary_density(math.sqrt(2) - 1), binary_density(1.0)
    res = binary_sweep(math.sqrt(2) - 1, 1.0, 99)
    worst = float(res.second_diff.min())
    ok = (abs(lo - 0.920151) <= 1e-6 and abs(hi - 0.906899) <= 1e-6 and len(res.r) == 100 and worst >= -1e-9)
    report_criterion(5, ok, f"rho(sqrt2-1)={lo:.7f} rho(1)={hi:.7f} min second diff={worst:.3e}")
    assert ok


def test_criterion_06_strict_flow(report_criterion):
    Q, traj, rep = jam(catalog("square1"), DriverConfig(seed=0, mode="strict", max_iter=500))
    hit = next((it for it, _, rho, _ in traj.rows if rho >= 0.9068), None)
    tri = analyze(catalog("triangular1"), "strict")
    ok = hit is not None and hit <= 500 and tri.jammed and tri.k == 3 == 2 * tri.n + 1
    report_criterion(6, ok, f"density>=0.9068 at iteration {hit}, final {density(Q):.7f}; "
                            f"triangular1 strict jammed={tri.jammed} k={tri.k}")
    assert ok


def test_criterion_07_tricusp(report_criterion):
    s = analyze(catalog("soddy"), "tricusp")
    t = analyze(catalog("tricusp4"), "tricusp")
    ok = (s.jammed and s.isostatic and s.k == 3 == 2 * s.n + 1
          and t.jammed and t.k == 12 and t.k > 2 * t.n + 1 and not t.isostatic)
    report_criterion(7, ok, f"soddy jammed={s.jammed} iso={s.isostatic} k={s.k}; "
                            f"tricusp4 jammed={t.jammed} k={t.k} iso={t.isostatic}")
    assert ok


def test_criterion_08_triangulation_counts(report_criterion):
    P = catalog("n3")
    T = complete_to_triangulation(P)
    prof = inversive_profile(P, T)
    worst = max(abs(s - 1.0) for e, s in prof if e.kind == "contact")
    ok = len(T.diagonals) == 4 and len(T.edges) == 9 == 3 * P.n and worst <= 1e-8
    report_criterion(8, ok, f"n3 diagonals={len(T.diagonals)} edges={len(T.edges)} max|sigma-1|={worst:.2e}")
    assert ok


def test_criterion_09_oracle_equivalence(report_criterion):
    mismatches, checked = [], 0
    for name in names():
        P = catalog(name)
        G = detect_contacts(P)
        for mode in (("collective", "strict") if P.is_torus else ("tricusp",)):
            rep = analyze(P, mode, G)
            flex = direct_flex_test(P, G, mode, rep.spine or None)
            checked += 1
            if flex.jammed != rep.jammed:
                mismatches.append(f"{name}/{mode}")
    ok = not mismatches
    report_criterion(9, ok, f"{checked} (entry, mode) pairs, mismatches={mismatches}")
    assert ok


# ------------------------------------------------------------ criterion 10


def _minimal_image_cases(count):
    rng = np.random.default_rng(2024)
    bad = 0
    for _ in range(count):
        L = LatticeBasis(rng.uniform(0.5, 2.0), rng.uniform(0.0, 2.0), rng.uniform(0.5, 2.0))
        p = reduce_point(L.matrix @ rng.uniform(0, 1, 2), L)
        q = p if rng.uniform() < 0.2 else reduce_point(L.matrix @ rng.uniform(0, 1, 2), L)
        cutoff = rng.uniform(0.05, 1.5) * min(L.a, L.c)
        got = sorted(lift for _, lift in minimal_images(p, q, L, cutoff))
        same = p is q
        want = sorted((z1, z2) for z1 in range(-6, 7) for z2 in range(-6, 7)
                      if not (same and z1 == 0 and z2 == 0)
                      and np.hypot(*(p - q + L.vector(z1, z2))) <= cutoff)
        bad += got != want
    return bad


def _lp_duality_cases(count):
    worst = 0.0
    for seed in range(count):
        rng = np.random.default_rng(5000 + seed)
        m, n = int(rng.integers(1, 7)), int(rng.integers(1, 6))
        A = np.vstack([rng.uniform(-1, 1, (m, n)), np.ones(n)])
        b = np.concatenate([rng.uniform(0.1, 2.0, m), [rng.uniform(1.0, 5.0)]])
        c = rng.uniform(-1, 1, n)
        primal = solve_lp(LinearProgram(c=c, A_ub=A, b_ub=b))
        dual = solve_lp(LinearProgram(c=-b, A_ub=-A.T, b_ub=-c))
        if primal.status != "optimal" or dual.status != "optimal":
            return math.inf
        worst = max(worst, abs(primal.value + dual.value))
    return worst


def _trajectory_monotone():
    runs = []
    for seed in range(4):
        P = seed_random(4 + seed, np.exp(np.random.default_rng(seed).uniform(-0.1, 0.1, 4 + seed)),
                        LatticeBasis(1.0, 0.0, 1.0), seed)
        runs.append(jam(P, DriverConfig(seed=seed))[1])
    runs.append(jam(catalog("square1"), DriverConfig(seed=0, mode="strict"))[1])
    runs.append(jam(seed_random(4, [1, 1, 1, 2.5], TricuspContainer(), 7), DriverConfig(seed=7))[1])
    bad = 0
    for traj in runs:
        rho = [row[2] for row in traj.rows]
        bad += any(b < a for a, b in zip(rho, rho[1:]))
        bad += any(b > a for a, b in zip(traj.areas, traj.areas[1:]))
    return len(runs), bad


def _pipeline(tmp):
    tmp.mkdir()
    cmd = [sys.executable, "-m", "diskjam.cli"]
    subprocess.run(cmd + ["jam", "--n", "5", "--ratios", "1,1.02,1.05,1.11,1.23", "--seed", "42",
                          "--out", str(tmp / "p.json"), "--traj", str(tmp / "t.csv")], check=True)
    rep = subprocess.run(cmd + ["analyze", str(tmp / "p.json")], capture_output=True, check=True).stdout
    subprocess.run(cmd + ["render", str(tmp / "p.json"), "--copies", "3", "--stress",
                          "--out", str(tmp / "p.svg")], check=True)
    return [(tmp / "p.json").read_bytes(), (tmp / "t.csv").read_bytes(), rep, (tmp / "p.svg").read_bytes()]


def test_criterion_10_property_suites(report_criterion, tmp_path):
    image_bad = _minimal_image_cases(1000)
    gap = _lp_duality_cases(100)
    n_traj, traj_bad = _trajectory_monotone()
    same = _pipeline(tmp_path / "a") == _pipeline(tmp_path / "b")
    ok = image_bad == 0 and gap <= 1e-7 and traj_bad == 0 and same
    report_criterion(10, ok, f"minimal images 1000 cases, {image_bad} mismatches; LP duality gap {gap:.1e} on 100; "
                             f"{n_traj} trajectories, {traj_bad} monotonicity breaks; pipeline identical={same}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
