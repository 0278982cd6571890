import math

import numpy as np
import pytest

from diskjam.catalog import catalog
from diskjam.dynamics import (
    DriverConfig,
    JamFailure,
    danzer_step,
    jam,
    jiggle,
    seed_random,
    swinnerton_dyer_step,
    thurston,
    thurston_step,
)
from diskjam.geometry import LatticeBasis, TricuspContainer, lattice_area
from diskjam.packing import Packing, density, detect_contacts, is_valid, validate

SQ = LatticeBasis(1.0, 0.0, 1.0)
CFG = DriverConfig(seed=0)


def test_danzer_step_on_jammed_grid_is_zero():
    P = catalog("grid5")
    Q, t = danzer_step(P, CFG)
    assert t == 0.0 and Q is P


def test_danzer_step_grows_and_stays_valid():
    P = Packing(SQ, [(0, 0), (0.5, 0.5)], [0.1, 0.1])
    Q, t = danzer_step(P, CFG)
    assert t > 0 and is_valid(Q)
    assert np.allclose(Q.radii, P.radii * (1 + t))


def test_single_disk_inflates_to_half():
    P = Packing(SQ, [(0, 0)], [0.3])
    Q, traj, rep = jam(P, DriverConfig(seed=1))
    assert Q.radii[0] == pytest.approx(0.5, abs=1e-6)
    assert rep.jammed and traj.reason == "jammed"


def test_thurston_two_disks_reaches_lp_optimum():
    # max r1^2 + r2^2 with r1 + r2 <= 1/sqrt(2) and each r <= 1/2 (self contacts)
    P = Packing(SQ, [(0, 0), (0.5, 0.5)], [0.3, 0.3])
    Q, hist = thurston(P, CFG)
    r = np.sort(Q.radii)
    assert r.sum() == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert r[1] == pytest.approx(0.5, abs=1e-9)
    assert all(b > a for a, b in zip(hist, hist[1:]))


def test_thurston_restores_shrunk_grid5():
    P = catalog("grid5")
    Q, _ = thurston(P.replace(radii=P.radii * 0.9), CFG)
    assert np.allclose(Q.radii, 1 / (2 * math.sqrt(5)), atol=1e-9)


def test_thurston_step_stationary_when_tight():
    P = catalog("grid5")
    Q, gain = thurston_step(P, CFG)
    assert gain == 0.0 and Q is P


@pytest.mark.parametrize("name", ["triangular1", "heppes"])
def test_lattice_step_stationary_on_strictly_jammed(name):
    P = catalog(name)
    _, dA = swinnerton_dyer_step(P, CFG)
    assert dA == 0.0


def test_lattice_step_square_is_first_order_stationary():
    # with b = 0 the two loop contacts force a' >= 0 and c' >= 0
    _, dA = swinnerton_dyer_step(catalog("square1"), CFG)
    assert dA == 0.0


def test_lattice_step_shrinks_sheared_square_cell():
    P = Packing(LatticeBasis(1.0, 0.05, 1.0), [(0, 0)], [0.5])
    Q, dA = swinnerton_dyer_step(P, CFG)
    assert dA < 0 and is_valid(Q)
    assert lattice_area(Q.lattice) == pytest.approx(1.0 + dA)


def test_lattice_step_needs_torus():
    with pytest.raises(TypeError):
        swinnerton_dyer_step(catalog("soddy"), CFG)


def test_strict_flow_from_square_reaches_triangular():
    Q, traj, rep = jam(catalog("square1"), DriverConfig(seed=0, mode="strict"))
    assert rep.jammed and rep.isostatic
    L = Q.lattice
    assert L.b / L.a == pytest.approx(0.5, abs=1e-6)
    assert L.c / L.a == pytest.approx(math.sqrt(3) / 2, abs=1e-6)
    assert density(Q) == pytest.approx(math.pi / math.sqrt(12), abs=1e-6)
    rho = [row[2] for row in traj.rows]
    assert all(b >= a - 1e-15 for a, b in zip(rho, rho[1:]))


@pytest.mark.parametrize("n", [1, 5, 50])
def test_seed_random_valid_low_density(n):
    P = seed_random(n, None, SQ, seed=3)
    assert P.n == n and validate(P) == []
    assert density(P) == pytest.approx(0.02, rel=1e-12)
    assert np.array_equal(P.centers[0], [0.0, 0.0])


def test_seed_random_tricusp_and_ratios():
    P = seed_random(4, [1, 1, 1, 2.5], TricuspContainer(), seed=7)
    assert validate(P) == []
    assert P.radii[3] / P.radii[0] == pytest.approx(2.5)


def test_seed_random_rejects_bad_input():
    with pytest.raises(ValueError):
        seed_random(0, None, SQ, 0)
    with pytest.raises(ValueError):
        seed_random(2, [1.0, -1.0], SQ, 0)
    with pytest.raises(ValueError):
        seed_random(2, [1.0], SQ, 0)


def test_jiggle_preserves_validity_and_radii():
    P = catalog("fivedisk_generic")
    P = P.replace(radii=P.radii * 0.9)
    Q = jiggle(P, 0.01, np.random.default_rng(0), sweeps=10)
    assert is_valid(Q, 0.0) and np.array_equal(Q.radii, P.radii)
    assert np.array_equal(Q.centers[0], [0.0, 0.0])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_jam_trajectory_monotone_and_certified(seed):
    P = seed_random(6, None, SQ, seed)
    Q, traj, rep = jam(P, DriverConfig(seed=seed))
    rho = [row[2] for row in traj.rows]
    assert all(b >= a for a, b in zip(rho, rho[1:]))
    assert rep.jammed and rep.k_spine >= 2 * rep.n_spine - 1
    assert traj.rows[-1][2] == density(Q)


def test_jam_is_deterministic():
    def run():
        P = seed_random(5, [1, 1.02, 1.05, 1.11, 1.23], SQ, 42)
        Q, traj, _ = jam(P, DriverConfig(seed=42))
        return Q.centers.tobytes() + Q.radii.tobytes(), traj.to_csv()

    assert run() == run()


def test_trajectory_csv_header():
    P = Packing(SQ, [(0, 0)], [0.3])
    _, traj, _ = jam(P, DriverConfig(seed=1))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "iter,t,density,contacts"
    assert len(lines) == len(traj.rows) + 1


def test_jam_failure_carries_state():
    P = seed_random(5, None, SQ, 0)
    with pytest.raises(JamFailure) as info:
        jam(P, DriverConfig(seed=0, max_iter=1))
    assert info.value.trajectory.reason == "iteration_cap"
    assert is_valid(info.value.packing)


def test_strict_mode_rejects_tricusp():
    with pytest.raises(ValueError):
        jam(catalog("soddy"), DriverConfig(seed=0, mode="strict"))


@pytest.mark.parametrize("kwargs", [
    {"seed": None},
    {"seed": 0, "step_cap": 0.0},
    {"seed": 0, "max_iter": 0},
    {"seed": 0, "activation": 0.1, "step_cap": 0.05},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        DriverConfig(**kwargs)


def test_two_disks_generic_lattice_jam_with_three_contacts():
    L = LatticeBasis(1.06, 0.31, 1 / 1.06)
    P = seed_random(2, [1.0, 0.83], L, 5)
    _, _, rep = jam(P, DriverConfig(seed=5))
    assert rep.jammed and rep.k == 3 and rep.isostatic


def test_two_disks_rectangular_lattice_jam_with_four_contacts():
    L = LatticeBasis(1.0, 0.0, 1.17)
    P = seed_random(2, [1.0, 0.77], L, 5)
    _, _, rep = jam(P, DriverConfig(seed=5))
    assert rep.jammed and rep.k == 4 and rep.stress_dim == 2


def test_strict_random_jams_are_isostatic():
    P = seed_random(4, [1, 1.1, 1.2, 1.3], SQ, 2)
    _, _, rep = jam(P, DriverConfig(seed=2, mode="strict"))
    assert rep.jammed and rep.k_spine == 2 * rep.n_spine + 1


def test_tricusp_jam():
    P = seed_random(4, [1, 1, 1, 2.5], TricuspContainer(), seed=7)
    Q, _, rep = jam(P, DriverConfig(seed=7))
    assert rep.jammed and rep.mode == "tricusp"
    assert validate(Q) == []
    assert detect_contacts(Q).k == rep.k
