import json
import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from diskjam.experiments import (
    HEPPES_DENSITY,
    STELLAR_DENSITY,
    binary_density,
    binary_packing,
    binary_sweep,
    heppes_bound,
    isostatic_experiment,
    sample_lattice,
    stellar_density_check,
    summarize,
    write_jsonl,
)
from diskjam.geometry import lattice_area
from diskjam.packing import density, detect_contacts, validate

# frozen from a 40-digit decimal evaluation of pi (5 - 2 sqrt 2) / (2 sqrt 3 + 4)
HEPPES_2_1 = 0.9140011408467844


def test_binary_density_at_one_is_triangular():
    assert binary_density(1.0) == pytest.approx(math.pi / math.sqrt(12), abs=1e-12)


def test_binary_density_at_heppes_ratio():
    assert binary_density(math.sqrt(2) - 1) == pytest.approx(HEPPES_DENSITY, abs=1e-12)
    assert HEPPES_DENSITY == pytest.approx(0.9201512, abs=1e-7)


@pytest.mark.parametrize("r", [math.sqrt(2) - 1, 0.5, 0.7, 1.0])
def test_binary_density_matches_constructed_packing(r):
    P = binary_packing(r)
    assert validate(P) == []
    assert density(P) == pytest.approx(binary_density(r), abs=1e-12)
    # the small disk touches four large ones
    assert sum(1 for c in detect_contacts(P).contacts if {c.i, c.j} == {0, 1}) == 4


def test_binary_density_half():
    # pi * 1.25 / (4 sqrt 1.25) simplifies to pi sqrt 5 / 8
    assert binary_density(0.5) == pytest.approx(math.pi * math.sqrt(5) / 8, abs=1e-15)
    assert binary_density(0.5) == pytest.approx(0.8781018, abs=1e-7)


@pytest.mark.parametrize("r", [0.0, -0.1, 1.5])
def test_binary_density_domain(r):
    with pytest.raises(ValueError):
        binary_density(r)


def test_binary_packing_domain():
    with pytest.raises(ValueError):
        binary_packing(0.3)


@pytest.mark.parametrize("n", [1, 2, 3, 10])
def test_heppes_bound_equal_counts(n):
    assert heppes_bound(n, n) == pytest.approx(math.pi * (2 - math.sqrt(2)) / 2, abs=1e-12)


def test_heppes_bound_no_small_disks():
    assert heppes_bound(4, 0) == pytest.approx(math.pi / math.sqrt(12), abs=1e-12)


def test_heppes_bound_two_one_decimal_oracle():
    getcontext().prec = 40
    pi = Decimal("3.141592653589793238462643383279502884197")
    exact = pi * (5 - 2 * Decimal(2).sqrt()) / (2 * Decimal(3).sqrt() + 4)
    assert float(exact) == pytest.approx(HEPPES_2_1, abs=1e-15)
    assert heppes_bound(2, 1) == pytest.approx(HEPPES_2_1, abs=1e-14)


@pytest.mark.parametrize("n1,n2", [(0, 0), (1, 2), (2, -1)])
def test_heppes_bound_domain(n1, n2):
    with pytest.raises(ValueError):
        heppes_bound(n1, n2)


def test_sweep_endpoints_and_concavity():
    res = binary_sweep(math.sqrt(2) - 1, 1.0, 99)
    assert len(res.r) == 100 and np.all(np.diff(res.r) > 0)
    assert res.density[0] == pytest.approx(0.9201512, abs=1e-6)
    assert res.density[-1] == pytest.approx(0.9068996, abs=1e-6)
    assert res.concave_up and np.all(res.second_diff >= -1e-9)


def test_sweep_single_step_and_csv():
    res = binary_sweep(0.5, 1.0, 1)
    lines = res.to_csv().splitlines()
    assert lines[0] == "r,density,second_diff"
    assert len(lines) == 3 and len(res.second_diff) == 0


def test_sweep_domain():
    with pytest.raises(ValueError):
        binary_sweep(0.9, 0.5, 10)
    with pytest.raises(ValueError):
        binary_sweep(0.5, 0.9, 0)


def test_stellar_check():
    rec = stellar_density_check()
    assert rec["ok"]
    assert rec["stellar_density"] == pytest.approx(0.9162979, abs=1e-7)
    assert rec["heppes_density"] > rec["stellar_density"]
    assert rec["radius_ratio"] == pytest.approx([1, 2, 3])
    assert STELLAR_DENSITY == pytest.approx(7 * math.pi / 24)


@pytest.mark.parametrize("mode", ["generic", "rect", "square"])
def test_sample_lattice_has_unit_area(mode):
    L = sample_lattice(np.random.default_rng(0), mode)
    assert lattice_area(L) == pytest.approx(1.0, abs=1e-12)
    if mode != "generic":
        assert L.b == 0.0


def test_experiment_two_disks_generic_is_isostatic():
    recs, summ = isostatic_experiment(2, 5, lattice_mode="generic", seed=1)
    assert summ.successes == 5 and summ.violations == []
    assert all(r.k == 3 for r in recs if r.success)


def test_experiment_two_disks_rectangular_has_four_contacts():
    recs, _ = isostatic_experiment(2, 5, lattice_mode="rect", seed=1)
    assert all(r.k == 4 and not r.isostatic for r in recs if r.success)


def test_experiment_square_lattice_five_disks():
    recs, summ = isostatic_experiment(5, 5, lattice_mode="square", seed=1)
    assert summ.successes >= 4 and summ.violations == []


def test_experiment_records_satisfy_count_inequality():
    recs, _ = isostatic_experiment(4, 6, seed=3)
    for r in recs:
        if r.success:
            assert r.k_spine >= 2 * r.n_spine - 1


def test_experiment_deterministic_and_worker_independent(tmp_path):
    a, _ = isostatic_experiment(3, 4, seed=2)
    b, _ = isostatic_experiment(3, 4, seed=2)
    c, _ = isostatic_experiment(3, 4, seed=2, workers=2)
    ja = [r.to_json() for r in a]
    assert ja == [r.to_json() for r in b] == [r.to_json() for r in c]
    path = tmp_path / "e.jsonl"
    write_jsonl(a, path)
    lines = path.read_text().splitlines()
    assert [json.loads(x)["trial"] for x in lines] == [0, 1, 2, 3]


def test_summary_skips_failures_and_ambiguous():
    recs, _ = isostatic_experiment(2, 3, seed=0)
    recs[0].success = False
    recs[1].ambiguous = True
    s = summarize(recs)
    assert (s.trials, s.successes, s.unambiguous) == (3, 2, 1)


def test_experiment_validates_input():
    with pytest.raises(ValueError):
        isostatic_experiment(2, 0)
    with pytest.raises(ValueError):
        isostatic_experiment(2, 1, lattice_mode="hex")
    with pytest.raises(ValueError):
        isostatic_experiment(2, 1, ratio_spread=1.5)
