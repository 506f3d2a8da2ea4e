import math

import numpy as np
import pytest

import hartree_lab as hl


def test_hartree_minimizer_at_unit_coupling():
    res = hl.minimize_hartree(1.0)
    assert res.converged and res.bound
    assert res.status == "converged"
    assert res.energy == pytest.approx(-0.2439648635, abs=1e-7)
    assert res.virial_ratio < 1e-4
    r, rho = res.radii, res.density
    assert r.shape == rho.shape
    assert np.trapezoid(4 * math.pi * r**2 * rho, r) == pytest.approx(1.0, abs=1e-6)


def test_without_repulsion_is_hydrogenic():
    assert hl.minimize_hartree(1.0, repulsion=0.0).energy == pytest.approx(-0.5, abs=1e-6)


def test_subcritical_coupling_reports_not_bound():
    res = hl.minimize_hartree(0.5)
    assert not res.bound
    assert res.status == "not-bound"


def test_sweep_is_decreasing():
    pts = hl.epsilon_sweep([0.9, 1.0, 1.1])
    energies = [e for _, e, _ in pts]
    assert all(e < 0 for e in energies)
    assert energies[0] > energies[1] > energies[2]


def test_two_body_and_exact_single_particle():
    assert hl.n1_exact(2.0) == -2.0
    assert hl.two_body_energy(1.0, 0.5) == pytest.approx(-2.903724 / 4, abs=1e-3)


def test_sampling_and_distance():
    a = hl.sample(1.0, 400, seed=3)
    b = hl.sample(1.0, 400, seed=3)
    c = hl.sample(1.0, 400, seed=4)
    assert a.shape == (400, 3)
    assert np.array_equal(a, b)
    assert hl.kr_distance(a, b) == 0.0
    assert hl.kr_distance(a, c) > 0.0
    with pytest.raises(hl.LabError):
        hl.kr_distance(a, np.zeros((5, 2)))


def test_errors_surface_as_lab_error():
    with pytest.raises(hl.LabError, match="bad-bracket"):
        hl.critical_lambda(0.9, 1.0)
    with pytest.raises(hl.LabError):
        hl.sample(0.5, 10)


def test_cli_in_process():
    code, records, message = hl.run("sweep", "--lambda-list", "0.9,1.0,1.1")
    assert code == 0, message
    assert [r["kind"] for r in records] == ["curve-point"] * 3
    assert records[0]["schema_version"] == hl.schema_version
    code, _, message = hl.run("solve", "--lambda", "0.5")
    assert code == 3
    code, _, message = hl.run("solve", "--lambda", "-1")
    assert code == 2 and "lambda must be > 0" in message
    code, table, _ = hl.run("lln", "--n-list", "64,256", "--repetitions", "4", "--format", "csv")
    assert code == 0
    assert table.splitlines()[0].startswith("#")
    assert len(table.splitlines()) == 4
