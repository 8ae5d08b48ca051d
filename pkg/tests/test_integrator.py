"""Structural properties of the leapfrog map and its flip composition."""

import math

import numpy as np
import pytest

from drghmc import (
    MassMatrix,
    flip,
    flip_leapfrog,
    hamiltonian,
    leapfrog,
    leapfrog_trajectory,
    phase_point,
)
from drghmc.models import build_model

LOG_2PI = math.log(2.0 * math.pi)


@pytest.fixture(scope="module")
def gauss1():
    return build_model("gaussian", dim=1)


@pytest.fixture(scope="module")
def funnel10():
    return build_model("funnel", dim=10)


def test_leapfrog_hand_example(gauss1):
    # rho' = 1, theta' = 0.1, rho'' = 1 - 0.05 * 0.1
    z = phase_point([0.0], [1.0])
    out, divergent = leapfrog(gauss1, z, 0.1, MassMatrix.identity(1))
    assert not divergent
    assert out.theta[0] == pytest.approx(0.1, abs=1e-15)
    assert out.rho[0] == pytest.approx(0.995, abs=1e-15)


def test_leapfrog_fixed_point_at_mode(gauss1):
    z = phase_point([0.0], [0.0])
    out, divergent = leapfrog(gauss1, z, 0.3, MassMatrix.identity(1))
    assert not divergent
    assert out.theta[0] == 0.0
    assert out.rho[0] == 0.0


def test_leapfrog_time_reversibility(funnel10):
    rng = np.random.default_rng(0)
    mass = MassMatrix.identity(10)
    z = phase_point(funnel10.sample(1, rng)[0], rng.standard_normal(10))
    fwd, _ = leapfrog(funnel10, z, 0.2, mass)
    back, _ = leapfrog(funnel10, flip(fwd), 0.2, mass)
    back = flip(back)
    np.testing.assert_allclose(back.theta, z.theta, atol=1e-12)
    np.testing.assert_allclose(back.rho, z.rho, atol=1e-12)


def test_flip_properties():
    z = phase_point([1.0, -2.0], [3.0, -4.0])
    flipped = flip(z)
    np.testing.assert_array_equal(flipped.theta, z.theta)
    np.testing.assert_array_equal(flipped.rho, -z.rho)
    again = flip(flipped)
    np.testing.assert_array_equal(again.rho, z.rho)
    zero = phase_point([1.0], [0.0])
    assert flip(zero).rho[0] == 0.0


def test_hamiltonian_values(gauss1):
    mass = MassMatrix.identity(1)
    assert hamiltonian(gauss1, phase_point([0.0], [0.0]), mass) == pytest.approx(0.5 * LOG_2PI)
    heavy = MassMatrix([4.0])
    h = hamiltonian(gauss1, phase_point([0.0], [2.0]), heavy)
    assert h == pytest.approx(0.5 + 0.5 * LOG_2PI)


def test_hamiltonian_invariant_under_flip(funnel10):
    rng = np.random.default_rng(1)
    mass = MassMatrix(np.full(10, 1.7))
    z = phase_point(funnel10.sample(1, rng)[0], rng.standard_normal(10))
    assert hamiltonian(funnel10, z, mass) == hamiltonian(funnel10, flip(z), mass)


def test_energy_error_scaling(gauss1):
    mass = MassMatrix.identity(1)
    z = phase_point([1.0], [0.7])
    h0 = hamiltonian(gauss1, z, mass)
    eps_grid = np.array([0.1, 0.05, 0.025])

    per_step = [abs(hamiltonian(gauss1, leapfrog(gauss1, z, e, mass)[0], mass) - h0)
                for e in eps_grid]
    slope = np.polyfit(np.log(eps_grid), np.log(per_step), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.2)

    fixed_tau = [
        abs(hamiltonian(gauss1, leapfrog_trajectory(gauss1, z, e, round(2.0 / e), mass)[0], mass) - h0)
        for e in eps_grid
    ]
    slope = np.polyfit(np.log(eps_grid), np.log(fixed_tau), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_divergence_is_flagged_not_raised(funnel10):
    z = phase_point(np.full(10, -6.0), np.full(10, 40.0))
    out, divergent = leapfrog_trajectory(funnel10, z, 1e6, 3, MassMatrix.identity(10))
    assert divergent
    assert not out.is_finite()


def test_flip_leapfrog_is_involution_multistep(funnel10):
    rng = np.random.default_rng(5)
    mass = MassMatrix.identity(10)
    z = phase_point(funnel10.sample(1, rng)[0], rng.standard_normal(10))
    for n_steps in (1, 4):
        once, _ = flip_leapfrog(funnel10, z, 0.15, n_steps, mass)
        twice, _ = flip_leapfrog(funnel10, once, 0.15, n_steps, mass)
        np.testing.assert_allclose(twice.theta, z.theta, atol=1e-10)
        np.testing.assert_allclose(twice.rho, z.rho, atol=1e-10)


def test_mass_matrix_validation():
    with pytest.raises(ValueError):
        MassMatrix([1.0, -1.0])
    with pytest.raises(ValueError):
        MassMatrix([0.0])
    with pytest.raises(ValueError):
        MassMatrix([np.inf])
