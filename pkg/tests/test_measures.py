import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracfield.analytic import cantor_measure
from fracfield.errors import ConfigError
from fracfield.fields import GridSpec
from fracfield.measures import RadonMeasure, measure_ball_mass


def test_total_variation_and_mass():
    mu = RadonMeasure(n=2, atom_points=np.array([[0.0, 0.0], [1.0, 0.0]]),
                      atom_weights=np.array([1.0, -1.0]))
    assert mu.total_variation() == pytest.approx(2.0)
    assert mu.total_mass() == pytest.approx(0.0)
    assert mu.abs().total_mass() == pytest.approx(2.0)


def test_distinct_atoms_required():
    with pytest.raises(ConfigError):
        RadonMeasure(n=1, atom_points=np.array([[0.5], [0.5]]),
                     atom_weights=np.array([1.0, 2.0]))


def test_ball_mass_empty_and_single_atom():
    empty = RadonMeasure(n=2, atom_points=np.zeros((0, 2)), atom_weights=np.zeros(0))
    assert measure_ball_mass(empty, (0.0, 0.0), 1.0) == 0.0
    single = RadonMeasure(n=2, atom_points=np.array([[0.3, 0.3]]),
                          atom_weights=np.array([1.0]))
    for r in (0.1, 1.0, 5.0):
        assert measure_ball_mass(single, (0.3, 0.3), r) == 1.0
    assert measure_ball_mass(single, (2.0, 2.0), 0.5) == 0.0


def test_ball_mass_open_ball_semantics():
    mu = RadonMeasure(n=1, atom_points=np.array([[1.0]]), atom_weights=np.array([1.0]))
    assert measure_ball_mass(mu, (0.0,), 1.0) == 0.0  # boundary atom excluded
    assert measure_ball_mass(mu, (0.0,), 1.0 + 1e-12) == 1.0


def test_cantor_ball_masses():
    mu = cantor_measure(8, 1)
    assert mu.total_mass() == pytest.approx(1.0)
    # level-8 measure, r = 3^-5 at a Cantor point: one level-5 cylinder
    assert measure_ball_mass(mu, (0.0,), 3.0**-5) == pytest.approx(2.0**-5, abs=2.0**-8 * 0)
    for j in range(0, 7):
        assert measure_ball_mass(mu, (0.0,), 3.0**-j) == pytest.approx(2.0**-j)


def test_density_ball_mass_against_area():
    grid = GridSpec((-1.5, -1.5), (1.5, 1.5), (300, 300))
    dens = np.ones(grid.counts)
    mu = RadonMeasure(n=2, atom_points=np.zeros((0, 2)), atom_weights=np.zeros(0),
                      density_grid=grid, density_values=dens)
    r = 0.8
    mass = measure_ball_mass(mu, (0.1, -0.2), r)
    assert mass == pytest.approx(math.pi * r * r, rel=2e-3)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=10**6))
def test_ball_mass_monotone_for_nonnegative(k, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(k, 2))
    # nudge duplicates apart
    pts += 1e-9 * np.arange(k)[:, None]
    w = rng.uniform(0.0, 1.0, size=k)
    mu = RadonMeasure(n=2, atom_points=pts, atom_weights=w)
    center = rng.uniform(-1, 1, size=2)
    masses = [measure_ball_mass(mu, center, r) for r in (0.2, 0.5, 1.0, 2.0, 4.0)]
    assert all(a <= b + 1e-12 for a, b in zip(masses, masses[1:]))
