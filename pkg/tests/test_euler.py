import numpy as np
import pytest

from vortexpair.euler import (
    EvolutionState, evolve, orbit_distance, perturb_vertical, stability_experiment, step,
)
from vortexpair.grid import Domain, Field, integrate, shift_x1, xp_norm
from vortexpair.profiles import bump


def test_state_validation():
    d = Domain(1, 1, 4, 4)
    with pytest.raises(ValueError):
        EvolutionState(d.zeros(), dt=0)
    with pytest.raises(ValueError):
        EvolutionState(d.zeros(), dt=0.1, t=-1)
    with pytest.raises(ValueError):
        EvolutionState(Field(d, -np.ones(d.shape), nonneg=False), dt=0.1)
    with pytest.raises(ValueError):
        EvolutionState(d.zeros(), dt=0.1, order=2)


def test_zero_stays_zero():
    d = Domain(1, 1, 8, 4)
    tr = evolve(EvolutionState.start(d.zeros(), 0.1), 1.0, record_every=3)
    assert tr.state.omega.is_zero()
    assert all(r["energy"] == 0 and r["mass"] == 0 for r in tr.series)
    assert tr.max_drift("mass") == 0.0
    with pytest.raises(ValueError):
        evolve(EvolutionState.start(d.zeros(), 0.1), 0.0)


@pytest.mark.parametrize("order", [1, 3])
def test_translation_equivariance(order):
    d = Domain(4.0, 2.0, 64, 32)
    a = bump(d, center=(-0.5, 0.75))
    b = shift_x1(a, 1)
    sa, sb = EvolutionState.start(a, 0.02, order), EvolutionState.start(b, 0.02, order)
    for _ in range(5):
        sa, sb = step(sa), step(sb)
    assert np.max(np.abs(shift_x1(sa.omega, 1).values - sb.omega.values)) <= 1e-10


def test_mass_drift_per_step():
    d = Domain(2.0, 1.0, 128, 32)  # h = 1/32
    s = EvolutionState.start(bump(d, center=(0.0, 0.5), radius=0.3), 0.01)
    m = [integrate(s.omega)]
    for _ in range(20):
        s = step(s)
        m.append(integrate(s.omega))
    assert np.max(np.abs(np.diff(m))) / m[0] <= 1e-4
    assert not s.cfl_warning


def test_cfl_warning_flag():
    d = Domain(4.0, 2.0, 32, 16)
    s = step(EvolutionState.start(bump(d), dt=50.0))
    assert s.cfl_warning


def test_orbit_distance_invariances():
    d = Domain(4.0, 2.0, 64, 32)
    rep = bump(d)
    assert orbit_distance(rep, rep) == 0.0
    assert orbit_distance(shift_x1(rep, 7), rep) == 0.0
    assert orbit_distance(shift_x1(rep, -5), rep) == 0.0
    with pytest.raises(ValueError):
        orbit_distance(Domain(1, 1, 4, 4).zeros(), rep)


def test_orbit_distance_single_cell_hand_value():
    d = Domain(4.0, 2.0, 64, 32)
    rep = bump(d, center=(-2.0, 0.75))
    j, i = 20, 50
    m = 1e-3
    v = rep.values.copy()
    v[j, i] += m / d.cell_area
    y, a, p = d.x2[j], d.cell_area, 3.0
    hand = m * y + m + m * a ** (1 / p - 1)
    assert orbit_distance(Field(d, v), rep, p) == pytest.approx(hand, rel=1e-12)


def test_perturbation_distance_exact_and_nonnegative():
    d = Domain(4.0, 2.0, 64, 32)
    rep = bump(d)
    for delta in (1e-2, 5e-3, 2.5e-3):
        w = perturb_vertical(rep, delta)
        assert np.all(w.values >= 0)
        assert xp_norm(w - rep) == pytest.approx(delta, rel=1e-10)
    assert perturb_vertical(rep, 0.0) is rep
    with pytest.raises(ValueError):
        perturb_vertical(rep, 1e3)
    with pytest.raises(ValueError):
        perturb_vertical(rep, -1)


def test_two_signed_perturbation_rejected():
    d = Domain(4.0, 2.0, 32, 16)
    rep = bump(d)
    bad = Field(d, -2 * rep.values, nonneg=False)
    with pytest.raises(ValueError, match="two-signed"):
        stability_experiment(rep, 0.0, 0.1, perturbation=bad)


def test_stability_report_fields():
    d = Domain(4.0, 2.0, 32, 16)
    rep = bump(d)
    r = stability_experiment(rep, 1e-2, T=0.1, dt=0.05, record_every=1)
    assert r.initial_distance == pytest.approx(1e-2, rel=1e-10)
    assert len(r.distances) == len(r.times) == 3
    assert r.max_distance == max(r.distances)
    assert set(r.as_dict()) >= {"delta", "max_distance", "energy_drift", "cfl_warning"}
