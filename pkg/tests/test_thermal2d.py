import numpy as np
import pytest

from csfmelt.errors import InvalidInputError
from csfmelt.evaporation import EvaporationModel, LaserModel
from csfmelt.mesh import Cartesian2D
from csfmelt.thermal2d import Heat2D, MeltPoolScenario, solve_transient_2d

A = 100e-6
MESH = Cartesian2D.uniform((-A, A), (-A, A), 40, 40)


def _sc(**kw):
    base = dict(mesh=MESH, eps=12.5e-6, dt=1e-8, t_end=5e-8)
    base.update(kw)
    return MeltPoolScenario(**base)


def test_laser_off_stays_uniform():
    rep = solve_transient_2d(_sc(laser=LaserModel(variant="Gaussian2D", power=0.0)))
    np.testing.assert_allclose(rep.T, 500.0, rtol=0, atol=1e-10)


def test_operators_are_consistent():
    op = Heat2D(_sc())
    one = np.ones(MESH.n_nodes)
    # constants lie in the conductivity kernel; M has positive total heat capacity
    assert np.max(np.abs(op.K @ one)) < 1e-9 * abs(op.K).max()
    assert (op.M @ one).sum() > 0
    # the scaled delta integrates to the interface length inside the domain
    length = np.sum(op.delta * op.wj)
    arc = np.pi * 50e-6 + 2 * (0.5 * np.pi * 10e-6) + 2 * (A - 60e-6)
    assert length == pytest.approx(arc, rel=2e-2)


def test_energy_input_matches_laser_power_early_on():
    sc = _sc(t_end=2e-8)
    rep = solve_transient_2d(sc)
    op = Heat2D(sc)
    energy = (op.M @ (rep.T - 500.0)).sum()
    assert energy == pytest.approx(op.F_laser.sum() * sc.t_end, rel=1e-3)
    assert op.F_laser.sum() > 0


@pytest.mark.parametrize("method", ["CE", "IV"])
def test_evaporation_run_converges(method):
    sc = _sc(evaporation=EvaporationModel(method=method), T0=3000.0, T_bar=3000.0)
    rep = solve_transient_2d(sc)
    assert np.all(rep.iterations >= 1) and rep.iterations.max() < 10
    assert rep.recoil_l1 > 0
    hot = solve_transient_2d(_sc(T0=3000.0, T_bar=3000.0))
    assert rep.T_peak < hot.T_peak


def test_peak_near_beam_axis():
    rep = solve_transient_2d(_sc(t_end=1e-7))
    assert abs(rep.x_peak[0]) <= 2 * A / 40 + 1e-12
    assert abs(rep.d_peak) <= 12.5e-6


def test_scenario_validation():
    with pytest.raises(InvalidInputError):
        _sc(eps=0.0)
    with pytest.raises(InvalidInputError):
        _sc(dirichlet=("front",))
    with pytest.raises(InvalidInputError):
        _sc(case="V8")
