"""
Unit tests for the diagnostics engine and series
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import Scenario, ValidationError, sample_initial_ensemble
from functionals import DiagnosticsEngine, DiagnosticsSeries, FunctionalParams, series_columns
from pusher import IntegratorConfig, integrate, record_times


@pytest.fixture
def torus():
    scenario = Scenario.create("cylindrical-torus", swirl=0.5)
    return sample_initial_ensemble(scenario, 400, 1.0, seed=17)


def run(ensemble, params=None, t_end=0.5, dt=0.01):
    engine = DiagnosticsEngine(params)
    config = IntegratorConfig(dt=dt, field_mode="planar-radial", analytic={"line_density": 1.0})
    integrate(ensemble, config, t_end, schedule=record_times(0.0, t_end, 0.1), diagnostics=engine)
    return engine


class TestFunctionalParams:
    """Test cases for FunctionalParams"""

    @pytest.mark.parametrize("kwargs", [
        {"moment_orders": (1.0, 1.0)},
        {"moment_orders": (-1.0,)},
        {"eps_star": 0.6},
        {"floor": 0.0},
        {"delta0": -1.0},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            FunctionalParams(**kwargs)

    def test_dict_round_trip(self):
        params = FunctionalParams(moment_orders=(0, 2.5), floor=0.2)
        assert FunctionalParams.from_dict(params.to_dict()) == params


class TestDiagnosticsEngine:
    """Test cases for DiagnosticsEngine over a cylindrical run"""

    def test_columns(self):
        assert series_columns((0.0, 2.5)) == [
            "t", "mass", "kinetic_energy", "field_energy", "total_energy",
            "moment_0", "moment_2.5",
            "A_cum", "J", "max_speed", "min_planar_radius", "beta", "kinetic_energy_abs_v",
        ]

    def test_record_schedule(self, torus):
        engine = run(torus)
        np.testing.assert_allclose(engine.series.column("t"), [0.0, 0.1, 0.2, 0.3, 0.4, 0.5], atol=1e-12)

    def test_mass_is_exactly_constant(self, torus):
        mass = run(torus).series.column("mass")
        assert np.all(mass == mass[0])
        assert np.all(run(torus).series.column("moment_0") == mass[0])

    def test_a_cum_nondecreasing(self, torus):
        a_cum = run(torus).series.column("A_cum")
        assert a_cum[0] == 0.0
        assert np.all(np.isfinite(a_cum))
        assert np.all(np.diff(a_cum) > 0)

    def test_a_cum_stable_under_axis_regularization(self, torus):
        coarse = run(torus, FunctionalParams(delta0=1e-3)).series.column("A_cum")[-1]
        fine = run(torus, FunctionalParams(delta0=1e-4)).series.column("A_cum")[-1]
        assert abs(coarse - fine) / fine < 0.05

    def test_j_transported(self, torus):
        j = run(torus, FunctionalParams(floor=0.05)).series.column("J")
        assert j[0] > 0
        np.testing.assert_allclose(j, j[0], rtol=1e-9)

    def test_energy_bookkeeping(self, torus):
        for record in run(torus).series:
            assert record.total_energy == record.kinetic_energy + record.field_energy

    def test_extremes(self, torus):
        engine = run(torus)
        record = engine.series[-1]
        assert record.max_speed > 0
        assert record.min_planar_radius > 0
        assert record.beta >= 0

    def test_csv_is_reproducible(self, torus, tmp_path):
        first = run(torus).series.to_csv(tmp_path / "a.csv").read_bytes()
        second = run(torus).series.to_csv(tmp_path / "b.csv").read_bytes()
        assert first == second
        assert first.decode().splitlines()[0] == ",".join(series_columns((0.0, 1.0, 2.0)))

    def test_state_round_trip(self, torus):
        engine = run(torus)
        restored = DiagnosticsEngine(engine.params)
        restored.load_state(engine.state_dict())
        np.testing.assert_array_equal(restored.series.table(), engine.series.table())
        assert restored.a_cum == engine.a_cum
        assert restored.beta(0.5) == engine.beta(0.5)

    def test_advance_before_start(self, torus):
        with pytest.raises(ValidationError):
            DiagnosticsEngine().advance(torus, 0.1)

    def test_series_rejects_out_of_order(self, torus):
        engine = run(torus, t_end=0.1)
        series = DiagnosticsSeries(engine.params.moment_orders)
        series.append(engine.series[-1])
        with pytest.raises(ValidationError):
            series.append(engine.series[0])
