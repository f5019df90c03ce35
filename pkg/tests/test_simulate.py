import math

import numpy as np
import pytest

from patchcontrol import (
    BoundaryCondition,
    GridSpec,
    PatchLayout,
    ScalarProblem,
    ScalarZone,
    SimulationRun,
    StageZone,
    TransientNotResolvedError,
    critical_patch_dirichlet,
    growth_exponent,
    simulate,
)
from patchcontrol.oracle import top_eigenvalue_fd
from patchcontrol.simulate import write_snapshot_csv, write_trajectory_csv

FAST = GridSpec(cells_per_unit_length=64, refinement_levels=2)


def kiss_problem(ratio: float) -> ScalarProblem:
    a, lam = 1.0, 1.0
    R = ratio * critical_patch_dirichlet(a, lam)
    return ScalarProblem(a=a, lam=lam, b=a, mu=0.0, R=R, r=0.0, bc=BoundaryCondition.DIRICHLET)


class TestSimulate:
    def test_decaying_layout_decays_monotonically(self):
        p = ScalarProblem(a=16.67, lam=0.65, b=16.67, mu=3.0, R=7.0, r=1.0,
                          bc=BoundaryCondition.DIRICHLET)
        run = SimulationRun(layout=p.to_layout(), T=6.0, dt=0.005, grid=FAST)
        result = simulate(run)
        assert growth_exponent(result) < 0
        tail = result.log_l2[len(result.log_l2) // 2 :]
        assert np.all(np.diff(tail) < 0)

    def test_kiss_threshold_sign_change(self):
        grow = simulate(SimulationRun(layout=kiss_problem(1.01).to_layout(), T=60.0,
                                      dt=0.03, grid=FAST))
        decay = simulate(SimulationRun(layout=kiss_problem(0.99).to_layout(), T=60.0,
                                       dt=0.03, grid=FAST))
        assert growth_exponent(grow) > 0
        assert growth_exponent(decay) < 0

    def test_mass_conservation_neumann(self):
        layout = PatchLayout(ScalarZone(1.0, 0.0), ScalarZone(1.0, 0.0), R=2.0, r=1.0,
                             bc=BoundaryCondition.NEUMANN)
        result = simulate(SimulationRun(layout=layout, T=5.0, dt=0.01, grid=FAST))
        drift = np.abs(result.total_mass - result.total_mass[0]).max()
        assert drift <= 1e-10 * max(1.0, result.total_mass[0]) * 5.0

    def test_positivity_preserved(self):
        p = ScalarProblem(a=1.0, lam=0.5, b=1.0, mu=4.0, R=3.0, r=1.0)
        result = simulate(SimulationRun(layout=p.to_layout(), T=20.0, dt=0.02, grid=FAST))
        assert result.min_density_ratio >= -1e-12

    def test_dt_refinement_stability_of_exponent(self):
        p = ScalarProblem(a=1.0, lam=1.0, b=1.0, mu=3.0, R=2.0, r=0.8)
        coarse = simulate(SimulationRun(layout=p.to_layout(), T=40.0, dt=0.04, grid=FAST))
        fine = simulate(SimulationRun(layout=p.to_layout(), T=40.0, dt=0.02, grid=FAST))
        e1, e2 = growth_exponent(coarse), growth_exponent(fine)
        assert abs(e1 - e2) <= 1e-3 * max(1.0, abs(e1))

    def test_k_periodic_initial_data_stays_periodic(self):
        layout = PatchLayout(ScalarZone(1.0, 0.8), ScalarZone(1.0, -3.0), R=2.0, r=1.0, K=2,
                             bc=BoundaryCondition.PERIODIC)
        from patchcontrol.oracle import assemble

        op = assemble(layout, FAST, 0)
        period = layout.R + layout.r
        phase = np.mod(op.x, period)
        y0 = np.exp(-((phase - 1.0) ** 2) / 0.125)
        result = simulate(
            SimulationRun(layout=layout, T=6.0, dt=0.01, grid=FAST,
                          initial_profile=y0)
        )
        profile = result.final_profile[:, 0]
        n = len(profile) // 2
        np.testing.assert_allclose(profile[:n], profile[n:], rtol=0, atol=1e-9 * profile.max())

    def test_growing_mode_renormalizes_without_overflow(self):
        p = ScalarProblem(a=1.0, lam=30.0, b=1.0, mu=0.0, R=50.0, r=0.0,
                          bc=BoundaryCondition.NEUMANN)
        result = simulate(SimulationRun(layout=p.to_layout(), T=20.0, dt=0.001,
                                        grid=GridSpec(cells_per_unit_length=4,
                                                      refinement_levels=2,
                                                      min_cells_per_zone=8)))
        assert np.all(np.isfinite(result.log_l2))
        assert growth_exponent(result) == pytest.approx(30.0, abs=0.01)

    def test_exponent_matches_oracle_eigenvalue(self):
        cases = [
            ScalarProblem(a=1.0, lam=1.0, b=1.0, mu=3.0, R=2.0, r=0.8),
            ScalarProblem(a=2.0, lam=0.3, b=0.5, mu=2.0, R=4.0, r=0.5,
                          bc=BoundaryCondition.NEUMANN),
            ScalarProblem(a=16.67, lam=0.65, b=16.67, mu=10.0, R=14.0, r=1.0),
        ]
        for p in cases:
            fd = top_eigenvalue_fd(p.to_layout(), FAST)
            scale = max(abs(fd.top_eigenvalue), 0.1)
            result = simulate(
                SimulationRun(layout=p.to_layout(), T=30.0 / scale,
                              dt=min(0.05 / scale, 0.05), grid=FAST, level=1)
            )
            exponent = growth_exponent(result)
            assert abs(exponent - fd.top_eigenvalue) <= 10 * (fd.error_estimate + 1e-3)

    def test_staged_simulation_runs(self):
        layout = PatchLayout(
            beneficial=StageZone([1.0, 1.0], [[-0.91, 2.24], [0.01, -0.02]]),
            control=StageZone([1.0, 1.0], [[-1.7, 0.56], [0.0025, -0.8]]),
            R=40.0,
            r=1.0,
        )
        result = simulate(SimulationRun(layout=layout, T=300.0, dt=0.5, grid=FAST))
        assert result.stage_log_l2 is not None
        assert growth_exponent(result, fit_residual_tol=5e-3) < 0

    def test_transient_not_resolved(self):
        # Narrow off-center spike: several modes with comparable weight, so the
        # log norm is still curved over a short horizon.
        from patchcontrol.oracle import assemble

        p = ScalarProblem(a=1.0, lam=0.0, b=1.0, mu=0.0, R=math.pi, r=0.0,
                          bc=BoundaryCondition.DIRICHLET)
        op = assemble(p.to_layout(), FAST, 0)
        y0 = np.exp(-((op.x - math.pi / 6) ** 2) / (2 * (math.pi / 40) ** 2))
        result = simulate(SimulationRun(layout=p.to_layout(), T=0.6, dt=0.002, grid=FAST,
                                        initial_profile=y0))
        with pytest.raises(TransientNotResolvedError):
            growth_exponent(result)


class TestCsvOutputs:
    def test_trajectory_csv_columns(self, tmp_path):
        p = ScalarProblem(a=1.0, lam=0.5, b=1.0, mu=2.0, R=2.0, r=0.5)
        result = simulate(SimulationRun(layout=p.to_layout(), T=1.0, dt=0.01, grid=FAST))
        path = tmp_path / "trajectory.csv"
        write_trajectory_csv(result, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "t,log_l2_norm,total_mass"
        assert len(lines) == len(result.times) + 1

    def test_staged_trajectory_has_stage_columns(self, tmp_path):
        layout = PatchLayout(
            beneficial=StageZone([1.0, 1.0], [[-0.91, 2.24], [0.01, -0.02]]),
            control=StageZone([1.0, 1.0], [[-1.7, 0.56], [0.0025, -0.8]]),
            R=10.0,
            r=1.0,
        )
        result = simulate(SimulationRun(layout=layout, T=2.0, dt=0.05, grid=FAST))
        path = tmp_path / "trajectory.csv"
        write_trajectory_csv(result, str(path))
        header = path.read_text().splitlines()[0]
        assert header == "t,log_l2_norm,total_mass,log_l2_stage_1,log_l2_stage_2"

    def test_snapshot_csv(self, tmp_path):
        p = ScalarProblem(a=1.0, lam=0.5, b=1.0, mu=2.0, R=2.0, r=0.5)
        result = simulate(
            SimulationRun(layout=p.to_layout(), T=1.0, dt=0.01, grid=FAST,
                          snapshot_times=(0.5,))
        )
        assert len(result.snapshots) == 1
        path = tmp_path / "snap.csv"
        write_snapshot_csv(result.snapshots[0], str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "x,stage_index,density"
        assert len(lines) == len(result.x) + 1

    def test_deterministic_bytes(self, tmp_path):
        p = ScalarProblem(a=1.0, lam=0.5, b=1.0, mu=2.0, R=2.0, r=0.5)
        outputs = []
        for name in ("a.csv", "b.csv"):
            result = simulate(SimulationRun(layout=p.to_layout(), T=1.0, dt=0.01, grid=FAST))
            path = tmp_path / name
            write_trajectory_csv(result, str(path))
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]
