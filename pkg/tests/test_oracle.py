import math

import numpy as np
import pytest

from patchcontrol import (
    BoundaryCondition,
    GridSpec,
    PatchLayout,
    ScalarProblem,
    ScalarZone,
    StageZone,
    VerdictStatus,
    min_mortality,
    top_eigenvalue_scalar,
)
from patchcontrol.oracle import (
    assemble,
    min_mortality_fd,
    refinement_history,
    top_eigenvalue_fd,
    verdict_fd,
)

from conftest import random_scalar_problem

FAST = GridSpec(cells_per_unit_length=64, refinement_levels=2)


def single_zone_layout(a=1.0, lam=0.0, R=2.0, bc=BoundaryCondition.DIRICHLET, K=1):
    return PatchLayout(
        beneficial=ScalarZone(a, lam),
        control=ScalarZone(a, -1.0),
        R=R,
        r=0.0,
        K=K,
        bc=bc,
    )


class TestAssembly:
    def test_dirichlet_laplacian_spectrum_exact(self):
        # Uniform grid: all eigenvalues are -4a/h^2 sin^2(k pi h / (2L)).
        layout = single_zone_layout(a=1.0, lam=0.0, R=2.0)
        op = assemble(layout, GridSpec(cells_per_unit_length=32, refinement_levels=2), level=0)
        S = op.symmetric_form().toarray()
        vals = np.sort(np.linalg.eigvalsh(S))[::-1]
        n_cells = 64
        h = 2.0 / n_cells
        expected = np.sort(
            [-4.0 / h**2 * math.sin(k * math.pi * h / (2 * 2.0)) ** 2 for k in range(1, n_cells)]
        )[::-1]
        np.testing.assert_allclose(vals, expected, rtol=1e-10, atol=1e-10)

    def test_neumann_top_mode_is_constant(self):
        layout = single_zone_layout(a=3.0, lam=0.7, R=1.5, bc=BoundaryCondition.NEUMANN)
        op = assemble(layout, FAST, level=0)
        S = op.symmetric_form().toarray()
        top = np.linalg.eigvalsh(S)[-1]
        assert top == pytest.approx(0.7, abs=1e-10)

    def test_periodic_top_mode_is_constant(self):
        layout = single_zone_layout(a=2.0, lam=-0.3, R=1.0, bc=BoundaryCondition.PERIODIC, K=2)
        op = assemble(layout, FAST, level=0)
        S = op.symmetric_form().toarray()
        top = np.linalg.eigvalsh(S)[-1]
        assert top == pytest.approx(-0.3, abs=1e-10)

    def test_two_zone_scalar_matrix_symmetric(self):
        layout = PatchLayout(ScalarZone(2.0, 0.5), ScalarZone(0.3, -4.0), R=3.0, r=0.7, K=2)
        op = assemble(layout, FAST, level=0)
        S = op.symmetric_form()
        asym = np.abs((S - S.T).toarray()).max()
        assert asym <= 1e-14 * max(1.0, np.abs(S.toarray()).max())

    def test_staged_block_structure(self):
        layout = PatchLayout(
            beneficial=StageZone([1.0, 2.0], [[-1.0, 2.0], [0.5, -1.0]]),
            control=StageZone([1.0, 2.0], [[-3.0, 0.2], [0.05, -2.0]]),
            R=2.0,
            r=0.5,
        )
        op = assemble(layout, FAST, level=0)
        K = op.stiffness.tocoo()
        for i, j, v in zip(K.row, K.col, K.data):
            node_i, stage_i = divmod(i, 2)
            node_j, stage_j = divmod(j, 2)
            if node_i != node_j:
                # Spatial coupling never mixes stages.
                assert stage_i == stage_j, (node_i, node_j, stage_i, stage_j, v)

    def test_gershgorin_bounded_by_max_growth(self):
        layout = PatchLayout(ScalarZone(5.0, 1.3), ScalarZone(0.7, -9.0), R=2.0, r=0.4)
        op = assemble(layout, FAST, level=0)
        assert op.gershgorin_upper() <= 1.3 + 1e-9

    def test_interfaces_on_nodes_every_level(self):
        layout = PatchLayout(ScalarZone(1.0, 1.0), ScalarZone(1.0, -2.0), R=1.37, r=0.23, K=2)
        for level in range(3):
            op = assemble(layout, FAST, level=level)
            for target in (1.37, 1.6, 2.97):  # zone boundaries of the K = 2 ring
                assert np.min(np.abs(op.x - target)) <= 1e-9


class TestConvergence:
    def test_second_order_ratio(self):
        p = ScalarProblem(a=1.0, lam=1.0, b=2.0, mu=3.0, R=2.0, r=1.0,
                          bc=BoundaryCondition.DIRICHLET)
        hist = refinement_history(p.to_layout(), GridSpec(cells_per_unit_length=32,
                                                          refinement_levels=4))
        d1 = hist[1] - hist[0]
        d2 = hist[2] - hist[1]
        d3 = hist[3] - hist[2]
        assert 3.0 <= d1 / d2 <= 5.0
        assert 3.0 <= d2 / d3 <= 5.0

    def test_pure_kiss_analytics(self):
        for a, lam, R in ((1.0, 1.0, math.pi), (2.5, 0.8, 4.0), (16.67, 0.65, 10.0)):
            p = ScalarProblem(a=a, lam=lam, b=a, mu=0.0, R=R, r=0.0,
                              bc=BoundaryCondition.DIRICHLET)
            grid = GridSpec(cells_per_unit_length=256.0 / R, refinement_levels=2,
                            min_cells_per_zone=16)
            rep = top_eigenvalue_fd(p.to_layout(), grid)
            exact = lam - a * (math.pi / R) ** 2
            assert rep.top_eigenvalue == pytest.approx(exact, abs=1e-4)

    def test_dispersion_root_agreement(self):
        cases = [
            ScalarProblem(a=16.67, lam=0.65, b=16.67, mu=10, R=14, r=1),
            ScalarProblem(a=16.67, lam=0.65, b=16.67, mu=10, R=14, r=1,
                          bc=BoundaryCondition.DIRICHLET),
            ScalarProblem(a=1, lam=0.2, b=1, mu=2, R=1, r=1, bc=BoundaryCondition.NEUMANN),
            ScalarProblem(a=2, lam=0.9, b=0.5, mu=6, R=3, r=0.6, bc=BoundaryCondition.DIRICHLET),
        ]
        for p in cases:
            rep = top_eigenvalue_scalar(p)
            fd = top_eigenvalue_fd(p.to_layout(), FAST)
            assert abs(fd.top_eigenvalue - rep.top_eigenvalue) <= 10 * fd.error_estimate


class TestEigenvalueProperties:
    def test_monotone_in_mortality(self):
        values = []
        for mu in (0.5, 2.0, 8.0, 32.0):
            layout = PatchLayout(ScalarZone(1.0, 1.0), ScalarZone(1.0, -mu), R=2.0, r=0.8)
            values.append(top_eigenvalue_fd(layout, FAST).top_eigenvalue)
        assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))

    def test_k_independence(self):
        p = ScalarProblem(a=2.0, lam=0.7, b=1.0, mu=4.0, R=3.0, r=0.8)
        reports = [
            top_eigenvalue_fd(
                PatchLayout(ScalarZone(p.a, p.lam), ScalarZone(p.b, -p.mu), R=p.R, r=p.r, K=K),
                FAST,
            )
            for K in (1, 2, 3)
        ]
        base = reports[0]
        for rep in reports[1:]:
            tol = 10 * (rep.error_estimate + base.error_estimate)
            assert abs(rep.top_eigenvalue - base.top_eigenvalue) <= tol


class TestVerdictFd:
    def test_clause_iii_eradication(self):
        p = ScalarProblem(a=16.67, lam=0.65, b=16.67, mu=3.0, R=7.0, r=1.0,
                          bc=BoundaryCondition.DIRICHLET)
        assert verdict_fd(p.to_layout(), FAST).status is VerdictStatus.ERADICATION

    def test_clause_i_survival(self):
        p = ScalarProblem(a=1.0, lam=10.0, b=1.0, mu=50.0, R=math.pi, r=1.0,
                          bc=BoundaryCondition.DIRICHLET)
        assert verdict_fd(p.to_layout(), FAST).status is VerdictStatus.SURVIVAL

    def test_near_threshold_marginal(self):
        mu_star = min_mortality(16.67, 0.65, 14.0, 16.67, 1.0)
        p = ScalarProblem(a=16.67, lam=0.65, b=16.67, mu=mu_star, R=14.0, r=1.0)
        assert verdict_fd(p.to_layout(), FAST).status is VerdictStatus.MARGINAL


class TestOracleInverseDesign:
    def test_min_mortality_zero_when_already_eradicated(self):
        p = ScalarProblem(a=16.67, lam=0.65, b=16.67, mu=0.0, R=7.0, r=1.0,
                          bc=BoundaryCondition.DIRICHLET)
        assert min_mortality_fd(p.to_layout(), FAST) == 0.0

    def test_min_mortality_brackets_closed_form(self):
        mu_closed = min_mortality(1.0, 0.4, 3.0, 1.0, 1.0)
        p = ScalarProblem(a=1.0, lam=0.4, b=1.0, mu=1.0, R=3.0, r=1.0)
        mu_fd = min_mortality_fd(p.to_layout(), GridSpec(cells_per_unit_length=128,
                                                         refinement_levels=2))
        assert mu_fd == pytest.approx(mu_closed, rel=0.02)


class TestRandomizedAgreementSmoke:
    def test_thirty_random_layouts(self):
        from patchcontrol import scalar_verdict

        rng = np.random.default_rng(77)
        checked = 0
        for _ in range(30):
            p = random_scalar_problem(rng)
            fd = top_eigenvalue_fd(p.to_layout(), FAST)
            if abs(fd.top_eigenvalue) <= 10 * fd.error_estimate:
                continue
            v = scalar_verdict(p)
            if v.status is VerdictStatus.MARGINAL:
                continue
            expected = (
                VerdictStatus.ERADICATION if fd.top_eigenvalue < 0 else VerdictStatus.SURVIVAL
            )
            assert v.status is expected
            checked += 1
        assert checked >= 20
