import math

import mpmath
import numpy as np
import pytest

from patchcontrol import (
    AssumptionViolatedError,
    BoundaryCondition,
    GridSpec,
    ScalarProblem,
    StagedProblem,
    build_stage_matrix,
    critical_patch_staged,
    get_preset,
    max_real_eigenvalue,
    min_control_decay_rate,
    proportional_control_check,
    scalar_verdict,
    symmetrized_critical_patch,
    symmetrized_sufficient_verdict,
    transfer_matrix,
    two_stage_verdict,
    uniform_control_verdict,
)
from patchcontrol.linalg import SingularBasisError
from patchcontrol.model import BirthDeathParams, LayoutError
from patchcontrol.oracle import top_eigenvalue_fd
from patchcontrol.staged import two_stage_inequality_sides

from conftest import loguniform

mpmath.mp.dps = 40

FAST = GridSpec(cells_per_unit_length=64, refinement_levels=2)

TAIGA_N = np.array([[-0.91, 2.24], [0.01, -0.02]])


class TestBuildStageMatrix:
    def test_two_stage_pattern(self):
        M = build_stage_matrix(BirthDeathParams(deaths=[1.0, 1.0], births=[0.52, 2.46]))
        np.testing.assert_allclose(M, [[-1.0, 2.46], [0.52, -1.0]])

    def test_three_stage_pattern(self):
        M = build_stage_matrix(BirthDeathParams(deaths=[1, 2, 3], births=[4, 5, 6]))
        np.testing.assert_allclose(
            M, [[-1, 0, 6], [4, -2, 0], [0, 5, -3]]
        )

    def test_one_stage_collapses_to_net_rate(self):
        M = build_stage_matrix(BirthDeathParams(deaths=[2.0], births=[5.0]))
        np.testing.assert_allclose(M, [[3.0]])


class TestUniformControl:
    def test_reduces_exactly_to_scalar_verdict(self):
        rng = np.random.default_rng(5)
        done = 0
        while done < 100:
            n = int(rng.integers(1, 4))
            params = BirthDeathParams(
                deaths=[loguniform(rng, 0.1, 2.0) for _ in range(n)],
                births=[loguniform(rng, 0.2, 3.0) for _ in range(n)],
            )
            M = build_stage_matrix(params)
            try:
                lam1 = max_real_eigenvalue(M)
            except ValueError:
                continue
            vals = np.linalg.eigvals(M)
            others = np.delete(vals, int(np.argmin(np.abs(vals - lam1))))
            if lam1 <= 0 or (others.size and others.real.max() >= 0):
                continue
            a = loguniform(rng, 0.5, 20)
            b = loguniform(rng, 0.5, 20)
            mu = lam1 + loguniform(rng, 0.1, 20)
            R = loguniform(rng, 0.5, 10)
            r = loguniform(rng, 0.1, 2)
            bc = (BoundaryCondition.DIRICHLET, BoundaryCondition.PERIODIC)[int(rng.integers(2))]
            staged = uniform_control_verdict(M, a, b, mu, R, r, bc)
            scalar = scalar_verdict(
                ScalarProblem(a=a, lam=lam1, b=b, mu=mu - lam1, R=R, r=r, bc=bc)
            )
            assert staged.status is scalar.status
            assert staged.margin == pytest.approx(scalar.margin, abs=1e-9)
            done += 1

    def test_mu_below_lead_eigenvalue_rejected(self):
        M = np.array([[-1.0, 2.46], [0.52, -1.0]])
        lam1 = max_real_eigenvalue(M)
        with pytest.raises(AssumptionViolatedError, match="mu must exceed"):
            uniform_control_verdict(M, 1.0, 1.0, lam1 / 2, 5.0, 1.0)

    def test_supercritical_patch_survives_any_control(self):
        M = np.array([[-1.0, 2.46], [0.52, -1.0]])
        lam1 = max_real_eigenvalue(M)
        R = 1.1 * math.pi / math.sqrt(lam1)  # clause-(i) territory at a = 1
        v = uniform_control_verdict(M, 1.0, 1.0, 1e6, R, 1.0, BoundaryCondition.DIRICHLET)
        assert v.status.value == "Survival"

    def test_nonnegative_subdominant_real_part_rejected(self):
        M = np.array([[1.0, 0.0, 0.0], [0.0, 0.2, -1.0], [0.0, 1.0, 0.2]])
        with pytest.raises(AssumptionViolatedError, match="non-lead eigenvalue"):
            uniform_control_verdict(M, 1.0, 1.0, 5.0, 1.0, 1.0)

    def test_neumann_not_covered(self):
        M = np.array([[-1.0, 2.46], [0.52, -1.0]])
        with pytest.raises(LayoutError):
            uniform_control_verdict(M, 1.0, 1.0, 5.0, 1.0, 1.0, BoundaryCondition.NEUMANN)


class TestCriticalPatchStaged:
    def test_two_stage_taiga_normalized(self):
        rc = critical_patch_staged(np.ones(2), TAIGA_N)
        assert rc == pytest.approx(46.9, abs=0.2)
        lead = max(np.roots(np.poly(TAIGA_N)).real)
        assert rc == pytest.approx(math.pi / math.sqrt(lead), rel=1e-12)

    def test_two_stage_raw_field_matrices(self):
        # Unrounded per-stage rates: the normalized lead eigenvalue shifts,
        # and with it the critical size.
        A = np.array([1.1, 50.0])
        M = np.array([[-1.0, 2.46], [0.52, -1.0]])
        lead = max(np.roots(np.poly(M / A[:, None])).real)
        assert critical_patch_staged(A, M) == pytest.approx(math.pi / math.sqrt(lead), rel=1e-12)
        assert critical_patch_staged(A, M) == pytest.approx(42.625, abs=0.01)

    def test_one_stage_reduction(self):
        from patchcontrol import critical_patch_dirichlet

        assert critical_patch_staged(np.array([3.0]), np.array([[0.7]])) == pytest.approx(
            critical_patch_dirichlet(3.0, 0.7), rel=1e-14
        )

    def test_decoupled_diagonal(self):
        rc = critical_patch_staged(np.ones(2), np.diag([math.pi**2, -1.0]))
        assert rc == pytest.approx(1.0, rel=1e-12)

    def test_nonpositive_lead_raises(self):
        from patchcontrol.staged import NonpositiveLeadEigenvalueError

        with pytest.raises(NonpositiveLeadEigenvalueError):
            critical_patch_staged(np.ones(2), np.diag([-1.0, -2.0]))

    def test_oracle_brackets_critical_size(self):
        # Absorbing ends, no control zone: the top eigenvalue changes sign
        # across the staged critical size.
        from patchcontrol.model import PatchLayout, StageZone

        rc = critical_patch_staged(np.ones(2), TAIGA_N)
        for factor, sign in ((0.99, -1), (1.01, +1)):
            layout = PatchLayout(
                beneficial=StageZone([1.0, 1.0], TAIGA_N),
                control=StageZone([1.0, 1.0], -np.eye(2)),
                R=factor * rc,
                r=0.0,
                bc=BoundaryCondition.DIRICHLET,
            )
            fd = top_eigenvalue_fd(layout, FAST)
            assert np.sign(fd.top_eigenvalue) == sign
            assert abs(fd.top_eigenvalue) > 10 * fd.error_estimate


def taiga_problem(R=40.0, r=1.0, control=None):
    layout = get_preset("taiga-two-stage")
    prob = StagedProblem.from_layout(layout)
    if control is not None:
        prob = StagedProblem(
            A_ben=prob.A_ben, M_ben=prob.M_ben, A_nb=prob.A_nb, M_nb=control,
            R=R, r=r, bc=prob.bc, K=prob.K,
        )
    elif (R, r) != (prob.R, prob.r):
        prob = StagedProblem(
            A_ben=prob.A_ben, M_ben=prob.M_ben, A_nb=prob.A_nb, M_nb=prob.M_nb,
            R=R, r=r, bc=prob.bc, K=prob.K,
        )
    return prob


class TestSymmetrizedVerdict:
    def test_taiga_symmetrized_critical_size(self):
        prob = taiga_problem()
        rc_sym = symmetrized_critical_patch(prob)
        assert rc_sym == pytest.approx(3.64, abs=0.02)
        res = symmetrized_sufficient_verdict(prob)
        assert not res.eradicated
        assert "wider than symmetrized critical size" in res.reason

    def test_non_dissipative_control_inconclusive(self):
        prob = taiga_problem(control=np.array([[0.3, 0.1], [0.1, -1.0]]))
        res = symmetrized_sufficient_verdict(prob)
        assert not res.eradicated
        assert res.reason == "control zone not dissipative"

    def test_one_stage_soundness_against_oracle(self):
        rng = np.random.default_rng(31)
        eradicated = 0
        for _ in range(120):
            lam = loguniform(rng, 0.1, 2.0)
            a = loguniform(rng, 0.5, 5.0)
            mu = loguniform(rng, 0.5, 40.0)
            bnb = loguniform(rng, 0.5, 5.0)
            rc_sym = math.pi / math.sqrt(lam / a)
            R = rng.uniform(0.3, 0.98) * rc_sym
            r = loguniform(rng, 0.2, 3.0)
            prob = StagedProblem(
                A_ben=[a], M_ben=[[lam]], A_nb=[bnb], M_nb=[[-mu]], R=R, r=r,
            )
            res = symmetrized_sufficient_verdict(prob)
            if not res.eradicated:
                continue
            eradicated += 1
            fd = top_eigenvalue_fd(prob.to_layout(), FAST)
            assert fd.top_eigenvalue < 10 * fd.error_estimate
        assert eradicated >= 10

    def test_stated_k_mismatch(self):
        prob = taiga_problem(R=3.0)
        res = symmetrized_sufficient_verdict(prob, k=2)
        assert not res.eradicated
        assert "k=2" in res.reason


class TestTwoStageVerdict:
    def test_taiga_inequality_sides(self):
        prob = taiga_problem()
        lhs, rhs = two_stage_inequality_sides(prob)
        lead = mpmath.mpf(max(np.roots(np.poly(TAIGA_N)).real))
        rhs_expected = mpmath.sqrt(lead) * mpmath.tan(mpmath.sqrt(lead) * 20)
        assert rhs == pytest.approx(float(rhs_expected), rel=1e-10)
        assert rhs == pytest.approx(0.29, abs=0.01)

    def test_control_rate_threshold(self):
        lead = max_real_eigenvalue(TAIGA_N)
        threshold = min_control_decay_rate(lead, R=40.0, r=1.0, a=1.0)
        assert 0.60 <= threshold <= 0.66

    def test_preset_control_eradicates_and_oracle_agrees(self):
        prob = taiga_problem()
        res = two_stage_verdict(prob)
        assert res.eradicated
        fd = top_eigenvalue_fd(prob.to_layout(), FAST)
        assert fd.top_eigenvalue < 10 * fd.error_estimate

    def test_uncontrolled_zone_inconclusive(self):
        prob = taiga_problem(control=TAIGA_N.copy())
        res = two_stage_verdict(prob)
        assert not res.eradicated
        assert "not dissipative" in res.reason

    def test_weak_control_fails_inequality(self):
        weak = np.array([[-1.0, 0.9 * 2.24], [0.9 * 0.01, -0.1]])
        prob = taiga_problem(control=weak)
        res = two_stage_verdict(prob)
        assert not res.eradicated

    def test_oversized_patch_inconclusive(self):
        prob = taiga_problem(R=50.0)
        res = two_stage_verdict(prob)
        assert not res.eradicated
        assert "critical size" in res.reason


class TestProportionalControl:
    def test_taiga_field_values_hold(self):
        check = proportional_control_check(
            a1=1.1, a2=50.0, m1=1.0, m2=1.0, b1=0.52, b2=2.46,
            omega=0.5, mtilde1=1.0, mtilde2=1.0,
        )
        assert check.holds
        assert check.status == "ConditionsHold"

    def test_subcritical_cycle_fails(self):
        check = proportional_control_check(
            a1=1.0, a2=1.0, m1=2.0, m2=2.0, b1=1.0, b2=1.0,
            omega=0.5, mtilde1=2.0, mtilde2=2.0,
        )
        assert not check.holds
        assert check.reason == "lead eigenvalue nonpositive"

    def test_diffusion_ordering_fails(self):
        check = proportional_control_check(
            a1=10.0, a2=1.0, m1=1.0, m2=1.0, b1=1.0, b2=2.0,
            omega=0.5, mtilde1=1.0, mtilde2=1.0,
        )
        assert not check.holds
        assert check.reason == "diffusion ordering"

    def test_certification_implies_sampled_sign_conditions(self):
        rng = np.random.default_rng(17)
        done = 0
        while done < 60:
            a1 = loguniform(rng, 0.3, 3.0)
            a2 = a1 * loguniform(rng, 1.0, 40.0)
            m2 = loguniform(rng, 0.05, 1.0)
            m1 = max(m2 * loguniform(rng, 1.0, 4.0), m2 * a1 / a2 + 1e-6)
            b1 = loguniform(rng, 0.2, 3.0)
            b2 = loguniform(rng, 0.2, 3.0)
            if m1 * m2 >= b1 * b2:
                continue
            omega = rng.uniform(0.05, 0.95)
            extra2 = loguniform(rng, 0.01, 3.0)
            extra1 = extra2 + loguniform(rng, 0.0001, 2.0)
            mtilde1, mtilde2 = m1 + extra1, m2 + extra2
            check = proportional_control_check(
                a1, a2, m1, m2, b1, b2, omega, mtilde1, mtilde2
            )
            if not check.holds:
                continue
            M_ben = np.array([[-m1, b1], [b2, -m2]])
            M_nb = np.array([[-mtilde1, omega * b1], [omega * b2, -mtilde2]])
            lead = max_real_eigenvalue(M_ben / np.array([a1, a2])[:, None])
            if lead <= 0:
                continue
            R = rng.uniform(0.3, 0.9) * math.pi / math.sqrt(lead)
            prob = StagedProblem(
                A_ben=[a1, a2], M_ben=M_ben,
                A_nb=[a1, a2], M_nb=M_nb,
                R=R, r=loguniform(rng, 0.2, 3.0),
            )
            res = two_stage_verdict(prob, certified=False)
            assert "sign conditions fail" not in res.reason
            done += 1


class TestTransferMatrix:
    def test_identity_for_identical_bases(self):
        tm = transfer_matrix(TAIGA_N, TAIGA_N)
        np.testing.assert_allclose(tm.c, np.eye(2), atol=1e-13)

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(19)
        done = 0
        while done < 50:
            N1 = rng.normal(size=(2, 2))
            N2 = rng.normal(size=(2, 2))
            try:
                tm = transfer_matrix(N1, N2)
            except (ValueError, SingularBasisError):
                continue
            from patchcontrol.linalg import eigen_basis_2x2

            p1, p2 = eigen_basis_2x2(N1)
            q1, q2 = eigen_basis_2x2(N2)
            V = np.column_stack([p1.vector, p2.vector])
            W = np.column_stack([q1.vector, q2.vector])
            assert np.abs(W - V @ tm.c).max() <= 1e-10 * (1 + np.abs(W).max())
            done += 1

    def test_certified_sign_pattern(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            omega = rng.uniform(0.02, 0.98)
            m1 = loguniform(rng, 0.2, 2.0)
            m2 = m1 * rng.uniform(0.2, 1.0)
            b1 = loguniform(rng, 0.3, 3.0)
            b2 = loguniform(rng, 0.3, 3.0)
            extra = loguniform(rng, 0.01, 2.0)
            M_ben = np.array([[-m1, b1], [b2, -m2]])
            M_nb = np.array([[-(m1 + extra), omega * b1], [omega * b2, -(m2 + extra)]])
            tm = transfer_matrix(M_ben, M_nb)
            assert tm.c[0, 0] >= 1.0 - 1e-12
            assert tm.c[1, 1] >= 1.0 - 1e-12
            assert tm.off_product <= 1e-12
