"""Eradication criteria for stage-structured populations.

Three routes of increasing specificity:

* uniform control (``M - mu*I`` in the control zone, shared scalar diffusion):
  exact reduction to the scalar criteria with the lead eigenvalue of ``M``
  playing the role of the growth rate;
* symmetrization: a one-sided sufficient condition comparing quadratic forms
  of the symmetrized per-zone matrices (conservative for strongly
  nonsymmetric stage couplings);
* the two-stage transfer-matrix criterion: a sharper one-sided condition for
  ``n = 2`` requiring a sign pattern of the change of basis between the
  per-zone eigenvector bases, certifiable without sampling when the control
  zone is calibrated by a proportional birth-rate reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    ComplexOrRepeatedEigenvaluesError,
    SingularBasisError,
    bracketed_root,
    eigen_basis_2x2,
    max_real_eigenvalue,
    real_eigenvalues,
    symmetric_eigen,
)
from .model import (
    MARGINAL_TOL,
    BirthDeathParams,
    BoundaryCondition,
    LayoutError,
    PatchLayout,
    StageZone,
    Verdict,
)
from .scalar import ScalarProblem, scalar_verdict


class AssumptionViolatedError(ValueError):
    pass


class NonpositiveLeadEigenvalueError(ValueError):
    pass


def build_stage_matrix(params: BirthDeathParams) -> np.ndarray:
    """Cyclic stage matrix: deaths on the diagonal, maturation on the
    subdiagonal, fecundity closing the cycle in the top-right corner.

    The one-stage cycle degenerates to the net rate ``b1 - m1`` so that the
    scalar reduction is exact.
    """
    n = params.dimension
    if n == 1:
        return np.array([[params.births[0] - params.deaths[0]]])
    M = np.zeros((n, n))
    np.fill_diagonal(M, -params.deaths)
    for j in range(n - 1):
        M[j + 1, j] = params.births[j]
    M[0, n - 1] = params.births[n - 1]
    return M


@dataclass(frozen=True)
class StagedProblem:
    """Inputs of the staged criteria: per-zone diffusion diagonals and reaction matrices."""

    A_ben: np.ndarray
    M_ben: np.ndarray
    A_nb: np.ndarray
    M_nb: np.ndarray
    R: float
    r: float
    bc: BoundaryCondition = BoundaryCondition.PERIODIC
    K: int = 1

    def __post_init__(self):
        for name in ("A_ben", "A_nb"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        for name in ("M_ben", "M_nb"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        n = len(self.A_ben)
        if len(self.A_nb) != n or self.M_ben.shape != (n, n) or self.M_nb.shape != (n, n):
            raise LayoutError("DimensionMismatch", "zone matrices must share one stage count")
        if np.any(self.A_ben <= 0) or np.any(self.A_nb <= 0):
            raise LayoutError("NonpositiveDiffusion", "diffusion diagonals must be > 0")
        if self.R <= 0:
            raise LayoutError("NonpositiveWidth", "R must be > 0")
        if self.r < 0:
            raise LayoutError("NegativeWidth", "r must be >= 0")

    @property
    def dimension(self) -> int:
        return len(self.A_ben)

    @property
    def a_ratio(self) -> float | None:
        """Scalar ``a`` with ``A_nb = a * A_ben``, or None if no such scalar exists."""
        ratios = self.A_nb / self.A_ben
        if ratios.max() - ratios.min() <= 1e-12 * ratios.mean():
            return float(ratios.mean())
        return None

    @classmethod
    def from_layout(cls, layout: PatchLayout) -> "StagedProblem":
        if layout.is_scalar or not isinstance(layout.beneficial, StageZone):
            raise LayoutError("UnknownZoneType", "staged criteria need a staged layout")
        return cls(
            A_ben=layout.beneficial.diffusion_diag,
            M_ben=layout.beneficial.reaction,
            A_nb=layout.control.diffusion_diag,
            M_nb=layout.control.reaction,
            R=layout.R,
            r=layout.r,
            bc=layout.bc,
            K=layout.K,
        )

    def to_layout(self) -> PatchLayout:
        return PatchLayout(
            beneficial=StageZone(self.A_ben, self.M_ben),
            control=StageZone(self.A_nb, self.M_nb),
            R=self.R,
            r=self.r,
            K=self.K,
            bc=self.bc,
        )


@dataclass(frozen=True)
class SufficiencyResult:
    """Outcome of a one-sided criterion: Eradication, or Inconclusive with the failed clause."""

    eradicated: bool
    reason: str
    margin: float | None = None

    @property
    def status(self) -> str:
        return "Eradication" if self.eradicated else "Inconclusive"


@dataclass(frozen=True)
class TransferMatrix:
    """Change of basis between the per-zone eigenvector bases.

    ``c = V^-1 W`` where the columns of ``V`` and ``W`` are the pinned
    eigenvectors of the beneficial- and control-zone matrices; column ``j``
    of ``c`` holds the coordinates of ``w_j`` in the ``v`` basis
    (``W = V @ c``).  The criterion uses only the transpose-invariant
    products ``c[0,1]*c[1,0]`` and ``c[0,0]*c[1,1]``.
    """

    c: np.ndarray
    E: float = 0.0

    @property
    def off_product(self) -> float:
        return float(self.c[0, 1] * self.c[1, 0])

    @property
    def diag_product(self) -> float:
        return float(self.c[0, 0] * self.c[1, 1])


@dataclass(frozen=True)
class ControlCheck:
    holds: bool
    reason: str

    @property
    def status(self) -> str:
        return "ConditionsHold" if self.holds else f"ConditionsFail({self.reason})"


# ---------------------------------------------------------------------------
# Uniform control (reduction to the scalar case)
# ---------------------------------------------------------------------------


def uniform_control_verdict(
    M: np.ndarray,
    a: float,
    b: float,
    mu: float,
    R: float,
    r: float,
    bc: BoundaryCondition = BoundaryCondition.PERIODIC,
    K: int = 1,
    marginal_tol: float = MARGINAL_TOL,
) -> Verdict:
    """Exact verdict when the control zone shifts the whole stage matrix by ``-mu``.

    Diagonalizing ``M`` decouples the stages; only the lead eigenvalue can
    produce a nonnegative mode, so the verdict equals the scalar one with
    growth ``Lambda1`` and control mortality ``mu - Lambda1``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lam1 = max_real_eigenvalue(M)
    if lam1 <= 0:
        raise AssumptionViolatedError("lead eigenvalue of M must be positive")
    if mu <= lam1:
        raise AssumptionViolatedError("mu must exceed Lambda1")
    vals = real_eigenvalues(M)
    others = np.delete(vals, int(np.argmin(np.abs(vals - lam1))))
    if others.size and others.real.max() >= 0:
        raise AssumptionViolatedError("a non-lead eigenvalue has nonnegative real part")
    if bc is BoundaryCondition.NEUMANN:
        raise LayoutError("UnsupportedBoundary", "uniform-control criteria cover Dirichlet and periodic ends")
    p = ScalarProblem(a=a, lam=lam1, b=b, mu=mu - lam1, R=R, r=r, bc=bc, K=K)
    return scalar_verdict(p, marginal_tol)


def critical_patch_staged(A: np.ndarray, M: np.ndarray) -> float:
    """Critical patch size ``pi / sqrt(Lambda1(A^-1 M))`` of the staged system
    under absorbing ends and no control zone."""
    A = np.atleast_1d(np.asarray(A, dtype=float))
    if A.ndim == 2:
        A = np.diag(A)
    if np.any(A <= 0):
        raise LayoutError("NonpositiveDiffusion", "diffusion diagonal must be > 0")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lam1 = max_real_eigenvalue(M / A[:, None])
    if lam1 <= 0:
        raise NonpositiveLeadEigenvalueError(
            f"lead eigenvalue {lam1:.6g} <= 0: the population decays on any patch"
        )
    return math.pi / math.sqrt(lam1)


# ---------------------------------------------------------------------------
# Symmetrization bound
# ---------------------------------------------------------------------------


def symmetrized_zone_matrix(M: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Symmetric part ``(M A^-1 + A^-1 M^T) / 2`` entering the quadratic-form bound."""
    A = np.atleast_1d(np.asarray(A, dtype=float))
    M = np.atleast_2d(np.asarray(M, dtype=float))
    Ainv = 1.0 / A
    return (M * Ainv[None, :] + Ainv[:, None] * M.T) / 2.0


def symmetrized_sufficient_verdict(prob: StagedProblem, k: int | None = None) -> SufficiencyResult:
    """One-sided eradication test via symmetrization of both zone matrices.

    Eradication requires the patch to stay below the symmetrized critical
    size and the control-zone sinh/cosh term to dominate ``2 R n k lam1 /
    (1 + cos(R sqrt(lam1)))``.  Anything else is Inconclusive, never Survival.
    """
    n = prob.dimension
    lams, _ = symmetric_eigen(symmetrized_zone_matrix(prob.M_ben, prob.A_ben))
    mus, _ = symmetric_eigen(symmetrized_zone_matrix(prob.M_nb, prob.A_nb))
    k_pos = int(np.sum(lams > 0))
    if k is not None and k != k_pos:
        return SufficiencyResult(False, f"stated k={k} but {k_pos} positive eigenvalue(s) found")
    if mus[0] >= 0:
        return SufficiencyResult(False, "control zone not dissipative")
    if k_pos == 0:
        return SufficiencyResult(True, "beneficial symmetrization nonpositive", margin=-float(lams[0]))
    lam1 = float(lams[0])
    mu1 = float(mus[0])
    r_c_sym = math.pi / math.sqrt(lam1)
    if prob.R > r_c_sym:
        return SufficiencyResult(False, f"patch wider than symmetrized critical size {r_c_sym:.6g}")
    root_mu = math.sqrt(abs(mu1))
    lhs = root_mu * math.sinh(prob.r * root_mu) / (1.0 + math.cosh(prob.r * root_mu))
    denom = 1.0 + math.cos(prob.R * math.sqrt(lam1))
    if denom <= 0:
        return SufficiencyResult(False, "patch at the symmetrized critical size")
    rhs = 2.0 * prob.R * n * k_pos * lam1 / denom
    if lhs > rhs:
        return SufficiencyResult(True, "symmetrized interface inequality holds", margin=lhs - rhs)
    return SufficiencyResult(False, "symmetrized interface inequality fails", margin=lhs - rhs)


def symmetrized_critical_patch(prob: StagedProblem) -> float:
    """Critical size ``pi / sqrt(lam1)`` of the symmetrized beneficial zone."""
    lams, _ = symmetric_eigen(symmetrized_zone_matrix(prob.M_ben, prob.A_ben))
    if lams[0] <= 0:
        raise NonpositiveLeadEigenvalueError("symmetrized beneficial matrix has no positive eigenvalue")
    return math.pi / math.sqrt(float(lams[0]))


# ---------------------------------------------------------------------------
# Two-stage transfer-matrix criterion
# ---------------------------------------------------------------------------


def transfer_matrix(N_ben: np.ndarray, N_nb: np.ndarray, E: float = 0.0) -> TransferMatrix:
    """Basis-change matrix between the pinned eigenbases of two 2x2 matrices."""
    p1, p2 = eigen_basis_2x2(N_ben)
    q1, q2 = eigen_basis_2x2(N_nb)
    V = np.column_stack([p1.vector, p2.vector])
    W = np.column_stack([q1.vector, q2.vector])
    det = V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0]
    if abs(det) <= 1e-12 * (1.0 + float(np.abs(V).max()) ** 2):
        raise SingularBasisError(f"beneficial eigenbasis nearly singular (det={det:.3g})")
    return TransferMatrix(c=np.linalg.solve(V, W), E=E)


def _eig2_real_sorted(N: np.ndarray) -> tuple[float, float]:
    """Both eigenvalues of a 2x2 matrix, descending; they must be real and distinct."""
    tr = N[0, 0] + N[1, 1]
    det = N[0, 0] * N[1, 1] - N[0, 1] * N[1, 0]
    disc = tr * tr - 4.0 * det
    if disc <= 0:
        raise ComplexOrRepeatedEigenvaluesError(
            f"discriminant {disc:.3g} <= 0: eigenvalues complex or repeated"
        )
    sq = math.sqrt(disc)
    return 0.5 * (tr + sq), 0.5 * (tr - sq)


def _ben_matrix(prob: StagedProblem, E: float) -> np.ndarray:
    Ainv = 1.0 / prob.A_ben
    return prob.M_ben * Ainv[:, None] - E * np.diag(Ainv)


def _nb_matrix(prob: StagedProblem, E: float, a: float) -> np.ndarray:
    Ainv = 1.0 / prob.A_ben
    return (prob.M_nb * Ainv[:, None] - E * np.diag(Ainv)) / a


def two_stage_inequality_sides(prob: StagedProblem) -> tuple[float, float]:
    """(lhs, rhs) of the two-stage interface inequality, evaluated at E = 0."""
    a = prob.a_ratio
    if a is None:
        raise AssumptionViolatedError("control diffusion must be a scalar multiple of the beneficial one")
    lam1 = max_real_eigenvalue(_ben_matrix(prob, 0.0))
    if lam1 <= 0:
        raise AssumptionViolatedError("lead eigenvalue nonpositive")
    mu1 = max_real_eigenvalue(_nb_matrix(prob, 0.0, a))
    root_lam = math.sqrt(lam1)
    root_mu = math.sqrt(abs(mu1))
    lhs = a * root_mu * math.tanh(root_mu * prob.r / 2.0)
    rhs = root_lam * math.tan(root_lam * prob.R / 2.0)
    return lhs, rhs


def two_stage_verdict(
    prob: StagedProblem,
    certified: bool = False,
    samples: int = 257,
) -> SufficiencyResult:
    """One-sided two-stage criterion with sampled (or certified) sign conditions.

    Verifies the eigenvalue orderings and the basis-change sign pattern at
    ``samples`` points of ``[0, E0]`` (``E0`` the zero of the lead eigenvalue),
    then tests the interface inequality at ``E = 0``.  ``certified=True``
    skips the sign-pattern sampling, as justified by a passing
    :func:`proportional_control_check`.
    """
    if prob.dimension != 2:
        raise AssumptionViolatedError("two-stage criterion needs exactly 2 stages")
    a = prob.a_ratio
    if a is None:
        raise AssumptionViolatedError("control diffusion must be a scalar multiple of the beneficial one")

    try:
        lam1, lam2 = _eig2_real_sorted(_ben_matrix(prob, 0.0))
    except ComplexOrRepeatedEigenvaluesError as exc:
        raise AssumptionViolatedError(f"beneficial eigenvalues at E=0: {exc}") from exc
    if not (lam1 > 0 > lam2):
        raise AssumptionViolatedError(
            f"need Lambda1(0) > 0 > Lambda2(0), got {lam1:.6g}, {lam2:.6g}"
        )
    mu1_0 = max_real_eigenvalue(_nb_matrix(prob, 0.0, a))
    if mu1_0 >= 0:
        return SufficiencyResult(False, "control zone not dissipative (mu1(0) >= 0)")

    root_lam = math.sqrt(lam1)
    if root_lam * prob.R / 2.0 >= math.pi / 2.0:
        return SufficiencyResult(
            False, f"patch at or beyond staged critical size {math.pi / root_lam:.6g}"
        )

    # E0 solves Lambda1(E0) = 0; the lead eigenvalue decreases in E.
    def lead(E: float) -> float:
        return max_real_eigenvalue(_ben_matrix(prob, E))

    upper = max(lam1 * float(prob.A_ben.max()), 1e-6)
    while lead(upper) > 0:
        upper *= 2
        if upper > 1e15:
            raise AssumptionViolatedError("lead eigenvalue does not cross zero")
    E0 = bracketed_root(lead, 0.0, upper, tol=1e-12, scan_points=256)

    tol = 1e-12
    for E in np.linspace(0.0, E0, samples):
        nb = _ben_matrix(prob, E)
        nn = _nb_matrix(prob, E, a)
        try:
            eb1, eb2 = _eig2_real_sorted(nb)
            en1, en2 = _eig2_real_sorted(nn)
        except ComplexOrRepeatedEigenvaluesError as exc:
            raise AssumptionViolatedError(f"eigenvalue ordering fails at E={E:.6g}: {exc}") from exc
        if not (eb1 >= -1e-9 * max(1.0, lam1) and eb2 < 0):
            raise AssumptionViolatedError(f"beneficial eigenvalue ordering fails at E={E:.6g}")
        if en1 >= 0:
            return SufficiencyResult(False, f"control eigenvalue ordering fails at E={E:.6g}")
        if not certified:
            try:
                tm = transfer_matrix(nb, nn, E=E)
            except (ComplexOrRepeatedEigenvaluesError, SingularBasisError) as exc:
                raise AssumptionViolatedError(f"eigenbasis degenerates at E={E:.6g}: {exc}") from exc
            if tm.off_product > tol or tm.diag_product < -tol:
                return SufficiencyResult(
                    False,
                    f"sign conditions fail at E={E:.6g} "
                    f"(c12*c21={tm.off_product:.3g}, c11*c22={tm.diag_product:.3g})",
                )

    lhs, rhs = two_stage_inequality_sides(prob)
    if lhs > rhs:
        return SufficiencyResult(True, "two-stage interface inequality holds", margin=lhs - rhs)
    return SufficiencyResult(False, "two-stage interface inequality fails", margin=lhs - rhs)


def min_control_decay_rate(
    lead_eigenvalue: float, R: float, r: float, a: float = 1.0
) -> float:
    """Threshold on ``|mu1(0)|`` above which the two-stage inequality holds.

    Solves ``a sqrt(m) tanh(sqrt(m) r/2) = sqrt(L1) tan(sqrt(L1) R/2)`` for
    ``m``; the lhs is strictly increasing, so bisection applies.
    """
    if lead_eigenvalue <= 0:
        raise NonpositiveLeadEigenvalueError("lead eigenvalue must be positive")
    if r <= 0:
        raise AssumptionViolatedError("need a control zone of positive width")
    root_lam = math.sqrt(lead_eigenvalue)
    if root_lam * R / 2.0 >= math.pi / 2.0:
        raise AssumptionViolatedError(
            f"patch at or beyond staged critical size {math.pi / root_lam:.6g}"
        )
    rhs = root_lam * math.tan(root_lam * R / 2.0)

    def excess(m: float) -> float:
        rm = math.sqrt(m)
        return a * rm * math.tanh(rm * r / 2.0) - rhs

    hi = 1.0
    while excess(hi) <= 0:
        hi *= 2
        if hi > 1e15:
            raise AssumptionViolatedError("no finite control rate satisfies the inequality")
    from scipy.optimize import brentq

    return float(brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-12))


def proportional_control_check(
    a1: float,
    a2: float,
    m1: float,
    m2: float,
    b1: float,
    b2: float,
    omega: float,
    mtilde1: float,
    mtilde2: float,
) -> ControlCheck:
    """Hypotheses under which a proportional birth-rate reduction certifies
    the two-stage sign conditions without sampling.

    The control zone must calibrate births as ``omega * b_j`` with
    ``omega in (0, 1)`` and raise deaths keeping their gap
    (``mtilde1 - mtilde2 >= m1 - m2``); the background needs a supercritical
    cycle (``m1 m2 < b1 b2``) and the slow-stage orderings ``1/a1 >= 1/a2``,
    ``m1/a1 >= m2/a2``.
    """
    for name, v in (("a1", a1), ("a2", a2), ("m1", m1), ("m2", m2), ("b1", b1), ("b2", b2)):
        if v <= 0:
            return ControlCheck(False, f"{name} must be positive")
    if not (0.0 < omega < 1.0):
        return ControlCheck(False, "omega out of range (0, 1)")
    if m1 * m2 - b1 * b2 >= 0:
        return ControlCheck(False, "lead eigenvalue nonpositive")
    if 1.0 / a1 < 1.0 / a2:
        return ControlCheck(False, "diffusion ordering")
    if m1 / a1 < m2 / a2:
        return ControlCheck(False, "death-rate ordering")
    if mtilde1 < m1 or mtilde2 < m2:
        return ControlCheck(False, "control deaths below background deaths")
    if mtilde1 - mtilde2 < m1 - m2:
        return ControlCheck(False, "death-gap ordering")
    return ControlCheck(True, "ConditionsHold")
