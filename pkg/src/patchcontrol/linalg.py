"""Small dense eigenvalue helpers and bracketed scalar root finding.

Everything here works on matrices up to 8x8; the heavy grid eigensolves
live in :mod:`patchcontrol.oracle`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

REAL_EIG_TOL = 1e-10
SYMMETRY_TOL = 1e-12
DEFAULT_SCAN = 4096


class NoRealEigenvalueError(ValueError):
    pass


class NotSymmetricError(ValueError):
    pass


class ComplexOrRepeatedEigenvaluesError(ValueError):
    pass


class SingularBasisError(ValueError):
    pass


class NoRootError(ValueError):
    pass


class InvalidBracketError(ValueError):
    pass


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with its eigenvector.

    The normalization convention is set by the producing routine:
    :func:`symmetric_eigen` returns unit vectors with the first nonzero
    component positive, :func:`eigen_basis_2x2` pins one component to 1.
    """

    value: float
    vector: np.ndarray


def _as_square(N: np.ndarray, max_dim: int = 8) -> np.ndarray:
    N = np.atleast_2d(np.asarray(N, dtype=float))
    if N.ndim != 2 or N.shape[0] != N.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {N.shape}")
    if N.shape[0] > max_dim:
        raise ValueError(f"matrix dimension {N.shape[0]} exceeds {max_dim}")
    return N


def max_real_eigenvalue(N: np.ndarray) -> float:
    """Largest real eigenvalue of a small square matrix.

    For matrices with nonnegative off-diagonal entries this is the rightmost
    eigenvalue (Perron-type).  Raises ``NoRealEigenvalueError`` when no
    eigenvalue is real within tolerance.
    """
    N = _as_square(N)
    vals = np.linalg.eigvals(N)
    scale = 1.0 + max(np.abs(vals).max(initial=0.0), 1.0)
    real = vals[np.abs(vals.imag) <= REAL_EIG_TOL * scale]
    if real.size == 0:
        raise NoRealEigenvalueError("matrix has no real eigenvalue within tolerance")
    return float(real.real.max())


def real_eigenvalues(N: np.ndarray) -> np.ndarray:
    """All eigenvalues (complex array) of a small square matrix."""
    return np.linalg.eigvals(_as_square(N))


def symmetric_eigen(S: np.ndarray) -> tuple[np.ndarray, list[EigenPair]]:
    """Descending eigenvalues and orthonormal eigenpairs of a symmetric matrix.

    Each returned vector has unit norm and its first nonzero component
    positive.  Raises ``NotSymmetricError`` above 1e-12 relative asymmetry.
    """
    S = _as_square(S)
    scale = 1.0 + np.abs(S).max(initial=0.0)
    if np.abs(S - S.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    vals, vecs = np.linalg.eigh(S)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    pairs = []
    for j in range(len(vals)):
        v = vecs[:, j].copy()
        nz = np.flatnonzero(np.abs(v) > 1e-14)
        if nz.size and v[nz[0]] < 0:
            v = -v
        pairs.append(EigenPair(value=float(vals[j]), vector=v))
    return vals, pairs


def eigen_basis_2x2(N: np.ndarray) -> tuple[EigenPair, EigenPair]:
    """Eigenbasis of a 2x2 matrix with real distinct eigenvalues.

    Returns ``(p1, p2)`` with ``p1`` for the larger eigenvalue.  The vectors
    are pinned to the convention ``v1[0] = 1`` and ``v2[1] = 1``, which for
    stage matrices ``[[-m1, b1], [b2, -m2]]`` gives the closed forms
    ``v1[1] = (L1 + m1)/b1`` and ``v2[0] = b1/(L2 + m1)``.
    """
    N = _as_square(N, max_dim=2)
    if N.shape != (2, 2):
        raise ValueError("eigen_basis_2x2 needs a 2x2 matrix")
    tr = N[0, 0] + N[1, 1]
    det = N[0, 0] * N[1, 1] - N[0, 1] * N[1, 0]
    disc = tr * tr - 4.0 * det
    if disc <= 0:
        raise ComplexOrRepeatedEigenvaluesError(
            f"discriminant {disc:.3g} <= 0: eigenvalues complex or repeated"
        )
    sq = np.sqrt(disc)
    lam1 = 0.5 * (tr + sq)
    lam2 = 0.5 * (tr - sq)

    def _vector(lam: float, pin: int) -> np.ndarray:
        # Kernel of (N - lam I): pick the better-conditioned row form.
        cand1 = np.array([N[0, 1], lam - N[0, 0]])
        cand2 = np.array([lam - N[1, 1], N[1, 0]])
        v = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
        if abs(v[pin]) <= 1e-14 * (1.0 + np.abs(N).max()):
            raise ComplexOrRepeatedEigenvaluesError(
                f"eigenvector component {pin} vanishes; normalization infeasible"
            )
        return v / v[pin]

    return (
        EigenPair(value=float(lam1), vector=_vector(lam1, pin=0)),
        EigenPair(value=float(lam2), vector=_vector(lam2, pin=1)),
    )


def residual(N: np.ndarray, pair: EigenPair) -> float:
    """Euclidean eigen-residual |N v - lambda v|."""
    N = np.asarray(N, dtype=float)
    return float(np.linalg.norm(N @ pair.vector - pair.value * pair.vector))


def bracketed_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    scan_points: int = DEFAULT_SCAN,
) -> float:
    """First root of ``f`` in ``[lo, hi]``, found by sign-change scanning.

    ``f`` must be continuous on the bracket; the scan resolution is the
    caller's responsibility when ``f`` is not monotone.  Raises ``NoRootError``
    if no sign change is found at the scan resolution and ``InvalidBracketError``
    for a degenerate bracket.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise InvalidBracketError(f"invalid bracket [{lo}, {hi}]")
    xs = np.linspace(lo, hi, max(int(scan_points), 2))
    vals = np.array([f(x) for x in xs], dtype=float)
    finite = np.isfinite(vals)
    for i in range(len(xs) - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if vals[i] == 0.0:
            return float(xs[i])
        if vals[i] * vals[i + 1] < 0.0:
            return float(brentq(f, xs[i], xs[i + 1], xtol=tol, rtol=8 * np.finfo(float).eps))
    if finite[-1] and vals[-1] == 0.0:
        return float(xs[-1])
    raise NoRootError(f"no sign change of f on [{lo}, {hi}] at scan resolution {scan_points}")


def scan_brackets(
    f_values: Sequence[float], xs: Sequence[float]
) -> list[tuple[float, float]]:
    """Sign-change intervals of pre-evaluated samples (helper for sweeps)."""
    out = []
    for i in range(len(xs) - 1):
        a, b = f_values[i], f_values[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0:
            out.append((float(xs[i]), float(xs[i + 1])))
    return out
