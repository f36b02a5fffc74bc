"""Explicit multistep Runge-Kutta methods and their monotonicity analysis.

A method with s stages and k steps is stored in coefficient form
(D, Ahat, A, theta, bhat, b).  For monotonicity analysis it is rewritten
as the single update w = S x + dt * T f, and the convex-combination
rewrite at parameter r >= 0 gives matrices (P, R) whose componentwise
nonnegativity certifies strong stability preservation for
dt <= r * dt_FE.  The largest such r is the coefficient computed by
``ssp_coefficient``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_triangular

__all__ = [
    "MSRKMethod",
    "SpijkerForm",
    "CanonicalForm",
    "ValidationReport",
    "MethodStructureError",
    "validate",
    "to_spijker",
    "canonical",
    "ssp_coefficient",
    "abscissae",
    "extended_matrices",
    "forward_euler",
    "ssprk33",
]

#: slack allowed on entries of P and R when testing nonnegativity
ENTRY_TOL = 1e-12
#: bisection width for the SSP coefficient
BISECT_TOL = 1e-10


class MethodStructureError(ValueError):
    """Raised when a structurally invalid method is used where validity is required."""


def _as_matrix(a, rows, cols):
    arr = np.asarray(a, dtype=float).reshape(rows, cols)
    return arr


@dataclass(frozen=True)
class MSRKMethod:
    """An explicit s-stage, k-step method in coefficient form.

    Stage i combines the k previous steps through row i of ``D``, their
    derivatives through ``Ahat``, and earlier stage derivatives through
    the strictly lower triangular ``A``.  The new step combines previous
    steps through ``theta`` and derivatives through ``bhat`` and ``b``.
    """

    s: int
    k: int
    D: NDArray
    Ahat: NDArray
    A: NDArray
    theta: NDArray
    bhat: NDArray
    b: NDArray
    name: str = "unnamed"
    claimed_order: int = 1

    def __post_init__(self):
        if self.s < 1 or self.k < 1:
            raise MethodStructureError("s and k must be at least 1")
        object.__setattr__(self, "D", _as_matrix(self.D, self.s, self.k))
        object.__setattr__(self, "Ahat", _as_matrix(self.Ahat, self.s, self.k - 1))
        object.__setattr__(self, "A", _as_matrix(self.A, self.s, self.s))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float).reshape(self.k))
        object.__setattr__(self, "bhat", np.asarray(self.bhat, dtype=float).reshape(self.k - 1))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(self.s))
        for arr in (self.D, self.Ahat, self.A, self.theta, self.bhat, self.b):
            arr.setflags(write=False)


@dataclass(frozen=True)
class SpijkerForm:
    """The (S, T) pair of the representation w = S x + dt * T f."""

    S: NDArray
    T: NDArray
    k: int
    s: int


@dataclass(frozen=True)
class CanonicalForm:
    """Matrices of the convex-combination rewrite at parameter r."""

    r: float
    P: NDArray
    R: NDArray


@dataclass
class ValidationReport:
    """Collected invariant violations; an empty list means the method is valid."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


_CONSISTENCY_TOL = 1e-12


def validate(method: MSRKMethod) -> ValidationReport:
    """Check the structural invariants of an explicit MSRK method.

    Diagnostic only: all violations are collected, nothing is raised.
    """
    v: list[str] = []
    s, k = method.s, method.k

    first_row = np.zeros(k)
    first_row[-1] = 1.0
    if not np.array_equal(method.D[0], first_row):
        v.append(f"row 1 of D must be {first_row.tolist()}, got {method.D[0].tolist()}")
    if np.any(method.A[0] != 0.0):
        v.append("row 1 of A must be identically zero")
    if k > 1 and np.any(method.Ahat[0] != 0.0):
        v.append("row 1 of Ahat must be identically zero")

    if np.any(np.triu(method.A) != 0.0):
        v.append("A must be strictly lower triangular (explicit method)")

    row_sums = method.D.sum(axis=1)
    for i, rs in enumerate(row_sums):
        if abs(rs - 1.0) > _CONSISTENCY_TOL:
            v.append(f"row {i + 1} of D sums to {rs:.17g} != 1")
    theta_sum = method.theta.sum()
    if abs(theta_sum - 1.0) > _CONSISTENCY_TOL:
        v.append(f"theta sums to {theta_sum:.17g} != 1")

    return ValidationReport(v)


def to_spijker(method: MSRKMethod) -> SpijkerForm:
    """Assemble the block matrices S ((k+s) x k) and T ((k+s) x (k+s)).

    Raises :class:`MethodStructureError` naming the first violated
    invariant if the method is invalid.
    """
    report = validate(method)
    if not report.ok:
        raise MethodStructureError(report.violations[0])

    s, k = method.s, method.k
    n = k + s

    S = np.zeros((n, k))
    S[: k - 1, : k - 1] = np.eye(k - 1)
    S[k - 1 : k - 1 + s, :] = method.D
    S[n - 1, :] = method.theta

    T = np.zeros((n, n))
    T[k - 1 : k - 1 + s, : k - 1] = method.Ahat
    T[k - 1 : k - 1 + s, k - 1 : k - 1 + s] = method.A
    T[n - 1, : k - 1] = method.bhat
    T[n - 1, k - 1 : k - 1 + s] = method.b

    return SpijkerForm(S=S, T=T, k=k, s=s)


def canonical(sp: SpijkerForm, r: float) -> CanonicalForm:
    """Compute P = r (I + rT)^{-1} T and R = (I + rT)^{-1} S.

    Since T is strictly lower triangular, I + rT is unit lower
    triangular and both solves are exact forward substitutions.
    """
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    if r == 0.0:
        return CanonicalForm(r=0.0, P=np.zeros_like(sp.T), R=sp.S.copy())
    M = np.eye(sp.T.shape[0]) + r * sp.T
    R = solve_triangular(M, sp.S, lower=True, unit_diagonal=True)
    P = r * solve_triangular(M, sp.T, lower=True, unit_diagonal=True)
    return CanonicalForm(r=r, P=P, R=R)


def _feasible(sp: SpijkerForm, r: float, tol: float) -> bool:
    cf = canonical(sp, r)
    return min(cf.P.min(), cf.R.min()) >= -tol


def ssp_coefficient(
    sp: SpijkerForm,
    tol: float = ENTRY_TOL,
    bisect_tol: float = BISECT_TOL,
    max_iters: int = 200,
) -> float:
    """Largest r with P, R componentwise >= -tol, by bisection on [0, s+1].

    The bracket s+1 is safe: the first-order threshold bound caps the
    coefficient at s.  Returns 0.0 when S itself has a negative entry.
    Reported as a lower bound on the true SSP coefficient; equality
    holds for row-irreducible methods.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if sp.S.min() < -tol:
        return 0.0

    lo, hi = 0.0, float(sp.s + 1)
    if _feasible(sp, hi, tol):
        return hi
    for _ in range(max_iters):
        if hi - lo < bisect_tol:
            break
        mid = 0.5 * (lo + hi)
        if _feasible(sp, mid, tol):
            lo = mid
        else:
            hi = mid
    # guard against a false positive exactly at the boundary
    if lo > 0.0 and not _feasible(sp, lo * (1.0 - 1e-9), tol):
        return 0.0
    return lo


def extended_matrices(method: MSRKMethod):
    """The (k-1+s)-row matrices Dt, At and the vector bt used in order analysis.

    Dt stacks [I_{k-1} | 0] over D; At has Ahat and A in its last s rows;
    bt concatenates bhat and b.
    """
    s, k = method.s, method.k
    n = k - 1 + s
    Dt = np.zeros((n, k))
    Dt[: k - 1, : k - 1] = np.eye(k - 1)
    Dt[k - 1 :, :] = method.D
    At = np.zeros((n, n))
    At[k - 1 :, : k - 1] = method.Ahat
    At[k - 1 :, k - 1 :] = method.A
    bt = np.concatenate([method.bhat, method.b])
    return Dt, At, bt


def abscissae(method: MSRKMethod):
    """Stage abscissae c = At e - Dt l, with l = (k-1, k-2, ..., 1, 0)."""
    report = validate(method)
    if not report.ok:
        raise MethodStructureError(report.violations[0])
    Dt, At, _ = extended_matrices(method)
    l = np.arange(method.k - 1, -1, -1, dtype=float)
    c = At.sum(axis=1) - Dt @ l
    return c, l


def forward_euler() -> MSRKMethod:
    return MSRKMethod(
        s=1, k=1,
        D=[[1.0]], Ahat=np.zeros((1, 0)), A=[[0.0]],
        theta=[1.0], bhat=[], b=[1.0],
        name="FE", claimed_order=1,
    )


def ssprk33() -> MSRKMethod:
    """The classical three-stage, third-order SSP Runge-Kutta method."""
    A = [[0.0, 0.0, 0.0],
         [1.0, 0.0, 0.0],
         [0.25, 0.25, 0.0]]
    b = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]
    return MSRKMethod(
        s=3, k=1,
        D=[[1.0], [1.0], [1.0]], Ahat=np.zeros((3, 0)), A=A,
        theta=[1.0], bhat=[], b=b,
        name="SSPRK(3,3)", claimed_order=3,
    )
