"""Order analysis: quadrature residuals, stage order, and a series oracle.

The quadrature (stage) residuals come directly from the method
coefficients.  The full nonlinear order is established by executing one
method step in truncated Taylor series arithmetic on random polynomial
ODEs and comparing against the exact local flow: the error coefficients
are polynomials in the method coefficients, so vanishing on a couple of
random problems is a polynomial identity test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .methods import MSRKMethod, abscissae, extended_matrices
from .series import PolynomialODE, TaylorSeries, flow_series

__all__ = [
    "ResidualSet",
    "stage_residuals",
    "stage_order",
    "oracle_order",
    "order_residual_vector",
    "convergence_order",
    "default_problems",
    "series_step_error",
]

MAX_ORACLE_ORDER = 12

# back-value series keyed by (id(problem), N, k), with the problem object
# kept alongside so a recycled id cannot alias a stale entry
_BACK_CACHE: dict = {}


@dataclass(frozen=True)
class ResidualSet:
    """Quadrature residuals tau_j, per stage (vectors) and for the final update."""

    stage: dict[int, NDArray]
    final: dict[int, float]


def stage_residuals(method: MSRKMethod, jmax: int) -> ResidualSet:
    """Evaluate the residuals tau_j for j = 1..jmax.

    tau_j (vector) = (1/j!)(c^j - Dt (-l)^j) - (1/(j-1)!) At c^{j-1},
    and the scalar residual replaces (Dt, At, c-rows) by (theta, bt, 1),
    with exponents taken elementwise.
    """
    if jmax < 1:
        raise ValueError("jmax must be at least 1")
    c, l = abscissae(method)
    Dt, At, bt = extended_matrices(method)
    stage = {}
    final = {}
    for j in range(1, jmax + 1):
        fj = math.factorial(j)
        fj1 = math.factorial(j - 1)
        stage[j] = (c**j - Dt @ (-l) ** j) / fj - (At @ c ** (j - 1)) / fj1
        final[j] = (1.0 - method.theta @ (-l) ** j) / fj - (bt @ c ** (j - 1)) / fj1
    return ResidualSet(stage=stage, final=final)


def stage_order(method: MSRKMethod, tol: float = 1e-10) -> int:
    """Largest q with all stage and final residuals below tol for j <= q."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    res = stage_residuals(method, MAX_ORACLE_ORDER + 1)
    q = 0
    for j in range(1, MAX_ORACLE_ORDER + 2):
        if np.abs(res.stage[j]).max() > tol or abs(res.final[j]) > tol:
            break
        q = j
    return q


def default_problems(seed: int, nproblems: int, dim: int = 3, degree: int = 2):
    """Deterministic family of oracle problems derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(nproblems)
    return [
        PolynomialODE.random(int(child.generate_state(1)[0]), dim=dim, degree=degree)
        for child in children
    ]


def series_step_error(method: MSRKMethod, problem: PolynomialODE, N: int) -> NDArray:
    """Normalized local error coefficients of one method step on a problem.

    Back values are the exact flow sampled at -(k-l)h via argument
    scaling; the step is executed entirely in series arithmetic and the
    result compared with the exact flow at +h.  Row n of the returned
    array is the coefficient of h^n, divided entrywise by
    max(1, |exact flow coefficient|) so tolerances are scale-free.
    """
    s, k = method.s, method.k
    flow = flow_series(problem, N)

    key = (id(problem), N, k)
    cached = _BACK_CACHE.get(key)
    if cached is not None and cached[0] is problem:
        _, back, f_back, f_last = cached
    else:
        back = [flow.scale_argument(float(-(k - l))) for l in range(1, k + 1)]
        f_back = [problem.eval_on_series(u) for u in back[: k - 1]]
        f_last = problem.eval_on_series(back[-1])
        if len(_BACK_CACHE) > 4096:
            _BACK_CACHE.clear()
        _BACK_CACHE[key] = (problem, back, f_back, f_last)

    stages: list[TaylorSeries] = [back[-1]]
    f_stages: list[TaylorSeries] = [f_last]
    zero = TaylorSeries(np.zeros_like(flow.coeffs))
    for i in range(1, s):
        acc = zero
        for l in range(k):
            if method.D[i, l]:
                acc = acc + back[l].scale(method.D[i, l])
        dacc = zero
        for l in range(k - 1):
            if method.Ahat[i, l]:
                dacc = dacc + f_back[l].scale(method.Ahat[i, l])
        for j in range(i):
            if method.A[i, j]:
                dacc = dacc + f_stages[j].scale(method.A[i, j])
        y = acc + dacc.shift()
        stages.append(y)
        f_stages.append(problem.eval_on_series(y))

    acc = zero
    for l in range(k):
        if method.theta[l]:
            acc = acc + back[l].scale(method.theta[l])
    dacc = zero
    for l in range(k - 1):
        if method.bhat[l]:
            dacc = dacc + f_back[l].scale(method.bhat[l])
    for j in range(s):
        if method.b[j]:
            dacc = dacc + f_stages[j].scale(method.b[j])
    u_next = acc + dacc.shift()

    err = u_next.coeffs - flow.coeffs
    scale = np.maximum(1.0, np.abs(flow.coeffs))
    return err / scale


def oracle_order(
    method: MSRKMethod,
    pmax: int = 8,
    nproblems: int = 4,
    seed: int = 2718,
    tol: float = 1e-9,
) -> int:
    """Order of the method as certified by the series oracle.

    The order is the largest p such that the local error coefficients of
    h^0..h^p vanish (within tol, normalized) on every test problem.
    With exact back values and a convex theta (zero-stability) the
    local result transfers to global order p.
    """
    if pmax > MAX_ORACLE_ORDER:
        raise ValueError(f"pmax must be at most {MAX_ORACLE_ORDER}")
    if nproblems < 2:
        raise ValueError("at least two problems are required to guard against cancellation")
    problems = default_problems(seed, nproblems)
    p_best = pmax
    for problem in problems:
        errs = np.abs(series_step_error(method, problem, pmax + 1))
        p = 0
        for n in range(pmax + 1):
            if errs[n].max() > tol:
                p = n - 1
                break
            p = n
        p_best = min(p_best, p)
    return max(p_best, 0)


def order_residual_vector(
    method: MSRKMethod, p: int, problems: list[PolynomialODE]
) -> NDArray:
    """Equality constraints for order p, as one flat residual vector.

    Concatenates the final residuals tau_j (j <= p), the stage residual
    vectors tau_j (j <= floor((p-1)/2), the stage order forced on SSP
    methods of order p), and the normalized local error coefficients of
    orders 1..p on each problem.
    """
    if p > MAX_ORACLE_ORDER:
        raise ValueError(f"p must be at most {MAX_ORACLE_ORDER}")
    res = stage_residuals(method, p)
    parts = [np.array([res.final[j] for j in range(1, p + 1)])]
    q = (p - 1) // 2
    for j in range(1, q + 1):
        parts.append(res.stage[j])
    for problem in problems:
        err = series_step_error(method, problem, p)
        parts.append(err[1 : p + 1].ravel())
    return np.concatenate(parts)


def convergence_order(errors: list[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(dt)."""
    if len(errors) < 4:
        raise ValueError("at least 4 (dt, error) points are required")
    dts = np.array([dt for dt, _ in errors])
    errs = np.array([e for _, e in errors])
    if np.any(np.diff(dts) >= 0):
        raise ValueError("dt values must be strictly decreasing")
    if np.any(errs <= 0):
        raise ValueError("errors must be positive")
    slope, _ = np.polyfit(np.log(dts), np.log(errs), 1)
    return float(slope)
