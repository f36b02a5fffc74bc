"""Numerical search for methods maximizing the SSP coefficient.

The decision problem "is there an order-p method feasible at radius r"
is solved as a least-squares feasibility problem (order-condition
residuals plus hinged inequality violations) from several starts; the
radius itself is found by outer bisection on r.  The outer/inner split
avoids the joint maximization, which tends to stall in local minima.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import least_squares

from .methods import MSRKMethod, canonical, ssp_coefficient, to_spijker, validate
from .orderlab import default_problems, oracle_order, order_residual_vector
from .series import PolynomialODE
from .theory import gen_second_order, r_sk2

__all__ = [
    "SearchSpec",
    "SearchResult",
    "SearchFailure",
    "pack",
    "unpack",
    "free_parameter_count",
    "constraint_residuals",
    "maximize_ssp",
    "warm_start_ladder",
    "write_search_log",
]

#: below this radius a "feasible" search is reported as infeasible
MIN_POSITIVE_C = 1e-3


class SearchFailure(RuntimeError):
    """No feasible method was found (typically p is too high for (s, k))."""


@dataclass(frozen=True)
class SearchSpec:
    s: int
    k: int
    p: int
    starts: int = 10
    seed: int = 0
    r_tol: float = 1e-6
    feas_tol: float = 1e-10
    max_inner_iters: int = 500
    warm_starts: list[MSRKMethod] = field(default_factory=list)

    def __post_init__(self):
        if self.p < 1 or self.starts < 1:
            raise ValueError("p and starts must be at least 1")


@dataclass
class SearchResult:
    method: MSRKMethod
    C: float
    Ceff: float
    residual_norm: float
    certified: bool
    history: list[tuple[float, int, float, int]]  # (r, start index, merit, nfev)


def free_parameter_count(s: int, k: int) -> int:
    return 2 * (s - 1) * (k - 1) + s * (s - 1) // 2 + 2 * (k - 1) + s


def pack(method: MSRKMethod) -> NDArray:
    """Free coordinates of a method: rows 2..s of D (first k-1 entries),
    Ahat, the strict lower triangle of A, theta (first k-1 entries),
    bhat, and b.  Entries dropped here are restored by normalization in
    :func:`unpack`."""
    s, k = method.s, method.k
    parts = [
        method.D[1:, : k - 1].ravel(),
        method.Ahat[1:].ravel(),
    ]
    tri = [method.A[i, j] for i in range(1, s) for j in range(i)]
    parts.append(np.array(tri))
    parts.append(method.theta[: k - 1])
    parts.append(method.bhat)
    parts.append(method.b)
    return np.concatenate(parts)


def unpack(x: NDArray, s: int, k: int, name: str = "search", claimed_order: int = 1) -> MSRKMethod:
    """Inverse of :func:`pack`; D rows and theta regain sum 1 via their
    last entry, so any vector of the right length yields a consistent
    method."""
    x = np.asarray(x, dtype=float)
    if len(x) != free_parameter_count(s, k):
        raise ValueError(
            f"expected {free_parameter_count(s, k)} free parameters for (s={s}, k={k}), got {len(x)}"
        )
    pos = 0

    def take(n):
        nonlocal pos
        out = x[pos : pos + n]
        pos += n
        return out

    D = np.zeros((s, k))
    D[0, -1] = 1.0
    D[1:, : k - 1] = take((s - 1) * (k - 1)).reshape(s - 1, k - 1)
    D[1:, -1] = 1.0 - D[1:, : k - 1].sum(axis=1)

    Ahat = np.zeros((s, k - 1))
    Ahat[1:] = take((s - 1) * (k - 1)).reshape(s - 1, k - 1)

    A = np.zeros((s, s))
    tri = take(s * (s - 1) // 2)
    idx = 0
    for i in range(1, s):
        A[i, :i] = tri[idx : idx + i]
        idx += i

    theta = np.zeros(k)
    theta[: k - 1] = take(k - 1)
    theta[-1] = 1.0 - theta[: k - 1].sum()
    bhat = take(k - 1)
    b = take(s)
    return MSRKMethod(s=s, k=k, D=D, Ahat=Ahat, A=A, theta=theta, bhat=bhat, b=b,
                      name=name, claimed_order=claimed_order)


def constraint_residuals(
    method: MSRKMethod, r: float, p: int, problems: list[PolynomialODE]
):
    """Equality residuals (order conditions) and inequality violations.

    Inequality entries are positive exactly when violated: negated
    entries of P and R at radius r, plus the coefficient bounds
    0 <= D <= 1, 0 <= theta <= 1, and nonnegativity of A, Ahat, b, bhat.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    eq = order_residual_vector(method, p, problems)
    cf = canonical(to_spijker(method), r)
    ineq = np.concatenate([
        -cf.P.ravel(),
        -cf.R.ravel(),
        -method.D.ravel(),
        method.D.ravel() - 1.0,
        -method.theta,
        method.theta - 1.0,
        -method.A.ravel(),
        -method.Ahat.ravel(),
        -method.b,
        -method.bhat,
    ])
    return eq, ineq


def _merit_residuals(x, s, k, r, p, problems):
    method = unpack(x, s, k)
    eq, ineq = constraint_residuals(method, r, p, problems)
    return np.concatenate([eq, np.maximum(0.0, ineq)])


def _random_start(rng, s, k):
    nD = (s - 1) * (k - 1)
    nAh = (s - 1) * (k - 1)
    nA = s * (s - 1) // 2
    return np.concatenate([
        rng.uniform(0.0, 1.0, nD),
        rng.uniform(0.0, 2.0 / s, nAh),
        rng.uniform(0.0, 2.0 / s, nA),
        rng.uniform(0.0, 1.0, k - 1),
        rng.uniform(0.0, 2.0 / s, k - 1),
        rng.uniform(0.0, 2.0 / s, s),
    ])


def _solve_feasibility(spec: SearchSpec, r: float, p: int, problems, starts, history):
    """Best merit over the given start vectors; early exit on success."""
    best_merit = np.inf
    best_x = None
    for idx, x0 in enumerate(starts):
        sol = least_squares(
            _merit_residuals, x0,
            args=(spec.s, spec.k, r, p, problems),
            method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
            max_nfev=spec.max_inner_iters,
        )
        merit = float(2.0 * sol.cost)  # cost is half the squared norm
        history.append((r, idx, merit, sol.nfev))
        if merit < best_merit:
            best_merit = merit
            best_x = sol.x
        if merit <= spec.feas_tol**2:
            break
    return best_merit, best_x


def warm_start_ladder(
    s: int, k: int, p: int, found: Optional[dict] = None
) -> list[MSRKMethod]:
    """Warm starts: previously found (s, k-1, p) and (s-1, k, p) methods
    zero-padded into the (s, k) shape, plus the closed-form second-order
    method when it exists."""
    found = found or {}
    out: list[MSRKMethod] = []
    m = found.get((s, k - 1, p))
    if m is not None:
        out.append(pad_steps(m))
    m = found.get((s - 1, k, p))
    if m is not None:
        out.append(pad_stages(m))
    if s >= 2 and k >= 2:
        out.append(gen_second_order(s, k))
    return out


def pad_steps(method: MSRKMethod) -> MSRKMethod:
    """Embed a k-step method as a (k+1)-step method ignoring the oldest step."""
    s, k = method.s, method.k
    return MSRKMethod(
        s=s, k=k + 1,
        D=np.hstack([np.zeros((s, 1)), method.D]),
        Ahat=np.hstack([np.zeros((s, 1)), method.Ahat]),
        A=method.A,
        theta=np.concatenate([[0.0], method.theta]),
        bhat=np.concatenate([[0.0], method.bhat]),
        b=method.b,
        name=method.name + "+step", claimed_order=method.claimed_order,
    )


def pad_stages(method: MSRKMethod) -> MSRKMethod:
    """Append an unused stage (a copy of u^n with zero weight)."""
    s, k = method.s, method.k
    D = np.vstack([method.D, np.zeros((1, k))])
    D[-1, -1] = 1.0
    A = np.zeros((s + 1, s + 1))
    A[:s, :s] = method.A
    return MSRKMethod(
        s=s + 1, k=k,
        D=D,
        Ahat=np.vstack([method.Ahat, np.zeros((1, k - 1))]),
        A=A,
        theta=method.theta,
        bhat=method.bhat,
        b=np.concatenate([method.b, [0.0]]),
        name=method.name + "+stage", claimed_order=method.claimed_order,
    )


def maximize_ssp(spec: SearchSpec) -> SearchResult:
    """Outer bisection on the radius with inner feasibility solves.

    Raises :class:`SearchFailure` when no method is found with a
    meaningfully positive radius.
    """
    s, k, p = spec.s, spec.k, spec.p
    problems = default_problems(spec.seed, 2)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, s, k, p]))

    upper = float(s)
    if p >= 2 and k >= 2:
        upper = min(upper, r_sk2(s, k))

    history: list[tuple[float, int, float, int]] = []

    def starts_at(best_x, n_random):
        out = []
        if best_x is not None:
            out.append(best_x)
        out.extend(pack(m) for m in spec.warm_starts)
        out.extend(_random_start(rng, s, k) for _ in range(n_random))
        return out

    # establish feasibility at r = 0 with the full multistart budget
    merit0, x0 = _solve_feasibility(spec, 0.0, p, problems, starts_at(None, spec.starts), history)
    if merit0 > spec.feas_tol**2:
        raise SearchFailure(
            f"no order-{p} method found at r=0 for (s={s}, k={k}); best merit {merit0:.3e}"
        )

    lo, hi = 0.0, upper
    best_x = x0
    n_random_later = min(spec.starts, 3)
    while hi - lo > spec.r_tol:
        mid = 0.5 * (lo + hi)
        merit, x = _solve_feasibility(
            spec, mid, p, problems, starts_at(best_x, n_random_later), history
        )
        if merit <= spec.feas_tol**2:
            lo, best_x = mid, x
        else:
            hi = mid

    if lo <= MIN_POSITIVE_C:
        raise SearchFailure(
            f"largest feasible radius for (s={s}, k={k}, p={p}) is {lo:.3e}; "
            "no method with positive SSP coefficient found"
        )

    method = unpack(best_x, s, k, name=f"OPT({s},{k},{p})", claimed_order=p)
    C = ssp_coefficient(to_spijker(method))
    eq, _ = constraint_residuals(method, lo, p, problems)
    residual_norm = float(np.linalg.norm(eq))
    certified = (
        validate(method).ok
        and oracle_order(method, pmax=p, seed=spec.seed + 7919) >= p
        and abs(C - lo) <= max(1e-6, 2.0 * spec.r_tol)
    )
    return SearchResult(
        method=method, C=C, Ceff=C / s, residual_norm=residual_norm,
        certified=certified, history=history,
    )


def write_search_log(history, path):
    """CSV search log: one row per inner solve."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["start", "r", "merit", "iterations"])
        for r, idx, merit, nfev in history:
            writer.writerow([idx, f"{r:.12g}", f"{merit:.6e}", nfev])
