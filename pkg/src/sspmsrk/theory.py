"""Linear-stability theory: threshold factors and the second-order optimum.

Applying a method to u' = lambda*u yields
u^{n+1} = psi_1(z) u^n + ... + psi_k(z) u^{n-k+1} with z = dt*lambda.
The radius of absolute monotonicity of each psi_i, and its minimum over
i (the threshold factor), bound the SSP coefficient on linear problems.
For second order the optimal threshold factor has a closed form, and a
family of methods attains it; both are implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from numpy.typing import NDArray

from .methods import MSRKMethod, SpijkerForm

__all__ = [
    "StabilityPolynomials",
    "ShiftedBasisExpansion",
    "stability_polynomials",
    "shifted_basis",
    "radius_abs_monotonicity",
    "threshold_factor",
    "linear_order",
    "r_sk2",
    "optimal_gamma_sk2",
    "second_order_gamma_residuals",
    "gen_second_order",
]

COEFF_TOL = 1e-12


@dataclass(frozen=True)
class StabilityPolynomials:
    """psi[i-1] holds the monomial coefficients of psi_i (multiplier of u^{n+1-i})."""

    psi: list[NDArray]


@dataclass(frozen=True)
class ShiftedBasisExpansion:
    """Coefficients gamma[i, j] of (1 + z/r)^j in psi_{i+1}."""

    r: float
    gamma: NDArray


def stability_polynomials(sp: SpijkerForm) -> StabilityPolynomials:
    """Polynomials in z produced by one step on u' = lambda*u.

    Forward substitution through w = S x + z T w, carrying for each row
    a polynomial coefficient table per input step.  The last row of w is
    u^{n+1}; its dependence on x_{k+1-i} is psi_i.
    """
    k, s = sp.k, sp.s
    n = k + s
    # W[i, j, d]: coefficient of z^d multiplying x_j in row i
    W = np.zeros((n, k, s + 1))
    W[:, :, 0] = sp.S
    for i in range(n):
        for jj in range(i):
            t = sp.T[i, jj]
            if t:
                W[i, :, 1:] += t * W[jj, :, :-1]
    last = W[n - 1]
    psi = [last[k - i].copy() for i in range(1, k + 1)]
    return StabilityPolynomials(psi=psi)


def shifted_basis(psi: NDArray, r: float) -> NDArray:
    """Exact change of basis from monomials in z to powers of (1 + z/r).

    Writing t = 1 + z/r, the result is the coefficient table of
    psi(r*(t-1)) in t; same length as the input.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    psi = np.asarray(psi, dtype=float)
    gamma = np.array([psi[-1]])
    for c in psi[-2::-1]:
        gamma = npoly.polymul(gamma, [-r, r])
        gamma[0] += c
    out = np.zeros(len(psi))
    out[: len(gamma)] = gamma
    return out


def _poly_degree(psi: NDArray) -> int:
    nz = np.nonzero(np.asarray(psi))[0]
    return int(nz[-1]) if len(nz) else -1


def radius_abs_monotonicity(psi: NDArray, tol: float = 1e-10) -> float:
    """Largest r with all derivatives of psi nonnegative on [-r, 0].

    For polynomials this is equivalent to nonnegativity of all
    shifted-basis coefficients at r, which is what the bisection tests.
    """
    psi = np.asarray(psi, dtype=float)
    deg = _poly_degree(psi)
    if deg < 0:
        raise ValueError("psi must be nonzero")
    # feasibility at r -> 0+ means all Taylor coefficients at 0 are nonnegative
    if psi.min() < -COEFF_TOL:
        return 0.0
    if deg == 0:
        return math.inf  # nonnegative constant: absolutely monotonic everywhere

    def feasible(r: float) -> bool:
        return shifted_basis(psi, r).min() >= -COEFF_TOL

    lo, hi = 0.0, 2.0 * deg + 2.0
    # the positive leading coefficient makes the radius finite, but it can
    # exceed the default bracket; grow until infeasible
    while feasible(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def threshold_factor(sp: StabilityPolynomials) -> float:
    """min_i R(psi_i); identically-zero polynomials count as +inf."""
    radii = [
        radius_abs_monotonicity(psi)
        for psi in sp.psi
        if _poly_degree(psi) >= 0
    ]
    return min(radii) if radii else math.inf


def linear_order(sp: StabilityPolynomials, tol: float = 1e-9) -> int:
    """Largest p with sum_i psi_i(z) e^{-(i-1)z} = e^z through order z^p."""
    k = len(sp.psi)
    deg = max(_poly_degree(psi) for psi in sp.psi)
    N = deg + k + 4
    total = np.zeros(N + 1)
    for i, psi in enumerate(sp.psi, start=1):
        shift = np.array([(-(i - 1.0)) ** n / math.factorial(n) for n in range(N + 1)])
        prod = npoly.polymul(psi, shift)[: N + 1]
        total[: len(prod)] += prod
    expz = np.array([1.0 / math.factorial(n) for n in range(N + 1)])
    err = np.abs(total - expz)
    p = -1
    for n in range(N + 1):
        if err[n] > tol:
            break
        p = n
    return max(p, 0)


def r_sk2(s: int, k: int) -> float:
    """Optimal threshold factor for s-stage, k-step methods of order two.

    ((k-2)s + sqrt((k-2)^2 s^2 + 4 s (s-1)(k-1))) / (2(k-1)).  Both
    summands are nonnegative for k >= 2, so the direct evaluation is
    cancellation-free.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    if k <= 1:
        raise ValueError("the formula requires k > 1")
    a = (k - 2.0) * s
    disc = a * a + 4.0 * s * (s - 1.0) * (k - 1.0)
    return (a + math.sqrt(disc)) / (2.0 * (k - 1.0))


def optimal_gamma_sk2(s: int, k: int) -> ShiftedBasisExpansion:
    """Shifted-basis coefficients attaining the second-order optimum.

    Only gamma_{1,s} and gamma_{k,0} are nonzero; their values are the
    convex weights k*R2 / (s - R2 + k*R2) and (s - R2) / (s - R2 + k*R2).
    """
    R2 = r_sk2(s, k)
    denom = s - R2 + k * R2
    gamma = np.zeros((k, s + 1))
    gamma[0, s] = k * R2 / denom
    gamma[k - 1, 0] = (s - R2) / denom
    return ShiftedBasisExpansion(r=R2, gamma=gamma)


def second_order_gamma_residuals(exp: ShiftedBasisExpansion) -> NDArray:
    """Residuals of the three order conditions on a shifted-basis expansion.

    With i indexing steps (1..k) and j powers (0..s), the conditions are
    sum gamma_{ij} = 1, sum gamma_{ij}(j + (k-i)r) = kr, and
    sum gamma_{ij}((k-i)^2 r^2 + 2(k-i) j r + j(j-1)) = k^2 r^2.
    """
    k, s1 = exp.gamma.shape
    r = exp.r
    i = np.arange(1, k + 1)[:, None]
    j = np.arange(s1)[None, :]
    g = exp.gamma
    c0 = g.sum() - 1.0
    c1 = (g * (j + (k - i) * r)).sum() - k * r
    c2 = (g * ((k - i) ** 2 * r**2 + 2 * (k - i) * j * r + j * (j - 1))).sum() - k**2 * r**2
    return np.array([c0, c1, c2])


def gen_second_order(s: int, k: int) -> MSRKMethod:
    """The closed-form second-order family with C = r_sk2(s, k).

    Nonzero coefficients: d_{ik} = 1, a_{ij} = 1/R for j < i,
    b_j = beta = kQ / (s(k-1)(2(s-1)+Q)) with Q = 2(k-1)R,
    theta_k = (k - beta*s)/(k-1), theta_1 = 1 - theta_k.
    """
    if s < 2 or k < 2:
        raise ValueError("the family requires s >= 2 and k >= 2")
    R = r_sk2(s, k)
    Q = 2.0 * (k - 1) * R
    beta = k * Q / (s * (k - 1) * (2.0 * (s - 1) + Q))

    D = np.zeros((s, k))
    D[:, -1] = 1.0
    A = np.zeros((s, s))
    for i in range(1, s):
        A[i, :i] = 1.0 / R
    b = np.full(s, beta)
    theta = np.zeros(k)
    theta[-1] = (k - beta * s) / (k - 1)
    theta[0] = 1.0 - theta[-1]

    return MSRKMethod(
        s=s, k=k,
        D=D, Ahat=np.zeros((s, k - 1)), A=A,
        theta=theta, bhat=np.zeros(k - 1), b=b,
        name=f"SO2({s},{k})", claimed_order=2,
    )
