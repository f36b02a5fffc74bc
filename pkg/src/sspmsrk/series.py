"""Truncated Taylor series arithmetic and random polynomial ODE problems.

A series holds coefficients of h^0 .. h^N with vector values, so it
represents a curve u(h) in R^m through order N.  All operations
truncate exactly at order N; nothing beyond h^N is ever kept.  These
series drive the polynomial-identity order oracle: one step of a
method, executed entirely in series arithmetic on a polynomial ODE,
is compared against the exact local flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from numpy.typing import NDArray

__all__ = ["TaylorSeries", "PolynomialODE", "flow_series"]

# flow_series results keyed by (id(problem), N); the problem object is
# stored alongside so a recycled id cannot alias a stale entry.
_FLOW_CACHE: dict = {}


def _truncated_product(a: NDArray, b: NDArray) -> NDArray:
    """Cauchy product of two scalar coefficient arrays, truncated to len(a)."""
    n = len(a)
    return np.convolve(a, b)[:n]


@dataclass(frozen=True)
class TaylorSeries:
    """Vector-valued power series in h, truncated at a fixed order.

    ``coeffs`` has shape (N+1, m): row n is the coefficient of h^n.
    """

    coeffs: NDArray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        object.__setattr__(self, "coeffs", arr)
        arr.setflags(write=False)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def __add__(self, other: "TaylorSeries") -> "TaylorSeries":
        return TaylorSeries(self.coeffs + other.coeffs)

    def __sub__(self, other: "TaylorSeries") -> "TaylorSeries":
        return TaylorSeries(self.coeffs - other.coeffs)

    def scale(self, a: float) -> "TaylorSeries":
        return TaylorSeries(a * self.coeffs)

    def __mul__(self, other: "TaylorSeries") -> "TaylorSeries":
        """Componentwise series product, truncated at this series' order."""
        out = np.zeros_like(self.coeffs)
        for i in range(self.dim):
            out[:, i] = _truncated_product(self.coeffs[:, i], other.coeffs[:, i])
        return TaylorSeries(out)

    def scale_argument(self, a: float) -> "TaylorSeries":
        """The series of h -> u(a*h): coefficient n picks up a factor a^n."""
        powers = a ** np.arange(self.order + 1)
        return TaylorSeries(self.coeffs * powers[:, None])

    def shift(self) -> "TaylorSeries":
        """Multiply by the monomial h, dropping the top coefficient."""
        out = np.zeros_like(self.coeffs)
        out[1:] = self.coeffs[:-1]
        return TaylorSeries(out)

    def __call__(self, h: float) -> NDArray:
        powers = h ** np.arange(self.order + 1)
        return powers @ self.coeffs


def _monomial_exponents(m: int, degree: int) -> NDArray:
    rows = []
    for total in range(degree + 1):
        for combo in combinations_with_replacement(range(m), total):
            e = [0] * m
            for i in combo:
                e[i] += 1
            rows.append(e)
    return np.array(rows, dtype=int)


@dataclass(frozen=True)
class PolynomialODE:
    """u' = F(u) with each component of F a random multivariate polynomial.

    Coefficients are half-integers in [-1.5, 1.5] (integers in [-3, 3]
    scaled by 1/2) to keep series arithmetic well away from overflow.
    """

    dim: int
    degree: int
    coefficients: NDArray  # (nterms, dim), term t feeds component j via [t, j]
    seed: int
    u0: NDArray
    exponents: NDArray = field(init=False, repr=False)

    def __post_init__(self):
        exps = _monomial_exponents(self.dim, self.degree)
        if self.coefficients.shape != (len(exps), self.dim):
            raise ValueError("coefficient tensor shape does not match monomial count")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def random(cls, seed: int, dim: int = 3, degree: int = 2) -> "PolynomialODE":
        rng = np.random.default_rng(seed)
        nterms = len(_monomial_exponents(dim, degree))
        coefficients = rng.integers(-3, 4, size=(nterms, dim)).astype(float) / 2.0
        u0 = rng.integers(-3, 4, size=dim).astype(float) / 2.0
        return cls(dim=dim, degree=degree, coefficients=coefficients, seed=seed, u0=u0)

    def __call__(self, u: NDArray) -> NDArray:
        """Pointwise evaluation of F."""
        u = np.asarray(u, dtype=float)
        mono = np.prod(u[None, :] ** self.exponents, axis=1)
        return mono @ self.coefficients

    def eval_on_series(self, series: TaylorSeries) -> TaylorSeries:
        """F applied to a series argument, truncated at the argument's order."""
        U = series.coeffs
        n1, m = U.shape
        # power tables per variable: powers[i][e] = series of u_i ** e
        powers = []
        one = np.zeros(n1)
        one[0] = 1.0
        for i in range(m):
            table = [one]
            for _ in range(self.degree):
                table.append(_truncated_product(table[-1], U[:, i]))
            powers.append(table)
        out = np.zeros((n1, m))
        for t, exps in enumerate(self.exponents):
            term = one
            for i, e in enumerate(exps):
                if e:
                    term = _truncated_product(term, powers[i][e])
            out += np.outer(term, self.coefficients[t])
        return TaylorSeries(out)


def flow_series(problem: PolynomialODE, N: int) -> TaylorSeries:
    """Truncated series of the exact solution through u0, by Picard iteration.

    Each sweep U <- u0 + integral of F(U) fixes one further coefficient,
    so N sweeps determine the series exactly through order N.  Results
    are cached on the problem: the flow is queried once per residual
    evaluation in the optimizer's inner loop.
    """
    if N > 40:
        raise ValueError("truncation order is unreasonably large")
    cached = _FLOW_CACHE.get((id(problem), N))
    if cached is not None and cached[0] is problem:
        return cached[1]
    U = np.zeros((N + 1, problem.dim))
    U[0] = problem.u0
    for _ in range(N):
        G = problem.eval_on_series(TaylorSeries(U)).coeffs
        nxt = np.zeros_like(U)
        nxt[0] = problem.u0
        for n in range(1, N + 1):
            nxt[n] = G[n - 1] / n
        U = nxt
    result = TaylorSeries(U)
    if len(_FLOW_CACHE) > 4096:
        _FLOW_CACHE.clear()
    _FLOW_CACHE[(id(problem), N)] = (problem, result)
    return result
