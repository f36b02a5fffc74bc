"""Test problems, time stepping, monitors, and observed-step searches.

The problems are the van der Pol oscillator, first-order upwind
advection of a step function, and a flux-limited Buckley-Leverett
scheme.  Runs record convex monitor values (total variation, minimum
entry) at every accepted step; a bisection search over the step size
locates the largest step for which a monotonicity property holds over
a whole run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from .methods import MSRKMethod, ssp_coefficient, ssprk33, to_spijker

__all__ = [
    "SemiDiscretization",
    "RunRecord",
    "StepSearchResult",
    "msrk_step",
    "startup",
    "vdp_problem",
    "advection_upwind",
    "buckley_leverett",
    "tv_seminorm",
    "positivity_min",
    "run",
    "max_stable_step",
    "reference_solution",
    "vdp_convergence_study",
]

MONOTONICITY_SLACK = 1e-12


def tv_seminorm(u: NDArray) -> float:
    """Periodic total variation: sum of |u_{j+1} - u_j| with wraparound."""
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        raise ValueError("u must be nonempty")
    return float(np.abs(np.diff(u, append=u[0])).sum())


def positivity_min(u: NDArray) -> float:
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        raise ValueError("u must be nonempty")
    return float(u.min())


@dataclass(frozen=True)
class SemiDiscretization:
    """A semi-discretized problem u' = rhs(u) with its forward-Euler SSP bound."""

    name: str
    dim: int
    rhs: Callable[[NDArray], NDArray]
    dt_fe: float
    u0: NDArray
    monitors: dict[str, Callable[[NDArray], float]] = field(default_factory=dict)
    exact: Optional[Callable[[float], NDArray]] = None
    dx: Optional[float] = None

    def __post_init__(self):
        if self.dt_fe <= 0:
            raise ValueError("dt_fe must be positive")
        object.__setattr__(self, "u0", np.asarray(self.u0, dtype=float))


@dataclass
class RunRecord:
    """Per-step monitor trace of one run, including the startup states."""

    times: list[float]
    monitors: dict[str, list[float]]
    final_state: NDArray
    final_error: Optional[float] = None
    k: int = 1


@dataclass(frozen=True)
class StepSearchResult:
    property: str
    dt_max: float
    normalized: float
    theoretical: float
    resolution: float


class RunAbortedError(RuntimeError):
    """A run produced a non-finite state."""

    def __init__(self, step_index: int):
        super().__init__(f"non-finite state at step {step_index}")
        self.step_index = step_index


def msrk_step(
    method: MSRKMethod,
    history: list[NDArray],
    history_rhs: list[NDArray],
    rhs: Callable[[NDArray], NDArray],
    dt: float,
):
    """One step of the method: stages y_2..y_s, then the new step value.

    ``history`` holds u^{n-k+1}..u^n in order with matching rhs values.
    Returns (u_next, stage_rhs_values); together with the subsequent
    evaluation at u_next this costs exactly s evaluations per step.
    """
    k, s = method.k, method.s
    if len(history) != k or len(history_rhs) != k:
        raise ValueError(f"history must hold exactly k={k} states with rhs values")

    stages = [history[-1]]
    stage_rhs = [history_rhs[-1]]
    for i in range(1, s):
        y = method.D[i, 0] * history[0] if method.D[i, 0] else np.zeros_like(history[0])
        for l in range(1, k):
            if method.D[i, l]:
                y = y + method.D[i, l] * history[l]
        for l in range(k - 1):
            if method.Ahat[i, l]:
                y = y + dt * method.Ahat[i, l] * history_rhs[l]
        for j in range(i):
            if method.A[i, j]:
                y = y + dt * method.A[i, j] * stage_rhs[j]
        stages.append(y)
        stage_rhs.append(rhs(y))

    u_next = method.theta[0] * history[0]
    for l in range(1, k):
        u_next = u_next + method.theta[l] * history[l]
    for l in range(k - 1):
        if method.bhat[l]:
            u_next = u_next + dt * method.bhat[l] * history_rhs[l]
    for j in range(s):
        if method.b[j]:
            u_next = u_next + dt * method.b[j] * stage_rhs[j]
    return u_next, stage_rhs


def _ssprk33_step(u: NDArray, rhs, dt: float) -> NDArray:
    y1 = u + dt * rhs(u)
    y2 = 0.75 * u + 0.25 * (y1 + dt * rhs(y1))
    return u / 3.0 + 2.0 / 3.0 * (y2 + dt * rhs(y2))


def startup(
    problem: SemiDiscretization,
    dt: float,
    k: int,
    p: int,
    mode: str = "exact",
) -> list[NDArray]:
    """The k initial states u(t_0)..u(t_{k-1}) a k-step method needs.

    exact: sample the problem's exact solution.  rk3_substeps: advance
    each interval with SSPRK(3,3) substeps of size at most dt**(p/3),
    additionally capped at 0.9*dt_fe so the startup states inherit the
    forward-Euler monotonicity properties.
    """
    if mode == "exact":
        if problem.exact is None:
            raise ValueError(f"problem {problem.name!r} has no exact solution for startup")
        return [problem.exact(j * dt) for j in range(k)]
    if mode != "rk3_substeps":
        raise ValueError(f"unknown startup mode {mode!r}")
    states = [problem.u0.copy()]
    if k == 1:
        return states
    h_sub = min(dt ** (p / 3.0), 0.9 * problem.dt_fe)
    nsub = max(1, math.ceil(dt / h_sub))
    h = dt / nsub
    u = problem.u0.copy()
    for _ in range(k - 1):
        for _ in range(nsub):
            u = _ssprk33_step(u, problem.rhs, h)
        states.append(u)
    return states


def vdp_problem(eps: float = 10.0, u0=(0.5, 0.0)) -> SemiDiscretization:
    """The van der Pol oscillator u1' = u2, u2' = (-u1 + (1-u1^2) u2)/eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")

    def rhs(u):
        return np.array([u[1], (-u[0] + (1.0 - u[0] ** 2) * u[1]) / eps])

    exact = _make_vdp_exact(eps, tuple(float(x) for x in u0))
    # dt_fe is nominal: the oscillator carries no convex monitor of interest
    return SemiDiscretization(
        name="vdp", dim=2, rhs=rhs, dt_fe=eps / 10.0, u0=np.array(u0, dtype=float),
        monitors={}, exact=exact,
    )


def advection_upwind(N: int = 101) -> SemiDiscretization:
    """Periodic advection u_t + u_x = 0 with upwind differencing and a step IC.

    Forward Euler is TVD and positive up to dt_fe = dx on this scheme.
    """
    if N < 3:
        raise ValueError("N must be at least 3")
    dx = 1.0 / N
    x = dx * np.arange(N)

    def ic(y):
        y = np.mod(y, 1.0)
        return np.where((y >= 0.0) & (y <= 0.5), 1.0, 0.0)

    def rhs(u):
        return -(u - np.roll(u, 1)) / dx

    def exact(t):
        return ic(x - t)

    return SemiDiscretization(
        name="advection", dim=N, rhs=rhs, dt_fe=dx, u0=ic(x),
        monitors={"tv": tv_seminorm, "min": positivity_min},
        exact=exact, dx=dx,
    )


def _koren_phi(theta: NDArray) -> NDArray:
    return np.maximum(0.0, np.minimum(np.minimum(2.0 * theta, (1.0 + 2.0 * theta) / 3.0), 2.0))


def buckley_leverett(N: int = 100, a: float = 1.0 / 3.0) -> SemiDiscretization:
    """Buckley-Leverett flux with a Koren-limited conservative upwind scheme.

    f(u) = u^2 / (u^2 + a(1-u)^2) is nondecreasing on [0, 1], so the
    interface flux uses the limited left value.  Forward Euler is TVD up
    to dt_fe = dx/4.
    """
    if N < 3:
        raise ValueError("N must be at least 3")
    if a <= 0:
        raise ValueError("a must be positive")
    dx = 1.0 / N
    x = dx * np.arange(N)
    u0 = np.where(x >= 0.5, 0.5, 0.0)

    def flux(u):
        return u**2 / (u**2 + a * (1.0 - u) ** 2)

    eps_den = 1e-14

    def rhs(u):
        du = np.roll(u, -1) - u  # u_{j+1} - u_j
        du_prev = u - np.roll(u, 1)  # u_j - u_{j-1}
        theta = np.where(np.abs(du) > eps_den, du_prev / np.where(du == 0.0, 1.0, du), 0.0)
        phi = np.where(np.abs(du) > eps_den, _koren_phi(theta), 0.0)
        u_face = u + 0.5 * phi * du  # left value at interface j+1/2
        F = flux(u_face)
        return -(F - np.roll(F, 1)) / dx

    return SemiDiscretization(
        name="buckley", dim=N, rhs=rhs, dt_fe=dx / 4.0, u0=u0,
        monitors={"tv": tv_seminorm, "min": positivity_min},
        dx=dx,
    )


def run(
    problem: SemiDiscretization,
    method: MSRKMethod,
    dt: float,
    tf: float,
    startup_mode: str = "exact",
    truncate_final: bool = True,
) -> RunRecord:
    """Integrate to tf, sampling every monitor at every accepted state.

    The final partial step is truncated to land on tf exactly unless
    ``truncate_final`` is false, in which case stepping stops at the
    last full step not exceeding tf.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    k = method.k
    if tf <= (k - 1) * dt:
        raise ValueError("tf must exceed the startup interval (k-1)*dt")

    states = startup(problem, dt, k, method.claimed_order, startup_mode)
    rhs_vals = [problem.rhs(u) for u in states]
    times = [j * dt for j in range(k)]
    monitors = {name: [fn(u) for u in states] for name, fn in problem.monitors.items()}

    t = times[-1]
    step_index = 0
    while t < tf - 1e-12:
        h = dt
        if t + dt > tf + 1e-12:
            if not truncate_final:
                break
            h = tf - t
        u_next, _ = msrk_step(method, states, rhs_vals, problem.rhs, h)
        step_index += 1
        if not np.all(np.isfinite(u_next)):
            raise RunAbortedError(step_index)
        t += h
        states = states[1:] + [u_next]
        rhs_vals = rhs_vals[1:] + [problem.rhs(u_next)]
        times.append(t)
        for name, fn in problem.monitors.items():
            monitors[name].append(fn(u_next))

    final_error = None
    if problem.exact is not None:
        final_error = float(np.linalg.norm(states[-1] - problem.exact(t)))
    return RunRecord(times=times, monitors=monitors, final_state=states[-1],
                     final_error=final_error, k=k)


def _property_holds(record: RunRecord, prop: str) -> bool:
    if prop == "tvd":
        tv = record.monitors["tv"]
        k = record.k
        for n in range(k, len(tv)):
            if tv[n] > max(tv[max(0, n - k) : n]) + MONOTONICITY_SLACK:
                return False
        return True
    if prop == "positivity":
        return all(v >= -MONOTONICITY_SLACK for v in record.monitors["min"])
    raise ValueError(f"unknown property {prop!r}")


def max_stable_step(
    problem: SemiDiscretization,
    method: MSRKMethod,
    prop: str = "tvd",
    resolution: Optional[float] = None,
    tf: float = 0.125,
    startup_mode: str = "exact",
) -> StepSearchResult:
    """Largest dt for which the property holds at every step of a full run.

    Bisection over [0, 20*dt_fe]; runs use only full steps so the
    comparison against C*dt_fe is clean.
    """
    if resolution is None:
        resolution = 0.001 * problem.dt_fe

    def passes(dt: float) -> bool:
        if method.k * dt > tf:  # horizon too short for startup plus one full step
            return False
        try:
            record = run(problem, method, dt, tf, startup_mode, truncate_final=False)
        except RunAbortedError:
            return False
        if len(record.times) <= method.k:
            return False
        return _property_holds(record, prop)

    lo, hi = 0.0, 20.0 * problem.dt_fe
    if passes(hi):
        lo = hi
    else:
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if passes(mid):
                lo = mid
            else:
                hi = mid

    C = ssp_coefficient(to_spijker(method))
    dx = problem.dx if problem.dx is not None else problem.dt_fe
    return StepSearchResult(
        property=prop,
        dt_max=lo,
        normalized=lo / dx,
        theoretical=C * problem.dt_fe,
        resolution=resolution,
    )


# high-accuracy reference integration (plain floats: the state is tiny and
# the step counts are large, so numpy overhead would dominate)


def _integrate_vdp(eps: float, u0: tuple[float, float], tf: float, nsteps: int):
    u1, u2 = u0
    h = tf / nsteps
    inv_eps = 1.0 / eps
    for _ in range(nsteps):
        f1a = u2
        f2a = inv_eps * (-u1 + (1.0 - u1 * u1) * u2)
        y1 = u1 + h * f1a
        y2 = u2 + h * f2a
        f1b = y2
        f2b = inv_eps * (-y1 + (1.0 - y1 * y1) * y2)
        z1 = 0.75 * u1 + 0.25 * (y1 + h * f1b)
        z2 = 0.75 * u2 + 0.25 * (y2 + h * f2b)
        f1c = z2
        f2c = inv_eps * (-z1 + (1.0 - z1 * z1) * z2)
        u1 = u1 / 3.0 + 2.0 / 3.0 * (z1 + h * f1c)
        u2 = u2 / 3.0 + 2.0 / 3.0 * (z2 + h * f2c)
    return u1, u2


def _make_vdp_exact(eps: float, u0: tuple[float, float]):
    cache: dict[float, NDArray] = {}

    def exact(t: float) -> NDArray:
        t = float(t)
        if t not in cache:
            if t == 0.0:
                cache[t] = np.array(u0)
            else:
                nsteps = max(2048, math.ceil(t * 65536.0))
                cache[t] = np.array(_integrate_vdp(eps, u0, t, nsteps))
        return cache[t].copy()

    return exact


def reference_solution(problem: SemiDiscretization, tf: float, level: int = 20) -> NDArray:
    """Reference state at tf with a Richardson agreement certificate.

    Integrates with SSPRK(3,3) at steps tf/2**level and tf/2**(level+1)
    and requires the two results to agree within 1e-10.
    """
    if tf < 0:
        raise ValueError("tf must be nonnegative")
    if tf == 0.0:
        return problem.u0.copy()
    if problem.name == "vdp":
        eps = problem.dt_fe * 10.0
        u0 = (float(problem.u0[0]), float(problem.u0[1]))
        coarse = np.array(_integrate_vdp(eps, u0, tf, 2**level))
        fine = np.array(_integrate_vdp(eps, u0, tf, 2 ** (level + 1)))
    else:
        results = []
        for nsteps in (2**level, 2 ** (level + 1)):
            u = problem.u0.copy()
            h = tf / nsteps
            for _ in range(nsteps):
                u = _ssprk33_step(u, problem.rhs, h)
            results.append(u)
        coarse, fine = results
    err = float(np.max(np.abs(coarse - fine)))
    if err > 1e-10:
        raise RuntimeError(f"reference accuracy certificate failed: disagreement {err:.3e}")
    return fine


def vdp_convergence_study(
    method: MSRKMethod,
    eps: float = 10.0,
    tf: float = 4.0,
    Ns=(15, 19, 23, 27, 31, 35, 39, 43),
) -> list[tuple[float, float]]:
    """(dt, error at tf) pairs on the van der Pol problem, dt = tf/(N-1)."""
    problem = vdp_problem(eps)
    ref = problem.exact(tf)
    out = []
    for N in Ns:
        dt = tf / (N - 1)
        record = run(problem, method, dt, tf, startup_mode="exact")
        out.append((dt, float(np.linalg.norm(record.final_state - ref))))
    return out
