"""Deterministic meta-population SI dynamics.

Within region n the compartments follow

    dS_n/dt = -alpha * I_n * S_n / N_n
    dI_n/dt = -beta * I_n + alpha * I_n * S_n / N_n

and both compartments are additionally coupled across regions by the
per-capita flows:

    + sum_{m != n} ( w(m->n) * U_m  -  w(n->m) * U_n )

with w(a->b) = flux[a, b] / N_a (the graph's coupling matrix). With
beta = 0 the coupling cancels in the global sum, so total population is
conserved; beta > 0 removes infected individuals from the system
entirely. N_n is the static region population throughout.

Integration is classical fixed-step RK4; every step is recorded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrivals import ArrivalTable
from .errors import StepTooLarge
from .regions import RegionGraph

# Compartments slightly below zero are integration noise: values in
# [-NEGATIVE_TOL * N_n, 0) are clamped to 0 and counted; anything lower
# aborts the run as a step-size failure.
NEGATIVE_TOL = 1e-6


@dataclass(frozen=True)
class SIParams:
    """Disease and integration parameters.

    alpha: transmission rate (per unit time)
    dt: fixed integration step
    horizon: end time (rounded to a whole number of steps)
    beta: removal rate, default 0 (pure SI)
    """

    alpha: float
    dt: float
    horizon: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not 0 < self.dt <= self.horizon:
            raise ValueError(
                f"need 0 < dt <= horizon, got dt={self.dt}, horizon={self.horizon}")


@dataclass(frozen=True)
class SimState:
    """Per-region compartment snapshot."""

    S: np.ndarray
    I: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: times (strictly increasing) x regions x (S, I)."""

    times: np.ndarray
    S: np.ndarray
    I: np.ndarray
    params: SIParams
    region_ids: tuple[str, ...]
    clamped_values: int = 0

    def state(self, k: int) -> SimState:
        return SimState(S=self.S[k], I=self.I[k])

    @property
    def n_samples(self) -> int:
        return len(self.times)


def derivative(
    state: SimState, graph: RegionGraph, params: SIParams
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (dS, dI) of the coupled SI system."""
    Y = np.column_stack([state.S, state.I])
    dY = _rhs(Y, graph.populations(), graph.coupling.T.copy(),
              graph.coupling.sum(axis=1), params.alpha, params.beta)
    return dY[:, 0], dY[:, 1]


def _rhs(
    Y: np.ndarray,
    N: np.ndarray,
    coupling_T: np.ndarray,
    out_rate: np.ndarray,
    alpha: float,
    beta: float,
) -> np.ndarray:
    """Derivative of the stacked state Y = [S | I], shape (n, 2)."""
    dY = coupling_T @ Y
    dY -= out_rate[:, None] * Y
    force = alpha * Y[:, 0] * Y[:, 1] / N
    dY[:, 0] -= force
    dY[:, 1] += force - beta * Y[:, 1]
    return dY


def simulate(
    graph: RegionGraph,
    params: SIParams,
    seed: str,
    initial_infected: float,
) -> Trajectory:
    """Run the deterministic outbreak seeded in one region.

    Starts from S_n = N_n everywhere except the seed region, which
    trades initial_infected susceptibles for infected. initial_infected
    may be 0 for an explicit null run (I stays identically zero).
    """
    src = graph.index(seed)
    N = graph.populations()
    if not 0 <= initial_infected <= N[src]:
        raise ValueError(
            f"initial_infected must be in [0, {N[src]}], got {initial_infected}")

    n_steps = int(round(params.horizon / params.dt))
    n_steps = max(n_steps, 1)
    dt = params.dt

    coupling_T = np.ascontiguousarray(graph.coupling.T)
    out_rate = graph.coupling.sum(axis=1)
    alpha, beta = params.alpha, params.beta
    floor = -NEGATIVE_TOL * N

    Y = np.zeros((graph.n, 2))
    Y[:, 0] = N
    Y[src, 0] -= initial_infected
    Y[src, 1] = initial_infected

    out = np.empty((n_steps + 1, graph.n, 2))
    out[0] = Y
    clamped = 0
    half = dt / 2.0
    for k in range(n_steps):
        k1 = _rhs(Y, N, coupling_T, out_rate, alpha, beta)
        k2 = _rhs(Y + half * k1, N, coupling_T, out_rate, alpha, beta)
        k3 = _rhs(Y + half * k2, N, coupling_T, out_rate, alpha, beta)
        k4 = _rhs(Y + dt * k3, N, coupling_T, out_rate, alpha, beta)
        Y = Y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)

        low = Y < floor[:, None]
        if low.any():
            worst = np.argwhere(low)[0]
            raise StepTooLarge(
                f"step {k + 1}: compartment {'SI'[worst[1]]} of region "
                f"{graph.ids[worst[0]]!r} fell to {Y[tuple(worst)]:.3e}; reduce dt")
        neg = Y < 0.0
        if neg.any():
            clamped += int(neg.sum())
            Y[neg] = 0.0
        out[k + 1] = Y

    times = np.arange(n_steps + 1) * dt
    S = out[:, :, 0]
    I = out[:, :, 1]
    for arr in (times, S, I):
        arr.setflags(write=False)
    return Trajectory(
        times=times,
        S=S,
        I=I,
        params=params,
        region_ids=graph.ids,
        clamped_values=clamped,
    )


def arrival_times(trajectory: Trajectory, epsilon: float) -> ArrivalTable:
    """First time each region's infected fraction reaches epsilon.

    The crossing is linearly interpolated between the bracketing
    samples; regions that never cross are absent from the table.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")

    # Fractions are measured against the static region populations.
    # (Trajectories do not retain the graph; populations are recovered
    # from the initial condition, where S + I = N exactly.)
    N = trajectory.S[0] + trajectory.I[0]
    frac = trajectory.I / N
    times = trajectory.times

    entries: dict[str, float] = {}
    hit = frac >= epsilon
    any_hit = hit.any(axis=0)
    first = hit.argmax(axis=0)
    for j, rid in enumerate(trajectory.region_ids):
        if not any_hit[j]:
            continue
        k = int(first[j])
        if k == 0:
            entries[rid] = float(times[0])
            continue
        f0, f1 = frac[k - 1, j], frac[k, j]
        t0, t1 = times[k - 1], times[k]
        entries[rid] = float(t0 + (epsilon - f0) * (t1 - t0) / (f1 - f0))
    return ArrivalTable(entries=entries, provenance="simulated", resolution=0.0)
