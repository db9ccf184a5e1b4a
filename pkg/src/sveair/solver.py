"""Time stepper for the scaled system: forward Euler for S and V, upwind
shift along characteristics for the age densities, rectangle-rule renewal
integrals for the theta = 0 boundaries.

The time step equals the age step h, so each density update is a pure shift
to the next age node times the explicit decay factor (1 - h * exit_rate).
Boundary values feeding a step are always evaluated on the previous state
(explicit coupling). Mass reaching the oldest node leaves the system
(absorbing boundary at theta_max).

With nonnegative state and the setup stability bound h * max(exit rate) < 1
the density updates cannot go negative. The S and V updates can, when the
force of infection spikes above ~1/h, so their outflows are limited: if one
step would remove more than the pool holds, every outflow of that pool
(including the infection flux feeding the latent boundary) is scaled down
by phi = 1/(h * total rate). The limiter keeps the discrete mass ledger
exact, reduces to the plain explicit update whenever h * total rate <= 1,
and every limited step is counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from sveair.errors import AbortedRunError, ParameterError, StabilityError
from sveair.grid import AgeProfile, Units, rect_integral
from sveair.params import ParameterSet


@dataclass(frozen=True, eq=False)
class State:
    """System state at one instant: scalars S, V and the three densities."""

    t: float
    s: float
    v: float
    e: AgeProfile
    a: AgeProfile
    i: AgeProfile

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.s) and math.isfinite(self.v)):
            raise ParameterError("state scalars must be finite")
        if self.s < 0 or self.v < 0:
            raise ParameterError(f"S and V must be nonnegative, got S={self.s}, V={self.v}")
        for name in ("e", "a", "i"):
            profile = getattr(self, name)
            if profile.units is not Units.DENSITY:
                raise ParameterError(f"density {name} must be density-typed")
            if profile.grid != self.e.grid:
                raise ParameterError("state densities must share one grid")


class BoundaryValues(NamedTuple):
    eps: float
    alpha: float
    iota: float


class Aggregates(NamedTuple):
    exposed: float
    asymptomatic: float
    symptomatic: float
    removed: float
    total: float


@dataclass(frozen=True, eq=False)
class DensitySnapshot:
    """Age densities captured at one requested sample time."""

    t: float
    theta: np.ndarray
    e: np.ndarray
    a: np.ndarray
    i: np.ndarray


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Per-sample aggregates of a run; `r_tilde` is the explicitly
    integrated recovered compartment used by the conservation diagnostic
    (the R column itself is the remainder N0 - S - V - E - A - I)."""

    t: np.ndarray
    s: np.ndarray
    v: np.ndarray
    e: np.ndarray
    a: np.ndarray
    i: np.ndarray
    r: np.ndarray
    n: np.ndarray
    beta: np.ndarray
    eps: np.ndarray
    alpha: np.ndarray
    iota: np.ndarray
    r_tilde: np.ndarray
    snapshots: list[DensitySnapshot]

    def balance_error(self, n0: float) -> float:
        """Max relative defect of S+V+E+A+I+R_tilde against N0."""
        total = self.s + self.v + self.e + self.a + self.i + self.r_tilde
        return float(np.max(np.abs(total - n0)) / n0)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    timeseries: TimeSeries
    final_state: State
    clamp_events: int
    clamped_mass: float


def force_of_infection(state: State, params: ParameterSet) -> float:
    """Force of infection: h * sum(beta_a * a + beta_i * i) over all nodes."""
    values = params.beta_a.values * state.a.values + params.beta_i.values * state.i.values
    return rect_integral(values, params.grid)


def boundary_values(state: State, params: ParameterSet) -> BoundaryValues:
    """Renewal boundary densities (eps, alpha, iota) of a state.

    eps is the new-latent density beta * (S + (1-epsilon) V); note the
    deliberate naming split between the vaccine effectiveness epsilon and
    the boundary density eps.
    """
    beta = force_of_infection(state, params)
    eps = beta * (state.s + (1.0 - params.epsilon) * state.v)
    grid = params.grid
    kv, qv = params.k.values, params.q.values
    alpha = rect_integral(kv * qv * state.e.values, grid)
    iota = rect_integral(
        kv * (1.0 - qv) * state.e.values
        + params.chi.values * (1.0 - params.xi.values) * state.a.values,
        grid,
    )
    return BoundaryValues(eps=eps, alpha=alpha, iota=iota)


def aggregate(state: State, n0: float) -> Aggregates:
    """Rectangle-rule compartment masses; R is the remainder against N0."""
    grid = state.e.grid
    e_tot = rect_integral(state.e.values, grid)
    a_tot = rect_integral(state.a.values, grid)
    i_tot = rect_integral(state.i.values, grid)
    removed = n0 - state.s - state.v - e_tot - a_tot - i_tot
    return Aggregates(e_tot, a_tot, i_tot, removed, n0)


class _Precomputed:
    """Step-invariant arrays and scalars of the explicit scheme."""

    def __init__(self, params: ParameterSet):
        grid = params.grid
        h = grid.h
        worst = max(
            float(params.exit_rate_e.max()),
            float(params.exit_rate_a.max()),
            float(params.exit_rate_i.max()),
        )
        if h * worst >= 1.0:
            raise StabilityError(
                f"h * max exit rate = {h * worst:.3g} >= 1; "
                f"reduce h below {1.0 / worst:.3g} days"
            )
        self.grid = grid
        self.h = h
        # Decay factors for the shift e^{n+1}[j+1] = e^n[j] * (1 - h*rate[j]),
        # already restricted to the source nodes j <= J-1.
        self.decay_e = (1.0 - h * params.exit_rate_e)[:-1]
        self.decay_a = (1.0 - h * params.exit_rate_a)[:-1]
        self.decay_i = (1.0 - h * params.exit_rate_i)[:-1]
        self.beta_a = params.beta_a.values
        self.beta_i = params.beta_i.values
        self.kq = params.k.values * params.q.values
        self.k1q = params.k.values * (1.0 - params.q.values)
        self.chi_branch = params.chi.values * (1.0 - params.xi.values)
        self.recov_a = params.gamma_a.values * params.xi.values
        self.recov_i = params.gamma_i.values
        self.mu = params.mu
        self.mu_n0 = params.mu * params.n0
        self.p = params.p
        self.zeta_eps = params.zeta * params.epsilon
        self.one_minus_eps = 1.0 - params.epsilon

    def functionals(self, s, v, e, a, i):
        """(beta, eps, alpha, iota) of raw state arrays."""
        h = self.h
        beta = h * (self.beta_a @ a + self.beta_i @ i)
        eps = beta * (s + self.one_minus_eps * v)
        alpha = h * (self.kq @ e)
        iota = h * (self.k1q @ e + self.chi_branch @ a)
        return beta, eps, alpha, iota


class _ClampCounter:
    __slots__ = ("events", "mass")

    def __init__(self):
        self.events = 0
        self.mass = 0.0

    def scalar(self, value: float) -> float:
        if value < 0.0:
            self.events += 1
            self.mass += -value
            return 0.0
        return value

    def arrays(self, h: float, *arrays: np.ndarray) -> None:
        for arr in arrays:
            neg = arr < 0.0
            if neg.any():
                self.events += int(neg.sum())
                self.mass += -h * float(arr[neg].sum())
                arr[neg] = 0.0


def _advance(pre: _Precomputed, s, v, e, a, i, out_e, out_a, out_i, clamps):
    """One explicit step from raw arrays into the out buffers.

    Returns (s_next, v_next, phi_v); phi_v is the V outflow limiter factor
    (1.0 when unlimited), which the caller's explicit recovered-compartment
    update needs to scale the vaccine-immunity inflow consistently.
    """
    beta, _, alpha, iota = pre.functionals(s, v, e, a, i)
    h = pre.h
    rate_s = pre.p + beta + pre.mu
    rate_v = pre.zeta_eps + beta * pre.one_minus_eps + pre.mu
    phi_s = phi_v = 1.0
    if h * rate_s > 1.0:
        phi_s = 1.0 / (h * rate_s)
        clamps.events += 1
        clamps.mass += (1.0 - phi_s) * h * rate_s * s
    if h * rate_v > 1.0:
        phi_v = 1.0 / (h * rate_v)
        clamps.events += 1
        clamps.mass += (1.0 - phi_v) * h * rate_v * v
    eps = beta * (phi_s * s + pre.one_minus_eps * phi_v * v)
    s_next = s * (1.0 - h * phi_s * rate_s) + h * pre.mu_n0
    v_next = v * (1.0 - h * phi_v * rate_v) + h * phi_s * pre.p * s
    s_next = clamps.scalar(s_next)
    v_next = clamps.scalar(v_next)
    np.multiply(e[:-1], pre.decay_e, out=out_e[1:])
    np.multiply(a[:-1], pre.decay_a, out=out_a[1:])
    np.multiply(i[:-1], pre.decay_i, out=out_i[1:])
    out_e[0] = eps
    out_a[0] = alpha
    out_i[0] = iota
    return s_next, v_next, phi_v


def step(state: State, params: ParameterSet) -> State:
    """Advance one step of size h = grid.h (pure; allocates a new State)."""
    pre = _Precomputed(params)
    grid = params.grid
    out_e = np.empty(grid.n_nodes)
    out_a = np.empty(grid.n_nodes)
    out_i = np.empty(grid.n_nodes)
    clamps = _ClampCounter()
    s_next, v_next, _ = _advance(
        pre, state.s, state.v, state.e.values, state.a.values, state.i.values,
        out_e, out_a, out_i, clamps,
    )
    return State(
        t=state.t + grid.h,
        s=s_next,
        v=v_next,
        e=AgeProfile(grid, out_e, Units.DENSITY),
        a=AgeProfile(grid, out_a, Units.DENSITY),
        i=AgeProfile(grid, out_i, Units.DENSITY),
    )


def simulate(
    init: State,
    params: ParameterSet,
    t_max: float,
    sample_every: float = 1.0,
    snapshot_times: Sequence[float] = (),
    observer=None,
) -> SimulationResult:
    """Run the explicit scheme over [init.t, init.t + t_max].

    Args:
        init: Initial state on the parameter grid.
        params: Model parameters.
        t_max: Run length in days; the step count is round(t_max / h).
        sample_every: Aggregate-recording interval (a multiple of h).
        snapshot_times: Times (relative to init.t) at which to capture the
            full age densities; matched to the nearest step within h/2.
        observer: Optional callable invoked at every sample as
            observer(t, s, v, e, a, i) with the raw density arrays (views
            into the step buffers; do not mutate or retain them).

    Returns:
        SimulationResult with the sampled TimeSeries, final State, and the
        clamp counters.

    Raises:
        StabilityError: at setup when h * max exit rate >= 1.
        AbortedRunError: when a non-finite value appears; carries the step.
    """
    if t_max <= 0:
        raise ParameterError(f"t_max must be positive, got {t_max}")
    if init.e.grid != params.grid:
        raise ParameterError("initial state is not on the parameter grid")
    pre = _Precomputed(params)
    h = pre.h
    n_steps = int(round(t_max / h))
    stride = max(1, int(round(sample_every / h)))
    snap_steps = {int(round(ts / h)) for ts in snapshot_times}

    e = init.e.values.copy()
    a = init.a.values.copy()
    i = init.i.values.copy()
    s, v = init.s, init.v

    samples: list[tuple] = []
    snapshots: list[DensitySnapshot] = []
    clamps = _ClampCounter()
    nodes = params.grid.nodes

    e_next = np.empty_like(e)
    a_next = np.empty_like(a)
    i_next = np.empty_like(i)

    r_tilde = None
    for n in range(n_steps + 1):
        t = init.t + n * h
        beta, eps, alpha, iota = pre.functionals(s, v, e, a, i)
        if not (math.isfinite(beta) and math.isfinite(alpha) and math.isfinite(iota)
                and math.isfinite(s) and math.isfinite(v)):
            raise AbortedRunError(f"non-finite value at step {n} (t={t})", step_index=n)
        if n % stride == 0 or n == n_steps:
            clamps.arrays(h, e, a, i)
            e_tot = h * float(e.sum())
            a_tot = h * float(a.sum())
            i_tot = h * float(i.sum())
            if r_tilde is None:
                # Initial recovered mass: population minus the modeled pools.
                r_tilde = params.n0 - s - v - e_tot - a_tot - i_tot
            removed = params.n0 - s - v - e_tot - a_tot - i_tot
            samples.append(
                (t, s, v, e_tot, a_tot, i_tot, removed, params.n0,
                 beta, eps, alpha, iota, r_tilde)
            )
            if observer is not None:
                observer(t, s, v, e, a, i)
        if n in snap_steps:
            snapshots.append(
                DensitySnapshot(t=t, theta=nodes.copy(), e=e.copy(), a=a.copy(), i=i.copy())
            )
        if n == n_steps:
            break
        # Explicit recovered-compartment integration (conservation diagnostic);
        # the vaccine-immunity inflow honors the V outflow limiter.
        recov_flux = h * (pre.recov_a @ a + pre.recov_i @ i)
        s_new, v_new, phi_v = _advance(pre, s, v, e, a, i, e_next, a_next, i_next, clamps)
        r_tilde = r_tilde + h * (pre.zeta_eps * phi_v * v + recov_flux - pre.mu * r_tilde)
        s, v = s_new, v_new
        e, e_next = e_next, e
        a, a_next = a_next, a
        i, i_next = i_next, i

    cols = np.array(samples, dtype=np.float64).T
    timeseries = TimeSeries(
        t=cols[0], s=cols[1], v=cols[2], e=cols[3], a=cols[4], i=cols[5],
        r=cols[6], n=cols[7], beta=cols[8], eps=cols[9], alpha=cols[10],
        iota=cols[11], r_tilde=cols[12], snapshots=snapshots,
    )
    final_state = State(
        t=init.t + n_steps * h,
        s=s,
        v=v,
        e=AgeProfile(params.grid, e, Units.DENSITY),
        a=AgeProfile(params.grid, a, Units.DENSITY),
        i=AgeProfile(params.grid, i, Units.DENSITY),
    )
    return SimulationResult(
        timeseries=timeseries,
        final_state=final_state,
        clamp_events=clamps.events,
        clamped_mass=clamps.mass,
    )
