"""Lyapunov functions and convergence/conservation metrics.

The stability certificates become runnable checks: the weight profiles
f_e, f_a, f_i are the tail integrals that cancel the transport terms, the
disease-free Lyapunov function is linear in the densities, the endemic one
integrates x - 1 - ln(x) of the density ratios against steady-state tail
masses, and monotonicity of a sampled Lyapunov series is asserted up to a
tolerance tied to its magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sveair.errors import LyapunovDomainError, ParameterError
from sveair.grid import AgeGrid, rect_integral
from sveair.params import ParameterSet
from sveair.reproduction import DISEASE_FREE, ENDEMIC, SteadyState
from sveair.solver import State, boundary_values, force_of_infection, simulate

# Steady densities below this are excluded from ratio integrands; their
# tail weights vanish with them.
STEADY_DENSITY_FLOOR = 1e-300


def entropy_f(x):
    """f(x) = x - 1 - ln(x); nonnegative on (0, inf), zero only at 1."""
    return x - 1.0 - np.log(x)


@dataclass(frozen=True, eq=False)
class LyapunovWeights:
    """Tail-integral weight profiles (dimensionless, unbounded above, so
    carried as raw arrays rather than range-checked AgeProfiles)."""

    grid: AgeGrid
    f_e: np.ndarray
    f_a: np.ndarray
    f_i: np.ndarray
    f_a0: float
    f_i0: float


def _backward_tail(source: np.ndarray, rates: np.ndarray, h: float) -> np.ndarray:
    """F[j] = h*src[j] + exp(-h*rate[j]) * F[j+1], F beyond the last node 0.

    Discretizes F(theta) = integral_theta^theta_max src(s) *
    exp(-integral_theta^s rate) ds with the survival primitive's
    exponential factors, so F[0] equals the rectangle quadrature of
    src * survival exactly.
    """
    n = source.shape[0]
    out = np.empty(n)
    acc = 0.0
    decay = np.exp(-h * rates)
    for j in range(n - 1, -1, -1):
        acc = h * source[j] + decay[j] * acc
        out[j] = acc
    return out


def lyapunov_weights(params: ParameterSet, steady: SteadyState) -> LyapunovWeights:
    """Weight profiles for the Lyapunov functions at a given steady state.

    f_i depends only on the transmission and recovery structure; f_a folds
    in the asymptomatic-to-symptomatic route via f_i(0); f_e feeds both
    routes with f_a(0) and f_i(0) as coefficients.
    """
    grid = params.grid
    h = grid.h
    pool = steady.s_star + (1.0 - params.epsilon) * steady.v_star
    f_i = _backward_tail(pool * params.beta_i.values, params.exit_rate_i, h)
    f_i0 = float(f_i[0])
    chi_branch = params.chi.values * (1.0 - params.xi.values)
    f_a = _backward_tail(
        pool * params.beta_a.values + f_i0 * chi_branch, params.exit_rate_a, h
    )
    f_a0 = float(f_a[0])
    kv, qv = params.k.values, params.q.values
    f_e = _backward_tail(f_a0 * kv * qv + f_i0 * kv * (1.0 - qv), params.exit_rate_e, h)
    return LyapunovWeights(grid=grid, f_e=f_e, f_a=f_a, f_i=f_i, f_a0=f_a0, f_i0=f_i0)


def _scalar_part(s: float, v: float, steady: SteadyState) -> float:
    if s <= 0.0 or v <= 0.0:
        raise LyapunovDomainError(f"S and V must be positive, got S={s}, V={v}")
    return steady.s_star * entropy_f(s / steady.s_star) + steady.v_star * entropy_f(
        v / steady.v_star
    )


def _dfe_value(s, v, e, a, i, steady, weights) -> float:
    grid = weights.grid
    total = _scalar_part(s, v, steady)
    total += rect_integral(weights.f_e * e, grid)
    total += rect_integral(weights.f_a * a, grid)
    total += rect_integral(weights.f_i * i, grid)
    return total


def lyapunov_dfe(state: State, steady: SteadyState, weights: LyapunovWeights) -> float:
    """Disease-free Lyapunov value: entropy terms in S, V plus the
    weight-profile integrals, linear in the densities."""
    if steady.kind != DISEASE_FREE:
        raise ParameterError("lyapunov_dfe needs the disease-free steady state")
    return _dfe_value(
        state.s, state.v, state.e.values, state.a.values, state.i.values,
        steady, weights,
    )


@dataclass(frozen=True, eq=False)
class EndemicTailWeights:
    """Steady-state tail masses weighting the density-ratio integrands."""

    w_e_asym: np.ndarray   # tail of k q e*
    w_e_symp: np.ndarray   # tail of k (1-q) e*
    w_a_beta: np.ndarray   # tail of beta_a a*
    w_a_chi: np.ndarray    # tail of chi (1-xi) a*
    w_i_beta: np.ndarray   # tail of beta_i i*


def endemic_tail_weights(params: ParameterSet, steady: SteadyState) -> EndemicTailWeights:
    """Reversed cumulative rectangle sums of the steady-state integrands."""
    h = params.grid.h

    def tail(values: np.ndarray) -> np.ndarray:
        return h * np.cumsum(values[::-1])[::-1]

    kv, qv = params.k.values, params.q.values
    chi_branch = params.chi.values * (1.0 - params.xi.values)
    return EndemicTailWeights(
        w_e_asym=tail(kv * qv * steady.e_star.values),
        w_e_symp=tail(kv * (1.0 - qv) * steady.e_star.values),
        w_a_beta=tail(params.beta_a.values * steady.a_star.values),
        w_a_chi=tail(chi_branch * steady.a_star.values),
        w_i_beta=tail(params.beta_i.values * steady.i_star.values),
    )


def _ratio_term(
    weight: np.ndarray, state_values: np.ndarray, steady_values: np.ndarray, h: float
) -> float:
    mask = (steady_values >= STEADY_DENSITY_FLOOR) & (weight > 0.0)
    if not mask.any():
        return 0.0
    dens = state_values[mask]
    if dens.min() <= 0.0:
        raise LyapunovDomainError(
            "state density is nonpositive at a weighted node; the endemic "
            "Lyapunov function is infinite there (seed strictly positive "
            "densities, e.g. steady-scaled initial data)"
        )
    return h * float(weight[mask] @ entropy_f(dens / steady_values[mask]))


def _endemic_value(s, v, e, a, i, steady, weights, params, tails) -> float:
    h = params.grid.h
    pool = steady.s_star + (1.0 - params.epsilon) * steady.v_star
    total = _scalar_part(s, v, steady)
    total += _ratio_term(
        weights.f_a0 * tails.w_e_asym + weights.f_i0 * tails.w_e_symp,
        e, steady.e_star.values, h,
    )
    total += _ratio_term(
        pool * tails.w_a_beta + weights.f_i0 * tails.w_a_chi,
        a, steady.a_star.values, h,
    )
    total += _ratio_term(pool * tails.w_i_beta, i, steady.i_star.values, h)
    return total


def lyapunov_endemic(
    state: State,
    steady: SteadyState,
    weights: LyapunovWeights,
    params: ParameterSet,
    tails: EndemicTailWeights | None = None,
) -> float:
    """Endemic Lyapunov value: entropy terms in S, V plus tail-weighted
    integrals of f(density / steady density).

    Nodes where the steady density underflows are excluded together with
    their vanishing weights. A nonpositive state density at a node that
    still carries weight raises LyapunovDomainError.
    """
    if steady.kind != ENDEMIC:
        raise ParameterError("lyapunov_endemic needs the endemic steady state")
    tails = endemic_tail_weights(params, steady) if tails is None else tails
    return _endemic_value(
        state.s, state.v, state.e.values, state.a.values, state.i.values,
        steady, weights, params, tails,
    )


def discrete_fixed_point(
    params: ParameterSet,
    steady: SteadyState,
    t_relax: float = 3000.0,
) -> SteadyState:
    """Relax the endemic steady state under the solver to its discrete twin.

    The closed-form steady state carries the quadrature's O(h) bias, so the
    explicit scheme drifts away from it toward the scheme's own fixed
    point; Lyapunov monotonicity about anything but that attractor measures
    the bias, not stability. Running the solver from the closed form for a
    few relaxation times lands on the attractor to round-off.
    """
    if steady.kind != ENDEMIC:
        raise ParameterError("discrete_fixed_point expects the endemic steady state")
    init = State(
        t=0.0, s=steady.s_star, v=steady.v_star,
        e=steady.e_star, a=steady.a_star, i=steady.i_star,
    )
    result = simulate(init, params, t_max=t_relax, sample_every=t_relax)
    final = result.final_state
    bounds = boundary_values(final, params)
    return SteadyState(
        s_star=final.s,
        v_star=final.v,
        beta_star=force_of_infection(final, params),
        eps_star=bounds.eps,
        alpha_star=bounds.alpha,
        iota_star=bounds.iota,
        e_star=final.e,
        a_star=final.a,
        i_star=final.i,
        kind=ENDEMIC,
    )


def monitor_lyapunov(
    init: State,
    params: ParameterSet,
    steady: SteadyState,
    t_max: float,
    sample_every: float = 1.0,
    weights: LyapunovWeights | None = None,
):
    """Run the solver and evaluate the matching Lyapunov function per sample.

    Uses the disease-free function for a disease-free steady state and the
    endemic one otherwise (the latter requires strictly positive densities
    wherever the steady densities are representable).

    Returns:
        (times, values, SimulationResult) with values[i] = L at times[i].
    """
    if weights is None:
        weights = lyapunov_weights(params, steady)
    tails = None
    if steady.kind == ENDEMIC:
        tails = endemic_tail_weights(params, steady)
    times: list[float] = []
    values: list[float] = []

    def observer(t, s, v, e, a, i):
        if steady.kind == ENDEMIC:
            value = _endemic_value(s, v, e, a, i, steady, weights, params, tails)
        else:
            value = _dfe_value(s, v, e, a, i, steady, weights)
        times.append(t)
        values.append(value)

    result = simulate(init, params, t_max, sample_every=sample_every, observer=observer)
    return np.asarray(times), np.asarray(values), result


@dataclass(frozen=True)
class MonotonicityReport:
    """Strict-increase count of a sampled Lyapunov series."""

    n_violations: int
    tol: float
    intervals: tuple  # (index, t_left, t_right, increase) per violation

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def monotonicity_check(
    l_values,
    times=None,
    tol: float | None = None,
) -> MonotonicityReport:
    """Count increases of L beyond tol = 1e-8 * max finite L (default).

    Infinite values compare as in the extended reals: inf -> inf and
    inf -> finite are nonincreasing, finite -> inf is a violation. NaN
    samples are always flagged.
    """
    l_arr = np.asarray(l_values, dtype=np.float64)
    t_arr = np.arange(l_arr.size, dtype=np.float64) if times is None else np.asarray(times)
    finite = l_arr[np.isfinite(l_arr)]
    if tol is None:
        tol = 1e-8 * float(finite.max()) if finite.size else 0.0
    intervals = []
    for idx in range(l_arr.size - 1):
        left, right = l_arr[idx], l_arr[idx + 1]
        if math.isnan(left) or math.isnan(right):
            intervals.append((idx, float(t_arr[idx]), float(t_arr[idx + 1]), math.nan))
            continue
        if math.isinf(left):
            continue  # inf -> anything is nonincreasing
        if right - left > tol:
            intervals.append((idx, float(t_arr[idx]), float(t_arr[idx + 1]), right - left))
    return MonotonicityReport(
        n_violations=len(intervals), tol=float(tol), intervals=tuple(intervals)
    )


def convergence_metric(state: State, steady: SteadyState, n0: float) -> float:
    """Distance to a steady state: scalar gaps plus L1 density gaps, over N0."""
    grid = state.e.grid
    total = abs(state.s - steady.s_star) + abs(state.v - steady.v_star)
    total += rect_integral(np.abs(state.e.values - steady.e_star.values), grid)
    total += rect_integral(np.abs(state.a.values - steady.a_star.values), grid)
    total += rect_integral(np.abs(state.i.values - steady.i_star.values), grid)
    return total / n0
