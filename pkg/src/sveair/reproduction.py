"""Basic reproduction number and closed-form steady states.

R0 factorizes as prefactor * (R_A + R_I): the prefactor is the effective
susceptible pool at the disease-free state, R_A the expected transmission
routed through the asymptomatic stage, and R_I the symptomatic counterpart
(direct latent->symptomatic plus the latent->asymptomatic->symptomatic
route). The endemic force of infection beta* is the positive root of a
quadratic whose constant term changes sign exactly at R0 = 1.

All quadratures are the shared rectangle rule on the parameter grid, so the
assembled steady state reproduces its own boundary functionals to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from sveair.errors import ParameterError
from sveair.grid import AgeProfile, Units, rect_integral, survival
from sveair.params import ParameterSet

# R0 within this distance of 1 is treated as the subcritical case (beta*=0).
R0_UNITY_TIE = 1e-12

DISEASE_FREE = "disease-free"
ENDEMIC = "endemic"


@dataclass(frozen=True)
class R0Breakdown:
    """R0 and its factors; r0 = prefactor * (r_a + r_i) by construction."""

    r_a: float
    r_i: float
    prefactor: float
    r0: float
    truncation_tail: float  # bound on the relative mass ignored beyond theta_max


@dataclass(frozen=True, eq=False)
class SteadyState:
    """One steady state: scalars, boundary densities, and age profiles."""

    s_star: float
    v_star: float
    beta_star: float
    eps_star: float
    alpha_star: float
    iota_star: float
    e_star: AgeProfile
    a_star: AgeProfile
    i_star: AgeProfile
    kind: str  # DISEASE_FREE or ENDEMIC


@dataclass(frozen=True, eq=False)
class _Kernels:
    """Survival factors and the reusable quadrature building blocks."""

    surv_e: AgeProfile
    surv_a: AgeProfile
    surv_i: AgeProfile
    latent_to_asym: float    # integral of k q * surv_e
    latent_to_symp: float    # integral of k (1-q) * surv_e
    asym_to_symp: float      # integral of chi (1-xi) * surv_a
    infectivity_a: float     # integral of beta_a * surv_a
    infectivity_i: float     # integral of beta_i * surv_i


def kernels(params: ParameterSet) -> _Kernels:
    """Compute the five quadrature blocks shared by R0 and the steady state."""
    grid = params.grid
    surv_e = survival(params.k, params.mu, grid)
    rate_a = AgeProfile(grid, params.exit_rate_a - params.mu, Units.RATE)
    surv_a = survival(rate_a, params.mu, grid)
    surv_i = survival(params.gamma_i, params.mu, grid)
    kq = params.k.values * params.q.values
    chi_branch = params.chi.values * (1.0 - params.xi.values)
    return _Kernels(
        surv_e=surv_e,
        surv_a=surv_a,
        surv_i=surv_i,
        latent_to_asym=rect_integral(kq * surv_e.values, grid),
        latent_to_symp=rect_integral(
            params.k.values * (1.0 - params.q.values) * surv_e.values, grid
        ),
        asym_to_symp=rect_integral(chi_branch * surv_a.values, grid),
        infectivity_a=rect_integral(params.beta_a.values * surv_a.values, grid),
        infectivity_i=rect_integral(params.beta_i.values * surv_i.values, grid),
    )


def compute_RA(params: ParameterSet, blocks: _Kernels | None = None) -> float:
    """Asymptomatic-route reproduction factor."""
    blocks = kernels(params) if blocks is None else blocks
    return blocks.latent_to_asym * blocks.infectivity_a


def compute_RI(params: ParameterSet, blocks: _Kernels | None = None) -> float:
    """Symptomatic-route reproduction factor (direct plus via-asymptomatic)."""
    blocks = kernels(params) if blocks is None else blocks
    bracket = blocks.latent_to_symp + blocks.latent_to_asym * blocks.asym_to_symp
    return bracket * blocks.infectivity_i


def r0_prefactor(params: ParameterSet) -> float:
    """Effective susceptible pool at the disease-free state."""
    veff = 1.0 + params.p * (1.0 - params.epsilon) / (params.zeta * params.epsilon + params.mu)
    return params.mu * params.n0 / (params.p + params.mu) * veff


def compute_R0(params: ParameterSet, blocks: _Kernels | None = None) -> R0Breakdown:
    """R0 with its factors and the theta_max truncation bound.

    The truncated tails of all reproduction integrals are bounded relative
    to the computed values by exp(-mu * theta_max) (every integrand carries
    at least the demographic survival factor).
    """
    blocks = kernels(params) if blocks is None else blocks
    r_a = compute_RA(params, blocks)
    r_i = compute_RI(params, blocks)
    prefactor = r0_prefactor(params)
    tail = math.exp(-params.mu * params.grid.theta_max)
    return R0Breakdown(
        r_a=r_a, r_i=r_i, prefactor=prefactor, r0=prefactor * (r_a + r_i),
        truncation_tail=tail,
    )


def quadratic_coefficients(params: ParameterSet, r_sum: float) -> tuple[float, float, float]:
    """Coefficients (b2, b1, b0) of the endemic fixed-point quadratic.

    b0 is proportional to (1 - R0), so b0 < 0 exactly when R0 > 1.
    """
    eps = params.epsilon
    p, mu, zeta = params.p, params.mu, params.zeta
    mun_r = mu * params.n0 * r_sum
    b2 = 1.0 - eps
    b1 = (p + mu) * (1.0 - eps) + zeta * eps + mu - mun_r * (1.0 - eps)
    r0 = mun_r / (p + mu) * (1.0 + p * (1.0 - eps) / (zeta * eps + mu))
    b0 = (p + mu) * (eps * zeta + mu) * (1.0 - r0)
    return b2, b1, b0


def solve_beta_star(params: ParameterSet, blocks: _Kernels | None = None) -> float:
    """Endemic force of infection: positive quadratic root, or 0 when R0 <= 1.

    For epsilon = 1 the quadratic degenerates to the linear equation with
    root -b0/b1. The quadratic is solved in the cancellation-free form and
    the nonpositive root discarded.
    """
    blocks = kernels(params) if blocks is None else blocks
    breakdown = compute_R0(params, blocks)
    if breakdown.r0 <= 1.0 + R0_UNITY_TIE:
        return 0.0
    b2, b1, b0 = quadratic_coefficients(params, breakdown.r_a + breakdown.r_i)
    if b2 == 0.0:
        # epsilon = 1: b1 > 0 and b0 < 0 here.
        return -b0 / b1
    disc = b1 * b1 - 4.0 * b2 * b0
    sqrt_disc = math.sqrt(disc)
    qform = -0.5 * (b1 + math.copysign(sqrt_disc, b1)) if b1 != 0.0 else 0.5 * sqrt_disc
    roots = [r for r in (qform / b2, b0 / qform if qform != 0.0 else -b1 / b2) if r > 0.0]
    if not roots:
        raise ParameterError("no positive root found although R0 > 1")
    return max(roots)


def steady_state(params: ParameterSet, beta_star: float) -> SteadyState:
    """Assemble the steady state for a given beta* (0 gives the DFE).

    Components follow the closed forms: S* and V* from the balance
    equations, boundary densities from the renewal functionals, and the age
    profiles as boundary value times survival factor.
    """
    if beta_star < 0:
        raise ParameterError(f"beta_star must be nonnegative, got {beta_star}")
    blocks = kernels(params)
    eps, p, mu, zeta = params.epsilon, params.p, params.mu, params.zeta
    s_star = mu * params.n0 / (p + beta_star + mu)
    v_star = p * s_star / (zeta * eps + beta_star * (1.0 - eps) + mu)
    eps_star = beta_star * (s_star + (1.0 - eps) * v_star)
    alpha_star = eps_star * blocks.latent_to_asym
    iota_star = eps_star * blocks.latent_to_symp + alpha_star * blocks.asym_to_symp
    grid = params.grid
    return SteadyState(
        s_star=s_star,
        v_star=v_star,
        beta_star=beta_star,
        eps_star=eps_star,
        alpha_star=alpha_star,
        iota_star=iota_star,
        e_star=AgeProfile(grid, eps_star * blocks.surv_e.values, Units.DENSITY),
        a_star=AgeProfile(grid, alpha_star * blocks.surv_a.values, Units.DENSITY),
        i_star=AgeProfile(grid, iota_star * blocks.surv_i.values, Units.DENSITY),
        kind=ENDEMIC if beta_star > 0 else DISEASE_FREE,
    )


def matching_steady_state(params: ParameterSet) -> tuple[R0Breakdown, SteadyState]:
    """R0 breakdown plus the globally attracting steady state for params."""
    blocks = kernels(params)
    breakdown = compute_R0(params, blocks)
    beta_star = solve_beta_star(params, blocks)
    return breakdown, steady_state(params, beta_star)
