"""Model parameter container and the three compartment exit rates."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from sveair.errors import ParameterError
from sveair.grid import AgeGrid, AgeProfile, Units


@dataclass(frozen=True, eq=False)
class ParameterSet:
    """All scalar and age-dependent model parameters.

    Scalars: population size n0, birth/death rate mu (the only parameter
    required to be strictly positive), vaccination rate p, vaccine
    effectiveness epsilon in [0, 1], vaccine-induced immunity rate zeta, and
    the age-unit conversion factor omega (documentation only; the engine
    runs the scaled system, so bundled profiles are already in days and
    omega = 1 operationally).

    Age profiles, all on one shared grid: transmission rates beta_a/beta_i,
    latent-exit rate k, asymptomatic proportion q, never-symptomatic
    proportion xi, symptomatic-transition rate chi, recovery rates
    gamma_a/gamma_i.
    """

    n0: float
    mu: float
    p: float
    epsilon: float
    zeta: float
    beta_a: AgeProfile
    beta_i: AgeProfile
    k: AgeProfile
    q: AgeProfile
    xi: AgeProfile
    chi: AgeProfile
    gamma_a: AgeProfile
    gamma_i: AgeProfile
    omega: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError(f"mu must be strictly positive, got {self.mu}")
        for name in ("n0", "p", "zeta", "omega"):
            value = getattr(self, name)
            if not value >= 0:
                raise ParameterError(f"{name} must be nonnegative, got {value}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ParameterError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        for name in ("q", "xi"):
            if getattr(self, name).units is not Units.PROPORTION:
                raise ParameterError(f"{name} must be a proportion profile")
        for name in ("k", "chi", "gamma_a", "gamma_i"):
            if getattr(self, name).units is not Units.RATE:
                raise ParameterError(f"{name} must be a rate profile")
        for name in ("beta_a", "beta_i"):
            if getattr(self, name).units is not Units.TRANSMISSION:
                raise ParameterError(f"{name} must be a transmission profile")
        grid = self.beta_a.grid
        for name in ("beta_i", "k", "q", "xi", "chi", "gamma_a", "gamma_i"):
            if getattr(self, name).grid != grid:
                raise ParameterError(f"profile {name} is not on the shared grid")

    @property
    def grid(self) -> AgeGrid:
        return self.beta_a.grid

    # The three exit rates of the transport equations (death rate included).

    @cached_property
    def exit_rate_e(self) -> np.ndarray:
        """Latent compartment: k + mu."""
        return self.k.values + self.mu

    @cached_property
    def exit_rate_a(self) -> np.ndarray:
        """Asymptomatic compartment: gamma_a*xi + chi*(1-xi) + mu."""
        xi = self.xi.values
        return self.gamma_a.values * xi + self.chi.values * (1.0 - xi) + self.mu

    @cached_property
    def exit_rate_i(self) -> np.ndarray:
        """Symptomatic compartment: gamma_i + mu."""
        return self.gamma_i.values + self.mu
