"""Age mesh, sampled age profiles, and the exponential-survival primitive.

Everything downstream shares one uniform age grid with nodes theta_j = j*h;
the time stepper reuses the same h so the upwind stencil sits on
characteristics. Integrals over age are the rectangle sums h * sum(g_j u_j)
over all nodes, and cumulative hazards use the left-rectangle rule, so the
survival factor of a constant rate r is exactly exp(-r * j * h).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from sveair.errors import InvalidGridError, ProfileError

# Grid nodes within this many days of a step-table breakpoint are treated as
# sitting exactly on it (right-closed semantics); h is always >> this.
_BREAKPOINT_SNAP = 1e-6


class Units(enum.Enum):
    """Unit tag of an age profile, fixing its admissible value range."""

    RATE = "per-day"                    # >= 0
    PROPORTION = "dimensionless"        # in [0, 1]
    DENSITY = "individuals-per-day"     # >= 0
    TRANSMISSION = "per-individual-per-day"  # >= 0


@dataclass(frozen=True)
class AgeGrid:
    """Uniform age mesh with nodes theta_j = j*h for j = 0 .. n_nodes-1."""

    h: float
    theta_max: float
    n_nodes: int

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidGridError(f"step size must be positive, got h={self.h}")
        if not (self.theta_max > 0 and math.isfinite(self.theta_max)):
            raise InvalidGridError(f"theta_max must be positive, got {self.theta_max}")
        if self.n_nodes < 1:
            raise InvalidGridError(f"grid needs at least one node, got {self.n_nodes}")


def build_grid(h: float, theta_max: float) -> AgeGrid:
    """Build the uniform age mesh on [0, theta_max] with step h.

    Args:
        h: Step size in days (also the time step downstream).
        theta_max: Maximum age in days; must be at least h.

    Returns:
        AgeGrid with n_nodes = floor(theta_max/h) + 1.
    """
    if not (isinstance(h, (int, float)) and math.isfinite(h)) or h <= 0:
        raise InvalidGridError(f"step size must be positive and finite, got h={h}")
    if not math.isfinite(theta_max) or theta_max < h:
        raise InvalidGridError(
            f"theta_max must be at least one step, got theta_max={theta_max}, h={h}"
        )
    # Tolerate float division falling a hair short of an integer node count.
    n_nodes = int(math.floor(theta_max / h + 1e-9)) + 1
    return AgeGrid(h=float(h), theta_max=float(theta_max), n_nodes=n_nodes)


_RANGE_CHECKS = {
    Units.RATE: (0.0, math.inf),
    Units.PROPORTION: (0.0, 1.0),
    Units.DENSITY: (0.0, math.inf),
    Units.TRANSMISSION: (0.0, math.inf),
}


@dataclass(frozen=True, eq=False)
class AgeProfile:
    """A sampled function of age on a shared AgeGrid.

    Values are snapshot to a read-only float64 array and validated against
    the unit's range on construction.
    """

    grid: AgeGrid
    values: np.ndarray = field(repr=False)
    units: Units

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.n_nodes,):
            raise ProfileError(
                f"profile has {values.shape} values for a grid of {self.grid.n_nodes} nodes"
            )
        if not np.isfinite(values).all():
            raise ProfileError("profile contains non-finite values")
        lo, hi = _RANGE_CHECKS[self.units]
        if values.min(initial=lo) < lo or values.max(initial=hi) > hi:
            raise ProfileError(
                f"{self.units.name.lower()} profile out of range [{lo}, {hi}]: "
                f"min={values.min()}, max={values.max()}"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray, units: Units | None = None) -> "AgeProfile":
        """New profile on the same grid."""
        return AgeProfile(self.grid, values, self.units if units is None else units)


def constant_profile(grid: AgeGrid, value: float, units: Units) -> AgeProfile:
    """Profile equal to `value` at every node."""
    return AgeProfile(grid, np.full(grid.n_nodes, float(value)), units)


def rect_integral(values: np.ndarray, grid: AgeGrid) -> float:
    """Rectangle quadrature h * sum over all nodes (the scheme's rule)."""
    return grid.h * float(np.sum(values))


def sample_step_function(
    breakpoints,
    values,
    grid: AgeGrid,
    units: Units,
) -> AgeProfile:
    """Sample a piecewise-constant table onto the grid.

    `values[i]` applies on [breakpoints[i-1], breakpoints[i]); the final
    value applies from the last breakpoint onward. Intervals are
    right-closed at breakpoints: a node equal to b_i takes the value of the
    interval starting at b_i.

    Args:
        breakpoints: Strictly ascending interior breakpoints (may be empty).
        values: One value per interval, len(breakpoints) + 1 of them.
        grid: Target mesh.
        units: Unit tag; values must satisfy its range.
    """
    breakpoints = np.asarray(breakpoints, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if breakpoints.ndim != 1 or values.ndim != 1:
        raise ProfileError("breakpoints and values must be one-dimensional")
    if breakpoints.size and np.any(np.diff(breakpoints) <= 0):
        raise ProfileError("breakpoints must be strictly ascending")
    if values.size != breakpoints.size + 1:
        raise ProfileError(
            f"need {breakpoints.size + 1} interval values, got {values.size}"
        )
    idx = np.searchsorted(breakpoints, grid.nodes + _BREAKPOINT_SNAP, side="right")
    return AgeProfile(grid, values[idx], units)


def sample_contact(
    center_age: float,
    mean_contacts: float,
    width: float,
    grid: AgeGrid,
) -> AgeProfile:
    """Gaussian contact bump normalized to a prescribed grid-average.

    Returns c(theta) = K * exp(-((theta - center_age)/width)^2) with K fixed
    so the rectangle-rule grid average of c over [0, theta_max] equals
    mean_contacts.

    Args:
        center_age: Age of peak contact activity (days).
        mean_contacts: Target average contacts per day over the grid.
        width: Gaussian width parameter (days).
    """
    if width <= 0:
        raise ProfileError(f"width must be positive, got {width}")
    if mean_contacts <= 0:
        raise ProfileError(f"mean_contacts must be positive, got {mean_contacts}")
    if grid.n_nodes < 2:
        raise InvalidGridError("contact sampling needs a grid with at least two nodes")
    bump = np.exp(-(((grid.nodes - center_age) / width) ** 2))
    scale = mean_contacts / float(np.mean(bump))
    return AgeProfile(grid, scale * bump, Units.RATE)


def load_profile_csv(path, grid: AgeGrid, units: Units) -> AgeProfile:
    """Load a two-column `age_days,value` CSV and interpolate onto the grid.

    Linear interpolation between data points; constant extrapolation beyond
    the data range. A leading `age_days,value` header row is accepted.

    Args:
        path: CSV file path (UTF-8, comma-separated, '.' decimal point,
            LF or CRLF line endings).
        grid: Target mesh.
        units: Unit tag; interpolated values must satisfy its range.
    """
    ages: list[float] = []
    vals: list[float] = []
    try:
        handle = open(path, "r", encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise ProfileError(f"cannot read profile CSV {path}: {exc}") from exc
    with handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ProfileError(f"{path}:{lineno}: expected two columns, got {len(row)}")
            a_txt, v_txt = row[0].strip(), row[1].strip()
            if lineno == 1 and a_txt.lower() == "age_days":
                continue
            try:
                ages.append(float(a_txt))
                vals.append(float(v_txt))
            except ValueError as exc:
                raise ProfileError(f"{path}:{lineno}: non-numeric row {row!r}") from exc
    if not ages:
        raise ProfileError(f"{path}: no data rows")
    age_arr = np.asarray(ages)
    if age_arr.size > 1 and np.any(np.diff(age_arr) <= 0):
        raise ProfileError(f"{path}: ages must be strictly ascending")
    sampled = np.interp(grid.nodes, age_arr, np.asarray(vals))
    return AgeProfile(grid, sampled, units)


def survival(rate: AgeProfile, extra_const: float, grid: AgeGrid) -> AgeProfile:
    """Exponential survival factor of an age-dependent exit rate.

    F[0] = 1 and F[j] = exp(-sum_{m<j} (rate[m] + extra_const) * h), the
    left-rectangle cumulative hazard; exact for rates constant on each cell.

    Args:
        rate: Nonnegative exit-rate profile (per day).
        extra_const: Constant rate added everywhere (e.g. the death rate).

    Returns:
        Nonincreasing proportion-typed profile in (0, 1] (may underflow to 0
        at very old ages).
    """
    if rate.units not in (Units.RATE, Units.TRANSMISSION):
        raise ProfileError(f"survival needs a rate profile, got {rate.units.name}")
    if rate.grid != grid:
        raise ProfileError("rate profile is not on the requested grid")
    if extra_const < 0:
        raise ProfileError(f"extra_const must be nonnegative, got {extra_const}")
    hazard = cumulative_hazard(rate.values + extra_const, grid)
    return AgeProfile(grid, np.exp(-hazard), Units.PROPORTION)


def cumulative_hazard(rate_values: np.ndarray, grid: AgeGrid) -> np.ndarray:
    """Left-rectangle cumulative integral H[j] = sum_{m<j} rate[m] * h."""
    if np.any(rate_values < 0):
        raise ProfileError("negative rate value in hazard integrand")
    hazard = np.empty(grid.n_nodes)
    hazard[0] = 0.0
    np.cumsum(rate_values[:-1] * grid.h, out=hazard[1:])
    return hazard
