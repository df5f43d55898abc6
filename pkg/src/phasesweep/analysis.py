"""Closed-form systematic-error analysis of the source-array insertion.

Moving a source by delta_d along the array axis shifts the path length
to an off-axis point (angle theta) by

    S = sqrt(d^2/cos^2(theta) + 2*d*delta_d + delta_d^2) - d/cos(theta)

whose first-order expansion is delta_d * cos(theta).  The expansion's
Lagrange remainder bounds the approximation error, and requiring the
worst inserted phase to stay within one source spacing of the uniform
ladder caps the usable temporal-resolution magnification at
floor(N/2) <= 1/(1 - cos(theta)).

All lengths are meters; divide by the speed of light for delays.
"""

import math
from dataclasses import dataclass

from phasesweep.errors import InvalidParameterError


@dataclass(frozen=True)
class MagnificationLimit:
    """Largest usable source count for a given worst pixel angle.

    n_real is the continuous bound 2/(1-cos theta); n_integer the
    largest N satisfying floor(N/2) <= 1/(1-cos theta).  On the axis
    (theta = 0) the bound is unbounded and n_integer is None.
    """

    n_real: float
    n_integer: int | None
    unbounded: bool = False


@dataclass(frozen=True)
class ErrorBudget:
    """All systematic-error quantities for one geometry, in meters."""

    exact_shift: float
    approx_shift: float
    remainder_bound: float
    max_systematic_error: float
    n_max: float


def _check_angle(theta: float) -> None:
    if not 0.0 <= theta < math.pi / 2:
        raise InvalidParameterError("theta must be in [0, pi/2)")


def phase_insertion_shift(d: float, delta_d: float, theta: float
                          ) -> tuple[float, float]:
    """Exact path-length shift and its first-order approximation.

    Returns (exact, approx) with approx = delta_d * cos(theta); at
    theta = 0 both equal delta_d exactly.
    """
    _check_angle(theta)
    if not d > 0:
        raise InvalidParameterError("d must be positive")
    if delta_d < 0:
        raise InvalidParameterError("delta_d must be >= 0")
    cos = math.cos(theta)
    if theta == 0:
        exact = delta_d
    else:
        exact = math.sqrt(d * d / (cos * cos) + 2 * d * delta_d
                          + delta_d * delta_d) - d / cos
    return exact, delta_d * cos


def remainder_bound(d: float, delta_d: float, theta: float) -> float:
    """Lagrange bound on |exact shift - delta_d*cos(theta)|.

    |(alpha^2 - beta^2/4) / (2 alpha^3)| * delta_d^2 with
    alpha = d/cos(theta), beta = 2d; zero on the axis, where the
    first-order approximation is exact.
    """
    _check_angle(theta)
    if not d > 0:
        raise InvalidParameterError("d must be positive")
    if delta_d < 0:
        raise InvalidParameterError("delta_d must be >= 0")
    alpha = d / math.cos(theta)
    beta = 2.0 * d
    return abs((alpha * alpha - beta * beta / 4.0)
               / (2.0 * alpha ** 3)) * delta_d * delta_d


def max_magnification(theta: float) -> MagnificationLimit:
    """Largest temporal-resolution gain before the worst inserted phase
    drifts by more than one source spacing.

    theta = 0 is reported as explicitly unbounded rather than a number.
    """
    _check_angle(theta)
    if theta == 0:
        return MagnificationLimit(math.inf, None, unbounded=True)
    limit = 1.0 / (1.0 - math.cos(theta))
    return MagnificationLimit(2.0 * limit, 2 * math.floor(limit) + 1)


def max_systematic_error(num_sources: int, delta_d: float,
                         theta: float) -> float:
    """Worst inserted-phase deviation floor(N/2)*delta_d*(1-cos theta)."""
    _check_angle(theta)
    if num_sources < 1:
        raise InvalidParameterError("num_sources must be >= 1")
    if delta_d < 0:
        raise InvalidParameterError("delta_d must be >= 0")
    return (num_sources // 2) * delta_d * (1.0 - math.cos(theta))


def error_budget(d: float, delta_d: float, theta: float,
                 num_sources: int) -> ErrorBudget:
    """All systematic-error quantities for one geometry."""
    exact, approx = phase_insertion_shift(d, delta_d, theta)
    bound = remainder_bound(d, delta_d, theta)
    if abs(exact - approx) > bound * (1 + 1e-9) + 1e-18:
        raise InvalidParameterError(
            "remainder bound violated; inputs outside the expansion's validity")
    return ErrorBudget(
        exact_shift=exact,
        approx_shift=approx,
        remainder_bound=bound,
        max_systematic_error=max_systematic_error(num_sources, delta_d, theta),
        n_max=max_magnification(theta).n_real if theta > 0 else math.inf,
    )


def error_budget_rows(d: float, delta_d: float, thetas, num_sources: int):
    """ErrorBudget table rows over swept angles, for CSV export."""
    for theta in thetas:
        budget = error_budget(d, delta_d, theta, num_sources)
        yield (theta, budget.exact_shift, budget.approx_shift,
               budget.remainder_bound, budget.max_systematic_error,
               budget.n_max)
