"""Moving-boundary geometry.

Evaluates the boundary curves of a moving interval (alpha(t), beta(t)),
the boundary-fixing change of variables y = (x - alpha(t)) / gamma(t)
with gamma = beta - alpha, and the coefficients of the transformed
equation: the advection coefficient b1(y, t) = (alpha' + gamma' y) / gamma
and the diffusion scaling b2(t) = 1 / gamma(t)^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["BoundaryMotion", "fixed_interval"]

ScalarFunc = Callable[[float], float]


@dataclass(frozen=True)
class BoundaryMotion:
    """Boundary curves of a moving interval, with analytic derivatives.

    Derivatives are supplied by the caller rather than obtained by
    differencing: the scheme's accuracy rests on C^2 boundaries, and
    differencing would inject avoidable error.  A finite-difference
    cross-check lives in the test suite, not here.

    Parameters
    ----------
    alpha, beta : callable
        Left and right boundary positions as functions of time.
    alpha_prime, beta_prime : callable
        Their first derivatives.
    T : float
        Final time; all evaluations are restricted to [0, T] up to a
        rounding tolerance (midpoint times t - delta/2 may land within
        one ulp of the interval ends).
    """

    alpha: ScalarFunc
    beta: ScalarFunc
    alpha_prime: ScalarFunc
    beta_prime: ScalarFunc
    T: float

    def _check_time(self, t: float) -> None:
        tol = 1e-12 * max(1.0, self.T)
        if t < -tol or t > self.T + tol:
            raise ValueError(f"time {t!r} outside the domain [0, {self.T}]")

    def gamma(self, t: float) -> float:
        """Width beta(t) - alpha(t) of the interval; strictly positive."""
        self._check_time(t)
        g = self.beta(t) - self.alpha(t)
        if g <= 0.0:
            raise ValueError(f"nonpositive interval width gamma({t}) = {g}")
        return g

    def gamma_prime(self, t: float) -> float:
        """Rate of change of the width, beta'(t) - alpha'(t)."""
        self._check_time(t)
        return self.beta_prime(t) - self.alpha_prime(t)

    def coeff_b1(self, y, t: float):
        """Advection coefficient (alpha'(t) + gamma'(t) y) / gamma(t).

        `y` may be a scalar or an array of reference coordinates in [0, 1].
        """
        g = self.gamma(t)
        if np.any(y < -1e-12) or np.any(y > 1.0 + 1e-12):
            raise ValueError("reference coordinate outside [0, 1]")
        return (self.alpha_prime(t) + self.gamma_prime(t) * y) / g

    def coeff_b2(self, t: float) -> float:
        """Diffusion scaling 1 / gamma(t)^2."""
        g = self.gamma(t)
        return 1.0 / (g * g)

    def to_fixed(self, x, t: float):
        """Map physical coordinates in [alpha(t), beta(t)] to [0, 1]."""
        self._check_time(t)
        a = self.alpha(t)
        b = self.beta(t)
        tol = 1e-12 * max(1.0, abs(a), abs(b))
        if np.any(x < a - tol) or np.any(x > b + tol):
            raise ValueError(
                f"position outside the interval [{a}, {b}] at t={t}"
            )
        return (x - a) / (b - a)

    def to_moving(self, y, t: float):
        """Map reference coordinates in [0, 1] to [alpha(t), beta(t)]."""
        a = self.alpha(t)
        return a + self.gamma(t) * y


def fixed_interval(a: float = 0.0, b: float = 1.0, T: float = 1.0) -> BoundaryMotion:
    """Degenerate motion with still boundaries (a cylindrical domain)."""
    if not b > a:
        raise ValueError(f"need b > a, got [{a}, {b}]")
    return BoundaryMotion(
        alpha=lambda t: a,
        beta=lambda t: b,
        alpha_prime=lambda t: 0.0,
        beta_prime=lambda t: 0.0,
        T=T,
    )
