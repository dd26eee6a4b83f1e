"""Supremum law for steps with a geometric right tail.

With P(X >= x) = xi * r**x on x >= 0, the first ladder height is geometric,
so the supremum is zero with probability 1 - p and otherwise geometric with
ratio rho = 1 - (1 - p)(1 - r). The ratio is the reciprocal of the root of
E[s^X] = 1 in (1, 1/r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import Side, StepDistribution, SupremumLaw, mean, pgf_derivative, pgf_eval


@dataclass(frozen=True)
class RightSolution:
    s_star: float
    p: float
    decay: float
    r: float

    def __post_init__(self):
        if not 1.0 < self.s_star < 1.0 / self.r:
            raise ValueError("root outside (1, 1/r)")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p={self.p} outside (0, 1)")


def _bracket(step: StepDistribution) -> tuple[float, float]:
    return 1.0 + 1e-9, (1.0 / step.r) * (1.0 - 1e-9)


def solve(step: StepDistribution) -> RightSolution:
    """Root of the pgf equation by bisection, polished with two Newton steps."""
    if step.side is not Side.RIGHT:
        raise ValueError("kp_right.solve needs a right geometric tail")
    m = mean(step)
    if m >= 0.0:
        raise ValueError(f"walk needs negative drift, mean = {m}")

    def g(s):
        return pgf_eval(step, s) - 1.0

    a, b = _bracket(step)
    ga, gb = g(a), g(b)
    if not (ga < 0.0 < gb):
        raise ArithmeticError(f"no sign change on [{a}, {b}]: g={ga}, {gb}")
    while b - a > 1e-14:
        mid = 0.5 * (a + b)
        if g(mid) < 0.0:
            a = mid
        else:
            b = mid
    s = 0.5 * (a + b)
    for _ in range(2):
        d = pgf_derivative(step, s)
        cand = s - g(s) / d
        # keep Newton inside the (slightly widened) final bracket
        if a - 1e-12 <= cand <= b + 1e-12:
            s = cand
    p = 1.0 - (1.0 - 1.0 / s) / (1.0 - step.r)
    return RightSolution(s_star=s, p=p, decay=1.0 - (1.0 - p) * (1.0 - step.r), r=step.r)


def sup_sf(sol: RightSolution, x_max: int) -> np.ndarray:
    """P(sup > x) = p * rho**x for x = 0..x_max."""
    return sol.p * sol.decay ** np.arange(x_max + 1)


def sup_law(sol: RightSolution, x_max: int) -> SupremumLaw:
    x = np.arange(1, x_max + 1)
    pmf = np.empty(x_max + 1)
    pmf[0] = 1.0 - sol.p
    pmf[1:] = sol.p * sol.decay ** (x - 1) * (1.0 - sol.decay)
    return SupremumLaw(pmf=pmf, tail_bound=sol.p * sol.decay ** x_max)


def renewal_cdf(sol: RightSolution, x) -> np.ndarray:
    """psi[0, x] = 1/(1-p) - p/(1-p) * rho**x (the renewal measure of the ladder heights)."""
    x = np.asarray(x, dtype=float)
    return 1.0 / (1.0 - sol.p) - sol.p / (1.0 - sol.p) * sol.decay ** x


def renewal_atom(sol: RightSolution, x: int) -> float:
    """psi{x} = p (1-r) rho**(x-1) for x >= 1."""
    return sol.p * (1.0 - sol.r) * sol.decay ** (x - 1)
