"""Ladder structure of an integer random walk, computed from the definitions.

Nothing here uses the closed forms for geometric tails; these routines are the
brute-force side of every cross-check. Truncation is certified with the
Lundberg bound P(sup S_n >= y) <= s0**(-y), where E[s0**X] <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .dist import StepDistribution, adjustment_root, mean, pgf_eval


class OracleDisagreement(RuntimeError):
    """Two independent routes to the same quantity disagree beyond tolerance."""


@dataclass(frozen=True)
class Path:
    steps: np.ndarray
    partials: np.ndarray

    @classmethod
    def from_steps(cls, steps) -> "Path":
        steps = np.asarray(steps, dtype=np.int64)
        return cls(steps, np.concatenate([[0], np.cumsum(steps)]))

    def __post_init__(self):
        if self.partials.size != self.steps.size + 1 or self.partials[0] != 0:
            raise ValueError("partials must start at 0 and have one more entry than steps")
        if not np.array_equal(np.diff(self.partials), self.steps):
            raise ValueError("partials are not the running sums of steps")


@dataclass(frozen=True)
class LadderDecomposition:
    strict_indices: list[int]
    strict_heights: list[int]
    weak_indices: list[int]
    weak_heights: list[int]

    @property
    def first_strict(self) -> tuple[int, int] | None:
        if not self.strict_indices:
            return None
        return self.strict_indices[0], self.strict_heights[0]

    @property
    def first_weak(self) -> tuple[int, int] | None:
        if not self.weak_indices:
            return None
        return self.weak_indices[0], self.weak_heights[0]


def decompose(path: Path) -> LadderDecomposition:
    """All strict ladder epochs, and the weak ones (S_n >= every earlier partial sum).

    The first weak epoch is the first n with S_1..S_{n-1} < 0 and S_n >= 0.
    """
    s = path.partials.tolist()
    strict_i, strict_h, weak_i, weak_h = [], [], [], []
    run_max = s[0]
    for n in range(1, len(s)):
        if s[n] > run_max:
            strict_i.append(n)
            strict_h.append(s[n])
        if s[n] >= run_max:
            weak_i.append(n)
            weak_h.append(s[n])
        run_max = max(run_max, s[n])
    return LadderDecomposition(strict_i, strict_h, weak_i, weak_h)


@dataclass(frozen=True)
class LadderData:
    """Ladder probability p, tie probability zeta and the ladder-height measure.

    ``L_mass[h]`` is L{h} for h = 1..height_cap (index 0 is unused and zero).
    ``p`` includes the exactly known mass jumping beyond ``height_cap``;
    ``L_tail_bound`` covers that overshoot plus all truncation error, so
    ``sum(L_mass) <= p <= sum(L_mass) + L_tail_bound``.
    """

    p: float
    zeta: float
    L_mass: np.ndarray
    L_tail_bound: float
    p_error: float
    zeta_error: float
    steps: int


def default_floor(step: StepDistribution, eps: float = 1e-14) -> int:
    s0 = adjustment_root(step)
    return -int(math.ceil(math.log(1.0 / eps) / math.log(s0))) - 1


def ladder_dp(step: StepDistribution, horizon: int = 100_000, floor: int | None = None,
              height_cap: int = 512, tol: float = 1e-10, strict: bool = True) -> LadderData:
    """Forward DP over walks that have not yet made a strict ladder epoch.

    States are values v in [floor, 0]. Mass jumping to h > 0 is first-ladder
    mass L{h}; mass of walks kept strictly below 0 that land on 0 is zeta.
    Iterates until the Lundberg bound on all in-flight mass is below ``tol``
    or ``horizon`` steps have been taken; with ``strict`` an error bound above
    ``tol`` raises. ``tol=0, strict=False`` runs exactly ``horizon`` steps.
    """
    if mean(step) >= 0.0:
        raise ValueError(f"walk needs negative drift, mean = {mean(step)}")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    s0 = adjustment_root(step)
    if floor is None:
        floor = default_floor(step)
    if floor >= 0:
        raise ValueError("floor must be negative")
    width = -floor
    # atoms for x in [floor, height_cap - floor]
    x_lo, x_hi = floor, height_cap + width
    atoms = step.atoms(x_lo, x_hi)
    v = np.arange(floor, 1)
    over = np.array([step.sf(height_cap - vv) for vv in v])
    below = np.array([step.cdf(floor - 1 - vv) for vv in v])
    weight_l = s0 ** (v - 1.0)  # bound on P(ladder | at v)
    weight_z = s0 ** v.astype(float)  # bound on P(hit 0 | at v)
    lost_bound = s0 ** (floor - 1.0)

    L = np.zeros(height_cap + 1)
    overshoot = 0.0
    floor_err = 0.0
    zeta = 0.0
    zeta_floor_err = 0.0

    w = np.zeros(width + 1)
    w[-1] = 1.0  # at v = 0
    z = np.zeros(width + 1)  # strictly negative prefix; z[-1] stays 0
    n = 0
    in_flight_l = in_flight_z = 1.0
    while n < horizon:
        n += 1
        cw = np.convolve(w, atoms)  # index k -> value 2*floor + k
        cz = np.convolve(z, atoms)
        base = 2 * floor
        # value u sits at index u - base
        i0 = floor - base
        L[1:] += cw[i0 + width + 1:i0 + width + 1 + height_cap]
        overshoot += float(np.dot(w, over))
        floor_err += float(np.dot(w, below)) * lost_bound
        if n == 1:
            zeta += step.atom(0)
            nz = step.atoms(floor, -1)
            z[:-1] = nz
            zeta_floor_err += step.cdf(floor - 1) * s0 ** float(floor - 1)
        else:
            zeta += float(cz[i0 + width])
            zeta_floor_err += float(np.dot(z, below)) * lost_bound
            z = cz[i0:i0 + width + 1].copy()
            z[-1] = 0.0
        w = cw[i0:i0 + width + 1]
        in_flight_l = float(np.dot(w, weight_l))
        in_flight_z = float(np.dot(z, weight_z))
        if in_flight_l < tol and in_flight_z < tol:
            break

    p_err = in_flight_l + floor_err
    z_err = in_flight_z + zeta_floor_err
    p = float(L.sum()) + overshoot
    if strict and (p_err > tol or z_err > tol):
        raise RuntimeError(f"truncation bound exceeds tol: p_err={p_err:.3g}, "
                           f"zeta_err={z_err:.3g} after {n} steps")
    return LadderData(p=p, zeta=zeta, L_mass=L, L_tail_bound=overshoot + p_err,
                      p_error=p_err, zeta_error=z_err, steps=n)


@dataclass(frozen=True)
class ZetaEstimate:
    value: float
    bound: float
    n_terms: int
    return_probs: np.ndarray
    dp_value: float | None = None


def chernoff_rate(step: StepDistribution) -> float:
    """min_s E[s^X]; P(S_n = 0) <= rate**n."""
    lo = step.pgf_radius()[0]
    hi = adjustment_root(step)
    res = minimize_scalar(lambda s: pgf_eval(step, s), bounds=(lo + 1e-9 * (hi - lo) + 1e-12, hi),
                          method="bounded", options={"xatol": 1e-10})
    return float(min(res.fun, 1.0))


def return_probabilities(step: StepDistribution, n_max: int, window: int | None = None,
                         eps: float = 1e-14):
    """P(S_n = 0) for n = 1..n_max by windowed iterated convolution.

    Returns ``(probs, low, high)``: ``low[n-1]``/``high[n-1]`` is the mass pushed
    below -window / above +window during step n.
    """
    if window is None:
        s0 = adjustment_root(step)
        window = int(math.ceil(math.log(1.0 / eps) / math.log(s0)))
    W = window
    atoms = step.atoms(-2 * W, 2 * W)
    out_low, out_high = step.cdf(-2 * W - 1), step.sf(2 * W)
    w = np.zeros(2 * W + 1)
    w[W] = 1.0
    probs = np.empty(n_max)
    low = np.empty(n_max)
    high = np.empty(n_max)
    for n in range(n_max):
        c = np.convolve(w, atoms)  # index k -> value k - 3W
        mass = float(w.sum())
        low[n] = float(c[:2 * W].sum()) + mass * out_low
        high[n] = float(c[4 * W + 1:].sum()) + mass * out_high
        w = c[2 * W:4 * W + 1]
        probs[n] = w[W]
    return probs, low, high


def zeta_series(step: StepDistribution, n_max: int = 20_000, tol: float = 1e-13,
                crosscheck: bool = True, agree: float = 1e-6) -> ZetaEstimate:
    """Tie probability from return probabilities: log 1/(1-zeta) = sum_n P(S_n=0)/n.

    Terms are added until the Chernoff remainder rate**(n+1)/((n+1)(1-rate))
    falls below ``tol``. With ``crosscheck`` the result is compared against
    :func:`ladder_dp`, which is authoritative; disagreement raises.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if mean(step) >= 0.0:
        raise ValueError(f"walk needs negative drift, mean = {mean(step)}")
    rate = chernoff_rate(step)
    if rate >= 1.0:
        raise ValueError("no geometric decay of return probabilities")
    # smallest n with rate**(n+1) / ((n+1)(1-rate)) < tol
    n_terms = 1
    while rate ** (n_terms + 1) / ((n_terms + 1) * (1.0 - rate)) >= tol:
        n_terms += 1
        if n_terms > n_max:
            raise RuntimeError(f"series not converged within n_max={n_max} terms "
                               f"(rate={rate:.6f})")
    s0 = adjustment_root(step)
    window = int(math.ceil(math.log(1.0 / 1e-14) / math.log(s0)))
    probs, low, high = return_probabilities(step, n_terms, window)
    n = np.arange(1, n_terms + 1)
    log_term = float(np.sum(probs / n))
    # dropped mass returns to 0 at most 1 + sum_n rate**n times, each after step n
    visits = 1.0 + rate / (1.0 - rate)
    dropped = low * s0 ** (-float(window)) + high
    bound = (rate ** (n_terms + 1) / ((n_terms + 1) * (1.0 - rate))
             + float(np.sum(dropped * visits / n)))
    value = -math.expm1(-log_term)
    est = ZetaEstimate(value=value, bound=bound, n_terms=n_terms, return_probs=probs)
    if not crosscheck:
        return est
    dp = ladder_dp(step)
    if abs(dp.zeta - value) > agree:
        raise OracleDisagreement(f"zeta_series={value!r} vs ladder_dp={dp.zeta!r}")
    return ZetaEstimate(value, bound, n_terms, probs, dp_value=dp.zeta)
