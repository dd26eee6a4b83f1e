"""Tandem queue with a priority-gated second server, as a left-tailed random walk.

Queue 1 is M/M/1 with mean inter-arrival time ``alpha`` and mean service time
``beta``. Server 2 (mean service ``gamma``) works only while server 1 is idle.
Per busy cycle, N customers move to queue 2 and M ~ Geometric dissociation
opportunities occur before the next arrival, so queue-2 occupancy after
each cycle follows Z' = max(0, Z + N - M). The step N - M has a geometric
left tail with ratio r = alpha / (alpha + gamma) and weight xi = U(r).

Rates are rates 1/alpha, 1/beta, 1/gamma: every parameter is a mean time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kp_left
from .dist import (IntegerPMF, PowerSeries, StepDistribution, mean, series_mul,
                   series_reciprocal, series_sqrt, step_from_left_tail)
from .kp_left import ROUTE_AGREEMENT, LeftSolution
from .ladder import OracleDisagreement


class LoadError(ValueError):
    """The abstract queue is not stable (load b >= 1) or queue 1 is not (a >= 1)."""


@dataclass(frozen=True)
class TandemParams:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name}={v} must be a positive finite mean time")

    @property
    def a(self) -> float:
        """Queue-1 load."""
        return self.beta / self.alpha

    @property
    def r(self) -> float:
        """P(next server-2 clock rings before the next arrival)."""
        return self.alpha / (self.alpha + self.gamma)

    @property
    def b(self) -> float:
        """Load of the abstract queue with inter-arrivals N and services M."""
        if self.a >= 1.0:
            return math.inf
        return self.gamma / (self.alpha - self.beta)

    def check(self) -> None:
        if self.a >= 1.0:
            raise LoadError(f"queue-1 load a = {self.a:.6g} >= 1: busy periods are defective")
        if self.b >= 1.0:
            raise LoadError(f"load b = {self.b:.6g} >= 1: beta + gamma >= alpha, "
                            "the walk has nonnegative drift")

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
                "a": self.a, "r": self.r, "b": self.b}


def _check_load(a):
    if not 0.0 < a < 1.0:
        raise LoadError(f"a = {a} must lie in (0, 1)")


def busy_period_prob(a: float, k) -> np.ndarray:
    """P(N = k) = C(2k-1, k) / (2k-1) * a**(k-1) / (1+a)**(2k-1), log domain past k = 50."""
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    out = np.zeros(k.shape)
    la, l1a = math.log(a), math.log1p(a)
    for i, kk in enumerate(k.tolist()):
        if kk < 1:
            continue
        if kk <= 50:
            out[i] = math.comb(2 * kk - 1, kk) / (2 * kk - 1) * a ** (kk - 1) / (1 + a) ** (2 * kk - 1)
        else:
            log_c = math.lgamma(2 * kk) - math.lgamma(kk + 1) - math.lgamma(kk)
            out[i] = math.exp(log_c - math.log(2 * kk - 1) + (kk - 1) * la - (2 * kk - 1) * l1a)
    return out


def busy_period_pmf(a: float, K: int) -> IntegerPMF:
    """Customers served in an M/M/1 busy period at load a, on 1..K."""
    _check_load(a)
    if K < 1:
        raise ValueError("K must be >= 1")
    mass = busy_period_prob(a, np.arange(1, K + 1))
    return IntegerPMF(1, K, mass, 0.0, max(0.0, 1.0 - float(mass.sum())))


def busy_period_K(a: float, tol: float = 1e-16) -> int:
    """Smallest K with P(N > K) < tol, found by doubling."""
    K = 16
    while True:
        mass = busy_period_prob(a, np.arange(1, K + 1))
        # remaining terms decay at least like (4a/(1+a)^2)^k
        q = 4.0 * a / (1.0 + a) ** 2
        rest = mass[-1] * q / (1.0 - q)
        if rest < tol:
            return K
        K *= 2


def U_eval(a: float, s: float) -> float:
    """Generating function of N: (1+a)/(2a) * (1 - sqrt(1 - 4as/(1+a)^2))."""
    _check_load(a)
    radius = 1.0 + (1.0 - a) ** 2 / (4.0 * a)
    if not abs(s) < radius:
        raise ValueError(f"|s|={abs(s)} outside convergence radius {radius}")
    return (1.0 + a) / (2.0 * a) * (1.0 - math.sqrt(1.0 - 4.0 * a * s / (1.0 + a) ** 2))


def V_eval(r: float, s: float) -> float:
    """Generating function of M: (1-r)/(1-rs)."""
    if not 0.0 < r < 1.0:
        raise ValueError(f"r={r} not in (0, 1)")
    if not abs(s) < 1.0 / r:
        raise ValueError(f"|s|={abs(s)} outside convergence radius {1.0 / r}")
    return (1.0 - r) / (1.0 - r * s)


def U_series(a: float, K: int) -> PowerSeries:
    """Taylor coefficients of U via the series square root."""
    c = 4.0 * a / (1.0 + a) ** 2
    inner = PowerSeries.from_coeffs([1.0, -c], K)
    return (1.0 - series_sqrt(inner)) * ((1.0 + a) / (2.0 * a))


@dataclass(frozen=True)
class StepCheck:
    """Largest deviation of the materialized P(X <= x) from U(r) r**(-x), x in [-depth, 0]."""

    max_deviation: float
    depth: int
    truncation: float


def _materialize_x(params: TandemParams, K: int):
    """Law of N - M on [-(K + extra), K] from the atoms of N and of M."""
    r = params.r
    n_mass = busy_period_prob(params.a, np.arange(1, K + 1))
    # M atoms on 0..K-1 suffice for every x >= 1; keep more for the theorem check
    m_len = K + 64
    m_mass = (1.0 - r) * r ** np.arange(m_len)
    # value of conv index j: (j + 1) - (m_len - 1)
    conv = np.convolve(n_mass, m_mass[::-1])
    x_lo = 1 - (m_len - 1)
    return conv, x_lo, n_mass


def build_step(params: TandemParams, tol: float = 1e-12, depth: int = 10,
               K: int | None = None) -> tuple[StepDistribution, StepCheck]:
    """Step law of N - M, with the left-tail form checked rather than assumed.

    P(X <= x) is computed as 1 - sum of materialized atoms above x and compared
    to U(r) r**(-x) for x = 0, -1, ..., -depth; the returned law stores the
    left tail symbolically.
    """
    params.check()
    a, r = params.a, params.r
    if K is None:
        K = busy_period_K(a, tol * 1e-4)
    conv, x_lo, n_mass = _materialize_x(params, K)
    n_missing = max(0.0, 1.0 - float(n_mass.sum()))
    xs = x_lo + np.arange(conv.size)
    xi = U_eval(a, r)
    dev = 0.0
    for x in range(0, -depth - 1, -1):
        above = float(conv[xs > x].sum())
        dev = max(dev, abs((1.0 - above) - xi * r ** (-x)))
    check = StepCheck(max_deviation=dev, depth=depth, truncation=n_missing)
    if dev > tol + n_missing:
        raise OracleDisagreement(f"left-tail form fails: max deviation {dev:.3g}")
    pos = conv[xs >= 1]
    pmf = IntegerPMF(1, pos.size, pos, xi, max(0.0, 1.0 - xi - float(pos.sum())))
    return step_from_left_tail(xi, r, pmf.trimmed()), check


@dataclass(frozen=True)
class TandemReport:
    params: TandemParams
    xi: float
    step: StepDistribution
    solution: LeftSolution
    check: StepCheck
    simplified_mgf: PowerSeries
    route_gap: float


def simplified_series(params: TandemParams, zeta: float, K: int) -> PowerSeries:
    """M(s) = (1 - zeta - (1-r)/(1-a)) / (1 - zeta - (1-r) s (1 - U(s))/(1 - s))."""
    a, r = params.a, params.r
    u = busy_period_pmf(a, K + 1).mass
    U = PowerSeries.from_coeffs(np.concatenate([[0.0], u]), K)
    ones = PowerSeries.geometric(1.0, K)
    tail = series_mul(1.0 - U, ones)  # coefficient k is P(N > k)
    denom = (1.0 - zeta) - tail.shift(1) * (1.0 - r)
    num = 1.0 - zeta - (1.0 - r) / (1.0 - a)
    return series_reciprocal(denom) * num


def analyze(params: TandemParams, K: int = 128, crosscheck: bool = True) -> TandemReport:
    """Step construction, left-tail solve, and the simplified-M(s) cross-check."""
    step, check = build_step(params)
    sol = kp_left.solve(step, K=K, crosscheck=crosscheck)
    simple = simplified_series(params, sol.zeta, K)
    gap = float(np.max(np.abs(simple.coeffs - sol.mgf.coeffs)))
    if gap > ROUTE_AGREEMENT:
        raise OracleDisagreement(f"simplified M(s) differs from the generic route by {gap:.3g}")
    return TandemReport(params=params, xi=step.xi, step=step, solution=sol, check=check,
                        simplified_mgf=simple, route_gap=gap)


def theoretical_mean_step(params: TandemParams) -> float:
    """E[N] - E[M] = 1/(1-a) - r/(1-r)."""
    return 1.0 / (1.0 - params.a) - params.r / (1.0 - params.r)
