"""Supremum law for steps with a geometric left tail.

The ladder measure is explicit once the tie probability zeta is known:

    (1 - zeta) L{x} = P(X = x) + (1 - r) P(X > x),   x >= 1,
    (1 - zeta) p    = r + (1 - r) E[X].

The supremum law (1 - p) * sum_n L^{n*} is built two ways: by summing
convolution powers of L, and by expanding the generating function

    M(s) = (1 - zeta - r - (1-r) E[X]) / (1 - zeta - [(1 - (1-r)/(1-s)) F+(s)
                                                    + s (1-r)/(1-s) (1 - F(0))])

as a power series. The two routes must agree coefficientwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ladder
from .dist import (IntegerPMF, PowerSeries, Side, StepDistribution, SupremumLaw,
                   convolve, mean, series_mul, series_reciprocal)
from .ladder import OracleDisagreement

ROUTE_AGREEMENT = 1e-8


@dataclass(frozen=True)
class LadderMeasure:
    """L{x} for x = 1..x_max (index 0 unused) and a bound on L(x_max, inf)."""

    mass: np.ndarray
    tail_bound: float


@dataclass(frozen=True)
class LeftSolution:
    zeta: float
    p: float
    L: LadderMeasure
    sup: SupremumLaw
    mgf: PowerSeries
    zeta_bound: float = 0.0
    dp_p: float | None = None
    dp_zeta: float | None = None
    route_gap: float = 0.0
    n_convolutions: int = 0


def _require_left(step: StepDistribution):
    if step.side is not Side.LEFT:
        raise ValueError("needs a left geometric tail")


def positive_atoms(step: StepDistribution, x_max: int) -> np.ndarray:
    """P(X = x) for x = 0..x_max with entry 0 set to zero: the coefficients of F+(s)."""
    out = step.atoms(0, x_max)
    out[0] = 0.0
    return out


def ladder_measure(step: StepDistribution, zeta: float, x_max: int | None = None,
                   tol: float = 1e-12) -> LadderMeasure:
    """Pointwise ladder-height masses (P(X=x) + (1-r) P(X>x)) / (1-zeta).

    ``x_max`` defaults to the first x where the remaining mass
    (1 - F(x) + (1-r) sum_{m>x} (1 - F(m))) / (1 - zeta) is below ``tol``.
    """
    _require_left(step)
    if not 0.0 <= zeta < 1.0:
        raise ValueError(f"zeta={zeta} not in [0, 1)")
    r = step.r
    fp = step.finite_part
    hi = fp.hi
    if x_max is None:
        x_max = hi
        while True:
            sf = _sf_array(step, x_max, x_max + hi + 1)
            rest = sf[0] + (1.0 - r) * sf[1:].sum() + fp.right_tail_mass
            if rest / (1.0 - zeta) < tol or x_max >= 100_000:
                break
            x_max *= 2
    atoms = step.atoms(1, x_max)
    sf = _sf_array(step, 1, x_max)
    mass = np.zeros(x_max + 1)
    mass[1:] = (atoms + (1.0 - r) * sf) / (1.0 - zeta)
    tail_sf = _sf_array(step, x_max, max(x_max, hi) + 1)
    # unresolved mass above hi could sit arbitrarily far out; bound its weight crudely
    tail = (tail_sf[0] + (1.0 - r) * tail_sf[1:].sum()
            + fp.right_tail_mass * (1.0 + (1.0 - r) * max(0, hi)))
    return LadderMeasure(mass=mass, tail_bound=tail / (1.0 - zeta))


def _sf_array(step, lo, hi):
    """P(X > x) for x = lo..hi."""
    x_top = max(hi, step.finite_part.hi) + 1
    atoms = step.atoms(lo + 1, x_top)
    rev = np.cumsum(atoms[::-1])[::-1]
    extra = step.finite_part.right_tail_mass
    return (rev[: hi - lo + 1] + extra) if hi >= lo else np.zeros(0)


def ladder_pgf(step: StepDistribution, zeta: float, s: float) -> float:
    """(1 - zeta) * E[s^H1; sup > 0] in closed form, for |s| < 1."""
    _require_left(step)
    if not -1.0 < s < 1.0:
        raise ValueError(f"s={s} outside (-1, 1)")
    r = step.r
    atoms = positive_atoms(step, step.finite_part.hi)
    f_plus = float(np.polynomial.polynomial.polyval(s, atoms))
    return ((1.0 - (1.0 - r) / (1.0 - s)) * f_plus
            + s * (1.0 - r) / (1.0 - s) * (1.0 - step.cdf(0)))


def ladder_probability(step: StepDistribution, zeta: float) -> float:
    """p = (r + (1-r) E[X]) / (1 - zeta)."""
    return (step.r + (1.0 - step.r) * mean(step)) / (1.0 - zeta)


def sup_by_convolution(L: LadderMeasure, p: float, K: int, cutoff: float = 1e-12):
    """(1 - p) * sum_n L^{n*} on 0..K; stops once p**(n+1)/(1-p) < cutoff."""
    m = np.zeros(K + 1)
    m[1:min(K, L.mass.size - 1) + 1] = L.mass[1:K + 1]
    power = np.zeros(K + 1)
    power[0] = 1.0
    psi = power.copy()
    n = 0
    while p ** (n + 1) / (1.0 - p) >= cutoff:
        power = np.convolve(power, m)[: K + 1]
        psi += power
        n += 1
    pmf = (1.0 - p) * psi
    return pmf, n


def mgf_series(step: StepDistribution, zeta: float, K: int) -> PowerSeries:
    """Coefficients of M(s) from the closed-form ratio, by series arithmetic."""
    _require_left(step)
    r = step.r
    f_plus = PowerSeries.from_coeffs(positive_atoms(step, K), K)
    ones = PowerSeries.geometric(1.0, K)  # 1/(1-s)
    bracket = (f_plus - series_mul(f_plus, ones) * (1.0 - r)
               + ones.shift(1) * ((1.0 - r) * (1.0 - step.cdf(0))))
    denom = (1.0 - zeta) - bracket
    num = 1.0 - zeta - r - (1.0 - r) * mean(step)
    return series_reciprocal(denom) * num


def solve(step: StepDistribution, K: int = 128, zeta: float | None = None,
          crosscheck: bool = True) -> LeftSolution:
    """Supremum law for a left-tailed, negative-drift step law.

    zeta comes from :func:`ladder.zeta_series`; with ``crosscheck`` it is
    gated by :func:`ladder.ladder_dp`, whose p must also match the
    closed-form p to 1e-6.
    """
    _require_left(step)
    m = mean(step)
    if m >= 0.0:
        raise ValueError(f"walk needs negative drift, mean = {m}")
    if K < 1:
        raise ValueError("K must be >= 1")
    dp = None
    zeta_bound = 0.0
    if zeta is None:
        est = ladder.zeta_series(step, crosscheck=False)
        zeta, zeta_bound = est.value, est.bound
        if crosscheck:
            dp = ladder.ladder_dp(step)
            if abs(dp.zeta - zeta) > 1e-6:
                raise OracleDisagreement(f"zeta: series {zeta!r} vs dp {dp.zeta!r}")
    p = ladder_probability(step, zeta)
    if not 0.0 < p < 1.0:
        raise ValueError(f"ladder probability {p} outside (0, 1)")
    if dp is not None and abs(dp.p - p) > 1e-6:
        raise OracleDisagreement(f"p: closed form {p!r} vs dp {dp.p!r}")

    L = ladder_measure(step, zeta, x_max=max(K, step.finite_part.hi))
    pmf, n_conv = sup_by_convolution(L, p, K)
    mgf = mgf_series(step, zeta, K)
    gap = float(np.max(np.abs(mgf.coeffs - pmf)))
    if gap > ROUTE_AGREEMENT:
        raise OracleDisagreement(f"convolution and series routes differ by {gap:.3g}")
    sup = SupremumLaw(pmf=pmf, tail_bound=max(0.0, 1.0 - float(pmf.sum())))
    return LeftSolution(zeta=zeta, p=p, L=L, sup=sup, mgf=mgf, zeta_bound=zeta_bound,
                        dp_p=None if dp is None else dp.p,
                        dp_zeta=None if dp is None else dp.zeta,
                        route_gap=gap, n_convolutions=n_conv)
