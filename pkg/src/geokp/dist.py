"""Integer distributions with one geometric tail, and truncated power series.

A step law is stored as exact atoms on one side of zero plus a symbolic
geometric tail on the other. The tail is never truncated inside the types;
windows are materialized on demand with their remainders reported.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

TOL = 1e-12


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class IntegerPMF:
    """Probabilities on ``lo..hi`` plus the unmaterialized mass on either side."""

    lo: int
    hi: int
    mass: np.ndarray = field(repr=False)
    left_tail_mass: float = 0.0
    right_tail_mass: float = 0.0

    def __post_init__(self):
        mass = np.ascontiguousarray(self.mass, dtype=np.float64)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "hi", int(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"lo={self.lo} > hi={self.hi}")
        if mass.shape != (self.hi - self.lo + 1,):
            raise ValueError("mass length does not match lo..hi")
        if np.any(mass < -TOL) or np.any(mass > 1 + TOL):
            raise ValueError("masses must lie in [0, 1]")
        if self.left_tail_mass < -TOL or self.right_tail_mass < -TOL:
            raise ValueError("tail masses must be nonnegative")
        total = mass.sum() + self.left_tail_mass + self.right_tail_mass
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"total mass {total!r} differs from 1")

    @classmethod
    def unit(cls, x: int) -> "IntegerPMF":
        return cls(x, x, np.ones(1))

    @classmethod
    def from_atoms(cls, atoms: Mapping[int, float], left_tail_mass: float = 0.0,
                   right_tail_mass: float = 0.0) -> "IntegerPMF":
        if not atoms:
            raise ValueError("no atoms given")
        lo, hi = min(atoms), max(atoms)
        mass = np.zeros(hi - lo + 1)
        for x, m in atoms.items():
            mass[x - lo] += m
        return cls(lo, hi, mass, left_tail_mass, right_tail_mass)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __getitem__(self, x: int) -> float:
        if self.lo <= x <= self.hi:
            return float(self.mass[x - self.lo])
        return 0.0

    def mean(self) -> float:
        """Mean of the materialized atoms (tail masses ignored)."""
        return float(np.dot(self.support, self.mass))

    def __eq__(self, other):
        if not isinstance(other, IntegerPMF):
            return NotImplemented
        return (self.lo == other.lo and self.hi == other.hi
                and np.array_equal(self.mass, other.mass)
                and self.left_tail_mass == other.left_tail_mass
                and self.right_tail_mass == other.right_tail_mass)

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "mass": self.mass.tolist(),
            "left_tail_mass": self.left_tail_mass,
            "right_tail_mass": self.right_tail_mass,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "IntegerPMF":
        return cls(d["lo"], d["hi"], np.asarray(d["mass"], dtype=float),
                   d.get("left_tail_mass", 0.0), d.get("right_tail_mass", 0.0))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "IntegerPMF":
        return cls.from_dict(json.loads(text))

    def trimmed(self, eps: float = 0.0) -> "IntegerPMF":
        """Drop leading/trailing atoms <= eps, moving their mass into the tails."""
        nz = np.flatnonzero(self.mass > eps)
        if nz.size == 0:
            raise ValueError("nothing left after trimming")
        i, j = nz[0], nz[-1]
        return IntegerPMF(self.lo + i, self.lo + j, self.mass[i:j + 1],
                          self.left_tail_mass + float(self.mass[:i].sum()),
                          self.right_tail_mass + float(self.mass[j + 1:].sum()))


@dataclass(frozen=True)
class GeometricTail:
    """Right: P(X >= x) = xi * r**x for x >= 0.  Left: P(X <= x) = xi * r**(-x) for x <= 0."""

    side: Side
    xi: float
    r: float

    def __post_init__(self):
        if not 0.0 < self.xi < 1.0:
            raise ValueError(f"xi={self.xi} not in (0, 1)")
        if not 0.0 < self.r < 1.0:
            raise ValueError(f"r={self.r} not in (0, 1)")

    def atom(self, depth):
        """Mass at distance ``depth >= 0`` from zero on the tail side."""
        return self.xi * (1.0 - self.r) * np.power(self.r, depth)

    def survival(self, depth):
        """Tail mass at distances ``>= depth``."""
        return self.xi * np.power(self.r, depth)


@dataclass(frozen=True)
class StepDistribution:
    """Integer step law: exact atoms on one side of 0, geometric tail on the other.

    ``finite_part`` is a full-line :class:`IntegerPMF` whose materialized atoms
    live strictly on the non-tail side; the tail-side mass ``xi`` is carried in
    its tail-mass field on that side. Mass in the opposite tail field is
    unresolved (e.g. a truncated infinite support) and is treated as a bound.
    """

    finite_part: IntegerPMF
    tail: GeometricTail

    def __post_init__(self):
        fp, t = self.finite_part, self.tail
        if t.side is Side.RIGHT:
            if fp.hi > -1:
                raise ValueError("finite part of a right-tailed law must sit on x <= -1")
            tail_field = fp.right_tail_mass
        else:
            if fp.lo < 1:
                raise ValueError("finite part of a left-tailed law must sit on x >= 1")
            tail_field = fp.left_tail_mass
        if abs(tail_field - t.xi) > 1e-10:
            raise ValueError("finite-side mass + xi must equal 1")
        if fp.mass.sum() <= 0.0:
            raise ValueError("law is concentrated on a half-axis: "
                             "no atoms on the non-tail side")

    @property
    def side(self) -> Side:
        return self.tail.side

    @property
    def xi(self) -> float:
        return self.tail.xi

    @property
    def r(self) -> float:
        return self.tail.r

    @property
    def unresolved_mass(self) -> float:
        fp = self.finite_part
        return fp.left_tail_mass if self.side is Side.RIGHT else fp.right_tail_mass

    def atoms(self, lo: int, hi: int) -> np.ndarray:
        """Point masses P(X = x) for x = lo..hi."""
        x = np.arange(lo, hi + 1)
        out = np.zeros(x.size)
        fp = self.finite_part
        a, b = max(lo, fp.lo), min(hi, fp.hi)
        if a <= b:
            out[a - lo:b - lo + 1] = fp.mass[a - fp.lo:b - fp.lo + 1]
        if self.side is Side.RIGHT:
            sel = x >= 0
            out[sel] = self.tail.atom(x[sel])
        else:
            sel = x <= 0
            out[sel] = self.tail.atom(-x[sel])
        return out

    def atom(self, x: int) -> float:
        return float(self.atoms(x, x)[0])

    def cdf(self, x: int) -> float:
        """P(X <= x); unresolved mass is treated as lying beyond the window."""
        fp = self.finite_part
        if self.side is Side.LEFT:
            if x <= 0:
                return float(self.tail.survival(-x))
            return self.xi + float(fp.mass[: max(0, min(x, fp.hi) - fp.lo + 1)].sum())
        if x >= 0:
            return 1.0 - float(self.tail.survival(x + 1))
        return fp.left_tail_mass + float(fp.mass[: max(0, min(x, fp.hi) - fp.lo + 1)].sum())

    def sf(self, x: int) -> float:
        """P(X > x)."""
        if self.side is Side.RIGHT and x >= -1:
            return float(self.tail.survival(x + 1))
        return 1.0 - self.cdf(x)

    def materialize(self, lo: int, hi: int) -> IntegerPMF:
        mass = self.atoms(lo, hi)
        left = self.cdf(lo - 1)
        right = max(0.0, 1.0 - left - float(mass.sum()))
        return IntegerPMF(lo, hi, mass, left, right)

    def negated(self) -> "StepDistribution":
        """Law of -X."""
        fp = self.finite_part
        flipped = IntegerPMF(-fp.hi, -fp.lo, fp.mass[::-1].copy(),
                             fp.right_tail_mass, fp.left_tail_mass)
        side = Side.LEFT if self.side is Side.RIGHT else Side.RIGHT
        return StepDistribution(flipped, GeometricTail(side, self.xi, self.r))

    def pgf_radius(self) -> tuple[float, float]:
        """Open interval of s > 0 on which E[s^X] converges (materialized atoms)."""
        if self.side is Side.RIGHT:
            return (0.0, 1.0 / self.r)
        return (self.r, math.inf)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` steps: geometric tail in closed form, finite part by inverse CDF."""
        u = rng.random(size)
        in_tail = u < self.xi
        out = np.empty(size, dtype=np.int64)
        n_tail = int(in_tail.sum())
        v = 1.0 - rng.random(n_tail)  # in (0, 1]
        depth = np.floor(np.log(v) / math.log(self.r)).astype(np.int64)
        out[in_tail] = depth if self.side is Side.RIGHT else -depth
        fp = self.finite_part
        cum = np.cumsum(fp.mass)
        cum /= cum[-1]
        w = rng.random(size - n_tail)
        idx = np.minimum(np.searchsorted(cum, w, side="right"), fp.mass.size - 1)
        out[~in_tail] = fp.lo + idx
        return out


def _check_unit(name, v):
    if not 0.0 < v < 1.0:
        raise ValueError(f"{name}={v} not in (0, 1)")


def step_from_right_tail(xi: float, r: float, negative_atoms: Mapping[int, float],
                         unresolved: float = 0.0) -> StepDistribution:
    """Step law with P(X >= x) = xi * r**x for x >= 0 and the given atoms on x <= -1.

    ``unresolved`` is extra mass known to sit below the smallest listed atom.
    """
    _check_unit("xi", xi)
    _check_unit("r", r)
    atoms = {int(k): float(v) for k, v in negative_atoms.items() if v != 0.0}
    if not atoms:
        raise ValueError("law is concentrated on a half-axis: no negative atoms")
    if max(atoms) > -1:
        raise ValueError("negative_atoms must be supported on x <= -1")
    total = sum(atoms.values()) + xi + unresolved
    if abs(total - 1.0) > TOL:
        raise ValueError(f"atoms + xi sum to {total!r}, not 1")
    fp = IntegerPMF.from_atoms(atoms, left_tail_mass=unresolved,
                               right_tail_mass=1.0 - sum(atoms.values()) - unresolved)
    return StepDistribution(fp, GeometricTail(Side.RIGHT, xi, r))


def step_from_left_tail(xi: float, r: float, positive_pmf, tol: float = TOL) -> StepDistribution:
    """Step law with P(X <= x) = xi * r**(-x) for x <= 0 and the given atoms on x >= 1.

    ``positive_pmf`` is either a mapping of atoms or an :class:`IntegerPMF`
    whose ``left_tail_mass`` is ``xi`` and whose ``right_tail_mass`` bounds
    any truncated part of the positive support.
    """
    _check_unit("xi", xi)
    _check_unit("r", r)
    if isinstance(positive_pmf, IntegerPMF):
        fp = positive_pmf
        if fp.mass.sum() <= 0.0:
            raise ValueError("law is concentrated on a half-axis: no positive atoms")
        if fp.lo < 1:
            raise ValueError("positive part must be supported on x >= 1")
        if abs(fp.left_tail_mass - xi) > max(tol, 1e-10):
            raise ValueError(f"positive part + xi sum to {fp.mass.sum() + xi!r}, not 1")
        return StepDistribution(fp, GeometricTail(Side.LEFT, xi, r))
    atoms = {int(k): float(v) for k, v in positive_pmf.items() if v != 0.0}
    if not atoms:
        raise ValueError("law is concentrated on a half-axis: no positive atoms")
    if min(atoms) < 1:
        raise ValueError("positive atoms must be supported on x >= 1")
    total = sum(atoms.values()) + xi
    if abs(total - 1.0) > tol:
        raise ValueError(f"atoms + xi sum to {total!r}, not 1")
    fp = IntegerPMF.from_atoms(atoms, left_tail_mass=1.0 - sum(atoms.values()))
    return StepDistribution(fp, GeometricTail(Side.LEFT, xi, r))


def mean(step: StepDistribution) -> float:
    """E[X]; the geometric side contributes +-xi*r/(1-r) in closed form."""
    tail = step.xi * step.r / (1.0 - step.r)
    finite = step.finite_part.mean()
    return finite + tail if step.side is Side.RIGHT else finite - tail


def pgf_eval(step: StepDistribution, s: float, with_bound: bool = False):
    """E[s^X] with the geometric side summed in closed form.

    With ``with_bound`` returns ``(value, bound)`` where ``bound`` covers the
    unresolved mass of the finite part.
    """
    lo, hi = step.pgf_radius()
    if not lo < s < hi:
        raise ValueError(f"s={s} outside the convergence region ({lo}, {hi})")
    fp, xi, r = step.finite_part, step.xi, step.r
    finite = float(np.dot(np.power(float(s), fp.support.astype(float)), fp.mass))
    if step.side is Side.RIGHT:
        value = finite + xi * (1.0 - r) / (1.0 - r * s)
        bound = fp.left_tail_mass * s ** (fp.lo - 1) if fp.left_tail_mass else 0.0
    else:
        value = finite + xi * (1.0 - r) / (1.0 - r / s)
        bound = fp.right_tail_mass * s ** (fp.hi + 1) if fp.right_tail_mass else 0.0
    return (value, bound) if with_bound else value


def pgf_derivative(step: StepDistribution, s: float) -> float:
    """d/ds E[s^X] on the convergence region."""
    lo, hi = step.pgf_radius()
    if not lo < s < hi:
        raise ValueError(f"s={s} outside the convergence region ({lo}, {hi})")
    fp, xi, r = step.finite_part, step.xi, step.r
    x = fp.support.astype(float)
    finite = float(np.dot(x * np.power(float(s), x - 1.0), fp.mass))
    if step.side is Side.RIGHT:
        return finite + xi * (1.0 - r) * r / (1.0 - r * s) ** 2
    return finite - xi * (1.0 - r) * r / (s - r) ** 2


def convolve(a: IntegerPMF, b: IntegerPMF) -> IntegerPMF:
    """Law of the sum of independent variables.

    Materialized atoms convolve exactly. Unmaterialized mass is booked
    conservatively: left x (left or middle) goes left, right x (right or
    middle) goes right, and left x right cross terms go right.
    """
    mass = np.convolve(a.mass, b.mass)
    ma, mb = float(a.mass.sum()), float(b.mass.sum())
    left = a.left_tail_mass * (b.left_tail_mass + mb) + ma * b.left_tail_mass
    right = max(0.0, 1.0 - left - float(mass.sum()))
    return IntegerPMF(a.lo + b.lo, a.hi + b.hi, np.clip(mass, 0.0, 1.0), left, right)


def convolve_power(a: IntegerPMF, n: int) -> IntegerPMF:
    """n-fold convolution, with ``a^{0*}`` the unit mass at 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = IntegerPMF.unit(0)
    for _ in range(n):
        out = convolve(out, a)
    return out


@dataclass(frozen=True)
class PowerSeries:
    """Coefficients c_0..c_K of a power series truncated after s**K."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a nonempty 1-D array")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, c: float, K: int) -> "PowerSeries":
        out = np.zeros(K + 1)
        out[0] = c
        return cls(out)

    @classmethod
    def monomial(cls, k: int, K: int, c: float = 1.0) -> "PowerSeries":
        out = np.zeros(K + 1)
        if k <= K:
            out[k] = c
        return cls(out)

    @classmethod
    def geometric(cls, q: float, K: int) -> "PowerSeries":
        """1 / (1 - q s)."""
        return cls(np.power(float(q), np.arange(K + 1)))

    @classmethod
    def from_coeffs(cls, c, K: int) -> "PowerSeries":
        c = np.asarray(c, dtype=float)[: K + 1]
        return cls(np.concatenate([c, np.zeros(K + 1 - c.size)]))

    def truncate(self, K: int) -> "PowerSeries":
        return PowerSeries.from_coeffs(self.coeffs, K)

    def __call__(self, s: float) -> float:
        return float(np.polynomial.polynomial.polyval(s, self.coeffs))

    def _lift(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            if other.K != self.K:
                raise ValueError("truncation orders differ")
            return other
        return PowerSeries.constant(float(other), self.K)

    def __add__(self, other):
        return PowerSeries(self.coeffs + self._lift(other).coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        return PowerSeries(self.coeffs - self._lift(other).coeffs)

    def __rsub__(self, other):
        return PowerSeries(self._lift(other).coeffs - self.coeffs)

    def __neg__(self):
        return PowerSeries(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return series_mul(self, other)
        return PowerSeries(self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return series_mul(self, series_reciprocal(other))
        return PowerSeries(self.coeffs / float(other))

    def shift(self, k: int = 1) -> "PowerSeries":
        """Multiply by s**k."""
        return PowerSeries(np.concatenate([np.zeros(k), self.coeffs[: self.K + 1 - k]]))


def series_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    K = min(a.K, b.K)
    return PowerSeries(np.convolve(a.coeffs[: K + 1], b.coeffs[: K + 1])[: K + 1])


def series_reciprocal(a: PowerSeries) -> PowerSeries:
    """1/a to the same order, by forward substitution."""
    c = a.coeffs
    if c[0] == 0.0:
        raise ZeroDivisionError("series has zero constant term")
    out = np.zeros_like(c)
    out[0] = 1.0 / c[0]
    for k in range(1, c.size):
        out[k] = -np.dot(c[1:k + 1], out[k - 1::-1]) / c[0]
    return PowerSeries(out)


def series_sqrt(a: PowerSeries) -> PowerSeries:
    """Square root with positive constant term: b**2 = a solved term by term."""
    c = a.coeffs
    if c[0] <= 0.0:
        raise ValueError("need a positive constant term")
    b = np.zeros_like(c)
    b[0] = math.sqrt(c[0])
    for k in range(1, c.size):
        b[k] = (c[k] - np.dot(b[1:k], b[k - 1:0:-1])) / (2.0 * b[0])
    return PowerSeries(b)


@dataclass(frozen=True)
class SupremumLaw:
    """PMF of a nonnegative integer variable on 0..K plus the mass above K."""

    pmf: np.ndarray
    tail_bound: float

    def __post_init__(self):
        object.__setattr__(self, "pmf", np.ascontiguousarray(self.pmf, dtype=np.float64))

    @property
    def K(self) -> int:
        return self.pmf.size - 1

    def sf(self, x_max: int | None = None) -> np.ndarray:
        """P(sup > x) for x = 0..x_max, computed as the remaining mass."""
        n = self.pmf.size if x_max is None else x_max + 1
        pmf = np.concatenate([self.pmf, np.zeros(max(0, n - self.pmf.size))])[:n]
        head = np.cumsum(pmf)
        return np.maximum(0.0, 1.0 - head)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation between two PMFs on 0.., padding the shorter with zeros."""
    n = max(p.size, q.size)
    pp = np.zeros(n)
    qq = np.zeros(n)
    pp[: p.size] = p
    qq[: q.size] = q
    return 0.5 * float(np.abs(pp - qq).sum() + abs(pp.sum() - qq.sum()))


def adjustment_root(step: StepDistribution, tol: float = 1e-12) -> float:
    """Largest-usable s0 > 1 with E[s0^X] <= 1, for Lundberg-type bounds.

    For a negative-drift walk P(sup S_n >= y) <= s0**(-y). Found by bisection
    on the convex pgf; when the pgf stays below 1 up to its radius, a point
    just inside the radius is returned.
    """
    if mean(step) >= 0.0:
        raise ValueError("adjustment root needs negative drift")
    lo_s, hi_s = 1.0, step.pgf_radius()[1]
    if math.isinf(hi_s):
        hi_s = 2.0
        while pgf_eval(step, hi_s) <= 1.0:
            hi_s *= 2.0
    else:
        top = hi_s * (1.0 - 1e-9)
        if pgf_eval(step, top) <= 1.0:
            return top
        hi_s = top
    while hi_s - lo_s > tol * hi_s:
        mid = 0.5 * (lo_s + hi_s)
        if pgf_eval(step, mid) <= 1.0:
            lo_s = mid
        else:
            hi_s = mid
    return lo_s
