"""Oracles that do not use any ladder theory.

* Lindley iteration w' = max(0, w + X) on a truncated lattice, started from 0;
  its increasing limit is the law of the supremum.
* Monte Carlo sampling of the walk maximum.
* An event-driven simulation of the tandem queue itself.

Random streams: each fixed-size chunk of work gets its own
``SeedSequence(seed, spawn_key=(chunk,))`` stream, so output depends only on
the seed and the work size, never on how many workers run the chunks.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dist import StepDistribution, SupremumLaw, mean
from .tandem import TandemParams

WALK_CHUNK = 1 << 15
CHAIN_LEN = 1 << 16
BATCH_LEN = 1 << 12
WARMUP = 1000


@dataclass(frozen=True)
class LindleyState:
    dist: np.ndarray
    iteration: int
    tv_delta: float
    leak: float
    residual: float

    @property
    def law(self) -> SupremumLaw:
        return SupremumLaw(pmf=self.dist, tail_bound=self.leak + self.residual)


def lindley_run(step: StepDistribution, x_max: int = 400, tol: float = 1e-11,
                max_sweeps: int = 200_000) -> LindleyState:
    """Iterate the waiting-time recursion from a unit mass at 0.

    Mass pushed above ``x_max`` is removed and accumulated in ``leak``. The
    iteration stops once the change per sweep, extrapolated geometrically over
    all later sweeps, is below ``tol``.
    """
    if mean(step) >= 0.0:
        raise ValueError(f"walk needs negative drift, mean = {mean(step)}")
    n = x_max + 1
    atoms = step.atoms(-x_max, x_max)  # index j -> x = j - x_max
    y = np.arange(n)
    down = np.array([step.cdf(-int(v)) for v in y])
    up = np.array([step.sf(x_max - int(v)) for v in y])
    w = np.zeros(n)
    w[0] = 1.0
    leak = 0.0
    prev = math.inf
    for it in range(1, max_sweeps + 1):
        c = np.convolve(w, atoms)  # index k -> value k - x_max
        new = np.empty(n)
        new[1:] = c[x_max + 1:2 * x_max + 1]
        new[0] = float(np.dot(w, down))
        out = float(np.dot(w, up))
        leak += out
        delta = 0.5 * (float(np.abs(new - w).sum()) + out)
        w = new
        q = min(delta / prev, 0.999999) if prev > 0.0 else 0.0
        prev = delta
        residual = delta * q / (1.0 - q)
        if it > 1 and residual < tol and delta < tol:
            return LindleyState(w, it, delta, leak, residual + delta)
    raise RuntimeError(f"Lindley iteration not converged in {max_sweeps} sweeps "
                       f"(last change {prev:.3g})")


def lindley_fixed_point(step: StepDistribution, x_max: int = 400, tol: float = 1e-11,
                        max_sweeps: int = 200_000) -> SupremumLaw:
    return lindley_run(step, x_max, tol, max_sweeps).law


def _hist(values) -> dict[int, int]:
    return dict(sorted(Counter(np.asarray(values).tolist()).items()))


@dataclass(frozen=True)
class SimReport:
    """Histograms of a simulation run.

    ``histogram`` is the headline quantity (the walk maximum for
    :func:`mc_sup`, queue-2 occupancy Z for :func:`simulate_tandem`).
    ``batch_histograms`` hold Z per consecutive batch, for batch-means errors.
    """

    histogram: dict[int, int]
    n_samples: int
    seed: int
    n_histogram: dict[int, int] = field(default_factory=dict)
    m_histogram: dict[int, int] = field(default_factory=dict)
    z_histogram: dict[int, int] = field(default_factory=dict)
    batch_histograms: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    def frequencies(self, which: str = "histogram", x_max: int | None = None) -> np.ndarray:
        h = getattr(self, which)
        top = max(h) if x_max is None else x_max
        out = np.zeros(top + 1)
        for k, c in h.items():
            if 0 <= k <= top:
                out[k] = c
        total = sum(h.values())
        return out / total

    def to_dict(self) -> dict:
        def keys(h):
            return {str(k): v for k, v in h.items()}
        return {
            "histogram": keys(self.histogram),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "n_histogram": keys(self.n_histogram),
            "m_histogram": keys(self.m_histogram),
            "z_histogram": keys(self.z_histogram),
            "batch_histograms": [keys(h) for h in self.batch_histograms],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _stream(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _walk_chunk(step, n_paths, n_steps, max_steps, seed, chunk):
    rng = _stream(seed, chunk)
    s = np.zeros(n_paths, dtype=np.int64)
    best = np.zeros(n_paths, dtype=np.int64)
    done = 0
    target = n_steps
    block = 64
    while True:
        half_best = None
        while done < target:
            if half_best is None and done >= target // 2:
                half_best = best.copy()
            k = min(block, target - done)
            x = step.sample(rng, n_paths * k).reshape(n_paths, k)
            path = s[:, None] + np.cumsum(x, axis=1)
            best = np.maximum(best, path.max(axis=1))
            s = path[:, -1]
            done += k
        if half_best is None:
            half_best = best
        late = float(np.mean(best > half_best))
        if late < 1e-3 or target >= max_steps:
            return best, target, late
        target *= 2


def mc_sup(step: StepDistribution, n_paths: int, n_steps: int = 256, seed: int = 42,
           max_steps: int = 1 << 16, workers: int = 1) -> SimReport:
    """Empirical law of max_{k <= n} S_k over ``n_paths`` independent walks.

    Each chunk doubles its horizon until fewer than 0.1% of paths raised their
    maximum during the second half.
    """
    if mean(step) >= 0.0:
        raise ValueError(f"walk needs negative drift, mean = {mean(step)}")
    sizes = [min(WALK_CHUNK, n_paths - i) for i in range(0, n_paths, WALK_CHUNK)]
    args = [(step, m, n_steps, max_steps, seed, c) for c, m in enumerate(sizes)]
    results = _map(_walk_chunk_star, args, workers)
    best = np.concatenate([b for b, _, _ in results])
    horizons = [t for _, t, _ in results]
    return SimReport(histogram=_hist(best), n_samples=n_paths, seed=seed,
                     diagnostics={"max_horizon": max(horizons),
                                  "late_fraction": max(f for _, _, f in results)})


def _walk_chunk_star(args):
    return _walk_chunk(*args)


def _map(fn, args, workers):
    if workers <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args))


def _tandem_chain(args):
    """One chain: ``warmup`` discarded cycles then ``n`` recorded ones.

    A cycle starts with an arrival to an empty queue 1. Server 1 moves
    customers to queue 2 until queue 1 empties (N of them). Server 2 then runs
    until the next arrival; every ring of its clock is a dissociation
    opportunity (M counts them), removing the most recently added customer if
    queue 2 is nonempty. Z is queue 2's length at the arrival that ends the
    cycle.
    """
    alpha, beta, gamma, n, warmup, seed, chunk = args
    rng = _stream(seed, chunk)
    block = 1 << 16
    buf = []
    pos = block

    def expo():
        nonlocal buf, pos
        if pos == block:
            u = rng.random(block)
            while np.any(u == 0.0):
                u[u == 0.0] = rng.random(int(np.count_nonzero(u == 0.0)))
            buf = (-np.log(u)).tolist()
            pos = 0
        pos += 1
        return buf[pos - 1]

    total = n + warmup
    ns = np.empty(total, dtype=np.int64)
    ms = np.empty(total, dtype=np.int64)
    zs = np.empty(total, dtype=np.int64)
    queue2 = 0
    clock = 0.0
    for c in range(total):
        queue1 = 1
        served = 0
        while queue1:
            t_arr = alpha * expo()
            t_srv = beta * expo()
            if t_arr <= t_srv:
                clock += t_arr
                queue1 += 1
            else:
                clock += t_srv
                queue1 -= 1
                queue2 += 1
                served += 1
        rings = 0
        while True:
            t_arr = alpha * expo()
            t_dis = gamma * expo()
            if t_arr <= t_dis:
                clock += t_arr
                break
            clock += t_dis
            rings += 1
            if queue2:
                queue2 -= 1
        ns[c], ms[c], zs[c] = served, rings, queue2
    return ns[warmup:], ms[warmup:], zs[warmup:], clock


def _corr(a, b):
    a = a.astype(float) - a.mean()
    b = b.astype(float) - b.mean()
    den = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    return float(np.dot(a, b) / den) if den > 0 else 0.0


def simulate_tandem(params: TandemParams, n_cycles: int, seed: int = 42, workers: int = 1,
                    warmup: int = WARMUP) -> SimReport:
    """Event-driven tandem queue; records N, M and Z per busy cycle.

    Cycles are split into independent chains of fixed length, each with its
    own warm-up; chains are assigned substreams by index.
    """
    if params.b >= 1.0:
        warnings.warn(f"unstable parameters (a={params.a:.4g}, b={params.b:.4g}); "
                      "Z will drift upward", RuntimeWarning, stacklevel=2)
    sizes = [min(CHAIN_LEN, n_cycles - i) for i in range(0, n_cycles, CHAIN_LEN)]
    args = [(params.alpha, params.beta, params.gamma, m, warmup, seed, c)
            for c, m in enumerate(sizes)]
    chains = _map(_tandem_chain, args, workers)
    n_all = np.concatenate([c[0] for c in chains])
    m_all = np.concatenate([c[1] for c in chains])
    z_all = np.concatenate([c[2] for c in chains])
    batches = []
    for _, _, z, _ in chains:
        for i in range(0, z.size - BATCH_LEN + 1, BATCH_LEN):
            batches.append(_hist(z[i:i + BATCH_LEN]))
    pairs = [(n[:-1], n[1:], m[:-1], m[1:]) for n, m, _, _ in chains]
    diagnostics = {
        "chains": len(chains),
        "warmup": warmup,
        "corr_NM": _corr(n_all, m_all),
        "corr_NN": _corr(np.concatenate([p[0] for p in pairs]), np.concatenate([p[1] for p in pairs])),
        "corr_MM": _corr(np.concatenate([p[2] for p in pairs]), np.concatenate([p[3] for p in pairs])),
        "n_pairs": int(sum(p[0].size for p in pairs)),
    }
    z_hist = _hist(z_all)
    return SimReport(histogram=z_hist, n_samples=int(z_all.size), seed=seed,
                     n_histogram=_hist(n_all), m_histogram=_hist(m_all), z_histogram=z_hist,
                     batch_histograms=tuple(batches), diagnostics=diagnostics)


def batch_means(report: SimReport, x_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean Z frequency per bin and its batch-means standard error."""
    nb = len(report.batch_histograms)
    if nb < 2:
        raise ValueError("need at least two batches")
    freq = np.zeros((nb, x_max + 1))
    for i, h in enumerate(report.batch_histograms):
        tot = sum(h.values())
        for k, c in h.items():
            if k <= x_max:
                freq[i, k] = c / tot
    return freq.mean(axis=0), freq.std(axis=0, ddof=1) / math.sqrt(nb)
