"""Brute-force references shared by several test modules.

The enumeration here walks every path of a truncated step law to a fixed
depth, merging paths that share (value, phase). It is deliberately written
without numpy or any of the package's DP code.
"""

from collections import defaultdict

import math

from geokp.dist import adjustment_root, step_from_right_tail


def truncated_atoms(step, tail_cut):
    lo = -tail_cut
    hi = max(step.finite_part.hi, 0)
    atoms = {x: step.atom(x) for x in range(lo, hi + 1)}
    atoms = {x: p for x, p in atoms.items() if p > 0.0}
    escape = step.cdf(lo - 1)
    return atoms, escape


def enumerate_ladders(step, depth, tail_cut=60):
    """Depth-limited enumeration of first ladder events.

    Returns a dict with
      L[h]      P(first strict ladder height = h within depth)
      L_tied[h] same, restricted to paths whose first weak epoch had height 0
      weak[h]   P(first weak ladder height = h >= 1 within depth)
      zeta      P(first weak ladder height = 0 within depth)
      bound     Lundberg bound on everything not resolved by depth
    """
    atoms, escape = truncated_atoms(step, tail_cut)
    s0 = adjustment_root(step)
    L, L_tied, weak = defaultdict(float), defaultdict(float), defaultdict(float)
    zeta = 0.0
    lost = 0.0
    states = {(0, "neg"): 1.0}
    for _ in range(depth):
        nxt = defaultdict(float)
        for (v, phase), pr in states.items():
            lost += pr * escape
            for x, px in atoms.items():
                q = pr * px
                u = v + x
                if u > 0:
                    L[u] += q
                    if phase == "tied":
                        L_tied[u] += q
                    else:
                        weak[u] += q
                elif u == 0:
                    if phase == "neg":
                        zeta += q
                    nxt[(0, "tied")] += q
                else:
                    nxt[(u, phase)] += q
        states = nxt
    in_flight = sum(pr * s0 ** (v - 1) for (v, _), pr in states.items())
    bound = in_flight + lost * s0 ** (-tail_cut - 1)
    return {"L": dict(L), "L_tied": dict(L_tied), "weak": dict(weak), "zeta": zeta,
            "bound": bound, "depth": depth}


def exact_sup_probability_right(xi, r, neg_atoms):
    """p for a right-tailed law from the quadratic/root condition, solved with numpy.roots.

    Only valid for a single negative atom at -1: f(s) = q/s + xi(1-r)/(1-rs) = 1.
    """
    import numpy as np
    (x, q), = neg_atoms.items()
    assert x == -1
    # q(1 - r s) + xi(1-r) s = s (1 - r s)  ->  r s^2 + (xi(1-r) - q r - 1) s + q = 0
    roots = np.roots([r, xi * (1 - r) - q * r - 1.0, q])
    s_star = max(z.real for z in roots if 1.0 + 1e-9 < z.real < 1.0 / r)
    p = 1.0 - (1.0 - 1.0 / s_star) / (1.0 - r)
    return s_star, p


def negative_drift_law(xi, r, drift_extra=0.3):
    """Right-tailed law with atoms at -1 and -D tuned so the mean is negative."""
    q = 1.0 - xi
    tail_mean = xi * r / (1.0 - r)
    need = 1.5 * tail_mean + drift_extra  # minus the finite-part mean
    D = max(2, math.ceil(need / q) + 1)
    w = min(q, (q * D - need) / (D - 1))
    return step_from_right_tail(xi, r, {-1: w, -D: q - w})
