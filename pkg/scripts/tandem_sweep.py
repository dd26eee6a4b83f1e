"""Sweep the tandem queue over (beta, gamma) and tabulate the stationary queue-2 law.

    python3 scripts/tandem_sweep.py --betas 0.1 0.3 0.5 --gammas 0.2 0.3 0.4 --cycles 200000
"""

import argparse
from dataclasses import dataclass, field

import numpy as np

from geokp import sim, tandem
from geokp.tandem import LoadError, TandemParams


@dataclass
class SweepConfig:
    alpha: float = 1.0
    betas: list = field(default_factory=lambda: [0.1, 0.3, 0.5])
    gammas: list = field(default_factory=lambda: [0.2, 0.3, 0.4])
    K: int = 256
    cycles: int = 0
    seed: int = 42


def row(cfg: SweepConfig, beta: float, gamma: float) -> str:
    params = TandemParams(cfg.alpha, beta, gamma)
    try:
        rep = tandem.analyze(params, K=cfg.K)
    except LoadError as exc:
        return f"{beta:6.2f} {gamma:6.2f}  {exc}"
    pmf = rep.solution.sup.pmf
    line = (f"{beta:6.2f} {gamma:6.2f} {params.a:6.3f} {params.r:6.3f} {params.b:6.3f} "
            f"{rep.solution.zeta:8.5f} {rep.solution.p:8.5f} {pmf[0]:8.5f} "
            f"{float(np.dot(np.arange(pmf.size), pmf)):8.4f}")
    if cfg.cycles:
        mc = sim.simulate_tandem(params, cfg.cycles, seed=cfg.seed)
        z = mc.frequencies("z_histogram")
        line += f" {z[0]:8.5f} {float(np.dot(np.arange(z.size), z)):8.4f}"
    return line


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.2, 0.3, 0.4])
    ap.add_argument("--K", type=int, default=256)
    ap.add_argument("--cycles", type=int, default=0, help="also simulate this many cycles")
    ap.add_argument("--seed", type=int, default=42)
    cfg = SweepConfig(**vars(ap.parse_args()))
    head = (f"{'beta':>6} {'gamma':>6} {'a':>6} {'r':>6} {'b':>6} {'zeta':>8} {'p':>8} "
            f"{'P(Z=0)':>8} {'E[Z]':>8}")
    if cfg.cycles:
        head += f" {'mc Z=0':>8} {'mc E[Z]':>8}"
    print(head)
    for beta in cfg.betas:
        for gamma in cfg.gammas:
            print(row(cfg, beta, gamma))


if __name__ == "__main__":
    main()
