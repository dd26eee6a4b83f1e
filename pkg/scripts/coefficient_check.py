"""Compare enumerated ladder masses L{x} with the two candidate pointwise formulas.

For a left-tailed law, (1 - zeta) L{x} is either P(X=x) + (1-r) P(X>x) or
P(X=x) + r P(X>x). Depth-limited path enumeration gives a lower bound on L{x}
and a Lundberg bound on what is still unresolved; only one candidate fits.

    python3 scripts/coefficient_check.py --xi 0.5 --r 0.8 --atom 1:0.2 --atom 2:0.15 --atom 4:0.15
"""

import argparse
import sys
from pathlib import Path

from geokp import kp_left
from geokp.cli import parse_atoms
from geokp.dist import step_from_left_tail

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import enumerate_ladders  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--xi", type=float, default=0.5)
    ap.add_argument("--r", type=float, default=0.8)
    ap.add_argument("--atom", action="append", default=None)
    ap.add_argument("--depth", type=int, default=14)
    args = ap.parse_args()
    atoms = parse_atoms(args.atom or ["1:0.2", "2:0.15", "4:0.15"])
    step = step_from_left_tail(args.xi, args.r, atoms)
    zeta = kp_left.solve(step).zeta
    enum = enumerate_ladders(step, depth=args.depth)
    bound = enum["bound"]
    print(f"zeta = {zeta:.12f}, enumeration depth {args.depth}, unresolved bound {bound:.4g}")
    print(f"{'x':>3} {'enum':>12} {'enum+bound':>12} {'(1-r) form':>12} {'r form':>12}")
    for x in range(1, step.finite_part.hi + 1):
        lo = enum["L"].get(x, 0.0)
        a = (step.atom(x) + (1 - step.r) * step.sf(x)) / (1 - zeta)
        b = (step.atom(x) + step.r * step.sf(x)) / (1 - zeta)
        fit = lambda v: "*" if lo - 1e-14 <= v <= lo + bound + 1e-14 else " "  # noqa: E731
        print(f"{x:>3} {lo:12.8f} {lo + bound:12.8f} {a:11.8f}{fit(a)} {b:11.8f}{fit(b)}")
    print("* = inside the enumeration bracket")


if __name__ == "__main__":
    main()
