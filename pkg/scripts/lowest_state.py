"""How close do one-particle states come to the constant-S bound?

Minimises the energy density over spans of disjoint bumps and compares
with the bound, for several widths tau.
"""
import argparse

import numpy as np

from qeiform.numerics import GaussianTestFunction
from qeiform.qei_engine import constant_s_bound, lowest_bump_state
from qeiform.smodel import Federbush, ising
from qeiform.stress_tensor import StressTensorSpec, build_F


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--taus", default="0.3,0.5,1,2")
    ap.add_argument("--half-width", type=float, default=0.25)
    ap.add_argument("--span", type=float, default=3.0)
    args = ap.parse_args()
    centers = np.arange(-args.span, args.span + 1e-9, 2 * args.half_width)
    print("model,tau,lowest,minus_bound,ratio")
    for name, model in (("ising", ising()), ("federbush", Federbush(0.25, 1.0, 1.0))):
        spec = StressTensorSpec(model)
        F = build_F(spec)
        for tau in (float(x) for x in args.taus.split(",")):
            g = GaussianTestFunction(tau)
            low, _ = lowest_bump_state(F, g, centers, args.half_width)
            b = constant_s_bound(spec, g).constant
            print(f"{name},{tau:g},{low:.6e},{-b:.6e},{low / -b:.4f}")


if __name__ == "__main__":
    main()
