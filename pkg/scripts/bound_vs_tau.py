"""CSV of the constant-S bound against the Gaussian width tau."""
import argparse

from qeiform.numerics import GaussianTestFunction
from qeiform.qei_engine import constant_s_bound
from qeiform.smodel import Federbush, free_boson, ising
from qeiform.stress_tensor import StressTensorSpec

MODELS = {"federbush": lambda: Federbush(0.25, 1.0, 1.0),
          "federbush_m2": lambda: Federbush(0.25, 1.0, 2.0),
          "ising": ising, "free_boson": free_boson}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--taus", default="0.25,0.5,1,2,4,8")
    args = ap.parse_args()
    taus = [float(x) for x in args.taus.split(",")]
    specs = {k: StressTensorSpec(f()) for k, f in MODELS.items()}
    print("tau," + ",".join(specs))
    for tau in taus:
        g = GaussianTestFunction(tau)
        row = [constant_s_bound(s, g).constant for s in specs.values()]
        print(f"{tau:g}," + ",".join(f"{v:.12g}" for v in row))

if __name__ == "__main__":
    main()
