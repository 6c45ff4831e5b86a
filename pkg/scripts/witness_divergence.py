"""Witness sequences for failing QEIs: expectation values for j = 1..jmax."""
import argparse
import time

from qeiform.numerics import GaussianTestFunction
from qeiform.qei_engine import build_witness_sequence
from qeiform.smodel import BulloughDodd, Federbush, NonlinearSigma, ScalarProduct
from qeiform.stress_tensor import RationalPrefactor, StressTensorSpec

CASES = {
    "federbush s1=2+x": StressTensorSpec(Federbush(0.25, 1.0, 1.0), {"s1": RationalPrefactor((2.0, 1.0))}),
    "gbd n=1 q=-x^3": StressTensorSpec(BulloughDodd((0.4,)), {"q": RationalPrefactor((0, 0, 0, -1.0))}),
    "O(3) q=2+x": StressTensorSpec(NonlinearSigma(3), {"q": RationalPrefactor((2.0, 1.0))}),
    "sinh-Gordon b=.5 q=x^2": StressTensorSpec(ScalarProduct(1, (0.5,)), {"q": RationalPrefactor((0, 0, 1.0))}),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jmax", type=int, default=5)
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--nodes", type=int, default=48)
    args = ap.parse_args()
    g = GaussianTestFunction(args.tau)
    print("case,j,expectation")
    for name, spec in CASES.items():
        t0 = time.perf_counter()
        for w in build_witness_sequence(spec, g, args.jmax, nodes=args.nodes):
            print(f"{name},{w.j},{w.expectation:.10g}")
        print(f"# {name}: {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
