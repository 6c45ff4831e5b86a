"""Print the QEI verdict table for the preset families, analytic next to generic."""
import argparse
import warnings

from qeiform.minsol import BandUnstableWarning
from qeiform.qei_engine import decide_qei, prefactor_for_constant
from qeiform.smodel import BulloughDodd, Federbush, NonlinearSigma, ScalarProduct
from qeiform.stress_tensor import RationalPrefactor, StressTensorSpec


def q_of_degree(deg):
    # (-x)^deg, normalized at x = -1
    return RationalPrefactor(tuple([0.0] * deg + [(-1.0) ** deg]))


def cases():
    for bs in ((0.5 + 0.3j, 0.5 - 0.3j), (0.3,), (0.2, 0.5, 0.8)):
        m = ScalarProduct(1, bs)
        for deg in range(4):
            yield f"sinh-Gordon b={bs} deg={deg}", StressTensorSpec(m, {"q": q_of_degree(deg)})
    m = ScalarProduct(1, (0.3, 0.6))
    for c in (0.2, 0.25, 0.3):
        yield f"sinh-Gordon s=2 deg=2 c={c}", StressTensorSpec(m, {"q": prefactor_for_constant(m, 2, c)})
    for bs in ((0.4,), (0.4, 0.7)):
        m = BulloughDodd(bs)
        for deg in range(m.n + 3):
            yield f"gBD n={m.n} deg={deg}", StressTensorSpec(m, {"q": q_of_degree(deg)})
    yield "Federbush canonical", StressTensorSpec(Federbush(0.3, 1.0, 1.5))
    yield "Federbush s1 = 2 + x", StressTensorSpec(Federbush(0.3, 1.0, 1.5),
                                                   {"s1": RationalPrefactor((2.0, 1.0))})
    for n in (3, 4, 8):
        yield f"O({n}) q=1", StressTensorSpec(NonlinearSigma(n))
        yield f"O({n}) q=2+x", StressTensorSpec(NonlinearSigma(n), {"q": RationalPrefactor((2.0, 1.0))})


def main():
    argparse.ArgumentParser(description=__doc__).parse_args()
    print(f"{'case':40s} {'analytic':9s} {'generic':9s} {'k':>5s} {'l':>6s} {'c':>10s}")
    for name, spec in cases():
        a = decide_qei(spec, "analytic")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BandUnstableWarning)
            g = decide_qei(spec, "generic")
        c = "" if a.marginal_constant_c is None else f"{a.marginal_constant_c:.6f}"
        flag = "" if a.status == g.status else "  <-- disagree"
        print(f"{name:40s} {a.status:9s} {g.status:9s} {g.growth_exponent:5.2f} "
              f"{g.log_power:6.2f} {c:>10s}{flag}")


if __name__ == "__main__":
    main()
