"""Measured growth bands of |F(th + i pi)| against the predicted th^l e^{k th}."""
import argparse

from qeiform.minsol import assemble_minimal, classify_growth
from qeiform.smodel import BulloughDodd, NonlinearSigma, ScalarProduct


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--thetas", default="5,10,15,20,25,30")
    args = ap.parse_args()
    th = tuple(float(x) for x in args.thetas.split(","))
    sources = [("sinh-Gordon b=0.5", ScalarProduct(1, (0.5,)), None),
               ("sinh-Gordon pair", ScalarProduct(1, (0.5 + 0.3j, 0.5 - 0.3j)), None),
               ("gBD n=1", BulloughDodd((0.4,)), None)]
    sources += [(f"O({n}) S_{ch}", NonlinearSigma(n), ch) for n in (3, 4, 8) for ch in "+-0"]
    print("source,k,l,band_lo,band_hi,ratio,drift,F_inf")
    for name, src, ch in sources:
        msol = assemble_minimal(src, ch)
        gc = classify_growth(msol, thetas=th)
        finf = "" if msol.asymptotic_constant is None else f"{msol.asymptotic_constant:.10g}"
        print(f"{name},{round(gc.exponent, 12):g},{gc.log_power:.4g},{gc.band[0]:.8g},{gc.band[1]:.8g},"
              f"{gc.ratio:.6f},{gc.drift:.2e},{finf}")


if __name__ == "__main__":
    main()
