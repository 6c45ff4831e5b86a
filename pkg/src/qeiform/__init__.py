"""Form factors, minimal solutions and one-particle energy inequalities for
integrable models with factorizing scattering."""

from .charfct import CharacteristicFunction, charfct_numeric, growth_data
from .minsol import MinimalSolution, assemble_minimal, classify_growth, watson_residual
from .numerics import GaussianTestFunction
from .qei_engine import (QeiBound, QeiVerdict, WavePacket, build_witness_sequence,
                         constant_s_bound, decide_qei, expectation_energy_density)
from .smodel import (BulloughDodd, ConstantMatrix, Federbush, NonlinearSigma, ScalarProduct,
                     check_axioms, eigen_decompose, free_boson, free_fermion, ising,
                     spec_from_dict)
from .stress_tensor import RationalPrefactor, StressTensorSpec, build_F

__version__ = "0.1.0"
