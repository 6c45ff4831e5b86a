import pytest

from qeiform.smodel import (BulloughDodd, Federbush, NonlinearSigma, ScalarProduct, free_boson,
                            free_fermion, ising)


def scalar_presets():
    return {
        "free_boson": free_boson(),
        "free_fermion": free_fermion(),
        "ising": ising(),
        "sg_b0.1": ScalarProduct(1, (0.1,)),
        "sg_b0.5": ScalarProduct(1, (0.5,)),
        "sg_b0.9": ScalarProduct(1, (0.9,)),
        "sg_pair": ScalarProduct(1, (0.5 + 0.3j, 0.5 - 0.3j)),
        "sg_eps-1": ScalarProduct(-1, (0.3, 0.6)),
        "gbd_n1": BulloughDodd((0.4,)),
        "gbd_n2": BulloughDodd((0.5 + 0.2j, 0.5 - 0.2j)),
    }


def matrix_presets():
    return {
        "federbush": Federbush(0.3, 1.0, 1.5),
        "nls3": NonlinearSigma(3),
        "nls4": NonlinearSigma(4),
        "nls8": NonlinearSigma(8),
    }


def all_presets():
    return {**scalar_presets(), **matrix_presets()}


@pytest.fixture(params=sorted(all_presets()))
def preset(request):
    return request.param, all_presets()[request.param]
