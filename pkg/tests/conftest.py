import numpy as np
import pytest

from explicit_lqr.atlas import Setup, build_atlas
from explicit_lqr.bitset import ActiveSetTuple
from explicit_lqr.geom import Polytope
from explicit_lqr.lqcore import ProblemSpec, example1


@pytest.fixture(scope="session")
def spec():
    return example1()


@pytest.fixture(scope="session")
def setup(spec):
    return Setup.from_spec(spec)


@pytest.fixture(scope="session")
def atlas1(setup):
    return build_atlas(setup, 1)


@pytest.fixture(scope="session")
def atlas2(setup):
    return build_atlas(setup, 2)


@pytest.fixture(scope="session")
def atlas3(setup):
    return build_atlas(setup, 3)


@pytest.fixture(scope="session")
def atlas2_ext(setup, atlas1):
    return build_atlas(setup, 2, previous=atlas1)


@pytest.fixture(scope="session")
def qp1(atlas1):
    return atlas1.qp


@pytest.fixture(scope="session")
def qp2(atlas2):
    return atlas2.qp


@pytest.fixture(scope="session")
def loose_setup(spec):
    """Example dynamics with a small state box and inputs that never saturate."""
    loose = ProblemSpec(spec.A, spec.B, spec.Q, spec.R, Polytope.box([-1, -1], [1, 1]),
                        Polytope.box([-100], [100]), stage_order="ux", name="loose")
    return Setup.from_spec(loose)


@pytest.fixture(scope="session")
def scalar_spec():
    return ProblemSpec(A=[[1.2]], B=[[1.0]], Q=[[1.0]], R=[[1.0]],
                       X=Polytope.box([-5.0], [5.0]), U=Polytope.box([-1.0], [1.0]),
                       name="scalar")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tup(spec, setup):
    """Parse dotted tuple text against the example row layout."""
    layout = setup.qp(1).layout

    def parse(text):
        return ActiveSetTuple.parse(text, layout)
    return parse
