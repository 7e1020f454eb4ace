import numpy as np
import pytest

from subpois import BernsteinSpec, ProcessParams


def canonical_specs() -> dict[str, BernsteinSpec]:
    return {
        "stable": BernsteinSpec.stable(0.5),
        "tempered": BernsteinSpec.tempered(0.5, 1.0),
        "gamma": BernsteinSpec.gamma(),
        "dirac": BernsteinSpec.dirac_unit(1.0),
        "linear": BernsteinSpec.linear(),
    }


@pytest.fixture(scope="session")
def specs():
    return canonical_specs()


@pytest.fixture(params=list(canonical_specs()))
def family_params(request) -> ProcessParams:
    """One ProcessParams per canonical family at lambda = 1."""
    return ProcessParams(canonical_specs()[request.param], 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
