from __future__ import annotations

import pytest

from chemolab.params import CoefficientSpec, ParameterSet


@pytest.fixture
def p1() -> ParameterSet:
    """Reference set: chi = lam = mu = 1, a in [1, 2], b in [5, 6], 1D."""
    return ParameterSet(
        chi=1.0, lam=1.0, mu=1.0, dims=1,
        a=CoefficientSpec(base=1.5, space_amplitude=0.5, space_wavelength=10.0),
        b=CoefficientSpec(base=5.5, space_amplitude=-0.5, space_wavelength=10.0),
    )


def homogeneous(a0: float, b0: float, chi: float = 1.0, lam: float = 1.0,
                mu: float = 1.0, dims: int = 1) -> ParameterSet:
    return ParameterSet(chi=chi, lam=lam, mu=mu, dims=dims,
                        a=CoefficientSpec.constant(a0),
                        b=CoefficientSpec.constant(b0))
