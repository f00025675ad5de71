"""Shared fixtures: expensive objects built once per session."""

import numpy as np
import pytest

from kslyap.exponents import OperatorOrder, solve_critical_exponents
from kslyap.potential import PiecewiseParams, PotentialProfile, build_profile, smooth


@pytest.fixture(scope="session")
def critical_pair():
    return solve_critical_exponents(OperatorOrder.FOURTH).pair


@pytest.fixture(scope="session")
def default_sp():
    """Smoothed default step potential (a=1, q0=1/2, q1=2, delta=1/64)."""
    return smooth(PiecewiseParams())


@pytest.fixture(scope="session")
def profile32():
    """Constructed potential profile at L = 32 with the default parameters."""
    return build_profile(32.0)


@pytest.fixture()
def make_flat_profile(critical_pair):
    """Factory for profiles with constant phi_x (phi_x = 0 gives the free operator)."""

    def make(L=64.0, n=16384, slope=0.0):
        x = -L + (2.0 * L / n) * np.arange(n)
        phi_x = np.full(n, float(slope))
        phi = slope * x
        phi -= phi[n // 2]
        return PotentialProfile(
            L=float(L),
            phi=phi,
            phi_x=phi_x,
            phi_xx=np.zeros(n),
            mean_q=-1.0,
            exponents=critical_pair,
        )

    return make
