"""Attracting-ball constants: the decay/forcing pair (lambda, M^2) behind the
differential inequality d/dt |u - phi|_2^2 <= -lambda |u|_2^2 + M^2, the two
ball radii it implies, and a residual monitor that checks the inequality along
simulated trajectories.

The forcing constant uses the weighted-norm bookkeeping constants of the
rescaled estimate: M^2 = 16 |phi_x|_2^2 + 2*16^3 |phi_xx|_2^2 by default, with
both coefficients exposed. lambda is taken from the certified coercivity
margin, the only computable instantiation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .potential import PotentialProfile, norms
from .solver import Trajectory

#: default weights in M^2 = GRAD_COEFF*|phi_x|^2 + HESS_COEFF*|phi_xx|^2;
#: GRAD_COEFF is the amplitude rescale factor, HESS_COEFF = 2*rescale^3
GRAD_COEFF = 16.0
HESS_COEFF = 2.0 * 16.0**3


class NotCertifiedError(ValueError):
    """Operation requires a positive certified coercivity margin."""


class InsufficientDataError(ValueError):
    """Too few trajectory samples for a centered-difference residual."""


@dataclass(frozen=True)
class LyapunovConstants:
    """Decay rate, forcing constant, and the bookkeeping constants of the
    estimate they came from (Cauchy-Schwarz weights and rescale factors)."""

    lam: float
    M2: float
    p: float = 0.5
    q_cs: float = 1.0
    beta: float = 64.0
    gamma_rescale: float = 16.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.M2 < 0:
            raise ValueError("M2 must be nonnegative")


@dataclass(frozen=True)
class AttractorBound:
    """r_star: ball radius about phi; r_star_star: ball radius about 0."""

    r_star: float
    r_star_star: float


def radius(phi_norm: float, M2: float, lam: float) -> AttractorBound:
    """r_star^2 = |phi|^2 + 2 M^2/lambda and
    r_star_star = sqrt(2 |phi|^2 + 2 M^2/lambda) + |phi|."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if M2 < 0 or phi_norm < 0:
        raise ValueError("phi_norm and M2 must be nonnegative")
    r_star = math.sqrt(phi_norm**2 + 2.0 * M2 / lam)
    r_star_star = math.sqrt(2.0 * phi_norm**2 + 2.0 * M2 / lam) + phi_norm
    return AttractorBound(r_star=r_star, r_star_star=r_star_star)


def forcing_constant(
    profile: PotentialProfile, grad_coeff: float = GRAD_COEFF, hess_coeff: float = HESS_COEFF
) -> float:
    """M^2 = grad_coeff * |phi_x|_2^2 + hess_coeff * |phi_xx|_2^2."""
    nrm = norms(profile)
    return grad_coeff * nrm.phi_x**2 + hess_coeff * nrm.phi_xx**2


@dataclass(frozen=True)
class HeadlineBound:
    """Final ball radius for one profile, with the L^{3/2}-scaled value."""

    L: float
    lam: float
    M2: float
    phi_norm: float
    h2_norm: float
    r_star: float
    r_star_star: float
    r_scaled: float


def headline_bound(profile: PotentialProfile, delta_margin: float) -> HeadlineBound:
    """Combine the forcing constant with lambda = delta_margin (must be a
    positive certified margin) into the ball radius; r_scaled = R**/L^{3/2}."""
    if delta_margin <= 0:
        raise NotCertifiedError(f"delta_margin {delta_margin:.6g} is not positive")
    nrm = norms(profile)
    M2 = forcing_constant(profile)
    bound = radius(nrm.phi, M2, delta_margin)
    return HeadlineBound(
        L=profile.L,
        lam=delta_margin,
        M2=M2,
        phi_norm=nrm.phi,
        h2_norm=nrm.h2,
        r_star=bound.r_star,
        r_star_star=bound.r_star_star,
        r_scaled=bound.r_star_star / profile.L**1.5,
    )


@dataclass(frozen=True)
class MonitorReport:
    """Centered-difference residual statistics for the ball inequality."""

    violations: int
    max_residual: float
    tolerance: float
    n_samples: int
    residuals: np.ndarray

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__


def _resample_phi(profile: PotentialProfile, N: int) -> np.ndarray:
    if profile.n % N:
        raise ValueError(f"solver grid ({N}) must divide the profile grid ({profile.n})")
    return profile.phi[:: profile.n // N]


def monitor(trajectory: Trajectory, profile: PotentialProfile, constants: LyapunovConstants) -> MonitorReport:
    """Residual r(t) = d/dt |u - phi|_2^2 + lam |u|_2^2 - M2 along the sampled
    trajectory, d/dt by centered differences on the native sampling. Counts
    samples with r above 1e-6 * (1 + M2)."""
    t = trajectory.t
    if t.size < 3:
        raise InsufficientDataError("need at least 3 samples for centered differences")
    dts = np.diff(t)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=1e-12):
        raise ValueError("trajectory sampling must be uniform")
    phi_s = _resample_phi(profile, trajectory.N)
    dx = 2.0 * trajectory.L / trajectory.N
    u_all = np.fft.ifft(trajectory.states * trajectory.N, axis=1).real
    dist2 = dx * np.sum((u_all - phi_s[None, :]) ** 2, axis=1)
    ddt = (dist2[2:] - dist2[:-2]) / (2.0 * dts[0])
    residuals = ddt + constants.lam * trajectory.l2[1:-1] ** 2 - constants.M2
    tolerance = 1e-6 * (1.0 + constants.M2)
    violations = int(np.sum(residuals > tolerance))
    return MonitorReport(
        violations=violations,
        max_residual=float(np.max(residuals)),
        tolerance=tolerance,
        n_samples=t.size,
        residuals=residuals,
    )
