"""Background-profile construction pipeline.

Step potential -> mollified compactly supported potential -> rescaled sample on
[-L, L) -> mean-adjusted derivative profile phi_x -> integrated phi with norms.
Also a small variational solver for the Burgers-Sivashinsky optimal potential,
used as a point of comparison for the constructed one.
"""

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ._accel import Qtilde_values, qtilde_values
from ._accel import mollifier as _mollifier_arr
from .exponents import ExponentPair, OperatorOrder, ResolutionFaultError, solve_critical_exponents


class AdmissibilityError(ValueError):
    """Step-potential parameters violate a positivity inequality."""


class InfeasibleSmoothingError(RuntimeError):
    """Mollification width hit its floor before the mean condition held."""


class DomainTooSmallError(ValueError):
    """Scaled potential support does not fit inside [-L, L]."""


class MeanConditionError(ValueError):
    """Rescaled potential mean is not negative enough for the shift step."""


class DescentFailureError(RuntimeError):
    """Gradient descent did not reach the requested tolerance."""


@dataclass(frozen=True)
class PiecewiseParams:
    """Half-width and the two amplitudes of the step potential: well depth q0
    on |y| <= a/2, barrier height q1 on a/2 < |y| <= a, zero beyond."""

    a: float = 1.0
    q0: float = 0.5
    q1: float = 2.0

    def __post_init__(self):
        if not (self.a > 0 and self.q0 > 0 and self.q1 > 0):
            raise ValueError("a, q0, q1 must all be positive")


@dataclass(frozen=True)
class SmoothingParams:
    """Mollification width and required magnitude of the negative mean."""

    delta: float
    mu: float

    def __post_init__(self):
        if not (self.delta > 0 and self.mu > 0):
            raise ValueError("delta and mu must be positive")


@dataclass(frozen=True)
class MinorsReport:
    """Leading principal minors of the admissibility matrix plus pass/fail."""

    matrix: np.ndarray
    minors: tuple
    passed: bool
    failures: tuple

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__


def check_admissible(params: PiecewiseParams) -> MinorsReport:
    """Evaluate the 3x3 quadratic-form matrix of the step-potential positivity
    argument and its leading principal minors.

    Passing is equivalent to the two closed-form inequalities q0*a^2 < 1 and
    q1 - q0 - a^2*q0*q1 > 0 (the minors are positive exactly then).
    """
    a, q0, q1 = params.a, params.q0, params.q1
    A = np.array(
        [
            [1.0 / a, -1.0 / a, 0.0],
            [-1.0 / a, 1.5 / a - a * q0 / 2.0, -0.5 / a],
            [0.0, -0.5 / a, 0.5 / a + a * q1 / 2.0],
        ]
    )
    m1 = A[0, 0]
    m2 = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    m3 = float(np.linalg.det(A))
    failures = []
    if not q0 * a**2 < 1.0:
        failures.append("q0*a^2 < 1")
    if not q1 - q0 - a**2 * q0 * q1 > 0.0:
        failures.append("q1 - q0 - a^2*q0*q1 > 0")
    return MinorsReport(
        matrix=A, minors=(float(m1), float(m2), m3), passed=not failures, failures=tuple(failures)
    )


def build_piecewise(params: PiecewiseParams):
    """Return the step potential Q(y) as a vectorized callable.

    Branch convention: -q0 on 0 <= |y| <= a/2, q1 on a/2 < |y| <= a, 0 beyond
    (boundary points take the left-closed branch).
    """
    report = check_admissible(params)
    if not report.passed:
        raise AdmissibilityError("inadmissible parameters: " + ", ".join(report.failures))
    a, q0, q1 = params.a, params.q0, params.q1

    def Q(y):
        yy = np.abs(np.asarray(y, dtype=float))
        out = np.zeros_like(yy)
        out[yy <= a / 2] = -q0
        out[(yy > a / 2) & (yy <= a)] = q1
        return float(out) if out.ndim == 0 else out

    return Q


def mollifier(y):
    """Smoothstep f: 0 for y <= 0, 1 for y >= 1, strictly increasing and
    infinitely differentiable in between, f(1/2) = 1/2."""
    arr = np.asarray(y, dtype=float)
    out = _mollifier_arr(np.atleast_1d(arr).ravel()).reshape(np.atleast_1d(arr).shape)
    return float(out[0]) if arr.ndim == 0 else out


@dataclass(frozen=True)
class SmoothedPotential:
    """Mollified potential: Qtilde(y) >= Q(y) everywhere, qtilde = Qtilde/y^2
    extended by 0 at the origin, with integral at most -mu."""

    params: PiecewiseParams
    smoothing: SmoothingParams
    grid_y: np.ndarray
    Qt_grid: np.ndarray
    qt_grid: np.ndarray
    mean_qtilde: float

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__

    @property
    def support_halfwidth(self) -> float:
        return self.params.a + self.smoothing.delta

    def Qtilde(self, y):
        arr = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
        out = Qtilde_values(arr, self.params.a, self.params.q0, self.params.q1, self.smoothing.delta)
        return float(out[0]) if np.ndim(y) == 0 else out.reshape(np.shape(y))

    def qtilde(self, y):
        arr = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
        out = qtilde_values(arr, self.params.a, self.params.q0, self.params.q1, self.smoothing.delta)
        return float(out[0]) if np.ndim(y) == 0 else out.reshape(np.shape(y))


def _simpson(f, dx):
    w = np.ones_like(f)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return dx / 3.0 * float(np.sum(w * f))


def _integral_qtilde_half(params, delta, n):
    """Integral of qtilde over [0, a + delta], splitting along the smoothing
    branches: constant pieces of Qtilde integrate in closed form and the three
    mollified shoulders become fixed smooth integrals over [0, 1]."""
    a, q0, q1 = params.a, params.q0, params.q1
    t = np.linspace(0.0, 1.0, n + 1)
    dt = 1.0 / n
    f = _mollifier_arr(t)
    # [0, delta]: -q0 f(y/delta) / y^2; the integrand vanishes to all orders at 0
    core = f / np.where(t > 0, t, 1.0) ** 2
    core[0] = 0.0
    val = -(q0 / delta) * _simpson(core, dt)
    # [delta, a/2 - delta]: constant -q0
    val += -q0 * (1.0 / delta - 1.0 / (a / 2.0 - delta))
    # [a/2 - delta, a/2]: ramp from -q0 to q1
    y3 = a / 2.0 - delta + delta * t
    val += delta * _simpson((-q0 + (q0 + q1) * f) / y3**2, dt)
    # [a/2, a]: constant q1
    val += q1 * (2.0 / a - 1.0 / a)
    # [a, a + delta]: ramp back to 0
    y5 = a + delta * t
    val += q1 * delta * _simpson(f[::-1] / y5**2, dt)
    return val


def _integral_qtilde(params, delta, rtol=1e-8):
    coarse = _integral_qtilde_half(params, delta, 2048)
    fine = _integral_qtilde_half(params, delta, 4096)
    if abs(fine - coarse) > rtol * (1.0 + abs(fine)):
        raise ResolutionFaultError("shoulder quadrature for the qtilde mean did not converge")
    return 2.0 * fine


def smooth(params: PiecewiseParams, smoothing: SmoothingParams | None = None) -> SmoothedPotential:
    """Mollify the step potential into a C^2 compactly supported Qtilde and
    form qtilde = Qtilde / y^2.

    If the integral of qtilde fails to reach -mu, delta is halved until it
    does; the floor delta >= 1e-6*a turns persistent failure into an error.
    """
    if smoothing is None:
        smoothing = SmoothingParams(delta=params.a / 64.0, mu=0.75)
    if not smoothing.delta < params.a / 4.0:
        raise ValueError("delta must be below a/4 so the smoothing pieces do not overlap")
    Q = build_piecewise(params)
    floor = 1e-6 * params.a
    delta = smoothing.delta
    while True:
        integral = _integral_qtilde(params, delta)
        if integral <= -smoothing.mu:
            break
        if delta / 2.0 < floor:
            raise InfeasibleSmoothingError(
                f"delta floor {floor:g} reached with integral {integral:.6g} > -mu = {-smoothing.mu:g}"
            )
        delta /= 2.0
    s = params.a + delta
    # diagnostic grid: ~32 points across each smoothing shoulder, capped so
    # extreme delta values stay cheap; the mean above never uses this grid
    n = 1 << max(14, min(22, math.ceil(math.log2(64.0 * 2.0 * s / delta))))
    y = np.linspace(-s, s, n + 1)
    Qt = Qtilde_values(y, params.a, params.q0, params.q1, delta)
    qt = qtilde_values(y, params.a, params.q0, params.q1, delta)
    if np.any(Qt < Q(y) - 1e-12):
        raise RuntimeError("internal error: mollified potential dipped below the step potential")
    return SmoothedPotential(
        params=params,
        smoothing=SmoothingParams(delta=delta, mu=smoothing.mu),
        grid_y=y,
        Qt_grid=Qt,
        qt_grid=qt,
        mean_qtilde=integral,
    )


@dataclass(frozen=True)
class PotentialProfile:
    """Sampled phi, phi_x, phi_xx on the uniform half-open grid over [-L, L)."""

    L: float
    phi: np.ndarray
    phi_x: np.ndarray
    phi_xx: np.ndarray
    mean_q: float
    exponents: ExponentPair
    source: SmoothedPotential | None = None

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__

    @property
    def n(self) -> int:
        return self.phi_x.size

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    @cached_property
    def phi_x_rfft(self) -> np.ndarray:
        # reused by every Galerkin assembly at this profile
        return np.fft.rfft(self.phi_x)


_CHUNK = 1 << 22


def _grid_size(L, delta_scaled):
    # at least 32 samples across the scaled smoothing width, floor 2^14
    target = max(32.0 * 2.0 * L / delta_scaled, 16384.0)
    return 1 << math.ceil(math.log2(target))


def scale_to_domain(sp: SmoothedPotential, L: float, pair: ExponentPair) -> np.ndarray:
    """Sample q(x) = L^{c2} * qtilde(x * L^{c1}) on the uniform grid over
    [-L, L). The grid size resolves the scaled mollification width."""
    if L <= 0:
        raise ValueError("L must be positive")
    c1, c2 = float(pair.c1), float(pair.c2)
    support_x = sp.support_halfwidth * L ** (-c1)
    if L < 1.0 or support_x > L:
        raise DomainTooSmallError(
            f"support half-width {support_x:g} exceeds domain half-length {L:g}"
        )
    delta_scaled = sp.smoothing.delta * L ** (-c1)
    n = _grid_size(L, delta_scaled)
    dx = 2.0 * L / n
    amp = L**c2
    y_scale = L**c1
    a, q0, q1 = sp.params.a, sp.params.q0, sp.params.q1
    q = np.zeros(n)
    # q vanishes outside the scaled support; evaluate only the window
    i_lo = max(0, int(math.floor((L - support_x) / dx)) - 1)
    i_hi = min(n, int(math.ceil((L + support_x) / dx)) + 2)
    for j0 in range(i_lo, i_hi, _CHUNK):
        j1 = min(j0 + _CHUNK, i_hi)
        x = -L + dx * np.arange(j0, j1)
        q[j0:j1] = amp * qtilde_values(x * y_scale, a, q0, q1, sp.smoothing.delta)
    return q


def assemble_profile(
    q: np.ndarray, L: float, pair: ExponentPair | None = None, source: SmoothedPotential | None = None
) -> PotentialProfile:
    """Mean-adjust q into phi_x, integrate to phi (zero at x = 0), and take
    phi_xx spectrally."""
    if pair is None:
        pair = solve_critical_exponents(OperatorOrder.FOURTH).pair
    q = np.asarray(q, dtype=float)
    n = q.size
    if n < 4 or n % 2:
        raise ValueError("q must have even length >= 4")
    dx = 2.0 * L / n
    mean_q = float(q.mean())
    if mean_q > -0.75:
        raise MeanConditionError(
            f"mean of q is {mean_q:.6g} > -3/4; use a smaller delta or a larger mu"
        )
    phi_x = q - mean_q
    phi = cumulative_trapezoid(phi_x, dx=dx, initial=0.0)
    phi -= phi[n // 2]  # x = 0 sits at index n/2 on the half-open grid
    kd = (np.pi / L) * np.arange(n // 2 + 1)
    kd[-1] = 0.0  # odd-order derivative: drop the Nyquist mode
    phi_xx = np.fft.irfft(1j * kd * np.fft.rfft(phi_x), n)
    return PotentialProfile(
        L=float(L), phi=phi, phi_x=phi_x, phi_xx=phi_xx, mean_q=mean_q, exponents=pair, source=source
    )


def build_profile(
    L: float,
    pair: ExponentPair | None = None,
    params: PiecewiseParams | None = None,
    smoothing: SmoothingParams | None = None,
) -> PotentialProfile:
    """Full pipeline with defaults: step -> smoothed -> scaled -> profile."""
    if pair is None:
        pair = solve_critical_exponents(OperatorOrder.FOURTH).pair
    if params is None:
        params = PiecewiseParams()
    sp = smooth(params, smoothing)
    q = scale_to_domain(sp, L, pair)
    return assemble_profile(q, L, pair=pair, source=sp)


class ProfileNorms(NamedTuple):
    """L2 norms of phi, phi_x, phi_xx and the combined H2 norm."""

    phi: float
    phi_x: float
    phi_xx: float
    h2: float


def norms(profile: PotentialProfile) -> ProfileNorms:
    """Periodic trapezoidal L2 norms of phi, phi_x, phi_xx and the H2 norm."""
    dx = profile.dx
    n0 = math.sqrt(dx * float(np.sum(profile.phi**2)))
    n1 = math.sqrt(dx * float(np.sum(profile.phi_x**2)))
    n2 = math.sqrt(dx * float(np.sum(profile.phi_xx**2)))
    return ProfileNorms(n0, n1, n2, math.sqrt(n0**2 + n1**2 + n2**2))


def write_profile(profile: PotentialProfile, csv_path, meta_path=None) -> None:
    """CSV columns x, phi, phi_x, phi_xx plus a JSON metadata sidecar."""
    csv_path = Path(csv_path)
    if meta_path is None:
        meta_path = csv_path.with_suffix(".json")
    data = np.column_stack([profile.x, profile.phi, profile.phi_x, profile.phi_xx])
    np.savetxt(csv_path, data, delimiter=",", header="x,phi,phi_x,phi_xx", comments="", fmt="%.17g")
    nrm = norms(profile)
    meta = {
        "L": profile.L,
        "n": profile.n,
        "mean_q": profile.mean_q,
        "exponents": {"c1": str(profile.exponents.c1), "c2": str(profile.exponents.c2)},
        "norms": {"phi": nrm.phi, "phi_x": nrm.phi_x, "phi_xx": nrm.phi_xx, "h2": nrm.h2},
    }
    if profile.source is not None:
        meta["params"] = {
            "a": profile.source.params.a,
            "q0": profile.source.params.q0,
            "q1": profile.source.params.q1,
        }
        meta["smoothing"] = {
            "delta": profile.source.smoothing.delta,
            "mu": profile.source.smoothing.mu,
        }
        meta["mean_qtilde"] = profile.source.mean_qtilde
    Path(meta_path).write_text(json.dumps(meta, indent=2) + "\n")


def read_profile(csv_path, meta_path=None) -> PotentialProfile:
    """Rebuild a PotentialProfile written by write_profile."""
    csv_path = Path(csv_path)
    if meta_path is None:
        meta_path = csv_path.with_suffix(".json")
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    meta = json.loads(Path(meta_path).read_text())
    pair = ExponentPair(meta["exponents"]["c1"], meta["exponents"]["c2"])
    return PotentialProfile(
        L=float(meta["L"]),
        phi=data[:, 1].copy(),
        phi_x=data[:, 2].copy(),
        phi_xx=data[:, 3].copy(),
        mean_q=float(meta["mean_q"]),
        exponents=pair,
    )


@dataclass(frozen=True)
class BSConfig:
    """Gradient-descent settings for the quartic variational problem."""

    mu_lagrange: float = 1.0
    L: float = math.pi
    n: int = 64
    tol: float = 1e-8
    max_iter: int = 200_000
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.mu_lagrange > 0 and self.L > 0 and self.n >= 8 and self.tol > 0):
            raise ValueError("mu_lagrange, L, tol must be positive and n >= 8")
        if self.n % 2:
            raise ValueError("n must be even")


def bs_functional_and_gradient(u: np.ndarray, L: float, mu: float):
    """J(u) = int u_x^2 + (1/4mu)(u^2 - s)^2 with s = |u|_2^2/(2L), and its
    L2 gradient projected onto mean-free functions.

    The derivative symbol drops the Nyquist mode so the discrete gradient is
    exactly adjoint to the discrete functional; the variation of s contributes
    nothing because u^2 - s integrates to zero.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    dx = 2.0 * L / n
    kd = (np.pi / L) * np.arange(n // 2 + 1)
    kd[-1] = 0.0
    uh = np.fft.rfft(u)
    ux = np.fft.irfft(1j * kd * uh, n)
    s = float(np.mean(u * u))
    w = u * u - s
    J = dx * float(np.sum(ux * ux)) + dx * float(np.sum(w * w)) / (4.0 * mu)
    g = 2.0 * np.fft.irfft(kd**2 * uh, n) + (w * u) / mu
    g -= g.mean()
    return J, g


@dataclass(frozen=True)
class BSResult:
    u: np.ndarray
    phi_x: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    values: np.ndarray | None = None  # J per accepted iterate, start included

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__


def bs_optimal_potential(cfg: BSConfig = BSConfig()) -> BSResult:
    """Minimize the quartic functional from a single-mode start and return the
    minimizer with its induced potential phi_x = (u^2 - s)/(2 mu).

    Fixed steps sized by a Lipschitz estimate of the gradient, with halving as
    a safeguard; descent is monotone.
    """
    L, mu, n = cfg.L, cfg.mu_lagrange, cfg.n
    dx = 2.0 * L / n
    x = -L + dx * np.arange(n)
    u = cfg.amplitude * np.sin(np.pi * x / L)
    k_max = (np.pi / L) * (n // 2 - 1)
    J, g = bs_functional_and_gradient(u, L, mu)
    gnorm = math.sqrt(dx * float(np.sum(g * g)))
    history = [J]
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        if gnorm < cfg.tol:
            break
        s = float(np.mean(u * u))
        lip = 2.0 * k_max**2 + (3.0 * float(np.max(u * u)) + abs(s)) / mu
        step = 1.0 / lip
        g2 = dx * float(np.sum(g * g))
        for _ in range(60):
            trial = u - step * g
            Jt, gt = bs_functional_and_gradient(trial, L, mu)
            if Jt <= J - 1e-4 * step * g2:
                break
            step /= 2.0
        else:
            raise DescentFailureError(f"line search stalled at gradient norm {gnorm:.3e}")
        u, J, g = trial, Jt, gt
        history.append(J)
        gnorm = math.sqrt(dx * float(np.sum(g * g)))
    else:
        raise DescentFailureError(
            f"gradient norm {gnorm:.3e} above tolerance {cfg.tol:g} after {cfg.max_iter} iterations"
        )
    s = float(np.mean(u * u))
    phi_x_star = (u * u - s) / (2.0 * mu)
    return BSResult(
        u=u,
        phi_x=phi_x_star,
        value=J,
        grad_norm=gnorm,
        iterations=iterations,
        values=np.asarray(history),
    )
