"""Dealiased pseudospectral ETDRK4 integrator for the 1D periodic
Kuramoto-Sivashinsky equation u_t = -u_xxxx - u_xx + u u_x (+ gamma u for the
destabilized variant), on x in [-L, L) with zero-mean data.

Fourier coefficients are stored normalized, uhat = fft(u)/N, so Parseval reads
|u|_2^2 = 2L * sum |uhat|^2. The linear part is treated exactly; the ETD
phi-function coefficients are averaged over a complex contour to avoid
cancellation at small |sigma*dt|.
"""

import math
from dataclasses import dataclass, replace

import numpy as np


class BlowUpError(RuntimeError):
    """Non-finite coefficients encountered during time stepping."""

    def __init__(self, t, norm):
        super().__init__(f"solution lost finiteness at t = {t:g} (last |u|_2 = {norm:g})")
        self.t = t
        self.norm = norm


@dataclass(frozen=True)
class SpectralState:
    """Normalized Fourier coefficients of u at one instant."""

    L: float
    N: int
    uhat: np.ndarray
    t: float = 0.0

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__

    @property
    def x(self) -> np.ndarray:
        return -self.L + (2.0 * self.L / self.N) * np.arange(self.N)

    def u(self) -> np.ndarray:
        return np.fft.ifft(self.uhat * self.N).real

    @property
    def norm_l2(self) -> float:
        return math.sqrt(2.0 * self.L * float(np.sum(np.abs(self.uhat) ** 2)))


@dataclass(frozen=True)
class SolveConfig:
    gamma: float = 0.0
    dt: float = 0.05
    t_end: float = 100.0
    transient: float | None = None
    record_every: int = 10
    seed: int = 0
    odd_only: bool = False

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.transient is not None and not self.transient < self.t_end:
            raise ValueError("transient must be below t_end")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


def linear_symbol(L: float, N: int, gamma: float = 0.0) -> np.ndarray:
    """Per-mode growth rate sigma(k) = k^2 - k^4 + gamma, k = pi*m/L, in FFT
    mode order m = 0..N/2-1, -N/2..-1."""
    m = np.fft.fftfreq(N, d=1.0 / N)
    k = (np.pi / L) * m
    return k**2 - k**4 + gamma


def default_grid(L: float) -> int:
    """Grid size whose dealiased band covers the linearly unstable
    wavenumbers with headroom for the quadratic cascade."""
    return 1 << max(6, math.ceil(math.log2(12.0 * L / math.pi)))


def default_transient(L, N, gamma=0.0):
    """Burn-in horizon: 200 time units or 10x the slowest linear growth
    timescale, whichever is larger."""
    sig = linear_symbol(L, N, gamma)
    growing = sig[1 : N // 2][sig[1 : N // 2] > 0]
    if growing.size == 0:
        return 200.0
    return max(200.0, 10.0 / float(np.min(growing)))


_COEFF_CACHE: dict = {}


def _etdrk4_coeffs(L, N, dt, gamma):
    key = (L, N, dt, gamma)
    hit = _COEFF_CACHE.get(key)
    if hit is not None:
        return hit
    sig = linear_symbol(L, N, gamma)
    E = np.exp(dt * sig)
    E2 = np.exp(0.5 * dt * sig)
    M = 32
    r = np.exp(1j * np.pi * (np.arange(M) + 0.5) / M)
    LR = dt * sig[:, None] + r[None, :]
    Q = dt * np.mean((np.exp(LR / 2) - 1.0) / LR, axis=1).real
    f1 = dt * np.mean((-4.0 - LR + np.exp(LR) * (4.0 - 3.0 * LR + LR**2)) / LR**3, axis=1).real
    f2 = dt * np.mean((2.0 + LR + np.exp(LR) * (-2.0 + LR)) / LR**3, axis=1).real
    f3 = dt * np.mean((-4.0 - 3.0 * LR - LR**2 + np.exp(LR) * (4.0 - LR)) / LR**3, axis=1).real
    m = np.fft.fftfreq(N, d=1.0 / N)
    ik_half = 0.5j * (np.pi / L) * m
    dealias = np.abs(m) <= N // 3
    coeffs = (E, E2, Q, f1, f2, f3, ik_half * dealias)
    if len(_COEFF_CACHE) > 64:
        _COEFF_CACHE.clear()
    _COEFF_CACHE[key] = coeffs
    return coeffs


def _nonlinear(v, N, ik_half_dealias):
    u = np.fft.ifft(v * N).real
    return ik_half_dealias * (np.fft.fft(u * u) / N)


def _project(v, odd_only):
    # reality, zero mean, and (optionally) the odd sine subspace
    v = 0.5 * (v + np.conj(v[(-np.arange(v.size)) % v.size]))
    if odd_only:
        v = 1j * v.imag
    v[0] = 0.0
    return v


def step(state: SpectralState, cfg: SolveConfig) -> SpectralState:
    """One ETDRK4 step of length cfg.dt."""
    E, E2, Q, f1, f2, f3, ikd = _etdrk4_coeffs(state.L, state.N, cfg.dt, cfg.gamma)
    N = state.N
    v = state.uhat
    Nv = _nonlinear(v, N, ikd)
    a = E2 * v + Q * Nv
    Na = _nonlinear(a, N, ikd)
    b = E2 * v + Q * Na
    Nb = _nonlinear(b, N, ikd)
    c = E2 * a + Q * (2.0 * Nb - Nv)
    Nc = _nonlinear(c, N, ikd)
    v_new = E * v + f1 * Nv + 2.0 * f2 * (Na + Nb) + f3 * Nc
    v_new = _project(v_new, cfg.odd_only)
    if not np.all(np.isfinite(v_new.view(np.float64))):
        raise BlowUpError(state.t + cfg.dt, state.norm_l2)
    return replace(state, uhat=v_new, t=state.t + cfg.dt)


@dataclass(frozen=True)
class Trajectory:
    """Sampled states and norm series from one simulation."""

    L: float
    N: int
    t: np.ndarray
    states: np.ndarray  # (n_samples, N) complex, normalized coefficients
    l2: np.ndarray
    l2_grad: np.ndarray
    l2_hess: np.ndarray
    sup_norm: float
    transient: float
    config: SolveConfig

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__

    def u(self, i: int) -> np.ndarray:
        return np.fft.ifft(self.states[i] * self.N).real


def simulate(initial: SpectralState, cfg: SolveConfig) -> Trajectory:
    """Integrate to cfg.t_end, recording every cfg.record_every steps (the
    initial state included). sup_norm is the supremum of |u|_2 over samples
    with t > transient, the computable stand-in for the long-time limsup."""
    L, N = initial.L, initial.N
    transient = cfg.transient if cfg.transient is not None else default_transient(L, N, cfg.gamma)
    n_steps = int(round(cfg.t_end / cfg.dt))
    rec_idx = range(0, n_steps + 1, cfg.record_every)
    n_rec = len(rec_idx)
    k_abs = np.abs((np.pi / L) * np.fft.fftfreq(N, d=1.0 / N))
    t_out = np.empty(n_rec)
    states = np.empty((n_rec, N), dtype=complex)
    l2 = np.empty(n_rec)
    l2_grad = np.empty(n_rec)
    l2_hess = np.empty(n_rec)
    state = replace(initial, uhat=_project(initial.uhat.astype(complex).copy(), cfg.odd_only))

    j = 0
    for i in range(n_steps + 1):
        if i % cfg.record_every == 0:
            v = state.uhat
            t_out[j] = state.t
            states[j] = v
            p = np.abs(v) ** 2
            l2[j] = math.sqrt(2.0 * L * float(np.sum(p)))
            l2_grad[j] = math.sqrt(2.0 * L * float(np.sum(k_abs**2 * p)))
            l2_hess[j] = math.sqrt(2.0 * L * float(np.sum(k_abs**4 * p)))
            j += 1
        if i < n_steps:
            state = step(state, cfg)

    post = l2[t_out > transient]
    sup_norm = float(np.max(post)) if post.size else float("nan")
    return Trajectory(
        L=L,
        N=N,
        t=t_out,
        states=states,
        l2=l2,
        l2_grad=l2_grad,
        l2_hess=l2_hess,
        sup_norm=sup_norm,
        transient=transient,
        config=cfg,
    )


def random_initial(L: float, N: int, seed: int = 0, amplitude: float = 1.0, odd_only: bool = False) -> SpectralState:
    """Band-limited random initial data on the lowest max(1, floor(L/pi))
    modes, zero mean, |u|_2 = amplitude, deterministic in the seed."""
    if N < 8 or N & (N - 1):
        raise ValueError("N must be a power of two >= 8")
    rng = np.random.default_rng(seed)
    n_modes = max(1, int(L / np.pi))
    n_modes = min(n_modes, N // 3)
    v = np.zeros(N, dtype=complex)
    for m in range(1, n_modes + 1):
        if odd_only:
            coeff = 1j * rng.standard_normal()
        else:
            coeff = rng.standard_normal() + 1j * rng.standard_normal()
        v[m] = coeff
        v[-m] = np.conj(coeff)
    norm = math.sqrt(2.0 * L * float(np.sum(np.abs(v) ** 2)))
    if norm > 0:
        v *= amplitude / norm
    return SpectralState(L=float(L), N=N, uhat=v, t=0.0)
