"""L-sweep orchestration, power-law fitting, and the thin-rectangle corollary
calculator. Records persist incrementally to CSV so partial sweeps survive
interruption; floats are written with repr for exact round-trips.
"""

import csv
import math
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .attractor import forcing_constant, radius
from .coercivity import certify
from .exponents import ExponentPair
from .potential import DomainTooSmallError, PiecewiseParams, SmoothingParams, build_profile, norms
from .solver import SolveConfig, default_grid, default_transient, random_initial, simulate


class ConditionViolatedError(ValueError):
    """Aspect-ratio condition of the thin-rectangle bound does not hold."""


class FitError(ValueError):
    """Power-law fit input invalid (too few points or nonpositive values)."""


@dataclass(frozen=True)
class SweepRecord:
    """One sweep row; error is set (and numeric fields left None) when the
    pipeline failed for this L."""

    L: float
    delta_margin: float | None = None
    lambda_min: float | None = None
    h2_norm: float | None = None
    phi_norm: float | None = None
    M2: float | None = None
    r_star_star: float | None = None
    sim_sup_norm: float | None = None
    certified: bool = False
    error: str | None = None


_CSV_FIELDS = [f.name for f in fields(SweepRecord)]


def _record_to_row(rec: SweepRecord):
    row = []
    for name in _CSV_FIELDS:
        val = getattr(rec, name)
        if val is None:
            row.append("")
        elif isinstance(val, bool):
            row.append("true" if val else "false")
        elif isinstance(val, float):
            row.append(repr(val))
        else:
            row.append(str(val))
    return row


def write_sweep_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for rec in records:
            writer.writerow(_record_to_row(rec))


def read_sweep_csv(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_FIELDS:
            raise ValueError(f"unexpected sweep CSV header: {header}")
        for row in reader:
            kw = {}
            for name, cell in zip(_CSV_FIELDS, row):
                if name == "error":
                    kw[name] = cell or None
                elif name == "certified":
                    kw[name] = cell == "true"
                elif cell == "":
                    kw[name] = None
                else:
                    kw[name] = float(cell)
            records.append(SweepRecord(**kw))
    return records


def _sweep_one(
    L,
    pair=None,
    params=None,
    smoothing=None,
    run_simulation=False,
    gamma=0.0,
    t_end=None,
    seed=0,
) -> SweepRecord:
    try:
        if L < 8:
            raise DomainTooSmallError(f"sweep requires L >= 8, got {L:g}")
        profile = build_profile(L, pair=pair, params=params, smoothing=smoothing)
        report = certify(profile)
        nrm = norms(profile)
        M2 = forcing_constant(profile)
        certified = report.converged and report.delta_margin > 0
        r_ss = None
        if report.delta_margin > 0:
            r_ss = radius(nrm.phi, M2, report.delta_margin).r_star_star
        sim_sup = None
        if run_simulation and certified:
            N = default_grid(L)
            transient = default_transient(L, N, gamma)
            cfg = SolveConfig(
                gamma=gamma,
                t_end=t_end if t_end is not None else transient + 200.0,
                transient=transient,
                record_every=100,
                seed=seed,
            )
            traj = simulate(random_initial(L, N, seed=seed, odd_only=True), cfg)
            sim_sup = traj.sup_norm
        return SweepRecord(
            L=float(L),
            delta_margin=report.delta_margin,
            lambda_min=report.lambda_min,
            h2_norm=nrm.h2,
            phi_norm=nrm.phi,
            M2=M2,
            r_star_star=r_ss,
            sim_sup_norm=sim_sup,
            certified=certified,
        )
    except Exception as exc:  # noqa: BLE001 - per-L failures become rows
        return SweepRecord(L=float(L), error=f"{type(exc).__name__}: {exc}")


def sweep(
    L_list,
    csv_path=None,
    pair: ExponentPair | None = None,
    params: PiecewiseParams | None = None,
    smoothing: SmoothingParams | None = None,
    run_simulation: bool = False,
    gamma: float = 0.0,
    t_end: float | None = None,
    seed: int = 0,
    workers: int = 1,
):
    """Build, certify, and bound a profile for each L; optionally simulate.

    Rows are flushed to csv_path in input order as soon as available, so an
    interrupted sweep leaves a valid prefix. Per-L failures are recorded in
    the row's error column and do not stop the sweep.
    """
    L_list = list(L_list)
    kwargs = dict(
        pair=pair,
        params=params,
        smoothing=smoothing,
        run_simulation=run_simulation,
        gamma=gamma,
        t_end=t_end,
        seed=seed,
    )
    fh = writer = None
    if csv_path is not None:
        fh = open(csv_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        fh.flush()
    records = []

    def emit(rec):
        records.append(rec)
        if writer is not None:
            writer.writerow(_record_to_row(rec))
            fh.flush()

    try:
        if workers <= 1:
            for L in L_list:
                emit(_sweep_one(L, **kwargs))
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {i: pool.submit(_sweep_one, L, **kwargs) for i, L in enumerate(L_list)}
                done = {}
                next_i = 0
                outstanding = set(futures.values())
                while outstanding:
                    finished, outstanding = wait(outstanding, return_when=FIRST_COMPLETED)
                    for i, fut in futures.items():
                        if fut in finished:
                            done[i] = fut.result()
                    while next_i in done:
                        emit(done.pop(next_i))
                        next_i += 1
                while next_i in done:
                    emit(done.pop(next_i))
                    next_i += 1
    finally:
        if fh is not None:
            fh.close()
    return records


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_power_law(pairs) -> PowerLawFit:
    """Least squares of log(value) against log(L); intercept in natural log."""
    pts = [(float(L), float(v)) for L, v in pairs]
    if len(pts) < 3:
        raise FitError("need at least 3 points")
    if any(L <= 0 or v <= 0 for L, v in pts):
        raise FitError("power-law fit requires positive L and values")
    logx = np.log([L for L, _ in pts])
    logy = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(logx, logy, 1)
    resid = logy - (slope * logx + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return PowerLawFit(slope=float(slope), intercept=float(intercept), r_squared=r2, n_points=len(pts))


class MolinetBound(NamedTuple):
    ly_max: float
    norm_bound: float


def molinet(Lx: float, C: float = 1.0, Ly: float | None = None) -> MolinetBound:
    """Thin-rectangle corollary: admissible strip height Ly_max = C*Lx^{-13/7}
    and the L2 bound C*Lx^{3/2}*Ly^{1/2} at Ly (default: at the threshold)."""
    if not Lx > 1:
        raise ValueError("Lx must exceed 1")
    if not C > 0:
        raise ValueError("C must be positive")
    ly_max = C * Lx ** (-13.0 / 7.0)
    if Ly is None:
        Ly = ly_max
    elif Ly > ly_max * (1.0 + 1e-12):
        raise ConditionViolatedError(f"Ly = {Ly:g} exceeds the admissible {ly_max:g}")
    elif Ly <= 0:
        raise ValueError("Ly must be positive")
    return MolinetBound(ly_max=ly_max, norm_bound=C * Lx**1.5 * math.sqrt(Ly))
