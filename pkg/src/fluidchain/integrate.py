"""Adaptive explicit time integration of the particle chain.

An embedded 5(4) Dormand-Prince pair advances the stacked (x, v) vector.  A
trial step is accepted only when the componentwise error passes the mixed
absolute/relative test *and* every stage plus the candidate state keeps the
strict particle ordering; otherwise the step is rejected and retried smaller.
Snapshot times are hit exactly by truncating the step, never by interpolation,
so identical inputs reproduce bit-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fields
from .dynamics import (ParticleState, check_domain, functionals,
                       gaps_from_interior, rhs_arrays, spacing_bounds)
from .errors import AdmissibilityError, DomainError, ModelError, StiffnessError

# Dormand-Prince 5(4) tableau; row 7 is the 5th-order solution weights.
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order minus embedded 4th-order weights, applied to k_1..k_7.
_ERR = (71 / 57600, 0.0, -71 / 16695, 71 / 1920,
        -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_SHRINK_MIN = 0.2
_GROW_MAX = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    dt_init: float | None = None
    dt_max: float = math.inf
    max_steps: int = 2_000_000
    snapshot_dt: float = 0.01

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.snapshot_dt <= 0.0:
            raise ValueError("snapshot_dt must be positive")
        if self.dt_init is not None and self.dt_init <= 0.0:
            raise ValueError("dt_init must be positive")
        if not self.dt_max > 0.0:
            raise ValueError("dt_max must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-snapshot functionals, reconstructed mass, scaled-spacing extrema,
    and the continuous functional values of the rebuilt fields."""

    e_n: float
    w_n: float
    z_n: float
    h_n: float
    mass: float
    spacing_min: float
    spacing_max: float
    e_cont: float
    w_cont: float
    flagged_negative: bool = False


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    dt_min: float = math.inf
    spacing_min_seen: float = math.inf
    spacing_max_seen: float = 0.0


@dataclass(frozen=True)
class DecayWarning:
    """First-class record of a monotonicity monitor firing (not fatal)."""

    t: float
    functional: str
    increase: float
    slack: float


@dataclass
class SnapshotSeries:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    stats: IntegrationStats = field(default_factory=IntegrationStats)
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)


def _error_ratio(err, y_old, y_new, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def _attempt(model, n, y, dt, cfg, k1=None):
    """One embedded-pair trial from y over dt.

    Returns (accepted, y_new, k_new_first_stage, dt_next_factor).  Domain
    exits at any stage or in the candidate count as rejections.
    """
    dim = y.size
    half = dim // 2
    k = np.empty((7, dim))
    try:
        if k1 is None:
            dx, dv = rhs_arrays(model, n, y[:half], y[half:])
            k[0, :half], k[0, half:] = dx, dv
        else:
            k[0] = k1
        for stage in range(1, 7):
            yi = y + dt * np.dot(_A[stage], k[:stage])
            dx, dv = rhs_arrays(model, n, yi[:half], yi[half:])
            k[stage, :half], k[stage, half:] = dx, dv
            if stage == 6:
                y_new = yi          # row 7 of the tableau is the solution
    except DomainError:
        return False, None, None, 0.5
    err = dt * np.dot(_ERR, k)
    ratio = _error_ratio(err, y, y_new, cfg)
    if not math.isfinite(ratio):
        return False, None, None, 0.5
    if ratio > 1.0:
        factor = max(_SHRINK_MIN, _SAFETY * ratio ** -0.2)
        return False, None, None, factor
    factor = _GROW_MAX if ratio == 0.0 else min(_GROW_MAX, max(
        _SHRINK_MIN, _SAFETY * ratio ** -0.2))
    return True, y_new, k[6].copy(), factor


def step(model, state, dt, cfg=None):
    """Single embedded-pair attempt from a state.

    Returns (state', dt_next, accepted); on rejection state' is the input
    state and dt_next is the shrunken retry size.
    """
    cfg = cfg or IntegratorConfig()
    check_domain(model, state)
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > cfg.dt_max:
        raise ValueError(f"dt={dt:g} exceeds dt_max={cfg.dt_max:g}")
    y = np.concatenate((state.x, state.v))
    accepted, y_new, _, factor = _attempt(model, state.n, y, dt, cfg)
    if not accepted:
        return state, dt * factor, False
    half = y.size // 2
    new = ParticleState(n=state.n, t=state.t + dt,
                        x=y_new[:half], v=y_new[half:])
    return new, min(cfg.dt_max, dt * factor), True


def _default_dt(model, state0, cfg, T):
    """Viscous-coupling-aware first step; falls back to 1e-6 when the
    spacing bounds are unavailable."""
    if cfg.dt_init is not None:
        return min(cfg.dt_init, cfg.dt_max, T)
    n = state0.n
    try:
        f0 = functionals(model, state0)
        a_est, b_est = spacing_bounds(model, max(f0.e_n, 0.0), max(f0.w_n, 0.0))
        grid = np.linspace(a_est, b_est, 101)
        gain_max = float(np.max(model.damping_gain(grid)))
        dt0 = min(1e-3, 0.1 * (a_est / n) ** 2 / (n * n * gain_max))
    except (AdmissibilityError, ModelError):
        dt0 = 1e-6
    return min(dt0, cfg.dt_max, T)


def _snapshot_targets(T, snapshot_dt):
    count = int(math.floor(T / snapshot_dt + 1e-9))
    targets = [k * snapshot_dt for k in range(1, count + 1)]
    if not targets or targets[-1] < T - 1e-12 * max(T, 1.0):
        targets.append(T)
    else:
        targets[-1] = T
    return targets


def _record(model, state, series, slack_e, slack_w):
    diag_f = functionals(model, state)
    field_now = fields.reconstruct(model, state)
    gaps = state.n * gaps_from_interior(model.length, state.x)
    e_n, flagged = _clamp_tiny(diag_f.e_n)
    w_n, flag2 = _clamp_tiny(diag_f.w_n)
    rec = DiagnosticsRecord(
        e_n=e_n, w_n=w_n, z_n=diag_f.z_n, h_n=diag_f.h_n,
        mass=fields.total_mass(field_now),
        spacing_min=float(gaps.min()), spacing_max=float(gaps.max()),
        e_cont=fields.continuous_energy(model, field_now),
        w_cont=fields.continuous_energy_mod(model, field_now),
        flagged_negative=flagged or flag2)
    if series.diagnostics:
        prev = series.diagnostics[-1]
        for name, now, before, slack in (("e_n", rec.e_n, prev.e_n, slack_e),
                                         ("w_n", rec.w_n, prev.w_n, slack_w)):
            if now > before + slack:
                series.warnings.append(DecayWarning(
                    t=state.t, functional=name,
                    increase=now - before, slack=slack))
    series.times.append(state.t)
    series.states.append(state)
    series.diagnostics.append(rec)
    return rec


def _clamp_tiny(value):
    """Functional values are nonnegative up to rounding; report tiny
    negatives as zero and flag anything beyond -1e-14."""
    if value >= 0.0:
        return value, False
    if value >= -1e-14:
        return 0.0, False
    return value, True


def simulate(model, state0, T, cfg=None) -> SnapshotSeries:
    """Integrate a chain to time T, emitting snapshots every snapshot_dt.

    Snapshots carry the discrete functionals, the reconstructed mass, the
    spacing extrema, and the continuous functional values; decay-monitor
    violations are collected as warnings on the series.
    """
    cfg = cfg or IntegratorConfig()
    if T <= 0.0:
        raise ValueError("horizon T must be positive")
    growth = model.pressure_growth_report()
    if not growth.holds:
        raise ModelError(
            "pressure law fails the growth condition "
            f"(high side diverges: {growth.grows_high}, "
            f"bounded towards vacuum: {growth.bounded_low})")
    check_domain(model, state0)
    series = SnapshotSeries()
    f0 = functionals(model, state0)
    slack_e = 1e-8 * max(1.0, f0.e_n)
    slack_w = 1e-8 * max(1.0, f0.w_n)
    state0 = ParticleState(n=state0.n, t=0.0, x=state0.x, v=state0.v)
    _record(model, state0, series, slack_e, slack_w)

    n = state0.n
    y = np.concatenate((state0.x, state0.v))
    half = y.size // 2
    t = 0.0
    dt_ctrl = _default_dt(model, state0, cfg, T)
    k1 = None
    stats = series.stats
    gaps0 = n * gaps_from_interior(model.length, state0.x)
    stats.spacing_min_seen = float(gaps0.min())
    stats.spacing_max_seen = float(gaps0.max())
    dt_floor = 1e-14 * T

    for target in _snapshot_targets(T, cfg.snapshot_dt):
        while t < target:
            if stats.accepted + stats.rejected >= cfg.max_steps:
                raise StiffnessError(
                    f"exceeded max_steps={cfg.max_steps} at t={t:g}")
            dt = min(dt_ctrl, cfg.dt_max, target - t)
            if dt < dt_floor:
                raise StiffnessError(
                    f"step size underflow (dt={dt:.3e} < {dt_floor:.3e}) at "
                    f"t={t:g}; the viscous coupling is too stiff for the "
                    "explicit pair -- reduce n or use an implicit extension")
            accepted, y_new, k_last, factor = _attempt(model, n, y, dt, cfg, k1)
            if accepted:
                stats.accepted += 1
                stats.dt_min = min(stats.dt_min, dt)
                y = y_new
                k1 = k_last          # first stage of the next step (FSAL)
                t = target if dt >= target - t else t + dt
                gaps = n * gaps_from_interior(model.length, y[:half])
                stats.spacing_min_seen = min(stats.spacing_min_seen, float(gaps.min()))
                stats.spacing_max_seen = max(stats.spacing_max_seen, float(gaps.max()))
                dt_ctrl = dt * factor
            else:
                # y is unchanged, so a previously computed first stage stays valid
                stats.rejected += 1
                dt_ctrl = dt * factor
        state = ParticleState(n=n, t=t, x=y[:half].copy(), v=y[half:].copy())
        _record(model, state, series, slack_e, slack_w)
    return series
