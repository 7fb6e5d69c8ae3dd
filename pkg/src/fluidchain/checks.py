"""Weak-form residuals, decay monitors, envelope containment, and the grid
refinement study.

Residuals integrate the rebuilt fields against admissible space-time test
functions: 3-point Gauss per reconstruction cell in space, composite Simpson
over the snapshot times.  The temporal quadrature error is estimated by
re-evaluating at half cadence; a report whose estimate is not at least ten
times smaller than the residual is flagged inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fields
from .dynamics import spacing_bounds
from .errors import FluidchainError
from .initial import build_particles
from .integrate import IntegratorConfig, simulate

_GAUSS3_X, _GAUSS3_W = np.polynomial.legendre.leggauss(3)


# -- test functions -------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Space-time test function with the derivatives the residuals need.

    Continuity kind vanishes at the final time; momentum kind additionally
    vanishes at both walls, with zero slope at the ghost wall.
    """

    name: str
    kind: str                  # 'continuity' | 'momentum'
    horizon: float
    phi: object
    phi_t: object
    phi_x: object
    phi_xx: object = None


def sine_test_function(length, horizon, mode):
    """(1 - t/T) * sin(mode*pi*x/L), continuity kind."""
    w = mode * math.pi / length

    def phi(t, x):
        return (1.0 - t / horizon) * np.sin(w * np.asarray(x, float))

    def phi_t(t, x):
        return -np.sin(w * np.asarray(x, float)) / horizon

    def phi_x(t, x):
        return (1.0 - t / horizon) * w * np.cos(w * np.asarray(x, float))

    return TestFunction(name=f"continuity_sine{mode}", kind="continuity",
                        horizon=horizon, phi=phi, phi_t=phi_t, phi_x=phi_x)


def parabola_test_function(length, horizon):
    """(1 - t/T) * x^2, continuity kind."""

    def phi(t, x):
        return (1.0 - t / horizon) * np.asarray(x, float) ** 2

    def phi_t(t, x):
        return -np.asarray(x, float) ** 2 / horizon

    def phi_x(t, x):
        return (1.0 - t / horizon) * 2.0 * np.asarray(x, float)

    return TestFunction(name="continuity_parabola", kind="continuity",
                        horizon=horizon, phi=phi, phi_t=phi_t, phi_x=phi_x)


def hump_test_function(length, horizon):
    """(1 - t/T) * (x/L)(1 - x/L)^2, momentum kind."""
    L = length

    def phi(t, x):
        u = np.asarray(x, float) / L
        return (1.0 - t / horizon) * u * (1.0 - u) ** 2

    def phi_t(t, x):
        u = np.asarray(x, float) / L
        return -u * (1.0 - u) ** 2 / horizon

    def phi_x(t, x):
        u = np.asarray(x, float) / L
        return (1.0 - t / horizon) * (1.0 - u) * (1.0 - 3.0 * u) / L

    def phi_xx(t, x):
        u = np.asarray(x, float) / L
        return (1.0 - t / horizon) * (6.0 * u - 4.0) / L ** 2

    return TestFunction(name="momentum_hump", kind="momentum", horizon=horizon,
                        phi=phi, phi_t=phi_t, phi_x=phi_x, phi_xx=phi_xx)


def sine_sq_test_function(length, horizon):
    """(1 - t/T) * sin^2(pi*x/L)(1 - x/L), momentum kind."""
    L = length
    w = math.pi / L

    def phi(t, x):
        x = np.asarray(x, float)
        return (1.0 - t / horizon) * np.sin(w * x) ** 2 * (1.0 - x / L)

    def phi_t(t, x):
        x = np.asarray(x, float)
        return -np.sin(w * x) ** 2 * (1.0 - x / L) / horizon

    def phi_x(t, x):
        x = np.asarray(x, float)
        s, c = np.sin(w * x), np.cos(w * x)
        return (1.0 - t / horizon) * (2.0 * s * c * w * (1.0 - x / L) - s ** 2 / L)

    def phi_xx(t, x):
        x = np.asarray(x, float)
        s, c = np.sin(w * x), np.cos(w * x)
        return (1.0 - t / horizon) * (
            2.0 * w ** 2 * (c ** 2 - s ** 2) * (1.0 - x / L) - 4.0 * s * c * w / L)

    return TestFunction(name="momentum_sine_sq", kind="momentum", horizon=horizon,
                        phi=phi, phi_t=phi_t, phi_x=phi_x, phi_xx=phi_xx)


def test_function_library(length, horizon):
    """The built-in residual test functions (continuity + momentum kinds)."""
    lib = [sine_test_function(length, horizon, k) for k in (1, 2, 3)]
    lib.append(parabola_test_function(length, horizon))
    lib.append(hump_test_function(length, horizon))
    lib.append(sine_sq_test_function(length, horizon))
    return lib


def combine_test_functions(alpha, tf_a, beta, tf_b, name=None):
    """alpha*tf_a + beta*tf_b (same kind and horizon); admissibility is
    preserved by linearity."""
    if tf_a.kind != tf_b.kind or tf_a.horizon != tf_b.horizon:
        raise ValueError("can only combine test functions of one kind/horizon")

    def lin(fa, fb):
        if fa is None or fb is None:
            return None
        return lambda t, x: alpha * fa(t, x) + beta * fb(t, x)

    return TestFunction(
        name=name or f"{alpha:g}*{tf_a.name}+{beta:g}*{tf_b.name}",
        kind=tf_a.kind, horizon=tf_a.horizon,
        phi=lin(tf_a.phi, tf_b.phi), phi_t=lin(tf_a.phi_t, tf_b.phi_t),
        phi_x=lin(tf_a.phi_x, tf_b.phi_x), phi_xx=lin(tf_a.phi_xx, tf_b.phi_xx))


def admissibility_defect(tf, length, probes=1000, seed=0):
    """Largest violation of the test function's boundary constraints over
    random space-time probes (should be at machine precision)."""
    rng = np.random.default_rng(seed)
    ts = rng.uniform(0.0, tf.horizon, probes)
    xs = rng.uniform(0.0, length, probes)
    worst = float(np.max(np.abs(np.asarray(tf.phi(tf.horizon, xs)))))
    if tf.kind == "momentum":
        for t in ts:
            worst = max(worst,
                        abs(float(np.asarray(tf.phi(t, 0.0)))),
                        abs(float(np.asarray(tf.phi(t, length)))),
                        abs(float(np.asarray(tf.phi_x(t, length)))))
    return worst


# -- residual evaluation ---------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    value: float
    quad_error: float
    n: int
    test_function: str
    inconclusive: bool


def _gauss3_cells(field):
    left = field.asc_x[:-1][:, None]
    right = field.asc_x[1:][:, None]
    mid = 0.5 * (left + right)
    half = 0.5 * (right - left)
    return mid + half * _GAUSS3_X[None, :], half * _GAUSS3_W[None, :]


def _sum_desc(cell_values):
    total = 0.0
    for value in cell_values[::-1]:
        total += value
    return total


def _simpson(ts, gs):
    """Composite Simpson over uniformly spaced samples; an odd interval
    count uses the 3/8 rule on the last three intervals."""
    ts = np.asarray(ts, float)
    gs = np.asarray(gs, float)
    steps = np.diff(ts)
    h = steps[0]
    if np.any(np.abs(steps - h) > 1e-9 * max(abs(h), 1e-300)):
        raise ValueError("Simpson integration expects uniform snapshot cadence")
    n_int = steps.size
    if n_int == 1:
        return 0.5 * h * (gs[0] + gs[1])
    total = 0.0
    stop = n_int if n_int % 2 == 0 else n_int - 3
    for j in range(0, stop, 2):
        total += (h / 3.0) * (gs[j] + 4.0 * gs[j + 1] + gs[j + 2])
    if stop != n_int:
        j = n_int - 3
        total += (3.0 * h / 8.0) * (gs[j] + 3.0 * gs[j + 1] + 3.0 * gs[j + 2] + gs[j + 3])
    return total


def _check_series_tf(series, tf, kind):
    if tf.kind != kind:
        raise ValueError(f"expected a {kind}-kind test function, got {tf.kind}")
    horizon = series.times[-1]
    if abs(tf.horizon - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError(
            f"test function horizon {tf.horizon:g} does not match the "
            f"series horizon {horizon:g}")


def _residual_from_samples(series, term0, g, tf):
    value = term0 + _simpson(series.times, g)
    n_int = len(series.times) - 1
    if n_int >= 4 and n_int % 2 == 0:
        half = term0 + _simpson(series.times[::2], g[::2])
        quad_error = abs(value - half)
        inconclusive = not quad_error < abs(value) / 10.0
    else:
        quad_error = math.nan
        inconclusive = True
    return ResidualReport(value=value, quad_error=quad_error,
                          n=series.states[0].n, test_function=tf.name,
                          inconclusive=inconclusive)


def continuity_residual(model, series, init, tf) -> ResidualReport:
    """Signed defect of the mass-transport weak identity for the series."""
    _check_series_tf(series, tf, "continuity")
    field0 = fields.reconstruct(model, series.states[0])
    pts0, wts0 = _gauss3_cells(field0)
    rho0_vals = np.asarray(init.rho0(pts0.ravel()), float).reshape(pts0.shape)
    phi0 = np.asarray(tf.phi(0.0, pts0))
    term0 = _sum_desc(np.sum(phi0 * rho0_vals * wts0, axis=1))

    g = np.empty(len(series))
    for j, state in enumerate(series.states):
        field = fields.reconstruct(model, state)
        pts, wts = _gauss3_cells(field)
        rho = np.asarray(field.rho(pts.ravel())).reshape(pts.shape)
        vel = np.asarray(field.v(pts.ravel())).reshape(pts.shape)
        t = series.times[j]
        integrand = rho * (np.asarray(tf.phi_t(t, pts))
                           + vel * np.asarray(tf.phi_x(t, pts)))
        g[j] = _sum_desc(np.sum(integrand * wts, axis=1))
    return _residual_from_samples(series, term0, g, tf)


def momentum_residual(model, series, init, tf) -> ResidualReport:
    """Signed defect of the momentum weak identity, with flux
    rho*v^2 + P(rho) - mu(rho)*v_x."""
    _check_series_tf(series, tf, "momentum")
    field0 = fields.reconstruct(model, series.states[0])
    pts0, wts0 = _gauss3_cells(field0)
    rho0_vals = np.asarray(init.rho0(pts0.ravel()), float).reshape(pts0.shape)
    v0_vals = np.asarray(init.v0(pts0.ravel()), float).reshape(pts0.shape)
    phi0 = np.asarray(tf.phi(0.0, pts0))
    term0 = _sum_desc(np.sum(phi0 * rho0_vals * v0_vals * wts0, axis=1))

    g = np.empty(len(series))
    for j, state in enumerate(series.states):
        field = fields.reconstruct(model, state)
        pts, wts = _gauss3_cells(field)
        rho = np.asarray(field.rho(pts.ravel())).reshape(pts.shape)
        vel = np.asarray(field.v(pts.ravel())).reshape(pts.shape)
        slope_v = ((field.asc_v[1:] - field.asc_v[:-1])
                   / (field.asc_x[1:] - field.asc_x[:-1]))[:, None]
        flux = rho * vel ** 2 + np.asarray(model.pressure(rho)) \
            - np.asarray(model.viscosity(rho)) * slope_v
        t = series.times[j]
        integrand = (np.asarray(tf.phi_t(t, pts)) * rho * vel
                     + np.asarray(tf.phi_x(t, pts)) * flux)
        g[j] = _sum_desc(np.sum(integrand * wts, axis=1))
    return _residual_from_samples(series, term0, g, tf)


# -- decay and containment reports ----------------------------------------------

@dataclass(frozen=True)
class DecayReport:
    """Per-snapshot monotonicity flags plus the time-averaged transformed-
    energy budget check."""

    e_n_violations: list
    w_n_violations: list
    e_cont_violations: list
    w_avg_violations: list
    slack_e: float
    slack_w: float
    w_budget: float | None
    w_avg_max: float

    @property
    def discrete_ok(self):
        return not self.e_n_violations and not self.w_n_violations

    @property
    def ok(self):
        return self.discrete_ok and not self.w_avg_violations


def decay_report(series, w_budget=None, avg_slack=1e-6) -> DecayReport:
    """Scan a snapshot series for decay violations.

    Discrete energies must be nonincreasing within 1e-8 * max(1, initial
    value).  The continuous energy is monitored with the same slack but only
    reported (it may legitimately wiggle by the discrete-continuous gap).
    When ``w_budget`` is given, the running time average of the continuous
    transformed energy must stay below it plus ``avg_slack``.
    """
    diag = series.diagnostics
    times = series.times
    slack_e = 1e-8 * max(1.0, diag[0].e_n)
    slack_w = 1e-8 * max(1.0, diag[0].w_n)
    e_n_viol, w_n_viol, e_cont_viol, w_avg_viol = [], [], [], []
    w_avg_max = 0.0
    running = 0.0
    for j in range(1, len(diag)):
        dt = times[j] - times[j - 1]
        if diag[j].e_n > diag[j - 1].e_n + slack_e:
            e_n_viol.append((times[j], diag[j].e_n - diag[j - 1].e_n))
        if diag[j].w_n > diag[j - 1].w_n + slack_w:
            w_n_viol.append((times[j], diag[j].w_n - diag[j - 1].w_n))
        if diag[j].e_cont > diag[j - 1].e_cont + slack_e:
            e_cont_viol.append((times[j], diag[j].e_cont - diag[j - 1].e_cont))
        running += 0.5 * dt * (diag[j].w_cont + diag[j - 1].w_cont)
        avg = running / times[j]
        w_avg_max = max(w_avg_max, avg)
        if w_budget is not None and avg > w_budget + avg_slack:
            w_avg_viol.append((times[j], avg - w_budget))
    return DecayReport(e_n_violations=e_n_viol, w_n_violations=w_n_viol,
                       e_cont_violations=e_cont_viol, w_avg_violations=w_avg_viol,
                       slack_e=slack_e, slack_w=slack_w, w_budget=w_budget,
                       w_avg_max=w_avg_max)


@dataclass(frozen=True)
class EnvelopeReport:
    """Containment of the trajectory inside the envelope-derived bounds."""

    budget: float
    a: float
    b: float
    spacing_min_seen: float
    spacing_max_seen: float
    max_envelope_excess: float

    @property
    def ok(self):
        slack = 1e-9 * max(1.0, self.b)
        return (self.spacing_min_seen >= self.a - slack
                and self.spacing_max_seen <= self.b + slack
                and self.max_envelope_excess <= 1e-8)


def envelope_check(model, series) -> EnvelopeReport:
    """Check every snapshot's cell densities against the initial energy
    budget and every accepted step's spacing extrema against [a, b]."""
    d0 = series.diagnostics[0]
    budget = math.sqrt(max(d0.w_n, 0.0)) + math.sqrt(max(d0.e_n, 0.0))
    a, b = spacing_bounds(model, max(d0.e_n, 0.0), max(d0.w_n, 0.0))
    excess = -math.inf
    for state in series.states:
        field = fields.reconstruct(model, state)
        rho_cells = field.rho_nodes[1:]
        env = np.asarray(model.energy_envelope(rho_cells))
        excess = max(excess, float(np.max(env) - budget), float(-np.min(env) - budget))
    return EnvelopeReport(budget=budget, a=a, b=b,
                          spacing_min_seen=series.stats.spacing_min_seen,
                          spacing_max_seen=series.stats.spacing_max_seen,
                          max_envelope_excess=excess)


# -- refinement study -------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    mass_error: float | None = None
    residual_max: float | None = None
    self_dist_rho: float | None = None
    self_dist_v: float | None = None
    holder_rho: float | None = None
    holder_v: float | None = None
    error: str | None = None


def grid_l2(values, grid):
    """Trapezoid L2 norm of sampled values on a uniform grid."""
    return math.sqrt(np.trapezoid(np.asarray(values) ** 2, grid))


def _sampled_series(model, series, grid):
    rho = np.empty((len(series), grid.size))
    vel = np.empty((len(series), grid.size))
    for j, state in enumerate(series.states):
        field = fields.reconstruct(model, state)
        rho[j] = np.asarray(field.rho(grid))
        vel[j] = np.asarray(field.v(grid))
    return rho, vel


def _holder_rate(samples, times, grid, exponent):
    worst = 0.0
    times = np.asarray(times)
    for j in range(len(times) - 1):
        diffs = samples[j + 1:] - samples[j]
        norms = np.sqrt(np.trapezoid(diffs ** 2, grid, axis=1))
        rates = norms / (times[j + 1:] - times[j]) ** exponent
        worst = max(worst, float(rates.max()))
    return worst


def convergence_study(model, init, n_list, T, cfg=None, grid_size=1024):
    """Refinement table over ascending particle counts.

    Per n: worst reconstructed-mass error, worst residual magnitude over the
    test-function library, sup-over-time grid-L2 distance to the next (2n)
    run when present, and the measured time-regularity rates (exponent 1/2
    for density, 1/4 for velocity).  Failures are recorded per row and the
    remaining entries continue.
    """
    cfg = cfg or IntegratorConfig()
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly ascending")
    grid = np.linspace(0.0, model.length, grid_size)
    library = test_function_library(model.length, T)

    runs = {}
    rows = []
    for n in n_list:
        try:
            state0 = build_particles(model, init, n)
            series = simulate(model, state0, T, cfg)
            runs[n] = (series, *_sampled_series(model, series, grid))
        except FluidchainError as exc:
            rows.append(ConvergenceRow(n=n, error=str(exc)))
            runs[n] = None

    for n in n_list:
        if runs.get(n) is None:
            continue
        series, rho_s, vel_s = runs[n]
        mass_error = max(abs(d.mass - model.m) for d in series.diagnostics)
        residual_max = 0.0
        for tf in library:
            fn = continuity_residual if tf.kind == "continuity" else momentum_residual
            residual_max = max(residual_max, abs(fn(model, series, init, tf).value))
        self_rho = self_v = None
        twin = runs.get(2 * n)
        if 2 * n in n_list and twin is not None:
            _, rho_t, vel_t = twin
            self_rho = float(np.max(np.sqrt(np.trapezoid((rho_t - rho_s) ** 2, grid, axis=1))))
            self_v = float(np.max(np.sqrt(np.trapezoid((vel_t - vel_s) ** 2, grid, axis=1))))
        rows.append(ConvergenceRow(
            n=n, mass_error=mass_error, residual_max=residual_max,
            self_dist_rho=self_rho, self_dist_v=self_v,
            holder_rho=_holder_rate(rho_s, series.times, grid, 0.5),
            holder_v=_holder_rate(vel_s, series.times, grid, 0.25)))
    rows.sort(key=lambda r: r.n)
    return rows
