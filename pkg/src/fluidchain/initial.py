"""Initial-condition handling: equal-mass partitioning of a density profile,
velocity sampling, the derived energy budget constants, and the admissibility
verdict.

Density profiles are reduced to a node table with an exact piecewise-quadratic
cumulative mass, so the equal-mass cells are found by bisection on a monotone
function; a constant profile short-circuits to the exact uniform partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ParticleState, check_domain, spacing_bounds
from .errors import InitialDataError
from .model import FluidModel

DENSE_SAMPLES = 100_001
GAIN_SAMPLES = 10_000


@dataclass(frozen=True)
class InitialData:
    """Validated initial profiles plus the norms the budget formulas need."""

    rho0: object                 # callable rho0(x) > 0 on [0, L]
    v0: object                   # callable with v0(0) = v0(L) = 0 exactly
    m: float
    length: float
    rho0_sup: float
    rho0_deriv_sup: float
    rho_min: float
    v0_deriv_l2: float
    rho0_kind: str = "callable"
    v0_kind: str = "callable"
    _constant_rho: float | None = None
    _nodes_x: np.ndarray | None = None
    _nodes_rho: np.ndarray | None = None
    _nodes_cum: np.ndarray | None = None

    def cumulative_mass(self, x):
        """Mass between the wall at 0 and position x."""
        if self._constant_rho is not None:
            return self._constant_rho * x
        j = int(np.clip(np.searchsorted(self._nodes_x, x, side="right") - 1,
                        0, self._nodes_x.size - 2))
        x0 = self._nodes_x[j]
        width = self._nodes_x[j + 1] - x0
        slope = (self._nodes_rho[j + 1] - self._nodes_rho[j]) / width
        d = x - x0
        return self._nodes_cum[j] + self._nodes_rho[j] * d + 0.5 * slope * d * d

    def invert_mass(self, target):
        """Position x with cumulative mass equal to target (bisection on the
        monotone cumulative, polished to ~1e-14 * L)."""
        if self._constant_rho is not None:
            return target / self._constant_rho
        lo_j = int(np.clip(np.searchsorted(self._nodes_cum, target, side="right") - 1,
                           0, self._nodes_x.size - 2))
        lo, hi = self._nodes_x[lo_j], self._nodes_x[lo_j + 1]
        tol = 1e-14 * self.length
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.cumulative_mass(mid) < target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def _as_float(f, x):
    return float(np.asarray(f(x), dtype=float))


def make_initial(model: FluidModel, rho0, v0, samples=DENSE_SAMPLES,
                 rho0_kind="callable", v0_kind="callable",
                 rho0_sup=None, rho0_deriv_sup=None, rho_min=None,
                 v0_deriv_l2=None, constant_rho=None, nodes=None) -> InitialData:
    """Validate profiles and compute (or accept) the norms.

    Norms left as None are computed by dense uniform sampling (upper-biased
    finite differences); analytic values may be supplied by the presets.
    Passing ``nodes=(xs, rho_values)`` uses those exact table nodes for the
    cumulative mass instead of dense resampling.
    """
    L = model.length
    m = model.m

    if _as_float(v0, 0.0) != 0.0 or _as_float(v0, L) != 0.0:
        raise InitialDataError(
            "velocity profile must vanish exactly at both walls; "
            "it is rejected rather than projected")

    if constant_rho is not None:
        nodes_x = nodes_rho = nodes_cum = None
        value = float(constant_rho)
        if value <= 0.0:
            raise InitialDataError("density must be positive")
        mass = value * L
        rho0_sup = value if rho0_sup is None else rho0_sup
        rho_min = value if rho_min is None else rho_min
        rho0_deriv_sup = 0.0 if rho0_deriv_sup is None else rho0_deriv_sup
    else:
        if nodes is not None:
            nodes_x = np.asarray(nodes[0], dtype=float)
            nodes_rho = np.asarray(nodes[1], dtype=float)
        else:
            nodes_x = np.linspace(0.0, L, samples)
            nodes_rho = np.asarray(rho0(nodes_x), dtype=float)
            if nodes_rho.shape != nodes_x.shape:
                nodes_rho = np.array([_as_float(rho0, x) for x in nodes_x])
        if not np.all(np.isfinite(nodes_rho)) or np.any(nodes_rho <= 0.0):
            raise InitialDataError(
                "density samples must be positive and finite "
                "(the cumulative mass must be strictly increasing)")
        widths = np.diff(nodes_x)
        cell_mass = widths * 0.5 * (nodes_rho[:-1] + nodes_rho[1:])
        nodes_cum = np.concatenate(([0.0], np.cumsum(cell_mass)))
        mass = float(nodes_cum[-1])
        slopes = np.diff(nodes_rho) / widths
        if rho0_sup is None:
            rho0_sup = float(nodes_rho.max())
        if rho_min is None:
            rho_min = float(nodes_rho.min())
        if rho0_deriv_sup is None:
            rho0_deriv_sup = float(np.max(np.abs(slopes))) if slopes.size else 0.0

    if abs(mass - m) > 1e-8 * m:
        raise InitialDataError(
            f"density profile integrates to {mass:.12g}, expected total mass "
            f"{m:.12g} (relative error {abs(mass - m) / m:.3e} > 1e-8)")

    if v0_deriv_l2 is None:
        grid = np.linspace(0.0, L, samples)
        vals = np.asarray(v0(grid), dtype=float)
        if vals.shape != grid.shape:
            vals = np.array([_as_float(v0, x) for x in grid])
        deriv = np.gradient(vals, grid)
        v0_deriv_l2 = float(math.sqrt(np.trapezoid(deriv ** 2, grid)))

    return InitialData(
        rho0=rho0, v0=v0, m=m, length=L,
        rho0_sup=float(rho0_sup), rho0_deriv_sup=float(rho0_deriv_sup),
        rho_min=float(rho_min), v0_deriv_l2=float(v0_deriv_l2),
        rho0_kind=rho0_kind, v0_kind=v0_kind,
        _constant_rho=(None if constant_rho is None else float(constant_rho)),
        _nodes_x=nodes_x, _nodes_rho=nodes_rho, _nodes_cum=nodes_cum)


# -- profile presets -----------------------------------------------------------

def constant_density(model, value=None):
    """rho0 identically value (default: the reference density m/L)."""
    value = model.rho_star if value is None else float(value)
    def rho0(x):
        return value + 0.0 * np.asarray(x, dtype=float)
    return rho0, value


def sine_velocity(model, amplitude, mode=1):
    """v0(x) = amplitude * sin(mode*pi*x/L), clamped to exactly zero at the
    walls, with the analytic derivative L2 norm."""
    L = model.length
    if int(mode) != mode or mode < 1:
        raise InitialDataError("sine mode must be a positive integer")
    mode = int(mode)

    def v0(x):
        x = np.asarray(x, dtype=float)
        inside = amplitude * np.sin(mode * np.pi * x / L)
        return np.where((x <= 0.0) | (x >= L), 0.0, inside)

    deriv_l2 = abs(amplitude) * (mode * math.pi / L) * math.sqrt(L / 2.0)
    return v0, deriv_l2


def table_profile(xs, values, length, name):
    """Linear interpolant through (xs, values); xs must start at 0, end at L,
    and be strictly increasing."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
        raise InitialDataError(f"{name} table needs matching 1-D x/value arrays")
    if xs[0] != 0.0 or abs(xs[-1] - length) > 1e-12 * length:
        raise InitialDataError(f"{name} table must span [0, L]")
    if np.any(np.diff(xs) <= 0.0):
        raise InitialDataError(f"{name} table x values must be strictly increasing")

    def f(x):
        return np.interp(np.asarray(x, dtype=float), xs, values)

    return f


def initial_from_config(model, block):
    """Build InitialData from the JSON 'initial' block (see cli module)."""
    rho_block = block["rho0"]
    v_block = block["v0"]
    L = model.length

    kw = {}
    if rho_block["kind"] == "constant":
        rho0, value = constant_density(model, rho_block.get("value"))
        kw.update(constant_rho=value, rho0_kind="constant")
    elif rho_block["kind"] == "table":
        rho0 = table_profile(rho_block["x"], rho_block["rho"], L, "rho0")
        kw.update(rho0_kind="table",
                  nodes=(np.asarray(rho_block["x"], dtype=float),
                         np.asarray(rho_block["rho"], dtype=float)))
    else:
        raise InitialDataError(f"unknown rho0 kind {rho_block['kind']!r}")

    if v_block["kind"] == "zero":
        def v0(x):
            return 0.0 * np.asarray(x, dtype=float)
        kw.update(v0_deriv_l2=0.0, v0_kind="zero")
    elif v_block["kind"] == "sine":
        v0, deriv_l2 = sine_velocity(model, v_block["amplitude"], v_block.get("mode", 1))
        kw.update(v0_deriv_l2=deriv_l2, v0_kind="sine")
    elif v_block["kind"] == "table":
        v0 = table_profile(v_block["x"], v_block["v"], L, "v0")
        kw.update(v0_kind="table")
    else:
        raise InitialDataError(f"unknown v0 kind {v_block['kind']!r}")

    return make_initial(model, rho0, v0, **kw)


# -- particle construction and budgets ------------------------------------------

def build_particles(model: FluidModel, init: InitialData, n: int) -> ParticleState:
    """Equal-mass partition of the density profile plus velocity sampling.

    Interior position i carries cumulative mass m*(n-i)/n from the wall; the
    cells between neighbours then hold m/n each.
    """
    if n < 2:
        raise InitialDataError(f"need n >= 2 packets, got {n}")
    x = np.empty(n - 1)
    for i in range(1, n):
        x[i - 1] = init.invert_mass(init.m * (n - i) / n)
    v = np.asarray(init.v0(x), dtype=float)
    if v.shape != x.shape:
        v = np.array([_as_float(init.v0, xi) for xi in x])
    state = ParticleState(n=n, t=0.0, x=x, v=v)
    check_domain(model, state)
    return state


@dataclass(frozen=True)
class BudgetConstants:
    """n-independent bounds on the initial discrete functionals."""

    e_bar: float
    w_bar: float
    z_bar: float
    a_bar: float
    m_bar: float


def budget_constants(model: FluidModel, init: InitialData) -> BudgetConstants:
    """Energy budget constants from the profile norms.

    ``m_bar`` is the max damping gain over scaled spacings between
    m/sup(rho0) and m/min(rho0), sampled on a dense grid.
    """
    m = model.m
    L = model.length
    lo = m / init.rho0_sup
    hi = m / init.rho_min
    if hi > lo:
        grid = np.linspace(lo, hi, GAIN_SAMPLES)
        m_bar = float(np.max(model.damping_gain(grid)))
    else:
        m_bar = float(model.damping_gain(lo))
    pot_sup = max(float(model.spacing_potential(lo)), 0.0)
    dv2 = init.v0_deriv_l2 ** 2
    grad_term = 2.0 * m ** 5 * m_bar ** 2 * init.rho0_deriv_sup ** 2 / init.rho_min ** 6
    e_bar = 0.5 * m * L * dv2 + m * pot_sup
    w_bar = m * L * dv2 + grad_term + m * pot_sup
    z_bar = 0.5 * dv2
    a_bar = 2.0 * m ** 2 * m_bar * init.rho0_deriv_sup / init.rho_min ** 3
    return BudgetConstants(e_bar=e_bar, w_bar=w_bar, z_bar=z_bar,
                           a_bar=a_bar, m_bar=m_bar)


@dataclass(frozen=True)
class AdmissibilityReport:
    e_bar: float
    w_bar: float
    z_bar: float
    a_bar: float
    m_bar: float
    rho_min: float
    f_limit_high: float
    f_limit_low: float
    lhs: float
    admissible: bool
    a: float | None = None
    b: float | None = None

    def to_dict(self):
        def ext(v):
            if v is None:
                return None
            return "infinite" if math.isinf(v) else v
        return {
            "e_bar": self.e_bar, "w_bar": self.w_bar, "z_bar": self.z_bar,
            "a_bar": self.a_bar, "m_bar": self.m_bar, "rho_min": self.rho_min,
            "f_limit_high": ext(self.f_limit_high),
            "f_limit_low": ext(self.f_limit_low),
            "lhs": self.lhs, "admissible": self.admissible,
            "a": self.a, "b": self.b,
        }


def admissibility(model: FluidModel, init: InitialData) -> AdmissibilityReport:
    """Compare the initial energy budget against the envelope limits.

    Inadmissibility is a verdict, not an error; spacing bounds are attached
    only when the verdict is positive.
    """
    consts = budget_constants(model, init)
    limit_high, limit_low = model.energy_envelope_limits()
    lhs = math.sqrt(consts.w_bar) + math.sqrt(consts.e_bar)
    admissible = lhs < min(limit_high, limit_low)
    a = b = None
    if admissible:
        a, b = spacing_bounds(model, consts.e_bar, consts.w_bar)
    return AdmissibilityReport(
        e_bar=consts.e_bar, w_bar=consts.w_bar, z_bar=consts.z_bar,
        a_bar=consts.a_bar, m_bar=consts.m_bar, rho_min=init.rho_min,
        f_limit_high=limit_high, f_limit_low=limit_low,
        lhs=lhs, admissible=admissible, a=a, b=b)
