"""Constitutive laws for the 1-D wall-bounded flow and everything derived
from them.

A :class:`FluidModel` carries the barotropic pressure law ``P(rho)`` and the
density-dependent dynamic viscosity ``mu(rho)`` together with the total mass
``m`` and the domain length ``L``.  From those it evaluates the derived
functions the particle scheme needs:

* ``viscous_potential``  -- cumulative mu(tau)/tau from the reference density,
* ``compression_energy`` -- potential-energy density of compression, zero at
  the reference density and positive elsewhere,
* ``spacing_potential``  -- per-particle potential as a function of the scaled
  cell width, with slope -P(m/s)/m,
* ``damping_potential`` / ``damping_gain`` -- the viscous-coupling
  antiderivative and its positive derivative mu(m/s)/(m*s),
* ``energy_envelope``    -- the increasing function that converts an energy
  budget into guaranteed density (and hence spacing) bounds.

Presets evaluate closed forms; a quadrature route (``*_quad``) is kept as an
independent cross-check and is the only route for custom laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import AdmissibilityError, ModelError, QuadratureError

PRESET_KINDS = ("isentropic_gas", "ideal_gas_entropy", "saint_venant", "custom")


@dataclass(frozen=True)
class NumericsTable:
    """Evaluation strategy knobs for the derived functions.

    ``probe_decades`` controls the geometric density grid rho* * 10^k,
    k in {-probe_decades, ..., probe_decades}, used for limit estimation,
    envelope inversion brackets, and construction-time sanity checks.
    """

    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-14
    probe_decades: int = 6

    def probe_grid(self, rho_star):
        k = np.arange(-self.probe_decades, self.probe_decades + 1)
        return rho_star * 10.0 ** k


@dataclass(frozen=True)
class GrowthReport:
    """Numeric verdict on the pressure-integral growth condition.

    ``holds`` requires the cumulative integral of P(s)/s^2 to grow without
    plateau towards high density and to stay bounded below towards vacuum.
    """

    holds: bool
    grows_high: bool
    bounded_low: bool
    probe_rho: np.ndarray
    probe_values: np.ndarray


def _vectorized(f, x_probe):
    """Return ``f`` if it maps arrays elementwise, else an np.vectorize wrap."""
    probe = np.asarray([x_probe, 2.0 * x_probe], dtype=float)
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return f
    except Exception:
        pass
    return np.vectorize(f, otypes=[float])


class FluidModel:
    """Barotropic fluid between walls: pressure/viscosity laws plus the
    functions derived from them.

    Use the classmethod constructors (:meth:`saint_venant`,
    :meth:`isentropic_gas`, :meth:`ideal_gas_entropy`, :meth:`custom`) or
    :func:`make_preset`; the bare ``__init__`` is shared plumbing.
    """

    def __init__(self, kind, pressure, pressure_prime, pressure_second,
                 viscosity, viscosity_prime, viscosity_second,
                 m, length, params=None, closed=None, table=None):
        if not (m > 0.0 and math.isfinite(m)):
            raise ModelError(f"total mass must be positive and finite, got {m}")
        if not (length > 0.0 and math.isfinite(length)):
            raise ModelError(f"domain length must be positive and finite, got {length}")
        if kind not in PRESET_KINDS:
            raise ModelError(f"unknown model kind {kind!r}")
        self.kind = kind
        self.m = float(m)
        self.length = float(length)
        self.rho_star = self.m / self.length
        self.params = dict(params or {})
        self.table = table or NumericsTable()
        self._closed = dict(closed or {})

        self.pressure = _vectorized(pressure, self.rho_star)
        self.pressure_prime = _vectorized(pressure_prime, self.rho_star)
        self.pressure_second = _vectorized(pressure_second, self.rho_star)
        self.viscosity = _vectorized(viscosity, self.rho_star)
        self.viscosity_prime = _vectorized(viscosity_prime, self.rho_star)
        self.viscosity_second = _vectorized(viscosity_second, self.rho_star)

        self._check_laws()

    # -- construction -----------------------------------------------------

    def _check_laws(self):
        grid = self.probe_grid()
        p = np.asarray(self.pressure(grid), dtype=float)
        dp = np.asarray(self.pressure_prime(grid), dtype=float)
        mu = np.asarray(self.viscosity(grid), dtype=float)
        if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
            raise ModelError("pressure law must be positive and finite on the probe grid")
        if not np.all(np.isfinite(dp)) or np.any(dp <= 0.0):
            raise ModelError("pressure law must be strictly increasing (P' > 0) on the probe grid")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
            raise ModelError("viscosity law must be positive and finite on the probe grid")

    @classmethod
    def saint_venant(cls, g, nu, m, length, table=None):
        """Shallow-water closure: P(rho) = g*rho^2/2, mu(rho) = nu*rho."""
        _require_positive(g=g, nu=nu, m=m, L=length)
        rho_star = m / length
        half_g = 0.5 * g
        sqrt_half_g = math.sqrt(half_g)

        def part_energy(rho):
            # integral of s^(-1/2) * |s - rho*| from rho* to rho, signed
            rho = np.asarray(rho, dtype=float)
            sq = np.sqrt(rho)
            upper = (2.0 / 3.0) * (rho * sq - rho_star * math.sqrt(rho_star)) \
                - 2.0 * rho_star * (sq - math.sqrt(rho_star))
            return nu * sqrt_half_g * np.where(rho >= rho_star, upper, -upper)

        closed = {
            "viscous_potential": lambda rho: nu * (np.asarray(rho, float) - rho_star),
            "compression_energy": lambda rho: half_g * (np.asarray(rho, float) - rho_star) ** 2,
            "spacing_potential": lambda s: half_g * (m / np.asarray(s, float) - rho_star),
            "part_energy": part_energy,
            "part_visc": lambda rho: 2.0 * nu * (np.sqrt(np.asarray(rho, float)) - math.sqrt(rho_star)),
        }
        return cls(
            "saint_venant",
            pressure=lambda rho: half_g * np.asarray(rho, float) ** 2,
            pressure_prime=lambda rho: g * np.asarray(rho, float),
            pressure_second=lambda rho: g + 0.0 * np.asarray(rho, float),
            viscosity=lambda rho: nu * np.asarray(rho, float),
            viscosity_prime=lambda rho: nu + 0.0 * np.asarray(rho, float),
            viscosity_second=lambda rho: 0.0 * np.asarray(rho, float),
            m=m, length=length, params={"g": g, "nu": nu},
            closed=closed, table=table,
        )

    @classmethod
    def isentropic_gas(cls, c, gamma, m, length, mu=1.0, table=None):
        """Power-law pressure P(rho) = c*rho^gamma (gamma > 1) with constant
        dynamic viscosity ``mu``."""
        _require_positive(c=c, m=m, L=length, mu=mu)
        if not gamma > 1.0:
            raise ModelError(f"isentropic exponent must satisfy gamma > 1, got {gamma}")
        closed = _power_pressure_closed(c, gamma, m, length)
        rho_star = m / length
        closed["viscous_potential"] = lambda rho: mu * np.log(np.asarray(rho, float) / rho_star)
        closed["part_visc"] = lambda rho: 2.0 * mu * (
            1.0 / math.sqrt(rho_star) - 1.0 / np.sqrt(np.asarray(rho, float)))
        return cls(
            "isentropic_gas",
            pressure=lambda rho: c * np.asarray(rho, float) ** gamma,
            pressure_prime=lambda rho: c * gamma * np.asarray(rho, float) ** (gamma - 1.0),
            pressure_second=lambda rho: c * gamma * (gamma - 1.0) * np.asarray(rho, float) ** (gamma - 2.0),
            viscosity=lambda rho: mu + 0.0 * np.asarray(rho, float),
            viscosity_prime=lambda rho: 0.0 * np.asarray(rho, float),
            viscosity_second=lambda rho: 0.0 * np.asarray(rho, float),
            m=m, length=length, params={"c": c, "gamma": gamma, "mu": mu},
            closed=closed, table=table,
        )

    @classmethod
    def ideal_gas_entropy(cls, c, gamma, visc_amp, m, length, table=None):
        """Constant-entropy ideal gas: P = c*rho^gamma with gamma in (1, 2)
        and mu(rho) = visc_amp * rho^((gamma-1)/2)."""
        _require_positive(c=c, A=visc_amp, m=m, L=length)
        if not (1.0 < gamma < 2.0):
            raise ModelError(f"entropy-consistent exponent requires gamma in (1, 2), got {gamma}")
        a = visc_amp
        eta = 0.5 * (gamma - 1.0)
        closed = _power_pressure_closed(c, gamma, m, length)
        rho_star = m / length
        closed["viscous_potential"] = lambda rho: (2.0 * a / (gamma - 1.0)) * (
            np.asarray(rho, float) ** eta - rho_star ** eta)
        # exponent eta - 1/2 = (gamma - 2)/2 < 0, so this stays finite at infinity
        closed["part_visc"] = lambda rho: (2.0 * a / (gamma - 2.0)) * (
            np.asarray(rho, float) ** (eta - 0.5) - rho_star ** (eta - 0.5))
        return cls(
            "ideal_gas_entropy",
            pressure=lambda rho: c * np.asarray(rho, float) ** gamma,
            pressure_prime=lambda rho: c * gamma * np.asarray(rho, float) ** (gamma - 1.0),
            pressure_second=lambda rho: c * gamma * (gamma - 1.0) * np.asarray(rho, float) ** (gamma - 2.0),
            viscosity=lambda rho: a * np.asarray(rho, float) ** eta,
            viscosity_prime=lambda rho: a * eta * np.asarray(rho, float) ** (eta - 1.0),
            viscosity_second=lambda rho: a * eta * (eta - 1.0) * np.asarray(rho, float) ** (eta - 2.0),
            m=m, length=length, params={"c": c, "gamma": gamma, "visc_amp": a},
            closed=closed, table=table,
        )

    @classmethod
    def custom(cls, pressure, viscosity, m, length,
               pressure_prime=None, pressure_second=None,
               viscosity_prime=None, viscosity_second=None, table=None):
        """User-supplied laws; derived functions go through adaptive
        quadrature.  Missing derivatives fall back to central differences."""
        pressure_prime = pressure_prime or _fd_prime(pressure)
        pressure_second = pressure_second or _fd_second(pressure)
        viscosity_prime = viscosity_prime or _fd_prime(viscosity)
        viscosity_second = viscosity_second or _fd_second(viscosity)
        return cls(
            "custom", pressure, pressure_prime, pressure_second,
            viscosity, viscosity_prime, viscosity_second,
            m=m, length=length, params={}, closed={}, table=table,
        )

    # -- quadrature plumbing ----------------------------------------------

    def probe_grid(self):
        return self.table.probe_grid(self.rho_star)

    def _quad(self, f, lo, hi):
        """Adaptive quadrature of ``f`` from ``lo`` to ``hi`` (either order).

        Integrates in a log-transformed variable when the limits span many
        orders of magnitude, which stabilises the integrable end-point
        behaviour towards vacuum.
        """
        lo = float(lo)
        hi = float(hi)
        if lo == hi:
            return 0.0
        sign = 1.0
        if hi < lo:
            lo, hi = hi, lo
            sign = -1.0
        if lo <= 0.0:
            raise ModelError("integration limits must be positive")
        if not math.isfinite(hi):
            raise QuadratureError(
                "integration limit overflowed: the pressure integral diverges "
                "towards vacuum widths")
        if hi / lo > 1.0e3:
            g = lambda u: f(math.exp(u)) * math.exp(u)
            a, b = math.log(lo), math.log(hi)
        else:
            g, a, b = f, lo, hi
        out = quad(g, a, b, epsabs=self.table.quad_abs_tol,
                   epsrel=self.table.quad_rel_tol, limit=200, full_output=1)
        value, err = out[0], out[1]
        if len(out) > 3 or not math.isfinite(value):
            raise QuadratureError(
                f"quadrature did not converge on [{lo:g}, {hi:g}]"
                f" (achieved error {err:.3g})", achieved_error=err)
        return sign * value

    def _eval(self, name, quad_fn, arg):
        """Evaluate a derived function: closed form when available, else
        elementwise quadrature.  Overflow to inf is left to the callers'
        finiteness guards."""
        closed = self._closed.get(name)
        if closed is not None:
            with np.errstate(over="ignore", divide="ignore"):
                out = closed(arg)
            return out if np.ndim(arg) else float(out)
        if np.ndim(arg):
            flat = np.asarray(arg, dtype=float).reshape(-1)
            out = np.array([quad_fn(float(v)) for v in flat])
            return out.reshape(np.shape(arg))
        return quad_fn(float(arg))

    # -- derived scalar functions ------------------------------------------

    def viscous_potential(self, rho):
        """Cumulative mu(tau)/tau from the reference density; strictly
        increasing, zero at rho*."""
        _require_positive_density(rho)
        return self._eval("viscous_potential", self.viscous_potential_quad, rho)

    def viscous_potential_quad(self, rho):
        return self._quad(lambda t: float(self.viscosity(t)) / t, self.rho_star, rho)

    def compression_energy(self, rho):
        """Potential-energy density of compression; nonnegative, zero only
        at the reference density."""
        _require_positive_density(rho)
        return self._eval("compression_energy", self.compression_energy_quad, rho)

    def compression_energy_quad(self, rho):
        rho = float(rho)
        integral = self._quad(lambda t: float(self.pressure(t)) / t ** 2, self.rho_star, rho)
        p_star = float(self.pressure(self.rho_star))
        return rho * integral - (p_star / self.rho_star) * rho + p_star

    def spacing_potential(self, s):
        """Per-particle potential of a scaled cell width; zero at s = L and
        strictly decreasing.

        Near vanishing widths the growth condition makes the value diverge;
        an overflowing evaluation is reported rather than returned.
        """
        _require_positive_density(s, what="cell width")
        out = self._eval("spacing_potential", self.spacing_potential_quad, s)
        if not np.all(np.isfinite(out)):
            raise QuadratureError(
                "spacing potential overflowed: the pressure integral diverges "
                "towards vacuum widths")
        return out

    def spacing_potential_quad(self, s):
        return self._quad(lambda t: float(self.pressure(t)) / t ** 2,
                          self.rho_star, self.m / float(s))

    def spacing_potential_prime(self, s):
        """Slope of the spacing potential, -P(m/s)/m < 0."""
        _require_positive_density(s, what="cell width")
        s = np.asarray(s, dtype=float) if np.ndim(s) else s
        out = -self.pressure(self.m / np.asarray(s, float)) / self.m
        return out if np.ndim(s) else float(out)

    def spacing_potential_second(self, s):
        """Curvature s^(-2) * P'(m/s) > 0."""
        _require_positive_density(s, what="cell width")
        arr = np.asarray(s, dtype=float)
        out = self.pressure_prime(self.m / arr) / arr ** 2
        return out if np.ndim(s) else float(out)

    def damping_potential(self, s):
        """Antiderivative of the viscous coupling gain, -k(m/s)/m; strictly
        increasing and zero at s = L."""
        _require_positive_density(s, what="cell width")
        if np.ndim(s):
            return -np.asarray(self.viscous_potential(self.m / np.asarray(s, float))) / self.m
        return -self.viscous_potential(self.m / float(s)) / self.m

    def damping_gain(self, s):
        """Viscous coupling gain mu(m/s)/(m*s) > 0."""
        _require_positive_density(s, what="cell width")
        arr = np.asarray(s, dtype=float)
        out = self.viscosity(self.m / arr) / (self.m * arr)
        return out if np.ndim(s) else float(out)

    # -- admissibility envelope ---------------------------------------------

    def envelope_parts(self, rho):
        """The three increasing ingredients of the energy envelope:
        (weighted-energy integral, weighted-viscosity integral,
        viscous potential)."""
        _require_positive_density(rho)
        f1 = self._eval("part_energy", self._part_energy_quad, rho)
        f2 = self._eval("part_visc", self._part_visc_quad, rho)
        kk = self.viscous_potential(rho)
        return f1, f2, kk

    def envelope_parts_quad(self, rho):
        return (self._part_energy_quad(rho), self._part_visc_quad(rho),
                self.viscous_potential_quad(rho))

    def _part_energy_quad(self, rho):
        def f(t):
            q = self.compression_energy(t)
            return t ** -1.5 * float(self.viscosity(t)) * math.sqrt(max(float(q), 0.0))
        return self._quad(f, self.rho_star, rho)

    def _part_visc_quad(self, rho):
        return self._quad(lambda t: t ** -1.5 * float(self.viscosity(t)), self.rho_star, rho)

    def energy_envelope(self, rho):
        """Increasing function mapping density to the minimal energy budget
        sqrt(W) + sqrt(E) able to reach it; zero at the reference density."""
        f1, f2, kk = self.envelope_parts(rho)
        f1 = np.asarray(f1, dtype=float)
        f2 = np.asarray(f2, dtype=float)
        kk = np.asarray(kk, dtype=float)
        two_sqrt2 = 2.0 * math.sqrt(2.0)
        f2n = f2 / (2.0 * math.sqrt(2.0 * self.length))
        kkn = kk / math.sqrt(2.0 * self.m)
        hi = np.maximum(np.maximum(np.sqrt(np.maximum(f1, 0.0) / two_sqrt2), f2n), kkn)
        lo = np.minimum(np.minimum(-np.sqrt(np.maximum(-f1, 0.0) / two_sqrt2), f2n), kkn)
        out = np.where(np.asarray(rho, dtype=float) >= self.rho_star, hi, lo)
        return out if np.ndim(rho) else float(out)

    def energy_envelope_limits(self):
        """Estimate the envelope's limits at infinite and vanishing density.

        Returns positive thresholds ``(limit_high, limit_low)`` where
        ``limit_low`` is the magnitude of the vacuum-side limit.  A side is
        reported infinite when the outermost probe exceeds 1.5x the previous
        decade's value, or when the decade increments stop shrinking (which
        catches logarithmic divergence, e.g. viscosity growing like
        sqrt(density)).
        """
        grid = self.probe_grid()
        f_hi = [self.energy_envelope(grid[i]) for i in (-3, -2, -1)]
        f_lo = [self.energy_envelope(grid[i]) for i in (2, 1, 0)]
        hi_unbounded = (abs(f_hi[2]) > 1.5 * abs(f_hi[1])
                        or f_hi[2] - f_hi[1] >= 0.9 * (f_hi[1] - f_hi[0]))
        lo_unbounded = (abs(f_lo[2]) > 1.5 * abs(f_lo[1])
                        or f_lo[1] - f_lo[2] >= 0.9 * (f_lo[0] - f_lo[1]))
        limit_high = math.inf if hi_unbounded else abs(f_hi[2])
        limit_low = math.inf if lo_unbounded else abs(f_lo[2])
        return limit_high, limit_low

    def energy_envelope_inverse(self, target, rel_tol=1e-10):
        """Invert the energy envelope by bisection in log-density.

        The default bracket spans rho* * 10^(+-6) and is widened (up to
        10^(+-12)) when the target lies beyond it; an inadmissible target
        raises ``AdmissibilityError`` naming the failing side.
        """
        target = float(target)
        if target == 0.0:
            return self.rho_star
        decades = self.table.probe_decades
        lo = self.rho_star * 10.0 ** -decades
        hi = self.rho_star * 10.0 ** decades
        if target > 0.0:
            while self.energy_envelope(hi) < target:
                hi *= 10.0
                if hi > self.rho_star * 1.0e12:
                    raise AdmissibilityError(
                        f"energy budget {target:g} exceeds the envelope's reach"
                        " towards high density", side="high")
            lo = self.rho_star
        else:
            while self.energy_envelope(lo) > target:
                lo /= 10.0
                if lo < self.rho_star * 1.0e-12:
                    raise AdmissibilityError(
                        f"energy budget {-target:g} exceeds the envelope's reach"
                        " towards vacuum", side="low")
            hi = self.rho_star
        a, b = math.log(lo), math.log(hi)
        while b - a > math.log1p(rel_tol):
            mid = 0.5 * (a + b)
            if self.energy_envelope(math.exp(mid)) < target:
                a = mid
            else:
                b = mid
        return math.exp(0.5 * (a + b))

    # -- growth condition ----------------------------------------------------

    def pressure_growth_report(self):
        """Probe the cumulative P(s)/s^2 integral for divergence at high
        density and boundedness towards vacuum.

        Uses decade-increment ratios so that logarithmic divergence towards
        vacuum is detected; a genuinely log-divergent high side paired with a
        bounded low side would be conservatively rejected.
        """
        grid = self.probe_grid()
        values = np.array([self.spacing_potential(self.m / r) for r in grid])
        d_hi, d_hi_prev = values[-1] - values[-2], values[-2] - values[-3]
        d_lo, d_lo_prev = values[1] - values[0], values[2] - values[1]
        grows_high = d_hi >= 0.9 * d_hi_prev and d_hi > 0.0
        bounded_low = d_lo < 0.9 * d_lo_prev
        return GrowthReport(holds=bool(grows_high and bounded_low),
                            grows_high=bool(grows_high), bounded_low=bool(bounded_low),
                            probe_rho=grid, probe_values=values)

    def __repr__(self):
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"FluidModel({self.kind}, {ps}, m={self.m:g}, L={self.length:g})"


def make_preset(kind, params, m, length, table=None):
    """Build a preset model from a plain parameter record (CLI entry point).

    Custom models are specified through power laws ``pressure`` and
    ``viscosity``, each ``{"coeff": c, "exponent": e}``.
    """
    params = dict(params)
    if kind == "saint_venant":
        return FluidModel.saint_venant(g=params.pop("g"), nu=params.pop("nu"),
                                       m=m, length=length, table=table)
    if kind == "isentropic_gas":
        return FluidModel.isentropic_gas(c=params.pop("c"), gamma=params.pop("gamma"),
                                         mu=params.pop("mu", 1.0),
                                         m=m, length=length, table=table)
    if kind == "ideal_gas_entropy":
        return FluidModel.ideal_gas_entropy(c=params.pop("c"), gamma=params.pop("gamma"),
                                            visc_amp=params.pop("visc_amp"),
                                            m=m, length=length, table=table)
    if kind == "custom":
        p = params.pop("pressure")
        v = params.pop("viscosity")
        pc, pe = float(p["coeff"]), float(p["exponent"])
        vc, ve = float(v["coeff"]), float(v["exponent"])
        _require_positive(pressure_coeff=pc, viscosity_coeff=vc)
        return FluidModel.custom(
            pressure=lambda rho: pc * np.asarray(rho, float) ** pe,
            viscosity=lambda rho: vc * np.asarray(rho, float) ** ve,
            pressure_prime=lambda rho: pc * pe * np.asarray(rho, float) ** (pe - 1.0),
            pressure_second=lambda rho: pc * pe * (pe - 1.0) * np.asarray(rho, float) ** (pe - 2.0),
            viscosity_prime=lambda rho: vc * ve * np.asarray(rho, float) ** (ve - 1.0),
            viscosity_second=lambda rho: vc * ve * (ve - 1.0) * np.asarray(rho, float) ** (ve - 2.0),
            m=m, length=length, table=table,
        )
    raise ModelError(f"unknown model kind {kind!r}")


# -- helpers -----------------------------------------------------------------

def _power_pressure_closed(c, gamma, m, length):
    """Closed forms shared by the two power-law pressure presets."""
    rho_star = m / length

    def compression_energy(rho):
        rho = np.asarray(rho, dtype=float)
        return (c / (gamma - 1.0)) * (
            rho ** gamma - gamma * rho_star ** (gamma - 1.0) * rho
            + (gamma - 1.0) * rho_star ** gamma)

    def spacing_potential(s):
        r = m / np.asarray(s, dtype=float)
        return (c / (gamma - 1.0)) * (r ** (gamma - 1.0) - rho_star ** (gamma - 1.0))

    return {"compression_energy": compression_energy,
            "spacing_potential": spacing_potential}


def _require_positive(**named):
    for name, value in named.items():
        if not (value > 0.0 and math.isfinite(value)):
            raise ModelError(f"parameter {name} must be positive and finite, got {value}")


def _require_positive_density(rho, what="density"):
    arr = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ModelError(f"{what} must be positive and finite")


def _fd_prime(f, rel_h=1e-6):
    def prime(x):
        x = np.asarray(x, dtype=float)
        h = rel_h * x
        return (np.asarray(f(x + h), float) - np.asarray(f(x - h), float)) / (2.0 * h)
    return prime


def _fd_second(f, rel_h=1e-4):
    def second(x):
        x = np.asarray(x, dtype=float)
        h = rel_h * x
        return (np.asarray(f(x + h), float) - 2.0 * np.asarray(f(x), float)
                + np.asarray(f(x - h), float)) / h ** 2
    return second
