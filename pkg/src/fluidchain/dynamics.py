"""Particle chain state, its equations of motion, and the discrete
energy-style functionals.

The chain has ``n`` mass packets of m/n each between a fixed wall at 0 and a
massless, motionless ghost marker at L.  Interior packet positions are stored
in descending order ``L > x_1 > ... > x_{n-1} > 0``; the boundary values
``x_0 = L``, ``x_n = 0`` and ``v_0 = v_n = 0`` are implicit constants and are
never stored, so boundary conditions cannot be mutated by accident.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, DomainError
from .model import FluidModel


@dataclass(frozen=True)
class ParticleState:
    """Interior positions/velocities of the chain at a time stamp."""

    n: int
    t: float
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"need at least 2 packets, got n={self.n}")
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if x.shape != (self.n - 1,) or v.shape != (self.n - 1,):
            raise DomainError(
                f"state arrays must have length n-1={self.n - 1}, "
                f"got {x.shape} and {v.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DomainError("state entries must be finite")


@dataclass(frozen=True)
class StateDerivative:
    dx: np.ndarray
    dv: np.ndarray


@dataclass(frozen=True)
class DiscreteFunctionals:
    """Per-state values of the discrete energy, the transformed-momentum
    energy, the squared-velocity-slope sum, and the max adjacent
    damping-potential jump."""

    e_n: float
    w_n: float
    z_n: float
    h_n: float
    v_transformed: np.ndarray


def gaps_from_interior(length, x):
    """Cell widths x_{i-1} - x_i for i = 1..n from interior positions,
    walls at ``length`` and 0 included."""
    full = np.empty(x.size + 2)
    full[0] = length
    full[1:-1] = x
    full[-1] = 0.0
    return full[:-1] - full[1:]


def spacings(model, state):
    """Cell widths x_{i-1} - x_i for i = 1..n, walls included."""
    return gaps_from_interior(model.length, state.x)


def check_domain(model, state):
    """Raise DomainError unless the state lies in the open admissible set."""
    gaps = spacings(model, state)
    if not np.all(np.isfinite(gaps)) or np.any(gaps <= 0.0):
        raise DomainError(
            f"state at t={state.t:g} violates the strict ordering "
            f"0 < x_{{n-1}} < ... < x_1 < L (min gap {gaps.min():.3e})")


def rhs_arrays(model, n, x, v):
    """Equations of motion on raw arrays; hot path for the integrator.

    dx_i = v_i and dv_i combines the pressure-force difference of the two
    adjacent cells with the viscous coupling to both neighbours.  Raises
    DomainError when the ordering is violated, so integrators can reject
    trial states.
    """
    gaps = gaps_from_interior(model.length, x)
    if not np.all(np.isfinite(gaps)) or np.any(gaps <= 0.0):
        raise DomainError("trial state left the ordered domain")
    if not np.all(np.isfinite(v)):
        raise DomainError("trial state has non-finite velocities")
    s = n * gaps
    full_v = np.empty(n + 1)
    full_v[0] = 0.0
    full_v[1:-1] = v
    full_v[-1] = 0.0
    dvel = full_v[:-1] - full_v[1:]          # v_{i-1} - v_i per cell
    force = np.asarray(model.spacing_potential_prime(s), dtype=float)
    gain = np.asarray(model.damping_gain(s), dtype=float)
    dv = (n * (force[:-1] - force[1:])
          + n * n * (gain[:-1] * dvel[:-1] - gain[1:] * dvel[1:]))
    return v.copy(), dv


def rhs(model: FluidModel, state: ParticleState) -> StateDerivative:
    """Time derivative of a particle state."""
    check_domain(model, state)
    dx, dv = rhs_arrays(model, state.n, state.x, state.v)
    return StateDerivative(dx=dx, dv=dv)


def functionals(model: FluidModel, state: ParticleState) -> DiscreteFunctionals:
    """Discrete functionals of a state.

    Sums run left to right in the cell index so reruns are bit-identical.
    """
    check_domain(model, state)
    n = state.n
    m = model.m
    gaps = spacings(model, state)
    s = n * gaps
    pot = np.asarray(model.spacing_potential(s), dtype=float)
    damp = np.asarray(model.damping_potential(s), dtype=float)

    full_v = np.concatenate(([0.0], state.v, [0.0]))
    dvel = full_v[:-1] - full_v[1:]

    pot_sum = 0.0
    for value in pot:
        pot_sum += value
    kin_sum = 0.0
    for value in state.v:
        kin_sum += value * value
    e_n = (m / (2.0 * n)) * kin_sum + (m / n) * pot_sum

    # transformed velocities v_i - n*K(s_i) + n*K(s_{i+1}), interior only
    v_tr = state.v - n * damp[:-1] + n * damp[1:]
    w_sum = 0.0
    for value in v_tr:
        w_sum += value * value
    w_n = (m / (2.0 * n)) * w_sum + (m / n) * pot_sum

    z_sum = 0.0
    for i in range(n):
        z_sum += dvel[i] * dvel[i] / gaps[i]
    z_n = 0.5 * z_sum

    h_n = 0.0
    for i in range(n - 1):
        jump = n * abs(damp[i] - damp[i + 1])
        if jump > h_n:
            h_n = jump
    return DiscreteFunctionals(e_n=e_n, w_n=w_n, z_n=z_n, h_n=h_n, v_transformed=v_tr)


def energy_budget(func: DiscreteFunctionals) -> float:
    """sqrt(W) + sqrt(E), the quantity the envelope bounds compare against."""
    return float(np.sqrt(max(func.w_n, 0.0)) + np.sqrt(max(func.e_n, 0.0)))


def spacing_bounds(model: FluidModel, e_bar, w_bar):
    """Guaranteed scaled-spacing interval [a, b] for trajectories whose
    initial energies stay below (e_bar, w_bar).

    Requires the budget sqrt(w_bar) + sqrt(e_bar) to sit strictly below both
    envelope limits; raises AdmissibilityError naming the failing side
    otherwise.  At zero budget the interval degenerates to [L, L].
    """
    if e_bar < 0.0 or w_bar < 0.0:
        raise AdmissibilityError("energy budgets must be nonnegative")
    budget = float(np.sqrt(w_bar) + np.sqrt(e_bar))
    limit_high, limit_low = model.energy_envelope_limits()
    if budget >= limit_high:
        raise AdmissibilityError(
            f"budget {budget:g} >= high-density envelope limit {limit_high:g}",
            side="high")
    if budget >= limit_low:
        raise AdmissibilityError(
            f"budget {budget:g} >= vacuum-side envelope limit {limit_low:g}",
            side="low")
    rho_hi = model.energy_envelope_inverse(budget)
    rho_lo = model.energy_envelope_inverse(-budget)
    return model.m / rho_hi, model.m / rho_lo


def equilibrium_state(model: FluidModel, n: int) -> ParticleState:
    """Uniformly spaced, motionless chain (the unique rest point)."""
    i = np.arange(1, n)
    return ParticleState(n=n, t=0.0, x=model.length * (1.0 - i / n),
                         v=np.zeros(n - 1))
