"""Quantities a run is judged by: energy budgets, Gevrey energy, radius fits.

The solver never needs any of this to advance in time; everything here is
a read-only analysis of states.  Three families:

* energy budgets — signed residuals of the exact balances
      d/dt ||theta||^2 / 2 = -kappa ||grad theta||^2
      d/dt ||u||^2     / 2 = -nu    ||grad u||^2 + (theta e_N, u)
  integrated by the trapezoidal rule over whatever cadence the states
  were sampled at, so the residual carries an O(h^2) quadrature error on
  top of the integrator error;

* Gevrey energy X(t) = 1 + ||L e^{tau L} u||^2 + ||L e^{tau L} theta||^2
  with tau = min(t, tau_cap), the quantity whose boundedness expresses
  that the flow has become analytic with radius at least tau;

* radius fits — a least-squares estimate of the decay rate tau in the
  coefficient envelope |u_j| ~ e^{-tau |j|^{1/s}}, the measurable trace
  of that analyticity on a finite grid.

Pressure is reconstructed here on demand (it is eliminated from the
evolution by the Leray projection): solve the Poisson equation
Laplacian p = -div(u . grad u) + div(theta e_N) mode by mode.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as _dc_fields

import numpy as np

from .fields import (
    PhysicalParams,
    SpectralScalarField,
    SpectralVectorField,
    divergence_max,
    leray_project,
    norm,
)
from .grid import TWO_PI, GridSpec
from .nonlinear import convect_pseudospectral

__all__ = [
    "DiagnosticsRecord",
    "RadiusFit",
    "BudgetAccumulator",
    "EnergyBudget",
    "energy_budget",
    "gevrey_energy",
    "shell_envelope",
    "fit_radius",
    "recover_pressure",
    "helmholtz_check",
    "build_record",
]

# shells whose peak coefficient sits below this fraction of the global
# peak are double-precision noise and are excluded from radius fits
AMPLITUDE_FLOOR_RATIO = 1e-14
MIN_FIT_SHELLS = 4


@dataclass
class DiagnosticsRecord:
    """One row of run diagnostics at time ``t``.

    ``h1_u``/``h1_theta`` are the Zygmund seminorms ||Lambda . ||;
    ``gevrey_X`` is X(t) at ``tau_used = min(t, tau_cap)``; the radius
    fields come from ``fit_radius`` on the velocity spectrum and are
    reported as 0.0/0.0 when the spectrum has too few usable shells to
    fit; the energy residuals accumulate trapezoidally over the cadence
    the records were produced at.
    """

    t: float
    l2_u: float
    l2_theta: float
    h1_u: float
    h1_theta: float
    gevrey_X: float
    tau_used: float
    radius_fit: float
    radius_fit_quality: float
    energy_residual_theta: float
    energy_residual_u: float
    div_max: float

    @classmethod
    def field_names(cls):
        return [f.name for f in _dc_fields(cls)]

    def as_tuple(self):
        return tuple(getattr(self, name) for name in self.field_names())


@dataclass
class RadiusFit:
    """Least-squares envelope fit log|u_j| ~ intercept - tau_est |j|^{1/s}.

    ``shells_used`` is the integer range from the innermost to the
    outermost shell that passed the amplitude floor; ``quality`` is the
    coefficient of determination of the fit (1.0 for a flat spectrum,
    where the zero-variance fit is exact).
    """

    tau_est: float
    intercept: float
    shells_used: range
    quality: float


def _envelope_amplitudes(field):
    """Per-mode amplitude array: |coeffs|, or the vector magnitude."""
    if isinstance(field, SpectralVectorField):
        return np.sqrt(np.sum(np.abs(field.coeffs) ** 2, axis=0))
    return np.abs(field.coeffs)


def shell_envelope(field):
    """Peak amplitude per integer-radius shell [n - 1/2, n + 1/2) on |j|.

    Returns (peak, peak_kmag): the loudest amplitude in each shell and
    the |j| where it sits.  Shell 0 holds only the (zero) mean mode.
    """
    grid = field.grid
    amp = _envelope_amplitudes(field)
    shell = np.floor(grid.kmag + 0.5).astype(int)

    n_shells = int(shell.max()) + 1
    peak = np.zeros(n_shells)
    peak_kmag = np.zeros(n_shells)
    flat_shell = shell.ravel()
    flat_amp = amp.ravel()
    flat_kmag = grid.kmag.ravel()
    # loudest mode per shell, remembering where it sits on the |j| axis
    order = np.lexsort((flat_amp, flat_shell))
    np.maximum.at(peak, flat_shell, flat_amp)
    last_of_shell = np.flatnonzero(np.diff(flat_shell[order], append=-1))
    peak_kmag[flat_shell[order][last_of_shell]] = flat_kmag[order][last_of_shell]
    return peak, peak_kmag


def fit_radius(field, s: float = 1.0):
    """Estimate the analyticity radius from the coefficient envelope.

    Each shell contributes its loudest mode (the envelope — the Gevrey
    class constrains peaks, not means) at that mode's own |j|.  A line
    through (|j|^{1/s}, log amplitude) gives tau_est = -slope, clamped
    at zero.  Returns None when fewer than 4 shells rise above the
    amplitude floor: too little spectrum to call it a fit.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    peak, peak_kmag = shell_envelope(field)

    floor = AMPLITUDE_FLOOR_RATIO * peak.max()
    usable = np.flatnonzero(peak > max(floor, 0.0))
    usable = usable[usable > 0]  # shell 0 is the (zero) mean mode
    if len(usable) < MIN_FIT_SHELLS:
        return None

    x = peak_kmag[usable] ** (1.0 / s)
    y = np.log(peak[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = y - y.mean()
    ss_tot = float(np.dot(total, total))
    quality = 1.0 if ss_tot == 0.0 else 1.0 - float(np.dot(resid, resid)) / ss_tot
    return RadiusFit(
        tau_est=max(0.0, -float(slope)),
        intercept=float(intercept),
        shells_used=range(int(usable[0]), int(usable[-1]) + 1),
        quality=quality,
    )


def gevrey_energy(state, tau_schedule=None):
    """X(t) = 1 + ||L e^{tau L} u||^2 + ||L e^{tau L} theta||^2.

    ``tau_schedule`` maps t to the weight tau; the default is
    min(t, tau_cap), the linear-in-time radius the smoothing theory
    predicts, capped where the weight would amplify roundoff past the
    top grid mode.
    """
    grid = state.u.grid
    if tau_schedule is None:
        tau = min(state.t, grid.tau_cap)
    else:
        tau = min(tau_schedule(state.t), grid.tau_cap)
    return (
        1.0
        + norm(state.u, r=1.0, tau=tau) ** 2
        + norm(state.theta, r=1.0, tau=tau) ** 2
    )


# ----------------------------------------------------------------------
# energy budgets


def _dissipations(u, theta, params):
    """(||grad u||^2, ||grad theta||^2, (theta e_N, u)) at one instant."""
    g_u = norm(u, r=1.0) ** 2
    g_theta = norm(theta, r=1.0) ** 2
    axis = params.axis_index(u.grid)
    cross = float(
        TWO_PI**u.grid.dim
        * np.sum(theta.coeffs * np.conj(u.coeffs[axis])).real
    )
    return g_u, g_theta, cross


class BudgetAccumulator:
    """Running trapezoidal energy budget along a trajectory.

    Feed it states in time order; each ``update`` returns the signed
    residuals

        res_theta = ||theta(t)||^2 + 2 kappa I[||grad theta||^2] - ||theta_0||^2
        res_u     = ||u(t)||^2 + 2 nu I[||grad u||^2] - ||u_0||^2
                    - 2 I[(theta e_N, u)]

    where I[.] is the trapezoidal integral over the fed-in times.  Both
    vanish for the exact flow; numerically they hold the integrator and
    quadrature error, so their size depends on the sampling cadence.
    """

    def __init__(self, params: PhysicalParams):
        self.params = params
        self._prev = None
        self._e0_u = 0.0
        self._e0_theta = 0.0
        self._int_u = 0.0
        self._int_theta = 0.0
        self._int_cross = 0.0

    def update(self, u, theta, t):
        e_u = norm(u) ** 2
        e_theta = norm(theta) ** 2
        diss = _dissipations(u, theta, self.params)
        if self._prev is None:
            self._e0_u = e_u
            self._e0_theta = e_theta
        else:
            t_prev, diss_prev = self._prev
            h = 0.5 * (t - t_prev)
            self._int_u += h * (diss_prev[0] + diss[0])
            self._int_theta += h * (diss_prev[1] + diss[1])
            self._int_cross += h * (diss_prev[2] + diss[2])
        self._prev = (t, diss)
        res_theta = e_theta + 2 * self.params.kappa * self._int_theta - self._e0_theta
        res_u = (
            e_u
            + 2 * self.params.nu * self._int_u
            - self._e0_u
            - 2 * self._int_cross
        )
        return res_theta, res_u


@dataclass
class EnergyBudget:
    """Budget residuals at each sampled time, plus the initial energies."""

    t: np.ndarray
    residual_theta: np.ndarray
    residual_u: np.ndarray
    e0_theta: float
    e0_u: float


def energy_budget(states, params: PhysicalParams):
    """Trapezoidal budget residuals over a sampled trajectory.

    ``states`` is a time-ordered sequence with ``u``, ``theta``, ``t``
    attributes (at least two of them).
    """
    states = list(states)
    if len(states) < 2:
        raise ValueError(
            f"energy budget needs at least 2 states, got {len(states)}"
        )
    acc = BudgetAccumulator(params)
    times = np.array([s.t for s in states])
    res = np.array([acc.update(s.u, s.theta, s.t) for s in states])
    return EnergyBudget(
        t=times,
        residual_theta=res[:, 0],
        residual_u=res[:, 1],
        e0_theta=acc._e0_theta,
        e0_u=acc._e0_u,
    )


# ----------------------------------------------------------------------
# pressure


def recover_pressure(u: SpectralVectorField, theta: SpectralScalarField,
                     grid: GridSpec | None = None,
                     buoyancy_axis: int | None = None):
    """Pressure from the Poisson equation the divergence constraint implies.

    p_hat(j) = [i j . conv_hat(j) - i j_N theta_hat(j)] / |j|^2 for
    j != 0 and p_hat(0) = 0 (zero-mean normalization), where conv is the
    dealiased u . grad u.
    """
    if grid is None:
        grid = u.grid
    if u.grid is not grid or theta.grid is not grid:
        raise ValueError("u and theta must live on the supplied grid")
    axis = (grid.dim if buoyancy_axis is None else buoyancy_axis) - 1
    conv = convect_pseudospectral(u, u, grid).field
    jdot = np.sum(grid.k * conv.coeffs, axis=0)
    rhs = 1j * jdot - 1j * grid.k[axis] * theta.coeffs
    k2 = np.where(grid.k2 == 0, 1, grid.k2)
    p = SpectralScalarField(grid, rhs / k2)
    p.coeffs[grid.zero_index] = 0.0
    return p


def helmholtz_check(u: SpectralVectorField, theta: SpectralScalarField,
                    grid: GridSpec | None = None,
                    buoyancy_axis: int | None = None):
    """Max-mode residual of the Helmholtz split of the momentum forcing.

    With w = u . grad u - theta e_N and p from ``recover_pressure``, the
    gradient part of w is exactly -grad p, so (I - P) w + grad p must
    vanish; the return value is the largest coefficient magnitude of
    that combination.
    """
    if grid is None:
        grid = u.grid
    axis = (grid.dim if buoyancy_axis is None else buoyancy_axis) - 1
    conv = convect_pseudospectral(u, u, grid).field
    w = conv.coeffs.copy()
    w[axis] -= theta.coeffs
    w_field = SpectralVectorField(grid, w)
    gradient_part = w - leray_project(w_field).coeffs
    p = recover_pressure(u, theta, grid, buoyancy_axis)
    residual = gradient_part + 1j * grid.k * p.coeffs
    return float(np.max(np.sqrt(np.sum(np.abs(residual) ** 2, axis=0))))


# ----------------------------------------------------------------------
# per-state record assembly


def build_record(state, params: PhysicalParams,
                 budget: BudgetAccumulator | None = None):
    """DiagnosticsRecord for one state (anything with u, theta, t).

    Feeds ``budget`` when given, so calling this once per step on a
    shared accumulator yields per-step energy residuals.
    """
    u, theta, t = state.u, state.theta, state.t
    grid = u.grid
    res_theta, res_u = (0.0, 0.0) if budget is None else budget.update(u, theta, t)
    tau = min(t, grid.tau_cap)
    fit = fit_radius(u)
    return DiagnosticsRecord(
        t=t,
        l2_u=norm(u),
        l2_theta=norm(theta),
        h1_u=norm(u, r=1.0),
        h1_theta=norm(theta, r=1.0),
        gevrey_X=gevrey_energy(state),
        tau_used=tau,
        radius_fit=0.0 if fit is None else fit.tau_est,
        radius_fit_quality=0.0 if fit is None else fit.quality,
        energy_residual_theta=res_theta,
        energy_residual_u=res_u,
        div_max=divergence_max(u),
    )
