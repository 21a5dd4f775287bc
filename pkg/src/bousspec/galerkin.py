"""Low-mode Galerkin ODE oracle for cross-validating the spectral solver.

The velocity space is spanned by real, orthonormal, divergence-free
eigenfunctions of the Stokes operator,

    E = a * d * cos(k . x)   and   a * d * sin(k . x),

one conjugate pair of wavevectors {k, -k} at a time, with d a unit vector
tangent to k (one choice in 2D, two in 3D) and a = sqrt(2 / (2 pi)^N).
Temperature uses the scalar analogues a * cos(n . x), a * sin(n . x).
Expanding u = sum xi_j E_j, theta = sum eta_a e_a turns the PDE into

    dxi_j/dt  + nu  lam_j xi_j  + sum A[k,l,j] xi_k xi_l = sum C[g,j] eta_g
    deta_a/dt + kap tau_a eta_a + sum B[j,b,a] xi_j eta_b = 0

with interaction tensors assembled analytically: each basis element has
exactly two Fourier modes, so the triple products reduce to a handful of
wavevector-cancellation terms and no quadrature is involved.  Advection
only reshuffles energy, which shows up here as exact antisymmetry of A
and B in their last two slots.

When the basis covers exactly the dealias-retained modes of a grid, this
ODE system is the same dynamical system the dealiased pseudospectral
solver integrates, so trajectories must agree to integrator accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    NonFiniteStateError,
    PhysicalParams,
    SpectralScalarField,
    SpectralVectorField,
)
from .grid import TWO_PI, GridSpec

__all__ = [
    "BasisElement",
    "GalerkinSystem",
    "GalerkinState",
    "GalerkinTrajectory",
    "NonFiniteStateError",
    "build_basis",
    "basis_field",
    "assemble_tensors",
    "galerkin_rhs",
    "integrate_galerkin",
    "project_state",
    "reconstruct",
]


@dataclass(frozen=True)
class BasisElement:
    """One real basis function.

    ``wavevector`` is the canonical representative of the conjugate pair
    (first nonzero component positive); ``parity`` is "cos" or "sin".
    Velocity elements carry the unit tangent ``direction`` and the
    1-based index ``direction_index`` of the coordinate axis whose
    tangential projection generated it; scalar elements carry neither.
    ``amplitude`` normalizes the element to unit L2 norm.
    """

    wavevector: tuple
    parity: str
    amplitude: float
    direction: tuple | None = None
    direction_index: int = 0

    @property
    def eigenvalue(self):
        """|k|^2, the (minus-Laplacian) eigenvalue of the element."""
        return float(sum(c * c for c in self.wavevector))

    def plus_mode(self):
        """Complex coefficient vector (or scalar) at +wavevector."""
        factor = 0.5 if self.parity == "cos" else -0.5j
        if self.direction is None:
            return self.amplitude * factor
        return self.amplitude * factor * np.asarray(self.direction)


def _canonical(k):
    """Representative of {k, -k} with the first nonzero component positive."""
    for c in k:
        if c > 0:
            return tuple(int(v) for v in k)
        if c < 0:
            return tuple(int(-v) for v in k)
    raise ValueError("zero wavevector has no canonical representative")


def _pair_representatives(grid):
    """Canonical wavevectors inside the dealias mask, sorted by (|k|^2, lex)."""
    wv = grid.wavevectors()
    reps = set()
    c = grid.dealias_cutoff
    for row in wv:
        if np.all(row == 0) or np.any(np.abs(row) > c):
            continue
        reps.add(_canonical(row))
    return sorted(reps, key=lambda k: (sum(c * c for c in k), k))


def _tangent_directions(k):
    """Orthonormal tangents to k from Gram-Schmidt over projected axes.

    Projecting the coordinate vectors e_l onto the plane orthogonal to k
    in ascending l and orthonormalizing yields dim-1 unit tangents; the
    returned list pairs each with the 1-based l that produced it.
    """
    k = np.asarray(k, dtype=float)
    k2 = np.dot(k, k)
    dirs = []
    for ell in range(len(k)):
        v = np.zeros(len(k))
        v[ell] = 1.0
        v -= (k[ell] / k2) * k
        for _, d in dirs:
            v -= np.dot(v, d) * d
        nrm = np.linalg.norm(v)
        if nrm > 1e-12:
            dirs.append((ell + 1, v / nrm))
    return dirs


def build_basis(grid: GridSpec, m: int | None = None):
    """Velocity and scalar bases of ``m`` elements each.

    Elements are ordered by nondecreasing |k|, then lexicographically in
    the canonical wavevector, then by ascending tangent index (velocity),
    with cos before sin.  ``m = None`` keeps every element the dealias
    mask admits, which is the truncation matching the spectral solver.
    """
    amp = float(np.sqrt(2.0 / TWO_PI**grid.dim))
    vel = []
    scal = []
    for k in _pair_representatives(grid):
        for ell, d in _tangent_directions(k):
            for parity in ("cos", "sin"):
                vel.append(
                    BasisElement(
                        wavevector=k,
                        parity=parity,
                        amplitude=amp,
                        direction=tuple(d),
                        direction_index=ell,
                    )
                )
        for parity in ("cos", "sin"):
            scal.append(BasisElement(wavevector=k, parity=parity, amplitude=amp))
    if m is not None:
        if m > len(vel) or m > len(scal):
            raise ValueError(
                f"m = {m} exceeds the admissible basis size "
                f"({len(vel)} velocity, {len(scal)} scalar elements)"
            )
        vel = vel[:m]
        scal = scal[:m]
    return vel, scal


def basis_field(element: BasisElement, grid: GridSpec):
    """Spectral field of a basis element (two conjugate modes)."""
    k = element.wavevector
    plus = element.plus_mode()
    idx_p = tuple(c % grid.modes for c in k)
    idx_m = tuple(-c % grid.modes for c in k)
    if element.direction is None:
        f = SpectralScalarField(grid)
        f.coeffs[idx_p] = plus
        f.coeffs[idx_m] = np.conj(plus)
        return f
    f = SpectralVectorField(grid)
    for i in range(grid.dim):
        f.coeffs[i][idx_p] = plus[i]
        f.coeffs[i][idx_m] = np.conj(plus[i])
    return f


@dataclass
class GalerkinSystem:
    """Assembled tensors and eigenvalues for one truncation level."""

    grid: GridSpec
    vel_basis: list
    scalar_basis: list
    A: np.ndarray  # (m, m, m): (E_k . grad E_l, E_j)
    B: np.ndarray  # (m, ms, ms): (E_j . grad e_b, e_a)
    C: np.ndarray  # (ms, m): (e_g e_N, E_j)
    lam: np.ndarray
    tau_eig: np.ndarray

    @property
    def m(self):
        return len(self.vel_basis)


def _element_modes(element):
    plus = element.plus_mode()
    k = np.asarray(element.wavevector)
    return [(k, np.atleast_1d(plus)), (-k, np.conj(np.atleast_1d(plus)))]


def assemble_tensors(vel_basis, scalar_basis, grid: GridSpec,
                     buoyancy_axis: int | None = None):
    """Interaction tensors by analytic mode matching.

    The inner product of three exponentials vanishes unless the
    wavevectors cancel, so each tensor entry is a short sum over the
    (at most eight) mode triples with p + q + r = 0.
    """
    axis = (grid.dim if buoyancy_axis is None else buoyancy_axis) - 1
    vol = TWO_PI**grid.dim
    m = len(vel_basis)
    ms = len(scalar_basis)

    vmodes = [_element_modes(e) for e in vel_basis]
    smodes = [_element_modes(e) for e in scalar_basis]

    def index_by_wavevector(basis):
        table = {}
        for i, e in enumerate(basis):
            table.setdefault(e.wavevector, []).append(i)
        return table

    vtable = index_by_wavevector(vel_basis)
    stable = index_by_wavevector(scalar_basis)

    def receivers(s, table, modes):
        """Elements with a mode at r = -s, with that mode's coefficients."""
        if not np.any(s):
            return
        canon = _canonical(s)
        for c in table.get(canon, ()):
            for r, w in modes[c]:
                if np.array_equal(r, -s):
                    yield c, w

    A = np.zeros((m, m, m))
    B = np.zeros((m, ms, ms))
    for a in range(m):
        for p, wa in vmodes[a]:
            for b in range(m):
                for q, wb in vmodes[b]:
                    adv = 1j * np.dot(wa, q.astype(float))
                    s = p + q
                    for c, wc in receivers(s, vtable, vmodes):
                        A[a, b, c] += vol * (adv * np.dot(wb, wc)).real
            for b in range(ms):
                for q, wb in smodes[b]:
                    adv = 1j * np.dot(wa, q.astype(float))
                    s = p + q
                    for c, wc in receivers(s, stable, smodes):
                        B[a, b, c] += vol * (adv * wb[0] * wc[0]).real

    C = np.zeros((ms, m))
    for gidx in range(ms):
        for p, wg in smodes[gidx]:
            for c, wc in receivers(p, vtable, vmodes):
                C[gidx, c] += vol * (wg[0] * wc[axis]).real

    lam = np.array([e.eigenvalue for e in vel_basis])
    tau_eig = np.array([e.eigenvalue for e in scalar_basis])
    return GalerkinSystem(
        grid=grid,
        vel_basis=list(vel_basis),
        scalar_basis=list(scalar_basis),
        A=A,
        B=B,
        C=C,
        lam=lam,
        tau_eig=tau_eig,
    )


@dataclass
class GalerkinState:
    xi: np.ndarray
    eta: np.ndarray
    t: float = 0.0

    def copy(self):
        return GalerkinState(self.xi.copy(), self.eta.copy(), self.t)


def galerkin_rhs(state: GalerkinState, system: GalerkinSystem,
                 params: PhysicalParams):
    """Right-hand sides (dxi/dt, deta/dt) of the truncated system."""
    xi, eta = state.xi, state.eta
    dxi = (
        -params.nu * system.lam * xi
        - np.einsum("abc,a,b->c", system.A, xi, xi)
        + np.einsum("gc,g->c", system.C, eta)
    )
    deta = (
        -params.kappa * system.tau_eig * eta
        - np.einsum("abc,a,b->c", system.B, xi, eta)
    )
    return dxi, deta


@dataclass
class GalerkinTrajectory:
    """States sampled every step plus per-step energy-identity residuals.

    ``xi_residuals[n]`` measures how far step n strays from the exact
    kinetic-energy balance d/dt(|xi|^2/2) = -nu sum lam xi^2 + xi.C.eta
    (Simpson quadrature of the power along the step); ``eta_residuals``
    is the temperature analogue.  Both shrink like dt^5 per step for the
    RK4 integrator.
    """

    states: list
    xi_residuals: np.ndarray
    eta_residuals: np.ndarray


def _rk4_step(state, system, params, dt):
    def add(s, dxi, deta, h):
        return GalerkinState(s.xi + h * dxi, s.eta + h * deta, s.t)

    k1 = galerkin_rhs(state, system, params)
    k2 = galerkin_rhs(add(state, *k1, dt / 2), system, params)
    k3 = galerkin_rhs(add(state, *k2, dt / 2), system, params)
    k4 = galerkin_rhs(add(state, *k3, dt), system, params)
    xi = state.xi + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    eta = state.eta + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return GalerkinState(xi, eta, state.t + dt)


def _powers(state, system, params):
    xi, eta = state.xi, state.eta
    p_xi = (
        -params.nu * np.sum(system.lam * xi**2)
        + np.einsum("gc,g,c->", system.C, eta, xi)
    )
    p_eta = -params.kappa * np.sum(system.tau_eig * eta**2)
    return p_xi, p_eta


def integrate_galerkin(system: GalerkinSystem, initial: GalerkinState,
                       T: float, dt: float, params: PhysicalParams):
    """Fixed-step RK4 integration to time T, sampling every step."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if T < dt:
        raise ValueError(f"T must be at least dt, got T={T}, dt={dt}")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * dt:
        n_steps = int(T / dt)

    states = [initial.copy()]
    xi_res = np.zeros(n_steps)
    eta_res = np.zeros(n_steps)
    state = initial.copy()
    for n in range(n_steps):
        mid = _rk4_step(state, system, params, dt / 2)
        new = _rk4_step(state, system, params, dt)
        if not (np.all(np.isfinite(new.xi)) and np.all(np.isfinite(new.eta))):
            raise NonFiniteStateError(new.t, state)
        p0 = _powers(state, system, params)
        pm = _powers(mid, system, params)
        p1 = _powers(new, system, params)
        simpson = [dt / 6 * (p0[i] + 4 * pm[i] + p1[i]) for i in (0, 1)]
        xi_res[n] = 0.5 * (np.sum(new.xi**2) - np.sum(state.xi**2)) - simpson[0]
        eta_res[n] = 0.5 * (np.sum(new.eta**2) - np.sum(state.eta**2)) - simpson[1]
        state = new
        states.append(state.copy())
    return GalerkinTrajectory(states, xi_res, eta_res)


def project_state(u: SpectralVectorField, theta: SpectralScalarField,
                  system: GalerkinSystem, t: float = 0.0):
    """Coordinates (xi, eta) of (u, theta) in the basis."""
    vol = TWO_PI**system.grid.dim
    modes = system.grid.modes

    def coord(coeffs, element, vector):
        total = 0.0j
        for k, w in _element_modes(element):
            idx = tuple(c % modes for c in k)
            if vector:
                total += np.dot(coeffs[(slice(None),) + idx], np.conj(w))
            else:
                total += coeffs[idx] * np.conj(w[0])
        return vol * total.real

    xi = np.array([coord(u.coeffs, e, True) for e in system.vel_basis])
    eta = np.array([coord(theta.coeffs, e, False) for e in system.scalar_basis])
    return GalerkinState(xi, eta, t)


def reconstruct(state: GalerkinState, system: GalerkinSystem):
    """Spectral fields u = sum xi_j E_j, theta = sum eta_a e_a."""
    grid = system.grid
    u = SpectralVectorField(grid)
    theta = SpectralScalarField(grid)
    for j, e in enumerate(system.vel_basis):
        for k, w in _element_modes(e):
            idx = tuple(c % grid.modes for c in k)
            for i in range(grid.dim):
                u.coeffs[i][idx] += state.xi[j] * w[i]
    for a, e in enumerate(system.scalar_basis):
        for k, w in _element_modes(e):
            idx = tuple(c % grid.modes for c in k)
            theta.coeffs[idx] += state.eta[a] * w[0]
    return u, theta
