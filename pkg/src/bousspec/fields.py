"""Spectral fields on the torus and the operators acting on them.

A scalar field theta and a velocity field u are represented by their full
complex coefficient arrays (shape ``grid.shape`` and ``grid.vshape``).
Valid states satisfy three constraints throughout:

* reality:        coeff(-j) == conj(coeff(j)) for every j,
* zero mean:      coeff(0) == 0,
* incompressible: j . u_hat(j) == 0 for every j (velocity only).

``enforce_constraints`` projects onto the first two, ``leray_project``
onto the third.  Norms follow the weighted-sum convention

    ||f||_{r,tau,s}^2 = (2*pi)^N * sum_j |j|^(2r) e^(2 tau |j|^(1/s)) |f_j|^2

so r = 0, tau = 0 is the plain L2 norm and r = 1 the H1 seminorm (the
Zygmund operator Lambda = sqrt(-Laplacian) acts as multiplication by |j|).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TWO_PI, GridSpec

__all__ = [
    "SpectralScalarField",
    "SpectralVectorField",
    "GevreyParams",
    "PhysicalParams",
    "NonFiniteStateError",
    "enforce_constraints",
    "leray_project",
    "apply_zygmund",
    "apply_gevrey",
    "norm",
    "divergence_max",
    "l2_inner",
    "hermitian_defect",
    "to_physical",
    "from_physical",
    "synthesize_initial",
    "INITIAL_KINDS",
]


class SpectralScalarField:
    """Scalar field given by its Fourier coefficients on ``grid``."""

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: GridSpec, coeffs=None):
        self.grid = grid
        if coeffs is None:
            coeffs = np.zeros(grid.shape, dtype=complex)
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != grid.shape:
                raise ValueError(
                    f"scalar coefficients must have shape {grid.shape}, "
                    f"got {coeffs.shape}"
                )
        self.coeffs = coeffs

    def copy(self):
        return SpectralScalarField(self.grid, self.coeffs.copy())


class SpectralVectorField:
    """Velocity field; component axis first, so ``coeffs[i]`` is u_i."""

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: GridSpec, coeffs=None):
        self.grid = grid
        if coeffs is None:
            coeffs = np.zeros(grid.vshape, dtype=complex)
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != grid.vshape:
                raise ValueError(
                    f"vector coefficients must have shape {grid.vshape}, "
                    f"got {coeffs.shape}"
                )
        self.coeffs = coeffs

    def copy(self):
        return SpectralVectorField(self.grid, self.coeffs.copy())


@dataclass(frozen=True)
class GevreyParams:
    """Weight parameters (r, tau, s) for the norms above.

    ``s = 1`` is the analytic class; ``tau`` is the radius of the strip of
    analyticity probed by the weight.
    """

    tau: float
    r: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosity, diffusivity and the axis gravity acts along.

    ``buoyancy_axis`` is 1-based; ``None`` means the last axis, i.e. the
    temperature forces the vertical velocity component.
    """

    nu: float
    kappa: float
    buoyancy_axis: int | None = None

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.buoyancy_axis is not None and self.buoyancy_axis < 1:
            raise ValueError(
                f"buoyancy_axis is 1-based, got {self.buoyancy_axis}"
            )

    def axis_index(self, grid: GridSpec):
        """0-based component index the buoyancy acts on."""
        axis = grid.dim if self.buoyancy_axis is None else self.buoyancy_axis
        if axis > grid.dim:
            raise ValueError(
                f"buoyancy_axis {axis} exceeds dimension {grid.dim}"
            )
        return axis - 1


class NonFiniteStateError(RuntimeError):
    """Raised when an evolving state stops being finite.

    Carries the time of the failed update and the last finite state so a
    caller can report or save it.
    """

    def __init__(self, t, last_state):
        super().__init__(f"state became nonfinite at t = {t:.6g}")
        self.t = t
        self.last_state = last_state


# ----------------------------------------------------------------------
# constraints


def _symmetrize(grid, arr):
    # (arr + conj(arr at -j)) / 2; commutative addition makes this
    # bit-for-bit idempotent
    return 0.5 * (arr + np.conj(arr[grid._conj_ix]))


def _enforce_arrays(grid, arr, vector):
    if vector:
        out = np.empty_like(arr)
        for i in range(grid.dim):
            out[i] = _symmetrize(grid, arr[i])
            out[i][grid.zero_index] = 0.0
    else:
        out = _symmetrize(grid, arr)
        out[grid.zero_index] = 0.0
    return out


def enforce_constraints(field):
    """Project onto zero-mean fields with the reality symmetry.

    Coefficients are replaced by (c_j + conj(c_{-j})) / 2 and the mean
    mode is zeroed.  Idempotent to the last bit.
    """
    vector = isinstance(field, SpectralVectorField)
    out = _enforce_arrays(field.grid, field.coeffs, vector)
    cls = SpectralVectorField if vector else SpectralScalarField
    return cls(field.grid, out)


def _leray_arrays(grid, arr):
    k2 = np.where(grid.k2 == 0, 1.0, grid.k2)
    dot = np.einsum("i...,i...->...", grid.k, arr)
    return arr - grid.k * (dot / k2)


def leray_project(u: SpectralVectorField):
    """Remove the gradient part: u_hat(j) -= (j . u_hat(j)) j / |j|^2.

    The zero mode passes through untouched (it is zero for valid states).
    Self-adjoint and idempotent.
    """
    return SpectralVectorField(u.grid, _leray_arrays(u.grid, u.coeffs))


def divergence_max(u: SpectralVectorField):
    """max_j |j . u_hat(j)|, the spectral divergence residual."""
    dot = np.einsum("i...,i...->...", u.grid.k, u.coeffs)
    return float(np.max(np.abs(dot)))


def hermitian_defect(field):
    """max_j |c_j - conj(c_{-j})|, zero for fields with the reality symmetry."""
    grid = field.grid
    arr = field.coeffs
    if isinstance(field, SpectralVectorField):
        defects = [
            np.max(np.abs(arr[i] - np.conj(arr[i][grid._conj_ix])))
            for i in range(grid.dim)
        ]
        return float(max(defects))
    return float(np.max(np.abs(arr - np.conj(arr[grid._conj_ix]))))


# ----------------------------------------------------------------------
# multiplier operators and norms


def apply_zygmund(field, r: float):
    """Multiply coefficients by |j|^r  (Lambda^r, Lambda = sqrt(-Laplacian)).

    The zero mode stays zero for r > 0; r = 0 returns the coefficients
    bit-for-bit.
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    grid = field.grid
    weight = grid.kmag**r  # 0**0 == 1, so r == 0 is the identity weight
    cls = type(field)
    return cls(grid, field.coeffs * weight)


def _gevrey_weight(grid, tau, s, double=False):
    if tau > grid.tau_cap:
        raise ValueError(
            f"tau={tau} exceeds tau_cap={grid.tau_cap:.6g} for this grid; "
            "the weight would overflow the spectrum range"
        )
    factor = 2.0 * tau if double else tau
    if s == 1.0:
        return np.exp(factor * grid.kmag)
    return np.exp(factor * grid.kmag ** (1.0 / s))


def apply_gevrey(field, gev: GevreyParams):
    """Multiply coefficients by exp(tau |j|^(1/s)); tau = 0 is the identity."""
    weight = _gevrey_weight(field.grid, gev.tau, gev.s)
    cls = type(field)
    return cls(field.grid, field.coeffs * weight)


def norm(field, r: float = 0.0, tau: float = 0.0, s: float = 1.0):
    """Weighted spectral norm; see the module docstring for the convention.

    r = 0, tau = 0 gives the L2 norm; r = 1 the H1 (Zygmund) seminorm;
    tau > 0 applies the Gevrey weight exp(tau |j|^(1/s)).
    Vector fields sum over components.
    """
    GevreyParams(tau=tau, r=r, s=s)  # validate ranges
    grid = field.grid
    weight = grid.kmag ** (2.0 * r)
    if tau != 0.0:
        weight = weight * _gevrey_weight(grid, tau, s, double=True)
    dens = np.abs(field.coeffs) ** 2
    if isinstance(field, SpectralVectorField):
        dens = dens.sum(axis=0)
    return float(np.sqrt(TWO_PI**grid.dim * np.sum(weight * dens)))


def l2_inner(f, g):
    """L2 inner product (2*pi)^N sum_j f_j conj(g_j); complex in general."""
    if f.grid != g.grid:
        raise ValueError("inner product requires matching grids")
    prod = f.coeffs * np.conj(g.coeffs)
    if isinstance(f, SpectralVectorField):
        prod = prod.sum(axis=0)
    return complex(TWO_PI**f.grid.dim * np.sum(prod))


# ----------------------------------------------------------------------
# physical-space transforms

# forward transforms carry 1/M^N so that coefficients are the plain
# Fourier series coefficients of the field


def to_physical(field):
    """Collocation values on the M^N grid (real part; imaginary ~ roundoff)."""
    grid = field.grid
    if isinstance(field, SpectralVectorField):
        return np.stack(
            [np.fft.ifftn(field.coeffs[i]).real * grid.nmodes
             for i in range(grid.dim)]
        )
    return np.fft.ifftn(field.coeffs).real * grid.nmodes


def from_physical(grid: GridSpec, values):
    """Coefficients of real collocation values; inverse of :func:`to_physical`."""
    values = np.asarray(values, dtype=float)
    if values.shape == grid.vshape:
        coeffs = np.stack(
            [np.fft.fftn(values[i]) / grid.nmodes for i in range(grid.dim)]
        )
        return SpectralVectorField(grid, coeffs)
    if values.shape == grid.shape:
        return SpectralScalarField(grid, np.fft.fftn(values) / grid.nmodes)
    raise ValueError(
        f"values must have shape {grid.shape} or {grid.vshape}, "
        f"got {values.shape}"
    )


# ----------------------------------------------------------------------
# initial data

INITIAL_KINDS = ("taylor_green", "single_mode_theta", "rough_h1", "zero")


def _default_sobolev_exponent(dim):
    return 2.6 if dim == 2 else 3.1


def _taylor_green(grid):
    if grid.dim != 2:
        raise ValueError("taylor_green initial data is two-dimensional")
    u = SpectralVectorField(grid)
    # u = (cos x1 sin x2, -sin x1 cos x2): four modes per component,
    # u1_hat(j) = -i j2 / 4 and u2_hat(j) = i j1 / 4 on j in {-1, 1}^2
    for j1 in (1, -1):
        for j2 in (1, -1):
            idx = (j1 % grid.modes, j2 % grid.modes)
            u.coeffs[0][idx] = -0.25j * j2
            u.coeffs[1][idx] = 0.25j * j1
    theta = SpectralScalarField(grid)
    return u, theta


def _single_mode_theta(grid):
    u = SpectralVectorField(grid)
    theta = SpectralScalarField(grid)
    idx_plus = [0] * grid.dim
    idx_plus[-1] = 1
    idx_minus = [0] * grid.dim
    idx_minus[-1] = grid.modes - 1
    theta.coeffs[tuple(idx_plus)] = 0.5
    theta.coeffs[tuple(idx_minus)] = 0.5
    return u, theta


def _rough_h1(grid, seed, p):
    if p is None:
        p = _default_sobolev_exponent(grid.dim)
    if p <= grid.dim / 2 + 1:
        raise ValueError(
            f"sobolev_exponent must exceed dim/2 + 1 = {grid.dim / 2 + 1}, "
            f"got {p}; shallower spectra have no H1 limit"
        )
    rng = np.random.default_rng(seed)
    amp = (1.0 + grid.kmag) ** (-p)
    # Nyquist slots are their own reflection partners, so they cannot
    # carry the reality symmetry through the Leray projection; leave them
    # empty (the dealiasing mask removes them from the dynamics anyway)
    for axis in range(grid.dim):
        amp = amp * (np.abs(grid.k[axis]) != grid.modes // 2)

    def draw():
        phases = rng.uniform(0.0, TWO_PI, size=grid.shape)
        return amp * np.exp(1j * phases)

    u = SpectralVectorField(
        grid, np.stack([draw() for _ in range(grid.dim)])
    )
    theta = SpectralScalarField(grid, draw())
    u = leray_project(enforce_constraints(u))
    theta = enforce_constraints(theta)
    return u, theta


def synthesize_initial(kind, grid, seed=0, sobolev_exponent=None):
    """Build an initial state (u, theta).

    Kinds
    -----
    ``taylor_green``
        u = (cos x1 sin x2, -sin x1 cos x2), theta = 0 (2D only).
    ``single_mode_theta``
        u = 0, theta = cos x_N (last coordinate).
    ``rough_h1``
        |coeff(j)| = (1 + |j|)^(-p) with phases drawn from ``seed``;
        p defaults to 2.6 in 2D and 3.1 in 3D and must exceed dim/2 + 1.
        Constraints and the Leray projection are applied afterwards, so
        the realized moduli sit at or below the target law.
    ``zero``
        Both fields identically zero.

    Repeated calls with the same arguments are bit-identical.
    """
    if kind == "taylor_green":
        return _taylor_green(grid)
    if kind == "single_mode_theta":
        return _single_mode_theta(grid)
    if kind == "rough_h1":
        return _rough_h1(grid, seed, sobolev_exponent)
    if kind == "zero":
        return SpectralVectorField(grid), SpectralScalarField(grid)
    raise ValueError(
        f"unknown initial kind {kind!r}; expected one of {INITIAL_KINDS}"
    )
