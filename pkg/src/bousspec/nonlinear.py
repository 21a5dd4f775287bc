"""Advection terms u . grad(v), computed two independent ways.

``convect_pseudospectral`` is the production path: transform to
collocation space, multiply, transform back, with the 2/3-rule mask
applied to inputs and output so quadratic aliasing never reaches a
retained mode.

``convect_convolution`` is the oracle: the truncated convolution

    w_hat(k) = sum_{p+q=k, p and q resolved} i (q . u_hat(p)) v_hat(q)

summed directly, with no FFT and no mask.  It is exact on the retained
modes whenever the inputs are band-limited to half the grid, which is
what makes it a useful cross-check; it costs O(modes^2) and is guarded
to small grids.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .fields import (
    PhysicalParams,
    SpectralScalarField,
    SpectralVectorField,
    enforce_constraints,
    leray_project,
)
from .grid import GridSpec

__all__ = [
    "AliasingMode",
    "ConvectionResult",
    "convect_pseudospectral",
    "convect_state",
    "convect_convolution",
    "buoyancy",
    "CONVOLUTION_MODE_LIMIT",
]

CONVOLUTION_MODE_LIMIT = 4096


class AliasingMode(enum.Enum):
    DEALIASED_2_3 = "dealiased_2_3"
    NONE = "none"


@dataclass
class ConvectionResult:
    """Advection coefficients plus a tag saying how aliasing was handled."""

    field: SpectralVectorField | SpectralScalarField
    aliasing_mode: AliasingMode


def _check_grids(u, v, grid):
    if grid is not None and u.grid != grid:
        raise ValueError("u does not live on the supplied grid")
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    return u.grid


def _advect(grid, u_phys, comps_masked):
    """Batched u . grad on collocation points for stacked components."""
    n = grid.nmodes
    axes = tuple(range(-grid.dim, 0))
    # gradients of every component in one batched transform: (c, i, *shape)
    grads = 1j * grid.k[np.newaxis] * comps_masked[:, np.newaxis]
    grads_phys = np.fft.ifftn(grads, axes=axes).real * n
    w = (u_phys[np.newaxis] * grads_phys).sum(axis=1)
    return np.fft.fftn(w, axes=axes) / n * grid.dealias_mask


def _velocity_phys(u, grid):
    axes = tuple(range(-grid.dim, 0))
    return np.fft.ifftn(u.coeffs * grid.dealias_mask, axes=axes).real * grid.nmodes


def convect_pseudospectral(u: SpectralVectorField, v, grid: GridSpec = None):
    """Dealiased transform evaluation of u . grad(v).

    ``v`` may be a velocity or a scalar field.  Inputs are masked, the
    products are formed on the collocation grid, and the result is masked
    again and constraint-projected, so the output is a valid zero-mean
    field supported on the retained modes.
    """
    grid = _check_grids(u, v, grid)
    scalar = not isinstance(v, SpectralVectorField)
    comps = v.coeffs[np.newaxis] if scalar else v.coeffs
    out = _advect(grid, _velocity_phys(u, grid), comps * grid.dealias_mask)

    if scalar:
        field = enforce_constraints(SpectralScalarField(grid, out[0]))
    else:
        field = enforce_constraints(SpectralVectorField(grid, out))
    return ConvectionResult(field, AliasingMode.DEALIASED_2_3)


def convect_state(u: SpectralVectorField, theta: SpectralScalarField,
                  grid: GridSpec = None):
    """u . grad(u) and u . grad(theta) sharing one velocity transform.

    Equivalent to two ``convect_pseudospectral`` calls; used in the time
    stepper where the advecting velocity is the same for both terms.
    """
    grid = _check_grids(u, theta, grid)
    comps = np.concatenate([u.coeffs, theta.coeffs[np.newaxis]])
    out = _advect(grid, _velocity_phys(u, grid), comps * grid.dealias_mask)
    conv_u = enforce_constraints(SpectralVectorField(grid, out[: grid.dim]))
    conv_theta = enforce_constraints(SpectralScalarField(grid, out[grid.dim]))
    return (
        ConvectionResult(conv_u, AliasingMode.DEALIASED_2_3),
        ConvectionResult(conv_theta, AliasingMode.DEALIASED_2_3),
    )


def convect_convolution(u: SpectralVectorField, v, grid: GridSpec = None):
    """Direct truncated-convolution evaluation of u . grad(v).

    Sums i (q . u_hat(p)) v_hat(q) over all resolved pairs p + q = k,
    dropping pairs whose sum leaves the grid.  No transforms are used
    anywhere, which keeps this path independent of the pseudospectral
    one.  Guarded to modes**dim <= 4096.
    """
    grid = _check_grids(u, v, grid)
    if grid.nmodes > CONVOLUTION_MODE_LIMIT:
        raise ValueError(
            f"direct convolution is limited to {CONVOLUTION_MODE_LIMIT} "
            f"modes, grid has {grid.nmodes}"
        )
    m = grid.modes
    d = grid.dim
    half = m // 2
    # work in lexicographic layout over labels j = a - half, a = 0..m-1,
    # so p + q = k is plain index arithmetic
    lex = (np.arange(m) + half) % m
    ix = np.ix_(*([lex] * d))
    U = np.stack([u.coeffs[i][ix] for i in range(d)])
    scalar = not isinstance(v, SpectralVectorField)
    if scalar:
        V = (v.coeffs[ix],)
    else:
        V = tuple(v.coeffs[i][ix] for i in range(d))
    labels = np.arange(m) - half

    out = [np.zeros(grid.shape, dtype=complex) for _ in V]
    nz = np.argwhere(np.any(U != 0.0, axis=0))
    for ap in nz:
        up = U[(slice(None),) + tuple(ap)]
        ksl = []
        qsl = []
        for a in ap:
            lo = max(0, a - half)
            hi = min(m - 1, a + half - 1)
            ksl.append(slice(lo, hi + 1))
            qsl.append(slice(lo - a + half, hi - a + half + 1))
        ksl, qsl = tuple(ksl), tuple(qsl)
        qdot = np.zeros(tuple(s.stop - s.start for s in qsl), dtype=complex)
        for axis in range(d):
            shape = [1] * d
            shape[axis] = -1
            qdot += labels[qsl[axis]].reshape(shape) * up[axis]
        for c, vc in enumerate(V):
            out[c][ksl] += 1j * qdot * vc[qsl]

    def unlex(arr):
        res = np.zeros(grid.shape, dtype=complex)
        res[ix] = arr
        return res

    if scalar:
        field = enforce_constraints(SpectralScalarField(grid, unlex(out[0])))
    else:
        field = enforce_constraints(
            SpectralVectorField(grid, np.stack([unlex(a) for a in out]))
        )
    return ConvectionResult(field, AliasingMode.NONE)


def buoyancy(theta: SpectralScalarField, params: PhysicalParams):
    """Divergence-free part of theta e_N (gravity along the last axis).

    The gradient part of the forcing is absorbed by the pressure, so the
    velocity equation only ever sees the Leray projection of theta e_N.
    """
    grid = theta.grid
    out = SpectralVectorField(grid)
    out.coeffs[params.axis_index(grid)] = theta.coeffs
    return leray_project(out)
