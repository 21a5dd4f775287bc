"""Spectral grid bookkeeping for periodic boxes [0, 2*pi]^N, N = 2 or 3.

Fields are stored as full M^N arrays of Fourier coefficients in the
standard FFT layout (integer frequencies 0, 1, ..., M/2-1, -M/2, ..., -1
along every axis).  The grid object precomputes everything the operators
need: integer wavevector meshes, |j|^2, the 2/3-rule dealiasing mask, the
index maps used to conjugate-reflect coefficients and to serialize them in
a fixed lexicographic mode order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["GridSpec", "make_grid", "TWO_PI"]

TWO_PI = 2.0 * np.pi

# exp(27.6) ~ 9.7e11, so Gevrey weights stay below 1e12 whenever
# tau <= 27.6 / k_max.  Larger tau would let the weighted norms overflow
# long before they say anything meaningful about the spectrum.
_TAU_CAP_EXPONENT = 27.6


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Fourier grid for [0, 2*pi]^dim with ``modes`` points per axis.

    Parameters
    ----------
    dim : int
        Spatial dimension, 2 or 3.
    modes : int
        Number of grid points (and retained integer frequencies) per
        axis.  Must be even and at least 4; the resolved wavenumbers per
        axis are -modes/2+1 .. modes/2, with the Nyquist slot shared by
        +modes/2 and -modes/2.
    dealias_fraction : fractions.Fraction
        Fraction of the Nyquist wavenumber kept by the dealiasing mask.
        The mask keeps |j_i| <= floor(dealias_fraction * modes/2) per
        axis; the default 2/3 makes quadratic products exact on the
        retained modes.  Kept as an exact rational so the cutoff never
        suffers float rounding.

    Derived attributes
    ------------------
    freq1d : (modes,) int array of per-axis frequencies in FFT layout.
    k : (dim, modes, ..., modes) float array, integer wavevector mesh.
    k2 : |j|^2 mesh;  kmag : |j| mesh.
    dealias_cutoff : int, per-axis bound of the mask.
    dealias_mask : boolean mesh, True on retained modes.
    nmodes : total number of wavevectors, modes**dim.
    tau_cap : largest Gevrey radius representable without overflow.
    """

    dim: int
    modes: int
    dealias_fraction: Fraction = Fraction(2, 3)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.modes < 4 or self.modes % 2 != 0:
            raise ValueError(f"modes must be even and >= 4, got {self.modes}")
        frac = Fraction(self.dealias_fraction)
        if not 0 < frac <= 1:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {frac}")
        object.__setattr__(self, "dealias_fraction", frac)

        m = self.modes
        freq1d = np.fft.fftfreq(m, d=1.0 / m).astype(np.int64)
        shape = (m,) * self.dim
        k = np.zeros((self.dim,) + shape)
        for axis in range(self.dim):
            ax_shape = [1] * self.dim
            ax_shape[axis] = m
            k[axis] = freq1d.reshape(ax_shape)
        k2 = np.sum(k * k, axis=0)

        # exact integer arithmetic: int() truncates the positive rational
        cutoff = int(frac * (m // 2))
        mask = np.ones(shape, dtype=bool)
        for axis in range(self.dim):
            mask &= np.abs(k[axis]) <= cutoff

        # index map i -> (-i) mod m implements j -> -j per axis
        conj_idx = (-np.arange(m)) % m
        # serialization order: j = -m/2+1, ..., 0, ..., m/2 per axis,
        # where the +m/2 label reads the (aliased) -m/2 slot
        lex_idx = (np.arange(m) - m // 2 + 1) % m

        object.__setattr__(self, "freq1d", freq1d)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "kmag", np.sqrt(k2))
        object.__setattr__(self, "dealias_cutoff", cutoff)
        object.__setattr__(self, "dealias_mask", mask)
        object.__setattr__(self, "nmodes", m**self.dim)
        object.__setattr__(self, "zero_index", (0,) * self.dim)
        object.__setattr__(self, "_conj_ix", np.ix_(*([conj_idx] * self.dim)))
        object.__setattr__(self, "_lex_ix", np.ix_(*([lex_idx] * self.dim)))
        kmax = np.sqrt(self.dim) * (m // 2)
        object.__setattr__(self, "tau_cap", _TAU_CAP_EXPONENT / kmax)

    # grids carry large derived arrays, so equality compares the defining
    # scalars only
    def __eq__(self, other):
        if not isinstance(other, GridSpec):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.modes == other.modes
            and self.dealias_fraction == other.dealias_fraction
        )

    def __hash__(self):
        return hash((self.dim, self.modes, self.dealias_fraction))

    @property
    def shape(self):
        """Shape of a scalar coefficient array."""
        return (self.modes,) * self.dim

    @property
    def vshape(self):
        """Shape of a vector coefficient array (component axis first)."""
        return (self.dim,) + self.shape

    @property
    def dx(self):
        """Physical grid spacing 2*pi / modes."""
        return TWO_PI / self.modes

    def wavevectors(self):
        """Integer wavevectors in the fixed lexicographic order.

        Returns an (nmodes, dim) int array enumerating j over
        {-modes/2+1, ..., modes/2}^dim, the order used when coefficients
        are serialized.  The zero (mean) vector sits at position
        ``mean_mode_position()``.
        """
        m = self.modes
        labels = np.arange(m) - m // 2 + 1
        grids = np.meshgrid(*([labels] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def mean_mode_position(self):
        """Position of the zero wavevector in ``wavevectors()``."""
        m = self.modes
        pos = 0
        for _ in range(self.dim):
            pos = pos * m + (m // 2 - 1)
        return pos

    def to_lex_order(self, coeffs):
        """Flatten one scalar coefficient array into lexicographic order."""
        return coeffs[self._lex_ix].ravel()

    def from_lex_order(self, flat):
        """Inverse of :meth:`to_lex_order`."""
        out = np.empty(self.shape, dtype=complex)
        out[self._lex_ix] = np.asarray(flat, dtype=complex).reshape(self.shape)
        return out


def make_grid(dim, modes, dealias_fraction=Fraction(2, 3)):
    """Build a :class:`GridSpec`; see the class docstring for the contract."""
    return GridSpec(dim=dim, modes=modes, dealias_fraction=dealias_fraction)
