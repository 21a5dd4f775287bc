"""Run configuration files, binary state snapshots, and the CSV schema.

Everything here is deliberately boring and bit-reproducible:

* config files are line-oriented ``key = value`` text with full-line
  ``#`` comments; unknown keys and duplicate keys are errors (last-wins
  silently changing a run is worse than a loud failure);

* snapshots are a fixed little-endian layout — an eight-byte magic, a
  44-byte header, then the velocity components and the temperature as
  complex double pairs in lexicographic mode order over
  j in {-M/2+1, ..., M/2}^N — so two runs of the same config can be
  compared with ``cmp``;

* diagnostics go to CSV at 17 significant digits, which round-trips
  IEEE-754 doubles exactly.

All writes go through a temp file and ``os.replace``, so readers never
see a half-written file.
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .diagnostics import DiagnosticsRecord
from .fields import INITIAL_KINDS, SpectralScalarField, SpectralVectorField
from .grid import make_grid
from .stepper import SCHEMES, SimulationState

__all__ = [
    "RunConfig",
    "ConfigError",
    "parse_config",
    "SnapshotHeader",
    "SnapshotError",
    "BadMagicError",
    "VersionMismatchError",
    "TruncatedPayloadError",
    "write_snapshot",
    "read_snapshot",
    "read_snapshot_header",
    "format_diagnostics",
    "write_diagnostics",
    "read_diagnostics",
    "MAGIC",
    "FORMAT_VERSION",
]

MAGIC = b"BOUSSNAP"
FORMAT_VERSION = 1
# magic, version, dim, modes, t, nu, kappa
_HEADER = struct.Struct("<8sIIIddd")


class ConfigError(ValueError):
    """Bad run configuration, pointing at the file and line when known."""


@dataclass
class RunConfig:
    """Everything a ``run`` invocation needs, validated on construction.

    ``sobolev_exponent`` is the decay exponent handed to the rough-H1
    synthesizer; ``None`` keeps that synthesizer's dimension-dependent
    default.
    """

    dim: int
    modes: int
    t_final: float
    nu: float = 1.0
    kappa: float = 1.0
    dt: float = 1e-3
    snapshot_every: int = 10
    initial_kind: str = "rough_h1"
    seed: int = 0
    sobolev_exponent: float | None = None
    scheme: str = "if_rk4"
    output_dir: str = "."

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        if self.modes < 4 or self.modes % 2:
            raise ConfigError(f"modes must be even and >= 4, got {self.modes}")
        for key in ("nu", "kappa", "dt"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be > 0, got {getattr(self, key)}")
        if self.t_final < self.dt:
            raise ConfigError(
                f"t_final must be at least dt, got t_final={self.t_final}, "
                f"dt={self.dt}"
            )
        if self.snapshot_every < 1:
            raise ConfigError(
                f"snapshot_every must be >= 1, got {self.snapshot_every}"
            )
        if self.scheme not in SCHEMES:
            raise ConfigError(
                f"scheme must be one of {SCHEMES}, got {self.scheme!r}"
            )
        if self.initial_kind not in INITIAL_KINDS:
            raise ConfigError(
                f"initial_kind must be one of {INITIAL_KINDS}, "
                f"got {self.initial_kind!r}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


_CONFIG_PARSERS = {
    "dim": int,
    "modes": int,
    "t_final": float,
    "nu": float,
    "kappa": float,
    "dt": float,
    "snapshot_every": int,
    "initial_kind": str,
    "seed": int,
    "sobolev_exponent": float,
    "scheme": str,
    "output_dir": str,
}
_REQUIRED_KEYS = ("dim", "modes", "t_final")


def parse_config(path):
    """Read a ``key = value`` config file into a RunConfig.

    Missing optional keys take the RunConfig defaults; unknown keys and
    repeated keys are rejected with the offending line number.
    """
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}"
                )
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_PARSERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = _CONFIG_PARSERS[key](value)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: cannot parse {key} value {value!r}"
                ) from None
    missing = [key for key in _REQUIRED_KEYS if key not in values]
    if missing:
        raise ConfigError(f"{path}: missing required keys {missing}")
    try:
        return RunConfig(**values)
    except ConfigError as err:
        raise ConfigError(f"{path}: {err}") from None


# ----------------------------------------------------------------------
# snapshots


@dataclass(frozen=True)
class SnapshotHeader:
    format_version: int
    dim: int
    modes: int
    t: float
    nu: float
    kappa: float


class SnapshotError(IOError):
    """Base for the malformed-snapshot family below."""


class BadMagicError(SnapshotError):
    pass


class VersionMismatchError(SnapshotError):
    pass


class TruncatedPayloadError(SnapshotError):
    pass


def _atomic_write(path, data: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_snapshot(state: SimulationState, params, path):
    """Serialize one state; ``params`` supplies the header's nu, kappa."""
    grid = state.u.grid
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, grid.dim, grid.modes, state.t,
        params.nu, params.kappa,
    )
    parts = [header]
    for i in range(grid.dim):
        parts.append(
            np.ascontiguousarray(
                grid.to_lex_order(state.u.coeffs[i]), dtype="<c16"
            ).tobytes()
        )
    parts.append(
        np.ascontiguousarray(
            grid.to_lex_order(state.theta.coeffs), dtype="<c16"
        ).tobytes()
    )
    _atomic_write(path, b"".join(parts))


def _parse_header(blob, path):
    if len(blob) < _HEADER.size:
        raise TruncatedPayloadError(
            f"{path}: expected at least {_HEADER.size} header bytes, "
            f"got {len(blob)}"
        )
    magic, version, dim, modes, t, nu, kappa = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: format version {version}, expected {FORMAT_VERSION}"
        )
    return SnapshotHeader(version, dim, modes, t, nu, kappa)


def read_snapshot_header(path):
    """Header only — cheap way to learn dim/modes/t/nu/kappa of a file."""
    with open(path, "rb") as fh:
        blob = fh.read(_HEADER.size)
    return _parse_header(blob, path)


def read_snapshot(path):
    """Read a snapshot back into a SimulationState.

    The stored grid is reconstructed from the header; ``step_index`` is
    not serialized and comes back as 0.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    header = _parse_header(blob, path)
    grid = make_grid(header.dim, header.modes)
    n_fields = header.dim + 1
    expected = _HEADER.size + 16 * n_fields * grid.nmodes
    if len(blob) != expected:
        raise TruncatedPayloadError(
            f"{path}: expected {expected} bytes "
            f"({header.dim}+1 fields of {grid.nmodes} coefficients), "
            f"got {len(blob)}"
        )
    flat = np.frombuffer(blob, dtype="<c16", offset=_HEADER.size)
    flat = flat.astype(np.complex128).reshape(n_fields, grid.nmodes)
    u = SpectralVectorField(
        grid, np.stack([grid.from_lex_order(flat[i]) for i in range(header.dim)])
    )
    theta = SpectralScalarField(grid, grid.from_lex_order(flat[header.dim]))
    return SimulationState(u, theta, header.t, 0)


# ----------------------------------------------------------------------
# diagnostics CSV


def format_diagnostics(records):
    """The CSV text for ``records``: header plus one row each, 17 digits."""
    lines = [",".join(DiagnosticsRecord.field_names())]
    for rec in records:
        lines.append(",".join("%.17g" % v for v in rec.as_tuple()))
    return "\n".join(lines) + "\n"


def write_diagnostics(records, path):
    """CSV with one row per record at 17 significant digits."""
    _atomic_write(path, format_diagnostics(records).encode("ascii"))


def read_diagnostics(path):
    """Parse a diagnostics CSV back into records."""
    names = DiagnosticsRecord.field_names()
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != names:
            raise ValueError(
                f"{path}: unexpected CSV header {header}, expected {names}"
            )
        return [DiagnosticsRecord(*map(float, row)) for row in reader]
