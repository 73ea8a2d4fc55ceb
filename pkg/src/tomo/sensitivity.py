"""Linearized sensitivity of normalized voltage frames to conductivity.

Difference imaging works on normalized frames
u = (reference - measured) / max|reference|, where the reference frame
is simulated on the uniform background. The matrix computed here is
the Jacobian du/dsigma at the background, assembled with the adjoint
identity: the derivative of a measured voltage with respect to one
element's conductivity is minus the integral over that element of
grad(phi_drive) . grad(phi_measure), with the measurement pair driven
by unit current. Gradients are constant on linear elements, so each
entry is a single per-element dot product. The normalization flips
the sign, making entries positive where extra conductivity raises u.

Matrices are cached on disk keyed by mesh geometry, protocol and
background (TOMO_CACHE_DIR overrides the location).
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeError
from .forward import (
    GaugedSolver,
    MeasurementProtocol,
    VoltageFrame,
    element_coefficients,
)
from .mesh import DiscMesh

MATRIX_MAGIC = b"TSNS"
MATRIX_VERSION = 1


@dataclass
class SensitivityMatrix:
    """Jacobian of the normalized frame at a uniform background."""

    entries: np.ndarray
    background: float = 1.0
    protocol: str = ""

    @property
    def n_measurements(self) -> int:
        return self.entries.shape[0]

    @property
    def n_elements(self) -> int:
        return self.entries.shape[1]


@dataclass
class NormalizedFrame:
    """Reference-relative difference frame feeding reconstruction."""

    values: np.ndarray
    protocol: str = ""


def normalize_frame(measured: VoltageFrame, reference: VoltageFrame) -> NormalizedFrame:
    """(reference - measured) / max|reference|.

    Refuses frames of different lengths or from different tagged
    protocols, and a reference that is identically zero.
    """
    if measured.values.shape != reference.values.shape:
        raise ShapeError(
            f"frame length {measured.values.shape[0]} does not match "
            f"reference length {reference.values.shape[0]}"
        )
    if measured.protocol and reference.protocol and measured.protocol != reference.protocol:
        raise ConfigurationError(
            f"cannot normalize across protocols: measured {measured.protocol!r}, "
            f"reference {reference.protocol!r}"
        )
    vmax = np.abs(reference.values).max()
    if vmax == 0:
        raise DomainError("reference frame is identically zero")
    return NormalizedFrame(
        values=(reference.values - measured.values) / vmax,
        protocol=reference.protocol or measured.protocol,
    )


def compute_sensitivity(
    mesh: DiscMesh,
    background: float,
    protocol: MeasurementProtocol,
) -> SensitivityMatrix:
    """Assemble the normalized-frame Jacobian at a uniform background."""
    if background <= 0:
        raise DomainError(f"background conductivity must be positive, got {background}")
    sigma = np.full(mesh.n_triangles, float(background))
    solver = GaugedSolver(mesh, sigma)
    reference = solver.frame(protocol)
    vmax = np.abs(reference.values).max()
    if vmax == 0:
        raise DomainError("background frame is identically zero; cannot normalize")

    b, c, areas = element_coefficients(mesh)
    inv2a = 1.0 / (2.0 * areas)

    def unit_pair_gradients(pair_keys):
        """Per-element potential gradients of unit drives, one row per pair."""
        gx = np.empty((len(pair_keys), mesh.n_triangles))
        gy = np.empty((len(pair_keys), mesh.n_triangles))
        for i, (s, t) in enumerate(pair_keys):
            phi = solver.solve(solver.weights[s] - solver.weights[t])
            tri_phi = phi[mesh.triangles]
            gx[i] = (tri_phi * b).sum(axis=1) * inv2a
            gy[i] = (tri_phi * c).sum(axis=1) * inv2a
        return gx, gy

    drive_keys = []
    drive_of = {}
    meas_keys = []
    meas_of = {}
    for _, drive, (a, pb) in protocol.entries():
        dk = (drive.source, drive.sink)
        if dk not in drive_of:
            drive_of[dk] = len(drive_keys)
            drive_keys.append(dk)
        mk = (a, pb)
        if mk not in meas_of:
            meas_of[mk] = len(meas_keys)
            meas_keys.append(mk)

    dgx, dgy = unit_pair_gradients(drive_keys)
    mgx, mgy = unit_pair_gradients(meas_keys)

    m = protocol.n_measurements
    di = np.empty(m, dtype=np.int64)
    mi = np.empty(m, dtype=np.int64)
    amp = np.empty(m)
    for flat, drive, (a, pb) in protocol.entries():
        di[flat] = drive_of[(drive.source, drive.sink)]
        mi[flat] = meas_of[(a, pb)]
        amp[flat] = drive.amplitude

    entries = (dgx[di] * mgx[mi] + dgy[di] * mgy[mi]) * areas[None, :]
    entries *= (amp / vmax)[:, None]
    return SensitivityMatrix(
        entries=entries, background=float(background), protocol=protocol.tag
    )


def save_matrix(matrix: SensitivityMatrix, path) -> None:
    """Write a sensitivity matrix in the binary TSNS format."""
    m, k = matrix.entries.shape
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<III", MATRIX_VERSION, m, k))
        fh.write(struct.pack("<d", matrix.background))
        fh.write(np.ascontiguousarray(matrix.entries, dtype="<f8").tobytes())


def load_matrix(path) -> SensitivityMatrix:
    """Read a TSNS file written by :func:`save_matrix`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MATRIX_MAGIC:
            raise DomainError(f"not a TSNS matrix file: magic {magic!r}")
        version, m, k = struct.unpack("<III", fh.read(12))
        if version != MATRIX_VERSION:
            raise DomainError(f"unsupported TSNS version {version}")
        (background,) = struct.unpack("<d", fh.read(8))
        entries = np.frombuffer(fh.read(8 * m * k), dtype="<f8")
    if entries.size != m * k:
        raise DomainError("truncated TSNS file")
    return SensitivityMatrix(
        entries=entries.reshape(m, k).copy(), background=background
    )


def default_cache_dir() -> Path:
    env = os.environ.get("TOMO_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "tomo"


def sensitivity_cache_key(
    mesh: DiscMesh, background: float, protocol: MeasurementProtocol
) -> str:
    """Content hash identifying one (mesh, background, protocol) matrix."""
    h = hashlib.sha256()
    h.update(struct.pack("<II", MATRIX_VERSION, mesh.n_electrodes))
    h.update(np.ascontiguousarray(mesh.nodes, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(mesh.triangles, dtype="<i4").tobytes())
    for arc in mesh.electrode_arcs:
        h.update(np.ascontiguousarray(arc, dtype="<i8").tobytes())
    h.update(protocol.tag.encode())
    h.update(struct.pack("<d", float(background)))
    return h.hexdigest()


def cached_sensitivity(
    mesh: DiscMesh,
    background: float,
    protocol: MeasurementProtocol,
    cache_dir: Path | str | None = None,
) -> SensitivityMatrix:
    """Disk-cached :func:`compute_sensitivity`.

    The cache file is written atomically so concurrent runs can share
    a directory; a corrupt or mismatched file is recomputed in place.
    """
    directory = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{sensitivity_cache_key(mesh, background, protocol)}.tsns"
    if path.exists():
        try:
            matrix = load_matrix(path)
        except DomainError:
            matrix = None
        if matrix is not None and matrix.entries.shape == (
            protocol.n_measurements,
            mesh.n_triangles,
        ):
            matrix.protocol = protocol.tag
            return matrix
    matrix = compute_sensitivity(mesh, background, protocol)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        save_matrix(matrix, tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return matrix
