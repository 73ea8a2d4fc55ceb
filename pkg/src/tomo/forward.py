"""Steady-current forward simulation on the disc mesh.

Solves div(sigma * grad(phi)) = 0 with piecewise-linear elements and
zero-flux boundary conditions everywhere except the two driven
electrode arcs, which carry a uniform current density of
amplitude / arc length (positive on the source arc, negative on the
sink). The Neumann problem fixes potential only up to a constant, so
the solved potential is pinned to zero mean through a Lagrange
multiplier row appended to the stiffness system.

Electrode voltages are length-weighted mean potentials over arc edges.
That weighting equals the load functional of a unit drive on the same
pair, which makes discrete reciprocity exact up to solver roundoff.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, DomainError, ShapeError, SolverError
from .mesh import DiscMesh, electrode_arc_lengths

FRAME_MAGIC = b"TFRM"
FRAME_VERSION = 1


@dataclass(frozen=True)
class DrivePattern:
    """Current injection between two electrodes."""

    source: int
    sink: int
    amplitude: float = 1.0


@dataclass
class MeasurementProtocol:
    """Ordered drive patterns with their measurement pairs.

    ``measurements[i]`` lists the (positive, negative) electrode pairs
    read out while ``drives[i]`` is active. The flattened frame order
    is drive-major, measurement pairs in listed order.
    """

    kind: str
    n_electrodes: int
    drives: list[DrivePattern]
    measurements: list[list[tuple[int, int]]]
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def tag(self) -> str:
        return f"{self.kind}:{self.n_electrodes}"

    @property
    def n_measurements(self) -> int:
        return sum(len(pairs) for pairs in self.measurements)

    def entries(self):
        """Yield (flat_index, drive, (a, b)) over the frame order."""
        flat = 0
        for drive, pairs in zip(self.drives, self.measurements):
            for a, b in pairs:
                yield flat, drive, (a, b)
                flat += 1

    def flat_index(self, source: int, sink: int, a: int, b: int):
        """Frame position of a drive/measure combination, None if absent."""
        if not self._index:
            for flat, drive, (pa, pb) in self.entries():
                self._index[(drive.source, drive.sink, pa, pb)] = flat
        return self._index.get((source, sink, a, b))


def adjacent_protocol(n_electrodes: int, amplitude: float = 1.0) -> MeasurementProtocol:
    """Adjacent drive, adjacent measurement, driven pairs excluded.

    Yields n_electrodes * (n_electrodes - 3) values per frame.
    """
    _check_protocol_args(n_electrodes, amplitude)
    drives = []
    measurements = []
    for s in range(n_electrodes):
        t = (s + 1) % n_electrodes
        drives.append(DrivePattern(s, t, amplitude))
        pairs = []
        for a in range(n_electrodes):
            b = (a + 1) % n_electrodes
            if {a, b} & {s, t}:
                continue
            pairs.append((a, b))
        measurements.append(pairs)
    return MeasurementProtocol("adjacent", n_electrodes, drives, measurements)


def opposite_protocol(n_electrodes: int, amplitude: float = 1.0) -> MeasurementProtocol:
    """Diametral drive, adjacent measurement, driven pairs excluded."""
    _check_protocol_args(n_electrodes, amplitude)
    if n_electrodes % 2:
        raise ConfigurationError(
            f"opposite drive needs an even electrode count, got {n_electrodes}"
        )
    drives = []
    measurements = []
    for s in range(n_electrodes):
        t = (s + n_electrodes // 2) % n_electrodes
        drives.append(DrivePattern(s, t, amplitude))
        pairs = []
        for a in range(n_electrodes):
            b = (a + 1) % n_electrodes
            if {a, b} & {s, t}:
                continue
            pairs.append((a, b))
        measurements.append(pairs)
    return MeasurementProtocol("opposite", n_electrodes, drives, measurements)


def _check_protocol_args(n_electrodes: int, amplitude: float) -> None:
    if n_electrodes < 4:
        raise ConfigurationError(
            f"protocols need at least 4 electrodes, got {n_electrodes}"
        )
    if amplitude <= 0:
        raise ConfigurationError(f"drive amplitude must be positive, got {amplitude}")


@dataclass
class VoltageFrame:
    """One sweep of differential electrode voltages."""

    values: np.ndarray
    protocol: str = ""


def element_coefficients(mesh: DiscMesh):
    """P1 shape-function gradients per triangle.

    Returns (b, c, areas) with b, c of shape (T, 3): the gradient of
    shape function i on triangle t is (b[t, i], c[t, i]) / (2 * areas[t]).
    """
    p = mesh.nodes[mesh.triangles]
    x = p[:, :, 0]
    y = p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    areas = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    return b, c, areas


def assemble_system(mesh: DiscMesh, sigma: np.ndarray) -> sparse.csr_matrix:
    """Assemble the conductivity-weighted stiffness matrix.

    ``sigma`` holds one positive conductivity per triangle. The result
    is symmetric positive semidefinite with zero row sums (the
    constant vector spans its null space).
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (mesh.n_triangles,):
        raise ShapeError(
            f"sigma has shape {sigma.shape}, expected ({mesh.n_triangles},)"
        )
    if not np.all(np.isfinite(sigma)):
        raise DomainError("sigma contains non-finite entries")
    if np.any(sigma <= 0):
        bad = int(np.argmin(sigma))
        raise DomainError(
            f"conductivity must be positive everywhere; element {bad} has "
            f"sigma = {sigma[bad]}"
        )
    b, c, areas = element_coefficients(mesh)
    scale = sigma / (4.0 * areas)
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, 3).ravel()
    local = (
        b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]
    ) * scale[:, None, None]
    n = mesh.n_nodes
    return sparse.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(n, n)
    ).tocsr()


def electrode_weight_vectors(mesh: DiscMesh) -> np.ndarray:
    """(L, N) matrix of length-weighted arc averaging functionals.

    Row e dotted with a nodal potential gives the mean potential on
    electrode e. The same rows build drive load vectors, so measuring
    with them keeps the discrete problem reciprocal.
    """
    weights = np.zeros((mesh.n_electrodes, mesh.n_nodes))
    lengths = electrode_arc_lengths(mesh)
    for e, arc in enumerate(mesh.electrode_arcs):
        edges = mesh.boundary_edges[arc]
        seg = mesh.nodes[edges[:, 1]] - mesh.nodes[edges[:, 0]]
        half = 0.5 * np.hypot(seg[:, 0], seg[:, 1])
        np.add.at(weights[e], edges[:, 0], half)
        np.add.at(weights[e], edges[:, 1], half)
        weights[e] /= lengths[e]
    return weights


def electrode_load(mesh: DiscMesh, drive: DrivePattern, weights: np.ndarray | None = None) -> np.ndarray:
    """Nodal load vector for a drive: +amplitude spread over the source
    arc, -amplitude over the sink arc, zero elsewhere. Entries sum to
    zero by construction."""
    L = mesh.n_electrodes
    if not (0 <= drive.source < L and 0 <= drive.sink < L):
        raise ConfigurationError(
            f"drive electrodes ({drive.source}, {drive.sink}) outside 0..{L - 1}"
        )
    if drive.source == drive.sink:
        raise ConfigurationError("drive source and sink must differ")
    if drive.amplitude <= 0:
        raise ConfigurationError(f"drive amplitude must be positive, got {drive.amplitude}")
    if weights is None:
        weights = electrode_weight_vectors(mesh)
    return drive.amplitude * (weights[drive.source] - weights[drive.sink])


class GaugedSolver:
    """Factorized stiffness system with a zero-mean gauge row.

    The Neumann system K phi = f is singular (constants are in the
    null space), so the solver factors the bordered matrix
    [[K, 1], [1^T, 0]] once and reuses it across drives.
    """

    def __init__(self, mesh: DiscMesh, sigma: np.ndarray):
        self.mesh = mesh
        k = assemble_system(mesh, sigma)
        n = k.shape[0]
        one = np.ones((n, 1))
        bordered = sparse.bmat([[k, one], [one.T, None]], format="csc")
        try:
            self._lu = splu(bordered)
        except RuntimeError as err:
            raise SolverError(
                f"factorization of the gauged system failed ({err}); "
                "the mesh or conductivity field is degenerate"
            ) from err
        self._k = k
        self._n = n
        self.weights = electrode_weight_vectors(mesh)

    def solve(self, load: np.ndarray) -> np.ndarray:
        """Nodal potential for one load vector, zero-mean gauged."""
        if load.shape != (self._n,):
            raise ShapeError(f"load has shape {load.shape}, expected ({self._n},)")
        rhs = np.append(load, 0.0)
        sol = self._lu.solve(rhs)
        phi = sol[:self._n]
        scale = np.linalg.norm(load)
        if scale > 0:
            residual = np.linalg.norm(self._k @ phi + sol[self._n] - load) / scale
            if residual > 1e-10:
                raise SolverError(
                    f"forward solve residual {residual:.3e} exceeds 1e-10; "
                    "the system is too ill-conditioned"
                )
        return phi

    def solve_drive(self, drive: DrivePattern) -> np.ndarray:
        return self.solve(electrode_load(self.mesh, drive, self.weights))

    def frame(self, protocol: MeasurementProtocol) -> VoltageFrame:
        """Simulate one full measurement sweep."""
        if protocol.n_electrodes != self.mesh.n_electrodes:
            raise ConfigurationError(
                f"protocol expects {protocol.n_electrodes} electrodes, "
                f"mesh has {self.mesh.n_electrodes}"
            )
        values = np.empty(protocol.n_measurements)
        flat = 0
        for drive, pairs in zip(protocol.drives, protocol.measurements):
            phi = self.solve_drive(drive)
            means = self.weights @ phi
            for a, b in pairs:
                values[flat] = means[a] - means[b]
                flat += 1
        return VoltageFrame(values=values, protocol=protocol.tag)


def solve_forward(mesh: DiscMesh, sigma: np.ndarray, drive: DrivePattern) -> np.ndarray:
    """Zero-mean nodal potential for a single drive pattern."""
    return GaugedSolver(mesh, sigma).solve_drive(drive)


def simulate_frame(mesh: DiscMesh, sigma: np.ndarray, protocol: MeasurementProtocol) -> VoltageFrame:
    """Voltage frame for one conductivity field under a protocol."""
    return GaugedSolver(mesh, sigma).frame(protocol)


def save_frame(frame: VoltageFrame, path) -> None:
    """Write a frame in the binary TFRM format (little-endian)."""
    with open(path, "wb") as fh:
        fh.write(FRAME_MAGIC)
        fh.write(struct.pack("<II", FRAME_VERSION, len(frame.values)))
        fh.write(np.ascontiguousarray(frame.values, dtype="<f8").tobytes())


def load_frame(path) -> VoltageFrame:
    """Read a TFRM file written by :func:`save_frame`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FRAME_MAGIC:
            raise DomainError(f"not a TFRM frame file: magic {magic!r}")
        version, m = struct.unpack("<II", fh.read(8))
        if version != FRAME_VERSION:
            raise DomainError(f"unsupported TFRM version {version}")
        values = np.frombuffer(fh.read(8 * m), dtype="<f8").copy()
    if values.shape[0] != m:
        raise DomainError("truncated TFRM file")
    return VoltageFrame(values=values)
