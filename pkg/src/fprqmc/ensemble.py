"""Particle storage, cell indexing, initialization, and moment estimation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rng import PseudoStream, inverse_normal_cdf


class InternalConsistencyError(RuntimeError):
    """A particle violates an invariant the boundary handling should enforce."""


@dataclass
class Grid1D:
    """Uniform 1-D spatial grid along one wall-normal axis."""

    n_cells: int
    length: float
    axis: int = 0

    def __post_init__(self):
        if self.n_cells < 1 or self.length <= 0.0:
            raise ValueError("grid needs n_cells >= 1 and positive length")

    @property
    def width(self) -> float:
        return self.length / self.n_cells

    def locate(self, coords: np.ndarray) -> np.ndarray:
        """Cell index per coordinate; coordinates must lie in [0, length]."""
        coords = np.asarray(coords, dtype=np.float64)
        if np.any(coords < 0.0) or np.any(coords > self.length):
            raise InternalConsistencyError("particle position outside the domain")
        idx = (coords / self.width).astype(np.int64)
        return np.minimum(idx, self.n_cells - 1)


@dataclass
class ParticleEnsemble:
    """Structure-of-arrays particle state: positions, velocities, cell index."""

    positions: np.ndarray  # (n, 3) m
    velocities: np.ndarray  # (n, 3) m/s
    cell_index: np.ndarray  # (n,) int64

    def __post_init__(self):
        n = len(self.velocities)
        if len(self.positions) != n or len(self.cell_index) != n:
            raise ValueError("ensemble arrays must share one length")

    def __len__(self) -> int:
        return len(self.velocities)

    def snapshot_csv(self, path) -> None:
        """Debug dump: one row per particle with position, velocity, cell."""
        data = np.column_stack([self.positions, self.velocities,
                                self.cell_index.astype(np.float64)])
        header = "x,y,z,vx,vy,vz,cell"
        np.savetxt(path, data, delimiter=",", header=header, comments="")


@dataclass
class CellMoments:
    """Per-cell estimates: mean velocity, energy, trace-free stress, heat flux."""

    count: int
    mean: np.ndarray        # (3,) m/s
    energy: float           # m^2/s^2 per unit mass
    stress: np.ndarray      # (3, 3) symmetric, trace-free
    heat_flux: np.ndarray   # (3,) m^3/s^3


def compute_moments(velocities: np.ndarray) -> CellMoments | None:
    """Moment estimates for one cell's particles; ``None`` marks an empty cell.

    The stress is the second central moment minus its exact trace part, so
    it is trace-free by construction (the trace equals twice the energy).
    """
    v = np.atleast_2d(np.asarray(velocities, dtype=np.float64))
    n = v.shape[0]
    if n == 0:
        return None
    mean = v.mean(axis=0)
    u = v - mean
    m2 = (u.T @ u) / n
    energy = 0.5 * np.trace(m2)
    stress = m2 - (2.0 * energy / 3.0) * np.eye(3)
    heat = 0.5 * np.mean(u * np.sum(u * u, axis=1)[:, None], axis=0)
    return CellMoments(n, mean, float(energy), stress, heat)


def moments_by_cell(velocities: np.ndarray, cell_index: np.ndarray, n_cells: int):
    """Vectorized moments for every cell at once.

    Returns ``(counts, mean, energy, stress, heat_flux)`` with leading cell
    axis; entries of empty cells are NaN.  Must agree with
    :func:`compute_moments` applied cell by cell.
    """
    v = np.asarray(velocities, dtype=np.float64)
    counts = np.bincount(cell_index, minlength=n_cells)
    safe = np.maximum(counts, 1).astype(np.float64)
    mean = np.empty((n_cells, 3))
    for k in range(3):
        mean[:, k] = np.bincount(cell_index, weights=v[:, k], minlength=n_cells) / safe
    u = v - mean[cell_index]
    m2 = np.empty((n_cells, 3, 3))
    for k in range(3):
        for l in range(k, 3):
            s = np.bincount(cell_index, weights=u[:, k] * u[:, l], minlength=n_cells) / safe
            m2[:, k, l] = s
            m2[:, l, k] = s
    energy = 0.5 * (m2[:, 0, 0] + m2[:, 1, 1] + m2[:, 2, 2])
    stress = m2 - (2.0 / 3.0) * energy[:, None, None] * np.eye(3)
    usq = np.sum(u * u, axis=1)
    heat = np.empty((n_cells, 3))
    for k in range(3):
        heat[:, k] = 0.5 * np.bincount(cell_index, weights=u[:, k] * usq, minlength=n_cells) / safe
    empty = counts == 0
    if empty.any():
        mean[empty] = np.nan
        energy = np.where(empty, np.nan, energy)
        stress[empty] = np.nan
        heat[empty] = np.nan
    return counts, mean, energy, stress, heat


def initialize_maxwellian(n: int, temperature: float, bulk: np.ndarray,
                          source: Callable[[int], np.ndarray], kt_over_m: float | None = None,
                          *, mass: float | None = None, boltzmann: float | None = None) -> np.ndarray:
    """Sample ``n`` velocities from a Maxwellian via per-component inverse CDF.

    ``source(n)`` must return ``(n, 3)`` uniforms in (0,1); quasi-random
    providers keep their monotone coupling this way.  Pass either
    ``kt_over_m`` directly or ``mass`` and ``boltzmann``.
    """
    if temperature < 0.0:
        raise ValueError("temperature must be >= 0")
    if kt_over_m is None:
        kt_over_m = boltzmann * temperature / mass
    scale = np.sqrt(kt_over_m)
    xi = inverse_normal_cdf(source(n))
    return np.asarray(bulk, dtype=np.float64) + scale * xi


def cut_plane_normal(angle_deg: float) -> np.ndarray:
    """Outward normal of the x-y plane tilted about the +x axis."""
    a = np.deg2rad(angle_deg)
    return np.array([0.0, -np.sin(a), np.cos(a)])


def initialize_anisotropic_cut(n: int, angle_deg: float, stream: PseudoStream) -> np.ndarray:
    """Anisotropic unit-scale velocity samples from a planar cut of a Gaussian.

    Standard-normal triples are rejection-sampled: the cutting plane passes
    through the origin, tilted ``angle_deg`` counterclockwise about +x from
    the x-y plane, and samples on its increasing-z side are discarded.  The
    accepted set is affinely transformed to exact zero mean and exact unit
    per-component variance.
    """
    if n < 2:
        raise ValueError("need at least two particles to normalize")
    normal = cut_plane_normal(angle_deg)
    gen = stream.generator
    out = np.empty((n, 3))
    have = 0
    while have < n:
        cand = gen.standard_normal((2 * (n - have) + 16, 3))
        acc = cand[cand @ normal <= 0.0][: n - have]
        out[have : have + len(acc)] = acc
        have += len(acc)
    out -= out.mean(axis=0)
    out /= out.std(axis=0)
    return out


def reassign_cells(ensemble: ParticleEnsemble, grid: Grid1D) -> np.ndarray:
    """Recompute cell indices from positions; positions must be in-domain."""
    cell = grid.locate(ensemble.positions[:, grid.axis])
    ensemble.cell_index = cell
    return cell


def cell_partition(cell_index: np.ndarray, n_cells: int):
    """Stable per-cell particle lists.

    Returns ``(order, starts, counts)``: ``order[starts[j]:starts[j]+counts[j]]``
    are cell ``j``'s particle indices in global order.
    """
    order = np.argsort(cell_index, kind="stable")
    counts = np.bincount(cell_index, minlength=n_cells)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return order, starts, counts
