"""Drift-diffusion dynamics: coefficients, velocity updates, flight, walls.

The velocity process is a per-component Ornstein-Uhlenbeck relaxation toward
the cell mean with isotropic diffusion tied to the cell energy.  Updates use
the exact OU transition (accurate for any time step); an Euler-Maruyama
variant is provided for comparison.  Diffuse walls resample impinging
particles from a half-range Maxwellian at the wall state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import (CellMoments, Grid1D, ParticleEnsemble, cell_partition,
                       moments_by_cell, reassign_cells)
from .rng import inverse_normal_cdf
from .strategies import NoiseRequest

U_FLOOR = 2.0**-32  # wall draw clamp so log(U) stays finite


class DegenerateCellError(ValueError):
    """Moments too degenerate to define coefficients (zero energy)."""


class StepError(RuntimeError):
    """A particle exceeded the wall-crossing recursion guard."""


@dataclass(frozen=True)
class GasModel:
    """Monoatomic gas constants plus the power-law viscosity fit."""

    molecular_mass: float      # kg
    boltzmann: float           # J/K
    mu_ref: float              # Pa s at T_ref
    T_ref: float               # K
    omega: float               # viscosity exponent
    d_ref: float               # m, hard-sphere reference diameter
    number_density: float      # 1/m^3

    @classmethod
    def argon(cls, number_density: float = 1e19) -> "GasModel":
        return cls(molecular_mass=6.63e-26, boltzmann=1.380649e-23,
                   mu_ref=2.117e-5, T_ref=273.0, omega=0.81,
                   d_ref=4.17e-10, number_density=number_density)

    @property
    def kb_over_m(self) -> float:
        return self.boltzmann / self.molecular_mass

    def temperature(self, energy):
        """T from specific translational energy: T = (2/3)(m/k) eps."""
        return (2.0 / 3.0) * energy / self.kb_over_m

    def energy_of(self, temperature):
        return 1.5 * self.kb_over_m * temperature

    def thermal_speed(self, temperature):
        """sqrt(kT/m), the per-component velocity standard deviation."""
        return np.sqrt(self.kb_over_m * temperature)

    def viscosity(self, temperature):
        return self.mu_ref * (temperature / self.T_ref) ** self.omega

    def pressure(self, temperature):
        return self.number_density * self.boltzmann * temperature

    def mean_free_path(self) -> float:
        """Hard-sphere mean free path 1 / (sqrt(2) pi d^2 n)."""
        return 1.0 / (np.sqrt(2.0) * np.pi * self.d_ref**2 * self.number_density)


def relaxation_time(moments, gas: GasModel):
    """Relaxation time tau = 2 mu(T) / p matching the stress relaxation rate.

    ``moments`` may be a :class:`CellMoments`, an energy value, or an array
    of energies.  Zero or negative energy is a degenerate cell.
    """
    energy = moments.energy if isinstance(moments, CellMoments) else moments
    energy = np.asarray(energy, dtype=np.float64)
    if np.any(energy <= 0.0):
        raise DegenerateCellError("relaxation time undefined for energy <= 0")
    T = gas.temperature(energy)
    tau = 2.0 * gas.viscosity(T) / gas.pressure(T)
    return float(tau) if energy.ndim == 0 else tau


@dataclass
class FPCoefficients:
    """Per-cell drift/diffusion data: relaxation time, target mean and energy."""

    tau: float
    mean: np.ndarray
    energy: float

    def __post_init__(self):
        if self.tau <= 0.0 or self.energy < 0.0:
            raise ValueError("need tau > 0 and energy >= 0")


def coefficients_from_moments(moments: CellMoments, gas: GasModel) -> FPCoefficients:
    return FPCoefficients(relaxation_time(moments, gas), moments.mean, moments.energy)


def equilibrium_coefficients(gas: GasModel, temperature: float,
                             mean=(0.0, 0.0, 0.0)) -> FPCoefficients:
    """Frozen coefficients for a reservoir at the given temperature."""
    energy = gas.energy_of(temperature)
    return FPCoefficients(relaxation_time(energy, gas), np.asarray(mean, float), energy)


def ou_update(v, coeff: FPCoefficients, dt: float, xi):
    """Exact OU transition applied per component.

    mean + (v - mean) e^(-dt/tau) + sqrt((2 eps/3)(1 - e^(-2 dt/tau))) xi
    """
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    a = np.exp(-dt / coeff.tau)
    b = np.sqrt((2.0 * coeff.energy / 3.0) * (1.0 - a * a))
    return coeff.mean + (np.asarray(v) - coeff.mean) * a + b * np.asarray(xi)


def em_update(v, coeff: FPCoefficients, dt: float, xi):
    """One Euler-Maruyama step; first-order accurate, needs dt << tau."""
    if dt >= coeff.tau:
        warnings.warn("Euler-Maruyama step is unreliable for dt >= tau", stacklevel=2)
    drift = -(dt / coeff.tau) * (np.asarray(v) - coeff.mean)
    amp = np.sqrt((4.0 * coeff.energy / (3.0 * coeff.tau)) * dt)
    return np.asarray(v) + drift + amp * np.asarray(xi)


def free_flight(position, velocity, dt: float):
    return np.asarray(position) + np.asarray(velocity) * dt


@dataclass
class WallSpec:
    """Diffuse wall: temperature, tangential velocity, and domain face."""

    temperature: float
    velocity: np.ndarray  # (3,) m/s, zero wall-normal component
    face: str             # "lower" or "upper"

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise ValueError("wall temperature must be > 0")
        self.velocity = np.asarray(self.velocity, dtype=np.float64)
        if self.face not in ("lower", "upper"):
            raise ValueError("face must be 'lower' or 'upper'")

    def location(self, grid: Grid1D) -> float:
        return 0.0 if self.face == "lower" else grid.length

    @property
    def inward(self) -> float:
        return 1.0 if self.face == "lower" else -1.0


def _half_maxwellian(u3: np.ndarray, wall: WallSpec, gas: GasModel, axis: int) -> np.ndarray:
    """Post-reflection velocities from three uniforms per particle.

    The wall-normal speed is flux-weighted, sqrt(kT_w/m) sqrt(-2 ln U),
    directed into the domain; tangential components are thermal Gaussians
    shifted by the wall velocity.
    """
    s = gas.thermal_speed(wall.temperature)
    u3 = np.atleast_2d(u3)
    v = np.empty_like(u3)
    un = np.clip(u3[:, 0], U_FLOOR, 1.0)
    t1, t2 = (axis + 1) % 3, (axis + 2) % 3
    v[:, axis] = wall.inward * s * np.sqrt(-2.0 * np.log(un))
    v[:, t1] = s * inverse_normal_cdf(u3[:, 1]) + wall.velocity[t1]
    v[:, t2] = s * inverse_normal_cdf(u3[:, 2]) + wall.velocity[t2]
    return v


def wall_interaction(position, velocity, dt_remaining: float, wall: WallSpec,
                     gas: GasModel, grid: Grid1D, draws, walls=None,
                     max_crossings: int = 32):
    """Resolve one particle's diffuse-wall reflection(s).

    The particle must reach ``wall`` within ``dt_remaining``.  It is moved to
    the plane at the crossing time, resampled from the half-range Maxwellian
    (``draws(n)`` supplies ``(n, 3)`` uniforms), and continues free flight
    for the leftover time, recursing through further crossings of any wall
    in ``walls``.  Returns ``(position, velocity, consumed)`` where
    ``consumed`` reports whether the full time budget was used without
    tripping the recursion guard.
    """
    position = np.array(position, dtype=np.float64)
    velocity = np.array(velocity, dtype=np.float64)
    axis = grid.axis
    walls = [wall] if walls is None else list(walls)
    target = wall
    for _ in range(max_crossings):
        loc = target.location(grid)
        vn = velocity[axis]
        t_c = (loc - position[axis]) / vn
        if not 0.0 <= t_c <= dt_remaining:
            raise ValueError("trajectory does not reach the wall in time")
        position = position + velocity * t_c
        position[axis] = loc
        dt_remaining -= t_c
        velocity = _half_maxwellian(draws(1), target, gas, axis)[0]
        end = position[axis] + velocity[axis] * dt_remaining
        target = None
        for w in walls:
            wloc = w.location(grid)
            if (end - wloc) * w.inward < 0.0:
                target = w
                break
        if target is None:
            position = position + velocity * dt_remaining
            return position, velocity, True
    raise StepError(f"particle crossed walls more than {max_crossings} times in one step")


def apply_diffuse_walls(coords: np.ndarray, velocities: np.ndarray, dt: float,
                        grid: Grid1D, walls: dict, gas: GasModel, draw_fns: dict,
                        max_crossings: int = 32):
    """Vectorized transport of the wall-normal coordinate with diffuse walls.

    ``coords`` are wall-normal positions before flight (modified in place,
    as are ``velocities``).  ``walls`` and ``draw_fns`` map face names to
    :class:`WallSpec` and to uniform suppliers; draws are consumed in
    particle-index order per wall so results are worker-independent.
    """
    axis = grid.axis
    coords += velocities[:, axis] * dt
    for _ in range(max_crossings):
        out_lo = coords < 0.0
        out_hi = coords > grid.length
        if not (out_lo.any() or out_hi.any()):
            np.clip(coords, 0.0, grid.length, out=coords)
            return
        for face, sel in (("lower", out_lo), ("upper", out_hi)):
            idx = np.flatnonzero(sel)
            if idx.size == 0:
                continue
            wall = walls[face]
            loc = wall.location(grid)
            # leftover flight time after the crossing
            t_left = (coords[idx] - loc) / velocities[idx, axis]
            velocities[idx] = _half_maxwellian(draw_fns[face](idx.size), wall, gas, axis)
            coords[idx] = loc + velocities[idx, axis] * t_left
    raise StepError(f"particles crossed walls more than {max_crossings} times in one step")


class Stepper:
    """One Algorithm step: moments, coefficients, noise, update, transport.

    Per cell, the current moments are estimated, drift/diffusion coefficients
    evaluated (or taken from ``frozen`` in constant-coefficient runs), the
    strategy queried for a noise block aligned to the cell's stable particle
    order, and every particle advanced by the exact OU update.  Inhomogeneous
    runs then free-fly the wall-normal coordinate through the diffuse walls
    and reassign cells.  Cells with fewer than two particles or degenerate
    energy skip the velocity update; their positions still advance.

    With ``grid=None`` the run is spatially homogeneous: one cell, no
    transport, no walls.
    """

    def __init__(self, gas: GasModel, strategy, dt: float, repetition: int = 0,
                 grid: Grid1D | None = None, walls: dict | None = None,
                 frozen: FPCoefficients | None = None):
        self.gas = gas
        self.strategy = strategy
        self.dt = dt
        self.repetition = repetition
        self.grid = grid
        self.walls = walls
        self.frozen = frozen
        self.homogeneous = grid is None
        if not self.homogeneous and not walls:
            raise ValueError("inhomogeneous runs need wall specifications")

    def step(self, ens: ParticleEnsemble, step_index: int) -> ParticleEnsemble:
        n_cells = 1 if self.homogeneous else self.grid.n_cells
        order, starts, counts = cell_partition(ens.cell_index, n_cells)
        _, mean, energy, stress, _ = moments_by_cell(ens.velocities, ens.cell_index, n_cells)
        # per-component spreads for the Morton scaling
        var = stress[:, (0, 1, 2), (0, 1, 2)] + (2.0 / 3.0) * energy[:, None]
        stddev = np.sqrt(np.maximum(var, 0.0))
        vv = ens.velocities[order]
        xi_all = np.zeros_like(vv)
        for j in range(n_cells):
            nj = int(counts[j])
            if nj < 2:
                continue
            if self.frozen is not None:
                coeff = self.frozen
            else:
                if not energy[j] > 0.0:
                    continue
                coeff = FPCoefficients(relaxation_time(float(energy[j]), self.gas),
                                       mean[j], float(energy[j]))
            sl = slice(starts[j], starts[j] + nj)
            req = NoiseRequest(self.repetition, step_index, j, nj,
                               velocities=vv[sl], mean=mean[j], stddev=stddev[j])
            block = self.strategy.noise_block(req)
            xi_all[sl] = block
            vv[sl] = ou_update(vv[sl], coeff, self.dt, block)
        ens.velocities[order] = vv
        if self.homogeneous and self.frozen is not None:
            a = np.exp(-self.dt / self.frozen.tau)
            b = np.sqrt((2.0 * self.frozen.energy / 3.0) * (1.0 - a * a))
            self.strategy.on_velocity_update(a, b, self.frozen.mean, xi_all)
        if not self.homogeneous:
            coords = ens.positions[:, self.grid.axis].copy()
            draw_fns = {face: (lambda n, f=face: self.strategy.wall_uniforms(f, n))
                        for face in self.walls}
            apply_diffuse_walls(coords, ens.velocities, self.dt, self.grid,
                                self.walls, self.gas, draw_fns)
            ens.positions[:, self.grid.axis] = coords
            reassign_cells(ens, self.grid)
        return ens
