"""Molecular dynamics engine: truncated Lennard-Jones forces over a
linked-cell index, Velocity Verlet stepping, cell-averaged long-range
force correction, velocity-rescaling thermostat, and binned field
extraction.

The computational box is elongated along x (reflecting walls in
production runs, periodic during thermalization) and periodic in y and
z.  Cells partition only the x axis; a particle interacts with its own
and the two neighboring cells, which is exact because the cell length
exceeds the interaction cutoff.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange


@dataclass
class MdConfig:
    """Molecular dynamics parameters (reduced Lennard-Jones units)."""

    sigma: float = 1.0
    epsilon: float = 1.0
    r_cutoff: float = 2.5
    mass: float = 1.0
    n_particles: int = 32768
    dt: float = 1e-3
    n_steps: int = 1000            # outer processing iterations
    f_pr: int = 100                # verlet steps per processing iteration
    f_sort: int = 20               # cell rebuild period
    cell_factor: float = 1.2      # cell length = cell_factor * sigma * r_cutoff
    w: float = 3.5                 # transversal box width factor
    alpha_dom: float = 3.0         # subdomain length ratio
    alpha_max: float = 0.99        # particle ratio clamp
    n_therm_steps: int = 500
    f_th: int = 100                # thermostat period during thermalization
    gamma_rbf: float = 5e-4
    alpha_track: float = 0.1       # tracking window fraction of the box
    n_buffer: int = 5              # interface position buffer for regression
    w_sr: float = 50.0             # sampling region width
    o_sr: float = 2.5              # sampling region offset from the interface
    alpha_t_smpl: float = 0.2      # burn-in fraction for time averaging
    rng_seed: int = 0
    long_range: bool = True

    def __post_init__(self):
        positive = (self.sigma, self.epsilon, self.r_cutoff, self.mass, self.dt,
                    self.n_steps, self.f_pr, self.f_sort, self.cell_factor, self.w,
                    self.alpha_dom, self.n_therm_steps, self.f_th, self.gamma_rbf,
                    self.alpha_track, self.n_buffer, self.w_sr, self.n_particles)
        if min(positive) <= 0:
            raise ValueError("MdConfig parameters must be positive")
        if not 0.0 < self.alpha_max < 1.0:
            raise ValueError("alpha_max must lie in (0, 1)")
        if not 0.0 <= self.alpha_t_smpl <= 1.0:
            raise ValueError("alpha_t_smpl must lie in [0, 1]")
        if self.o_sr < 0.0:
            raise ValueError("o_sr must be non-negative")

    @property
    def cell_length(self) -> float:
        return self.cell_factor * self.sigma * self.r_cutoff

    @property
    def l_yz(self) -> float:
        return self.w * self.sigma * self.r_cutoff


@dataclass
class CellIndex:
    """Linked-cell bookkeeping over the x axis (valid as of the last sort)."""

    dc: float
    start: np.ndarray          # (n_cells+1,) slice bounds into the sorted arrays
    particle_cell: np.ndarray  # (N,) cell id per particle
    centers: np.ndarray        # (n_cells,)
    widths: np.ndarray         # (n_cells,)
    lr_force: np.ndarray       # (n_cells,) x-direction long-range force

    @property
    def n_cells(self) -> int:
        return self.centers.shape[0]


@dataclass
class ParticleSystem:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    vz: np.ndarray
    ax: np.ndarray = None
    ay: np.ndarray = None
    az: np.ndarray = None
    box: tuple = (1.0, 1.0, 1.0)   # (l_dom, h_dom, h_dom)
    mass: float = 1.0
    periodic_x: bool = False
    step_index: int = 0
    cells: CellIndex | None = None
    wall_hits_last_step: int = 0

    def __post_init__(self):
        for name in ("x", "y", "z", "vx", "vy", "vz"):
            setattr(self, name, np.ascontiguousarray(getattr(self, name), dtype=float))
        for name in ("ax", "ay", "az"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros_like(self.x))
            else:
                setattr(self, name, np.ascontiguousarray(getattr(self, name), dtype=float))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def momentum(self) -> np.ndarray:
        return self.mass * np.array([self.vx.sum(), self.vy.sum(), self.vz.sum()])

    def kinetic_energy(self) -> float:
        return 0.5 * self.mass * float(
            np.sum(self.vx**2) + np.sum(self.vy**2) + np.sum(self.vz**2)
        )


def lj_potential(r, cfg: MdConfig):
    """Truncated Lennard-Jones pair potential (zero at and beyond the cutoff)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("pair distance must be positive")
    sr6 = (cfg.sigma / r) ** 6
    phi = 4.0 * cfg.epsilon * (sr6**2 - sr6)
    return np.where(r < cfg.r_cutoff, phi, 0.0)[()]


def lj_potential_full(r, cfg: MdConfig):
    """Untruncated Lennard-Jones potential (used by the long-range force)."""
    r = np.asarray(r, dtype=float)
    sr6 = (cfg.sigma / r) ** 6
    return 4.0 * cfg.epsilon * (sr6**2 - sr6)


def pair_force(dx, cfg: MdConfig) -> np.ndarray:
    """Force on the particle at +dx exerted by a particle at the origin."""
    dx = np.asarray(dx, dtype=float)
    r2 = float(np.dot(dx, dx))
    if r2 <= 0.0:
        raise ValueError("zero separation between particles")
    if r2 >= cfg.r_cutoff**2:
        return np.zeros_like(dx)
    sr2 = cfg.sigma**2 / r2
    sr6 = sr2**3
    coeff = 24.0 * cfg.epsilon * (2.0 * sr6**2 - sr6) / r2
    return coeff * dx


def build_cells(system: ParticleSystem, cfg: MdConfig) -> None:
    """Sort particles by x and rebuild the cell index (in place).

    The long-range forces depend only on the per-cell occupation counts,
    which are frozen between sorts, so they are precomputed here.
    """
    lx = system.box[0]
    dc = cfg.cell_length
    n_cells = max(1, int(np.floor(lx / dc)))
    order = np.argsort(system.x, kind="stable")
    for name in ("x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az"):
        setattr(system, name, np.ascontiguousarray(getattr(system, name)[order]))
    particle_cell = np.minimum((system.x / dc).astype(np.int64), n_cells - 1)
    start = np.searchsorted(particle_cell, np.arange(n_cells + 1))
    edges = np.concatenate([np.arange(n_cells) * dc, [lx]])
    centers = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    counts = np.diff(start)
    if cfg.long_range and not system.periodic_x and n_cells > 3:
        lr = _long_range_forces(centers, widths, counts.astype(float),
                                system.mass, cfg)
    else:
        lr = np.zeros(n_cells)
    system.cells = CellIndex(dc, start, particle_cell, centers, widths, lr)


def long_range_force(cell_densities, centers, widths, cfg: MdConfig) -> np.ndarray:
    """Per-cell mean-field x-force restoring the truncated potential tails.

    Cell k feels the sum over all non-neighboring cells l of
    2 pi (c_k - c_l) phi(|c_k - c_l|) rho_l w_l with the untruncated
    potential (non-neighboring cells are beyond the cutoff by
    construction).
    """
    centers = np.asarray(centers, dtype=float)
    rho = np.asarray(cell_densities, dtype=float)
    widths = np.asarray(widths, dtype=float)
    d = centers[:, None] - centers[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = lj_potential_full(np.abs(d), cfg)
    k = np.arange(centers.size)
    far = np.abs(k[:, None] - k[None, :]) > 1
    contrib = np.where(far, 2.0 * np.pi * d * phi * rho[None, :] * widths[None, :], 0.0)
    return contrib.sum(axis=1)


def _long_range_forces(centers, widths, counts, mass, cfg: MdConfig) -> np.ndarray:
    vol = widths * cfg.l_yz**2
    return long_range_force(mass * counts / vol, centers, widths, cfg)


@njit(parallel=True, fastmath=True, cache=True)
def _force_kernel(x, y, z, particle_cell, start, lr_force, fx, fy, fz,
                  rc2, sigma2, epsilon, lx, ly, lz, periodic_x):
    n = x.shape[0]
    n_cells = start.shape[0] - 1
    for i in prange(n):
        k = particle_cell[i]
        acc_x = lr_force[k]
        acc_y = 0.0
        acc_z = 0.0
        if periodic_x and n_cells < 3:
            lo_cell, hi_cell = 0, n_cells - 1
            wrap = False
        else:
            lo_cell, hi_cell = k - 1, k + 1
            wrap = periodic_x
        for kk_raw in range(lo_cell, hi_cell + 1):
            kk = kk_raw
            if wrap:
                if kk < 0:
                    kk += n_cells
                elif kk >= n_cells:
                    kk -= n_cells
            elif kk < 0 or kk >= n_cells:
                continue
            for j in range(start[kk], start[kk + 1]):
                if j == i:
                    continue
                dx = x[i] - x[j]
                if periodic_x:
                    dx -= lx * np.rint(dx / lx)
                dy = y[i] - y[j]
                dy -= ly * np.rint(dy / ly)
                dz = z[i] - z[j]
                dz -= lz * np.rint(dz / lz)
                r2 = dx * dx + dy * dy + dz * dz
                if r2 < rc2:
                    sr2 = sigma2 / r2
                    sr6 = sr2 * sr2 * sr2
                    coeff = 24.0 * epsilon * (2.0 * sr6 * sr6 - sr6) / r2
                    acc_x += coeff * dx
                    acc_y += coeff * dy
                    acc_z += coeff * dz
        fx[i] = acc_x
        fy[i] = acc_y
        fz[i] = acc_z


@njit(parallel=True, fastmath=True, cache=True)
def _potential_kernel(x, y, z, particle_cell, start, rc2, sigma2, epsilon,
                      lx, ly, lz, periodic_x):
    n = x.shape[0]
    n_cells = start.shape[0] - 1
    total = 0.0
    for i in prange(n):
        k = particle_cell[i]
        acc = 0.0
        if periodic_x and n_cells < 3:
            lo_cell, hi_cell = 0, n_cells - 1
            wrap = False
        else:
            lo_cell, hi_cell = k - 1, k + 1
            wrap = periodic_x
        for kk_raw in range(lo_cell, hi_cell + 1):
            kk = kk_raw
            if wrap:
                if kk < 0:
                    kk += n_cells
                elif kk >= n_cells:
                    kk -= n_cells
            elif kk < 0 or kk >= n_cells:
                continue
            for j in range(start[kk], start[kk + 1]):
                if j == i:
                    continue
                dx = x[i] - x[j]
                if periodic_x:
                    dx -= lx * np.rint(dx / lx)
                dy = y[i] - y[j]
                dy -= ly * np.rint(dy / ly)
                dz = z[i] - z[j]
                dz -= lz * np.rint(dz / lz)
                r2 = dx * dx + dy * dy + dz * dz
                if r2 < rc2:
                    sr2 = sigma2 / r2
                    sr6 = sr2 * sr2 * sr2
                    acc += 4.0 * epsilon * (sr6 * sr6 - sr6)
        total += 0.5 * acc
    return total


def compute_forces(system: ParticleSystem, cfg: MdConfig):
    """Fill the acceleration arrays from pair and long-range forces."""
    if system.cells is None:
        build_cells(system, cfg)
    cells = system.cells
    n = system.n
    fx = np.empty(n)
    fy = np.empty(n)
    fz = np.empty(n)
    _force_kernel(system.x, system.y, system.z, cells.particle_cell, cells.start,
                  cells.lr_force, fx, fy, fz, cfg.r_cutoff**2, cfg.sigma**2,
                  cfg.epsilon, system.box[0], system.box[1], system.box[2],
                  system.periodic_x)
    inv_m = 1.0 / system.mass
    system.ax = fx * inv_m
    system.ay = fy * inv_m
    system.az = fz * inv_m


def potential_energy(system: ParticleSystem, cfg: MdConfig) -> float:
    """Total truncated pair potential energy (no tail or shift terms)."""
    if system.cells is None:
        build_cells(system, cfg)
    cells = system.cells
    return float(
        _potential_kernel(system.x, system.y, system.z, cells.particle_cell,
                          cells.start, cfg.r_cutoff**2, cfg.sigma**2, cfg.epsilon,
                          system.box[0], system.box[1], system.box[2],
                          system.periodic_x)
    )


def apply_boundaries(system: ParticleSystem) -> int:
    """Wrap periodic directions and mirror-reflect at the x walls.

    Returns the number of particles that touched an x wall.
    """
    lx, ly, lz = system.box
    system.y -= ly * np.floor(system.y / ly)
    system.z -= lz * np.floor(system.z / lz)
    if system.periodic_x:
        system.x -= lx * np.floor(system.x / lx)
        return 0
    k = np.floor(system.x / lx)
    outside = k != 0.0
    hits = int(np.count_nonzero(outside))
    if hits:
        xm = system.x - 2.0 * lx * np.floor(system.x / (2.0 * lx))
        system.x = np.where(xm > lx, 2.0 * lx - xm, xm)
        flip = (k % 2.0) != 0.0
        system.vx = np.where(flip, -system.vx, system.vx)
        # Guard against landing exactly on the upper wall.
        np.clip(system.x, 0.0, np.nextafter(lx, 0.0), out=system.x)
    return hits


def verlet_step(system: ParticleSystem, cfg: MdConfig) -> None:
    """One Velocity Verlet step: drift, boundaries, half-kick, new forces,
    half-kick.  Cells are rebuilt every ``f_sort`` steps."""
    if system.cells is None or system.step_index % cfg.f_sort == 0:
        build_cells(system, cfg)
    dt = cfg.dt
    system.x += dt * system.vx + 0.5 * dt * dt * system.ax
    system.y += dt * system.vy + 0.5 * dt * dt * system.ay
    system.z += dt * system.vz + 0.5 * dt * dt * system.az
    system.wall_hits_last_step = apply_boundaries(system)
    system.vx += 0.5 * dt * system.ax
    system.vy += 0.5 * dt * system.ay
    system.vz += 0.5 * dt * system.az
    compute_forces(system, cfg)
    system.vx += 0.5 * dt * system.ax
    system.vy += 0.5 * dt * system.ay
    system.vz += 0.5 * dt * system.az
    system.step_index += 1


def region_mask(system: ParticleSystem, region) -> np.ndarray:
    if region is None:
        return np.ones(system.n, dtype=bool)
    lo, hi = region
    return (system.x >= lo) & (system.x < hi)


def instantaneous_temperature(system: ParticleSystem, region=None) -> float:
    """Kinetic temperature (1/3) <m |v - v_mean|^2> over a region."""
    mask = region_mask(system, region)
    count = int(np.count_nonzero(mask))
    if count == 0:
        return float("nan")
    vx, vy, vz = system.vx[mask], system.vy[mask], system.vz[mask]
    mvx, mvy, mvz = vx.mean(), vy.mean(), vz.mean()
    sq = np.sum((vx - mvx) ** 2) + np.sum((vy - mvy) ** 2) + np.sum((vz - mvz) ** 2)
    return float(system.mass * sq / (3.0 * count))


def apply_thermostat(system: ParticleSystem, T_ref: float, region=None) -> float:
    """Velocity-rescaling thermostat: scales peculiar velocities by
    sqrt(T_ref / T_inst), preserving the region's mean velocity.

    Returns the rescale factor; an empty or single-particle region is a
    warned no-op.
    """
    mask = region_mask(system, region)
    count = int(np.count_nonzero(mask))
    if count < 2:
        warnings.warn("thermostat region holds fewer than 2 particles; skipping")
        return 1.0
    t_inst = instantaneous_temperature(system, region)
    if t_inst <= 0.0:
        warnings.warn("thermostat region has zero temperature; skipping")
        return 1.0
    lam = float(np.sqrt(T_ref / t_inst))
    for name in ("vx", "vy", "vz"):
        v = getattr(system, name)
        mean = v[mask].mean()
        v[mask] = mean + lam * (v[mask] - mean)
    return lam


@dataclass
class FieldProfile:
    edges: np.ndarray
    rho: np.ndarray
    momentum: np.ndarray   # (n_bins, 3)
    T: np.ndarray          # NaN in empty bins


def instantaneous_fields(system: ParticleSystem, n_bins: int) -> FieldProfile:
    """Binned density, momentum density, and kinetic temperature along x."""
    if n_bins < 1:
        raise ValueError("need at least one bin")
    lx, ly, lz = system.box
    width = lx / n_bins
    idx = np.clip((system.x / width).astype(np.int64), 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    vol = width * ly * lz
    m = system.mass
    rho = m * counts / vol
    momentum = np.column_stack([
        m * np.bincount(idx, weights=v, minlength=n_bins) / vol
        for v in (system.vx, system.vy, system.vz)
    ])
    T = np.full(n_bins, np.nan)
    occupied = counts > 0
    if occupied.any():
        sums = np.column_stack([
            np.bincount(idx, weights=v, minlength=n_bins)
            for v in (system.vx, system.vy, system.vz)
        ])
        sq = sum(np.bincount(idx, weights=v**2, minlength=n_bins)
                 for v in (system.vx, system.vy, system.vz))
        c = counts[occupied].astype(float)
        mean_sq = (sums[occupied] ** 2).sum(axis=1) / c
        T[occupied] = m * (sq[occupied] - mean_sq) / (3.0 * c)
    return FieldProfile(np.linspace(0.0, lx, n_bins + 1), rho, momentum, T)


def maxwell_boltzmann_velocities(n: int, T: float, mass: float,
                                 rng: np.random.Generator) -> np.ndarray:
    """Seeded Maxwell-Boltzmann draw with the mean removed, shape (n, 3)."""
    v = rng.normal(0.0, np.sqrt(T / mass), size=(n, 3))
    return v - v.mean(axis=0)


def brute_force_forces(system: ParticleSystem, cfg: MdConfig) -> np.ndarray:
    """All-pairs O(N^2) cutoff forces (no cells, no long-range term).

    Reference path for the built-in verification of the linked-cell
    traversal; returns an (N, 3) force array in the current particle
    order.
    """
    lx, ly, lz = system.box
    dx = system.x[:, None] - system.x[None, :]
    if system.periodic_x:
        dx -= lx * np.rint(dx / lx)
    dy = system.y[:, None] - system.y[None, :]
    dy -= ly * np.rint(dy / ly)
    dz = system.z[:, None] - system.z[None, :]
    dz -= lz * np.rint(dz / lz)
    r2 = dx**2 + dy**2 + dz**2
    np.fill_diagonal(r2, np.inf)
    with np.errstate(divide="ignore"):
        sr2 = cfg.sigma**2 / r2
        sr6 = sr2**3
        coeff = np.where(r2 < cfg.r_cutoff**2,
                         24.0 * cfg.epsilon * (2.0 * sr6**2 - sr6) / r2, 0.0)
    return np.column_stack([(coeff * d).sum(axis=1) for d in (dx, dy, dz)])
