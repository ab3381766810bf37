"""Molecular-scale interface solver.

Sets up a two-phase Riemann problem as a particle configuration
(lattice placement, per-subdomain thermalization, bulk velocities),
advances it with the MD engine, tracks the phase boundary through the
gradient of a smoothed density field, samples the wave-adjacent states
with Irving-Kirkwood averages, and time-averages the results into an
interface-solver response.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..eos import EosModel, InterfaceState, Phase
from ..solvers import RiemannResult, SolverError
from .core import (
    FieldProfile,
    MdConfig,
    ParticleSystem,
    apply_thermostat,
    instantaneous_fields,
    maxwell_boltzmann_velocities,
    verlet_step,
)


class TrackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RiemannSetup:
    """Geometry derived from the Riemann data and the particle budget."""

    left: InterfaceState
    right: InterfaceState
    n_left: int
    n_right: int
    l_left: float
    l_right: float
    l_yz: float
    l_gap: float

    @property
    def l_dom(self) -> float:
        return self.l_left + self.l_right


def plan_riemann(left: InterfaceState, right: InterfaceState, cfg: MdConfig) -> RiemannSetup:
    """Split the particle budget and box between the two subdomains.

    The particle ratio alpha = (1 + alpha_dom rho_v / rho_l)^-1 fixes the
    subdomain length ratio; each subdomain length then realizes the
    target density exactly for its particle count.
    """
    alpha = 1.0 / (1.0 + cfg.alpha_dom * right.rho / left.rho)
    alpha = min(max(alpha, 1.0 - cfg.alpha_max), cfg.alpha_max)
    n_left = int(round(alpha * cfg.n_particles))
    n_right = cfg.n_particles - n_left
    if n_left < 2 or n_right < 2:
        raise SolverError("particle split leaves a subdomain nearly empty")
    l_yz = cfg.l_yz
    l_left = cfg.mass * n_left / (left.rho * l_yz**2)
    l_right = cfg.mass * n_right / (right.rho * l_yz**2)
    l_gap = 2.0 ** (1.0 / 6.0) * cfg.sigma
    return RiemannSetup(left, right, n_left, n_right, l_left, l_right, l_yz, l_gap)


def lattice_positions(n: int, lx: float, ly: float, lz: float,
                      min_spacing: float) -> np.ndarray:
    """n near-uniform lattice sites inside [0,lx) x [0,ly) x [0,lz).

    A regular grid with at least n sites is thinned evenly to exactly n,
    keeping the density uniform.  Raises if the required spacing falls
    below ``min_spacing`` (overlapping particles).
    """
    target = (lx * ly * lz / n) ** (1.0 / 3.0)
    if target < min_spacing:
        raise SolverError(
            f"lattice capacity exceeded: spacing {target:.3f} < {min_spacing:.3f}"
        )
    counts = [max(1, math.ceil(lx / target)), max(1, math.ceil(ly / target)),
              max(1, math.ceil(lz / target))]
    sizes = (lx, ly, lz)
    while counts[0] * counts[1] * counts[2] < n:
        spacings = [sizes[i] / counts[i] for i in range(3)]
        counts[int(np.argmax(spacings))] += 1
    nx, ny, nz = counts
    ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    pts = np.column_stack([
        (ix.ravel() + 0.5) * lx / nx,
        (iy.ravel() + 0.5) * ly / ny,
        (iz.ravel() + 0.5) * lz / nz,
    ])
    total = pts.shape[0]
    keep = np.floor(np.arange(n) * total / n).astype(np.int64)
    return pts[keep]


def _thermalized_subdomain(state: InterfaceState, n: int, length: float,
                           cfg: MdConfig, rng: np.random.Generator) -> ParticleSystem:
    """Equilibrate one closed (fully periodic) subdomain at its target
    temperature, then impose the bulk velocity."""
    pts = lattice_positions(n, length, cfg.l_yz, cfg.l_yz, 0.85 * cfg.sigma)
    vel = maxwell_boltzmann_velocities(n, state.T, cfg.mass, rng)
    system = ParticleSystem(
        x=pts[:, 0], y=pts[:, 1], z=pts[:, 2],
        vx=vel[:, 0], vy=vel[:, 1], vz=vel[:, 2],
        box=(length, cfg.l_yz, cfg.l_yz), mass=cfg.mass, periodic_x=True,
    )
    for i in range(cfg.n_therm_steps):
        verlet_step(system, cfg)
        if (i + 1) % cfg.f_th == 0:
            apply_thermostat(system, state.T)
    system.vx -= system.vx.mean()
    system.vy -= system.vy.mean()
    system.vz -= system.vz.mean()
    system.vx += state.v
    return system


def init_riemann(left: InterfaceState, right: InterfaceState, cfg: MdConfig,
                 eos: EosModel, rng: np.random.Generator) -> tuple[ParticleSystem, RiemannSetup]:
    """Build the initial particle configuration for a two-phase Riemann
    problem: thermalized liquid and vapor slabs joined with a small gap,
    reflecting walls along x."""
    if eos.classify_phase(left.rho, left.T) != Phase.LIQUID:
        raise SolverError(f"left state {left} is not in the liquid phase")
    if eos.classify_phase(right.rho, right.T) != Phase.VAPOR:
        raise SolverError(f"right state {right} is not in the vapor phase")
    setup = plan_riemann(left, right, cfg)
    half_gap = 0.5 * setup.l_gap
    liq = _thermalized_subdomain(left, setup.n_left, setup.l_left - half_gap, cfg, rng)
    vap = _thermalized_subdomain(right, setup.n_right, setup.l_right - half_gap, cfg, rng)
    system = ParticleSystem(
        x=np.concatenate([liq.x, vap.x + setup.l_left + half_gap]),
        y=np.concatenate([liq.y, vap.y]),
        z=np.concatenate([liq.z, vap.z]),
        vx=np.concatenate([liq.vx, vap.vx]),
        vy=np.concatenate([liq.vy, vap.vy]),
        vz=np.concatenate([liq.vz, vap.vz]),
        box=(setup.l_dom, cfg.l_yz, cfg.l_yz),
        mass=cfg.mass,
        periodic_x=False,
    )
    return system, setup


def rbf_density(x_eval, system: ParticleSystem, gamma: float):
    """Smoothed one-dimensional density: Gaussian kernels on particle x."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    x_eval = np.asarray(x_eval, dtype=float)
    pref = math.sqrt(gamma / math.pi) * system.mass
    if x_eval.ndim == 0:
        return pref * float(np.sum(np.exp(-gamma * (float(x_eval) - system.x) ** 2)))
    return pref * np.array(
        [np.sum(np.exp(-gamma * (xe - system.x) ** 2)) for xe in x_eval]
    )


def rbf_density_dx(x_eval, system: ParticleSystem, gamma: float):
    """x-derivative of :func:`rbf_density`."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    x_eval = np.asarray(x_eval, dtype=float)
    pref = -2.0 * math.sqrt(gamma**3 / math.pi) * system.mass

    def one(xe):
        d = xe - system.x
        return float(np.sum(d * np.exp(-gamma * d**2)))

    if x_eval.ndim == 0:
        return pref * one(float(x_eval))
    return pref * np.array([one(xe) for xe in x_eval])


@dataclass
class InterfaceTrack:
    """Ring buffer of interface positions with a regression speed estimate."""

    n_buffer: int
    times: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    speed: float = 0.0

    @property
    def position(self) -> float:
        return self.positions[-1]

    def push(self, t: float, pos: float) -> None:
        if self.times and t <= self.times[-1]:
            raise TrackingError("timestamps must be strictly increasing")
        self.times.append(t)
        self.positions.append(pos)
        if len(self.times) > self.n_buffer:
            del self.times[0]
            del self.positions[0]
        if len(self.times) >= 2:
            slope = np.polyfit(self.times, self.positions, 1)[0]
            self.speed = float(slope)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-9) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def track_interface(system: ParticleSystem, track: InterfaceTrack, t: float,
                    cfg: MdConfig, n_scan: int = 101) -> InterfaceTrack:
    """Locate the interface as the maximizer of |d rho/dx| near its last
    position and update the speed regression."""
    l_dom = system.box[0]
    w_track = cfg.alpha_track * l_dom
    lo = max(0.0, track.position - w_track)
    hi = min(l_dom, track.position + w_track)
    if not hi > lo:
        raise TrackingError(f"empty tracking window around {track.position}")
    xs = np.linspace(lo, hi, n_scan)
    vals = np.abs(rbf_density_dx(xs, system, cfg.gamma_rbf))
    best = int(np.argmax(vals))
    a = xs[max(best - 1, 0)]
    b = xs[min(best + 1, n_scan - 1)]
    f = lambda xe: abs(rbf_density_dx(xe, system, cfg.gamma_rbf))
    pos = _golden_max(f, a, b, tol=1e-6 * l_dom)
    track.push(t, pos)
    return track


def sample_interface_states(system: ParticleSystem, gamma_pos: float, cfg: MdConfig):
    """Irving-Kirkwood averages in the two sampling slabs beside the
    interface.

    Returns (left_state, right_state, valid); a slab with fewer than two
    particles marks the sample invalid.
    """
    h = system.box[1]
    vol = cfg.w_sr * h * h
    results = []
    valid = True
    for lo, hi in (
        (gamma_pos - cfg.w_sr - cfg.o_sr, gamma_pos - cfg.o_sr),
        (gamma_pos + cfg.o_sr, gamma_pos + cfg.w_sr + cfg.o_sr),
    ):
        mask = (system.x >= lo) & (system.x <= hi)
        count = int(np.count_nonzero(mask))
        if count < 2:
            valid = False
            results.append(InterfaceState(rho=count * system.mass / vol, v=0.0, T=0.0))
            continue
        rho = count * system.mass / vol
        vx, vy, vz = system.vx[mask], system.vy[mask], system.vz[mask]
        mean = np.array([vx.mean(), vy.mean(), vz.mean()])
        sq = np.sum((vx - mean[0]) ** 2) + np.sum((vy - mean[1]) ** 2) + np.sum((vz - mean[2]) ** 2)
        T = system.mass * sq / (3.0 * count)
        results.append(InterfaceState(rho=rho, v=float(mean[0]), T=float(T)))
    return results[0], results[1], valid


@dataclass
class MdRunDiagnostics:
    track: InterfaceTrack
    samples: list                 # per-iteration (t, left, right, s, valid)
    n_averaged: int
    final_profile: FieldProfile | None = None


def solve_interface_md(left: InterfaceState, right: InterfaceState, cfg: MdConfig,
                       eos: EosModel, profile_bins: int = 0,
                       ) -> tuple[RiemannResult, MdRunDiagnostics]:
    """Run the full molecular interface solver.

    Initializes the Riemann configuration, advances n_steps processing
    iterations of f_pr Verlet steps each, tracks and samples every
    iteration, and averages the sampled states and speed over the
    iterations past the burn-in fraction alpha_t_smpl.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    system, setup = init_riemann(left, right, cfg, eos, rng)
    track = InterfaceTrack(n_buffer=cfg.n_buffer)
    track.push(0.0, setup.l_left)
    samples = []
    for n in range(1, cfg.n_steps + 1):
        for _ in range(cfg.f_pr):
            verlet_step(system, cfg)
        t = system.step_index * cfg.dt
        track_interface(system, track, t, cfg)
        s_left, s_right, ok = sample_interface_states(system, track.position, cfg)
        samples.append((t, s_left, s_right, track.speed, ok))

    start = max(1, math.ceil(cfg.alpha_t_smpl * cfg.n_steps))
    window = samples[start - 1 :]
    valid = all(s[4] for s in window) and len(window) > 0

    def avg(getter):
        return float(np.mean([getter(s) for s in window]))

    star_left = InterfaceState(
        rho=avg(lambda s: s[1].rho), v=avg(lambda s: s[1].v), T=avg(lambda s: s[1].T)
    )
    star_right = InterfaceState(
        rho=avg(lambda s: s[2].rho), v=avg(lambda s: s[2].v), T=avg(lambda s: s[2].T)
    )
    s_avg = avg(lambda s: s[3])
    result = RiemannResult.from_states(star_left, star_right, s_avg, valid=valid)
    if not result.is_finite():
        result = replace(result, valid=False)
    profile = instantaneous_fields(system, profile_bins) if profile_bins else None
    diag = MdRunDiagnostics(track=track, samples=samples,
                            n_averaged=len(window), final_profile=profile)
    return result, diag


def make_md_solver(cfg: MdConfig, eos: EosModel):
    """Adapt the MD run to the common interface-solver signature."""

    def solve(left: InterfaceState, right: InterfaceState, seed: int = 0) -> RiemannResult:
        result, _ = solve_interface_md(left, right, replace(cfg, rng_seed=seed), eos)
        return result

    return solve
