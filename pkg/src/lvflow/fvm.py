"""Conservative finite volume scheme on a 1D moving mesh with a tracked
phase-boundary vertex, plus the multiscale driver that couples it to an
interface solver.

The bulk phases are updated with the Lax-Friedrichs flux on static
surfaces; the single interface surface is updated from the star states
and speed returned by the interface solver, the interface vertex is
advected with that speed, and the adjacent cell data is rescaled by the
old/new volume ratio so the motion stays conservative.  The general-d
vertex-motion solve and the linear motion contribution of the full
scheme are implemented standalone; in 1D the former is scalar and the
latter vanishes because bulk vertices do not move.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .eos import ConservedState, EosModel, InterfaceState, Phase, cons_to_prim, prim_to_cons
from .solvers import SolverError


class CflError(RuntimeError):
    """Time step too large for the current mesh and wave speeds."""


class PhaseRegionError(RuntimeError):
    """An updated state left the phase region of its cell label."""


class MeshError(RuntimeError):
    pass


@dataclass
class FvConfig:
    dt: float = 1e-5
    dx: float = 1e-3
    alpha_lf: float = 1.0
    lambda_motion: float = 1e-4
    t_end: float = 0.1
    domain: tuple = (-1.0, 1.0)
    # Ghost states for inflow boundaries; None means outflow (copy).
    left_ghost: ConservedState | None = None
    right_ghost: ConservedState | None = None
    check_phases: bool = True

    def __post_init__(self):
        if self.dt <= 0.0 or self.dx <= 0.0:
            raise ValueError("dt and dx must be positive")

    @property
    def dx_min(self) -> float:
        return 0.5 * self.dx

    @property
    def dx_max(self) -> float:
        return 1.5 * self.dx


@dataclass
class MovingMesh1D:
    """Sorted vertex array with cell states and one moving interface vertex.

    ``states`` holds the conserved variables (rho, m, E) per cell; cells
    left of ``interface_vertex`` carry ``left_phase``, the rest
    ``right_phase``.
    """

    vertices: np.ndarray
    states: np.ndarray
    interface_vertex: int
    left_phase: Phase
    right_phase: Phase
    dx_min: float
    dx_max: float

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if np.any(np.diff(self.vertices) <= 0.0):
            raise MeshError("vertices must be strictly increasing")
        if self.states.shape != (self.n_cells, 3):
            raise MeshError("states must have shape (n_cells, 3)")
        if not 1 <= self.interface_vertex <= self.n_cells - 1:
            raise MeshError("interface vertex must be interior")

    @property
    def n_cells(self) -> int:
        return self.vertices.shape[0] - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.vertices)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.vertices[:-1] + self.vertices[1:])

    @property
    def interface_position(self) -> float:
        return float(self.vertices[self.interface_vertex])

    def phase_of_cell(self, i: int) -> Phase:
        return self.left_phase if i < self.interface_vertex else self.right_phase

    def totals(self) -> np.ndarray:
        """Domain totals of (mass, momentum, energy)."""
        return self.widths @ self.states

    def copy(self) -> "MovingMesh1D":
        return MovingMesh1D(
            self.vertices.copy(), self.states.copy(), self.interface_vertex,
            self.left_phase, self.right_phase, self.dx_min, self.dx_max,
        )


def build_mesh(cfg: FvConfig, interface_pos: float, left_prim, right_prim,
               eos: EosModel) -> MovingMesh1D:
    """Uniform mesh over cfg.domain with a vertex snapped to the interface.

    ``left_prim``/``right_prim`` are (rho, v, T) triples filling their
    respective sides; phase labels are classified from them.
    """
    lo, hi = cfg.domain
    if not lo < interface_pos < hi:
        raise MeshError("interface must lie inside the domain")
    n_left = max(1, round((interface_pos - lo) / cfg.dx))
    n_right = max(1, round((hi - interface_pos) / cfg.dx))
    vertices = np.concatenate(
        [np.linspace(lo, interface_pos, n_left + 1),
         np.linspace(interface_pos, hi, n_right + 1)[1:]]
    )
    def as_state(prim):
        rho, v, T = prim
        U = prim_to_cons(rho, [v], T, eos)
        return np.array([U.rho, U.m[0], U.E])

    states = np.empty((n_left + n_right, 3))
    states[:n_left] = as_state(left_prim)
    states[n_left:] = as_state(right_prim)
    left_phase = eos.classify_phase(left_prim[0], left_prim[2])
    right_phase = eos.classify_phase(right_prim[0], right_prim[2])
    return MovingMesh1D(vertices, states, n_left, left_phase, right_phase,
                        cfg.dx_min, cfg.dx_max)


def project_state(U: ConservedState, n, eos: EosModel):
    """Project a conserved state onto the direction ``n``.

    Returns ((rho, m.n, T), U_perp) where U_perp keeps the transversal
    momentum so that :func:`lift_state` restores the full state exactly.
    """
    n = np.atleast_1d(np.asarray(n, dtype=float))
    rho, v, T = cons_to_prim(U, eos)
    m_n = float(np.dot(U.m, n))
    m_perp = U.m - m_n * n
    return (U.rho, m_n, T), ConservedState(0.0, m_perp, 0.0)


def lift_state(u, n, U_perp: ConservedState, eos: EosModel) -> ConservedState:
    """Inverse of :func:`project_state` for a (rho, m_n, T) triple."""
    rho, m_n, T = u
    n = np.atleast_1d(np.asarray(n, dtype=float))
    m = m_n * n + U_perp.m
    eps = eos.internal_energy(rho, T)
    E = rho * eps + float(np.dot(m, m)) / (2.0 * rho)
    return ConservedState(rho, m, E)


def euler_flux(states: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Physical Euler flux along +x for conserved states (…, 3)."""
    states = np.atleast_2d(states)
    p = np.atleast_1d(p)
    rho, m, E = states[:, 0], states[:, 1], states[:, 2]
    return np.column_stack([m, m**2 / rho + p, (E + p) * m / rho])


def lax_friedrichs(u_left: np.ndarray, u_right: np.ndarray,
                   p_left, p_right, alpha_lf: float) -> np.ndarray:
    """Lax-Friedrichs numerical flux along +x between neighboring states.

    0.5 (f(U_l) + f(U_r)) - alpha_lf (U_r - U_l); the dissipation
    parameter absorbs the conventional factor 1/2.
    """
    fl = euler_flux(u_left, p_left)
    fr = euler_flux(u_right, p_right)
    return 0.5 * (fl + fr) - alpha_lf * (np.atleast_2d(u_right) - np.atleast_2d(u_left))


def vertex_motion(normals, speeds, lam: float) -> np.ndarray:
    """Vertex motion from per-surface normal speeds.

    Solves the Tikhonov-regularized normal equations
    (N^T N + lam I) m = N^T s + lam m_bar, where the prior m_bar is the
    mean speed along the normalized mean normal.  With a single normal
    and lam = 0 this returns exactly speed * normal.
    """
    N = np.atleast_2d(np.asarray(normals, dtype=float))
    s = np.atleast_1d(np.asarray(speeds, dtype=float))
    if N.shape[0] != s.shape[0] or N.shape[0] < 1:
        raise ValueError("need one speed per normal")
    d = N.shape[1]
    A = N.T @ N + lam * np.eye(d)
    rhs = N.T @ s
    if lam > 0.0:
        n_bar = N.mean(axis=0)
        norm = np.linalg.norm(n_bar)
        m_bar = (s.mean() * n_bar / norm) if norm > 0.0 else np.zeros(d)
        rhs = rhs + lam * m_bar
    try:
        return np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "singular normal system; use lambda_motion > 0 to regularize"
        ) from None


def linear_motion_contribution(area_old: float, area_new: float,
                               state_i: np.ndarray, state_j: np.ndarray,
                               normal_old, normal_new, vertex_motions) -> np.ndarray:
    """Motion contribution of a bulk surface incident to moving vertices.

    Product of averaged area, averaged adjacent states, and the scalar
    product of averaged normal with the mean incident-vertex motion.
    Zero whenever no incident vertex moves (always, in 1D).
    """
    motions = np.atleast_2d(np.asarray(vertex_motions, dtype=float))
    n_avg = 0.5 * (np.atleast_1d(normal_old) + np.atleast_1d(normal_new))
    u_avg = 0.5 * (np.asarray(state_i, dtype=float) + np.asarray(state_j, dtype=float))
    return 0.5 * (area_old + area_new) * u_avg * float(np.dot(n_avg, motions.mean(axis=0)))


@dataclass
class StepReport:
    """Per-step bookkeeping used by conservation checks and trajectories."""

    s: float
    interface_position: float
    boundary_flux_left: np.ndarray
    boundary_flux_right: np.ndarray
    interface_defect: np.ndarray


def _primitives(states: np.ndarray, eos: EosModel):
    rho = states[:, 0]
    v = states[:, 1] / rho
    eps = states[:, 2] / rho - 0.5 * v**2
    T = eos.temperature_from_energy(rho, eps)
    p = eos.pressure(rho, T)
    return rho, v, T, p


def fv_step(mesh: MovingMesh1D, interface_solver, cfg: FvConfig, eos: EosModel) -> StepReport:
    """Advance the mesh by one time step in place.

    ``interface_solver(U_liq, U_vap, n) -> (U_liq*, U_vap*, s)`` operates
    on conserved states with the normal pointing from liquid to vapor.
    """
    w = mesh.widths
    states = mesh.states
    rho, v, T, p = _primitives(states, eos)
    c = np.sqrt(eos.sound_speed_squared(rho, T))
    max_lambda = float(np.max(np.abs(v) + c))

    iv = mesh.interface_vertex
    left_is_liquid = mesh.left_phase == Phase.LIQUID
    n_sign = 1.0 if left_is_liquid else -1.0
    U_left = ConservedState(states[iv - 1, 0], states[iv - 1, 1:2], states[iv - 1, 2])
    U_right = ConservedState(states[iv, 0], states[iv, 1:2], states[iv, 2])
    U_liq, U_vap = (U_left, U_right) if left_is_liquid else (U_right, U_left)
    star_liq, star_vap, s_n = interface_solver(U_liq, U_vap, np.array([n_sign]))
    s_x = s_n * n_sign

    if cfg.dt * (max_lambda + abs(s_x)) >= w.min():
        raise CflError(
            f"dt*(max|lambda|+|s|) = {cfg.dt * (max_lambda + abs(s_x)):.3e} "
            f"exceeds min cell width {w.min():.3e}"
        )

    star_left, star_right = (star_liq, star_vap) if left_is_liquid else (star_vap, star_liq)

    def moving_flux(U: ConservedState):
        r, vel, temp = cons_to_prim(U, eos)
        pr = eos.pressure(r, temp)
        state = np.array([U.rho, U.m[0], U.E])
        return euler_flux(state, pr)[0] - s_x * state

    flux_star_left = moving_flux(star_left)
    flux_star_right = moving_flux(star_right)

    # Bulk Lax-Friedrichs fluxes at every static vertex, ghosts included.
    def ghost_row(state: ConservedState | None, fallback_state, fallback_p):
        if state is None:
            return fallback_state, fallback_p
        row = np.array([state.rho, state.m[0], state.E])
        _, _, temp = cons_to_prim(state, eos)
        return row, eos.pressure(state.rho, temp)

    gl, pl = ghost_row(cfg.left_ghost, states[0], p[0])
    gr, pr = ghost_row(cfg.right_ghost, states[-1], p[-1])
    ext_states = np.vstack([gl, states, gr])
    ext_p = np.concatenate([[pl], p, [pr]])
    fluxes = lax_friedrichs(ext_states[:-1], ext_states[1:], ext_p[:-1], ext_p[1:],
                            cfg.alpha_lf)

    # Cell i gains flux through its left surface (vertex i) and loses it
    # through its right surface (vertex i+1); then swap the interface
    # surface over to the solver-provided moving fluxes.
    scale = (cfg.dt / w)[:, None]
    delta = (fluxes[:-1] - fluxes[1:]) * scale
    delta[iv - 1] += (fluxes[iv] - flux_star_left) * cfg.dt / w[iv - 1]
    delta[iv] += (flux_star_right - fluxes[iv]) * cfg.dt / w[iv]

    states += delta

    # Move the interface vertex and rescale the adjacent cell data with
    # the volume ratio so the shift remains conservative.
    motion = vertex_motion(np.array([[n_sign]]), np.array([s_n]), 0.0)[0]
    mesh.vertices[iv] += cfg.dt * motion
    w_new = mesh.widths
    states[iv - 1] *= w[iv - 1] / w_new[iv - 1]
    states[iv] *= w[iv] / w_new[iv]

    if cfg.check_phases:
        _check_phase_purity(mesh, eos)

    return StepReport(
        s=s_x,
        interface_position=mesh.interface_position,
        boundary_flux_left=fluxes[0].copy(),
        boundary_flux_right=fluxes[-1].copy(),
        interface_defect=flux_star_right - flux_star_left,
    )


def _check_phase_purity(mesh: MovingMesh1D, eos: EosModel) -> None:
    rho = mesh.states[:, 0]
    v = mesh.states[:, 1] / rho
    eps = mesh.states[:, 2] / rho - 0.5 * v**2
    T = eos.temperature_from_energy(rho, eps)
    phases = eos.classify_many(rho, T)
    iv = mesh.interface_vertex
    bad_left = np.nonzero(phases[:iv] != mesh.left_phase)[0]
    bad_right = np.nonzero(phases[iv:] != mesh.right_phase)[0]
    if bad_left.size or bad_right.size:
        i = int(bad_left[0]) if bad_left.size else int(bad_right[0]) + iv
        raise PhaseRegionError(
            f"cell {i} left its phase region: rho={rho[i]:.6g}, T={float(T[i]):.6g}, "
            f"classified {phases[i].value}"
        )


def remesh_1d(mesh: MovingMesh1D) -> MovingMesh1D:
    """Merge cells thinner than dx_min and split cells wider than dx_max.

    Merges average the conserved data volume-weighted into a same-phase
    neighbor and never cross the interface; splits copy the state.
    Totals of (rho, m, E) are preserved to rounding.
    """
    vertices = list(mesh.vertices)
    states = [row.copy() for row in mesh.states]
    iv = mesh.interface_vertex

    changed = True
    while changed:
        changed = False
        widths = np.diff(np.asarray(vertices))
        for i, width in enumerate(widths):
            if width < mesh.dx_min:
                j = _merge_partner(i, iv, len(states))
                if j is None:
                    raise MeshError(
                        f"cell {i} below dx_min with no same-phase neighbor"
                    )
                lo, hi = min(i, j), max(i, j)
                w_lo, w_hi = widths[lo], widths[hi]
                merged = (w_lo * states[lo] + w_hi * states[hi]) / (w_lo + w_hi)
                del vertices[lo + 1]
                states[lo] = merged
                del states[hi]
                if lo + 1 < iv:
                    iv -= 1
                changed = True
                break
            if width > mesh.dx_max:
                mid = 0.5 * (vertices[i] + vertices[i + 1])
                vertices.insert(i + 1, mid)
                states.insert(i, states[i].copy())
                if i + 1 <= iv:
                    iv += 1
                changed = True
                break

    return MovingMesh1D(
        np.asarray(vertices), np.asarray(states), iv,
        mesh.left_phase, mesh.right_phase, mesh.dx_min, mesh.dx_max,
    )


def _merge_partner(i: int, iv: int, n_cells: int):
    """Neighbor index to merge cell i into, or None; never crosses iv."""
    same_side = lambda a, b: (a < iv) == (b < iv)
    if i + 1 < n_cells and same_side(i, i + 1):
        return i + 1
    if i - 1 >= 0 and same_side(i, i - 1):
        return i - 1
    return None


def make_general_solver(raw_solver, eos: EosModel, lambda_motion: float = 0.0):
    """Build the conserved-variable interface solver used by fv_step.

    Projects the adjacent states onto the interface normal, shifts into
    the liquid rest frame, evaluates the primitive solver, shifts back,
    and lifts the star states to conserved variables (the transversal
    momentum of the inputs is carried over unchanged).
    """
    counter = itertools.count()

    def general(U_liq: ConservedState, U_vap: ConservedState, n: np.ndarray):
        u_liq, perp_liq = project_state(U_liq, n, eos)
        u_vap, perp_vap = project_state(U_vap, n, eos)
        rho_l, m_l, T_l = u_liq
        rho_v, m_v, T_v = u_vap
        v_ref = m_l / rho_l
        left = InterfaceState(rho_l, 0.0, T_l)
        right = InterfaceState(rho_v, m_v / rho_v - v_ref, T_v)
        result = raw_solver(left, right, next(counter))
        if not result.valid or not result.is_finite():
            raise SolverError(f"interface solver returned invalid result: {result}")
        sl, sr = result.star_left, result.star_right
        star_liq = lift_state((sl.rho, sl.rho * (sl.v + v_ref), sl.T), n, perp_liq, eos)
        star_vap = lift_state((sr.rho, sr.rho * (sr.v + v_ref), sr.T), n, perp_vap, eos)
        return star_liq, star_vap, result.s + v_ref

    return general


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    interface_positions: list = field(default_factory=list)
    interface_speeds: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (t, vertices, states, iv)
    final_mesh: MovingMesh1D | None = None

    def record_snapshot(self, t: float, mesh: MovingMesh1D):
        self.snapshots.append(
            (t, mesh.vertices.copy(), mesh.states.copy(), mesh.interface_vertex)
        )


def run_multiscale(mesh: MovingMesh1D, raw_solver, cfg: FvConfig, eos: EosModel,
                   n_steps: int | None = None, snapshot_every: int = 0) -> Trajectory:
    """Run the coupled model: interface solver + FV step + remeshing.

    ``raw_solver`` has the primitive interface-solver signature
    (left, right, seed) -> RiemannResult.  Returns the interface
    trajectory with any requested snapshots; ``final_mesh`` on the
    returned trajectory holds the end state.
    """
    general = make_general_solver(raw_solver, eos)
    if n_steps is None:
        n_steps = int(round(cfg.t_end / cfg.dt))
    traj = Trajectory()
    current = mesh
    if snapshot_every:
        traj.record_snapshot(0.0, current)
    for step in range(1, n_steps + 1):
        try:
            report = fv_step(current, general, cfg, eos)
        except (CflError, PhaseRegionError, SolverError) as exc:
            raise type(exc)(f"step {step}: {exc}") from exc
        current = remesh_1d(current)
        t = step * cfg.dt
        traj.times.append(t)
        traj.interface_positions.append(report.interface_position)
        traj.interface_speeds.append(report.s)
        if snapshot_every and step % snapshot_every == 0:
            traj.record_snapshot(t, current)
    if snapshot_every and n_steps % snapshot_every != 0:
        traj.record_snapshot(n_steps * cfg.dt, current)
    traj.final_mesh = current
    return traj
