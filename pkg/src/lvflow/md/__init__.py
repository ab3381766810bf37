from .core import (
    FieldProfile,
    MdConfig,
    ParticleSystem,
    apply_thermostat,
    build_cells,
    compute_forces,
    instantaneous_fields,
    instantaneous_temperature,
    lj_potential,
    long_range_force,
    maxwell_boltzmann_velocities,
    pair_force,
    potential_energy,
    verlet_step,
)
from .riemann import (
    InterfaceTrack,
    MdRunDiagnostics,
    RiemannSetup,
    init_riemann,
    make_md_solver,
    plan_riemann,
    rbf_density,
    rbf_density_dx,
    sample_interface_states,
    solve_interface_md,
    track_interface,
)

__all__ = [
    "FieldProfile",
    "MdConfig",
    "ParticleSystem",
    "apply_thermostat",
    "build_cells",
    "compute_forces",
    "instantaneous_fields",
    "instantaneous_temperature",
    "lj_potential",
    "long_range_force",
    "maxwell_boltzmann_velocities",
    "pair_force",
    "potential_energy",
    "verlet_step",
    "InterfaceTrack",
    "MdRunDiagnostics",
    "RiemannSetup",
    "init_riemann",
    "make_md_solver",
    "plan_riemann",
    "rbf_density",
    "rbf_density_dx",
    "sample_interface_states",
    "solve_interface_md",
    "track_interface",
]
