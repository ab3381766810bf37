"""Molecular-continuum multiscale model for sharp-interface liquid-vapor flow."""

from .eos import (
    ConservedState,
    EosDomainError,
    EosModel,
    InterfaceState,
    Phase,
    VdwEos,
    cons_to_prim,
    prim_to_cons,
)
from .solvers import RiemannResult, SolverError

__all__ = [
    "ConservedState",
    "EosDomainError",
    "EosModel",
    "InterfaceState",
    "Phase",
    "VdwEos",
    "cons_to_prim",
    "prim_to_cons",
    "RiemannResult",
    "SolverError",
]

__version__ = "0.1.0"
