"""Interface-solver contract shared by the MD solver, the neural
surrogate, and the mock solvers used in tests.

An interface solver maps Riemann initial data (left liquid state, right
vapor state, both as primitive (rho, v, T) triples in the interface
normal frame) to the two wave-adjacent "star" states and the interface
speed s.  Callables additionally take a seed so that stochastic solvers
can be reproduced; deterministic solvers ignore it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eos import EosModel, InterfaceState


class SolverError(RuntimeError):
    """Raised when an interface solver cannot produce a valid result."""


@dataclass(frozen=True)
class RiemannResult:
    """Output of an interface solver.

    ``j`` is the relative mass flux rho (v - s) evaluated with the
    liquid-side star state (negative values mean condensation);
    ``j_vapor`` is the same quantity from the vapor side.
    """

    star_left: InterfaceState
    star_right: InterfaceState
    s: float
    j: float
    j_vapor: float
    valid: bool = True

    @classmethod
    def from_states(cls, star_left: InterfaceState, star_right: InterfaceState, s: float,
                    valid: bool = True) -> "RiemannResult":
        j_liq = star_left.rho * (star_left.v - s)
        j_vap = star_right.rho * (star_right.v - s)
        return cls(star_left, star_right, float(s), float(j_liq), float(j_vap), valid)

    def is_finite(self) -> bool:
        vals = [self.star_left.rho, self.star_left.v, self.star_left.T,
                self.star_right.rho, self.star_right.v, self.star_right.T, self.s]
        return all(map(math.isfinite, vals))


def echo_solver(left: InterfaceState, right: InterfaceState, seed: int = 0) -> RiemannResult:
    """Mock: returns the inputs unchanged with zero interface speed."""
    return RiemannResult.from_states(left, right, 0.0)


def make_contact_solver(speed: float):
    """Mock: returns the inputs unchanged and a fixed interface speed."""

    def solve(left: InterfaceState, right: InterfaceState, seed: int = 0) -> RiemannResult:
        return RiemannResult.from_states(left, right, speed)

    return solve


def make_acoustic_solver(eos: EosModel):
    """Mock: linearized two-phase contact solver.

    Solves the acoustic approximation of the Riemann problem around the
    two input states and treats the phase boundary as the contact wave
    (no mass transfer).  Useful as a cheap, physically plausible stand-in
    for the molecular solver in pipeline tests.
    """

    def solve(left: InterfaceState, right: InterfaceState, seed: int = 0) -> RiemannResult:
        try:
            p_l = eos.pressure(left.rho, left.T)
            p_r = eos.pressure(right.rho, right.T)
            c2_l = eos.sound_speed_squared(left.rho, left.T)
            c2_r = eos.sound_speed_squared(right.rho, right.T)
        except ValueError as exc:
            raise SolverError(f"acoustic solver outside EOS domain: {exc}") from exc
        if c2_l <= 0.0 or c2_r <= 0.0:
            raise SolverError("acoustic solver needs hyperbolic input states")
        z_l = left.rho * math.sqrt(c2_l)
        z_r = right.rho * math.sqrt(c2_r)
        v_star = (z_l * left.v + z_r * right.v + p_l - p_r) / (z_l + z_r)
        p_star = p_l - z_l * (v_star - left.v)
        rho_l = left.rho + (p_star - p_l) / c2_l
        rho_r = right.rho + (p_star - p_r) / c2_r
        if rho_l <= 0.0 or rho_r <= 0.0:
            return RiemannResult.from_states(left, right, v_star, valid=False)
        star_left = InterfaceState(rho_l, v_star, left.T)
        star_right = InterfaceState(rho_r, v_star, right.T)
        return RiemannResult.from_states(star_left, star_right, v_star)

    return solve


def make_surrogate_solver(model):
    """Wrap a trained CResNet as an interface solver.

    The network was trained in the liquid rest frame, so inputs are
    shifted by the liquid velocity and outputs shifted back; inputs that
    already satisfy v_left = 0 pass through unchanged.
    """

    def solve(left: InterfaceState, right: InterfaceState, seed: int = 0) -> RiemannResult:
        v_ref = left.v
        x = np.array([left.rho, left.T, right.rho, right.v - v_ref, right.T])
        y = model.forward(x)
        rho_l, m_l, t_l, rho_v, m_v, t_v, s = (float(val) for val in y)
        if rho_l <= 0.0 or rho_v <= 0.0:
            return RiemannResult.from_states(left, right, s + v_ref, valid=False)
        star_left = InterfaceState(rho_l, m_l / rho_l + v_ref, t_l)
        star_right = InterfaceState(rho_v, m_v / rho_v + v_ref, t_v)
        return RiemannResult.from_states(star_left, star_right, s + v_ref)

    return solve
