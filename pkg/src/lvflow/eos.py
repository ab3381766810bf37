"""Equation of state, phase classification, and state conversions.

The fluid is described in reduced Lennard-Jones units throughout
(sigma = epsilon = m0 = k_B = 1).  The concrete equation of state is a
van der Waals model calibrated so that its critical point sits at
(rho_c, T_c) = (0.31, 1.32), which preserves the geometry of the
liquid/vapor regions used everywhere else in the package.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

RHO_CRIT = 0.31
T_CRIT = 1.32


class EosDomainError(ValueError):
    """Raised when a state lies outside the domain of the equation of state."""


class Phase(Enum):
    LIQUID = "liquid"
    VAPOR = "vapor"
    NON_HYPERBOLIC = "non_hyperbolic"


@dataclass(frozen=True)
class ConservedState:
    """Conserved fluid state (rho, m, E) with momentum density m of dimension d."""

    rho: float
    m: np.ndarray
    E: float

    def __post_init__(self):
        object.__setattr__(self, "m", np.atleast_1d(np.asarray(self.m, dtype=float)))

    @property
    def dim(self) -> int:
        return self.m.shape[0]


@dataclass(frozen=True)
class InterfaceState:
    """Primitive interface-normal state: density, normal velocity, temperature."""

    rho: float
    v: float
    T: float


class EosModel(ABC):
    """Abstract equation of state mapping (rho, T) to thermodynamic quantities."""

    @abstractmethod
    def pressure(self, rho, T):
        ...

    @abstractmethod
    def internal_energy(self, rho, T):
        """Specific internal energy eps(rho, T)."""

    @abstractmethod
    def temperature_from_energy(self, rho, eps):
        """Invert internal_energy at fixed rho."""

    @abstractmethod
    def entropy(self, rho, T):
        """Specific entropy; used for diagnostics only."""

    @abstractmethod
    def sound_speed_squared(self, rho, T):
        """Isentropic pressure derivative dp/drho at constant entropy."""

    @property
    @abstractmethod
    def phase_split_density(self) -> float:
        """Density separating the liquid region (above) from the vapor region."""

    def classify_phase(self, rho: float, T: float) -> Phase:
        """Classify a (rho, T) state; total for every rho > 0.

        States with non-positive temperature, densities outside the EOS
        domain, or non-positive isentropic sound speed cannot be certified
        hyperbolic and are reported as NON_HYPERBOLIC.
        """
        if rho <= 0.0:
            raise EosDomainError(f"density must be positive, got {rho}")
        if T <= 0.0 or not self.in_domain(rho):
            return Phase.NON_HYPERBOLIC
        if self.sound_speed_squared(rho, T) <= 0.0:
            return Phase.NON_HYPERBOLIC
        return Phase.LIQUID if rho >= self.phase_split_density else Phase.VAPOR

    def in_domain(self, rho) -> bool:
        return bool(np.all(rho > 0.0))

    def classify_many(self, rho: np.ndarray, T: np.ndarray) -> np.ndarray:
        """Classify arrays of states; returns an object array of Phase."""
        return np.array(
            [self.classify_phase(float(r), float(t)) for r, t in zip(rho, T)],
            dtype=object,
        )


def _default_b() -> float:
    return 1.0 / (3.0 * RHO_CRIT)


def _default_a() -> float:
    return 27.0 * _default_b() * T_CRIT / 8.0


@dataclass(frozen=True)
class VdwEos(EosModel):
    """Van der Waals equation of state in reduced units.

    p(rho, T) = rho R T / (1 - b rho) - a rho^2
    eps(rho, T) = c_v T - a rho

    Defaults place the critical point at (RHO_CRIT, T_CRIT) via
    b = 1/(3 rho_c) and a = 27 b T_c / 8.
    """

    a: float = field(default_factory=_default_a)
    b: float = field(default_factory=_default_b)
    c_v: float = 1.5
    R: float = 1.0

    @property
    def rho_crit(self) -> float:
        return 1.0 / (3.0 * self.b)

    @property
    def T_crit(self) -> float:
        return 8.0 * self.a / (27.0 * self.R * self.b)

    @property
    def phase_split_density(self) -> float:
        return self.rho_crit

    def in_domain(self, rho) -> bool:
        return bool(np.all(rho > 0.0) and np.all(self.b * np.asarray(rho) < 1.0))

    def _check_domain(self, rho, T=None):
        if np.any(np.asarray(rho) <= 0.0):
            raise EosDomainError(f"density must be positive, got {rho}")
        if np.any(self.b * np.asarray(rho) >= 1.0):
            raise EosDomainError(
                f"covolume bound violated: b*rho >= 1 for rho={rho} (b={self.b})"
            )
        if T is not None and np.any(np.asarray(T) <= 0.0):
            raise EosDomainError(f"temperature must be positive, got {T}")

    def pressure(self, rho, T):
        self._check_domain(rho, T)
        return rho * self.R * T / (1.0 - self.b * rho) - self.a * rho**2

    def dp_drho_T(self, rho, T):
        """Isothermal pressure derivative."""
        self._check_domain(rho, T)
        return self.R * T / (1.0 - self.b * rho) ** 2 - 2.0 * self.a * rho

    def dp_dT_rho(self, rho, T):
        self._check_domain(rho, T)
        return rho * self.R / (1.0 - self.b * rho)

    def internal_energy(self, rho, T):
        self._check_domain(rho, T)
        return self.c_v * T - self.a * rho

    def temperature_from_energy(self, rho, eps):
        self._check_domain(rho)
        T = (eps + self.a * rho) / self.c_v
        if np.any(np.asarray(T) <= 0.0):
            raise EosDomainError(
                f"non-positive temperature from energy inversion: rho={rho}, eps={eps}"
            )
        return T

    def entropy(self, rho, T):
        self._check_domain(rho, T)
        return self.c_v * np.log(T) + self.R * np.log((1.0 - self.b * rho) / rho)

    def sound_speed_squared(self, rho, T):
        # dp/drho at constant S via dp/drho|_T + (T/c_v) (dp/dT|_rho / rho)^2
        self._check_domain(rho, T)
        dpdT_over_rho = self.R / (1.0 - self.b * rho)
        return self.dp_drho_T(rho, T) + (T / self.c_v) * dpdT_over_rho**2

    def classify_many(self, rho: np.ndarray, T: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        T = np.asarray(T, dtype=float)
        if np.any(rho <= 0.0):
            raise EosDomainError("density must be positive")
        out = np.full(rho.shape, Phase.NON_HYPERBOLIC, dtype=object)
        ok = (T > 0.0) & (self.b * rho < 1.0)
        if ok.any():
            r, t = rho[ok], T[ok]
            dpdT_over_rho = self.R / (1.0 - self.b * r)
            c2 = (
                self.R * t / (1.0 - self.b * r) ** 2
                - 2.0 * self.a * r
                + (t / self.c_v) * dpdT_over_rho**2
            )
            phase = np.where(r >= self.rho_crit, Phase.LIQUID, Phase.VAPOR).astype(object)
            phase[c2 <= 0.0] = Phase.NON_HYPERBOLIC
            out[ok] = phase
        return out


def cons_to_prim(U: ConservedState, eos: EosModel) -> tuple[float, np.ndarray, float]:
    """Convert a conserved state to (rho, velocity vector, temperature)."""
    if U.rho <= 0.0:
        raise EosDomainError(f"density must be positive, got {U.rho}")
    v = U.m / U.rho
    eps = U.E / U.rho - float(np.dot(U.m, U.m)) / (2.0 * U.rho**2)
    T = eos.temperature_from_energy(U.rho, eps)
    return U.rho, v, float(T)


def prim_to_cons(rho: float, v, T: float, eos: EosModel) -> ConservedState:
    """Convert (rho, velocity vector, temperature) to a conserved state."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    eps = eos.internal_energy(rho, T)
    E = rho * eps + 0.5 * rho * float(np.dot(v, v))
    return ConservedState(rho=rho, m=rho * v, E=float(E))
