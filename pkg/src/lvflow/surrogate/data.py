"""Dataset generation and CSV persistence for surrogate training.

A data record pairs Riemann initial data (in the liquid rest frame, so
v_left is identically zero) with the interface-solver response.  Inputs
are drawn from the bounding domain: one convex polygon in (rho, T) per
phase plus an interval of vapor velocities, sampled jointly with
distance-maximizing sampling over the 5-D product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..eos import InterfaceState
from ..sampling import ConvexRegion, ProductRegion, sample_distance_maximizing
from ..solvers import SolverError

CSV_HEADER = "rho_l,v_l,T_l,rho_v,v_v,T_v,rho_l_s,m_l_s,T_l_s,rho_v_s,m_v_s,T_v_s,s"

# Bounding domain for the surrogate inputs (reduced units).
VAPOR_POLYGON = ((1e-4, 0.4), (1e-4, 2.5), (0.02, 0.4), (0.31, 1.32), (0.31, 2.5))
LIQUID_POLYGON = ((0.7, 0.4), (0.31, 1.32), (1.0, 0.4), (1.0, 1.32), (0.31, 2.5))
V_VAPOR_RANGE = (-2.5, 1.5)


@dataclass(frozen=True)
class DataRecord:
    """One solver evaluation: 6 inputs, 7 outputs, repetition group id."""

    inputs: np.ndarray
    outputs: np.ndarray
    group: int

    def __post_init__(self):
        object.__setattr__(self, "inputs", np.asarray(self.inputs, dtype=float))
        object.__setattr__(self, "outputs", np.asarray(self.outputs, dtype=float))
        if self.inputs.shape != (6,) or self.outputs.shape != (7,):
            raise ValueError("record needs 6 inputs and 7 outputs")


def default_input_domain() -> ProductRegion:
    """(liquid rho,T polygon) x (vapor rho,T polygon) x (vapor velocity)."""
    return ProductRegion(
        (
            ConvexRegion.from_polygon(LIQUID_POLYGON),
            ConvexRegion.from_polygon(VAPOR_POLYGON),
            ConvexRegion.from_interval(*V_VAPOR_RANGE),
        )
    )


def sample_to_states(point) -> tuple[InterfaceState, InterfaceState]:
    """Map a 5-D sample (rho_l, T_l, rho_v, T_v, v_v) to Riemann data."""
    rho_l, t_l, rho_v, t_v, v_v = (float(c) for c in point)
    return InterfaceState(rho_l, 0.0, t_l), InterfaceState(rho_v, v_v, t_v)


def solver_seed(base_seed: int, sample: int, repeat: int) -> int:
    """Deterministic per-evaluation seed stream."""
    ss = np.random.SeedSequence([int(base_seed), int(sample), int(repeat)])
    return int(ss.generate_state(1)[0])


def generate_dataset(domain, n_in: int, repeats: int, solver, seed: int = 0,
                     skip=None, on_record=None):
    """Evaluate ``solver`` on a space-filling input sample.

    Each of the ``n_in`` inputs is evaluated ``repeats`` times with an
    independent seed; invalid or failing evaluations are dropped.
    ``skip(inputs, repeat)`` may veto evaluations (used for resuming),
    ``on_record`` is called with each fresh record as it is produced.
    Returns (records, n_failed).
    """
    sample = sample_distance_maximizing(domain, n_in, rng=seed)
    records = []
    n_failed = 0
    for i, point in enumerate(sample.points):
        left, right = sample_to_states(point)
        inputs = np.array([left.rho, 0.0, left.T, right.rho, right.v, right.T])
        for r in range(repeats):
            if skip is not None and skip(inputs, r):
                continue
            try:
                result = solver(left, right, solver_seed(seed, i, r))
            except SolverError:
                n_failed += 1
                continue
            if not result.valid or not result.is_finite():
                n_failed += 1
                continue
            sl, sr = result.star_left, result.star_right
            outputs = np.array(
                [sl.rho, sl.rho * sl.v, sl.T, sr.rho, sr.rho * sr.v, sr.T, result.s]
            )
            record = DataRecord(inputs=inputs, outputs=outputs, group=i)
            records.append(record)
            if on_record is not None:
                on_record(record)
    return records, n_failed


def records_to_arrays(records):
    """Records -> (X (N,5), Y (N,7), groups (N,)) with v_left dropped."""
    if not records:
        raise ValueError("no records")
    inputs = np.stack([r.inputs for r in records])
    outputs = np.stack([r.outputs for r in records])
    groups = np.array([r.group for r in records])
    x = inputs[:, [0, 2, 3, 4, 5]]
    return x, outputs, groups


def format_record(record: DataRecord) -> str:
    vals = np.concatenate([record.inputs, record.outputs])
    return ",".join(f"{v:.17g}" for v in vals)


def input_key(inputs) -> str:
    """Canonical text key of an input tuple, used for resume bookkeeping."""
    return ",".join(f"{float(v):.17g}" for v in inputs)


def write_dataset(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(format_record(rec) + "\n")


def read_dataset(path):
    """Load records; repetition groups are rebuilt from identical inputs."""
    records = []
    group_ids: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected dataset header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 13:
                raise ValueError(f"{path}:{lineno}: expected 13 columns, got {len(parts)}")
            vals = np.array([float(p) for p in parts])
            key = input_key(vals[:6])
            group = group_ids.setdefault(key, len(group_ids))
            records.append(DataRecord(inputs=vals[:6], outputs=vals[6:], group=group))
    return records
