"""Run configuration: line-based ``section.key = value`` files with
command-line overrides, strict key checking, and manifest echoing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import VdwEos, prim_to_cons
from .fvm import FvConfig
from .md.core import MdConfig
from .surrogate.training import TrainConfig


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_EOS_DEFAULT = VdwEos()

# key -> (parser, default)
SCHEMA = {
    "rng_seed": (int, 0),
    # molecular dynamics (Lennard-Jones reduced units)
    "md.sigma": (float, 1.0),
    "md.epsilon": (float, 1.0),
    "md.r_cutoff": (float, 2.5),
    "md.mass": (float, 1.0),
    "md.n_particles": (int, 32768),
    "md.dt": (float, 1e-3),
    "md.n_steps": (int, 1000),
    "md.f_pr": (int, 100),
    "md.f_sort": (int, 20),
    "md.cell_factor": (float, 1.2),
    "md.w": (float, 3.5),
    "md.alpha_dom": (float, 3.0),
    "md.alpha_max": (float, 0.99),
    "md.n_therm_steps": (int, 500),
    "md.f_th": (int, 100),
    "md.gamma_rbf": (float, 5e-4),
    "md.alpha_track": (float, 0.1),
    "md.n_buffer": (int, 5),
    "md.w_sr": (float, 50.0),
    "md.o_sr": (float, 2.5),
    "md.alpha_t_smpl": (float, 0.2),
    "md.long_range": (_parse_bool, True),
    # equation of state
    "eos.a": (float, _EOS_DEFAULT.a),
    "eos.b": (float, _EOS_DEFAULT.b),
    "eos.cv": (float, _EOS_DEFAULT.c_v),
    # surrogate training and dataset generation
    "surrogate.lr": (float, 1e-3),
    "surrogate.weight_decay": (float, 1e-3),
    "surrogate.grad_clip_norm": (float, 1e3),
    "surrogate.epochs": (int, 2000),
    "surrogate.batch_size": (int, 256),
    "surrogate.val_fraction": (float, 1.0 / 6.0),
    "surrogate.hidden_layers": (int, 5),
    "surrogate.hidden_width": (int, 50),
    "surrogate.n_in": (int, 6000),
    "surrogate.repeats": (int, 3),
    "surrogate.k_candidates": (int, 32),
    # continuum solver and its Riemann initial condition
    "fvm.dt": (float, 1e-5),
    "fvm.dx": (float, 1e-3),
    "fvm.alpha_lf": (float, 1.0),
    "fvm.lambda_motion": (float, 1e-4),
    "fvm.t_end": (float, 0.1),
    "fvm.domain_lo": (float, -1.0),
    "fvm.domain_hi": (float, 1.0),
    "fvm.interface_pos": (float, 0.0),
    "fvm.rho_l": (float, 0.65),
    "fvm.v_l": (float, 0.0),
    "fvm.T_l": (float, 1.0),
    "fvm.rho_v": (float, 0.05),
    "fvm.v_v": (float, 0.0),
    "fvm.T_v": (float, 1.0),
    "fvm.left_bc": (str, "outflow"),
    "fvm.right_bc": (str, "outflow"),
    "fvm.check_phases": (_parse_bool, True),
    # output
    "io.out_dir": (str, "out"),
    "io.snapshot_every": (int, 1000),
    "io.md_profile_bins": (int, 200),
    "io.md_trajectory": (_parse_bool, False),
}


@dataclass
class RunConfig:
    values: dict

    def __getitem__(self, key: str):
        return self.values[key]

    def eos(self) -> VdwEos:
        return VdwEos(a=self["eos.a"], b=self["eos.b"], c_v=self["eos.cv"])

    def md_config(self) -> MdConfig:
        v = self.values
        return MdConfig(
            sigma=v["md.sigma"], epsilon=v["md.epsilon"], r_cutoff=v["md.r_cutoff"],
            mass=v["md.mass"], n_particles=v["md.n_particles"], dt=v["md.dt"],
            n_steps=v["md.n_steps"], f_pr=v["md.f_pr"], f_sort=v["md.f_sort"],
            cell_factor=v["md.cell_factor"], w=v["md.w"], alpha_dom=v["md.alpha_dom"],
            alpha_max=v["md.alpha_max"], n_therm_steps=v["md.n_therm_steps"],
            f_th=v["md.f_th"], gamma_rbf=v["md.gamma_rbf"],
            alpha_track=v["md.alpha_track"], n_buffer=v["md.n_buffer"],
            w_sr=v["md.w_sr"], o_sr=v["md.o_sr"], alpha_t_smpl=v["md.alpha_t_smpl"],
            rng_seed=v["rng_seed"], long_range=v["md.long_range"],
        )

    def train_config(self) -> TrainConfig:
        v = self.values
        return TrainConfig(
            lr=v["surrogate.lr"], weight_decay=v["surrogate.weight_decay"],
            grad_clip_norm=v["surrogate.grad_clip_norm"], epochs=v["surrogate.epochs"],
            batch_size=v["surrogate.batch_size"], val_fraction=v["surrogate.val_fraction"],
            seed=v["rng_seed"],
        )

    def network_dims(self) -> tuple:
        hidden = [self["surrogate.hidden_width"]] * self["surrogate.hidden_layers"]
        return tuple([5] + hidden + [6])

    def fv_config(self) -> FvConfig:
        v = self.values
        eos = self.eos()

        def ghost(side: str):
            mode = v[f"fvm.{side}_bc"]
            if mode == "outflow":
                return None
            if mode == "inflow":
                # Inflow ghost state equals the configured Riemann state of
                # the corresponding side.
                tag = "l" if side == "left" else "v"
                return prim_to_cons(
                    v[f"fvm.rho_{tag}"], [v[f"fvm.v_{tag}"]], v[f"fvm.T_{tag}"], eos
                )
            raise ConfigError(f"fvm.{side}_bc must be 'outflow' or 'inflow', got {mode!r}")

        return FvConfig(
            dt=v["fvm.dt"], dx=v["fvm.dx"], alpha_lf=v["fvm.alpha_lf"],
            lambda_motion=v["fvm.lambda_motion"], t_end=v["fvm.t_end"],
            domain=(v["fvm.domain_lo"], v["fvm.domain_hi"]),
            left_ghost=ghost("left"), right_ghost=ghost("right"),
            check_phases=v["fvm.check_phases"],
        )

    def riemann_data(self):
        v = self.values
        return (v["fvm.rho_l"], v["fvm.v_l"], v["fvm.T_l"],
                v["fvm.rho_v"], v["fvm.v_v"], v["fvm.T_v"])


def _parse_assignment(text: str, where: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"{where}: expected 'key = value', got {text!r}")
    key, raw = (part.strip() for part in text.split("=", 1))
    if key not in SCHEMA:
        raise ConfigError(f"{where}: unknown configuration key {key!r}")
    parser, _ = SCHEMA[key]
    try:
        return key, parser(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def parse_config(path=None, overrides=()) -> RunConfig:
    """Build the effective configuration from defaults, an optional file,
    and command-line overrides (in that priority order)."""
    values = {key: default for key, (_, default) in SCHEMA.items()}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        for lineno, line in enumerate(lines, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            key, value = _parse_assignment(stripped, f"{path}:{lineno}")
            values[key] = value
    for text in overrides:
        key, value = _parse_assignment(text, f"--set {text!r}")
        values[key] = value
    return RunConfig(values)


def write_manifest(cfg: RunConfig, path) -> None:
    """Echo the full effective configuration; re-running with the manifest
    as the config file reproduces the run."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(cfg.values):
            value = cfg.values[key]
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = f"{value:.17g}"
            fh.write(f"{key} = {value}\n")
