"""Experiment configuration: JSON load, presets, validation, env overrides.

Two presets: "paper" reproduces the published parameter block verbatim
(M=20, N=5, W=5, 50 episodes x 300 steps, 10 seeds, 400-wide nets, k=256,
drifting channel); "desk" is a CI-scale variant (M=8, N=3, hidden 128, k=64,
30 episodes x 200 steps, 3 seeds) that runs in minutes per seed on one CPU
core.  The desk channel is statics-only (frozen shadowing and phases,
multipath noise kept) so that a position-conditional optimum exists within
the small step budget; the desk optimizer block is tuned accordingly.

Any config key can be overridden by an environment variable IRSRL_<KEY>
(value parsed as JSON, falling back to a bare string).
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, Geometry
from .env import EnvConfig
from .agent import AgentConfig

VARIANTS = ("base", "snr-state", "ff")
PRESETS = ("paper", "desk")

ENV_PREFIX = "IRSRL_"


class ConfigError(Exception):
    """Invalid, malformed, or missing configuration; names the offending key."""


@dataclass
class ExperimentConfig:
    preset: str = "desk"
    variant: str = "ff"
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    episodes: int = 30
    episode_len: int = 200
    out_dir: str = "runs"
    # environment
    m: int = 8
    n: int = 3
    w: int = 5
    reward_unit: str = "db"
    persistent_channel: bool = True
    # channel (desk default: static shadowing/phases, multipath noise only,
    # so a position-conditional optimum exists within the small step budget)
    pathloss_exp: float = 2.3
    multipath_std: float = 0.6
    shadow_power: float = 6.0
    corr_distance: float = 1.2
    corr_time: float = 1e9
    phase_drift: float = 0.0
    noise_var: float = 0.5
    tx_power_dbm: float = 65.0
    # geometry (None = module defaults)
    source_pos: list[float] | None = None
    irs_pos: list[float] | None = None
    dest_cells: list[list[float]] | None = None
    cube_side: float = 20.0
    cell_side: float = 1.0
    # agent
    gamma: float = 0.9
    tau: float = 0.005
    batch: int = 64
    lr: float = 1e-3
    actor_lr: float | None = None
    hidden: int = 128
    n_hidden_layers: int = 3
    buffer: int = 5000
    expl_sigma0: float = 0.1 * np.pi
    expl_decay: float = 0.9
    warmup_steps: int = 300
    updates_per_step: int = 1
    sigma_b2: float = 0.01
    k_fourier: int = 64
    reward_scale: float = 0.05
    shared_min_target: bool = True
    smooth_sigma: float = 0.0
    act_reg: float = 0.05
    smooth_clip: float = 0.5


_PAPER_OVERRIDES = dict(
    preset="paper",
    seeds=list(range(10)),
    episodes=50,
    episode_len=300,
    m=20,
    n=5,
    w=5,
    hidden=400,
    k_fourier=256,
    corr_time=5.0,
    phase_drift=0.2,
    gamma=0.99,
    lr=2e-4,
    buffer=1_000_000,
    expl_decay=0.999,
    warmup_steps=1000,
    reward_scale=1.0,
)

_CONSTRAINTS = {
    "preset": lambda v: v in PRESETS,
    "variant": lambda v: v in VARIANTS,
    "seeds": lambda v: isinstance(v, list) and len(v) > 0,
    "episodes": lambda v: v >= 1,
    "episode_len": lambda v: v >= 1,
    "m": lambda v: v >= 1,
    "n": lambda v: v >= 1,
    "w": lambda v: v >= 1,
    "reward_unit": lambda v: v in ("db", "linear"),
    "pathloss_exp": lambda v: v > 0,
    "multipath_std": lambda v: v >= 0,
    "shadow_power": lambda v: v >= 0,
    "corr_distance": lambda v: v > 0,
    "corr_time": lambda v: v > 0,
    "phase_drift": lambda v: v >= 0,
    "noise_var": lambda v: v > 0,
    "gamma": lambda v: 0.0 < v < 1.0,
    "tau": lambda v: 0.0 < v <= 1.0,
    "batch": lambda v: v >= 1,
    "lr": lambda v: v > 0,
    "actor_lr": lambda v: v is None or v > 0,
    "hidden": lambda v: v >= 1,
    "n_hidden_layers": lambda v: v >= 1,
    "buffer": lambda v: v >= 1,
    "expl_sigma0": lambda v: v >= 0,
    "expl_decay": lambda v: 0.0 < v <= 1.0,
    "warmup_steps": lambda v: v >= 0,
    "updates_per_step": lambda v: v >= 1,
    "sigma_b2": lambda v: v > 0,
    "k_fourier": lambda v: v >= 1,
    "reward_scale": lambda v: v > 0,
    "smooth_sigma": lambda v: v >= 0,
    "act_reg": lambda v: v >= 0,
    "smooth_clip": lambda v: v > 0,
}

_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def resolve(overrides: dict, use_env: bool = True) -> ExperimentConfig:
    """Preset defaults -> file overrides -> IRSRL_* environment overrides."""
    if not isinstance(overrides, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(overrides) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    merged: dict = {}
    if overrides.get("preset", "desk") == "paper":
        merged.update(_PAPER_OVERRIDES)
    merged.update(overrides)

    if use_env:
        for key in _FIELDS:
            raw = os.environ.get(ENV_PREFIX + key.upper())
            if raw is not None:
                try:
                    merged[key] = json.loads(raw)
                except json.JSONDecodeError:
                    merged[key] = raw

    cfg = ExperimentConfig(**merged)
    for key, ok in _CONSTRAINTS.items():
        v = getattr(cfg, key)
        try:
            good = ok(v)
        except TypeError:
            good = False
        if not good:
            raise ConfigError(f"invalid value for key {key!r}: {v!r}")
    return cfg


def load_config(path, use_env: bool = True) -> ExperimentConfig:
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path}: {e}")
    return resolve(raw, use_env=use_env)


def to_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as f:
        json.dump(to_dict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")


# -- adapters into module-level configs -------------------------------------


def channel_params(cfg: ExperimentConfig) -> ChannelParams:
    return ChannelParams(
        pathloss_exp=cfg.pathloss_exp,
        multipath_std=cfg.multipath_std,
        shadow_power=cfg.shadow_power,
        corr_distance=cfg.corr_distance,
        corr_time=cfg.corr_time,
        phase_drift=cfg.phase_drift,
        noise_var=cfg.noise_var,
        tx_power_dbm=cfg.tx_power_dbm,
    )


def geometry(cfg: ExperimentConfig) -> Geometry:
    kwargs = dict(cube_side=cfg.cube_side, cell_side=cfg.cell_side)
    if cfg.source_pos is not None:
        kwargs["source_pos"] = np.asarray(cfg.source_pos)
    if cfg.irs_pos is not None:
        kwargs["irs_pos"] = np.asarray(cfg.irs_pos)
    if cfg.dest_cells is not None:
        kwargs["dest_cells"] = np.asarray(cfg.dest_cells)
    return Geometry(**kwargs)


def env_config(cfg: ExperimentConfig, variant: str | None = None) -> EnvConfig:
    variant = variant or cfg.variant
    return EnvConfig(
        m=cfg.m,
        n=cfg.n,
        w=cfg.w,
        episode_len=cfg.episode_len,
        variant="snr_state" if variant == "snr-state" else "base",
        reward_unit=cfg.reward_unit,
        persistent_channel=cfg.persistent_channel,
        params=channel_params(cfg),
        geometry=geometry(cfg),
    )


def agent_config(cfg: ExperimentConfig, variant: str | None = None) -> AgentConfig:
    variant = variant or cfg.variant
    return AgentConfig(
        gamma=cfg.gamma,
        tau=cfg.tau,
        batch=cfg.batch,
        lr=cfg.lr,
        actor_lr=cfg.actor_lr,
        hidden=cfg.hidden,
        n_hidden_layers=cfg.n_hidden_layers,
        buffer_capacity=cfg.buffer,
        expl_sigma0=cfg.expl_sigma0,
        expl_decay=cfg.expl_decay,
        warmup_steps=cfg.warmup_steps,
        updates_per_step=cfg.updates_per_step,
        critic_input="fourier" if variant == "ff" else "raw",
        sigma_b2=cfg.sigma_b2,
        k_fourier=cfg.k_fourier,
        reward_scale=cfg.reward_scale,
        shared_min_target=cfg.shared_min_target,
        smooth_sigma=cfg.smooth_sigma,
        act_reg=cfg.act_reg,
        smooth_clip=cfg.smooth_clip,
    )
