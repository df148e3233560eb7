"""Scenario configuration, presets and the key = value config file format.

Config files are TOML: `key = value` lines, optionally grouped under
`[section]` headers or written with dotted keys (`scheduler.alpha = 0.1`).
Every key left out keeps its default value.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .channel import ChannelConfig
from .handover import MULTI_CELL, SINGLE_CELL
from .schedulers import QUEUE_AWARE, Rule, SchedulerParams

FULL_BUFFER = "full-buffer"
CBR = "cbr"
KMH = 1 / 3.6


@dataclass
class TrafficConfig:
    mode: str = FULL_BUFFER
    arrival_rate: float = 12e6  # bits/s per user, cbr only
    stream_rate: float = 1.5e6
    threshold: float = 5.0  # seconds of media needed to (re)start playback
    # "drop": the new BS starts with an empty buffer for the user; "forward": backlog follows the user
    queue_at_handover: str = "forward"

    def __post_init__(self):
        if self.mode not in (FULL_BUFFER, CBR):
            raise ValueError(f"unknown traffic mode {self.mode!r}")
        if self.queue_at_handover not in ("drop", "forward"):
            raise ValueError(f"unknown queue_at_handover {self.queue_at_handover!r}")
        if self.arrival_rate < 0 or self.stream_rate <= 0 or self.threshold < 0:
            raise ValueError("invalid traffic rates")


@dataclass
class ScenarioConfig:
    rings: int = 2
    cells: int = 0  # >0 keeps only the first cells of the ring layout
    D: float = 1000.0
    users: int = 200
    speed: float = 40 * KMH
    channel: ChannelConfig = field(default_factory=lambda: ChannelConfig(bandwidth=None))
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    scheduler: SchedulerParams = field(default_factory=SchedulerParams)
    handover_mode: str = MULTI_CELL
    sim_time: float = 500.0
    warm_up: float = 200.0
    tti: float = 1e-3
    mobility_step: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.channel.bandwidth is None:
            self.channel.bandwidth = 10e6 if self.traffic.mode == FULL_BUFFER else 5e6
        self.validate()

    def validate(self):
        if self.users < 1:
            raise ValueError("need at least one user")
        if not 0 <= self.warm_up < self.sim_time:
            raise ValueError("warm_up must lie in [0, sim_time)")
        if self.tti <= 0 or self.mobility_step < self.tti:
            raise ValueError("invalid time step")
        if self.handover_mode not in (MULTI_CELL, SINGLE_CELL):
            raise ValueError(f"unknown handover mode {self.handover_mode!r}")
        if self.traffic.mode == FULL_BUFFER and self.scheduler.rule in QUEUE_AWARE:
            raise ValueError(f"{self.scheduler.rule.label} needs queues; use traffic.mode = 'cbr'")

    @property
    def streaming(self) -> bool:
        return self.traffic.mode == CBR

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scheduler"]["rule"] = self.scheduler.rule.label
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = copy.deepcopy(d)
        channel = d.pop("channel", {})
        if "bandwidth" not in channel:
            channel["bandwidth"] = None
        return cls(
            channel=ChannelConfig(**channel),
            traffic=TrafficConfig(**d.pop("traffic", {})),
            scheduler=SchedulerParams(**d.pop("scheduler", {})),
            **d,
        )

    def replace(self, **overrides) -> "ScenarioConfig":
        """Copy with dotted-key overrides, e.g. replace(**{'scheduler.alpha': 0.1})."""
        d = self.to_dict()
        if "traffic.mode" in overrides and "channel.bandwidth" not in overrides:
            d["channel"].pop("bandwidth")  # re-derive from the new traffic mode
        for key, value in overrides.items():
            set_dotted(d, key, value)
        return ScenarioConfig.from_dict(d)


PRESETS = {
    "paper": {},
    "desk": {"users": 60, "sim_time": 120.0, "warm_up": 30.0},
}

# short names accepted by sweeps and --set
ALIASES = {
    "N": "users",
    "W": "scheduler.w_long",
    "W_short": "scheduler.w_short",
    "W_long": "scheduler.w_long",
    "alpha": "scheduler.alpha",
    "beta": "scheduler.beta",
    "c": "scheduler.steepness",
    "lambda": "traffic.arrival_rate",
    "rule": "scheduler.rule",
    "handover": "handover_mode",
    "seed": "seed",
}


def resolve_key(key: str) -> str:
    key = ALIASES.get(key, key)
    d = ScenarioConfig().to_dict()
    node = d
    for part in key.split("."):
        if not isinstance(node, dict) or part not in node:
            raise KeyError(f"unknown config key {key!r}")
        node = node[part]
    if isinstance(node, dict):
        raise KeyError(f"{key!r} is a section, not a scalar")
    return key


def set_dotted(d: dict, key: str, value):
    parts = resolve_key(key).split(".")
    for part in parts[:-1]:
        d = d[part]
    d[parts[-1]] = value


def flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def parse_value(text: str):
    """Parse a TOML scalar, falling back to a bare string."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def load_config(path: str | Path | None = None, preset: str = "paper", overrides: dict | None = None) -> ScenarioConfig:
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    merged = dict(PRESETS[preset])
    if path is not None:
        with open(path, "rb") as fh:
            merged.update(flatten(tomli.load(fh)))
    merged.update(overrides or {})
    return ScenarioConfig().replace(**merged)


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for key, value in flatten(cfg.to_dict()).items():
        if value is None:
            continue
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, str):
            text = f'"{value}"'
        else:
            text = repr(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
