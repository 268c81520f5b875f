"""Run configuration: JSON schema, defaults, and validation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .backends import PRESETS, ChainKind, ChainSpec, make_backend
from .errors import ConfigInvalid, RenormlabError

DEFAULT_CHAIN = {
    "heisenberg": "renormalization",
    "lattice": "renormalization",
    "affine-unit": "renormalization",
    "odometer": "renormalization",
    "grigorchuk": "vertex_stabilizer",
}

DEFAULT_DEPTH = {"heisenberg": 3, "lattice": 4, "affine-unit": 12, "odometer": 8, "grigorchuk": 8}

_TOP_KEYS = {"backend", "params", "chain", "max_level", "max_index", "window", "qa", "kernel",
             "contracting", "self_replicating", "outputs", "cache_dir", "shape_budget"}
_PROBE_KEYS = {
    "qa": {"level", "cylinder_depth", "word_bound"},
    "kernel": {"level", "word_bound"},
    "contracting": {"elements", "max_level", "max_iterate"},
    "self_replicating": {"word_bound", "depth"},
}
FORMATS = ("json", "text", "csv")


@dataclass
class RunConfig:
    backend: str
    params: dict[str, Any] = field(default_factory=dict)
    chain: str = ""
    max_level: int = 0
    max_index: int = 2_000_000
    window: int | None = None
    qa: dict[str, int] | None = None
    kernel: dict[str, int] | None = None
    contracting: dict[str, Any] | None = None
    self_replicating: dict[str, int] | None = None
    outputs: list[str] = field(default_factory=lambda: ["json"])
    cache_dir: str | None = None
    shape_budget: int = 10**6

    def chain_spec(self) -> ChainSpec:
        try:
            return ChainSpec(make_backend(self.backend, self.params), ChainKind(self.chain), self.max_level, self.max_index)
        except ConfigInvalid:
            raise
        except (RenormlabError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from None

    @property
    def effective_window(self) -> int:
        return self.window if self.window is not None else min(3, max(self.max_level - 1, 1))

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["window"] = self.effective_window
        return {k: v for k, v in out.items() if v is not None and k != "cache_dir"}


def _int(value, name: str, lo: int, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid(f"{name} must be an integer")
    if value < lo or (hi is not None and value > hi):
        raise ConfigInvalid(f"{name}={value} out of range [{lo}, {hi if hi is not None else 'inf'}]")
    return value


def parse_config(data: dict[str, Any]) -> RunConfig:
    """Validate a config mapping; every check runs before any computation."""
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
    name = data.get("backend")
    if name not in PRESETS:
        raise ConfigInvalid(f"unknown backend {name!r}; choose one of {', '.join(PRESETS)}")
    params = data.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigInvalid("params must be an object")
    chain = data.get("chain", DEFAULT_CHAIN[name])
    if chain not in {k.value for k in ChainKind}:
        raise ConfigInvalid(f"unknown chain kind {chain!r}")
    cfg = RunConfig(
        backend=name,
        params=dict(params),
        chain=chain,
        max_level=_int(data.get("max_level", DEFAULT_DEPTH[name]), "max_level", 0, 20),
        max_index=_int(data.get("max_index", 2_000_000), "max_index", 1),
        window=None if data.get("window") is None else _int(data["window"], "window", 1, 20),
        cache_dir=data.get("cache_dir"),
        shape_budget=_int(data.get("shape_budget", 10**6), "shape_budget", 1),
    )
    outputs = data.get("outputs", ["json"])
    if not isinstance(outputs, list) or any(o not in FORMATS for o in outputs):
        raise ConfigInvalid(f"outputs must be a list drawn from {FORMATS}")
    cfg.outputs = list(outputs)
    for probe, keys in _PROBE_KEYS.items():
        section = data.get(probe)
        if section is None:
            continue
        if not isinstance(section, dict) or set(section) - keys:
            raise ConfigInvalid(f"{probe} accepts keys {sorted(keys)}")
        setattr(cfg, probe, dict(section))
    if cfg.window is not None and cfg.max_level < cfg.window + 1:
        raise ConfigInvalid(f"window {cfg.window} needs max_level >= {cfg.window + 1}")
    _validate_probes(cfg)
    cfg.chain_spec()  # parameter validation happens in the backend constructors
    return cfg


def _validate_probes(cfg: RunConfig) -> None:
    top = cfg.max_level
    if cfg.qa is not None:
        lv = _int(cfg.qa.get("level", top), "qa.level", 1, top)
        k = _int(cfg.qa.get("cylinder_depth", 1), "qa.cylinder_depth", 0, lv - 1)
        cfg.qa = {"level": lv, "cylinder_depth": k, "word_bound": _int(cfg.qa.get("word_bound", 8), "qa.word_bound", 0, 64)}
    if cfg.kernel is not None:
        cfg.kernel = {"level": _int(cfg.kernel.get("level", top), "kernel.level", 0, top),
                      "word_bound": _int(cfg.kernel.get("word_bound", 4), "kernel.word_bound", 0, 64)}
    if cfg.contracting is not None:
        if cfg.chain != ChainKind.RENORMALIZATION.value:
            raise ConfigInvalid("contracting probe needs a renormalization chain")
        elements = cfg.contracting.get("elements", "generators")
        if elements != "generators" and not isinstance(elements, list):
            raise ConfigInvalid('contracting.elements must be "generators" or a list of encoded elements')
        if elements != "generators":
            backend = cfg.chain_spec().backend
            for e in elements:
                try:
                    backend.decode(e)
                except (ValueError, TypeError, KeyError, IndexError) as exc:
                    raise ConfigInvalid(f"contracting.elements: cannot decode {e!r}: {exc}") from None
        cfg.contracting = {"elements": elements,
                           "max_level": _int(cfg.contracting.get("max_level", top), "contracting.max_level", 0, top),
                           "max_iterate": _int(cfg.contracting.get("max_iterate", top + 2), "contracting.max_iterate", 0, 256)}
    if cfg.self_replicating is not None:
        if cfg.backend not in ("odometer", "grigorchuk"):
            raise ConfigInvalid("self_replicating probe needs an automaton backend")
        cfg.self_replicating = {
            "word_bound": _int(cfg.self_replicating.get("word_bound", 10), "self_replicating.word_bound", 0, 64),
            "depth": _int(cfg.self_replicating.get("depth", 8), "self_replicating.depth", 1, 16),
        }


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data)
