"""Pipeline configuration: flat key-value config file, environment
overrides with the SOLSUM_ prefix, then command-line overrides."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

from .promptgen import AblationMask

ENV_PREFIX = "SOLSUM_"

VALID_SHOTS = (0, 1, 3, 5)

_MASK_FLAGS = {"cfg": "include_cfg", "if": "include_inner_functions",
               "idgv": "include_identifiers_and_globals"}


def parse_mask(spec: str) -> AblationMask:
    """Comma-separated subset of {cfg, if, idgv}; listed components are
    included. "none" (or an empty string) disables all three."""
    spec = spec.strip().lower()
    if spec in ("", "none"):
        return AblationMask(False, False, False)
    kwargs = {v: False for v in _MASK_FLAGS.values()}
    for token in spec.split(","):
        token = token.strip()
        if token not in _MASK_FLAGS:
            raise ValueError(f"unknown mask component '{token}' (use cfg,if,idgv or none)")
        kwargs[_MASK_FLAGS[token]] = True
    return AblationMask(**kwargs)


def mask_to_str(mask: AblationMask) -> str:
    parts = [name for name, attr in _MASK_FLAGS.items() if getattr(mask, attr)]
    return ",".join(parts) if parts else "none"


@dataclass
class PipelineConfig:
    repo_root: str = "repo"
    embedder: str = "local"  # local | remote
    embedder_endpoint: str = ""
    embedder_dims: int = 384
    backend: str = "mock"  # mock | remote
    model_id: str = "mock"
    llm_endpoint: str = ""
    api_key_env: str = "SOLSUM_API_KEY"
    shots: int = 0
    mask: AblationMask = field(default_factory=AblationMask)
    max_depth: int = 5
    split_seed: int = 13
    ratios: tuple[float, float, float] = (0.746, 0.187, 0.068)
    max_output_tokens: int = 256
    temperature: float = 0.0
    inner_fn_line_budget: int = 60
    send_attachment: bool = False
    rate_per_sec: float = 0.0  # 0 disables rate limiting

    def validate(self) -> None:
        if self.shots not in VALID_SHOTS:
            raise ValueError(f"shots must be one of {VALID_SHOTS}, got {self.shots}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.embedder not in ("local", "remote"):
            raise ValueError(f"embedder must be local or remote, got {self.embedder!r}")
        if self.backend not in ("mock", "remote"):
            raise ValueError(f"backend must be mock or remote, got {self.backend!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mask"] = mask_to_str(self.mask)
        d["ratios"] = list(self.ratios)
        return d


def config_hash(cfg: PipelineConfig) -> str:
    return hashlib.sha256(
        json.dumps(cfg.to_dict(), sort_keys=True).encode("utf-8")).hexdigest()[:16]


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and # comments are ignored."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = s.partition("=")
        values[key.strip().lower()] = value.strip()
    return values


_STR_KEYS = {"repo_root", "embedder", "embedder_endpoint", "backend", "model_id",
             "llm_endpoint", "api_key_env"}
_INT_KEYS = {"embedder_dims", "shots", "max_depth", "split_seed",
             "max_output_tokens", "inner_fn_line_budget"}
_FLOAT_KEYS = {"temperature", "rate_per_sec"}
_BOOL_KEYS = {"send_attachment"}


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _apply(cfg: PipelineConfig, key: str, value: str) -> None:
    if key in _STR_KEYS:
        setattr(cfg, key, value)
    elif key in _INT_KEYS:
        setattr(cfg, key, int(value))
    elif key in _FLOAT_KEYS:
        setattr(cfg, key, float(value))
    elif key in _BOOL_KEYS:
        setattr(cfg, key, _parse_bool(value))
    elif key == "mask":
        cfg.mask = parse_mask(value)
    elif key == "ratios":
        parts = [float(p) for p in value.split(",")]
        if len(parts) != 3:
            raise ValueError(f"ratios needs 3 comma-separated values, got {value!r}")
        cfg.ratios = (parts[0], parts[1], parts[2])
    else:
        raise ValueError(f"unknown config key '{key}'")


def load_config(path: Optional[str] = None,
                cli_overrides: Optional[dict[str, str]] = None,
                env: Optional[dict[str, str]] = None) -> PipelineConfig:
    """Build a config from defaults, a config file, SOLSUM_* environment
    variables, and CLI overrides, in increasing precedence."""
    cfg = PipelineConfig()
    if path:
        for key, value in read_config_file(path).items():
            _apply(cfg, key, value)
    env = dict(os.environ) if env is None else env
    for key in (_STR_KEYS | _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | {"mask", "ratios"}):
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            _apply(cfg, key, env[env_key])
    for key, value in (cli_overrides or {}).items():
        if value is not None:
            _apply(cfg, key, str(value))
    cfg.validate()
    return cfg
