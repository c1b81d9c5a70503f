"""
Configuration Models
Validated pydantic models for the model family, the adversary and the protocol,
plus the flat ``key = value`` config-file loader.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import (
    ADVERSARY_DEFAULTS,
    DATA_DEFAULTS,
    MODEL_DEFAULTS,
    PROTOCOL_DEFAULTS,
)
from .errors import ConfigError


class ModelSpec(BaseModel):
    """Layer sizes (input, hidden..., classes) and the hidden activation"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    layer_dims: Tuple[int, ...]
    activation: Literal["relu", "tanh"] = MODEL_DEFAULTS["activation"]

    @model_validator(mode="after")
    def _check_dims(self) -> "ModelSpec":
        if len(self.layer_dims) < 2:
            raise ValueError("layer_dims needs an input and an output size")
        if any(d <= 0 for d in self.layer_dims):
            raise ValueError(f"degenerate layer size in {self.layer_dims}")
        return self

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def num_params(self) -> int:
        return sum(
            (fan_in + 1) * fan_out
            for fan_in, fan_out in zip(self.layer_dims[:-1], self.layer_dims[1:])
        )


class AdversaryPolicy(BaseModel):
    """
    Behaviour of the aggregation server.

    honest ignores rho and epsilon. omit drops ceil(rho*n) uniformly drawn
    clients in attacked rounds; tamper rewrites their updates instead.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["honest", "omit", "tamper"] = ADVERSARY_DEFAULTS["kind"]
    rho: float = Field(ADVERSARY_DEFAULTS["rho"], ge=0.0, le=1.0)
    epsilon: float = Field(ADVERSARY_DEFAULTS["epsilon"], ge=0.0, le=1.0)
    attack_rounds: Optional[Tuple[int, ...]] = None
    tamper_mode: Literal["zero", "noise", "scale"] = ADVERSARY_DEFAULTS["tamper_mode"]
    tamper_magnitude: float = Field(ADVERSARY_DEFAULTS["tamper_magnitude"], ge=0.0)

    def is_attacked(self, round_idx: int, rng: np.random.Generator) -> bool:
        """Whether the server misbehaves in this round"""
        if self.kind == "honest":
            return False
        if self.attack_rounds is not None:
            return round_idx in self.attack_rounds
        return bool(rng.random() < self.epsilon)

    def victim_count(self, n_clients: int) -> int:
        return int(np.ceil(self.rho * n_clients - 1e-12))


class DataConfig(BaseModel):
    """Synthetic dataset, partitioning and trigger-set parameters"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_classes: int = Field(DATA_DEFAULTS["num_classes"], ge=2)
    channels: int = Field(DATA_DEFAULTS["channels"], ge=1)
    height: int = Field(DATA_DEFAULTS["height"], ge=4)
    width: int = Field(DATA_DEFAULTS["width"], ge=4)
    train_count: int = Field(DATA_DEFAULTS["train_count"], ge=1)
    test_count: int = Field(DATA_DEFAULTS["test_count"], ge=1)
    noise_std: float = Field(DATA_DEFAULTS["noise_std"], ge=0.0)
    partition: Literal["dirichlet", "iid"] = DATA_DEFAULTS["partition"]
    dirichlet_beta: float = Field(DATA_DEFAULTS["dirichlet_beta"], gt=0.0)
    trigger_fraction: float = Field(DATA_DEFAULTS["trigger_fraction"], gt=0.0, le=1.0)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.channels, self.height, self.width)

    @property
    def input_dim(self) -> int:
        return self.channels * self.height * self.width


class ProtocolConfig(BaseModel):
    """Every knob of a simulated federated run"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_clients: int = Field(PROTOCOL_DEFAULTS["n_clients"], ge=1)
    total_rounds: int = Field(PROTOCOL_DEFAULTS["total_rounds"], ge=1)
    lr: float = Field(PROTOCOL_DEFAULTS["lr"], gt=0.0)
    trigger_lr: float = Field(PROTOCOL_DEFAULTS["trigger_lr"], gt=0.0)
    boost: float = Field(PROTOCOL_DEFAULTS["boost"], ge=1.0)
    gamma: float = Field(PROTOCOL_DEFAULTS["gamma"], gt=0.0, lt=1.0)
    batch_size: int = Field(PROTOCOL_DEFAULTS["batch_size"], ge=1)
    momentum: float = Field(PROTOCOL_DEFAULTS["momentum"], ge=0.0, lt=1.0)
    local_epochs: int = Field(PROTOCOL_DEFAULTS["local_epochs"], ge=1)
    trigger_epochs: int = Field(PROTOCOL_DEFAULTS["trigger_epochs"], ge=1)
    trigger_stop_asr: float = Field(PROTOCOL_DEFAULTS["trigger_stop_asr"], gt=0.0, le=1.0)
    trigger_momentum: float = Field(PROTOCOL_DEFAULTS["trigger_momentum"], ge=0.0, lt=1.0)
    trigger_clean_ratio: float = Field(PROTOCOL_DEFAULTS["trigger_clean_ratio"], ge=0.0)
    finetune_epochs: int = Field(PROTOCOL_DEFAULTS["finetune_epochs"], ge=0)
    seed: int = Field(PROTOCOL_DEFAULTS["seed"], ge=0)
    warmup_rounds: int = Field(PROTOCOL_DEFAULTS["warmup_rounds"], ge=0)
    verification: bool = PROTOCOL_DEFAULTS["verification"]
    injection_rounds: Optional[Tuple[int, ...]] = None
    log_client_asr: bool = PROTOCOL_DEFAULTS["log_client_asr"]
    workers: int = Field(PROTOCOL_DEFAULTS["workers"], ge=1)
    hidden_dims: Tuple[int, ...] = MODEL_DEFAULTS["hidden_dims"]
    activation: Literal["relu", "tanh"] = MODEL_DEFAULTS["activation"]
    data: DataConfig = Field(default_factory=DataConfig)
    policy: AdversaryPolicy = Field(default_factory=AdversaryPolicy)

    @model_validator(mode="after")
    def _check_protocol(self) -> "ProtocolConfig":
        if self.verification and self.total_rounds < self.n_clients:
            raise ValueError(
                f"total_rounds={self.total_rounds} < n_clients={self.n_clients}: "
                "some clients would never verify"
            )
        if self.data.train_count < max(self.n_clients, self.data.num_classes):
            raise ValueError("train_count must cover every client and class")
        if any(d <= 0 for d in self.hidden_dims):
            raise ValueError(f"degenerate hidden size in {self.hidden_dims}")
        return self

    @property
    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            layer_dims=(self.data.input_dim, *self.hidden_dims, self.data.num_classes),
            activation=self.activation,
        )

    def injects_in(self, round_idx: int) -> bool:
        """Whether the round's verifier embeds a proof"""
        if not self.verification:
            return False
        return self.injection_rounds is None or round_idx in self.injection_rounds

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON form"""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_flat(self) -> Dict[str, str]:
        """Inverse of ``config_from_flat`` (used for manifests and sweeps)"""
        flat: Dict[str, str] = {}
        dumped = self.model_dump()
        nested = {"data": dumped.pop("data"), "policy": dumped.pop("policy")}
        nested["policy"]["adversary"] = nested["policy"].pop("kind")
        for section in (dumped, nested["data"], nested["policy"]):
            for key, value in section.items():
                flat[key] = _format_flat_value(value)
        return flat


# Flat file keys that belong to nested sections
_DATA_KEYS = set(DataConfig.model_fields)
_POLICY_KEYS = set(AdversaryPolicy.model_fields) - {"kind"} | {"adversary"}
_LIST_KEYS = {"hidden_dims", "injection_rounds", "attack_rounds"}


def _format_flat_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _parse_list(raw: str) -> Optional[Tuple[int, ...]]:
    items = [item.strip() for item in raw.replace(";", ",").split(",")]
    items = [item for item in items if item]
    if not items:
        return None
    return tuple(int(item) for item in items)


def config_from_flat(values: Mapping[str, Optional[str]]) -> ProtocolConfig:
    """
    Build a ProtocolConfig from flat string key/values.

    Args:
        values: mapping as produced by a config file or a sweep override

    Returns:
        Validated configuration

    Raises:
        ConfigError: unknown key, unparsable value or violated invariant
    """
    top: Dict[str, Any] = {}
    data: Dict[str, Any] = {}
    policy: Dict[str, Any] = {}

    for key, raw in values.items():
        key = key.strip()
        if raw is None:
            raise ConfigError(f"config key '{key}' has no value")
        raw = str(raw).strip()
        try:
            value: Any = _parse_list(raw) if key in _LIST_KEYS else raw
        except ValueError as e:
            raise ConfigError(f"config key '{key}': {e}") from e

        if key in _DATA_KEYS:
            data[key] = value
        elif key in _POLICY_KEYS:
            policy["kind" if key == "adversary" else key] = value
        elif key in ProtocolConfig.model_fields and key not in ("data", "policy"):
            if value is None and key == "hidden_dims":
                raise ConfigError("hidden_dims cannot be empty")
            top[key] = value
        else:
            raise ConfigError(f"unknown config key '{key}'")

    try:
        return ProtocolConfig(
            **top, data=DataConfig(**data), policy=AdversaryPolicy(**policy)
        )
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def load_config(path: Union[str, Path]) -> ProtocolConfig:
    """Read a flat ``key = value`` config file; the environment is never consulted"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return config_from_flat(dotenv_values(path, interpolate=False))
