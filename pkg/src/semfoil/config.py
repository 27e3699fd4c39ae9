"""Run configuration: JSON (or TOML on Python 3.11+) key-value files.

Unknown keys are rejected at load time; every value is validated before
any work starts. The backend base URL resolves as: built-in default, then
the SEMFOIL_BASE_URL environment variable, then the config file, then an
explicit command-line flag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .backends import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_MAX_IN_FLIGHT,
    DEFAULT_TIMEOUT,
)
from .pipeline import FILTERS, FilterSpec
from .transforms import (
    DEFAULT_POLICY,
    EligibilityPolicy,
    ManipulationType,
)


class ConfigError(ValueError):
    """Bad configuration file or option value."""


@dataclass
class RunConfig:
    base_url: str | None = None
    wordnet_dir: str | None = None
    seed: int = 0
    filter: str = "main"
    filters: dict[str, dict] = field(default_factory=dict)  # extra named filters
    pronouns: list[str] | None = None
    structural_exclusions: list[str] | None = None
    allowed_manipulations: list[str] | None = None
    batch_size: int = DEFAULT_BATCH_SIZE
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT
    timeout: float = DEFAULT_TIMEOUT
    cache_dir: str | None = None
    nli_symmetric: bool = False
    nli_reference: str = "source"
    strip_wiki: bool = False
    workers: int = 4

    def validate(self) -> None:
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        for name in ("batch_size", "max_in_flight", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if self.nli_reference not in ("source", "paraphrase"):
            raise ConfigError("nli_reference must be 'source' or 'paraphrase'")
        self.filter_spec()
        self.policy()
        self.allowed()

    def filter_spec(self, name: str | None = None) -> FilterSpec:
        wanted = name or self.filter
        if wanted in self.filters:
            raw = self.filters[wanted]
            try:
                return FilterSpec(
                    name=wanted,
                    target_label=int(raw["target_label"]),
                    prob_low=float(raw["prob_low"]),
                    prob_high=float(raw["prob_high"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"filter {wanted!r}: {exc}") from None
        if wanted in FILTERS:
            return FILTERS[wanted]
        known = sorted(set(FILTERS) | set(self.filters))
        raise ConfigError(f"unknown filter {wanted!r}; known: {known}")

    def policy(self) -> EligibilityPolicy:
        if self.pronouns is None and self.structural_exclusions is None:
            return DEFAULT_POLICY
        try:
            return EligibilityPolicy(
                pronouns=(
                    frozenset(self.pronouns)
                    if self.pronouns is not None
                    else DEFAULT_POLICY.pronouns
                ),
                structural=(
                    frozenset(self.structural_exclusions)
                    if self.structural_exclusions is not None
                    else DEFAULT_POLICY.structural
                ),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def allowed(self) -> frozenset[ManipulationType]:
        if self.allowed_manipulations is None:
            return frozenset(ManipulationType)
        try:
            kinds = frozenset(ManipulationType(k) for k in self.allowed_manipulations)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not kinds:
            raise ConfigError("allowed_manipulations is empty")
        return kinds


def _read_mapping(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            raise ConfigError(
                "TOML config needs Python >= 3.11; use a JSON config instead"
            ) from None
        return tomllib.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config(path: str | None = None, **overrides) -> RunConfig:
    """Build a validated RunConfig from an optional file plus overrides.

    Override values of None mean "not set" and never mask file values.
    """
    known = {f.name for f in fields(RunConfig)}
    data: dict = {}
    if path is not None:
        raw = _read_mapping(Path(path))
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown keys {unknown}")
        data.update(raw)
    for key, value in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown option {key!r}")
        if value is not None:
            data[key] = value
    try:
        config = RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    config.validate()
    return config
