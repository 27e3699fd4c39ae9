"""Server configuration.

Every configured capability must load at startup or the server refuses
to start. The reserved model identifier ``stub`` selects a deterministic
rule-based capability that needs no checkpoints; it keeps the wire
contract testable on machines without GPUs or model downloads. Setting
an identifier to null disables the capability (its endpoint answers 503).
"""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

STUB = "stub"

# Default checkpoints; the NLI validator is a robustness-enhanced
# DeBERTa-v3 classifier, the parser/generator are the standard
# BART/T5-based AMR models distributed with the amrlib toolkit.
DEFAULT_PARSER = "parse_xfm_bart_base-v0_1_0"
DEFAULT_GENERATOR = "generate_t5wtense-v0_1_0"
DEFAULT_NLI = "juliussteen/DeBERTa-v3-FaithAug"


class ServerConfig(BaseModel):
    parser_model: str | None = STUB
    generator_model: str | None = STUB
    nli_model: str | None = STUB
    # allow-list of embedding model ids clients may request
    embedder_models: list[str] = Field(default_factory=lambda: [STUB])
    device: str = "cpu"
    max_batch_size: int = 64
    port: int = 8470

    @field_validator("max_batch_size")
    @classmethod
    def _positive_batch(cls, value: int) -> int:
        if value < 1:
            raise ValueError("max_batch_size must be >= 1")
        return value

    @field_validator("port")
    @classmethod
    def _sane_port(cls, value: int) -> int:
        if not 0 < value < 65536:
            raise ValueError("port must be in 1..65535")
        return value

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides) -> "ServerConfig":
        data: dict = {}
        if path is not None:
            data.update(json.loads(Path(path).read_text(encoding="utf-8")))
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data, strict=False)

    model_config = {"extra": "forbid"}
