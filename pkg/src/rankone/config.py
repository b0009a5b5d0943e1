"""Experiment configuration files and Mobius-table cache resolution."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from rankone import cache
from rankone.errors import InvalidArgumentError
from rankone.mobius import DEFAULT_SEGMENT_SIZE, MobiusTable, mobius_sieve
from rankone.words import RankOneParams

log = logging.getLogger(__name__)

CACHE_ENV = "RQ_CACHE_DIR"
CACHE_NAME = "mobius.rqmu"


class ParamsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    generator: Literal["explicit", "classic-katok", "km", "constant"] = "explicit"
    depth: Optional[int] = Field(default=None, ge=0)
    cutting: Union[list[int], dict[str, list[int]], int]
    spacers: Optional[Union[list[list[int]], list[int]]] = None
    t_table: Optional[list[list[int]]] = None
    m: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _generator_fields(self):
        if self.generator == "km" and (self.m is None or self.t_table is None):
            raise ValueError("km generator needs both m and t_table")
        if self.generator in ("explicit", "constant") and self.spacers is None:
            raise ValueError(f"{self.generator} generator needs spacers")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="allow")

    params: ParamsModel
    sieve_limit: Optional[int] = Field(default=None, ge=1)
    cache_path: Optional[str] = None
    offsets: Optional[list[int]] = None
    checkpoints: Optional[list[int]] = None
    epsilon: Optional[float] = None
    k_set: Optional[list[int]] = None
    n_targets: Optional[list[int]] = None
    horizon: Optional[int] = Field(default=None, ge=0)


class ConfigError(InvalidArgumentError):
    pass


def _format_validation(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    """Read a config file; a bare parameter object is wrapped as ``{"params": ...}``."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if isinstance(raw, dict) and "params" not in raw:
        raw = {"params": raw}
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None


def params_from_config(cfg: ExperimentConfig) -> RankOneParams:
    data: dict[str, Any] = cfg.params.model_dump(exclude_none=True)
    try:
        return RankOneParams.from_dict(data)
    except InvalidArgumentError as exc:
        raise ConfigError(f"params.{exc}") from None


def resolve_cache_path(explicit: str | None = None, cfg: ExperimentConfig | None = None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env) / CACHE_NAME
    if cfg is not None and cfg.cache_path:
        return Path(cfg.cache_path)
    return Path.home() / ".cache" / "rankone" / CACHE_NAME


def load_or_build_table(
    path: Path, limit: int, segment_size: int = DEFAULT_SEGMENT_SIZE, threads: int = 1
) -> tuple[MobiusTable, bool]:
    """Reuse the cache when its header is valid and covers ``limit``; otherwise sieve and write.

    A cache that fails validation raises IntegrityError rather than being
    rebuilt behind the caller's back.
    """
    if path.exists():
        _, _, cached_limit = cache.read_header(path)
        table = cache.read_cache(path)
        if cached_limit >= limit:
            log.info("reusing cache %s (limit %d)", path, cached_limit)
            return table, True
        log.info("cache %s covers %d < %d; rebuilding", path, cached_limit, limit)
    table = mobius_sieve(limit, segment_size=segment_size, threads=threads)
    cache.write_cache(table, path)
    return table, False
