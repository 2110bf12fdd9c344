"""Configuration settings and models for feedback lab experiments."""

import json
from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, validator

from ..channel.spec import ChannelSpec, validate_channel
from ..coding.encoder import EncoderSpec
from ..errors import ConfigError


class LogBase(str, Enum):
    """Logarithm base used when numbers are emitted."""
    NATURAL = "e"
    BITS = "2"


class ChannelConfig(BaseModel):
    """Noise filter coefficients: numerator 1 + f, denominator 1 + (f + g); empty for AWGN."""
    f: List[float] = Field(default_factory=list)
    g: List[float] = Field(default_factory=list)

    @validator('g', always=True)
    def validate_lengths(cls, v, values):
        f = values.get('f')
        if f is not None and len(f) != len(v):
            raise ValueError(f'f and g must have equal length, got {len(f)} and {len(v)}')
        return v

    def to_spec(self) -> ChannelSpec:
        return validate_channel(self.f, self.g)


class EncoderConfig(BaseModel):
    """Encoder as a row-major A with C, or the scalar shorthand {a, c}."""
    A: Optional[List[List[float]]] = None
    C: Optional[List[float]] = None
    a: Optional[float] = None
    c: float = 1.0

    @validator('A')
    def validate_square(cls, v):
        if v is not None and any(len(row) != len(v) for row in v):
            raise ValueError('A must be square')
        return v

    @validator('C', always=True)
    def validate_output(cls, v, values):
        A = values.get('A')
        if A is not None:
            if v is None:
                raise ValueError('C is required when A is given')
            if len(v) != len(A):
                raise ValueError(f'C has {len(v)} entries but A is {len(A)}x{len(A)}')
        return v

    @validator('a', always=True)
    def validate_form(cls, v, values):
        if (v is None) == (values.get('A') is None):
            raise ValueError('give either A and C, or the scalar shorthand a (with optional c)')
        return v

    def to_spec(self) -> EncoderSpec:
        if self.A is not None:
            return EncoderSpec.from_matrices(self.A, self.C)
        return EncoderSpec.scalar(self.a, self.c)


class MonteCarloConfig(BaseModel):
    """Error-rate sweep settings."""
    power: float = 3.0
    eps: float = 0.2
    horizons: List[int] = Field(default_factory=lambda: [10, 25, 40])
    trials: int = 10000
    zero_noise: bool = False
    c: float = 1.0
    chunk_size: int = 1000
    max_workers: int = 4

    @validator('eps')
    def validate_eps(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError('eps must lie in (0, 1)')
        return v

    @validator('trials', 'chunk_size', 'max_workers')
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('must be at least 1')
        return v


class SearchConfig(BaseModel):
    """Capacity search settings (multi-start Nelder-Mead)."""
    n: int = 0
    restarts: int = 8
    max_iter: int = 2000
    seed: int = 0
    max_workers: int = 4
    penalty: float = 1e4
    rank_rtol: float = 1e-4

    @validator('restarts', 'max_iter', 'max_workers')
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('must be at least 1')
        return v


class OutputConfig(BaseModel):
    """Where and how results are written."""
    directory: str = "results"
    log_base: LogBase = LogBase.NATURAL
    log_file: Optional[str] = None
    log_level: str = "INFO"


class ExperimentConfig(BaseModel):
    """Main configuration class."""
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    encoder: EncoderConfig = Field(default_factory=lambda: EncoderConfig(a=2.0, c=1.0))
    horizon: int = 60
    power_budget: Optional[float] = None
    rate_target: Optional[float] = None
    seed: int = 7
    trials: Optional[int] = None  # overrides montecarlo.trials
    convergence_horizons: List[int] = Field(default_factory=list)
    montecarlo: MonteCarloConfig = Field(default_factory=MonteCarloConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    tolerance: float = 1e-8

    @validator('horizon')
    def validate_horizon(cls, v):
        if v < 0:
            raise ValueError('horizon must be non-negative')
        return v

    @validator('rate_target')
    def validate_single_target(cls, v, values):
        if v is not None and values.get('power_budget') is not None:
            raise ValueError('give at most one of power_budget and rate_target')
        return v

    @validator('trials')
    def validate_trials(cls, v):
        if v is not None and v < 1:
            raise ValueError('trials must be at least 1')
        return v

    @property
    def effective_trials(self) -> int:
        return self.trials if self.trials is not None else self.montecarlo.trials

    def search_target(self) -> dict:
        """Keyword arguments for capacity_search; exactly one target must be set."""
        if (self.power_budget is None) == (self.rate_target is None):
            raise ConfigError('capacity search needs exactly one of power_budget and rate_target')
        if self.power_budget is not None:
            return {"power_budget": self.power_budget}
        return {"rate_target": self.rate_target}

    @classmethod
    def from_file(cls, config_path: Union[str, Path]) -> "ExperimentConfig":
        """Load configuration from a JSON or YAML file.

        Raises:
            ConfigError: the file is missing, does not parse (line and column are
                reported) or fails validation (the failing key path is reported).
        """
        config_path = Path(config_path)
        if not config_path.exists():
            raise ConfigError(f"Configuration file not found: {config_path}")

        text = config_path.read_text(encoding='utf-8')
        if config_path.suffix.lower() == '.json':
            try:
                config_data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(
                    f"{config_path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
        else:
            try:
                config_data = yaml.safe_load(text)
            except yaml.YAMLError as e:
                mark = getattr(e, 'problem_mark', None)
                where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
                raise ConfigError(f"{config_path}: {where}{getattr(e, 'problem', e)}") from e

        if config_data is None:
            config_data = {}
        if not isinstance(config_data, dict):
            raise ConfigError(f"{config_path}: top level must be a mapping")
        return cls.from_dict(config_data, source=str(config_path))

    @classmethod
    def from_dict(cls, config_data: dict, source: str = "config") -> "ExperimentConfig":
        try:
            return cls(**config_data)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
                for err in e.errors())
            raise ConfigError(f"{source}: {problems}") from e

    def to_yaml(self, config_path: Union[str, Path]) -> None:
        """Save configuration to YAML file."""
        config_path = Path(config_path)
        config_path.parent.mkdir(parents=True, exist_ok=True)

        with open(config_path, 'w', encoding='utf-8') as f:
            yaml.dump(self.model_dump(mode='json', exclude_none=True), f,
                      default_flow_style=False, indent=2, sort_keys=False)
