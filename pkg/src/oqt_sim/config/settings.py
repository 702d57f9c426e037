"""Runtime settings for multiple environments.

Every setting can be overridden by an environment variable carrying the
``OQT_`` prefix; a ``.env`` file in the working directory is read first.
"""

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from dotenv import load_dotenv

ENV_PREFIX = "OQT_"


class Environment(Enum):
    """Application environments."""
    DEVELOPMENT = "development"
    PRODUCTION = "production"
    TESTING = "testing"


class RunMode(Enum):
    """Which dynamics an experiment evaluates."""
    MASTER = "master"
    TRAJECTORIES = "trajectories"
    BOTH = "both"


def _env(name: str, default: str) -> str:
    return os.getenv(ENV_PREFIX + name, default)


def _env_optional(name: str) -> Optional[str]:
    value = os.getenv(ENV_PREFIX + name)
    return value if value not in (None, "") else None


@dataclass
class ExecutionConfig:
    """Worker pool and integrator batching configuration."""
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    batch_size: int = 250  # trajectories per pool task
    noise_block: int = 256  # integrator steps drawn per noise call
    output_dir: Optional[str] = None
    seed: Optional[int] = None
    mode: Optional[RunMode] = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("OQT_WORKERS must be a positive integer")
        if self.batch_size < 1:
            raise ValueError("OQT_BATCH_SIZE must be a positive integer")
        if self.noise_block < 1:
            raise ValueError("OQT_NOISE_BLOCK must be a positive integer")
        if self.seed is not None and self.seed < 0:
            raise ValueError("OQT_SEED must be a non-negative integer")


@dataclass
class MonitoringConfig:
    """Monitoring and logging configuration."""
    log_level: str = "INFO"
    json_logging: bool = True
    enable_metrics: bool = True
    metrics_file: str = "metrics.prom"


@dataclass
class Config:
    """Main runtime configuration."""
    environment: Environment = Environment.DEVELOPMENT
    execution: ExecutionConfig = field(default_factory=ExecutionConfig)
    monitoring: MonitoringConfig = field(default_factory=MonitoringConfig)

    @classmethod
    def from_env(cls) -> "Config":
        """Load configuration from environment variables."""
        load_dotenv()

        env = Environment(_env("ENVIRONMENT", "development"))

        seed = _env_optional("SEED")
        mode = _env_optional("MODE")
        execution = ExecutionConfig(
            workers=int(_env("WORKERS", str(os.cpu_count() or 1))),
            batch_size=int(_env("BATCH_SIZE", "250")),
            noise_block=int(_env("NOISE_BLOCK", "256")),
            output_dir=_env_optional("OUT"),
            seed=int(seed) if seed is not None else None,
            mode=RunMode(mode) if mode is not None else None,
        )

        # Human-readable logs by default while developing
        default_json = "false" if env == Environment.DEVELOPMENT else "true"
        monitoring = MonitoringConfig(
            log_level=_env("LOG_LEVEL", "INFO"),
            json_logging=_env("JSON_LOGGING", default_json).lower() == "true",
            enable_metrics=_env("ENABLE_METRICS", "true").lower() == "true",
            metrics_file=_env("METRICS_FILE", "metrics.prom"),
        )

        return cls(environment=env, execution=execution, monitoring=monitoring)

    def is_development(self) -> bool:
        """Check if running in development mode."""
        return self.environment == Environment.DEVELOPMENT

    def is_testing(self) -> bool:
        """Check if running in testing mode."""
        return self.environment == Environment.TESTING


# Global config instance
_config: Optional[Config] = None


def load_config() -> Config:
    """Load and cache configuration."""
    global _config
    if _config is None:
        _config = Config.from_env()
    return _config


def get_config() -> Config:
    """Get cached configuration."""
    if _config is None:
        return load_config()
    return _config


def reload_config() -> Config:
    """Reload configuration from environment."""
    global _config
    _config = Config.from_env()
    return _config
