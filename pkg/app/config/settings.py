"""Runtime settings loaded from the environment."""

import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

DEFAULT_ATLAS_PATH = Path(__file__).parent / "atlas.json"


def _int_env(name: str, default: int) -> int:
    """
    Read an integer environment variable.

    Raises:
        ValueError: If the variable is set but not an integer
    """
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e


@dataclass(frozen=True)
class Settings:
    """Toolkit configuration; CLI flags override these values."""

    log_level: str = "INFO"
    max_cut_rounds: int = 200
    q_cartier_cap: int = 10**6
    jobs: int = 1
    seed: int = 0
    random_samples: int = 20
    sample_box: int = 5
    api_host: str = "127.0.0.1"
    api_port: int = 8000
    atlas_path: Path = DEFAULT_ATLAS_PATH

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Build settings from FIT_* environment variables.

        Returns:
            Settings: environment values over defaults

        Raises:
            ValueError: If a numeric variable cannot be parsed
        """
        atlas = os.getenv("FIT_ATLAS_PATH")
        return cls(
            log_level=os.getenv("FIT_LOG_LEVEL", "INFO").upper(),
            max_cut_rounds=_int_env("FIT_MAX_CUT_ROUNDS", 200),
            q_cartier_cap=_int_env("FIT_Q_CARTIER_CAP", 10**6),
            jobs=_int_env("FIT_JOBS", 1),
            seed=_int_env("FIT_SEED", 0),
            random_samples=_int_env("FIT_RANDOM_SAMPLES", 20),
            sample_box=_int_env("FIT_SAMPLE_BOX", 5),
            api_host=os.getenv("FIT_API_HOST", "127.0.0.1"),
            api_port=_int_env("FIT_API_PORT", 8000),
            atlas_path=Path(atlas) if atlas else DEFAULT_ATLAS_PATH,
        )

    def override(self, **changes) -> "Settings":
        """Copy with the given non-None fields replaced."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, read from the environment on first use."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings
