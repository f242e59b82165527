"""Configuration package."""

from app.config.settings import DEFAULT_ATLAS_PATH, Settings, get_settings

__all__ = ["DEFAULT_ATLAS_PATH", "Settings", "get_settings"]
