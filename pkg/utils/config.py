"""
Configuration utilities for the hyperbolic Dirichlet solver.

This module loads environment variables from the .env file and provides
a centralized configuration for the application, plus the loader for
run configuration files.
"""
import configparser
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from schemas.run_config import RunConfig
from utils.errors import ConfigurationError

# Load environment variables from .env file
load_dotenv()

# Configure logging
logger = logging.getLogger(__name__)

CONFIG_SECTIONS = ("domain", "curvature", "solve", "output")


def _clean_placeholder(value: Optional[str]) -> Optional[str]:
    """
    Cleans placeholder values from environment variables.

    Args:
        value: The environment variable value

    Returns:
        Optional[str]: None if the value is a placeholder, otherwise the value
    """
    if not value:
        return None

    # Common placeholder patterns
    placeholders = [
        "your_", "YOUR_", "placeholder_", "PLACEHOLDER_",
        "<your_", "<YOUR_", "<placeholder_", "<PLACEHOLDER_",
        "your-", "YOUR-", "placeholder-", "PLACEHOLDER-"
    ]

    for placeholder in placeholders:
        if value.startswith(placeholder):
            return None

    return value


class Config:
    """
    Application configuration loaded from environment variables.
    """
    # Development mode
    DEV_MODE: bool = os.getenv("DEV_MODE", "true").lower() == "true"

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "info")

    # Output
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "runs")

    # Property suite sampling
    VALIDATE_SAMPLES: int = int(os.getenv("VALIDATE_SAMPLES") or "10000")
    VALIDATE_SEED: int = int(os.getenv("VALIDATE_SEED") or "20240601")

    # Monitoring
    SENTRY_DSN: Optional[str] = _clean_placeholder(os.getenv("SENTRY_DSN"))

    @classmethod
    def as_dict(cls) -> Dict[str, Any]:
        """
        Returns the configuration as a dictionary.

        Returns:
            Dict[str, Any]: Configuration dictionary
        """
        return {
            key: value for key, value in cls.__dict__.items()
            if not key.startswith("__") and not callable(value) and not isinstance(value, classmethod)
        }

    @classmethod
    def validate(cls) -> None:
        """
        Validates the configuration and logs warnings for unusable values.
        """
        if cls.VALIDATE_SAMPLES < 1:
            logger.warning(f"VALIDATE_SAMPLES={cls.VALIDATE_SAMPLES} is not positive; the property suite will be empty")

        if getattr(logging, cls.LOG_LEVEL.upper(), None) is None:
            logger.warning(f"Unknown LOG_LEVEL '{cls.LOG_LEVEL}', falling back to INFO")

        if not cls.SENTRY_DSN:
            logger.debug("SENTRY_DSN not configured; error tracking disabled")


def _parse_sections(path: Path) -> Dict[str, Dict[str, str]]:
    """
    Reads a flat sectioned configuration file.

    Args:
        path: Path of the configuration file

    Returns:
        Dict[str, Dict[str, str]]: Raw string values per section

    Raises:
        ConfigurationError: If the file is unreadable or malformed
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as e:
        raise ConfigurationError(f"Cannot read configuration file {path}: {e}")
    except configparser.Error as e:
        raise ConfigurationError(f"Malformed configuration file {path}: {e}")

    unknown = [name for name in parser.sections() if name not in CONFIG_SECTIONS]
    if unknown:
        raise ConfigurationError(
            f"Unknown configuration sections: {', '.join(unknown)}",
            messages=[f"{name}: unknown section" for name in unknown],
        )

    return {name: dict(parser.items(name)) for name in parser.sections()}


def _clean_values(raw: Dict[str, Dict[str, str]]) -> Dict[str, Dict[str, Any]]:
    """Drops empty values so pydantic defaults apply."""
    cleaned: Dict[str, Dict[str, Any]] = {}
    for section, values in raw.items():
        cleaned[section] = {key: value.strip() for key, value in values.items() if value.strip() != ""}
    return cleaned


def format_validation_error(error: PydanticValidationError) -> list:
    """
    Converts a pydantic validation error into field-level messages.

    Args:
        error: The pydantic validation error

    Returns:
        list: Messages of the form "section.field: message"
    """
    messages = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ()))
        messages.append(f"{location or 'config'}: {item.get('msg', 'invalid value')}")
    return messages


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Loads and validates a run configuration file.

    Args:
        path: Path of the configuration file

    Returns:
        RunConfig: The validated run configuration

    Raises:
        ConfigurationError: If the file is missing, malformed or fails validation
    """
    path = Path(path)
    raw = _parse_sections(path)
    try:
        config = RunConfig.model_validate(_clean_values(raw))
    except PydanticValidationError as e:
        messages = format_validation_error(e)
        for message in messages:
            logger.error(f"Configuration error: {message}")
        raise ConfigurationError(f"Invalid configuration {path}", messages=messages)

    logger.info(f"Loaded run configuration from {path} (hash {config.config_hash()[:12]})")
    return config


# Validate configuration on module import
Config.validate()
