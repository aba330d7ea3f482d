"""
Configuration management for the seamless-L0 quantile regression toolkit
"""
import os
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional
from dotenv import load_dotenv

from src.utils.errors import UsageError

# Load environment variables
load_dotenv()


class Config:
    """Application configuration"""

    # Project paths
    BASE_DIR = Path(__file__).parent.parent.parent
    OUTPUT_DIR = Path(os.getenv("SELO_OUTPUT_DIR", str(BASE_DIR / "output")))
    LOGS_DIR = BASE_DIR / "logs"

    # Logging
    LOG_LEVEL = os.getenv("SELO_LOG_LEVEL", "WARNING").upper()
    LOG_FILE = os.getenv("SELO_LOG_FILE")

    # Run defaults
    DEFAULT_SEED = int(os.getenv("SELO_SEED", "2024"))
    DEFAULT_THREADS = int(os.getenv("SELO_THREADS", "0"))  # 0 = auto
    SHOW_PROGRESS = os.getenv("SELO_SHOW_PROGRESS", "false").lower() == "true"

    @classmethod
    def resolve_threads(cls, threads: int) -> int:
        """Turn the 0 = auto convention into a worker count"""
        if threads and threads > 0:
            return threads
        return max(1, min(8, os.cpu_count() or 1))

    @classmethod
    def validate(cls):
        """Validate configuration values"""
        if cls.LOG_LEVEL not in logging._nameToLevel:
            raise ValueError(f"Unknown SELO_LOG_LEVEL: {cls.LOG_LEVEL}")
        if cls.DEFAULT_THREADS < 0:
            raise ValueError("SELO_THREADS must be >= 0")
        return True


def setup_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once for CLI and script runs"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.LOG_FILE:
        config.LOGS_DIR.mkdir(exist_ok=True)
        handlers.append(logging.FileHandler(config.LOGS_DIR / config.LOG_FILE))

    logging.basicConfig(
        level=(level or config.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True
    )


def load_config_file(path: Path) -> Dict[str, str]:
    """
    Read a flat key = value configuration file

    Args:
        path: File to read; '#' starts a comment, blank lines are ignored

    Returns:
        Mapping of lower-cased keys to raw string values
    """
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"Config file not found: {path}")

    values: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")

        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if not key:
            raise UsageError(f"{path}:{lineno}: empty key")
        if key in values:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value

    return values


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of numbers ('0.1, 0.2,0.3')"""
    items = [item.strip() for item in str(text).split(",")]
    items = [item for item in items if item]
    try:
        return [float(item) for item in items]
    except ValueError as e:
        raise UsageError(f"Invalid number list {text!r}: {e}") from e


# Export config instance
config = Config()
