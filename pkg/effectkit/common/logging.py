import logging
import sys
from typing import List, Optional, Union

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def resolve_level(level: Union[int, str]) -> int:
    """Numeric level for an int or a level name such as "debug".

    Raises:
        ValueError: If the name is not a logging level
    """
    if isinstance(level, int):
        return level
    value = logging.getLevelName(level.strip().upper())
    if not isinstance(value, int):
        raise ValueError(f"Unknown log level: {level}")
    return value


def setup_logging(
    level: Union[int, str] = logging.INFO,
    format: str = LOG_FORMAT,
    log_file: Optional[str] = None
) -> None:
    """Configure the root logger for a toolkit run.

    Records go to stderr, keeping stdout free for listings. Calling this
    again replaces the previous handlers.

    Args:
        level: Level as int or name (default: INFO)
        format: Record format
        log_file: Optional file receiving the same records
    """
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(level=resolve_level(level), format=format, handlers=handlers, force=True)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
