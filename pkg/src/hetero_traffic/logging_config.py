"""
Root logging setup shared by the CLI and the tests.

Library modules only call logging.getLogger(__name__). Their lines use a
key=value layout (step=12 t=0.6 nu=0.41) so a DEBUG run can be grepped or
loaded as columns. A run log file can be attached next to the console
handler; per-step DEBUG lines for a 60 s scenario run to a few thousand.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Union

LEVEL_MAP = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}

DEFAULT_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Third-party loggers that flood DEBUG output (font discovery, SVG backend).
NOISY_LOGGERS = ("matplotlib", "PIL")

# File handler opened by the last configure_logging call, closed on the next one.
_run_file_handler: Optional[logging.FileHandler] = None


def resolve_level(level_str: Optional[str]) -> int:
    """Level name (any case) -> logging level; unknown or empty -> WARNING."""
    return LEVEL_MAP.get((level_str or "WARNING").upper(), logging.WARNING)


def configure_logging(
    level_str: Optional[str],
    *,
    fmt: Optional[str] = None,
    log_file: Optional[Union[str, Path]] = None,
) -> None:
    """
    (Re)configure the root logger. Safe to call repeatedly.

    Args:
        level_str: "DEBUG", "INFO", "WARNING" or "ERROR", case-insensitive.
        fmt: Optional format override for every handler.
        log_file: Optional path; the file receives the same records as stderr.
            Its parent directory is created.
    """
    global _run_file_handler

    level = resolve_level(level_str)
    root = logging.getLogger()
    for h in list(root.handlers):
        root.removeHandler(h)
    if _run_file_handler is not None:
        _run_file_handler.close()
        _run_file_handler = None

    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file is not None:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        _run_file_handler = logging.FileHandler(path, mode="w", encoding="utf-8")
        handlers.append(_run_file_handler)
    logging.basicConfig(level=level, format=fmt or DEFAULT_FORMAT, handlers=handlers)

    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))

    logger = logging.getLogger(__name__)
    logger.debug("configure_logging level_str=%s level=%d log_file=%s", level_str, level, log_file)
    logger.warning("Logging configured to %s", logging.getLevelName(level))
