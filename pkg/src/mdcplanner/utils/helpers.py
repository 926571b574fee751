"""
Helper utilities for the MDC planner.
Provides unit conversions, logging setup and hashing.
"""

import hashlib
import json
import sys
from typing import Any, Optional

from loguru import logger


# Canonical internal units are bits, seconds and meters.
BITS_PER_KILOBIT = 1_000
BITS_PER_MEGABIT = 1_000_000
BITS_PER_MEGABYTE = 8_000_000


def kbps_to_bps(rate_kbps: float) -> float:
    """Convert kilobits per second to bits per second."""
    return rate_kbps * BITS_PER_KILOBIT


def mbps_to_bps(rate_mbps: float) -> float:
    """Convert megabits per second to bits per second."""
    return rate_mbps * BITS_PER_MEGABIT


def megabytes_to_bits(size_mb: float) -> float:
    """Convert (decimal) megabytes to bits."""
    return size_mb * BITS_PER_MEGABYTE


def stable_hash(payload: Any, algorithm: str = "sha256", length: int = 16) -> str:
    """
    Hash a JSON-serializable payload independently of dict ordering.

    Args:
        payload: JSON-serializable object
        algorithm: hashlib algorithm name
        length: Number of hex characters to keep

    Returns:
        Hex digest prefix
    """
    encoded = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.new(algorithm, encoded).hexdigest()[:length]


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Install loguru sinks for console and optional file output.

    Args:
        level: Minimum level for both sinks
        log_file: Optional path of a rotating log file
    """
    logger.remove()
    logger.add(
        sys.stderr,
        level=level.upper(),
        format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | "
               "{extra[component]} | <level>{message}</level>",
    )
    if log_file:
        logger.add(log_file, level=level.upper(), rotation="10 MB", retention=5, enqueue=True)
    logger.configure(extra={"component": "mdcplanner"})
