"""
Input validation utilities for the MDC planner.
Provides validators for permutations, physical quantities, coordinates and run ids.
"""

import math
import re
from typing import Sequence, List

import numpy as np

from .exceptions import InvalidArgumentError


def validate_permutation(order: Sequence[int], m: int) -> List[int]:
    """
    Validate that an order is a permutation of {0, ..., m-1}.

    Args:
        order: Candidate visiting order
        m: Size of the RP index set

    Returns:
        The order as a list of Python ints

    Raises:
        InvalidArgumentError: If the order is not a permutation or m is zero
    """
    if m <= 0:
        raise InvalidArgumentError("RP set is empty; a tour needs at least one RP")

    values = [int(v) for v in order]
    if len(values) != m or sorted(values) != list(range(m)):
        raise InvalidArgumentError(
            f"Order {values[:20]} is not a permutation of 0..{m - 1}",
            details={"length": len(values), "expected": m},
        )
    return values


def validate_positive(value: float, name: str) -> float:
    """
    Validate that a physical quantity is finite and strictly positive.

    Raises:
        InvalidArgumentError: If the value is not finite or <= 0
    """
    if not math.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be > 0, got {value}")
    return float(value)


def validate_non_negative(value: float, name: str) -> float:
    """Validate that a physical quantity is finite and >= 0."""
    if not math.isfinite(value) or value < 0:
        raise InvalidArgumentError(f"{name} must be >= 0, got {value}")
    return float(value)


def validate_xy(points: np.ndarray, name: str = "points") -> np.ndarray:
    """
    Validate an (n, 2) coordinate array.

    Args:
        points: Array-like of planar coordinates
        name: Name used in error messages

    Returns:
        The coordinates as a float64 array of shape (n, 2)
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidArgumentError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite coordinates")
    return arr


def validate_run_id(run_id: str) -> None:
    """
    Validate run ID format.

    Args:
        run_id: Run ID to validate

    Raises:
        InvalidArgumentError: If run ID format is invalid
    """
    if not run_id:
        raise InvalidArgumentError("Run ID cannot be empty")

    # Run ids are used as directory names
    if not re.match(r'^[a-zA-Z0-9_+-]+$', run_id):
        raise InvalidArgumentError(
            "Run ID must contain only alphanumeric characters, '+', hyphens, and underscores"
        )

    if len(run_id) > 100:
        raise InvalidArgumentError("Run ID must be at most 100 characters")
