"""
Reference solvers used to check the planners on small instances.
"""

import itertools
import math
from typing import List, Sequence, Tuple

import numpy as np

from .exceptions import InvalidArgumentError

BRUTE_FORCE_MAX_POINTS = 9


def brute_force_tour(rp_xy, closed: bool = True,
                     max_points: int = BRUTE_FORCE_MAX_POINTS) -> Tuple[List[int], float]:
    """
    Shortest tour by exhaustive enumeration.

    Closed tours fix RP 0 at the head, so rotations are not enumerated twice.

    Returns:
        (order, length) of the first optimum in lexicographic order
    """
    xy = np.asarray(rp_xy, dtype=float).reshape(-1, 2)
    m = len(xy)
    if m < 1:
        raise InvalidArgumentError("a tour needs at least one RP")
    if m > max_points:
        raise InvalidArgumentError(f"brute force is limited to {max_points} points, got {m}")
    if m == 1:
        return [0], 0.0

    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))

    if closed:
        tails = np.array(list(itertools.permutations(range(1, m))), dtype=int)
        perms = np.hstack([np.zeros((len(tails), 1), dtype=int), tails])
    else:
        perms = np.array(list(itertools.permutations(range(m))), dtype=int)

    lengths = dist[perms[:, :-1], perms[:, 1:]].sum(axis=1)
    if closed:
        lengths = lengths + dist[perms[:, -1], perms[:, 0]]

    best = int(np.argmin(lengths))
    return [int(v) for v in perms[best]], float(lengths[best])


def fixed_point_tour_time(travel_time_s: float, rates_bps: Sequence[float],
                          upload_rates_bps: Sequence[float]) -> float:
    """T* = T_tr / (1 - rho), with rho the summed RP utilization."""
    rho = math.fsum(r / u for r, u in zip(rates_bps, upload_rates_bps))
    if rho >= 1.0:
        raise InvalidArgumentError(f"no finite fixed point for utilization {rho:.6f}")
    return travel_time_s / (1.0 - rho)


def fixed_point_dwell(travel_time_s: float, rates_bps: Sequence[float],
                      upload_rates_bps: Sequence[float]) -> List[float]:
    """Per-RP dwell times at the fixed point."""
    t = fixed_point_tour_time(travel_time_s, rates_bps, upload_rates_bps)
    return [r / u * t for r, u in zip(rates_bps, upload_rates_bps)]
