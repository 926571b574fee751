"""
Classical tour constructors used as the comparison axis: a random tour,
nearest-neighbor chaining and cheapest insertion.
"""

from typing import List, Tuple, Union

import numpy as np

from ..models.network_models import Point2D
from ..utils.exceptions import InvalidArgumentError
from .rng import PLANNER_STREAM, make_rng
from .tour_model import _as_xy

Anchor = Union[int, Point2D, Tuple[float, float], None]


def distance_matrix(xy: np.ndarray) -> np.ndarray:
    diff = xy[:, None, :] - xy[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def random_tour(seed: int, m: int) -> List[int]:
    """Uniform random permutation drawn from the random planner's stream."""
    if m < 1:
        raise InvalidArgumentError(f"m must be >= 1, got {m}")
    rng = make_rng(seed, PLANNER_STREAM, "random")
    return [int(v) for v in rng.permutation(m)]


def nearest_rp(rp_xy: np.ndarray, point) -> int:
    """Index of the RP closest to a point; ties go to the lowest index."""
    p = np.asarray(point.as_tuple() if hasattr(point, "as_tuple") else point, dtype=float)
    return int(np.argmin(np.linalg.norm(rp_xy - p, axis=1)))


def nearest_neighbor_tour(rp_positions, start: Anchor = None) -> List[int]:
    """
    Greedy nearest-unvisited chain.

    Args:
        rp_positions: RP coordinates
        start: RP index to start from, or a location (typically the sink)
            whose nearest RP starts the chain; defaults to RP 0

    Returns:
        Permutation of RP indices
    """
    xy = _as_xy(rp_positions)
    m = len(xy)
    if m < 1:
        raise InvalidArgumentError("a tour needs at least one RP")

    if start is None:
        current = 0
    elif isinstance(start, (int, np.integer)):
        if not 0 <= int(start) < m:
            raise InvalidArgumentError(f"start RP {start} out of range for {m} RPs")
        current = int(start)
    else:
        current = nearest_rp(xy, start)

    dist = distance_matrix(xy)
    visited = np.zeros(m, dtype=bool)
    order = [current]
    visited[current] = True
    for _ in range(m - 1):
        candidates = np.where(visited, np.inf, dist[current])
        current = int(np.argmin(candidates))
        visited[current] = True
        order.append(current)
    return order


def greedy_insertion_tour(rp_positions, closed: bool = True) -> List[int]:
    """
    Cheapest-insertion tour.

    Starts from the two mutually farthest RPs, then repeatedly inserts the
    (RP, position) pair with the lowest added length. Ties go to the lower
    RP index, then the earlier position.
    """
    xy = _as_xy(rp_positions)
    m = len(xy)
    if m < 1:
        raise InvalidArgumentError("a tour needs at least one RP")
    if m == 1:
        return [0]

    dist = distance_matrix(xy)
    i, j = divmod(int(np.argmax(dist)), m)
    tour = [min(i, j), max(i, j)]
    remaining = [k for k in range(m) if k not in tour]

    while remaining:
        rem = np.array(remaining)
        t = np.array(tour)
        # edges (prev, next); for an open path the two ends take one-sided costs
        if closed:
            prev, nxt = t, np.roll(t, -1)
            cost = dist[np.ix_(rem, prev)] + dist[np.ix_(rem, nxt)] - dist[prev, nxt][None, :]
            positions = np.arange(1, len(t) + 1)
        else:
            prev, nxt = t[:-1], t[1:]
            inner = dist[np.ix_(rem, prev)] + dist[np.ix_(rem, nxt)] - dist[prev, nxt][None, :]
            head = dist[rem, t[0]][:, None]
            tail = dist[rem, t[-1]][:, None]
            cost = np.hstack([head, inner, tail])
            positions = np.arange(0, len(t) + 1)
        flat = int(np.argmin(cost))  # row-major: lowest RP index, then earliest position
        r, c = divmod(flat, cost.shape[1])
        tour.insert(int(positions[c]), int(rem[r]))
        remaining.remove(int(rem[r]))

    return tour
