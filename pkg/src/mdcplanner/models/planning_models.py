"""
Models for tour planning: the sampler's numeric state (trajectory, noise
schedule, denoiser choice) and the service-time results (service solution,
buffer state, tour schedule).
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import DenoiserKind
from ..utils.exceptions import InvalidArgumentError


@dataclass(frozen=True)
class WaypointTrajectory:
    """An H x 2 waypoint array (the sampler state X_k)."""

    points: np.ndarray
    normalized: bool = True
    snapshots: Dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidArgumentError(f"trajectory must have shape (H, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("trajectory contains non-finite waypoints")
        object.__setattr__(self, "points", pts)

    @property
    def h(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step coefficients of the reverse sampler, indexed by k-1 for k = 1..K."""

    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        k = len(self.beta)
        if k < 1:
            raise InvalidArgumentError("noise schedule needs at least one step")
        for name in ("alpha", "alpha_bar", "sigma", "gamma"):
            if len(getattr(self, name)) != k:
                raise InvalidArgumentError(f"schedule array '{name}' has length {len(getattr(self, name))}, expected {k}")
        if np.any(self.beta <= 0) or np.any(self.beta >= 1):
            raise InvalidArgumentError("beta_k must lie in (0, 1)")
        if k > 1 and np.any(np.diff(self.alpha_bar) >= 0):
            raise InvalidArgumentError("alpha_bar must be strictly decreasing in k")
        if np.any(self.sigma < 0) or np.any(self.gamma < 0):
            raise InvalidArgumentError("sigma_k and gamma_k must be >= 0")

    @property
    def k_steps(self) -> int:
        return len(self.beta)

    @classmethod
    def linear(cls, k_steps: int, beta_start: float = 1e-4, beta_end: float = 2e-2,
               gamma0: float = 0.1) -> "NoiseSchedule":
        """Linear beta schedule with sigma_k = sqrt(beta_k) and gamma_k = gamma0 * (1 - alpha_bar_k)."""
        if k_steps < 1:
            raise InvalidArgumentError("k_steps must be >= 1")
        beta = np.linspace(beta_start, beta_end, k_steps) if k_steps > 1 else np.array([beta_start])
        alpha = 1.0 - beta
        alpha_bar = np.cumprod(alpha)
        return cls(
            beta=beta,
            alpha=alpha,
            alpha_bar=alpha_bar,
            sigma=np.sqrt(beta),
            gamma=gamma0 * (1.0 - alpha_bar),
        )

    def with_gamma(self, gamma: np.ndarray) -> "NoiseSchedule":
        return NoiseSchedule(self.beta, self.alpha, self.alpha_bar, self.sigma, np.asarray(gamma, dtype=float))

    def with_sigma(self, sigma: np.ndarray) -> "NoiseSchedule":
        return NoiseSchedule(self.beta, self.alpha, self.alpha_bar, np.asarray(sigma, dtype=float), self.gamma)


@dataclass(frozen=True)
class DenoiserSpec:
    """
    Which noise predictor the sampler uses.

    `reference_order` is required for the analytic reference predictor; `handle`
    is any object exposing `predict(x, k, alpha_bar_k, rp_positions, weights)`
    and is required for the external kind.
    """

    kind: DenoiserKind = DenoiserKind.ANALYTIC_REFERENCE
    reference_order: Optional[List[int]] = None
    handle: Optional[Any] = None


class ServiceSolution(BaseModel):
    """Converged dwell times of the service fixed point."""
    model_config = ConfigDict(frozen=True)

    dwell_s: List[float] = Field(..., description="tau_j per RP (indexed by RP id)")
    tour_time_s: float = Field(..., description="Converged tour time T")
    travel_time_s: float = Field(..., description="Travel-only time T_tr")
    iterations: int = Field(..., ge=0)
    converged: bool
    utilization: float = Field(..., description="rho = sum_j Lambda_j / C_j")

    @property
    def total_dwell_s(self) -> float:
        return float(math.fsum(self.dwell_s))


class BufferState(BaseModel):
    """Per-RP buffered data over one tour, capped at the buffer capacity."""
    model_config = ConfigDict(frozen=True)

    offered_bits: List[float] = Field(..., description="Lambda_j * T before the cap")
    stored_bits: List[float] = Field(..., description="D_j = min(Lambda_j * T, B_j)")
    overflow_bits: List[float] = Field(..., description="Data lost to the cap")
    overflow: List[bool]

    def accept_fraction(self) -> np.ndarray:
        """Fraction of offered data each RP buffer accepted (1 when nothing was offered)."""
        offered = np.array(self.offered_bits, dtype=float)
        stored = np.array(self.stored_bits, dtype=float)
        return np.divide(stored, offered, out=np.ones_like(offered), where=offered > 0)


class TourSchedule(BaseModel):
    """Visiting order, dwell times and timing of one MDC tour."""
    model_config = ConfigDict(frozen=True)

    order: List[int] = Field(..., min_length=1, description="Permutation pi of RP indices")
    dwell_s: List[float] = Field(..., description="tau_j per RP (indexed by RP id)")
    travel_time_s: float = Field(..., ge=0)
    tour_time_s: float = Field(..., ge=0)
    tour_length_m: float = Field(..., ge=0)
    visit_times_s: List[float] = Field(default_factory=list, description="Arrival time t_j per RP id")
    converged: bool = True
    iterations: int = 0
    utilization: float = 0.0

    @model_validator(mode="after")
    def check_schedule(self) -> "TourSchedule":
        m = len(self.order)
        if sorted(self.order) != list(range(m)):
            raise ValueError("order must be a permutation of 0..M-1")
        if len(self.dwell_s) != m:
            raise ValueError("dwell_s must have one entry per RP")
        if any(t < 0 for t in self.dwell_s):
            raise ValueError("dwell times must be >= 0")
        if self.visit_times_s and len(self.visit_times_s) != m:
            raise ValueError("visit_times_s must have one entry per RP")
        expected = self.travel_time_s + math.fsum(self.dwell_s)
        if not math.isclose(self.tour_time_s, expected, rel_tol=1e-9, abs_tol=1e-6):
            raise ValueError(
                f"tour_time {self.tour_time_s} != travel_time + total dwell {expected}"
            )
        return self

    @property
    def total_dwell_s(self) -> float:
        return float(math.fsum(self.dwell_s))
