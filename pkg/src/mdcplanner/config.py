"""
Configuration management for the MDC planner.
Handles environment variables, runtime settings, and the default parameter
sections used by the planning pipeline.
"""

from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class CandidateMode(str, Enum):
    """How the RP candidate set is built."""
    GRID = "grid"
    SENSOR_POSITIONS = "sensor_positions"


class DenoiserKind(str, Enum):
    """Noise predictor used by the reverse sampler."""
    ZERO = "zero"
    ANALYTIC_REFERENCE = "analytic_reference"
    EXTERNAL = "external"


class CandidateConfig(BaseModel):
    """Candidate set construction for RP placement."""
    model_config = ConfigDict(frozen=True)

    mode: CandidateMode = Field(default=CandidateMode.GRID, description="Candidate construction mode")
    spacing_m: float = Field(default=10.0, description="Grid spacing in meters (grid mode only)")


class DiffusionConfig(BaseModel):
    """Reverse-diffusion tour construction parameters."""
    model_config = ConfigDict(frozen=True)

    waypoints: int = Field(default=80, ge=2, description="Waypoint count H")
    k_steps: int = Field(default=50, ge=1, description="Reverse diffusion steps K")
    beta_start: float = Field(default=1e-4, gt=0, lt=1, description="First beta of the linear schedule")
    beta_end: float = Field(default=2e-2, gt=0, lt=1, description="Last beta of the linear schedule")
    gamma0: float = Field(default=0.1, ge=0, description="Guidance step scale; gamma_k = gamma0 * (1 - alpha_bar_k)")
    beta_soft: float = Field(default=50.0, gt=0, description="Softmin temperature in normalized units")
    denoiser: DenoiserKind = Field(default=DenoiserKind.ANALYTIC_REFERENCE, description="Noise predictor")
    two_opt: bool = Field(default=True, description="Refine the extracted order with 2-opt")
    max_passes: int = Field(default=64, ge=0, description="2-opt pass cap")
    snapshot_every: Optional[int] = Field(default=None, ge=1, description="Keep every n-th reverse-step state")


class ServiceConfig(BaseModel):
    """Dwell-time fixed point parameters."""
    model_config = ConfigDict(frozen=True)

    epsilon_s: float = Field(default=1e-6, gt=0, description="Convergence tolerance in seconds")
    max_iter: int = Field(default=10_000, ge=1, description="Iteration cap")


class LinkModelConfig(BaseModel):
    """Multi-hop sensor-to-RP delivery model."""
    model_config = ConfigDict(frozen=True)

    p_link: float = Field(default=0.98, ge=0, le=1, description="Per-hop delivery probability")
    hop_max: int = Field(default=3, ge=1, description="Hop cap; sensors beyond it deliver nothing")


class RadioModelConfig(BaseModel):
    """First-order radio energy model."""
    model_config = ConfigDict(frozen=True)

    e_elec_j_per_bit: float = Field(default=50e-9, ge=0, description="Electronics energy per bit")
    eps_fs_j_per_bit_m2: float = Field(default=10e-12, ge=0, description="Free-space amplifier energy")


class MetricConfig(BaseModel):
    """Metric model parameters; model_version tags the formula set."""
    model_config = ConfigDict(frozen=True)

    link: LinkModelConfig = Field(default_factory=LinkModelConfig)
    radio: RadioModelConfig = Field(default_factory=RadioModelConfig)
    model_version: str = Field(default="metrics-v1", description="Formula set identifier")


class IntentConfig(BaseModel):
    """Intent weight vector and the RP importance rule."""
    model_config = ConfigDict(frozen=True)

    eta_t: float = Field(default=0.5, ge=0, description="Tour-time weight")
    eta_e: float = Field(default=0.0, ge=0, description="Sensor-energy weight")
    eta_f: float = Field(default=0.3, ge=0, description="Freshness weight")
    eta_p: float = Field(default=0.2, ge=0, description="RP-importance weight")
    rp_importance: Union[str, List[float]] = Field(
        default="uniform", description="'uniform', 'load' or an explicit list of w_j"
    )

    @field_validator("rp_importance")
    @classmethod
    def check_importance(cls, v):
        if isinstance(v, str) and v not in ("uniform", "load"):
            raise ValueError("rp_importance must be 'uniform', 'load' or a list of weights")
        if isinstance(v, list) and any(w < 0 for w in v):
            raise ValueError("rp_importance weights must be >= 0")
        return v


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_prefix="MDC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application settings
    app_name: str = Field(default="mdc-planner", description="Application name")
    app_version: str = Field(default="1.0.0", description="Application version")
    debug: bool = Field(default=False, description="Debug mode")

    # Server settings
    host: str = Field(default="0.0.0.0", description="Server host")
    port: int = Field(default=8000, description="Server port")

    # Campaign execution
    results_dir: Path = Field(default=Path("results"), description="Default campaign output directory")
    workers: int = Field(default=1, ge=1, description="Parallel (N, seed) cells per campaign")
    default_seeds: int = Field(default=30, ge=1, description="Seeds per sweep point when a config omits it")

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[str] = Field(default=None, description="Log file path")

    def ensure_results_dir(self) -> Path:
        """Create the results directory if it does not exist."""
        self.results_dir.mkdir(parents=True, exist_ok=True)
        return self.results_dir


# Global settings instance
settings = Settings()
