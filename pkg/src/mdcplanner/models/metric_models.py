"""
Pydantic model for the evaluation metrics of one (scenario, plan, schedule) triple.
"""

import math
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Frozen column order of the per-run CSV; bump METRIC_COLUMNS_VERSION on change.
METRIC_COLUMNS_VERSION = "1"
METRIC_COLUMNS: List[str] = [
    "tour_time_s",
    "tour_length_m",
    "travel_time_s",
    "total_dwell_s",
    "freshness_s",
    "collection_ratio",
    "pdr",
    "energy_efficiency",
    "throughput_bps",
    "fairness",
    "total_energy_j",
    "generated_bits",
    "collected_bits",
    "delivered_bits",
    "utilization",
    "service_converged",
]


class MetricReport(BaseModel):
    """The evaluation metrics plus the reference values used by the objective."""
    model_config = ConfigDict(frozen=True)

    tour_time_s: float = Field(..., ge=0, description="Converged tour time T")
    tour_length_m: float = Field(..., ge=0, description="Tour length L(pi)")
    travel_time_s: float = Field(..., ge=0, description="Travel-only time T_tr")
    total_dwell_s: float = Field(..., ge=0, description="Sum of dwell times")
    freshness_s: float = Field(..., ge=0, description="Data-weighted mean age at delivery")
    collection_ratio: float = Field(..., ge=0, le=1, description="Collected / generated bits")
    pdr: float = Field(..., ge=0, le=1, description="Delivered / generated bits")
    energy_efficiency: float = Field(..., ge=0, le=1, description="Reference energy per delivered bit / actual")
    throughput_bps: float = Field(..., ge=0, description="Delivered bits per second of tour")
    fairness: float = Field(..., ge=0, le=1, description="Jain index over per-sensor delivered fractions")

    total_energy_j: float = Field(..., ge=0, description="Sensor-side radio energy over one tour")
    generated_bits: float = Field(..., ge=0)
    collected_bits: float = Field(..., ge=0)
    delivered_bits: float = Field(..., ge=0)
    utilization: float = Field(default=0.0, ge=0)
    service_converged: bool = True

    # Reference values that make the objective dimensionless
    t_ref_s: float = Field(..., description="Tour-time reference T_ref")
    e_ref_j: float = Field(..., description="Energy reference E_ref")
    delta_ref_s: float = Field(..., description="Freshness reference Delta_ref")

    model_version: str = Field(default="metrics-v1", description="Formula set identifier")

    @model_validator(mode="after")
    def check_accounting(self) -> "MetricReport":
        if self.pdr > self.collection_ratio + 1e-12:
            raise ValueError("pdr cannot exceed collection_ratio")
        if not math.isclose(self.tour_time_s, self.travel_time_s + self.total_dwell_s,
                            rel_tol=0.0, abs_tol=1e-6):
            raise ValueError("tour_time must equal travel_time + total_dwell")
        return self

    def as_row(self) -> Dict[str, object]:
        """Metric values in the frozen CSV column order."""
        data = self.model_dump()
        return {column: data[column] for column in METRIC_COLUMNS}
