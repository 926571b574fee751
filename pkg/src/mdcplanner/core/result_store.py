"""
Result storage for campaigns.
Writes the per-run and summary CSVs, the manifest and per-run geometry dumps,
and resolves dumps by run id.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..models.network_models import NetworkScenario, RpPlan
from ..models.planning_models import TourSchedule, WaypointTrajectory
from ..utils.exceptions import RunNotFoundError, StorageError
from ..utils.validators import validate_run_id
from .deployment import save_scenario
from .rp_placement import save_rp_plan

RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.csv"
MANIFEST_FILE = "manifest.json"
GEOMETRY_DIR = "geometry"
FLOAT_FORMAT = "%.12g"


class ResultStore:
    """
    Manages the output directory of one campaign.

    Layout:
        <root>/runs.csv, summary.csv, manifest.json
        <root>/geometry/<run_id>/{sensors,rps,association,tour}.csv,
            trajectory_kNNN.csv, scenario.json, rp_plan.json
    """

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @property
    def runs_path(self) -> Path:
        return self.root / RUNS_FILE

    @property
    def summary_path(self) -> Path:
        return self.root / SUMMARY_FILE

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_FILE

    def ensure_root(self) -> Path:
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Cannot create output directory {self.root}: {e}",
                               details={"path": str(self.root)})
        return self.root

    def _write_csv(self, df: pd.DataFrame, path: Path) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        except OSError as e:
            raise StorageError(f"Failed to write {path}: {e}", details={"path": str(path)})
        return path

    def write_runs(self, runs: pd.DataFrame) -> Path:
        path = self._write_csv(runs, self.runs_path)
        logger.info(f"Wrote {len(runs)} run rows to {path}")
        return path

    def write_summary(self, summary: pd.DataFrame) -> Path:
        path = self._write_csv(summary, self.summary_path)
        logger.info(f"Wrote {len(summary)} summary rows to {path}")
        return path

    def write_manifest(self, manifest: Dict[str, Any]) -> Path:
        try:
            self.ensure_root()
            self.manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")
        except OSError as e:
            raise StorageError(f"Failed to write manifest: {e}")
        return self.manifest_path

    # Geometry dumps

    def geometry_dir(self, run_id: str) -> Path:
        validate_run_id(run_id)
        return self.root / GEOMETRY_DIR / run_id

    def write_geometry(self, run_id: str, scenario: NetworkScenario, plan: RpPlan,
                       schedule: TourSchedule, trajectory: Optional[WaypointTrajectory] = None) -> Path:
        """
        Dump the plot-ready geometry of one run.

        Args:
            run_id: Run identifier, used as directory name
            scenario: Sensors and area
            plan: RP positions and association
            schedule: Visiting order, dwell and arrival times
            trajectory: Diffusion trajectory in meters, with optional snapshots

        Returns:
            The run's geometry directory
        """
        out = self.geometry_dir(run_id)
        positions = scenario.positions()
        rp_xy = plan.positions()

        sensors = pd.DataFrame({
            "sensor_id": scenario.sensor_ids(),
            "x_m": positions[:, 0],
            "y_m": positions[:, 1],
            "rate_bps": scenario.rates(),
        })
        rps = pd.DataFrame({
            "rp": np.arange(plan.m),
            "x_m": rp_xy[:, 0],
            "y_m": rp_xy[:, 1],
            "rate_bps": plan.rates(),
            "dwell_s": schedule.dwell_s,
            "visit_time_s": schedule.visit_times_s or [np.nan] * plan.m,
        })
        assignment = plan.assignment(scenario.sensor_ids())
        association = pd.DataFrame({
            "sensor_id": scenario.sensor_ids(),
            "rp": assignment,
            "distance_m": np.linalg.norm(positions - rp_xy[assignment], axis=1) if len(positions) else [],
            "covered": [plan.coverage_flag[i] for i in scenario.sensor_ids()],
        })
        path = list(schedule.order)
        if scenario.closed_tour and plan.m > 1:
            path.append(path[0])
        tour = pd.DataFrame({
            "step": np.arange(len(path)),
            "rp": path,
            "x_m": rp_xy[path, 0],
            "y_m": rp_xy[path, 1],
        })

        self._write_csv(sensors, out / "sensors.csv")
        self._write_csv(rps, out / "rps.csv")
        self._write_csv(association, out / "association.csv")
        self._write_csv(tour, out / "tour.csv")

        if trajectory is not None:
            frames = trajectory.snapshots or {0: trajectory.points}
            for k, points in sorted(frames.items(), reverse=True):
                self._write_csv(
                    pd.DataFrame({"h": np.arange(len(points)), "x_m": points[:, 0], "y_m": points[:, 1]}),
                    out / f"trajectory_k{k:03d}.csv",
                )

        save_scenario(scenario, out / "scenario.json")
        save_rp_plan(plan, out / "rp_plan.json")
        logger.debug(f"Geometry for {run_id} written to {out}")
        return out

    def list_runs(self) -> List[str]:
        base = self.root / GEOMETRY_DIR
        if not base.exists():
            return []
        return sorted(p.name for p in base.iterdir() if p.is_dir())

    def emit_geometry(self, run_id: str) -> Dict[str, Path]:
        """
        Locate the geometry dump of a run.

        Returns:
            Mapping of layer name to CSV path

        Raises:
            RunNotFoundError: If the run has no geometry dump
        """
        try:
            out = self.geometry_dir(run_id)
        except ValueError:
            raise RunNotFoundError(f"Run {run_id} not found")
        if not out.is_dir():
            raise RunNotFoundError(f"Run {run_id} has no geometry dump",
                                   details={"run_id": run_id, "root": str(self.root)})
        return {p.stem: p for p in sorted(out.glob("*.csv"))}

    def layer_path(self, run_id: str, layer: str) -> Path:
        layers = self.emit_geometry(run_id)
        if layer not in layers:
            raise RunNotFoundError(f"Run {run_id} has no layer '{layer}'",
                                   details={"layers": sorted(layers)})
        return layers[layer]
