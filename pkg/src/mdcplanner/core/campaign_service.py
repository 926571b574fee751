"""
Campaign service for the MDC planner.
Runs node-count sweeps over seeded deployments through every configured
planner, and tracks campaigns submitted to the HTTP service as jobs.
"""

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import pandas as pd
from loguru import logger
from pydantic import ValidationError

from ..config import settings
from ..models.campaign_models import (
    CampaignConfig,
    CampaignJob,
    CampaignResult,
    CampaignStatus,
)
from ..models.api_models import ValidationResponse
from ..models.metric_models import METRIC_COLUMNS, METRIC_COLUMNS_VERSION
from ..utils.exceptions import (
    CampaignNotFoundError,
    CampaignProcessingError,
    ConfigurationError,
    InvalidArgumentError,
    PlannerError,
    StorageError,
)
from ..utils.helpers import stable_hash
from .deployment import build_candidates, generate_scenario
from .metrics import full_report
from .planners import build_planners
from .result_store import ResultStore
from .rng import RNG_VERSION, cell_seed
from .rp_placement import select_rps
from .service_model import build_schedule
from .tour_model import bind_intent, objective

log = logger.bind(component="campaign")

# Frozen order of the identifying columns that precede the metric columns.
ID_COLUMNS = ["run_id", "seed_set", "n_sensors", "m_rps", "seed_index", "seed", "planner"]
EXTRA_COLUMNS = ["objective", "infeasible"]
RUN_COLUMNS = ID_COLUMNS + METRIC_COLUMNS + EXTRA_COLUMNS
SUMMARY_KEYS = ["seed_set", "planner", "n_sensors"]

ProgressCallback = Callable[[int, int], None]


def make_run_id(n_sensors: int, seed_index: int, planner: str) -> str:
    return f"N{n_sensors:04d}_seed{seed_index:03d}_{planner}"


@dataclass
class CellOutcome:
    """Rows and geometry directories produced by one (N, seed) cell."""

    rows: List[Dict[str, Any]] = field(default_factory=list)
    geometry: Dict[str, str] = field(default_factory=dict)


def run_cell(config: CampaignConfig, n_sensors: int, seed_index: int,
             store: Optional[ResultStore] = None) -> CellOutcome:
    """
    Evaluate every planner on one seeded deployment.

    The scenario and RP plan are shared by all planners of the cell; each
    planner draws from its own random stream.
    """
    seed = cell_seed(config.base_seed, n_sensors, seed_index)
    template = config.scenario.to_template()
    scenario = generate_scenario(seed, n_sensors, template)
    candidates = build_candidates(scenario, config.candidates)
    m = config.m_rps.m_for(n_sensors)
    if m > len(candidates):
        raise InvalidArgumentError(
            f"RP rule asks for {m} RPs but only {len(candidates)} candidates exist",
            details={"n_sensors": n_sensors, "m": m},
        )
    plan = select_rps(scenario, candidates, m)
    weights = bind_intent(config.intent, plan)

    diffusion = config.diffusion
    if config.output.snapshot_every is not None:
        diffusion = diffusion.model_copy(update={"snapshot_every": config.output.snapshot_every})
    planners = build_planners(config.planners, diffusion)

    outcome = CellOutcome()
    for name, planner in planners.items():
        run_id = make_run_id(n_sensors, seed_index, name.value)
        result = planner.build(seed, scenario, plan, weights)
        schedule, solution = build_schedule(result.order, scenario, plan, config.service)
        report = full_report(scenario, plan, schedule, solution, config.metrics)

        row: Dict[str, Any] = {
            "run_id": run_id,
            "seed_set": config.seed_set,
            "n_sensors": n_sensors,
            "m_rps": m,
            "seed_index": seed_index,
            "seed": seed,
            "planner": name.value,
        }
        row.update(report.as_row())
        row["objective"] = objective(schedule, weights, report)
        row["infeasible"] = solution.utilization >= 1.0
        outcome.rows.append(row)

        if store is not None and config.output.dump_geometry:
            out = store.write_geometry(run_id, scenario, plan, schedule, result.trajectory)
            outcome.geometry[run_id] = str(out)

    return outcome


def summarize(runs: pd.DataFrame) -> pd.DataFrame:
    """Seed-averaged mean and sample standard deviation per planner and N."""
    values = METRIC_COLUMNS + ["objective"]
    frame = runs[SUMMARY_KEYS + values + ["infeasible"]].copy()
    frame["service_converged"] = frame["service_converged"].astype(float)
    frame["infeasible"] = frame["infeasible"].astype(int)

    grouped = frame.groupby(SUMMARY_KEYS, sort=False)
    means = grouped[values].mean().add_suffix("_mean")
    stds = grouped[values].std(ddof=1).fillna(0.0).add_suffix("_std")
    counts = grouped.size().rename("n_runs")
    infeasible = grouped["infeasible"].sum().rename("infeasible_runs")

    interleaved = [c for v in values for c in (f"{v}_mean", f"{v}_std")]
    summary = pd.concat([counts, infeasible, means, stds], axis=1)
    summary = summary[["n_runs", "infeasible_runs"] + interleaved].reset_index()
    return summary


def resolve_output_dir(config: CampaignConfig, out_dir: Optional[Path] = None) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if config.output.out_dir is not None:
        return Path(config.output.out_dir)
    return settings.results_dir / config.name


def run_campaign(config: CampaignConfig, out_dir: Optional[Path] = None,
                 workers: Optional[int] = None,
                 progress: Optional[ProgressCallback] = None) -> CampaignResult:
    """
    Run a complete campaign and write its tables.

    Args:
        config: Validated campaign document
        out_dir: Output directory override
        workers: Parallel cells (defaults to settings.workers)
        progress: Called with (completed cells, infeasible rows so far)

    Returns:
        CampaignResult with the paths written

    Raises:
        StorageError: If the output directory is not writable
    """
    store = ResultStore(resolve_output_dir(config, out_dir))
    store.ensure_root()
    workers = workers or settings.workers

    cells: List[Tuple[int, int]] = [(n, s) for n in config.sweep for s in range(config.seeds)]
    log.info(f"Campaign '{config.name}': {len(cells)} cells x {len(config.planners)} planners "
             f"-> {store.root}")

    completed = 0
    infeasible = 0
    lock = threading.Lock()

    def evaluate(cell: Tuple[int, int]) -> CellOutcome:
        nonlocal completed, infeasible
        outcome = run_cell(config, cell[0], cell[1], store)
        with lock:
            completed += 1
            infeasible += sum(1 for r in outcome.rows if r["infeasible"])
            if progress is not None:
                progress(completed, infeasible)
        return outcome

    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(evaluate, cells))
    else:
        outcomes = [evaluate(cell) for cell in cells]

    rows = [row for outcome in outcomes for row in outcome.rows]
    geometry = {k: v for outcome in outcomes for k, v in outcome.geometry.items()}

    runs = pd.DataFrame(rows, columns=RUN_COLUMNS)
    summary = summarize(runs)
    store.write_runs(runs)
    store.write_summary(summary)

    run_ids = runs["run_id"].tolist()
    manifest = {
        "name": config.name,
        "seed_set": config.seed_set,
        "config_hash": stable_hash(config.model_dump(mode="json")),
        "rng_version": RNG_VERSION,
        "metric_columns_version": METRIC_COLUMNS_VERSION,
        "metric_model_version": config.metrics.model_version,
        "run_columns": RUN_COLUMNS,
        "planners": [p.value for p in config.planners],
        "sweep": list(config.sweep),
        "seeds": config.seeds,
        "run_ids": run_ids,
        "geometry_runs": sorted(geometry),
    }
    store.write_manifest(manifest)

    if infeasible:
        log.warning(f"Campaign '{config.name}': {infeasible} rows had utilization >= 1")
    log.info(f"Campaign '{config.name}' finished: {len(runs)} rows, {len(summary)} summary rows")

    return CampaignResult(
        name=config.name,
        output_dir=str(store.root),
        runs_csv=str(store.runs_path),
        summary_csv=str(store.summary_path),
        manifest_json=str(store.manifest_path),
        n_rows=len(runs),
        n_summary_rows=len(summary),
        infeasible_rows=infeasible,
        run_ids=run_ids,
        geometry=geometry,
    )


class CampaignService:
    """
    Tracks campaigns submitted to the HTTP service.
    Each job runs in the background and writes to its own directory under
    settings.results_dir.
    """

    def __init__(self, results_dir: Optional[Path] = None):
        self.jobs: Dict[str, CampaignJob] = {}
        self.results_dir = Path(results_dir) if results_dir is not None else settings.results_dir

    def create_job(self, config: CampaignConfig) -> CampaignJob:
        """
        Register a new campaign job.

        Args:
            config: Validated campaign document

        Returns:
            CampaignJob in pending status
        """
        job = CampaignJob(config=config)
        job.output_dir = str(self.results_dir / job.job_id)
        self.jobs[job.job_id] = job
        log.info(f"Created campaign job {job.job_id}: '{config.name}' ({config.total_cells} cells)")
        return job

    def run_job(self, job_id: str) -> None:
        """Execute a pending job; failures are recorded on the job, not raised."""
        job = self.get_job(job_id)
        if job.status != CampaignStatus.PENDING:
            raise CampaignProcessingError(f"Campaign job {job_id} is not in pending status")

        job.update_status(CampaignStatus.RUNNING)

        def on_progress(completed: int, infeasible: int) -> None:
            job.progress.completed_cells = completed
            job.progress.infeasible_rows = infeasible

        try:
            result = run_campaign(job.config, out_dir=Path(job.output_dir), progress=on_progress)
            job.run_ids = result.run_ids
            job.update_status(CampaignStatus.COMPLETED)
            log.info(f"Campaign job {job_id} completed")
        except PlannerError as e:
            log.error(f"Campaign job {job_id} failed: {e.message}")
            job.update_status(CampaignStatus.FAILED, error_message=e.message)
        except Exception as e:
            log.error(f"Campaign job {job_id} failed: {e}")
            job.update_status(CampaignStatus.FAILED, error_message=str(e))

    def get_job(self, job_id: str) -> CampaignJob:
        """Get campaign job by ID."""
        if job_id not in self.jobs:
            raise CampaignNotFoundError(f"Campaign job {job_id} not found")
        return self.jobs[job_id]

    def get_all_jobs(self) -> List[CampaignJob]:
        return list(self.jobs.values())

    def get_jobs_by_status(self, status: CampaignStatus) -> List[CampaignJob]:
        return [job for job in self.jobs.values() if job.status == status]

    def get_store(self, job_id: str) -> ResultStore:
        """Result store of a finished job."""
        job = self.get_job(job_id)
        if job.status != CampaignStatus.COMPLETED:
            raise CampaignProcessingError(
                f"Campaign job {job_id} is {job.status.value}; results are available once completed"
            )
        return ResultStore(job.output_dir)


# Global campaign service instance
_campaign_service: Optional[CampaignService] = None


def get_campaign_service() -> CampaignService:
    """Get or create campaign service instance."""
    global _campaign_service

    if _campaign_service is None:
        _campaign_service = CampaignService()

    return _campaign_service


def _format_errors(error: ValidationError) -> List[Dict[str, str]]:
    return [
        {"loc": ".".join(str(p) for p in err["loc"]), "msg": err["msg"], "type": err["type"]}
        for err in error.errors(include_url=False)
    ]


def load_campaign_config(path: Union[str, Path]) -> CampaignConfig:
    """
    Read and validate a campaign JSON document.

    Raises:
        StorageError: If the file cannot be read
        ConfigurationError: If the document is not valid JSON or fails validation
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Cannot read campaign config {path}: {e}", details={"path": str(path)})
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path} is not valid JSON: {e}")
    try:
        return CampaignConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid campaign config {path}", details={"errors": _format_errors(e)})


def check_campaign(data: Dict[str, Any]) -> ValidationResponse:
    """Validate a campaign document without running it."""
    try:
        config = CampaignConfig.model_validate(data)
    except ValidationError as e:
        name = data.get("name") if isinstance(data, dict) else None
        name = name if isinstance(name, str) else None
        return ValidationResponse(valid=False, name=name, errors=_format_errors(e))
    return ValidationResponse(
        valid=True,
        name=config.name,
        total_cells=config.total_cells,
        total_rows=config.total_cells * len(config.planners),
        config_hash=stable_hash(config.model_dump(mode="json")),
    )
