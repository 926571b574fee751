"""Mobile data collector planning: RP placement, tour construction, service model and metrics."""

__version__ = "1.0.0"
