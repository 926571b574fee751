"""
API package for the MDC planner service.
"""

from . import campaigns

__all__ = ["campaigns"]
