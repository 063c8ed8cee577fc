"""Headless dual-arm household simulation engine."""

from .engine import Environment
from .world import WorldState, load_scene

__all__ = ["Environment", "WorldState", "load_scene"]
__version__ = "0.1.0"
