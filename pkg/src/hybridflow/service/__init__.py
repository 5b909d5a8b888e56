"""HTTP service wrapping the core package; run with `hybridflow serve`."""

from .app import app

__all__ = ["app"]
