"""HTTP service wrapping the library."""

from .app import app

__all__ = ["app"]
