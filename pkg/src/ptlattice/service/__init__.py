"""FastAPI service wrapping the lattice analyses."""

from .app import app

__all__ = ["app"]
