"""FastAPI service and shared request/response schemas."""

from . import handlers, schemas  # noqa: F401
from .app import app  # noqa: F401
