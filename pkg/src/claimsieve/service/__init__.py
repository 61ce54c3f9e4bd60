"""FastAPI annotation service wrapping the core package."""

from .app import create_app, resolve_ui_dir
from .store import CorpusStore

__all__ = ["CorpusStore", "create_app", "resolve_ui_dir"]
