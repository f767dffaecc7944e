"""HTTP service orchestrating documents, providers, sessions and export."""

from .app import create_app
from .config import ProviderRegistry, ServiceConfig, build_registry
from .store import ConflictError, DocumentStore, EditOperation, NotFoundError

__all__ = [
    "ConflictError",
    "DocumentStore",
    "EditOperation",
    "NotFoundError",
    "ProviderRegistry",
    "ServiceConfig",
    "build_registry",
    "create_app",
]
