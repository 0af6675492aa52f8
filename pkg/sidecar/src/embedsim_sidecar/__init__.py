"""HTTP sidecar serving embedding models behind the JSON embeddings protocol."""

__version__ = "0.1.0"

from .app import create_app
from .config import ModelEntry, SidecarConfig, default_config, load_config
from .hashing import mock_vectors, xxh64
from .models import PUBLISHED_DIMS, MockModel, published_dim

__all__ = [
    "PUBLISHED_DIMS",
    "MockModel",
    "ModelEntry",
    "SidecarConfig",
    "create_app",
    "default_config",
    "load_config",
    "mock_vectors",
    "published_dim",
    "xxh64",
]
